#pragma once

// Run configuration: every knob of a generate/train/eval/sweep run, read
// from and written to a flat "section.key = value" text file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "beamsi/baselines.hpp"
#include "beamsi/trainer.hpp"

namespace beamsi {

inline constexpr const char* kToolVersion = "beamsi 0.3.0";

struct BeamBlock {
  double length = 0.40;
  double width = 0.05;
  double thickness = 0.005;
  double density = 2700.0;
  double modulus = 70.0e9;
};

struct RunConfig {
  BeamBlock beam;
  int nodes = 16;
  int n_save = 160;
  double t_end = 0.045;
  double solver_safety = 0.5;
  double modulus_bound = 3.0;  ///< field bound used to fix the internal step
  LoadModel load;
  GroundTruthProfile truth;
  NetConfig net;
  TrainConfig train;
  BaselineConfig dnn = BaselineConfig::dnn();
  BaselineConfig pinn = BaselineConfig::pinn();
  int extrapolation_multiplier = 2;
  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";

  /// Problem with the internal step resolved.
  BeamProblem problem() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Parse "key = value" lines; '#' starts a comment. Unknown keys,
/// duplicates and malformed values raise ConfigError naming the key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text (every key, fixed order, doubles at 17 digits);
/// parse_config(to_text(c)) reproduces c exactly.
std::string to_text(const RunConfig& cfg);

/// FNV-1a over the canonical text, excluding out_dir.
std::uint64_t config_hash(const RunConfig& cfg);

/// All recognised keys in canonical order.
std::vector<std::string> config_keys();

}  // namespace beamsi
