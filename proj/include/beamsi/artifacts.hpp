#pragma once

// On-disk artifacts. Every file opens with '#'-prefixed provenance lines
// (tool version, config hash, seed, kind) so mixed inputs can be refused.
// CSV numbers are written with 17 significant digits.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "beamsi/baselines.hpp"
#include "beamsi/evaluation.hpp"
#include "beamsi/trainer.hpp"

namespace beamsi {

namespace fs = std::filesystem;

struct Provenance {
  std::string tool;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string kind;

  std::string header() const;
};

/// Provenance of an existing file; ArtifactError if missing or malformed.
Provenance read_provenance(const fs::path& path);

/// ArtifactError unless the file exists and carries the expected hash.
void require_provenance(const fs::path& path, std::uint64_t config_hash, const std::string& kind);

std::string format_number(double v);

/// time column then one displacement column per node.
void write_trajectory_csv(const fs::path& path, const Trajectory& traj, const Provenance& prov);
/// Velocities come back as zero.
Trajectory read_trajectory_csv(const fs::path& path);

/// Columns x, modulus, damping over all n+2 coordinates; damping is nan at
/// the supports.
void write_fields_csv(const fs::path& path, const SpatialGrid& grid, const ParameterField& fields,
                      const Provenance& prov);
ParameterField read_fields_csv(const fs::path& path);

void write_samples_csv(const fs::path& path, const SampleSet& samples, const Provenance& prov);
SampleSet read_samples_csv(const fs::path& path);

/// epoch, mean_loss, lr, frechet_P, frechet_C
void write_history_csv(const fs::path& path, const std::vector<EpochRecord>& history,
                       const Provenance& prov);
/// epoch, total, data, pde, boundary, accepted
void write_baseline_history_csv(const fs::path& path, const std::vector<BaselineEpoch>& history,
                                const Provenance& prov);

/// One row per method; Frechet columns are blank for methods that do not
/// identify fields. Timing is kept out of the CSV so reruns are
/// byte-identical.
void write_metrics_csv(const fs::path& path, const std::vector<MetricsReport>& reports,
                       const Provenance& prov);

/// Text header (schema, dims, embedding, optimizer hyperparameters, step)
/// then little-endian doubles: parameters, first moment, second moment.
void save_checkpoint(const fs::path& path, const MlpModel& model, const AdamWState& optimizer,
                     const Provenance& prov);
struct Checkpoint {
  Provenance provenance;
  MlpModel model;
  AdamWState optimizer;
};
Checkpoint load_checkpoint(const fs::path& path);

/// Same layout for the regressors (parameters only).
void save_regressor(const fs::path& path, const RegressorModel& model, const Provenance& prov);
struct RegressorCheckpoint {
  Provenance provenance;
  RegressorModel model;
};
RegressorCheckpoint load_regressor(const fs::path& path);

}  // namespace beamsi
