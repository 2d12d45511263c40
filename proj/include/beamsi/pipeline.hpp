#pragma once

// The four user-facing commands as library calls: generate ground truth,
// train one method, evaluate checkpoints, sweep a hyperparameter.

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "beamsi/artifacts.hpp"
#include "beamsi/config.hpp"

namespace beamsi {

enum class Method { neuralsi, dnn, pinn };

Method parse_method(const std::string& name);
std::string method_name(Method m);

enum class SweepAxis { layers, ratio, batch };

SweepAxis parse_axis(const std::string& name);
std::string axis_name(SweepAxis a);

using LogSink = std::function<void(const std::string&)>;

/// File names inside a run directory.
struct RunLayout {
  fs::path root;

  fs::path config() const { return root / "config.txt"; }
  fs::path truth() const { return root / "truth.csv"; }
  fs::path truth_extended() const { return root / "truth_extended.csv"; }
  fs::path truth_fields() const { return root / "fields_truth.csv"; }
  fs::path samples() const { return root / "samples.csv"; }
  fs::path checkpoint(Method m) const { return root / ("checkpoint_" + method_name(m) + ".bin"); }
  fs::path history(Method m) const { return root / ("history_" + method_name(m) + ".csv"); }
  fs::path identified_fields() const { return root / "fields_neuralsi.csv"; }
  fs::path prediction(Method m) const { return root / ("prediction_" + method_name(m) + ".csv"); }
  fs::path metrics() const { return root / "metrics.csv"; }
  fs::path timing() const { return root / "timing.txt"; }
  fs::path plots() const { return root / "plots"; }
};

Provenance provenance_for(const RunConfig& cfg, const std::string& kind);

/// Truth trajectory (interpolation and extended windows), true fields and
/// the seeded sample set.
void cmd_generate(const RunConfig& cfg, const fs::path& out, const LogSink& log = {});

/// Needs the generate artifacts; writes checkpoint and history.
void cmd_train(const RunConfig& cfg, Method method, const fs::path& out, const LogSink& log = {});

/// Evaluates the given methods (all with a checkpoint present when empty)
/// and writes metrics.csv, predictions, timing.txt and SVG plots.
std::vector<MetricsReport> cmd_eval(const RunConfig& cfg, const fs::path& out,
                                    std::vector<Method> methods = {}, const LogSink& log = {});

struct SweepRow {
  double value = 0.0;
  bool ok = false;
  MetricsReport report;
  double final_loss = 0.0;
  std::string message;
};

/// NeuralSI generate/train/eval per value in out/<axis>_<value>/, rows
/// collected into out/sweep_<axis>.csv. Failed cells are recorded and the
/// sweep continues. threads <= 0 reads BEAMSI_THREADS (default 1).
std::vector<SweepRow> cmd_sweep(const RunConfig& cfg, SweepAxis axis, const std::vector<double>& values,
                                const fs::path& out, int threads = 0, const LogSink& log = {});

}  // namespace beamsi
