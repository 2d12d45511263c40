#pragma once

// Identification by gradient descent through the solver: sparse samples of
// the measured displacement field, minibatched MAE, discrete adjoint,
// AdamW with a step learning-rate schedule.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "beamsi/evaluation.hpp"
#include "beamsi/param_net.hpp"

namespace beamsi {

struct Sample {
  int node = 0;
  int save = 0;  ///< 1..n_save
  double value = 0.0;
};

class SampleSet {
 public:
  SampleSet() = default;
  /// Validates uniqueness and bounds.
  SampleSet(std::vector<Sample> samples, int nodes, int saves, std::uint64_t seed, double ratio);

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  int nodes() const noexcept { return nodes_; }
  int saves() const noexcept { return saves_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double ratio() const noexcept { return ratio_; }
  /// Content hash over shape and (node, save, value) triples.
  std::uint64_t hash() const;

 private:
  std::vector<Sample> samples_;
  int nodes_ = 0;
  int saves_ = 0;
  std::uint64_t seed_ = 0;
  double ratio_ = 0.0;
};

/// round(ratio * n * n_save) distinct entries drawn uniformly from the
/// displacement grid (saves 1..n_save), sorted by (save, node).
SampleSet draw_samples(const Trajectory& truth, double ratio, std::uint64_t seed);

/// d|pred - target|/d pred, with 0 chosen at an exact tie.
double mae_subgradient(double pred, double target);

struct LossValue {
  double loss = 0.0;
  std::vector<Cotangent> cotangents;  ///< +-1/B or 0 per batch entry
};

/// Mean |pred - target| over samples[subset].
LossValue mae_loss(const Trajectory& pred, const SampleSet& samples, std::span<const int> subset);

struct LearningRateSchedule {
  double initial = 0.003;
  double later = 0.0003;
  int switch_after = 10;  ///< epochs at the initial rate
  double final = 0.00003;
  int final_after = 15;   ///< 0 disables the third phase

  /// Rate for a 1-based epoch.
  double at(int epoch) const {
    if (final_after > 0 && epoch > final_after) return final;
    return epoch <= switch_after ? initial : later;
  }
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 16;
  LearningRateSchedule lr;
  double sample_ratio = 0.2;
  std::uint64_t seed = 0;  ///< drives the per-epoch shuffles
  AdamWConfig adamw;
  double max_skip_fraction = 0.1;

  /// Throws ConfigError.
  void validate(std::size_t sample_count) const;
};

struct EpochRecord {
  int epoch = 0;  ///< 0 = before any update
  double mean_loss = 0.0;
  double lr = 0.0;
  double frechet_modulus = 0.0;
  double frechet_damping = 0.0;
  int skipped = 0;
};

struct TrainResult {
  MlpModel model;
  AdamWState optimizer;
  std::vector<EpochRecord> history;
};

using EpochLogger = std::function<void(const EpochRecord&)>;
using WarningLogger = std::function<void(const std::string&)>;

/// Shuffled partition of 0..count-1 into consecutive minibatches; the last
/// one may be short.
std::vector<std::vector<int>> epoch_batches(std::size_t count, int batch_size, std::mt19937_64& rng);

struct BatchGradient {
  double loss = 0.0;
  Vec gradient;  ///< w.r.t. model.parameters()
};

/// One solve, loss and full backward pass for a minibatch. The problem
/// must have its step resolved.
BatchGradient minibatch_gradient(const BeamProblem& problem, const MlpModel& model,
                                 const SampleSet& samples, std::span<const int> subset);

/// Mean MAE over the whole sample set for the current model.
double sample_loss(const BeamProblem& problem, const MlpModel& model, const SampleSet& samples);

/// Train from `initial`. Epoch 0 of the history records the starting loss.
/// reference (if given) drives the Frechet columns. Throws NumericalError
/// when more than max_skip_fraction of an epoch's minibatches diverge.
TrainResult train(const BeamProblem& problem, const SampleSet& samples, MlpModel initial,
                  const TrainConfig& cfg, const ParameterField* reference = nullptr,
                  const EpochLogger& on_epoch = {}, const WarningLogger& on_warning = {});

/// Least-squares fit of both output layers so the heads reproduce the
/// target fields at the grid nodes (minimum-norm when underdetermined).
/// Hidden layers are left alone. Modulus targets must lie strictly inside
/// the head's range.
void prefit_output_layers(MlpModel& model, const SpatialGrid& grid, const ParameterField& target);

}  // namespace beamsi
