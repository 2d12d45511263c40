#include "beamsi/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>

#include "beamsi/hash.hpp"

namespace beamsi {

SampleSet::SampleSet(std::vector<Sample> samples, int nodes, int saves, std::uint64_t seed,
                     double ratio)
    : samples_(std::move(samples)), nodes_(nodes), saves_(saves), seed_(seed), ratio_(ratio) {
  std::set<std::pair<int, int>> seen;
  for (const auto& s : samples_) {
    if (s.node < 0 || s.node >= nodes_ || s.save < 1 || s.save > saves_) {
      throw DomainError("sample (node " + std::to_string(s.node) + ", save " +
                        std::to_string(s.save) + ") outside the " + std::to_string(nodes_) + "x" +
                        std::to_string(saves_) + " grid");
    }
    if (!seen.insert({s.save, s.node}).second) {
      throw DomainError("duplicate sample at node " + std::to_string(s.node) + ", save " +
                        std::to_string(s.save));
    }
  }
}

std::uint64_t SampleSet::hash() const {
  Fnv1a h;
  h.value(nodes_).value(saves_);
  for (const auto& s : samples_) h.value(s.node).value(s.save).value(s.value);
  return h.digest();
}

SampleSet draw_samples(const Trajectory& truth, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw DomainError("sample ratio must lie in (0, 1]");
  const int n = truth.nodes(), saves = truth.save_count();
  const long total = static_cast<long>(n) * saves;
  const long count = std::lround(ratio * static_cast<double>(total));
  if (count < 1) {
    throw DomainError("sample ratio " + std::to_string(ratio) + " yields no samples on a " +
                      std::to_string(n) + "x" + std::to_string(saves) + " grid");
  }
  std::vector<long> flat(total);
  std::iota(flat.begin(), flat.end(), 0L);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates with explicit index draws (portable across stdlibs).
  for (long i = 0; i < count; ++i) {
    const long j = i + static_cast<long>(rng() % static_cast<std::uint64_t>(total - i));
    std::swap(flat[i], flat[j]);
  }
  flat.resize(count);
  std::sort(flat.begin(), flat.end());
  std::vector<Sample> out;
  out.reserve(count);
  for (long k : flat) {
    const int save = static_cast<int>(k / n) + 1, node = static_cast<int>(k % n);
    out.push_back({node, save, truth.displacement(save, node)});
  }
  return {std::move(out), n, saves, seed, ratio};
}

double mae_subgradient(double pred, double target) {
  if (pred > target) return 1.0;
  if (pred < target) return -1.0;
  return 0.0;
}

LossValue mae_loss(const Trajectory& pred, const SampleSet& samples, std::span<const int> subset) {
  if (subset.empty()) throw DomainError("empty minibatch");
  if (pred.nodes() != samples.nodes() || pred.save_count() != samples.saves()) {
    throw SizingError("prediction grid does not match the sample grid");
  }
  const double inv = 1.0 / static_cast<double>(subset.size());
  LossValue out;
  out.cotangents.reserve(subset.size());
  for (int idx : subset) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= samples.size()) {
      throw DomainError("minibatch index " + std::to_string(idx) + " out of range");
    }
    const auto& s = samples.samples()[idx];
    const double u = pred.displacement(s.save, s.node);
    out.loss += std::abs(u - s.value);
    out.cotangents.push_back({s.node, s.save, inv * mae_subgradient(u, s.value)});
  }
  out.loss *= inv;
  return out;
}

void TrainConfig::validate(std::size_t sample_count) const {
  if (epochs < 1) throw ConfigError("training.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (static_cast<std::size_t>(batch_size) > sample_count) {
    throw ConfigError("training.batch_size " + std::to_string(batch_size) + " exceeds the " +
                      std::to_string(sample_count) + " available samples");
  }
  if (!(lr.initial > 0.0) || !(lr.later > 0.0)) throw ConfigError("learning rates must be > 0");
  if (lr.final_after < 0 || (lr.final_after > 0 && !(lr.final > 0.0))) {
    throw ConfigError("final learning-rate phase needs final > 0 and final_after >= 0");
  }
  if (!(max_skip_fraction >= 0.0 && max_skip_fraction < 1.0)) {
    throw ConfigError("max_skip_fraction must lie in [0, 1)");
  }
}

BatchGradient minibatch_gradient(const BeamProblem& problem, const MlpModel& model,
                                 const SampleSet& samples, std::span<const int> subset) {
  const SpatialGrid grid = problem.grid();
  const auto fwd = forward_fields(model, grid);
  const BeamSystem system = problem.system(fwd.fields);
  const auto sol = integrate(system, problem.solver, true);
  const auto lv = mae_loss(sol.trajectory, samples, subset);
  const auto pg = adjoint_gradients(*sol.tape, system, lv.cotangents);
  return {lv.loss, backward_fields(model, fwd.tape, pg.modulus, pg.damping)};
}

double sample_loss(const BeamProblem& problem, const MlpModel& model, const SampleSet& samples) {
  const auto fields = forward_fields(model, problem.grid()).fields;
  const auto traj = solve(problem, fields);
  std::vector<int> all(samples.size());
  std::iota(all.begin(), all.end(), 0);
  return mae_loss(traj, samples, all).loss;
}

std::vector<std::vector<int>> epoch_batches(std::size_t count, int batch_size, std::mt19937_64& rng) {
  if (batch_size < 1) throw DomainError("batch size must be >= 1");
  std::vector<int> order(count);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = count; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::vector<std::vector<int>> out;
  const std::size_t b = static_cast<std::size_t>(batch_size);
  for (std::size_t lo = 0; lo < count; lo += b) {
    out.emplace_back(order.begin() + lo, order.begin() + std::min(count, lo + b));
  }
  return out;
}

namespace {

void score_fields(EpochRecord& rec, const MlpModel& model, const SpatialGrid& grid,
                  const ParameterField* reference) {
  if (!reference) return;
  const auto fields = forward_fields(model, grid).fields;
  rec.frechet_modulus =
      compare_fields(grid, fields.interior_modulus(), reference->interior_modulus()).raw;
  rec.frechet_damping = compare_fields(grid, fields.damping(), reference->damping()).raw;
}

}  // namespace

TrainResult train(const BeamProblem& problem, const SampleSet& samples, MlpModel initial,
                  const TrainConfig& cfg, const ParameterField* reference,
                  const EpochLogger& on_epoch, const WarningLogger& on_warning) {
  cfg.validate(samples.size());
  if (!problem.solver.step) throw ConfigError("training needs a resolved solver step");
  if (problem.nodes != samples.nodes() || problem.solver.n_save != samples.saves()) {
    throw SizingError("sample grid does not match the problem grid");
  }
  const SpatialGrid grid = problem.grid();
  TrainResult result{std::move(initial), {}, {}};
  result.optimizer = AdamWState(result.model.parameter_count(), cfg.adamw);

  EpochRecord start;
  start.mean_loss = sample_loss(problem, result.model, samples);
  score_fields(start, result.model, grid, reference);
  result.history.push_back(start);
  if (on_epoch) on_epoch(start);

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto parts = epoch_batches(samples.size(), cfg.batch_size, rng);
    const int batches = static_cast<int>(parts.size());
    const double lr = cfg.lr.at(epoch);
    double loss_sum = 0.0;
    int used = 0, skipped = 0;
    for (int b = 0; b < batches; ++b) {
      try {
        const auto bg = minibatch_gradient(problem, result.model, samples, parts[b]);
        adamw_step(result.model, bg.gradient, result.optimizer, lr);
        loss_sum += bg.loss;
        ++used;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Numerical) throw;
        ++skipped;
        if (on_warning) {
          on_warning("epoch " + std::to_string(epoch) + " minibatch " + std::to_string(b + 1) +
                     " skipped: " + e.what());
        }
        if (skipped > cfg.max_skip_fraction * batches) {
          throw NumericalError("epoch " + std::to_string(epoch) + ": " + std::to_string(skipped) +
                               " of " + std::to_string(batches) +
                               " minibatches diverged; lower the learning rate or the internal step");
        }
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = used ? loss_sum / used : 0.0;
    rec.lr = lr;
    rec.skipped = skipped;
    score_fields(rec, result.model, grid, reference);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

namespace {

void fit_output(DenseLayer& layer, const Mat& inputs, const Vec& target) {
  // Rows are [h_i^T, 1]; solve for [w, b].
  Mat a(inputs.cols(), inputs.rows() + 1);
  a.leftCols(inputs.rows()) = inputs.transpose();
  a.col(inputs.rows()).setOnes();
  const Vec sol = a.completeOrthogonalDecomposition().solve(target);
  layer.weight.row(0) = sol.head(inputs.rows()).transpose();
  layer.bias[0] = sol[inputs.rows()];
}

}  // namespace

void prefit_output_layers(MlpModel& model, const SpatialGrid& grid, const ParameterField& target) {
  const int n = grid.size();
  if (target.modulus().size() != n + 2) throw SizingError("target fields do not match the grid");
  const auto& cfg = model.config();
  const double span = cfg.modulus_max - cfg.modulus_min;
  Vec logit(n + 2);
  for (int i = 0; i < n + 2; ++i) {
    const double s = (target.modulus()[i] - cfg.modulus_min) / span;
    if (!(s > 0.0 && s < 1.0)) {
      throw DomainError("modulus target " + std::to_string(target.modulus()[i]) +
                        " outside the open head range");
    }
    logit[i] = std::log(s / (1.0 - s));
  }
  const auto fwd = forward_fields(model, grid);
  fit_output(model.modulus_head().back(), fwd.tape.modulus_inputs.back(), logit);
  const Mat interior = fwd.tape.damping_inputs.back().middleCols(1, n);
  fit_output(model.damping_head().back(), interior, target.damping());
}

}  // namespace beamsi
