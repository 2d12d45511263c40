#include "beamsi/ode_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace beamsi {

namespace {

constexpr int kMinPowerIterations = 50;

// One RK4 step of the beam system in place. When stages is non-null the
// four stage input states are written to its columns.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(int n)
      : n_(n), su_(n), sv_(n), ku_{Vec(n), Vec(n), Vec(n), Vec(n)}, kv_{Vec(n), Vec(n), Vec(n), Vec(n)} {}

  template <typename StageSink>
  void advance(const BeamSystem& sys, const TimeStep& step, Vec& u, Vec& v, StageSink&& sink) {
    const double h = step.size;
    su_ = u;
    sv_ = v;
    sink(0, su_, sv_);
    sys.evaluate(su_, sv_, step.force, ku_[0], kv_[0]);
    su_ = u + (0.5 * h) * ku_[0];
    sv_ = v + (0.5 * h) * kv_[0];
    sink(1, su_, sv_);
    sys.evaluate(su_, sv_, step.force, ku_[1], kv_[1]);
    su_ = u + (0.5 * h) * ku_[1];
    sv_ = v + (0.5 * h) * kv_[1];
    sink(2, su_, sv_);
    sys.evaluate(su_, sv_, step.force, ku_[2], kv_[2]);
    su_ = u + h * ku_[2];
    sv_ = v + h * kv_[2];
    sink(3, su_, sv_);
    sys.evaluate(su_, sv_, step.force, ku_[3], kv_[3]);
    u += (h / 6.0) * (ku_[0] + 2.0 * ku_[1] + 2.0 * ku_[2] + ku_[3]);
    v += (h / 6.0) * (kv_[0] + 2.0 * kv_[1] + 2.0 * kv_[2] + kv_[3]);
  }

 private:
  int n_;
  Vec su_, sv_;
  Vec ku_[4], kv_[4];
};

bool all_finite(const Vec& u, const Vec& v) { return u.allFinite() && v.allFinite(); }

Trajectory run(const BeamSystem& sys, const StepSchedule& schedule, Vec u, Vec v,
               TapeContext* tape) {
  const int n = sys.size();
  const std::size_t saves = schedule.save_after.size();
  Mat states(saves, 2 * n);
  states.row(0).head(n) = u.transpose();
  states.row(0).tail(n) = v.transpose();
  Rk4Stepper stepper(n);
  std::size_t next_save = 1;
  for (std::size_t j = 0; j < schedule.steps.size(); ++j) {
    if (tape != nullptr) {
      stepper.advance(sys, schedule.steps[j], u, v, [&](int s, const Vec& su, const Vec& sv) {
        auto col = tape->stage(j, s);
        col.head(n) = su;
        col.tail(n) = sv;
      });
    } else {
      stepper.advance(sys, schedule.steps[j], u, v, [](int, const Vec&, const Vec&) {});
    }
    if (!all_finite(u, v)) {
      throw DivergenceError("state became non-finite at step " + std::to_string(j) + " (t = " +
                                std::to_string(schedule.steps[j].start) +
                                " s); try a smaller internal step",
                            static_cast<long>(j));
    }
    while (next_save < saves && schedule.save_after[next_save] == j + 1) {
      states.row(next_save).head(n) = u.transpose();
      states.row(next_save).tail(n) = v.transpose();
      ++next_save;
    }
  }
  return {schedule.save_times, std::move(states)};
}

}  // namespace

StepEstimate estimate_stable_step(const BeamSystem& system, double safety, int max_iterations) {
  if (!(safety > 0.0)) throw DomainError("stability safety factor must be positive");
  const Mat& k = system.stiffness();
  const int n = system.size();
  // Start from the sawtooth mode, which is closest to the top of the spectrum.
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = (i % 2 == 0) ? 1.0 : -1.0;
  x.normalize();
  double lambda = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Vec y = k * x;
    const double next = x.dot(y);
    const double norm = y.norm();
    if (!std::isfinite(next) || !(norm > 0.0)) break;
    x = y / norm;
    if (it >= kMinPowerIterations && std::abs(next - lambda) <= 1e-12 * std::abs(next)) {
      if (!(next > 0.0)) break;
      StepEstimate est;
      est.lambda_max = next;
      est.omega_max = std::sqrt(next);
      est.max_step = safety * kRk4ImaginaryBound / est.omega_max;
      est.iterations = it;
      return est;
    }
    lambda = next;
  }
  throw EstimationError(
      "power iteration on the stiffness operator did not converge; supply the internal step "
      "explicitly");
}

StepEstimate estimate_stable_step(const SpatialOperators& ops, const BeamSpec& spec,
                                  const ParameterField& fields, double safety) {
  return estimate_stable_step(BeamSystem(spec, ops, fields, LoadModel{0.0, 0.0}), safety);
}

Trajectory::Trajectory(Vec times, Mat states) : times_(std::move(times)), states_(std::move(states)) {
  if (times_.size() != states_.rows()) throw SizingError("trajectory times/states row mismatch");
  if (states_.cols() % 2 != 0) throw SizingError("trajectory state width must be even");
}

StepSchedule build_schedule(const SolverConfig& config, const LoadModel& load, double max_step) {
  if (!(config.t_end > 0.0)) throw DomainError("t_end must be positive");
  if (config.n_save < 1) throw SizingError("need at least one save point");
  if (!(max_step > 0.0) || !std::isfinite(max_step)) throw DomainError("internal step must be positive");

  StepSchedule schedule;
  schedule.save_times.resize(config.n_save + 1);
  for (int k = 0; k <= config.n_save; ++k) {
    schedule.save_times[k] = config.t_end * static_cast<double>(k) / config.n_save;
  }
  schedule.save_after.assign(1, 0);

  const double tol = 1e-12 * config.t_end;
  const double cutoff = load.cutoff;
  for (int k = 0; k < config.n_save; ++k) {
    const double a = schedule.save_times[k];
    const double b = schedule.save_times[k + 1];
    std::vector<std::pair<double, double>> pieces;
    if (cutoff > a + tol && cutoff < b - tol) {
      pieces = {{a, cutoff}, {cutoff, b}};
    } else {
      pieces = {{a, b}};
    }
    for (const auto& [lo, hi] : pieces) {
      const double span = hi - lo;
      const auto m = static_cast<std::size_t>(std::max(1.0, std::ceil(span / max_step - 1e-9)));
      const double h = span / static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) {
        TimeStep step;
        step.start = lo + static_cast<double>(j) * h;
        step.size = h;
        // The load is piecewise constant with a breakpoint on a step
        // boundary, so the midpoint value is the value over the whole step.
        step.force = load.force_at(step.start + 0.5 * h);
        schedule.steps.push_back(step);
      }
    }
    schedule.save_after.push_back(schedule.steps.size());
  }
  return schedule;
}

TapeContext::TapeContext(StepSchedule schedule, int nodes, std::uint64_t fields_fingerprint)
    : schedule_(std::move(schedule)),
      nodes_(nodes),
      fingerprint_(fields_fingerprint),
      stages_(2 * nodes, 4 * static_cast<Eigen::Index>(schedule_.steps.size())) {}

Solution integrate(const BeamSystem& system, const SolverConfig& config, bool record_tape,
                   const Vec& initial) {
  const int n = system.size();
  Solution out;
  out.max_step = config.step ? *config.step : estimate_stable_step(system, config.safety).max_step;
  StepSchedule schedule = build_schedule(config, system.load(), out.max_step);

  Vec u = Vec::Zero(n), v = Vec::Zero(n);
  if (initial.size() != 0) {
    if (initial.size() != 2 * n) throw SizingError("initial state must have 2n entries");
    u = initial.head(n);
    v = initial.tail(n);
  }
  if (record_tape) {
    out.tape.emplace(std::move(schedule), n, system.fields().fingerprint());
    out.trajectory = run(system, out.tape->schedule(), u, v, &*out.tape);
  } else {
    out.trajectory = run(system, schedule, u, v, nullptr);
  }
  return out;
}

Trajectory replay(const TapeContext& tape, const BeamSystem& system) {
  if (tape.fields_fingerprint() != system.fields().fingerprint()) {
    throw StaleTapeError("tape was recorded with different parameter fields");
  }
  const int n = tape.nodes();
  if (tape.step_count() == 0) throw StaleTapeError("empty tape");
  const auto first = tape.stage(0, 0);
  return run(system, tape.schedule(), first.head(n), first.tail(n), nullptr);
}

ParameterGradient adjoint_gradients(const TapeContext& tape, const BeamSystem& system,
                                    std::span<const Cotangent> cotangents) {
  const int n = tape.nodes();
  if (system.size() != n) throw StaleTapeError("tape and system sizes differ");
  if (tape.fields_fingerprint() != system.fields().fingerprint()) {
    throw StaleTapeError("tape was recorded with different parameter fields");
  }
  const auto& schedule = tape.schedule();
  const int saves = static_cast<int>(schedule.save_after.size());

  std::vector<std::vector<std::pair<int, double>>> by_save(saves);
  for (const auto& c : cotangents) {
    if (c.save < 0 || c.save >= saves || c.node < 0 || c.node >= n) {
      throw DomainError("cotangent index (node " + std::to_string(c.node) + ", save " +
                        std::to_string(c.save) + ") outside the trajectory");
    }
    by_save[c.save].emplace_back(c.node, c.weight);
  }

  ParameterGradient grad{Vec::Zero(n + 2), Vec::Zero(n)};
  Vec gu = Vec::Zero(n), gv = Vec::Zero(n);
  Vec ku[4], kv[4];
  for (auto& k : ku) k = Vec::Zero(n);
  for (auto& k : kv) k = Vec::Zero(n);
  Vec su = Vec::Zero(n), sv = Vec::Zero(n);

  int save = saves - 1;
  for (std::size_t jj = schedule.steps.size(); jj-- > 0;) {
    while (save >= 0 && schedule.save_after[save] == jj + 1) {
      for (const auto& [node, w] : by_save[save]) gu[node] += w;
      --save;
    }
    const double h = schedule.steps[jj].size;
    // y+ = y + h/6 (k1 + 2 k2 + 2 k3 + k4)
    ku[0] = (h / 6.0) * gu;
    kv[0] = (h / 6.0) * gv;
    ku[1] = (h / 3.0) * gu;
    kv[1] = (h / 3.0) * gv;
    ku[2] = ku[1];
    kv[2] = kv[1];
    ku[3] = ku[0];
    kv[3] = kv[0];
    // Stage s input: Y_s = y + c_s h k_{s-1}, c = (0, 1/2, 1/2, 1).
    static constexpr double kNodeFraction[4] = {0.0, 0.5, 0.5, 1.0};
    for (int s = 3; s >= 0; --s) {
      const auto stage = tape.stage(jj, s);
      system.pullback_parameters(stage.head(n), stage.tail(n), kv[s], grad.modulus, grad.damping);
      su.setZero();
      sv.setZero();
      system.pullback_state(ku[s], kv[s], su, sv);
      gu += su;
      gv += sv;
      if (s > 0) {
        const double c = kNodeFraction[s] * h;
        ku[s - 1] += c * su;
        kv[s - 1] += c * sv;
      }
    }
  }
  return grad;
}

}  // namespace beamsi
