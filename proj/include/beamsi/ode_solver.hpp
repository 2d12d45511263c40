#pragma once

// Fixed-step classical RK4 for the semi-discrete beam, with an exact
// discrete adjoint of the unrolled scheme.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "beamsi/beam_model.hpp"

namespace beamsi {

/// Stability interval of classical RK4 on the imaginary axis (2*sqrt(2),
/// rounded down).
inline constexpr double kRk4ImaginaryBound = 2.8;

struct SolverConfig {
  double t_end = 0.045;
  int n_save = 160;
  /// Internal step upper bound; empty selects it from the operator spectrum.
  std::optional<double> step;
  double safety = 0.5;

  double save_interval() const { return t_end / n_save; }
};

struct StepEstimate {
  double lambda_max = 0.0;  ///< dominant eigenvalue of K (1/s^2)
  double omega_max = 0.0;   ///< sqrt(lambda_max) (rad/s)
  double max_step = 0.0;    ///< safety * 2.8 / omega_max (s)
  int iterations = 0;
};

/// Power iteration on the undamped mass-normalized stiffness operator.
/// Throws EstimationError if it does not settle within max_iterations.
StepEstimate estimate_stable_step(const BeamSystem& system, double safety = 0.5,
                                  int max_iterations = 20000);
StepEstimate estimate_stable_step(const SpatialOperators& ops, const BeamSpec& spec,
                                  const ParameterField& fields, double safety = 0.5);

/// Displacement and velocity at the save points. Row k holds (u, v) at
/// times()[k]; row 0 is the initial state at t = 0.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(Vec times, Mat states);

  int nodes() const noexcept { return static_cast<int>(states_.cols() / 2); }
  /// Number of save points after t = 0.
  int save_count() const noexcept { return static_cast<int>(times_.size()) - 1; }
  const Vec& times() const noexcept { return times_; }
  const Mat& states() const noexcept { return states_; }
  double displacement(int save, int node) const { return states_(save, node); }
  /// (save_count + 1) x nodes block of displacements.
  Mat displacements() const { return states_.leftCols(nodes()); }

 private:
  Vec times_;
  Mat states_;
};

struct TimeStep {
  double start = 0.0;
  double size = 0.0;
  double force = 0.0;  ///< load density held over the step
};

/// Step sequence covering [0, t_end]. Every save time and the load cutoff
/// fall on step boundaries; each gap between breakpoints is split into
/// equal steps no longer than max_step.
struct StepSchedule {
  std::vector<TimeStep> steps;
  /// save_after[k] = number of steps completed when save point k is reached.
  std::vector<std::size_t> save_after;
  Vec save_times;
};

StepSchedule build_schedule(const SolverConfig& config, const LoadModel& load, double max_step);

/// Every RK4 stage input state of a forward solve, in step order.
class TapeContext {
 public:
  TapeContext(StepSchedule schedule, int nodes, std::uint64_t fields_fingerprint);

  const StepSchedule& schedule() const noexcept { return schedule_; }
  int nodes() const noexcept { return nodes_; }
  std::uint64_t fields_fingerprint() const noexcept { return fingerprint_; }
  std::size_t step_count() const noexcept { return schedule_.steps.size(); }

  /// Stage input state (length 2n) for stage s in [0, 4) of a step.
  auto stage(std::size_t step, int s) { return stages_.col(4 * step + s); }
  auto stage(std::size_t step, int s) const { return stages_.col(4 * step + s); }

 private:
  StepSchedule schedule_;
  int nodes_;
  std::uint64_t fingerprint_;
  Mat stages_;
};

struct Solution {
  Trajectory trajectory;
  std::optional<TapeContext> tape;
  double max_step = 0.0;
};

/// Integrate from the given state (zeros when empty) over [0, t_end].
/// Throws DivergenceError if the state stops being finite.
Solution integrate(const BeamSystem& system, const SolverConfig& config, bool record_tape = false,
                   const Vec& initial = Vec());

/// Re-run the recorded step schedule from the recorded initial state.
Trajectory replay(const TapeContext& tape, const BeamSystem& system);

/// Weight on the displacement of one node at one save point.
struct Cotangent {
  int node = 0;
  int save = 0;
  double weight = 0.0;
};

struct ParameterGradient {
  Vec modulus;  ///< n+2
  Vec damping;  ///< n
};

/// Exact gradient of sum(weight * u[save][node]) with respect to every
/// modulus and damping entry, by reverse sweep over the taped stages.
/// Throws StaleTapeError if the tape was recorded with different fields.
ParameterGradient adjoint_gradients(const TapeContext& tape, const BeamSystem& system,
                                    std::span<const Cotangent> cotangents);

/// One classical RK4 step of y' = f(t, y) for any vector-like state.
template <typename State, typename Rhs>
State rk4_step(Rhs&& f, const State& y, double t, double h) {
  const State k1 = f(t, y);
  const State k2 = f(t + 0.5 * h, State(y + 0.5 * h * k1));
  const State k3 = f(t + 0.5 * h, State(y + 0.5 * h * k2));
  const State k4 = f(t + h, State(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace beamsi
