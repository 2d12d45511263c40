#pragma once

// Comparison models that regress u(x, t) directly: a plain dense network
// fitted to the samples (DNN) and the same network with PDE-residual and
// boundary penalties (PINN). Input derivatives come from truncated Taylor
// jets pushed through the network; both are trained with LBFGS.

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "beamsi/param_net.hpp"
#include "beamsi/problem.hpp"
#include "beamsi/trainer.hpp"

namespace beamsi {

inline constexpr int kMaxJetOrder = 4;

enum class JetAxis { space, time };

enum class Activation { tanh, identity };

struct RegressorConfig {
  int hidden_layers = 4;  ///< plus the linear output layer
  int hidden_units = 32;
  Activation activation = Activation::tanh;
  /// Multiply the output by x(L - x)/L^2 so u = 0 holds at both supports.
  bool boundary_factor = false;
};

/// Dense tanh network on normalized inputs (x/L, t/T) with output
/// u = scale * [g(x)] * N(x/L, t/T).
class RegressorModel {
 public:
  RegressorModel() = default;
  /// Glorot-uniform weights, zero biases.
  static RegressorModel initialize(const RegressorConfig& cfg, double length, double duration,
                                   std::uint64_t seed);

  const RegressorConfig& config() const noexcept { return cfg_; }
  double length() const noexcept { return length_; }
  double duration() const noexcept { return duration_; }
  double output_scale() const noexcept { return scale_; }
  void set_output_scale(double s);
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }

  /// Per layer: weight (column-major) then bias.
  Vec parameters() const;
  void set_parameters(const Vec& flat);
  Eigen::Index parameter_count() const;
  std::uint64_t fingerprint() const;

 private:
  RegressorConfig cfg_;
  double length_ = 1.0;
  double duration_ = 1.0;
  double scale_ = 1.0;
  std::vector<DenseLayer> layers_;
};

/// coefficient[j] = (1/j!) d^j u / d xi^j along the chosen physical axis.
struct TaylorJet {
  int order = 0;
  std::array<double, kMaxJetOrder + 1> coefficient{};
  double derivative(int j) const;
};

/// Batched jets at normalized points (2 x B, rows x/L and t/T). Row j of
/// the result holds the coefficient of order j in normalized units.
struct JetTape {
  JetAxis axis = JetAxis::space;
  int order = 0;
  std::uint64_t model_fingerprint = 0;
  Mat points;
  std::vector<std::vector<Mat>> pre;   ///< z_k per hidden layer
  std::vector<std::vector<Mat>> post;  ///< tanh jets y_k per hidden layer
  std::vector<std::vector<Mat>> slope; ///< s_k = jets of 1 - y^2
  std::vector<Mat> net;                ///< raw network output jets (1 x B)
  Mat factor;                          ///< boundary factor jets ((order+1) x B)
  Mat output;                          ///< u jets ((order+1) x B)
};

JetTape jet_forward(const RegressorModel& model, const Mat& points, JetAxis axis, int order);

struct JetBackward {
  Vec parameters;               ///< dL/d parameters()
  std::vector<Mat> input_jets;  ///< dL/d input jets (2 x B per order)
};

/// Reverse pass given dL/d output (same shape as tape.output).
JetBackward jet_backward(const RegressorModel& model, const JetTape& tape, const Mat& cotangent);

/// Single-point jet in physical units. Throws DomainError for order
/// outside 0..4.
TaylorJet taylor_eval(const RegressorModel& model, double x, double t, JetAxis axis, int order);

/// (du/dx, du/dt) by plain reverse-mode through the network inputs.
std::array<double, 2> input_gradient(const RegressorModel& model, double x, double t);

/// Which fields the PDE residual uses.
enum class ResidualFields { truth, constant };

struct ResidualPhysics {
  ResidualFields fields = ResidualFields::truth;
  double modulus = 1.5;  ///< used when fields == constant
  double damping = 2.5;
};

/// EI (P'' u_xx + 2 P' u_xxx + P u_xxxx) + rho A u_tt + C u_t - F(t).
double pinn_residual(const RegressorModel& model, double x, double t, const BeamProblem& problem,
                     const ResidualPhysics& physics = {});

enum class DataLoss { mae, mse };

struct PinnWeights {
  double data = 1.0;
  double pde = 1.0;
  double boundary = 1.0;
};

struct BaselineConfig {
  RegressorConfig net;
  int epochs = 500;  ///< LBFGS iterations
  DataLoss data_loss = DataLoss::mae;
  PinnWeights weights{1.0, 0.0, 0.0};
  ResidualPhysics physics;
  int collocation_x = 32;
  int collocation_t = 64;
  int boundary_t = 64;
  int lbfgs_memory = 10;
  double lbfgs_step = 1.0;
  int max_halvings = 20;
  std::uint64_t seed = 0;

  static BaselineConfig dnn();
  static BaselineConfig pinn();
  /// Throws ConfigError.
  void validate() const;
};

/// Cell-centred nx x nt lattice of normalized points.
Mat collocation_lattice(int nx, int nt);

struct LossTerms {
  double data = 0.0;
  double pde = 0.0;
  double boundary = 0.0;
  double total = 0.0;
};

/// Weighted data + residual + boundary loss. Data is measured in units of
/// the output scale, the residual in units of the load amplitude and the
/// boundary terms u and L^2 u_xx in units of the output scale.
class PinnObjective {
 public:
  PinnObjective(const BeamProblem& problem, const SampleSet& samples, const BaselineConfig& cfg);

  LossTerms evaluate(const RegressorModel& model, Vec* gradient = nullptr) const;
  const BeamProblem& problem() const noexcept { return problem_; }

 private:
  BeamProblem problem_;
  BaselineConfig cfg_;
  Mat data_points_;
  Vec data_values_;
  Mat collocation_;
  Mat boundary_;
  Vec residual_p_, residual_dp_, residual_ddp_, residual_c_, residual_f_;
};

struct LbfgsState {
  int memory = 10;
  double step = 1.0;
  int max_halvings = 20;
  std::deque<Vec> s, y;
  long iteration = 0;

  void reset() {
    s.clear();
    y.clear();
  }
};

/// Loss at p; fills the gradient when asked.
using LossFunction = std::function<double(const Vec& p, Vec* gradient)>;

struct LbfgsOutcome {
  bool accepted = false;
  int halvings = 0;
  double step = 0.0;
};

/// Two-loop direction (scaled steepest descent on an empty history), then
/// halve the step from state.step until the loss decreases. On failure the
/// parameters stay put and the history is cleared. loss and gradient are
/// updated to the new point.
LbfgsOutcome lbfgs_step(LbfgsState& state, Vec& params, double& loss, Vec& gradient,
                        const LossFunction& f);

/// The direction lbfgs_step would try from this gradient.
Vec lbfgs_direction(const LbfgsState& state, const Vec& gradient);

struct BaselineEpoch {
  int epoch = 0;
  LossTerms loss;
  bool accepted = true;
};

struct BaselineResult {
  RegressorModel model;
  std::vector<BaselineEpoch> history;
};

using BaselineLogger = std::function<void(const BaselineEpoch&)>;

/// Output scale = max |sample| (1 when all samples are zero).
BaselineResult train_regressor(const BeamProblem& problem, const SampleSet& samples,
                               const BaselineConfig& cfg, const BaselineLogger& on_epoch = {},
                               const WarningLogger& on_warning = {});

/// Data-only fit; cfg.weights is forced to (1, 0, 0).
BaselineResult train_dnn(const BeamProblem& problem, const SampleSet& samples,
                         BaselineConfig cfg = BaselineConfig::dnn(),
                         const BaselineLogger& on_epoch = {}, const WarningLogger& on_warning = {});
BaselineResult train_pinn(const BeamProblem& problem, const SampleSet& samples,
                          const BaselineConfig& cfg = BaselineConfig::pinn(),
                          const BaselineLogger& on_epoch = {}, const WarningLogger& on_warning = {});

/// Displacement and velocity at every node and save of the problem.
Trajectory predict_trajectory(const RegressorModel& model, const BeamProblem& problem);

}  // namespace beamsi
