#include "beamsi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "beamsi/hash.hpp"

namespace beamsi {

namespace {

DenseLayer glorot_layer(int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer{Mat(out, in), Vec::Zero(out)};
  for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
  return layer;
}

void check_order(int order) {
  if (order < 0 || order > kMaxJetOrder) {
    throw DomainError("jet order " + std::to_string(order) + " outside 0.." +
                      std::to_string(kMaxJetOrder));
  }
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

Mat single_point(const RegressorModel& model, double x, double t) {
  Mat p(2, 1);
  p << x / model.length(), t / model.duration();
  return p;
}

}  // namespace

RegressorModel RegressorModel::initialize(const RegressorConfig& cfg, double length,
                                          double duration, std::uint64_t seed) {
  if (cfg.hidden_layers < 1 || cfg.hidden_units < 1) {
    throw ConfigError("regressor needs hidden_layers >= 1 and hidden_units >= 1");
  }
  if (!(length > 0.0) || !(duration > 0.0)) throw ConfigError("regressor domain must be positive");
  RegressorModel m;
  m.cfg_ = cfg;
  m.length_ = length;
  m.duration_ = duration;
  std::mt19937_64 rng(seed);
  int in = 2;
  for (int l = 0; l < cfg.hidden_layers; ++l, in = cfg.hidden_units) {
    m.layers_.push_back(glorot_layer(in, cfg.hidden_units, rng));
  }
  m.layers_.push_back(glorot_layer(in, 1, rng));
  return m;
}

void RegressorModel::set_output_scale(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("output scale must be positive");
  scale_ = s;
}

Eigen::Index RegressorModel::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Vec RegressorModel::parameters() const {
  Vec flat(parameter_count());
  Eigen::Index at = 0;
  for (const auto& l : layers_) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

void RegressorModel::set_parameters(const Vec& flat) {
  if (flat.size() != parameter_count()) {
    throw SizingError("parameter vector has " + std::to_string(flat.size()) + " entries, model has " +
                      std::to_string(parameter_count()));
  }
  Eigen::Index at = 0;
  for (auto& l : layers_) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

std::uint64_t RegressorModel::fingerprint() const {
  const Vec p = parameters();
  Fnv1a h;
  h.doubles({p.data(), static_cast<std::size_t>(p.size())});
  h.value(scale_).value(length_).value(duration_).value(cfg_.boundary_factor).value(cfg_.activation);
  return h.digest();
}

double TaylorJet::derivative(int j) const {
  if (j < 0 || j > order) throw DomainError("derivative order beyond the jet");
  return coefficient[j] * factorial(j);
}

JetTape jet_forward(const RegressorModel& model, const Mat& points, JetAxis axis, int order) {
  check_order(order);
  if (points.rows() != 2) throw SizingError("jet points must be 2 x B");
  const Eigen::Index B = points.cols();
  const int K = order;
  JetTape tape;
  tape.axis = axis;
  tape.order = K;
  tape.model_fingerprint = model.fingerprint();
  tape.points = points;

  std::vector<Mat> a(K + 1, Mat::Zero(2, B));
  a[0] = points;
  if (K >= 1) a[1].row(axis == JetAxis::space ? 0 : 1).setOnes();

  const auto& layers = model.layers();
  const std::size_t hidden = layers.size() - 1;
  tape.pre.resize(hidden);
  tape.post.resize(hidden);
  tape.slope.resize(hidden);
  const std::vector<Mat>* in = &a;
  for (std::size_t l = 0; l < hidden; ++l) {
    const auto& W = layers[l].weight;
    auto& z = tape.pre[l];
    auto& y = tape.post[l];
    auto& s = tape.slope[l];
    z.resize(K + 1);
    y.resize(K + 1);
    s.resize(K + 1);
    for (int k = 0; k <= K; ++k) z[k] = W * (*in)[k];
    z[0].colwise() += layers[l].bias;
    if (model.config().activation == Activation::identity) {
      y = z;
      in = &y;
      continue;
    }
    y[0] = z[0].array().tanh().matrix();
    s[0] = (1.0 - y[0].array().square()).matrix();
    for (int k = 1; k <= K; ++k) {
      y[k] = Mat::Zero(W.rows(), B);
      for (int j = 1; j <= k; ++j) {
        y[k].array() += (static_cast<double>(j) / k) * z[j].array() * s[k - j].array();
      }
      if (k < K) {
        s[k] = Mat::Zero(W.rows(), B);
        for (int j = 0; j <= k; ++j) s[k].array() -= y[j].array() * y[k - j].array();
      }
    }
    in = &y;
  }
  const auto& out = layers.back();
  tape.net.resize(K + 1);
  for (int k = 0; k <= K; ++k) tape.net[k] = out.weight * (*in)[k];
  tape.net[0].array() += out.bias[0];

  tape.factor = Mat::Zero(K + 1, B);
  if (model.config().boundary_factor) {
    const auto xh = points.row(0).array();
    tape.factor.row(0) = (xh * (1.0 - xh)).matrix();
    if (axis == JetAxis::space) {
      if (K >= 1) tape.factor.row(1) = (1.0 - 2.0 * xh).matrix();
      if (K >= 2) tape.factor.row(2).setConstant(-1.0);
    }
  } else {
    tape.factor.row(0).setOnes();
  }
  const double scale = model.output_scale();
  tape.output = Mat::Zero(K + 1, B);
  for (int k = 0; k <= K; ++k) {
    for (int i = 0; i <= std::min(k, 2); ++i) {
      tape.output.row(k).array() += scale * tape.factor.row(i).array() * tape.net[k - i].array();
    }
  }
  return tape;
}

JetBackward jet_backward(const RegressorModel& model, const JetTape& tape, const Mat& cotangent) {
  if (tape.model_fingerprint != model.fingerprint()) {
    throw StaleTapeError("jet tape was recorded with different network weights");
  }
  const int K = tape.order;
  const Eigen::Index B = tape.points.cols();
  if (cotangent.rows() != K + 1 || cotangent.cols() != B) {
    throw SizingError("jet cotangent shape does not match the tape");
  }
  const auto& layers = model.layers();
  const std::size_t hidden = layers.size() - 1;
  const double scale = model.output_scale();

  // u_k = scale * sum_i g_i N_{k-i}
  std::vector<Mat> nbar(K + 1, Mat::Zero(1, B));
  for (int k = 0; k <= K; ++k) {
    for (int i = 0; i <= std::min(k, 2); ++i) {
      nbar[k - i].array() += scale * tape.factor.row(i).array() * cotangent.row(k).array();
    }
  }

  JetBackward result;
  std::vector<Mat> grads_w(layers.size()), grads_b(layers.size());
  const std::vector<Mat>& last_in = tape.post.back();
  {
    const auto& out = layers.back();
    grads_w.back() = Mat::Zero(out.weight.rows(), out.weight.cols());
    for (int k = 0; k <= K; ++k) grads_w.back() += nbar[k] * last_in[k].transpose();
    grads_b.back() = nbar[0].rowwise().sum();
  }
  std::vector<Mat> abar(K + 1);
  for (int k = 0; k <= K; ++k) abar[k] = layers.back().weight.transpose() * nbar[k];

  for (std::size_t l = hidden; l-- > 0;) {
    const auto& y = tape.post[l];
    const auto& z = tape.pre[l];
    const auto& s = tape.slope[l];
    const Eigen::Index H = layers[l].weight.rows();
    std::vector<Mat> ybar = abar;
    std::vector<Mat> sbar(K + 1, Mat::Zero(H, B));
    std::vector<Mat> zbar(K + 1, Mat::Zero(H, B));
    const bool linear = model.config().activation == Activation::identity;
    if (linear) zbar = ybar;
    for (int k = linear ? 0 : K; k >= 1; --k) {
      if (k < K) {
        for (int m = 0; m <= k; ++m) ybar[m].array() -= 2.0 * sbar[k].array() * y[k - m].array();
      }
      for (int j = 1; j <= k; ++j) {
        const double c = static_cast<double>(j) / k;
        zbar[j].array() += c * ybar[k].array() * s[k - j].array();
        sbar[k - j].array() += c * ybar[k].array() * z[j].array();
      }
    }
    if (!linear) {
      ybar[0].array() -= 2.0 * y[0].array() * sbar[0].array();
      zbar[0].array() += ybar[0].array() * (1.0 - y[0].array().square());
    }

    std::vector<Mat> local_in;
    const std::vector<Mat>* in;
    if (l > 0) {
      in = &tape.post[l - 1];
    } else {
      local_in.assign(K + 1, Mat::Zero(2, B));
      local_in[0] = tape.points;
      if (K >= 1) local_in[1].row(tape.axis == JetAxis::space ? 0 : 1).setOnes();
      in = &local_in;
    }
    grads_w[l] = Mat::Zero(layers[l].weight.rows(), layers[l].weight.cols());
    for (int k = 0; k <= K; ++k) grads_w[l] += zbar[k] * (*in)[k].transpose();
    grads_b[l] = zbar[0].rowwise().sum();
    for (int k = 0; k <= K; ++k) abar[k] = layers[l].weight.transpose() * zbar[k];
  }
  result.input_jets = std::move(abar);

  result.parameters.resize(model.parameter_count());
  Eigen::Index at = 0;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    result.parameters.segment(at, grads_w[l].size()) = grads_w[l].reshaped();
    at += grads_w[l].size();
    result.parameters.segment(at, grads_b[l].size()) = grads_b[l].reshaped();
    at += grads_b[l].size();
  }
  return result;
}

TaylorJet taylor_eval(const RegressorModel& model, double x, double t, JetAxis axis, int order) {
  check_order(order);
  const auto tape = jet_forward(model, single_point(model, x, t), axis, order);
  const double unit = axis == JetAxis::space ? model.length() : model.duration();
  TaylorJet jet;
  jet.order = order;
  for (int j = 0; j <= order; ++j) jet.coefficient[j] = tape.output(j, 0) / std::pow(unit, j);
  return jet;
}

std::array<double, 2> input_gradient(const RegressorModel& model, double x, double t) {
  const Mat p = single_point(model, x, t);
  const auto tape = jet_forward(model, p, JetAxis::space, 0);
  const auto back = jet_backward(model, tape, Mat::Ones(1, 1));
  double dx = back.input_jets[0](0, 0);
  const double dt = back.input_jets[0](1, 0);
  if (model.config().boundary_factor) {
    // d/dx of g(x) N, g' = 1 - 2x
    dx += model.output_scale() * (1.0 - 2.0 * p(0, 0)) * tape.net[0](0, 0);
  }
  return {dx / model.length(), dt / model.duration()};
}

namespace {

struct FieldCoefficients {
  double p, dp, ddp, c;
};

FieldCoefficients residual_fields(const BeamProblem& problem, const ResidualPhysics& physics,
                                  double x) {
  if (physics.fields == ResidualFields::constant) return {physics.modulus, 0.0, 0.0, physics.damping};
  const double L = problem.spec.length();
  const auto& tr = problem.truth;
  return {tr.modulus(x, L), tr.modulus_dx(x, L), tr.modulus_dxx(x, L), tr.damping(x, L)};
}

}  // namespace

double pinn_residual(const RegressorModel& model, double x, double t, const BeamProblem& problem,
                     const ResidualPhysics& physics) {
  const auto jx = taylor_eval(model, x, t, JetAxis::space, 4);
  const auto jt = taylor_eval(model, x, t, JetAxis::time, 2);
  const auto f = residual_fields(problem, physics, x);
  const double EI = problem.spec.flexural_rigidity(), rhoA = problem.spec.mass_per_length();
  return EI * (f.ddp * jx.derivative(2) + 2.0 * f.dp * jx.derivative(3) + f.p * jx.derivative(4)) +
         rhoA * jt.derivative(2) + f.c * jt.derivative(1) - problem.load.force_at(t);
}

BaselineConfig BaselineConfig::dnn() { return {}; }

BaselineConfig BaselineConfig::pinn() {
  BaselineConfig c;
  c.epochs = 3700;
  c.weights = {1.0, 1.0, 1.0};
  return c;
}

void BaselineConfig::validate() const {
  if (epochs < 1) throw ConfigError("baseline epochs must be >= 1");
  if (!(weights.data >= 0.0 && weights.pde >= 0.0 && weights.boundary >= 0.0)) {
    throw ConfigError("loss weights must be >= 0");
  }
  if (collocation_x < 1 || collocation_t < 1 || boundary_t < 1) {
    throw ConfigError("collocation counts must be >= 1");
  }
  if (lbfgs_memory < 1) throw ConfigError("lbfgs memory must be >= 1");
  if (!(lbfgs_step > 0.0)) throw ConfigError("lbfgs step must be > 0");
  if (max_halvings < 0) throw ConfigError("max_halvings must be >= 0");
}

Mat collocation_lattice(int nx, int nt) {
  if (nx < 1 || nt < 1) throw DomainError("lattice needs at least one point per axis");
  Mat p(2, static_cast<Eigen::Index>(nx) * nt);
  for (int j = 0; j < nt; ++j)
    for (int i = 0; i < nx; ++i) p.col(static_cast<Eigen::Index>(j) * nx + i) << (i + 0.5) / nx, (j + 0.5) / nt;
  return p;
}

PinnObjective::PinnObjective(const BeamProblem& problem, const SampleSet& samples,
                             const BaselineConfig& cfg)
    : problem_(problem), cfg_(cfg) {
  cfg.validate();
  if (samples.size() == 0) throw DomainError("baseline training needs samples");
  const SpatialGrid grid = problem.grid();
  const double T = problem.solver.t_end, L = problem.spec.length();
  data_points_.resize(2, static_cast<Eigen::Index>(samples.size()));
  data_values_.resize(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples.samples()[i];
    const double t = T * s.save / samples.saves();
    data_points_.col(i) << grid.coordinate(s.node + 1) / L, t / T;
    data_values_[i] = s.value;
  }
  collocation_ = collocation_lattice(cfg.collocation_x, cfg.collocation_t);
  const Eigen::Index m = collocation_.cols();
  residual_p_.resize(m);
  residual_dp_.resize(m);
  residual_ddp_.resize(m);
  residual_c_.resize(m);
  residual_f_.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto f = residual_fields(problem, cfg.physics, collocation_(0, i) * L);
    residual_p_[i] = f.p;
    residual_dp_[i] = f.dp;
    residual_ddp_[i] = f.ddp;
    residual_c_[i] = f.c;
    residual_f_[i] = problem.load.force_at(collocation_(1, i) * T);
  }
  boundary_.resize(2, 2 * cfg.boundary_t);
  for (int j = 0; j < cfg.boundary_t; ++j) {
    const double th = (j + 0.5) / cfg.boundary_t;
    boundary_.col(2 * j) << 0.0, th;
    boundary_.col(2 * j + 1) << 1.0, th;
  }
}

LossTerms PinnObjective::evaluate(const RegressorModel& model, Vec* gradient) const {
  LossTerms out;
  if (gradient) *gradient = Vec::Zero(model.parameter_count());
  const double us = model.output_scale();
  const auto accumulate = [&](const JetTape& tape, const Mat& cot) {
    if (gradient) *gradient += jet_backward(model, tape, cot).parameters;
  };

  if (cfg_.weights.data > 0.0) {
    const auto tape = jet_forward(model, data_points_, JetAxis::space, 0);
    const Eigen::Index n = data_values_.size();
    const Eigen::ArrayXd diff = (tape.output.row(0).transpose() - data_values_).array() / us;
    Mat cot(1, n);
    if (cfg_.data_loss == DataLoss::mae) {
      out.data = diff.abs().mean();
      for (Eigen::Index i = 0; i < n; ++i) cot(0, i) = mae_subgradient(diff[i], 0.0) / (us * n);
    } else {
      out.data = diff.square().mean();
      cot.row(0) = (2.0 * diff / (us * n)).matrix().transpose();
    }
    if (gradient) accumulate(tape, cfg_.weights.data * cot);
  }

  if (cfg_.weights.pde > 0.0) {
    const double L = problem_.spec.length(), T = problem_.solver.t_end;
    const double EI = problem_.spec.flexural_rigidity(), rhoA = problem_.spec.mass_per_length();
    const double q = problem_.load.amplitude != 0.0 ? std::abs(problem_.load.amplitude) : 1.0;
    const auto tx = jet_forward(model, collocation_, JetAxis::space, 4);
    const auto tt = jet_forward(model, collocation_, JetAxis::time, 2);
    const double kx2 = 2.0 / (L * L), kx3 = 6.0 / (L * L * L), kx4 = 24.0 / (L * L * L * L);
    const double kt1 = 1.0 / T, kt2 = 2.0 / (T * T);
    const Eigen::ArrayXd r =
        EI * (residual_ddp_.array() * kx2 * tx.output.row(2).transpose().array() +
              2.0 * residual_dp_.array() * kx3 * tx.output.row(3).transpose().array() +
              residual_p_.array() * kx4 * tx.output.row(4).transpose().array()) +
        rhoA * kt2 * tt.output.row(2).transpose().array() +
        residual_c_.array() * kt1 * tt.output.row(1).transpose().array() - residual_f_.array();
    const Eigen::Index m = r.size();
    out.pde = (r / q).square().mean();
    if (gradient) {
      const Eigen::ArrayXd rbar = cfg_.weights.pde * 2.0 * r / (q * q * m);
      Mat cx = Mat::Zero(5, m), ct = Mat::Zero(3, m);
      cx.row(2) = (rbar * EI * residual_ddp_.array() * kx2).matrix().transpose();
      cx.row(3) = (rbar * EI * 2.0 * residual_dp_.array() * kx3).matrix().transpose();
      cx.row(4) = (rbar * EI * residual_p_.array() * kx4).matrix().transpose();
      ct.row(1) = (rbar * residual_c_.array() * kt1).matrix().transpose();
      ct.row(2) = (rbar * rhoA * kt2).matrix().transpose();
      accumulate(tx, cx);
      accumulate(tt, ct);
    }
  }

  if (cfg_.weights.boundary > 0.0) {
    const auto tb = jet_forward(model, boundary_, JetAxis::space, 2);
    const Eigen::Index m = boundary_.cols();
    // u / us and L^2 u_xx / us = 2 c_2 / us
    const Eigen::ArrayXd u = tb.output.row(0).transpose().array() / us;
    const Eigen::ArrayXd m2 = 2.0 * tb.output.row(2).transpose().array() / us;
    out.boundary = (u.square() + m2.square()).mean();
    if (gradient) {
      Mat cb = Mat::Zero(3, m);
      const double w = cfg_.weights.boundary;
      cb.row(0) = (w * 2.0 * u / (us * m)).matrix().transpose();
      cb.row(2) = (w * 2.0 * m2 * 2.0 / (us * m)).matrix().transpose();
      accumulate(tb, cb);
    }
  }

  out.total = cfg_.weights.data * out.data + cfg_.weights.pde * out.pde +
              cfg_.weights.boundary * out.boundary;
  return out;
}

Vec lbfgs_direction(const LbfgsState& state, const Vec& gradient) {
  if (state.s.empty()) {
    const double l1 = gradient.cwiseAbs().sum();
    return -gradient * std::min(1.0, l1 > 0.0 ? 1.0 / l1 : 1.0);
  }
  const std::size_t m = state.s.size();
  std::vector<double> alpha(m), rho(m);
  Vec q = gradient;
  for (std::size_t i = m; i-- > 0;) {
    rho[i] = 1.0 / state.y[i].dot(state.s[i]);
    alpha[i] = rho[i] * state.s[i].dot(q);
    q -= alpha[i] * state.y[i];
  }
  const double gamma = state.s.back().dot(state.y.back()) / state.y.back().squaredNorm();
  Vec r = gamma * q;
  for (std::size_t i = 0; i < m; ++i) {
    const double beta = rho[i] * state.y[i].dot(r);
    r += state.s[i] * (alpha[i] - beta);
  }
  return -r;
}

LbfgsOutcome lbfgs_step(LbfgsState& state, Vec& params, double& loss, Vec& gradient,
                        const LossFunction& f) {
  if (!gradient.allFinite()) throw NumericalError("lbfgs received a non-finite gradient");
  ++state.iteration;
  LbfgsOutcome outcome;
  Vec d = lbfgs_direction(state, gradient);
  if (!(d.dot(gradient) < 0.0) || !d.allFinite()) {
    state.reset();
    d = lbfgs_direction(state, gradient);
  }
  if (!(d.dot(gradient) < 0.0)) return outcome;  // stationary

  double t = state.step;
  for (int h = 0; h <= state.max_halvings; ++h, t *= 0.5) {
    const Vec trial = params + t * d;
    // The full step is usually accepted, so pay for its gradient up front.
    Vec g_new;
    double f_new = f(trial, h == 0 ? &g_new : nullptr);
    if (std::isfinite(f_new) && f_new < loss) {
      if (h > 0) f_new = f(trial, &g_new);
      const Vec s = trial - params, y = g_new - gradient;
      if (s.dot(y) > 0.0) {
        state.s.push_back(s);
        state.y.push_back(y);
        if (static_cast<int>(state.s.size()) > state.memory) {
          state.s.pop_front();
          state.y.pop_front();
        }
      }
      params = trial;
      loss = f_new;
      gradient = std::move(g_new);
      outcome.accepted = true;
      outcome.halvings = h;
      outcome.step = t;
      return outcome;
    }
  }
  state.reset();
  outcome.halvings = state.max_halvings;
  return outcome;
}

BaselineResult train_regressor(const BeamProblem& problem, const SampleSet& samples,
                               const BaselineConfig& cfg, const BaselineLogger& on_epoch,
                               const WarningLogger& on_warning) {
  cfg.validate();
  if (problem.nodes != samples.nodes() || problem.solver.n_save != samples.saves()) {
    throw SizingError("sample grid does not match the problem grid");
  }
  const PinnObjective objective(problem, samples, cfg);
  BaselineResult result;
  result.model = RegressorModel::initialize(cfg.net, problem.spec.length(), problem.solver.t_end,
                                            cfg.seed);
  double peak = 0.0;
  for (const auto& s : samples.samples()) peak = std::max(peak, std::abs(s.value));
  result.model.set_output_scale(peak > 0.0 ? peak : 1.0);

  RegressorModel work = result.model;
  const LossFunction f = [&](const Vec& p, Vec* g) {
    work.set_parameters(p);
    return objective.evaluate(work, g).total;
  };
  LbfgsState state;
  state.memory = cfg.lbfgs_memory;
  state.step = cfg.lbfgs_step;
  state.max_halvings = cfg.max_halvings;

  Vec params = result.model.parameters(), grad;
  double loss = f(params, &grad);
  BaselineEpoch start;
  start.loss = objective.evaluate(result.model);
  result.history.push_back(start);
  if (on_epoch) on_epoch(start);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto step = lbfgs_step(state, params, loss, grad, f);
    if (!step.accepted && on_warning) {
      on_warning("iteration " + std::to_string(epoch) +
                 ": line search found no decrease; history cleared, next step is steepest descent");
    }
    result.model.set_parameters(params);
    BaselineEpoch rec;
    rec.epoch = epoch;
    rec.accepted = step.accepted;
    rec.loss = objective.evaluate(result.model);
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

BaselineResult train_dnn(const BeamProblem& problem, const SampleSet& samples, BaselineConfig cfg,
                         const BaselineLogger& on_epoch, const WarningLogger& on_warning) {
  cfg.weights = {1.0, 0.0, 0.0};
  return train_regressor(problem, samples, cfg, on_epoch, on_warning);
}

BaselineResult train_pinn(const BeamProblem& problem, const SampleSet& samples,
                          const BaselineConfig& cfg, const BaselineLogger& on_epoch,
                          const WarningLogger& on_warning) {
  return train_regressor(problem, samples, cfg, on_epoch, on_warning);
}

Trajectory predict_trajectory(const RegressorModel& model, const BeamProblem& problem) {
  const SpatialGrid grid = problem.grid();
  const int n = grid.size(), saves = problem.solver.n_save;
  Mat pts(2, static_cast<Eigen::Index>(n) * (saves + 1));
  Vec times(saves + 1);
  for (int k = 0; k <= saves; ++k) {
    times[k] = problem.solver.t_end * k / saves;
    for (int i = 0; i < n; ++i) {
      pts.col(static_cast<Eigen::Index>(k) * n + i) << grid.coordinate(i + 1) / model.length(),
          times[k] / model.duration();
    }
  }
  const auto tape = jet_forward(model, pts, JetAxis::time, 1);
  Mat states(saves + 1, 2 * n);
  for (int k = 0; k <= saves; ++k) {
    for (int i = 0; i < n; ++i) {
      const Eigen::Index c = static_cast<Eigen::Index>(k) * n + i;
      states(k, i) = tape.output(0, c);
      states(k, n + i) = tape.output(1, c) / model.duration();
    }
  }
  return {times, states};
}

}  // namespace beamsi
