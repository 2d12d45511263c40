#include "beamsi/param_net.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "beamsi/hash.hpp"

namespace beamsi {

namespace {

DenseLayer glorot(int in, int out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / (in + out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseLayer layer{Mat(out, in), Vec::Zero(out)};
  for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = dist(rng);
  return layer;
}

DenseLayer zero_layer(int in, int out) { return {Mat::Zero(out, in), Vec::Zero(out)}; }

Eigen::Index stack_size(const std::vector<DenseLayer>& layers) {
  Eigen::Index s = 0;
  for (const auto& l : layers) s += l.weight.size() + l.bias.size();
  return s;
}

// All layers tanh except, when linear_last, the final one.
Mat run_stack(const std::vector<DenseLayer>& layers, Mat x, bool linear_last,
              std::vector<Mat>* inputs) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (inputs != nullptr) inputs->push_back(x);
    Mat z = layers[l].weight * x;
    z.colwise() += layers[l].bias;
    const bool linear = linear_last && l + 1 == layers.size();
    x = linear ? std::move(z) : Mat(z.array().tanh().matrix());
  }
  return x;
}

// Backpropagate grad_out (dL/d output) through a stack, writing weight and
// bias gradients into flat starting at offset. Returns dL/d input.
Mat backprop_stack(const std::vector<DenseLayer>& layers, const std::vector<Mat>& inputs,
                   const Mat& output, Mat grad, bool linear_last, Vec& flat,
                   Eigen::Index offset) {
  std::vector<Eigen::Index> offsets;
  for (const auto& l : layers) {
    offsets.push_back(offset);
    offset += l.weight.size() + l.bias.size();
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Mat& act = l + 1 < layers.size() ? inputs[l + 1] : output;
    const bool linear = linear_last && l + 1 == layers.size();
    if (!linear) grad.array() *= 1.0 - act.array().square();
    const auto& w = layers[l].weight;
    Eigen::Map<Mat> dw(flat.data() + offsets[l], w.rows(), w.cols());
    dw.noalias() += grad * inputs[l].transpose();
    flat.segment(offsets[l] + w.size(), w.rows()) += grad.rowwise().sum();
    grad = w.transpose() * grad;
  }
  return grad;
}

void write_stack(const std::vector<DenseLayer>& layers, Vec& flat, Eigen::Index& at) {
  for (const auto& l : layers) {
    flat.segment(at, l.weight.size()) = Eigen::Map<const Vec>(l.weight.data(), l.weight.size());
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
}

void read_stack(std::vector<DenseLayer>& layers, const Vec& flat, Eigen::Index& at) {
  for (auto& l : layers) {
    Eigen::Map<Vec>(l.weight.data(), l.weight.size()) = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Vec embed(double x, double length, const EmbeddingConfig& cfg) {
  if (!(x >= 0.0 && x <= length)) {
    throw DomainError("embedding coordinate " + std::to_string(x) + " outside [0, " +
                      std::to_string(length) + "]");
  }
  if (cfg.dimension < 2 || cfg.dimension % 2 != 0) {
    throw DomainError("embedding dimension must be a positive even number");
  }
  const double xn = x / length;
  Vec out(cfg.dimension);
  for (int k = 0; k < cfg.dimension / 2; ++k) {
    const double phase = 2.0 * std::numbers::pi * std::pow(cfg.base, k) * xn;
    out[2 * k] = std::sin(phase);
    out[2 * k + 1] = std::cos(phase);
  }
  return out;
}

MlpModel::MlpModel(const NetConfig& cfg) : cfg_(cfg) {
  if (cfg.hidden_layers < 0 || cfg.hidden_units < 1) {
    throw ConfigError("network needs hidden_layers >= 0 and hidden_units >= 1");
  }
  if (!(cfg.modulus_min > 0.0 && cfg.modulus_max > cfg.modulus_min)) {
    throw ConfigError("modulus output range must satisfy 0 < min < max");
  }
  if (cfg.embedding.dimension < 2 || cfg.embedding.dimension % 2 != 0) {
    throw ConfigError("embedding dimension must be a positive even number");
  }
}

MlpModel MlpModel::zeros(const NetConfig& cfg) {
  MlpModel m(cfg);
  const int d = cfg.embedding.dimension, h = cfg.hidden_units;
  if (cfg.shared_trunk) {
    int in = d;
    for (int l = 0; l < cfg.hidden_layers; ++l, in = h) m.trunk_.push_back(zero_layer(in, h));
    m.modulus_head_.push_back(zero_layer(in, 1));
    m.damping_head_.push_back(zero_layer(in, 1));
  } else {
    for (auto* head : {&m.modulus_head_, &m.damping_head_}) {
      int in = d;
      for (int l = 0; l < cfg.hidden_layers; ++l, in = h) head->push_back(zero_layer(in, h));
      head->push_back(zero_layer(in, 1));
    }
  }
  return m;
}

MlpModel MlpModel::initialize(const NetConfig& cfg, std::uint64_t seed) {
  MlpModel m = zeros(cfg);
  std::mt19937_64 rng(seed);
  for (auto* stack : {&m.trunk_, &m.modulus_head_, &m.damping_head_}) {
    for (auto& layer : *stack) {
      layer = glorot(static_cast<int>(layer.weight.cols()), static_cast<int>(layer.weight.rows()), rng);
    }
  }
  return m;
}

Eigen::Index MlpModel::parameter_count() const {
  return stack_size(trunk_) + stack_size(modulus_head_) + stack_size(damping_head_);
}

Eigen::Index MlpModel::modulus_offset() const { return stack_size(trunk_); }
Eigen::Index MlpModel::damping_offset() const { return stack_size(trunk_) + stack_size(modulus_head_); }

Vec MlpModel::parameters() const {
  Vec flat(parameter_count());
  Eigen::Index at = 0;
  write_stack(trunk_, flat, at);
  write_stack(modulus_head_, flat, at);
  write_stack(damping_head_, flat, at);
  return flat;
}

void MlpModel::set_parameters(const Vec& flat) {
  if (flat.size() != parameter_count()) {
    throw SizingError("parameter vector has " + std::to_string(flat.size()) + " entries, model has " +
                      std::to_string(parameter_count()));
  }
  Eigen::Index at = 0;
  read_stack(trunk_, flat, at);
  read_stack(modulus_head_, flat, at);
  read_stack(damping_head_, flat, at);
}

std::vector<int> MlpModel::layer_dims(int stack) const {
  const auto& layers = stack == 0 ? trunk_ : (stack == 1 ? modulus_head_ : damping_head_);
  std::vector<int> dims;
  if (layers.empty()) return dims;
  dims.push_back(static_cast<int>(layers.front().weight.cols()));
  for (const auto& l : layers) dims.push_back(static_cast<int>(l.weight.rows()));
  return dims;
}

std::uint64_t MlpModel::fingerprint() const {
  const Vec p = parameters();
  Fnv1a h;
  h.doubles({p.data(), static_cast<std::size_t>(p.size())});
  h.value(cfg_.modulus_min).value(cfg_.modulus_max).value(cfg_.embedding.dimension);
  return h.digest();
}

FieldsForward forward_fields(const MlpModel& model, const SpatialGrid& grid) {
  const auto& cfg = model.config();
  const int n = grid.size();
  Mat x(cfg.embedding.dimension, n + 2);
  for (int i = 0; i < n + 2; ++i) x.col(i) = embed(grid.coordinate(i), grid.length(), cfg.embedding);

  FieldTape tape;
  tape.model_fingerprint = model.fingerprint();
  tape.nodes = n;
  tape.trunk_output = run_stack(model.trunk(), x, false, &tape.trunk_inputs);
  const Mat zp = run_stack(model.modulus_head(), tape.trunk_output, true, &tape.modulus_inputs);
  const Mat zc = run_stack(model.damping_head(), tape.trunk_output, true, &tape.damping_inputs);

  tape.modulus_sigmoid.resize(n + 2);
  Vec p(n + 2);
  const double lo = cfg.modulus_min, span = cfg.modulus_max - cfg.modulus_min;
  for (int i = 0; i < n + 2; ++i) {
    const double s = sigmoid(zp(0, i));
    tape.modulus_sigmoid[i] = s;
    p[i] = lo + span * s;
  }
  Vec c = zc.row(0).segment(1, n).transpose();
  return {ParameterField(std::move(p), std::move(c)), std::move(tape)};
}

Vec backward_fields(const MlpModel& model, const FieldTape& tape, const Vec& dmodulus,
                    const Vec& ddamping) {
  if (tape.model_fingerprint != model.fingerprint()) {
    throw StaleTapeError("field tape was recorded with different network weights");
  }
  const int n = tape.nodes;
  if (dmodulus.size() != n + 2 || ddamping.size() != n) {
    throw SizingError("upstream gradient sizes do not match the recorded grid");
  }
  const auto& cfg = model.config();
  const double span = cfg.modulus_max - cfg.modulus_min;
  Mat gp(1, n + 2), gc = Mat::Zero(1, n + 2);
  for (int i = 0; i < n + 2; ++i) {
    const double s = tape.modulus_sigmoid[i];
    gp(0, i) = dmodulus[i] * span * s * (1.0 - s);
  }
  gc.row(0).segment(1, n) = ddamping.transpose();

  Vec flat = Vec::Zero(model.parameter_count());
  // Head outputs are only needed for tanh layers; the last layer is linear.
  const Mat unused;
  Mat gtrunk = backprop_stack(model.modulus_head(), tape.modulus_inputs, unused, gp, true, flat,
                              model.modulus_offset());
  gtrunk += backprop_stack(model.damping_head(), tape.damping_inputs, unused, gc, true, flat,
                           model.damping_offset());
  if (!model.trunk().empty()) {
    backprop_stack(model.trunk(), tape.trunk_inputs, tape.trunk_output, gtrunk, false, flat, 0);
  }
  return flat;
}

AdamWState::AdamWState(Eigen::Index size, AdamWConfig cfg)
    : cfg_(cfg), m_(Vec::Zero(size)), v_(Vec::Zero(size)) {}

void AdamWState::restore(Vec m, Vec v, long step) {
  if (m.size() != v.size()) throw SizingError("moment vectors differ in size");
  m_ = std::move(m);
  v_ = std::move(v);
  step_ = step;
}

void adamw_step(Vec& params, const Vec& grad, AdamWState& state, double lr) {
  if (params.size() != grad.size() || params.size() != state.m_.size()) {
    throw SizingError("AdamW: parameter, gradient and moment sizes differ");
  }
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw NumericalError("AdamW: non-finite gradient at parameter " + std::to_string(i) +
                           "; update refused");
    }
  }
  const auto& c = state.cfg_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  params *= 1.0 - lr * c.weight_decay;
  state.m_ = c.beta1 * state.m_ + (1.0 - c.beta1) * grad;
  state.v_ = c.beta2 * state.v_ + (1.0 - c.beta2) * grad.cwiseAbs2();
  params.array() -=
      lr * (state.m_.array() / bc1) / ((state.v_.array() / bc2).sqrt() + c.epsilon);
}

void adamw_step(MlpModel& model, const Vec& grad, AdamWState& state, double lr) {
  Vec p = model.parameters();
  adamw_step(p, grad, state, lr);
  model.set_parameters(p);
}

}  // namespace beamsi
