#pragma once

// Learnable parameter fields: sinusoidal positional embedding of the node
// coordinate feeding two dense tanh networks, one for the modulus
// coefficient P (bounded by a scaled sigmoid) and one for the damping C
// (linear output). Forward and backward passes are written out by hand.

#include <cstdint>
#include <vector>

#include "beamsi/beam_model.hpp"

namespace beamsi {

struct EmbeddingConfig {
  int dimension = 2;   ///< even; d/2 sin/cos pairs
  double base = 2.0;   ///< frequencies base^0 .. base^(d/2-1) cycles per span
};

/// [sin(2 pi f_k x/L), cos(2 pi f_k x/L)] pairs. Throws DomainError for x
/// outside [0, L].
Vec embed(double x, double length, const EmbeddingConfig& cfg);

struct NetConfig {
  int hidden_layers = 5;
  int hidden_units = 32;
  EmbeddingConfig embedding;
  double modulus_min = 0.5;
  double modulus_max = 3.0;
  /// When set the hidden layers are shared and only the output layers are
  /// per field.
  bool shared_trunk = false;
};

struct DenseLayer {
  Mat weight;  ///< out x in
  Vec bias;    ///< out
};

class MlpModel {
 public:
  /// Glorot-uniform weights, zero biases, drawn from a seeded mt19937_64.
  static MlpModel initialize(const NetConfig& cfg, std::uint64_t seed);
  /// All weights and biases zero.
  static MlpModel zeros(const NetConfig& cfg);

  const NetConfig& config() const noexcept { return cfg_; }
  const std::vector<DenseLayer>& trunk() const noexcept { return trunk_; }
  const std::vector<DenseLayer>& modulus_head() const noexcept { return modulus_head_; }
  const std::vector<DenseLayer>& damping_head() const noexcept { return damping_head_; }
  std::vector<DenseLayer>& modulus_head() noexcept { return modulus_head_; }
  std::vector<DenseLayer>& damping_head() noexcept { return damping_head_; }

  /// Flat parameter vector: trunk, modulus head, damping head; per layer the
  /// weight (column-major) then the bias.
  Vec parameters() const;
  void set_parameters(const Vec& flat);
  Eigen::Index parameter_count() const;
  /// Offsets of the modulus and damping heads inside parameters().
  Eigen::Index modulus_offset() const;
  Eigen::Index damping_offset() const;

  /// Layer widths per stack, e.g. {16, 32, 32, 1}.
  std::vector<int> layer_dims(int stack) const;

  std::uint64_t fingerprint() const;

 private:
  explicit MlpModel(const NetConfig& cfg);

  NetConfig cfg_;
  std::vector<DenseLayer> trunk_;
  std::vector<DenseLayer> modulus_head_;
  std::vector<DenseLayer> damping_head_;
};

/// Activations retained from forward_fields for backpropagation.
struct FieldTape {
  std::uint64_t model_fingerprint = 0;
  int nodes = 0;
  std::vector<Mat> trunk_inputs;
  std::vector<Mat> modulus_inputs;
  std::vector<Mat> damping_inputs;
  Mat trunk_output;
  Vec modulus_sigmoid;  ///< sigma(z) before scaling, n+2 entries
};

struct FieldsForward {
  ParameterField fields;
  FieldTape tape;
};

/// Evaluate both heads at every grid coordinate (supports included); the
/// damping field keeps the interior entries.
FieldsForward forward_fields(const MlpModel& model, const SpatialGrid& grid);

/// Gradient of the upstream loss with respect to parameters() given dL/dP
/// (n+2) and dL/dC (n). Throws StaleTapeError if the model changed since
/// the tape was recorded.
Vec backward_fields(const MlpModel& model, const FieldTape& tape, const Vec& dmodulus,
                    const Vec& ddamping);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
};

class AdamWState {
 public:
  AdamWState() = default;
  AdamWState(Eigen::Index size, AdamWConfig cfg);

  const AdamWConfig& config() const noexcept { return cfg_; }
  const Vec& first_moment() const noexcept { return m_; }
  const Vec& second_moment() const noexcept { return v_; }
  long step() const noexcept { return step_; }

  /// Restore from a checkpoint.
  void restore(Vec m, Vec v, long step);

 private:
  friend void adamw_step(Vec& params, const Vec& grad, AdamWState& state, double lr);

  AdamWConfig cfg_;
  Vec m_, v_;
  long step_ = 0;
};

/// Decoupled weight decay followed by the bias-corrected Adam update.
/// Refuses (NumericalError) non-finite gradients and leaves state untouched.
void adamw_step(Vec& params, const Vec& grad, AdamWState& state, double lr);
void adamw_step(MlpModel& model, const Vec& grad, AdamWState& state, double lr);

}  // namespace beamsi
