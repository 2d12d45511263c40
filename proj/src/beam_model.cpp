#include "beamsi/beam_model.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "beamsi/hash.hpp"

namespace beamsi {

namespace {

struct Tap {
  int offset;
  double weight;
};

// Lay a centered stencil over the interior nodes and fold the taps that
// fall on or beyond a support back in with u(0) = u(L) = 0 and the odd
// reflection u(-k) = -u(k).
Mat ghost_closed(int n, const std::vector<Tap>& stencil) {
  Mat m = Mat::Zero(n, n);
  for (int row = 0; row < n; ++row) {
    const int node = row + 1;
    for (const auto& tap : stencil) {
      int k = node + tap.offset;
      double w = tap.weight;
      if (k < 0) {
        k = -k;
        w = -w;
      } else if (k > n + 1) {
        k = 2 * (n + 1) - k;
        w = -w;
      }
      if (k == 0 || k == n + 1) continue;
      m(row, k - 1) += w;
    }
  }
  return m;
}

// Same stencil applied to a field that is sampled at the supports too.
Mat with_supports(int n, const std::vector<Tap>& stencil) {
  Mat m = Mat::Zero(n, n + 2);
  for (int row = 0; row < n; ++row) {
    for (const auto& tap : stencil) m(row, row + 1 + tap.offset) += tap.weight;
  }
  return m;
}

const std::vector<Tap> kFirst{{-1, -0.5}, {1, 0.5}};
const std::vector<Tap> kSecond{{-1, 1.0}, {0, -2.0}, {1, 1.0}};
const std::vector<Tap> kThird{{-2, -0.5}, {-1, 1.0}, {1, -1.0}, {2, 0.5}};
const std::vector<Tap> kFourth{{-2, 1.0}, {-1, -4.0}, {0, 6.0}, {1, -4.0}, {2, 1.0}};

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string("beam ") + name + " must be positive and finite, got " +
                      std::to_string(value));
  }
}

void check_finite(const Vec& u, const Vec& v) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i])) {
      throw PropagationError("non-finite displacement at node " + std::to_string(i), i);
    }
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw PropagationError("non-finite velocity at node " + std::to_string(i), i);
    }
  }
}

}  // namespace

BeamSpec::BeamSpec(double length, double width, double thickness, double density, double modulus)
    : length_(length), width_(width), thickness_(thickness), density_(density), modulus_(modulus) {
  require_positive(length, "length");
  require_positive(width, "width");
  require_positive(thickness, "thickness");
  require_positive(density, "density");
  require_positive(modulus, "modulus");
  second_moment_ = width_ * thickness_ * thickness_ * thickness_ / 12.0;
  area_ = width_ * thickness_;
}

SpatialGrid::SpatialGrid(double length, int interior_nodes) : length_(length), n_(interior_nodes) {
  if (!(length > 0.0)) throw DomainError("grid length must be positive");
  if (interior_nodes < 1) throw SizingError("grid needs at least one interior node");
}

double SpatialGrid::coordinate(int i) const {
  if (i < 0 || i > n_ + 1) {
    throw DomainError("grid index " + std::to_string(i) + " outside [0, " + std::to_string(n_ + 1) +
                      "]");
  }
  if (i == n_ + 1) return length_;
  return i * dx();
}

Vec SpatialGrid::interior_coordinates() const {
  Vec x(n_);
  for (int i = 0; i < n_; ++i) x[i] = coordinate(i + 1);
  return x;
}

Vec SpatialGrid::all_coordinates() const {
  Vec x(n_ + 2);
  for (int i = 0; i < n_ + 2; ++i) x[i] = coordinate(i);
  return x;
}

SpatialOperators build_operators(const SpatialGrid& grid) {
  const int n = grid.size();
  if (n < kMinInteriorNodes) {
    throw SizingError("finite-difference operators need at least " +
                      std::to_string(kMinInteriorNodes) + " interior nodes, got " +
                      std::to_string(n));
  }
  SpatialOperators ops;
  ops.first = ghost_closed(n, kFirst);
  ops.second = ghost_closed(n, kSecond);
  ops.third = ghost_closed(n, kThird);
  ops.fourth = ghost_closed(n, kFourth);
  ops.field_first = with_supports(n, kFirst);
  ops.field_second = with_supports(n, kSecond);
  ops.dx = grid.dx();
  return ops;
}

ParameterField::ParameterField(Vec modulus, Vec damping)
    : modulus_(std::move(modulus)), damping_(std::move(damping)) {
  if (modulus_.size() != damping_.size() + 2) {
    throw SizingError("modulus field needs n+2 entries (supports included); got " +
                      std::to_string(modulus_.size()) + " for n = " +
                      std::to_string(damping_.size()));
  }
  for (Eigen::Index i = 0; i < modulus_.size(); ++i) {
    if (!(modulus_[i] > 0.0) || !std::isfinite(modulus_[i])) {
      throw DomainError("modulus coefficient must be positive and finite at grid index " +
                        std::to_string(i));
    }
  }
  for (Eigen::Index i = 0; i < damping_.size(); ++i) {
    if (!std::isfinite(damping_[i])) {
      throw DomainError("damping must be finite at node " + std::to_string(i));
    }
  }
}

std::uint64_t ParameterField::fingerprint() const {
  Fnv1a h;
  h.doubles({modulus_.data(), static_cast<std::size_t>(modulus_.size())});
  h.doubles({damping_.data(), static_cast<std::size_t>(damping_.size())});
  return h.digest();
}

double LoadModel::force_at(double t) const {
  if (t < 0.0 || std::isnan(t)) throw DomainError("load queried at negative time");
  return t <= cutoff ? amplitude : 0.0;
}

double GroundTruthProfile::modulus(double x, double length) const {
  return modulus_mean + modulus_amplitude * std::sin(2.0 * std::numbers::pi * x / length);
}

double GroundTruthProfile::modulus_dx(double x, double length) const {
  const double k = 2.0 * std::numbers::pi / length;
  return modulus_amplitude * k * std::cos(k * x);
}

double GroundTruthProfile::modulus_dxx(double x, double length) const {
  const double k = 2.0 * std::numbers::pi / length;
  return -modulus_amplitude * k * k * std::sin(k * x);
}

double GroundTruthProfile::damping(double x, double length) const {
  return damping_max * x / length;
}

ParameterField ground_truth_fields(const BeamSpec& spec, const SpatialGrid& grid,
                                   const GroundTruthProfile& profile) {
  const int n = grid.size();
  const double length = spec.length();
  Vec p(n + 2), c(n);
  for (int i = 0; i < n + 2; ++i) p[i] = profile.modulus(grid.coordinate(i), length);
  for (int i = 0; i < n; ++i) c[i] = profile.damping(grid.coordinate(i + 1), length);
  return {std::move(p), std::move(c)};
}

StateDerivative rhs(const Vec& u, const Vec& v, const ParameterField& fields, const BeamSpec& spec,
                    const SpatialOperators& ops, const LoadModel& load, double t) {
  const int n = ops.size();
  if (u.size() != n || v.size() != n || fields.size() != n) {
    throw SizingError("state and field sizes must match the operator size " + std::to_string(n));
  }
  check_finite(u, v);
  const double dx = ops.dx;
  const Vec& p = fields.modulus();
  const Vec p1 = ops.field_first * p / dx;
  const Vec p2 = ops.field_second * p / (dx * dx);
  const Vec u2 = ops.second * u / (dx * dx);
  const Vec u3 = ops.third * u / (dx * dx * dx);
  const Vec u4 = ops.fourth * u / (dx * dx * dx * dx);
  const Vec bending = p2.cwiseProduct(u2) + 2.0 * p1.cwiseProduct(u3) +
                      fields.interior_modulus().cwiseProduct(u4);
  StateDerivative out;
  out.du = v;
  out.dv = (Vec::Constant(n, load.force_at(t)) - spec.flexural_rigidity() * bending -
            fields.damping().cwiseProduct(v)) /
           spec.mass_per_length();
  return out;
}

BeamSystem::BeamSystem(BeamSpec spec, SpatialOperators ops, ParameterField fields, LoadModel load)
    : spec_(std::move(spec)),
      ops_(std::move(ops)),
      fields_(std::move(fields)),
      load_(load) {
  const int n = ops_.size();
  if (fields_.size() != n) {
    throw SizingError("parameter field has " + std::to_string(fields_.size()) +
                      " nodes, operators have " + std::to_string(n));
  }
  const double dx = ops_.dx;
  inv_dx_pow_.resize(5);
  for (int k = 0; k < 5; ++k) inv_dx_pow_[k] = std::pow(dx, -k);

  const Vec& p = fields_.modulus();
  const Vec p1 = ops_.field_first * p * inv_dx_pow_[1];
  const Vec p2 = ops_.field_second * p * inv_dx_pow_[2];
  const Vec pi = fields_.interior_modulus();
  const double scale = spec_.flexural_rigidity() / spec_.mass_per_length();
  stiffness_ = scale * (p2.asDiagonal() * ops_.second * inv_dx_pow_[2] +
                        2.0 * p1.asDiagonal() * ops_.third * inv_dx_pow_[3] +
                        pi.asDiagonal() * ops_.fourth * inv_dx_pow_[4]);
  damping_rate_ = fields_.damping() / spec_.mass_per_length();
}

void BeamSystem::evaluate(const Vec& u, const Vec& v, double force, Vec& du, Vec& dv) const {
  du = v;
  dv.noalias() = -stiffness_ * u;
  dv.array() += force / spec_.mass_per_length() - damping_rate_.array() * v.array();
}

StateDerivative BeamSystem::evaluate(const Vec& u, const Vec& v, double t) const {
  if (u.size() != size() || v.size() != size()) {
    throw SizingError("state size does not match the system size " + std::to_string(size()));
  }
  check_finite(u, v);
  StateDerivative out;
  evaluate(u, v, load_.force_at(t), out.du, out.dv);
  return out;
}

void BeamSystem::pullback_state(const Vec& wu, const Vec& wv, Vec& gu, Vec& gv) const {
  gu.noalias() -= stiffness_.transpose() * wv;
  gv += wu;
  gv.array() -= damping_rate_.array() * wv.array();
}

void BeamSystem::pullback_parameters(const Vec& u, const Vec& v, const Vec& wv, Vec& dmodulus,
                                     Vec& ddamping) const {
  // Every bending term carries dx^-4 in total once the field stencil
  // scaling is combined with the displacement stencil scaling.
  const double scale =
      -spec_.flexural_rigidity() / spec_.mass_per_length() * inv_dx_pow_[4];
  const Vec a2 = (ops_.second * u).cwiseProduct(wv);
  const Vec a3 = (ops_.third * u).cwiseProduct(wv);
  const Vec a4 = (ops_.fourth * u).cwiseProduct(wv);
  dmodulus.noalias() += scale * (ops_.field_second.transpose() * a2);
  dmodulus.noalias() += (2.0 * scale) * (ops_.field_first.transpose() * a3);
  dmodulus.segment(1, size()) += scale * a4;
  ddamping.array() -= wv.array() * v.array() / spec_.mass_per_length();
}

}  // namespace beamsi
