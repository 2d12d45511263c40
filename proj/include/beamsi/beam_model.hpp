#pragma once

// Simply supported Euler-Bernoulli beam with spatially varying modulus and
// damping, discretized in space by the method of lines.

#include <cstdint>

#include <Eigen/Dense>

#include "beamsi/errors.hpp"

namespace beamsi {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Geometry and material constants. Section properties are derived, never set.
class BeamSpec {
 public:
  BeamSpec(double length, double width, double thickness, double density, double modulus);

  /// 40 cm x 5 cm x 0.5 cm aluminum strip, E0 = 70 GPa.
  static BeamSpec aluminum_strip() { return {0.40, 0.05, 0.005, 2700.0, 70.0e9}; }

  double length() const noexcept { return length_; }
  double width() const noexcept { return width_; }
  double thickness() const noexcept { return thickness_; }
  double density() const noexcept { return density_; }
  double modulus() const noexcept { return modulus_; }
  double second_moment() const noexcept { return second_moment_; }
  double area() const noexcept { return area_; }
  /// E0 * I
  double flexural_rigidity() const noexcept { return modulus_ * second_moment_; }
  /// rho * A
  double mass_per_length() const noexcept { return density_ * area_; }

 private:
  double length_, width_, thickness_, density_, modulus_;
  double second_moment_, area_;
};

/// Uniform grid of interior nodes; x = 0 and x = L are pinned supports.
class SpatialGrid {
 public:
  SpatialGrid(double length, int interior_nodes = 16);

  int size() const noexcept { return n_; }
  double length() const noexcept { return length_; }
  double dx() const noexcept { return length_ / (n_ + 1); }
  /// Coordinate of grid index i in [0, n+1]; 0 and n+1 are the supports.
  double coordinate(int i) const;
  Vec interior_coordinates() const;
  /// Supports included, n+2 entries.
  Vec all_coordinates() const;

 private:
  double length_;
  int n_;
};

inline constexpr int kMinInteriorNodes = 5;

/// Finite-difference matrices acting on interior displacements. Rows next to
/// the supports are closed with the ghost rule u(0) = 0, u(-k) = -u(k),
/// which encodes zero deflection and zero moment. Entries are the bare
/// stencil weights; divide by dx^k to get derivatives.
struct SpatialOperators {
  Mat first;   ///< 2-point central, n x n
  Mat second;  ///< 3-point central, n x n
  Mat third;   ///< 5-point antisymmetric, n x n
  Mat fourth;  ///< 5-point central, n x n
  /// Central first and second differences of a field sampled at all n+2
  /// grid points (supports included), evaluated at the interior nodes.
  Mat field_first;   ///< n x (n+2)
  Mat field_second;  ///< n x (n+2)
  double dx = 0.0;

  int size() const noexcept { return static_cast<int>(fourth.rows()); }
};

SpatialOperators build_operators(const SpatialGrid& grid);

/// Identification targets: modulus coefficient P at all n+2 grid points and
/// damping C (N s / m^2) at the n interior nodes.
class ParameterField {
 public:
  ParameterField(Vec modulus, Vec damping);

  const Vec& modulus() const noexcept { return modulus_; }
  const Vec& damping() const noexcept { return damping_; }
  int size() const noexcept { return static_cast<int>(damping_.size()); }
  /// Modulus at interior nodes only.
  Vec interior_modulus() const { return modulus_.segment(1, damping_.size()); }

  /// Content fingerprint used to detect stale tapes.
  std::uint64_t fingerprint() const;

 private:
  Vec modulus_;
  Vec damping_;
};

/// Uniform step load q0 (N/m), on for t <= cutoff and off afterwards.
struct LoadModel {
  double amplitude = 1000.0;
  double cutoff = 0.02;

  double force_at(double t) const;
};

/// Closed-form ground-truth profiles: P0(x) = mean + amp * sin(2 pi x / L)
/// and C0(x) = c_max * x / L.
struct GroundTruthProfile {
  double modulus_mean = 1.5;
  double modulus_amplitude = 0.5;
  double damping_max = 5.0;

  double modulus(double x, double length) const;
  double modulus_dx(double x, double length) const;
  double modulus_dxx(double x, double length) const;
  double damping(double x, double length) const;
};

ParameterField ground_truth_fields(const BeamSpec& spec, const SpatialGrid& grid,
                                   const GroundTruthProfile& profile = {});

struct StateDerivative {
  Vec du;
  Vec dv;
};

/// Right-hand side evaluated straight from the stencils:
///   du/dt = v
///   dv/dt = [F - E0 I (P'' u'' + 2 P' u''' + P u'''') - C v] / (rho A)
/// Throws PropagationError on a non-finite state entry.
StateDerivative rhs(const Vec& u, const Vec& v, const ParameterField& fields, const BeamSpec& spec,
                    const SpatialOperators& ops, const LoadModel& load, double t);

/// The semi-discrete system with its stiffness operator assembled once.
/// dv/dt = f/(rho A) - K u - D v where K = E0 I K(P) / (rho A) and
/// D = diag(C) / (rho A).
class BeamSystem {
 public:
  BeamSystem(BeamSpec spec, SpatialOperators ops, ParameterField fields, LoadModel load);

  int size() const noexcept { return ops_.size(); }
  const BeamSpec& spec() const noexcept { return spec_; }
  const SpatialOperators& operators() const noexcept { return ops_; }
  const ParameterField& fields() const noexcept { return fields_; }
  const LoadModel& load() const noexcept { return load_; }
  /// Assembled, mass-normalized stiffness K (n x n).
  const Mat& stiffness() const noexcept { return stiffness_; }

  /// Evaluate with an explicit load density in place of force_at(t).
  void evaluate(const Vec& u, const Vec& v, double force, Vec& du, Vec& dv) const;
  StateDerivative evaluate(const Vec& u, const Vec& v, double t) const;

  /// Given the cotangent (wu, wv) of (du, dv), accumulate the cotangent of
  /// the state (u, v) into (gu, gv).
  void pullback_state(const Vec& wu, const Vec& wv, Vec& gu, Vec& gv) const;

  /// Accumulate the cotangent of the parameters from the cotangent wv of
  /// dv evaluated at state (u, v). dmodulus has n+2 entries, ddamping n.
  void pullback_parameters(const Vec& u, const Vec& v, const Vec& wv, Vec& dmodulus,
                           Vec& ddamping) const;

 private:
  BeamSpec spec_;
  SpatialOperators ops_;
  ParameterField fields_;
  LoadModel load_;
  Mat stiffness_;
  Vec damping_rate_;  // C / (rho A)
  Vec inv_dx_pow_;    // 1, 1/dx, ..., 1/dx^4
};

}  // namespace beamsi
