#pragma once

// Response and parameter metrics: field MAE, peak-error ratio, discrete
// Frechet distance between parameter curves, extrapolation windows.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "beamsi/problem.hpp"

namespace beamsi {

/// Mean |a - b| over the displacement entries of saves 1..N (t = 0 excluded).
double field_mae(const Trajectory& a, const Trajectory& b);
/// max |a - b| over the same entries.
double field_max_error(const Trajectory& a, const Trajectory& b);
/// max|truth - pred| / max|truth|; empty when the truth field is identically zero.
std::optional<double> peak_error_ratio(const Trajectory& truth, const Trajectory& pred);

/// Saves first..last (inclusive) of a trajectory as a new trajectory whose
/// row 0 is save first-1; metrics then cover exactly saves first..last.
Trajectory save_window(const Trajectory& traj, int first, int last);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Discrete Frechet distance (Eiter-Mannila coupling DP, Euclidean metric).
/// Throws DomainError on an empty curve.
double discrete_frechet(std::span<const Point2> a, std::span<const Point2> b);

/// (x_i, values_i) polyline.
std::vector<Point2> make_curve(const Vec& x, const Vec& values);

struct FrechetScores {
  double raw = 0.0;         ///< x in meters, value in field units
  double normalized = 0.0;  ///< x / L and (value - min_ref) / (max_ref - min_ref)
};

/// Compare an identified field with a reference over the interior nodes.
FrechetScores compare_fields(const SpatialGrid& grid, const Vec& identified_interior,
                             const Vec& reference_interior);

/// Ordinary least-squares slope of y against x.
double least_squares_slope(const Vec& x, const Vec& y);

/// Displacement history of one node (0-based). Throws DomainError when out of range.
Vec elemental_response(const Trajectory& traj, int node);
inline int midspan_node(int nodes) { return (nodes - 1) / 2; }
inline int quarter_node(int nodes) { return (nodes - 1) / 4; }

/// Re-solve identified fields from t = 0 over multiplier x the trained window.
Trajectory extrapolate(const BeamProblem& problem, const ParameterField& fields, int multiplier = 2);

struct MetricsReport {
  std::string method;
  double interpolation_mae = 0.0;
  double extrapolation_mae = 0.0;
  double peak_error_ratio = 0.0;
  double extrapolation_peak_error_ratio = 0.0;
  double frechet_modulus = 0.0;
  double frechet_damping = 0.0;
  double frechet_modulus_normalized = 0.0;
  double frechet_damping_normalized = 0.0;
  double inference_seconds = 0.0;

  bool valid() const;
};

/// Fill the response metrics of a report from full-horizon (0..2T)
/// trajectories; the first N saves are interpolation, the rest extrapolation.
void score_responses(MetricsReport& report, const Trajectory& truth_full,
                     const Trajectory& pred_full, int interpolation_saves);

}  // namespace beamsi
