#include "beamsi/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace beamsi {

namespace {

void require_same_shape(const Trajectory& a, const Trajectory& b) {
  if (a.nodes() != b.nodes() || a.save_count() != b.save_count()) {
    throw SizingError("trajectory shapes differ: " + std::to_string(a.nodes()) + "x" +
                      std::to_string(a.save_count()) + " vs " + std::to_string(b.nodes()) + "x" +
                      std::to_string(b.save_count()));
  }
}

auto displacement_block(const Trajectory& t) {
  return t.states().block(1, 0, t.save_count(), t.nodes());
}

double point_distance(const Point2& p, const Point2& q) { return std::hypot(p.x - q.x, p.y - q.y); }

}  // namespace

double field_mae(const Trajectory& a, const Trajectory& b) {
  require_same_shape(a, b);
  return (displacement_block(a) - displacement_block(b)).cwiseAbs().mean();
}

double field_max_error(const Trajectory& a, const Trajectory& b) {
  require_same_shape(a, b);
  return (displacement_block(a) - displacement_block(b)).cwiseAbs().maxCoeff();
}

std::optional<double> peak_error_ratio(const Trajectory& truth, const Trajectory& pred) {
  require_same_shape(truth, pred);
  const double peak = displacement_block(truth).cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) return std::nullopt;
  return field_max_error(truth, pred) / peak;
}

Trajectory save_window(const Trajectory& traj, int first, int last) {
  if (first < 1 || last < first || last > traj.save_count()) {
    throw DomainError("save window [" + std::to_string(first) + ", " + std::to_string(last) +
                      "] outside trajectory");
  }
  const int rows = last - first + 2;
  return {traj.times().segment(first - 1, rows), traj.states().middleRows(first - 1, rows)};
}

double discrete_frechet(std::span<const Point2> a, std::span<const Point2> b) {
  if (a.empty() || b.empty()) throw DomainError("discrete Frechet distance needs non-empty curves");
  const std::size_t m = b.size();
  // Rolling row of the coupling table.
  std::vector<double> prev(m), cur(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = point_distance(a[i], b[j]);
      double reach;
      if (i == 0 && j == 0) {
        reach = d;
      } else if (i == 0) {
        reach = std::max(cur[j - 1], d);
      } else if (j == 0) {
        reach = std::max(prev[0], d);
      } else {
        reach = std::max(std::min({prev[j], prev[j - 1], cur[j - 1]}), d);
      }
      cur[j] = reach;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

std::vector<Point2> make_curve(const Vec& x, const Vec& values) {
  if (x.size() != values.size()) throw SizingError("curve coordinate/value sizes differ");
  std::vector<Point2> c(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) c[i] = {x[i], values[i]};
  return c;
}

FrechetScores compare_fields(const SpatialGrid& grid, const Vec& identified, const Vec& reference) {
  const Vec x = grid.interior_coordinates();
  FrechetScores s;
  s.raw = discrete_frechet(make_curve(x, identified), make_curve(x, reference));
  const double lo = reference.minCoeff(), hi = reference.maxCoeff();
  const double range = hi > lo ? hi - lo : 1.0;
  const Vec xn = x / grid.length();
  const Vec a = (identified.array() - lo) / range;
  const Vec b = (reference.array() - lo) / range;
  s.normalized = discrete_frechet(make_curve(xn, a), make_curve(xn, b));
  return s;
}

double least_squares_slope(const Vec& x, const Vec& y) {
  if (x.size() != y.size() || x.size() < 2) throw SizingError("slope needs two or more paired points");
  const double mx = x.mean(), my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 0.0)) throw DomainError("slope undefined for constant x");
  return ((x.array() - mx) * (y.array() - my)).sum() / sxx;
}

Vec elemental_response(const Trajectory& traj, int node) {
  if (node < 0 || node >= traj.nodes()) {
    throw DomainError("node " + std::to_string(node) + " outside [0, " +
                      std::to_string(traj.nodes() - 1) + "]");
  }
  return traj.states().col(node);
}

Trajectory extrapolate(const BeamProblem& problem, const ParameterField& fields, int multiplier) {
  return solve(problem.extended(multiplier), fields);
}

bool MetricsReport::valid() const {
  for (double v : {interpolation_mae, extrapolation_mae, peak_error_ratio,
                   extrapolation_peak_error_ratio, frechet_modulus, frechet_damping,
                   frechet_modulus_normalized, frechet_damping_normalized, inference_seconds}) {
    if (!(v >= 0.0) || !std::isfinite(v)) return false;
  }
  return true;
}

void score_responses(MetricsReport& report, const Trajectory& truth_full, const Trajectory& pred_full,
                     int interpolation_saves) {
  require_same_shape(truth_full, pred_full);
  const int total = truth_full.save_count();
  const auto ti = save_window(truth_full, 1, interpolation_saves);
  const auto pi = save_window(pred_full, 1, interpolation_saves);
  report.interpolation_mae = field_mae(ti, pi);
  report.peak_error_ratio = peak_error_ratio(ti, pi).value_or(0.0);
  if (total > interpolation_saves) {
    const auto te = save_window(truth_full, interpolation_saves + 1, total);
    const auto pe = save_window(pred_full, interpolation_saves + 1, total);
    report.extrapolation_mae = field_mae(te, pe);
    report.extrapolation_peak_error_ratio = peak_error_ratio(te, pe).value_or(0.0);
  }
}

}  // namespace beamsi
