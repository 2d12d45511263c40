#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "beamsi/evaluation.hpp"

using namespace beamsi;

namespace {

Trajectory make_traj(const Mat& u) {
  // rows = saves + 1, velocities zero
  Mat states = Mat::Zero(u.rows(), 2 * u.cols());
  states.leftCols(u.cols()) = u;
  return {Vec::LinSpaced(u.rows(), 0.0, 1.0), states};
}

// Minimum over every monotone coupling path of the maximum pair distance.
double frechet_brute_force(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j,
                                                                   double worst) {
    worst = std::max(worst, std::hypot(a[i].x - b[j].x, a[i].y - b[j].y));
    if (worst >= best) return;
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = worst;
      return;
    }
    if (i + 1 < a.size()) walk(i + 1, j, worst);
    if (j + 1 < b.size()) walk(i, j + 1, worst);
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, worst);
  };
  walk(0, 0, 0.0);
  return best;
}

std::vector<Point2> random_curve(std::mt19937_64& rng, int len) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<Point2> c(len);
  for (auto& p : c) p = {U(rng), U(rng)};
  return c;
}

}  // namespace

TEST(FieldMae, BasicCases) {
  Mat a = Mat::Random(11, 4);
  EXPECT_EQ(field_mae(make_traj(a), make_traj(a)), 0.0);
  Mat b = a.array() + 0.25;
  EXPECT_NEAR(field_mae(make_traj(a), make_traj(b)), 0.25, 1e-15);
  Mat c = a;
  for (int i = 1; i < 11; ++i)
    for (int j = 0; j < 4; ++j) c(i, j) += ((i + j) % 2 ? 0.1 : -0.1);
  EXPECT_NEAR(field_mae(make_traj(a), make_traj(c)), 0.1, 1e-15);
}

TEST(FieldMae, IgnoresInitialRowAndChecksShape) {
  Mat a = Mat::Zero(5, 3), b = Mat::Zero(5, 3);
  b.row(0).setConstant(9.0);
  EXPECT_EQ(field_mae(make_traj(a), make_traj(b)), 0.0);
  EXPECT_THROW(field_mae(make_traj(a), make_traj(Mat::Zero(6, 3))), SizingError);
}

TEST(FieldMae, BoundedByMaxError) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    Mat a = Mat::Random(8, 5), b = Mat::Random(8, 5);
    EXPECT_LE(field_mae(make_traj(a), make_traj(b)), field_max_error(make_traj(a), make_traj(b)));
  }
}

TEST(PeakErrorRatio, ProportionalAndIdentical) {
  Mat a = Mat::Random(9, 6);
  Mat b = 1.003 * a;
  EXPECT_NEAR(*peak_error_ratio(make_traj(a), make_traj(b)), 0.003, 1e-12);
  EXPECT_EQ(*peak_error_ratio(make_traj(a), make_traj(a)), 0.0);
  EXPECT_FALSE(peak_error_ratio(make_traj(Mat::Zero(4, 3)), make_traj(a.topLeftCorner(4, 3))));
}

TEST(SaveWindow, SelectsRows) {
  Mat a(7, 2);
  for (int i = 0; i < 7; ++i) a.row(i).setConstant(i);
  const auto w = save_window(make_traj(a), 3, 6);
  EXPECT_EQ(w.save_count(), 4);
  EXPECT_EQ(w.displacement(1, 0), 3.0);
  EXPECT_EQ(w.displacement(4, 1), 6.0);
  EXPECT_THROW(save_window(make_traj(a), 0, 3), DomainError);
  EXPECT_THROW(save_window(make_traj(a), 2, 7), DomainError);
}

TEST(DiscreteFrechet, IdenticalAndOffsetSegments) {
  const std::vector<Point2> a{{0, 0}, {0.5, 0}, {1, 0}};
  EXPECT_EQ(discrete_frechet(a, a), 0.0);
  const std::vector<Point2> b{{0, 1}, {0.5, 1}, {1, 1}};
  EXPECT_DOUBLE_EQ(discrete_frechet(a, b), 1.0);
  EXPECT_THROW(discrete_frechet({}, a), DomainError);
}

TEST(DiscreteFrechet, MatchesExhaustiveCouplings) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 6);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_curve(rng, len(rng)), b = random_curve(rng, len(rng));
    EXPECT_EQ(discrete_frechet(a, b), frechet_brute_force(a, b));
  }
}

TEST(DiscreteFrechet, SymmetricAndTriangle) {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_curve(rng, 5), b = random_curve(rng, 6), c = random_curve(rng, 4);
    EXPECT_EQ(discrete_frechet(a, b), discrete_frechet(b, a));
    EXPECT_LE(discrete_frechet(a, c), discrete_frechet(a, b) + discrete_frechet(b, c) + 1e-15);
  }
}

TEST(DiscreteFrechet, BetweenHausdorffAndAlignedMax) {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 100; ++k) {
    const auto a = random_curve(rng, 6), b = random_curve(rng, 6);
    double aligned = 0.0, hausdorff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      aligned = std::max(aligned, std::hypot(a[i].x - b[i].x, a[i].y - b[i].y));
      double da = 1e300, db = 1e300;
      for (std::size_t j = 0; j < b.size(); ++j) {
        da = std::min(da, std::hypot(a[i].x - b[j].x, a[i].y - b[j].y));
        db = std::min(db, std::hypot(b[i].x - a[j].x, b[i].y - a[j].y));
      }
      hausdorff = std::max({hausdorff, da, db});
    }
    const double f = discrete_frechet(a, b);
    EXPECT_LE(f, aligned);
    EXPECT_GE(f, hausdorff);
  }
}

TEST(CompareFields, NormalizedUsesReferenceRange) {
  SpatialGrid grid(0.4, 16);
  Vec ref(16), shifted(16);
  for (int i = 0; i < 16; ++i) ref[i] = 1.0 + i / 15.0;
  shifted = ref.array() + 0.1;
  const auto s = compare_fields(grid, shifted, ref);
  EXPECT_NEAR(s.normalized, 0.1, 1e-12);
  EXPECT_LE(s.raw, 0.1 + 1e-12);
  EXPECT_EQ(compare_fields(grid, ref, ref).normalized, 0.0);
}

TEST(LeastSquaresSlope, KnownLine) {
  Vec x = Vec::LinSpaced(10, 0.0, 0.4);
  Vec y = 12.5 * x.array() - 3.0;
  EXPECT_NEAR(least_squares_slope(x, y), 12.5, 1e-12);
  EXPECT_THROW(least_squares_slope(Vec::Ones(3), y.head(3)), DomainError);
}

TEST(ElementalResponse, ZeroFieldAndBounds) {
  const auto t = make_traj(Mat::Zero(10, 16));
  EXPECT_TRUE(elemental_response(t, midspan_node(16)).isZero(0));
  EXPECT_THROW(elemental_response(t, 16), DomainError);
  EXPECT_THROW(elemental_response(t, -1), DomainError);
}

TEST(ElementalResponse, MirrorSymmetryUnderSymmetricFields) {
  BeamProblem p;
  p.solver.t_end = 0.01;
  p.solver.n_save = 20;
  const auto grid = p.grid();
  Vec P(18), C(16);
  for (int i = 0; i < 18; ++i) P[i] = 1.2 + 0.3 * std::sin(M_PI * grid.coordinate(i) / 0.4);
  for (int i = 0; i < 16; ++i) C[i] = 2.0 + std::cos(2 * M_PI * grid.coordinate(i + 1) / 0.4);
  const auto t = solve(p, ParameterField(P, C));
  for (int i = 0; i < 8; ++i) {
    const Vec a = elemental_response(t, i), b = elemental_response(t, 15 - i);
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-12 * a.cwiseAbs().maxCoeff()) << "node " << i;
  }
}

TEST(Extrapolate, GroundTruthReproducesExtendedSolve) {
  BeamProblem p;
  p = p.with_resolved_step(3.0);
  const auto fields = p.truth_fields();
  const auto base = solve(p, fields);
  const auto ext = extrapolate(p, fields, 2);
  const auto direct = solve(p.extended(2), fields);
  EXPECT_EQ(ext.save_count(), 320);
  EXPECT_EQ(ext.states(), direct.states());
  // The first window of the long solve is the short solve, bit for bit.
  EXPECT_EQ(Mat(ext.states().topRows(161)), base.states());

  MetricsReport r;
  score_responses(r, direct, ext, 160);
  EXPECT_EQ(r.interpolation_mae, 0.0);
  EXPECT_EQ(r.extrapolation_mae, 0.0);
  EXPECT_TRUE(r.valid());
}
