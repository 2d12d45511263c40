#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <vector>

#include "beamsi/ode_solver.hpp"
#include "support/reference_solver.hpp"

using namespace beamsi;

namespace {

const BeamSpec kSpec = BeamSpec::aluminum_strip();

BeamSystem default_system(int n = 16, LoadModel load = {}) {
  SpatialGrid grid(kSpec.length(), n);
  return {kSpec, build_operators(grid), ground_truth_fields(kSpec, grid), load};
}

BeamSystem constant_system(int n, double p, double c, LoadModel load) {
  SpatialGrid grid(kSpec.length(), n);
  return {kSpec, build_operators(grid), ParameterField(Vec::Constant(n + 2, p), Vec::Constant(n, c)),
          load};
}

double weighted_sum(const Trajectory& traj, const std::vector<Cotangent>& cot) {
  double s = 0.0;
  for (const auto& c : cot) s += c.weight * traj.displacement(c.save, c.node);
  return s;
}

}  // namespace

TEST(Rk4, ScalarDecayOneStep) {
  const auto y = rk4_step([](double, double x) { return -x; }, 1.0, 0.0, 0.1);
  // 1 - h + h^2/2 - h^3/6 + h^4/24
  EXPECT_NEAR(y, 0.904837500, 1e-12);
  EXPECT_NEAR(y, std::exp(-0.1), 1e-7);
}

TEST(Rk4, VectorStateFourthOrder) {
  // Harmonic oscillator; global error must drop ~16x per halving.
  auto f = [](double, const Eigen::Vector2d& y) { return Eigen::Vector2d(y[1], -y[0]); };
  auto solve = [&](int steps) {
    Eigen::Vector2d y(1.0, 0.0);
    const double h = 1.0 / steps;
    for (int i = 0; i < steps; ++i) y = rk4_step(f, y, i * h, h);
    return std::abs(y[0] - std::cos(1.0));
  };
  const double ratio = solve(20) / solve(40);
  EXPECT_NEAR(ratio, 16.0, 1.0);
}

TEST(StableStep, MatchesDenseEigenvalue) {
  auto sys = constant_system(16, 1.0, 0.0, LoadModel{0, 0});
  const auto est = estimate_stable_step(sys);
  Eigen::SelfAdjointEigenSolver<Mat> eig(sys.stiffness());
  const double dense = eig.eigenvalues().maxCoeff();
  EXPECT_NEAR(est.lambda_max, dense, 0.05 * dense);
  EXPECT_NEAR(est.lambda_max, dense, 1e-8 * dense);
  // The fourth-difference symbol peaks at 16 for the sawtooth mode.
  const double bound = 16.0 * kSpec.flexural_rigidity() / kSpec.mass_per_length() /
                       std::pow(sys.operators().dx, 4);
  EXPECT_LT(est.lambda_max, bound);
  EXPECT_GT(est.lambda_max, 0.95 * bound);
  EXPECT_GE(est.iterations, 50);
  EXPECT_NEAR(est.max_step, 0.5 * 2.8 / std::sqrt(est.lambda_max), 1e-18);
}

TEST(StableStep, VariableModulusAgainstDenseSolve) {
  auto sys = default_system();
  const auto est = estimate_stable_step(sys);
  Eigen::EigenSolver<Mat> eig(sys.stiffness());
  double top = 0.0;
  for (int i = 0; i < eig.eigenvalues().size(); ++i) top = std::max(top, eig.eigenvalues()[i].real());
  EXPECT_NEAR(est.lambda_max, top, 1e-6 * top);
}

TEST(StableStep, ScalesWithGridAndModulus) {
  const double l16 = estimate_stable_step(constant_system(16, 1, 0, {0, 0})).lambda_max;
  const double l32 = estimate_stable_step(constant_system(32, 1, 0, {0, 0})).lambda_max;
  // dx^-4 with dx = L/17 and L/33.
  EXPECT_NEAR(l32 / l16, 16.0, 2.0);
  const auto w1 = estimate_stable_step(constant_system(16, 1, 0, {0, 0})).omega_max;
  const auto w4 = estimate_stable_step(constant_system(16, 4, 0, {0, 0})).omega_max;
  EXPECT_NEAR(w4 / w1, 2.0, 1e-9);
}

TEST(Schedule, HitsSavesAndCutoff) {
  SolverConfig cfg;
  LoadModel load;
  const auto s = build_schedule(cfg, load, 1.3e-5);
  ASSERT_EQ(s.save_after.size(), 161u);
  EXPECT_NEAR(cfg.save_interval(), 2.8125e-4, 1e-18);
  bool cutoff_on_boundary = false;
  for (std::size_t j = 0; j < s.steps.size(); ++j) {
    EXPECT_LE(s.steps[j].size, 1.3e-5 * (1 + 1e-12));
    if (std::abs(s.steps[j].start - load.cutoff) < 1e-15) {
      cutoff_on_boundary = true;
      EXPECT_EQ(s.steps[j].force, 0.0);
      EXPECT_EQ(s.steps[j - 1].force, 1000.0);
    }
  }
  EXPECT_TRUE(cutoff_on_boundary);
  // Steps inside a save interval tile it exactly.
  for (int k = 0; k < 160; ++k) {
    double t = s.save_times[k];
    for (std::size_t j = s.save_after[k]; j < s.save_after[k + 1]; ++j) {
      EXPECT_NEAR(s.steps[j].start, t, 1e-15);
      t = s.steps[j].start + s.steps[j].size;
    }
    EXPECT_NEAR(t, s.save_times[k + 1], 1e-15);
  }
}

TEST(Integrate, ZeroLoadStaysAtRest) {
  auto sys = default_system(16, LoadModel{0.0, 0.02});
  const auto sol = integrate(sys, SolverConfig{});
  EXPECT_EQ(sol.trajectory.states().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(sol.trajectory.save_count(), 160);
  EXPECT_EQ(sol.trajectory.times()[0], 0.0);
}

TEST(Integrate, DefaultProblemPeakNearDynamicAmplificationOfStatic) {
  auto sys = default_system();
  const auto sol = integrate(sys, SolverConfig{});
  const int mid = 8;
  double peak = 0.0;
  for (int k = 0; k <= 160; ++k) peak = std::max(peak, std::abs(sol.trajectory.displacement(k, mid)));
  // Harmonic-mean modulus over the span is sqrt(1.5^2 - 0.5^2).
  const double p_eff = std::sqrt(2.0);
  const double stat = 5.0 * 1000.0 * std::pow(0.4, 4) / (384.0 * kSpec.flexural_rigidity() * p_eff);
  EXPECT_GT(peak, 1.0 * stat);
  EXPECT_LT(peak, 3.0 * stat);
  // Regression value frozen from this implementation (n = 16, auto step).
  EXPECT_NEAR(peak, 0.013240579795117261, 1e-9);
}

TEST(Integrate, DivergesWithOversizedStep) {
  auto sys = default_system();
  SolverConfig cfg;
  cfg.step = 1e-4;
  try {
    integrate(sys, cfg);
    FAIL();
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.step(), 0);
    EXPECT_NE(std::string(e.what()).find("smaller"), std::string::npos);
  }
}

TEST(Integrate, FourthOrderConvergence) {
  auto sys = default_system();
  const double h0 = estimate_stable_step(sys).max_step / 4.0;
  auto solve = [&](double h) {
    SolverConfig cfg;
    cfg.step = h;
    return integrate(sys, cfg).trajectory.displacements();
  };
  const Mat ref = solve(h0 / 8);
  const double e1 = (solve(h0) - ref).cwiseAbs().maxCoeff();
  const double e2 = (solve(h0 / 2) - ref).cwiseAbs().maxCoeff();
  EXPECT_NEAR(e1 / e2, 16.0, 16.0 * 0.2) << "e1 " << e1 << " e2 " << e2;
}

TEST(Integrate, EnergyConservedWithoutDampingOrLoad) {
  // Release from the static shape under load, then track
  // E = rho A |v|^2 / 2 + E0 I |A2 u / dx^2|^2 / 2 (P = 1, so A4 = A2^T A2).
  const int n = 16;
  auto sys = constant_system(n, 1.0, 0.0, LoadModel{0.0, 0.0});
  const auto& ops = sys.operators();
  const Vec u0 = (ops.fourth).fullPivLu().solve(Vec::Constant(n, 1e-9));
  Vec init(2 * n);
  init << u0, Vec::Zero(n);
  SolverConfig cfg;
  cfg.t_end = 0.05;
  cfg.n_save = 400;
  const auto sol = integrate(sys, cfg, false, init);
  auto energy = [&](int k) {
    const Vec u = sol.trajectory.states().row(k).head(n).transpose();
    const Vec v = sol.trajectory.states().row(k).tail(n).transpose();
    const Vec curv = ops.second * u / (ops.dx * ops.dx);
    return 0.5 * kSpec.mass_per_length() * v.squaredNorm() +
           0.5 * kSpec.flexural_rigidity() * curv.squaredNorm();
  };
  const double e0 = energy(0);
  const double period = 2 * M_PI / 453.0;
  const double oscillations = cfg.t_end / period;
  const double drift = std::abs(energy(cfg.n_save) - e0) / e0;
  EXPECT_LT(drift / oscillations, 1e-3);
}

TEST(Integrate, DampedPeaksDecrease) {
  auto sys = constant_system(16, 1.0, 40.0, LoadModel{1000.0, 0.005});
  SolverConfig cfg;
  cfg.t_end = 0.09;
  cfg.n_save = 900;
  const auto traj = integrate(sys, cfg).trajectory;
  const int mid = 8;
  std::vector<double> peaks;
  for (int k = 1; k < cfg.n_save; ++k) {
    if (traj.times()[k] <= 0.005) continue;
    const double a = std::abs(traj.displacement(k - 1, mid));
    const double b = std::abs(traj.displacement(k, mid));
    const double c = std::abs(traj.displacement(k + 1, mid));
    if (b > a && b >= c) peaks.push_back(b);
  }
  ASSERT_GE(peaks.size(), 6u);
  for (std::size_t i = 1; i < peaks.size(); ++i) EXPECT_LT(peaks[i], peaks[i - 1]);
}

TEST(Tape, ReplayIsBitExact) {
  auto sys = default_system();
  const auto sol = integrate(sys, SolverConfig{}, true);
  ASSERT_TRUE(sol.tape.has_value());
  const auto again = replay(*sol.tape, sys);
  EXPECT_EQ(again.states(), sol.trajectory.states());
  EXPECT_EQ(again.times(), sol.trajectory.times());
}

TEST(Adjoint, RejectsStaleTape) {
  auto sys = default_system();
  const auto sol = integrate(sys, SolverConfig{}, true);
  auto other = constant_system(16, 1.0, 0.0, LoadModel{});
  std::vector<Cotangent> cot{{3, 10, 1.0}};
  EXPECT_THROW(adjoint_gradients(*sol.tape, other, cot), StaleTapeError);
}

TEST(Adjoint, ZeroCotangentsGiveZeroGradient) {
  auto sys = default_system();
  const auto sol = integrate(sys, SolverConfig{}, true);
  const auto g = adjoint_gradients(*sol.tape, sys, {});
  EXPECT_TRUE(g.modulus.isZero(0));
  EXPECT_TRUE(g.damping.isZero(0));
  EXPECT_EQ(g.modulus.size(), 18);
}

TEST(Adjoint, LinearInCotangents) {
  auto sys = default_system();
  const auto sol = integrate(sys, SolverConfig{}, true);
  std::vector<Cotangent> all{{2, 40, 0.0625}, {9, 100, -0.0625}, {15, 160, 0.0625}};
  const auto whole = adjoint_gradients(*sol.tape, sys, all);
  Vec sum_p = Vec::Zero(18), sum_c = Vec::Zero(16);
  for (const auto& c : all) {
    const auto part = adjoint_gradients(*sol.tape, sys, std::vector<Cotangent>{c});
    sum_p += part.modulus;
    sum_c += part.damping;
  }
  EXPECT_TRUE(whole.modulus.isApprox(sum_p, 1e-12));
  EXPECT_TRUE(whole.damping.isApprox(sum_c, 1e-12));
}

TEST(Adjoint, MatchesCentralDifferencesSingleSample) {
  // Oracle: central differences of an extended-precision reference solve
  // sharing only the step schedule with the library.
  const int n = 16;
  SpatialGrid grid(kSpec.length(), n);
  const auto ops = build_operators(grid);
  const auto truth = ground_truth_fields(kSpec, grid);
  SolverConfig cfg;
  BeamSystem sys(kSpec, ops, truth, LoadModel{});
  cfg.step = estimate_stable_step(sys).max_step;
  const int node = 6, save = 150;
  const std::vector<Cotangent> cot{{node, save, 1.0}};
  const auto sol = integrate(sys, cfg, true);
  const auto g = adjoint_gradients(*sol.tape, sys, cot);

  using Real = long double;
  std::vector<Real> p0(truth.modulus().data(), truth.modulus().data() + n + 2);
  std::vector<Real> c0(truth.damping().data(), truth.damping().data() + n);
  const auto& schedule = sol.tape->schedule();
  auto loss = [&](const std::vector<Real>& p, const std::vector<Real>& c) {
    return beamsi::testing::reference_displacements<Real>(kSpec, n, p, c, schedule)[save][node];
  };
  // Both routes agree on the forward value first.
  EXPECT_NEAR(static_cast<double>(loss(p0, c0)), sol.trajectory.displacement(save, node), 1e-13);
  for (int i = 0; i < n; ++i) {
    auto c = c0;
    const Real eps = 1e-6L * std::max(std::abs(c[i]), 1.0L);
    c[i] = c0[i] + eps;
    const Real up = loss(p0, c);
    c[i] = c0[i] - eps;
    const Real dn = loss(p0, c);
    const double fd = static_cast<double>((up - dn) / (2 * eps));
    EXPECT_NEAR(g.damping[i], fd, 1e-6 * std::abs(fd)) << "C[" << i << "]";
  }
  for (int i = 0; i < n + 2; ++i) {
    auto p = p0;
    const Real eps = 1e-6L * p[i];
    p[i] = p0[i] + eps;
    const Real up = loss(p, c0);
    p[i] = p0[i] - eps;
    const Real dn = loss(p, c0);
    const double fd = static_cast<double>((up - dn) / (2 * eps));
    EXPECT_NEAR(g.modulus[i], fd, 1e-6 * std::abs(fd)) << "P[" << i << "]";
  }
}

TEST(Adjoint, CubeRootStepExactnessOnSmallProblem) {
  const int n = 8;
  SpatialGrid grid(kSpec.length(), n);
  const auto ops = build_operators(grid);
  const auto truth = ground_truth_fields(kSpec, grid);
  SolverConfig cfg;
  cfg.n_save = 20;
  BeamSystem sys(kSpec, ops, truth, LoadModel{});
  cfg.step = estimate_stable_step(sys).max_step;
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> node(0, n - 1), save(1, 20);
  std::vector<Cotangent> cot;
  for (int i = 0; i < 12; ++i) cot.push_back({node(rng), save(rng), (i % 2 ? 1.0 : -1.0) / 12});
  const auto sol = integrate(sys, cfg, true);
  const auto g = adjoint_gradients(*sol.tape, sys, cot);
  auto loss = [&](const Vec& p, const Vec& c) {
    BeamSystem s(kSpec, ops, ParameterField(p, c), LoadModel{});
    return weighted_sum(integrate(s, cfg).trajectory, cot);
  };
  const double cbrt_eps = std::cbrt(std::numeric_limits<double>::epsilon());
  for (int i = 0; i < n + 2 + n; ++i) {
    Vec p = truth.modulus(), c = truth.damping();
    double& x = i < n + 2 ? p[i] : c[i - n - 2];
    const double eps = cbrt_eps * std::max(std::abs(x), 1.0);
    const double x0 = x;
    x = x0 + eps;
    const double up = loss(p, c);
    x = x0 - eps;
    const double dn = loss(p, c);
    const double fd = (up - dn) / (2 * eps);
    const double adj = i < n + 2 ? g.modulus[i] : g.damping[i - n - 2];
    EXPECT_LE(std::abs(adj - fd) / std::max(std::abs(fd), 1e-12), 1e-5) << "component " << i;
  }
}
