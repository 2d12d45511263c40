#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "beamsi/ode_solver.hpp"
#include "beamsi/param_net.hpp"

using namespace beamsi;

namespace {

const BeamSpec kSpec = BeamSpec::aluminum_strip();

double linear_functional(const ParameterField& f, const Vec& a, const Vec& b) {
  return a.dot(f.modulus()) + b.dot(f.damping());
}

}  // namespace

TEST(Embed, EndpointsAndRange) {
  EmbeddingConfig cfg;
  cfg.dimension = 16;
  const Vec e0 = embed(0.0, 0.4, cfg);
  ASSERT_EQ(e0.size(), 16);
  for (int k = 0; k < 8; ++k) {
    EXPECT_EQ(e0[2 * k], 0.0);
    EXPECT_EQ(e0[2 * k + 1], 1.0);
  }
  const Vec eL = embed(0.4, 0.4, cfg);
  EXPECT_NEAR(eL[0], 0.0, 1e-15);
  EXPECT_NEAR(eL[1], 1.0, 1e-15);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 0.4);
  for (int i = 0; i < 1000; ++i) {
    const Vec e = embed(U(rng), 0.4, cfg);
    EXPECT_LE(e.cwiseAbs().maxCoeff(), 1.0);
  }
  EXPECT_THROW(embed(-1e-9, 0.4, cfg), DomainError);
  EXPECT_THROW(embed(0.41, 0.4, cfg), DomainError);
}

TEST(Embed, DyadicFrequencies) {
  EmbeddingConfig cfg{8, 2.0};
  const Vec e = embed(0.1, 0.4, cfg);  // x/L = 1/4
  EXPECT_NEAR(e[0], 1.0, 1e-15);        // sin(pi/2)
  EXPECT_NEAR(e[2], 0.0, 1e-15);        // sin(pi)
  EXPECT_NEAR(e[5], 1.0, 1e-15);        // cos(2 pi)
}

TEST(MlpModel, ZeroWeightsGiveMidpointModulusAndZeroDamping) {
  const auto model = MlpModel::zeros(NetConfig{});
  SpatialGrid grid(0.4, 16);
  const auto out = forward_fields(model, grid);
  for (int i = 0; i < 18; ++i) EXPECT_DOUBLE_EQ(out.fields.modulus()[i], 1.75);
  EXPECT_TRUE(out.fields.damping().isZero(0));
}

TEST(MlpModel, LayerDimsChain) {
  const auto model = MlpModel::initialize(NetConfig{}, 1);
  EXPECT_EQ(model.layer_dims(1), (std::vector<int>{2, 32, 32, 32, 32, 32, 1}));
  EXPECT_EQ(model.layer_dims(2), (std::vector<int>{2, 32, 32, 32, 32, 32, 1}));
  EXPECT_TRUE(model.trunk().empty());
  NetConfig shared;
  shared.shared_trunk = true;
  shared.hidden_layers = 3;
  const auto s = MlpModel::initialize(shared, 1);
  EXPECT_EQ(s.layer_dims(0), (std::vector<int>{2, 32, 32, 32}));
  EXPECT_EQ(s.layer_dims(1), (std::vector<int>{32, 1}));
}

TEST(MlpModel, ModulusStaysInRangeEvenWhenSaturated) {
  SpatialGrid grid(0.4, 16);
  for (double scale : {1.0, 50.0, 1e6}) {
    auto model = MlpModel::initialize(NetConfig{}, 42);
    model.set_parameters(model.parameters() * scale);
    const auto out = forward_fields(model, grid);
    EXPECT_GE(out.fields.modulus().minCoeff(), 0.5);
    EXPECT_LE(out.fields.modulus().maxCoeff(), 3.0);
    if (scale == 1.0) {
      EXPECT_GT(out.fields.modulus().minCoeff(), 0.5);
      EXPECT_LT(out.fields.modulus().maxCoeff(), 3.0);
    }
  }
}

TEST(MlpModel, DeterministicPerSeed) {
  SpatialGrid grid(0.4, 16);
  const auto a = MlpModel::initialize(NetConfig{}, 99);
  const auto b = MlpModel::initialize(NetConfig{}, 99);
  const auto c = MlpModel::initialize(NetConfig{}, 100);
  EXPECT_EQ(a.parameters(), b.parameters());
  EXPECT_NE(a.parameters(), c.parameters());
  EXPECT_EQ(forward_fields(a, grid).fields.modulus(), forward_fields(b, grid).fields.modulus());
}

TEST(MlpModel, ParameterRoundTrip) {
  auto model = MlpModel::initialize(NetConfig{}, 3);
  const Vec p = model.parameters();
  auto other = MlpModel::zeros(NetConfig{});
  other.set_parameters(p);
  EXPECT_EQ(other.parameters(), p);
  EXPECT_EQ(other.fingerprint(), model.fingerprint());
  EXPECT_THROW(other.set_parameters(Vec::Zero(3)), SizingError);
}

TEST(BackwardFields, ZeroUpstreamGivesZeroGradient) {
  const auto model = MlpModel::initialize(NetConfig{}, 8);
  SpatialGrid grid(0.4, 16);
  const auto fwd = forward_fields(model, grid);
  const Vec g = backward_fields(model, fwd.tape, Vec::Zero(18), Vec::Zero(16));
  EXPECT_TRUE(g.isZero(0));
}

TEST(BackwardFields, HeadsAreIndependent) {
  const auto model = MlpModel::initialize(NetConfig{}, 8);
  SpatialGrid grid(0.4, 16);
  const auto fwd = forward_fields(model, grid);
  const Vec gp = backward_fields(model, fwd.tape, Vec::Ones(18), Vec::Zero(16));
  const Vec gc = backward_fields(model, fwd.tape, Vec::Zero(18), Vec::Ones(16));
  const auto mo = model.modulus_offset(), co = model.damping_offset();
  EXPECT_TRUE(gp.segment(co, gp.size() - co).isZero(0));
  EXPECT_FALSE(gp.segment(mo, co - mo).isZero(0));
  EXPECT_TRUE(gc.segment(mo, co - mo).isZero(0));
  EXPECT_FALSE(gc.segment(co, gc.size() - co).isZero(0));
}

TEST(BackwardFields, StaleTapeRejected) {
  auto model = MlpModel::initialize(NetConfig{}, 8);
  SpatialGrid grid(0.4, 16);
  const auto fwd = forward_fields(model, grid);
  AdamWState st(model.parameter_count(), {});
  adamw_step(model, Vec::Ones(model.parameter_count()), st, 0.01);
  EXPECT_THROW(backward_fields(model, fwd.tape, Vec::Ones(18), Vec::Ones(16)), StaleTapeError);
}

class BackwardFieldsFd : public ::testing::TestWithParam<bool> {};

TEST_P(BackwardFieldsFd, MatchesCentralDifferences) {
  NetConfig cfg;
  cfg.hidden_layers = 3;
  cfg.hidden_units = 12;
  cfg.shared_trunk = GetParam();
  const auto model = MlpModel::initialize(cfg, 21);
  SpatialGrid grid(0.4, 10);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g(0.0, 1.0);
  Vec a(12), b(10);
  for (auto& x : a) x = g(rng);
  for (auto& x : b) x = g(rng);

  const auto fwd = forward_fields(model, grid);
  const Vec grad = backward_fields(model, fwd.tape, a, b);
  const Vec p0 = model.parameters();
  auto probe = model;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    const double eps = 1e-6;
    Vec p = p0;
    p[i] += eps;
    probe.set_parameters(p);
    const double up = linear_functional(forward_fields(probe, grid).fields, a, b);
    p[i] -= 2 * eps;
    probe.set_parameters(p);
    const double dn = linear_functional(forward_fields(probe, grid).fields, a, b);
    const double fd = (up - dn) / (2 * eps);
    EXPECT_NEAR(grad[i], fd, 1e-5 * std::max(std::abs(fd), 1e-3)) << "parameter " << i;
  }
}

INSTANTIATE_TEST_SUITE_P(Trunk, BackwardFieldsFd, ::testing::Values(false, true));

TEST(BackwardFields, ComposedThroughSolverMatchesDifferences) {
  // n = 8, 20 save points: weights -> fields -> RK4 -> sampled sum.
  NetConfig cfg;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 6;
  cfg.embedding.dimension = 4;
  const auto model = MlpModel::initialize(cfg, 2024);
  const int n = 8;
  SpatialGrid grid(kSpec.length(), n);
  const auto ops = build_operators(grid);
  SolverConfig solver;
  solver.n_save = 20;
  solver.step = 6e-6;
  const std::vector<Cotangent> cot{{1, 5, 0.5}, {4, 12, -0.25}, {6, 20, 0.25}, {3, 17, 1.0}};
  auto loss = [&](const MlpModel& m) {
    BeamSystem sys(kSpec, ops, forward_fields(m, grid).fields, LoadModel{});
    const auto traj = integrate(sys, solver).trajectory;
    double s = 0;
    for (const auto& c : cot) s += c.weight * traj.displacement(c.save, c.node);
    return s;
  };
  const auto fwd = forward_fields(model, grid);
  BeamSystem sys(kSpec, ops, fwd.fields, LoadModel{});
  const auto sol = integrate(sys, solver, true);
  const auto pg = adjoint_gradients(*sol.tape, sys, cot);
  const Vec grad = backward_fields(model, fwd.tape, pg.modulus, pg.damping);

  const Vec p0 = model.parameters();
  auto probe = model;
  const double eps = std::cbrt(std::numeric_limits<double>::epsilon());
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p0.size(); ++i) {
    Vec p = p0;
    p[i] += eps;
    probe.set_parameters(p);
    const double up = loss(probe);
    p[i] -= 2 * eps;
    probe.set_parameters(p);
    const double dn = loss(probe);
    const double fd = (up - dn) / (2 * eps);
    const double rel = std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-9);
    worst = std::max(worst, rel);
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(AdamW, ZeroGradientNoDecayLeavesParameters) {
  Vec p(3);
  p << 0.5, -1.0, 2.0;
  const Vec before = p;
  AdamWState st(3, AdamWConfig{0.9, 0.999, 1e-8, 0.0});
  adamw_step(p, Vec::Zero(3), st, 0.01);
  EXPECT_EQ(p, before);
  EXPECT_EQ(st.step(), 1);
}

TEST(AdamW, DecoupledDecayShrinks) {
  Vec p(2);
  p << 0.5, -4.0;
  const Vec before = p;
  AdamWState st(2, AdamWConfig{0.9, 0.999, 1e-8, 0.1});
  adamw_step(p, Vec::Zero(2), st, 0.01);
  EXPECT_TRUE(p.isApprox(before * (1 - 0.01 * 0.1), 1e-15));
}

TEST(AdamW, FirstStepMovesByLearningRate) {
  // m1 = (1-b1) g, v1 = (1-b2) g^2; bias correction gives g/|g|.
  for (double g : {3.0, -0.02}) {
    Vec p = Vec::Constant(1, 1.0);
    AdamWState st(1, AdamWConfig{0.9, 0.999, 1e-8, 0.0});
    adamw_step(p, Vec::Constant(1, g), st, 0.01);
    const double expected = 1.0 - 0.01 * std::abs(g) / (std::abs(g) + 1e-8) * (g > 0 ? 1 : -1);
    EXPECT_NEAR(p[0], expected, 1e-15);
  }
}

TEST(AdamW, RefusesNonFiniteGradient) {
  Vec p = Vec::Ones(2);
  AdamWState st(2, {});
  Vec g(2);
  g << 1.0, std::nan("");
  EXPECT_THROW(adamw_step(p, g, st, 0.01), NumericalError);
  EXPECT_EQ(st.step(), 0);
  EXPECT_EQ(p, Vec(Vec::Ones(2)));
}
