#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "beamsi/trainer.hpp"

using namespace beamsi;

namespace {

BeamProblem small_problem() {
  BeamProblem p;
  p.nodes = 8;
  p.solver.n_save = 20;
  return p.with_resolved_step(3.0);
}

NetConfig small_net() {
  NetConfig cfg;
  cfg.hidden_layers = 2;
  cfg.hidden_units = 8;
  cfg.embedding.dimension = 4;
  return cfg;
}

Trajectory default_truth() {
  BeamProblem p;
  p = p.with_resolved_step(3.0);
  return solve(p, p.truth_fields());
}

}  // namespace

TEST(DrawSamples, CountsAndDeterminism) {
  const auto truth = default_truth();
  EXPECT_EQ(draw_samples(truth, 1.0, 0).size(), 2560u);
  const auto a = draw_samples(truth, 0.2, 7), b = draw_samples(truth, 0.2, 7);
  EXPECT_EQ(a.size(), 512u);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a.hash(), draw_samples(truth, 0.2, 8).hash());
  std::set<std::pair<int, int>> seen;
  for (const auto& s : a.samples()) {
    EXPECT_TRUE(seen.insert({s.node, s.save}).second);
    EXPECT_GE(s.save, 1);
    EXPECT_LE(s.save, 160);
    EXPECT_EQ(s.value, truth.displacement(s.save, s.node));
  }
}

TEST(DrawSamples, RejectsEmptyOrInvalidRatio) {
  const auto truth = default_truth();
  EXPECT_THROW(draw_samples(truth, 1e-5, 0), DomainError);
  EXPECT_THROW(draw_samples(truth, 0.0, 0), DomainError);
  EXPECT_THROW(draw_samples(truth, 1.5, 0), DomainError);
}

TEST(SampleSet, RejectsDuplicatesAndOutOfRange) {
  EXPECT_THROW(SampleSet({{1, 1, 0.0}, {1, 1, 0.0}}, 4, 4, 0, 0.1), DomainError);
  EXPECT_THROW(SampleSet({{4, 1, 0.0}}, 4, 4, 0, 0.1), DomainError);
  EXPECT_THROW(SampleSet({{0, 0, 0.0}}, 4, 4, 0, 0.1), DomainError);
}

TEST(MaeSubgradient, TiesAndSigns) {
  EXPECT_EQ(mae_subgradient(1.0, 1.0), 0.0);
  EXPECT_EQ(mae_subgradient(1.0 + 1e-300, 1.0), 0.0);  // rounds to a tie
  EXPECT_EQ(mae_subgradient(std::nextafter(1.0, 2.0), 1.0), 1.0);
  EXPECT_EQ(mae_subgradient(std::nextafter(1.0, 0.0), 1.0), -1.0);
}

TEST(MaeLoss, ValuesAndCotangents) {
  const auto truth = default_truth();
  const auto samples = draw_samples(truth, 0.2, 1);
  std::vector<int> batch(16);
  std::iota(batch.begin(), batch.end(), 0);
  const auto zero = mae_loss(truth, samples, batch);
  EXPECT_EQ(zero.loss, 0.0);
  for (const auto& c : zero.cotangents) EXPECT_EQ(c.weight, 0.0);

  Mat shifted = truth.states();
  shifted.leftCols(16).array() += 1e-3;
  const auto lv = mae_loss(Trajectory(truth.times(), shifted), samples, batch);
  EXPECT_NEAR(lv.loss, 1e-3, 1e-15);
  ASSERT_EQ(lv.cotangents.size(), 16u);
  for (const auto& c : lv.cotangents) EXPECT_EQ(c.weight, 1.0 / 16);
  EXPECT_THROW(mae_loss(truth, samples, {}), DomainError);
}

TEST(EpochBatches, PartitionCoversEverySampleOnce) {
  std::mt19937_64 rng(5);
  const auto parts = epoch_batches(100, 16, rng);
  ASSERT_EQ(parts.size(), 7u);
  EXPECT_EQ(parts.back().size(), 4u);
  std::vector<int> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  std::sort(all.begin(), all.end());
  std::vector<int> expected(100);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(all, expected);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate(512));
  EXPECT_THROW(cfg.validate(8), ConfigError);
  cfg.epochs = 0;
  EXPECT_THROW(cfg.validate(512), ConfigError);
  LearningRateSchedule s;
  EXPECT_EQ(s.at(1), 0.003);
  EXPECT_EQ(s.at(10), 0.003);
  EXPECT_EQ(s.at(11), 0.0003);
  EXPECT_EQ(s.at(15), 0.0003);
  EXPECT_EQ(s.at(16), 0.00003);
  s.final_after = 0;
  EXPECT_EQ(s.at(16), 0.0003);
  cfg.epochs = 20;
  cfg.lr.final = 0.0;
  EXPECT_THROW(cfg.validate(512), ConfigError);
}

TEST(MinibatchGradient, EqualsSumOfSingleSampleGradients) {
  const auto p = small_problem();
  const auto truth = solve(p, p.truth_fields());
  const auto samples = draw_samples(truth, 0.5, 3);
  const auto model = MlpModel::initialize(small_net(), 9);
  const std::vector<int> batch{0, 3, 7, 12, 40, 55};
  const auto whole = minibatch_gradient(p, model, samples, batch);
  Vec sum = Vec::Zero(whole.gradient.size());
  for (int i : batch) {
    const std::vector<int> one{i};
    sum += minibatch_gradient(p, model, samples, one).gradient;
  }
  sum /= static_cast<double>(batch.size());
  EXPECT_LE((whole.gradient - sum).cwiseAbs().maxCoeff(),
            1e-12 * whole.gradient.cwiseAbs().maxCoeff());
}

TEST(Train, IdenticalSeedsGiveIdenticalHistories) {
  const auto p = small_problem();
  const auto truth_fields = p.truth_fields();
  const auto samples = draw_samples(solve(p, truth_fields), 0.5, 2);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 4;
  auto run = [&] {
    return train(p, samples, MlpModel::initialize(small_net(), 4), cfg, &truth_fields);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.history.size(), 3u);
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].mean_loss, b.history[i].mean_loss);
    EXPECT_EQ(a.history[i].frechet_modulus, b.history[i].frechet_modulus);
  }
  EXPECT_EQ(a.model.parameters(), b.model.parameters());
  EXPECT_EQ(a.optimizer.step(), 2 * 5);
}

TEST(Train, RejectsUnresolvedStepAndMismatchedGrid) {
  BeamProblem p;
  p.nodes = 8;
  p.solver.n_save = 20;
  const auto samples = draw_samples(solve(small_problem(), p.truth_fields()), 0.5, 2);
  EXPECT_THROW(train(p, samples, MlpModel::initialize(small_net(), 1), TrainConfig{}), ConfigError);
  auto q = small_problem();
  q.solver.n_save = 21;
  EXPECT_THROW(train(q, samples, MlpModel::initialize(small_net(), 1), TrainConfig{}), SizingError);
}

TEST(Train, PrefitAtTruthStaysAtTheMinimum) {
  const auto p = small_problem();
  const auto truth_fields = p.truth_fields();
  const auto samples = draw_samples(solve(p, truth_fields), 0.5, 6);
  // A richer embedding keeps the least-squares output weights small.
  NetConfig net;
  net.embedding.dimension = 16;
  auto model = MlpModel::initialize(net, 6);
  prefit_output_layers(model, p.grid(), truth_fields);
  const auto fit = forward_fields(model, p.grid()).fields;
  EXPECT_LE((fit.modulus() - truth_fields.modulus()).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LE((fit.damping() - truth_fields.damping()).cwiseAbs().maxCoeff(), 1e-9);

  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.lr = {1e-8, 1e-8, 10, 1e-8, 0};
  const auto res = train(p, samples, model, cfg);
  const double start = res.history.front().mean_loss;
  EXPECT_LT(start, 1e-8);
  EXPECT_LE(sample_loss(p, res.model, samples), 10 * std::max(start, 1e-8));
}

TEST(Train, ReducesLossOnSmallProblem) {
  const auto p = small_problem();
  const auto truth_fields = p.truth_fields();
  const auto samples = draw_samples(solve(p, truth_fields), 0.5, 2);
  NetConfig net = small_net();
  TrainConfig cfg;
  cfg.epochs = 6;
  cfg.lr = {0.003, 0.0003, 4, 0.0, 0};
  auto init = MlpModel::initialize(net, 2);
  const auto res = train(p, samples, init, cfg);
  EXPECT_LT(sample_loss(p, res.model, samples), 0.5 * res.history.front().mean_loss);
}
