/*
 * Copyright 2026 The cocasage Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cocasage/model.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "cocasage/error.hpp"
#include "gtest/gtest.h"
#include "test_support.hpp"

namespace cocasage {
namespace {

// Hand-built depth-2 tree: root with the given hop-1 children and, for each
// of them, the given hop-2 children.
SampleTree make_tree(NodeId root, const std::vector<NodeId>& hop1,
                     const std::vector<std::vector<NodeId>>& hop2) {
  SampleTree t{root, {}};
  SampleHop a{hop1, {0, hop1.size()}};
  SampleHop b;
  b.offsets.push_back(0);
  for (const auto& kids : hop2) {
    b.nodes.insert(b.nodes.end(), kids.begin(), kids.end());
    b.offsets.push_back(b.nodes.size());
  }
  t.hops = {a, b};
  return t;
}

// Dense reference forward pass for one tree.
Vector oracle_forward(const Graph& g, const ModelParams& p, const SampleTree& t) {
  const auto x = [&](NodeId v) -> Vector { return g.features().row(v).transpose(); };
  const auto h1 = [&](NodeId v, std::span<const NodeId> kids) {
    Vector m = x(v);
    for (NodeId u : kids) m += x(u);
    m /= static_cast<double>(kids.size() + 1);
    return Vector((p.w1 * m).cwiseMax(0.0));
  };
  Vector agg = h1(t.root, t.hops[0].children(0));
  for (std::size_t j = 0; j < t.hops[0].nodes.size(); ++j) {
    agg += h1(t.hops[0].nodes[j], t.hops[1].children(j));
  }
  agg /= static_cast<double>(t.hops[0].nodes.size() + 1);
  const Vector z = p.w2 * agg;
  Vector e = z.array().exp();
  return e / e.sum();
}

struct Fixture {
  Graph graph;
  std::vector<SampleTree> trees;
  std::vector<int> labels;
};

Fixture small_fixture(std::uint64_t seed) {
  FeatureMatrix x = testing::random_features(6, 4, seed);
  x(2, 1) = 0.0;  // exercise the sparse path
  const Graph g = testing::make_graph(
      6, {{0, 1}, {0, 2}, {1, 3}, {2, 4}, {2, 5}, {3, 5}}, x, {0, 1, 2, 0, 1, 2}, 3);
  std::vector<SampleTree> trees = {make_tree(0, {1, 2}, {{3}, {4, 5}}),
                                   make_tree(5, {2, 3}, {{0, 4}, {}}),
                                   make_tree(4, {2}, {{0}})};
  return {g, trees, {0, 2, 1}};
}

TEST(MeanAggregateTest, IncludesSelf) {
  const Vector self = Vector::Constant(2, 3.0);
  const std::vector<Vector> nb = {Vector::Constant(2, 0.0), Vector::Constant(2, 6.0)};
  EXPECT_TRUE(mean_aggregate(self, nb).isApprox(Vector::Constant(2, 3.0)));
  EXPECT_TRUE(mean_aggregate(self, {}).isApprox(self));
  const std::vector<Vector> bad = {Vector::Zero(3)};
  EXPECT_THROW(mean_aggregate(self, bad), ShapeError);
}

TEST(SoftmaxTest, StableForLargeLogits) {
  Vector z(3);
  z << 1000.0, 1000.0, -1000.0;
  const Vector p = softmax(z);
  EXPECT_TRUE(p.allFinite());
  EXPECT_NEAR(p[0], 0.5, 1e-15);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
}

TEST(LossTest, KnownValue) {
  Matrix probs(2, 2);
  probs << 0.7, 0.3, 0.2, 0.8;
  ModelParams p;
  p.w1 = Matrix::Ones(1, 1);
  p.w2 = Matrix::Constant(1, 1, 2.0);
  p.l2_lambda = 0.0;
  const std::vector<int> labels = {0, 1};
  EXPECT_NEAR(loss(probs, labels, p), -(std::log(0.7) + std::log(0.8)), 1e-12);
  EXPECT_NEAR(loss(probs, labels, p), 0.579818495, 1e-9);
  p.l2_lambda = 0.1;
  EXPECT_NEAR(loss(probs, labels, p), 0.579818495 + 0.05 * 5.0, 1e-9);
}

TEST(LossTest, ZeroProbabilityIsClamped) {
  Matrix probs(1, 2);
  probs << 1.0, 0.0;
  ModelParams p;
  p.w1 = Matrix::Zero(1, 1);
  p.w2 = Matrix::Zero(1, 1);
  EXPECT_NEAR(loss(probs, std::vector<int>{1}, p), -std::log(1e-15), 1e-9);
  EXPECT_THROW(loss(probs, std::vector<int>{2}, p), ParameterError);
  EXPECT_THROW(loss(probs, std::vector<int>{0, 1}, p), ShapeError);
}

TEST(ForwardTest, MatchesDenseReference) {
  const auto f = small_fixture(1);
  ModelConfig config;
  config.hidden_dim = 5;
  const auto params = ModelParams::initialize(4, 3, config, 2);
  const Matrix probs = forward(f.graph, params, f.trees);
  ASSERT_EQ(probs.rows(), 3);
  for (std::size_t r = 0; r < f.trees.size(); ++r) {
    const Vector expected = oracle_forward(f.graph, params, f.trees[r]);
    EXPECT_TRUE(probs.row(static_cast<Eigen::Index>(r)).transpose().isApprox(expected, 1e-12));
    EXPECT_NEAR(probs.row(static_cast<Eigen::Index>(r)).sum(), 1.0, 1e-12);
  }
}

TEST(ForwardTest, RejectsBadTreesAndShapes) {
  const auto f = small_fixture(1);
  ModelConfig config;
  config.hidden_dim = 5;
  auto params = ModelParams::initialize(4, 3, config, 2);
  SampleTree shallow = f.trees[0];
  shallow.hops.pop_back();
  EXPECT_THROW(forward(f.graph, params, std::vector<SampleTree>{shallow}), ShapeError);
  const auto wrong = ModelParams::initialize(3, 3, config, 2);
  EXPECT_THROW(forward(f.graph, wrong, f.trees), ShapeError);
  params.w2(0, 0) = NAN;
  try {
    forward(f.graph, params, f.trees);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("root 0"), std::string::npos) << e.what();
  }
}

TEST(BackwardTest, MatchesFiniteDifferences) {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const auto f = small_fixture(seed);
    ModelConfig config;
    config.hidden_dim = 5;
    config.l2_lambda = 0.01;
    const auto params = ModelParams::initialize(4, 3, config, seed);
    const Gradients g = backward(f.graph, params, f.trees, f.labels);
    const auto objective = [&](const ModelParams& p) {
      return loss(forward(f.graph, p, f.trees), f.labels, p);
    };
    EXPECT_NEAR(g.loss, objective(params), 1e-12);
    const double step = 1e-4;
    const auto check = [&](Matrix ModelParams::*member, const Matrix& grad) {
      for (Eigen::Index i = 0; i < grad.size(); ++i) {
        ModelParams plus = params, minus = params;
        (plus.*member).data()[i] += step;
        (minus.*member).data()[i] -= step;
        const double numeric = (objective(plus) - objective(minus)) / (2.0 * step);
        const double analytic = grad.data()[i];
        EXPECT_LE(std::abs(numeric - analytic),
                  1e-4 * std::max({1.0, std::abs(numeric), std::abs(analytic)}))
            << "seed " << seed << " entry " << i;
      }
    };
    check(&ModelParams::w1, g.w1);
    check(&ModelParams::w2, g.w2);
  }
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ModelParams p;
  p.w1 = Matrix::Zero(1, 2);
  p.w2 = Matrix::Zero(1, 1);
  p.adam_w1 = {Matrix::Zero(1, 2), Matrix::Zero(1, 2)};
  p.adam_w2 = {Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
  p.learning_rate = 0.01;
  Gradients g{Matrix(1, 2), Matrix::Zero(1, 1), 0.0};
  g.w1 << 2.0, -0.5;
  adam_step(p, g);
  EXPECT_EQ(p.step, 1u);
  EXPECT_NEAR(p.w1(0, 0), -0.01 * 2.0 / (2.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p.w1(0, 1), 0.01 * 0.5 / (0.5 + 1e-8), 1e-15);
  EXPECT_EQ(p.w2(0, 0), 0.0);
  // Second step with the same gradient: m_hat = g, v_hat = g^2 again.
  adam_step(p, g);
  EXPECT_NEAR(p.w1(0, 0), -0.02 * 2.0 / (2.0 + 1e-8), 1e-14);
  g.w2 = Matrix::Zero(2, 2);
  EXPECT_THROW(adam_step(p, g), ParameterError);
}

TEST(InitTest, GlorotBoundsAndSeeding) {
  ModelConfig config;
  const auto a = ModelParams::initialize(1433, 7, config, 9);
  const double limit1 = std::sqrt(6.0 / (128.0 + 1433.0));
  EXPECT_LE(a.w1.cwiseAbs().maxCoeff(), limit1);
  EXPECT_LE(a.w2.cwiseAbs().maxCoeff(), std::sqrt(6.0 / 135.0));
  EXPECT_NEAR(a.w1.mean(), 0.0, 0.01 * limit1);
  EXPECT_EQ(a.step, 0u);
  EXPECT_TRUE(a == ModelParams::initialize(1433, 7, config, 9));
  EXPECT_FALSE(a == ModelParams::initialize(1433, 7, config, 10));
}

TEST(InitTest, PreActivationScaleIsOrderOne) {
  ModelConfig config;
  const auto p = ModelParams::initialize(300, 4, config, 1);
  const FeatureMatrix x = testing::random_features(200, 300, 2);
  const Matrix pre = p.w1 * x.transpose();
  const double mean = pre.mean();
  const double std = std::sqrt((pre.array() - mean).square().sum() / (pre.size() - 1));
  EXPECT_GE(std, 0.5);
  EXPECT_LE(std, 2.0);
}

TEST(PredictTest, TiesGoToLowestClass) {
  Matrix probs(3, 3);
  probs << 0.2, 0.4, 0.4, 0.5, 0.25, 0.25, 0.1, 0.1, 0.8;
  EXPECT_EQ(predict_classes(probs), (std::vector<int>{1, 0, 2}));
}

TEST(TrainTest, FixedBatchLossDecreases) {
  const auto f = small_fixture(7);
  ModelConfig config;
  config.hidden_dim = 8;
  auto params = ModelParams::initialize(4, 3, config, 1);
  std::vector<double> losses;
  for (int step = 0; step < 6; ++step) {
    const Gradients g = backward(f.graph, params, f.trees, f.labels);
    losses.push_back(g.loss);
    adam_step(params, g);
  }
  int decreasing = 0;
  for (std::size_t i = 1; i < losses.size(); ++i) decreasing += losses[i] <= losses[i - 1];
  EXPECT_GE(decreasing, 4);
}

TEST(TrainTest, SeparatesTwoBlockSbm) {
  const Graph g = generate_sbm({{100, 100}, 0.1, 0.01, 8, 2.0}, 4);
  const Split split = make_per_class_split(g, 20, 60, 100, 1);
  ModelConfig config;
  config.hidden_dim = 32;
  config.max_epochs = 30;
  SamplerConfig sampler;
  sampler.fanouts = {5, 5};
  const auto result = train(g, split, sampler, config, 3);
  EXPECT_LE(result.history.size(), 30u);
  EXPECT_GE(result.best_val_accuracy, 0.95);
  EXPECT_GE(evaluate(g, result.params, split.test, sampler, 8), 0.9);
}

TEST(TrainTest, DeterministicAndEarlyStopping) {
  const Graph g = generate_sbm({{40, 40}, 0.15, 0.02, 4, 3.0}, 5);
  const Split split = make_per_class_split(g, 10, 30, 30, 2);
  ModelConfig config;
  config.hidden_dim = 16;
  config.max_epochs = 200;
  config.patience = 5;
  SamplerConfig sampler;
  sampler.kind = SamplerKind::kCoca;
  sampler.fanouts = {4, 4};
  const auto a = train(g, split, sampler, config, 12);
  const auto b = train(g, split, sampler, config, 12);
  EXPECT_TRUE(a.params == b.params);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t e = 0; e < a.history.size(); ++e) {
    EXPECT_EQ(a.history[e].loss, b.history[e].loss);
  }
  EXPECT_LT(a.history.size(), 200u);
  EXPECT_EQ(a.history.size(), a.best_epoch + config.patience + 1);
  EXPECT_EQ(a.history[a.best_epoch].val_accuracy, a.best_val_accuracy);
}

TEST(TrainTest, RejectsBadConfig) {
  const Graph g = generate_sbm({{10, 10}, 0.3, 0.05, 2, 2.0}, 5);
  const Split split = make_split(g, 5, 5, 5, 0);
  SamplerConfig sampler;
  sampler.fanouts = {3};
  EXPECT_THROW(train(g, split, sampler, ModelConfig{}, 0), ParameterError);
  sampler.fanouts = {3, 3};
  ModelConfig config;
  config.batch_size = 0;
  EXPECT_THROW(train(g, split, sampler, config, 0), ParameterError);
  EXPECT_THROW(train(g, Split{}, sampler, ModelConfig{}, 0), ParameterError);
}

TEST(MetricsCsvTest, HeaderAndRows) {
  const std::vector<EpochMetrics> h = {{0, 1.5, 0.25, 0.1}, {1, 1.0, 0.5, 0.1}};
  EXPECT_EQ(metrics_csv(h), "epoch,loss,val_acc\n0,1.5,0.25\n1,1,0.5\n");
}

TEST(CheckpointTest, RoundTripIsExact) {
  const auto f = small_fixture(2);
  ModelConfig config;
  config.hidden_dim = 6;
  auto params = ModelParams::initialize(4, 3, config, 4);
  adam_step(params, backward(f.graph, params, f.trees, f.labels));
  const std::string text = checkpoint_to_json(params, R"({"dataset":"sbm"})");
  EXPECT_TRUE(checkpoint_from_json(text) == params);
  EXPECT_NE(text.find("\"dataset\":\"sbm\""), std::string::npos);
}

TEST(CheckpointTest, RejectsMalformedInput) {
  EXPECT_THROW(checkpoint_from_json("{}"), FormatError);
  EXPECT_THROW(checkpoint_from_json("not json"), FormatError);
  EXPECT_THROW(checkpoint_from_json(R"({"format":"other","version":1})"), FormatError);
}

}  // namespace
}  // namespace cocasage
