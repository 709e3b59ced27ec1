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

#ifndef COCASAGE_MODEL_HPP_
#define COCASAGE_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cocasage/graph.hpp"
#include "cocasage/sampling.hpp"

namespace cocasage {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;
inline constexpr double kLogClamp = 1e-15;

struct ModelConfig {
  std::size_t hidden_dim = 128;
  double l2_lambda = 5e-4;
  double learning_rate = 0.01;
  std::size_t batch_size = 50;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;  // epochs without validation improvement

  void validate() const;
};

struct AdamMoments {
  Matrix first;
  Matrix second;

  bool operator==(const AdamMoments& other) const;
};

// Two-layer mean-aggregator weights plus Adam state.
struct ModelParams {
  Matrix w1;  // hidden_dim x feature_dim
  Matrix w2;  // num_classes x hidden_dim
  AdamMoments adam_w1;
  AdamMoments adam_w2;
  std::uint64_t step = 0;
  double l2_lambda = 5e-4;
  double learning_rate = 0.01;

  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero moments.
  static ModelParams initialize(std::size_t feature_dim, std::size_t num_classes,
                                const ModelConfig& config, std::uint64_t seed);

  // Exact equality of shapes, values and optimizer state.
  bool operator==(const ModelParams& other) const;
};

struct Gradients {
  Matrix w1;
  Matrix w2;
  double loss = 0.0;  // objective value at the evaluated parameters
};

// Element-wise mean of {self} and the neighbor vectors.
Vector mean_aggregate(const Vector& self, std::span<const Vector> neighbors);

// Max-subtracted softmax.
Vector softmax(const Vector& logits);

// Row r holds the class probabilities of batch[r].root. Each tree must
// have depth 2:
//   h1(v) = relu(W1 mean(x_v, x_children(v)))   for v = root and hop-1 nodes
//   z     = softmax(W2 mean(h1(root), h1(hop-1 nodes)))
Matrix forward(const Graph& graph, const ModelParams& params,
               std::span<const SampleTree> batch);

// Summed cross-entropy over rows plus l2_lambda (|W1|^2 + |W2|^2) / 2.
double loss(const Matrix& probabilities, std::span<const int> labels,
            const ModelParams& params);

// Gradient of `loss` for the batch; sampled sets are treated as constants.
Gradients backward(const Graph& graph, const ModelParams& params,
                   std::span<const SampleTree> batch, std::span<const int> labels);

void adam_step(ModelParams& params, const Gradients& gradients);

// Argmax class per row; ties go to the lowest class id.
std::vector<int> predict_classes(const Matrix& probabilities);

// Fraction of `nodes` whose argmax prediction equals their label. The
// sample trees are drawn with `seed`.
double evaluate(const Graph& graph, const ModelParams& params,
                std::span<const NodeId> nodes, NeighborSampler& sampler,
                std::uint64_t seed);
double evaluate(const Graph& graph, const ModelParams& params,
                std::span<const NodeId> nodes, const SamplerConfig& sampler_config,
                std::uint64_t seed);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;          // mean training objective per root
  double val_accuracy = 0.0;
  double train_seconds = 0.0; // wall time of the optimization steps
};

struct TrainResult {
  ModelParams params;  // best-validation parameters
  std::vector<EpochMetrics> history;
  std::size_t best_epoch = 0;
  double best_val_accuracy = 0.0;
};

// Minibatch training on `train_view` with early stopping on validation
// accuracy measured on `eval_view`. Sample trees are redrawn every epoch;
// validation uses one fixed sampling seed.
TrainResult train(const Graph& train_view, const Graph& eval_view, const Split& split,
                  const SamplerConfig& sampler_config, const ModelConfig& model_config,
                  std::uint64_t seed);
TrainResult train(const Graph& graph, const Split& split,
                  const SamplerConfig& sampler_config, const ModelConfig& model_config,
                  std::uint64_t seed);

// "epoch,loss,val_acc" header plus one row per epoch.
std::string metrics_csv(std::span<const EpochMetrics> history);

// Versioned JSON checkpoint: shapes, row-major data, Adam state and the
// caller's config document (must itself be JSON, or empty).
std::string checkpoint_to_json(const ModelParams& params, std::string_view config_json = {});
ModelParams checkpoint_from_json(std::string_view text);

}  // namespace cocasage

#endif  // COCASAGE_MODEL_HPP_
