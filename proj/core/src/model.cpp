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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cocasage/error.hpp"
#include "cocasage/random.hpp"
#include <nlohmann/json.hpp>

namespace cocasage {

void ModelConfig::validate() const {
  if (hidden_dim == 0) throw ParameterError("hidden_dim must be >= 1");
  if (l2_lambda < 0.0) throw ParameterError("l2_lambda must be >= 0");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be > 0");
  if (batch_size == 0) throw ParameterError("batch_size must be >= 1");
}

ModelParams ModelParams::initialize(std::size_t feature_dim, std::size_t num_classes,
                                    const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  if (feature_dim == 0 || num_classes == 0) {
    throw ParameterError("feature_dim and num_classes must be >= 1");
  }
  Rng rng(derive_seed(seed, {0x696e6974ULL}));
  const auto glorot = [&](std::size_t rows, std::size_t cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
      }
    }
    return m;
  };
  ModelParams p;
  p.w1 = glorot(config.hidden_dim, feature_dim);
  p.w2 = glorot(num_classes, config.hidden_dim);
  p.adam_w1 = {Matrix::Zero(p.w1.rows(), p.w1.cols()), Matrix::Zero(p.w1.rows(), p.w1.cols())};
  p.adam_w2 = {Matrix::Zero(p.w2.rows(), p.w2.cols()), Matrix::Zero(p.w2.rows(), p.w2.cols())};
  p.l2_lambda = config.l2_lambda;
  p.learning_rate = config.learning_rate;
  return p;
}

namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

bool AdamMoments::operator==(const AdamMoments& other) const {
  return same_matrix(first, other.first) && same_matrix(second, other.second);
}

bool ModelParams::operator==(const ModelParams& other) const {
  return same_matrix(w1, other.w1) && same_matrix(w2, other.w2) && adam_w1 == other.adam_w1 &&
         adam_w2 == other.adam_w2 && step == other.step && l2_lambda == other.l2_lambda &&
         learning_rate == other.learning_rate;
}

Vector mean_aggregate(const Vector& self, std::span<const Vector> neighbors) {
  Vector sum = self;
  for (const auto& h : neighbors) {
    if (h.size() != self.size()) {
      throw ShapeError("mean_aggregate: dimension " + std::to_string(h.size()) +
                       " != " + std::to_string(self.size()));
    }
    sum += h;
  }
  return sum / static_cast<double>(neighbors.size() + 1);
}

namespace {

// Mean of feature rows, kept with its nonzero pattern so that products
// with W1 only touch the columns that matter (citation features are
// sparse bag-of-words vectors).
struct SparseMean {
  std::vector<Eigen::Index> index;
  std::vector<double> value;
};

SparseMean feature_mean(const FeatureMatrix& x, NodeId self,
                        std::span<const NodeId> children, Vector& scratch) {
  scratch = x.row(self).transpose();
  for (NodeId u : children) scratch += x.row(u).transpose();
  scratch /= static_cast<double>(children.size() + 1);
  SparseMean out;
  for (Eigen::Index j = 0; j < scratch.size(); ++j) {
    if (scratch[j] != 0.0) {
      out.index.push_back(j);
      out.value.push_back(scratch[j]);
    }
  }
  return out;
}

// Intermediate values of one root's forward pass.
struct RootPass {
  std::vector<SparseMean> layer1_inputs;  // [0] = root, then hop-1 nodes
  std::vector<Vector> pre_activations;
  Vector layer2_input;
  Vector probabilities;
};

RootPass forward_root(const Graph& graph, const ModelParams& params,
                      const SampleTree& tree) {
  if (tree.hops.size() != 2) {
    throw ShapeError("forward requires sample trees of depth 2");
  }
  if (static_cast<std::size_t>(params.w1.cols()) != graph.feature_dim() ||
      params.w2.cols() != params.w1.rows() ||
      params.w2.rows() != graph.num_classes()) {
    throw ShapeError("parameter shapes do not match the graph");
  }
  const auto& x = graph.features();
  const auto& hop1 = tree.hops[0];
  const auto& hop2 = tree.hops[1];
  const std::size_t width = hop1.nodes.size() + 1;

  RootPass pass;
  pass.layer1_inputs.reserve(width);
  pass.pre_activations.reserve(width);
  Vector scratch;
  pass.layer2_input = Vector::Zero(params.w1.rows());
  for (std::size_t p = 0; p < width; ++p) {
    const NodeId node = p == 0 ? tree.root : hop1.nodes[p - 1];
    const auto children = p == 0 ? hop1.children(0) : hop2.children(p - 1);
    pass.layer1_inputs.push_back(feature_mean(x, node, children, scratch));
    const auto& in = pass.layer1_inputs.back();
    Vector pre = Vector::Zero(params.w1.rows());
    for (std::size_t k = 0; k < in.index.size(); ++k) {
      pre.noalias() += in.value[k] * params.w1.col(in.index[k]);
    }
    pass.layer2_input += pre.cwiseMax(0.0);
    pass.pre_activations.push_back(std::move(pre));
  }
  pass.layer2_input /= static_cast<double>(width);

  const Vector logits = params.w2 * pass.layer2_input;
  if (!logits.allFinite()) {
    throw NumericError("non-finite logits for root " + std::to_string(tree.root));
  }
  pass.probabilities = softmax(logits);
  return pass;
}

void check_labels(std::span<const int> labels, Eigen::Index num_classes) {
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw ParameterError("label " + std::to_string(y) + " outside [0, " +
                           std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace

Vector softmax(const Vector& logits) {
  const Vector shifted = (logits.array() - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

Matrix forward(const Graph& graph, const ModelParams& params,
               std::span<const SampleTree> batch) {
  Matrix out(static_cast<Eigen::Index>(batch.size()), params.w2.rows());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) =
        forward_root(graph, params, batch[r]).probabilities.transpose();
  }
  return out;
}

double loss(const Matrix& probabilities, std::span<const int> labels,
            const ModelParams& params) {
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size()) {
    throw ShapeError("loss: one label per probability row is required");
  }
  check_labels(labels, probabilities.cols());
  double total = 0.0;
  for (std::size_t r = 0; r < labels.size(); ++r) {
    total -= std::log(std::max(probabilities(static_cast<Eigen::Index>(r), labels[r]),
                               kLogClamp));
  }
  return total + 0.5 * params.l2_lambda * (params.w1.squaredNorm() + params.w2.squaredNorm());
}

Gradients backward(const Graph& graph, const ModelParams& params,
                   std::span<const SampleTree> batch, std::span<const int> labels) {
  if (batch.size() != labels.size()) {
    throw ShapeError("backward: one label per root is required");
  }
  check_labels(labels, params.w2.rows());
  Gradients g{Matrix::Zero(params.w1.rows(), params.w1.cols()),
              Matrix::Zero(params.w2.rows(), params.w2.cols()), 0.0};
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const RootPass pass = forward_root(graph, params, batch[r]);
    g.loss -= std::log(std::max(pass.probabilities[labels[r]], kLogClamp));

    Vector d_logits = pass.probabilities;
    d_logits[labels[r]] -= 1.0;
    g.w2.noalias() += d_logits * pass.layer2_input.transpose();
    const Vector d_mean = (params.w2.transpose() * d_logits) /
                          static_cast<double>(pass.pre_activations.size());
    for (std::size_t p = 0; p < pass.pre_activations.size(); ++p) {
      const Vector d_pre =
          (pass.pre_activations[p].array() > 0.0).select(d_mean, 0.0);
      const auto& in = pass.layer1_inputs[p];
      for (std::size_t k = 0; k < in.index.size(); ++k) {
        g.w1.col(in.index[k]).noalias() += in.value[k] * d_pre;
      }
    }
  }
  g.w1 += params.l2_lambda * params.w1;
  g.w2 += params.l2_lambda * params.w2;
  g.loss += 0.5 * params.l2_lambda * (params.w1.squaredNorm() + params.w2.squaredNorm());
  return g;
}

void adam_step(ModelParams& params, const Gradients& gradients) {
  const auto same_shape = [](const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols();
  };
  if (!same_shape(params.w1, gradients.w1) || !same_shape(params.w2, gradients.w2) ||
      !same_shape(params.w1, params.adam_w1.first) ||
      !same_shape(params.w2, params.adam_w2.first)) {
    throw ParameterError("adam_step: gradient or moment shape mismatch");
  }
  ++params.step;
  const double t = static_cast<double>(params.step);
  const double correction1 = 1.0 - std::pow(kAdamBeta1, t);
  const double correction2 = 1.0 - std::pow(kAdamBeta2, t);
  const auto update = [&](Matrix& w, AdamMoments& m, const Matrix& g) {
    m.first = kAdamBeta1 * m.first + (1.0 - kAdamBeta1) * g;
    m.second = kAdamBeta2 * m.second + (1.0 - kAdamBeta2) * g.cwiseProduct(g);
    w.array() -= params.learning_rate * (m.first.array() / correction1) /
                 ((m.second.array() / correction2).sqrt() + kAdamEpsilon);
  };
  update(params.w1, params.adam_w1, gradients.w1);
  update(params.w2, params.adam_w2, gradients.w2);
}

std::vector<int> predict_classes(const Matrix& probabilities) {
  std::vector<int> out(static_cast<std::size_t>(probabilities.rows()));
  for (Eigen::Index r = 0; r < probabilities.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probabilities.cols(); ++c) {
      if (probabilities(r, c) > probabilities(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

double evaluate(const Graph& graph, const ModelParams& params,
                std::span<const NodeId> nodes, NeighborSampler& sampler,
                std::uint64_t seed) {
  if (nodes.empty()) throw ParameterError("evaluate: node set is empty");
  const auto trees = build_sample_tree(sampler, nodes, seed);
  const auto predicted = predict_classes(forward(graph, params, trees));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (predicted[i] == graph.label(nodes[i])) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(nodes.size());
}

double evaluate(const Graph& graph, const ModelParams& params,
                std::span<const NodeId> nodes, const SamplerConfig& sampler_config,
                std::uint64_t seed) {
  NeighborSampler sampler(graph, sampler_config, seed);
  return evaluate(graph, params, nodes, sampler, seed);
}

TrainResult train(const Graph& train_view, const Graph& eval_view, const Split& split,
                  const SamplerConfig& sampler_config, const ModelConfig& model_config,
                  std::uint64_t seed) {
  model_config.validate();
  sampler_config.validate();
  if (split.train.empty()) throw ParameterError("train: training split is empty");
  if (sampler_config.fanouts.size() != 2) {
    throw ParameterError("train: the model needs exactly two fanouts");
  }

  TrainResult result;
  result.params = ModelParams::initialize(train_view.feature_dim(),
                                          static_cast<std::size_t>(train_view.num_classes()),
                                          model_config, seed);
  const std::uint64_t sampler_seed = derive_seed(seed, {0x73616d70ULL});
  const std::uint64_t eval_seed = derive_seed(seed, {0x6576616cULL});
  NeighborSampler train_sampler(train_view, sampler_config, sampler_seed);
  NeighborSampler eval_sampler(eval_view, sampler_config, sampler_seed);

  ModelParams params = result.params;
  std::vector<NodeId> order = split.train;
  std::vector<int> labels;
  double best = -1.0;
  for (std::size_t epoch = 0; epoch < model_config.max_epochs; ++epoch) {
    Rng rng(derive_seed(seed, {0x65706f63ULL, epoch}));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    const auto start = std::chrono::steady_clock::now();
    double epoch_loss = 0.0;
    for (std::size_t begin = 0, b = 0; begin < order.size();
         begin += model_config.batch_size, ++b) {
      const std::size_t end = std::min(order.size(), begin + model_config.batch_size);
      const std::span<const NodeId> roots(order.data() + begin, end - begin);
      const auto trees =
          build_sample_tree(train_sampler, roots, derive_seed(seed, {epoch, b}));
      labels.clear();
      for (NodeId v : roots) labels.push_back(train_view.label(v));
      const Gradients g = backward(train_view, params, trees, labels);
      epoch_loss += g.loss;
      adam_step(params, g);
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const double val_acc =
        split.val.empty() ? 0.0 : evaluate(eval_view, params, split.val, eval_sampler, eval_seed);
    result.history.push_back(
        {epoch, epoch_loss / static_cast<double>(order.size()), val_acc, seconds});
    if (val_acc > best) {
      best = val_acc;
      result.best_epoch = epoch;
      result.best_val_accuracy = val_acc;
      result.params = params;
    } else if (epoch - result.best_epoch >= model_config.patience) {
      break;
    }
  }
  return result;
}

TrainResult train(const Graph& graph, const Split& split,
                  const SamplerConfig& sampler_config, const ModelConfig& model_config,
                  std::uint64_t seed) {
  return train(graph, graph, split, sampler_config, model_config, seed);
}

std::string metrics_csv(std::span<const EpochMetrics> history) {
  std::ostringstream out;
  out.precision(10);
  out << "epoch,loss,val_acc\n";
  for (const auto& m : history) out << m.epoch << ',' << m.loss << ',' << m.val_accuracy << '\n';
  return out.str();
}

namespace {

constexpr std::string_view kCheckpointFormat = "cocasage-checkpoint";
constexpr int kCheckpointVersion = 1;

nlohmann::ordered_json matrix_json(const Matrix& m) {
  nlohmann::ordered_json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size()) {
    throw FormatError("checkpoint matrix shape does not match its data");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0, k = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(k++)];
  }
  return m;
}

}  // namespace

std::string checkpoint_to_json(const ModelParams& params, std::string_view config_json) {
  nlohmann::ordered_json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["w1"] = matrix_json(params.w1);
  j["w2"] = matrix_json(params.w2);
  j["adam"] = {{"step", params.step},
               {"w1_first", matrix_json(params.adam_w1.first)},
               {"w1_second", matrix_json(params.adam_w1.second)},
               {"w2_first", matrix_json(params.adam_w2.first)},
               {"w2_second", matrix_json(params.adam_w2.second)}};
  j["l2_lambda"] = params.l2_lambda;
  j["learning_rate"] = params.learning_rate;
  j["config"] = config_json.empty() ? nlohmann::ordered_json::object()
                                    : nlohmann::ordered_json::parse(config_json);
  return j.dump();
}

ModelParams checkpoint_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw FormatError("not a cocasage checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version");
    }
    ModelParams p;
    p.w1 = matrix_from_json(j.at("w1"));
    p.w2 = matrix_from_json(j.at("w2"));
    const auto& adam = j.at("adam");
    p.step = adam.at("step").get<std::uint64_t>();
    p.adam_w1 = {matrix_from_json(adam.at("w1_first")), matrix_from_json(adam.at("w1_second"))};
    p.adam_w2 = {matrix_from_json(adam.at("w2_first")), matrix_from_json(adam.at("w2_second"))};
    p.l2_lambda = j.at("l2_lambda").get<double>();
    p.learning_rate = j.at("learning_rate").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

}  // namespace cocasage
