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

#include "cocasage/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "cocasage/error.hpp"
#include "cocasage/random.hpp"
#include <nlohmann/json.hpp>

namespace cocasage {

Graph::Graph(std::shared_ptr<const Topology> topology,
             std::shared_ptr<const FeatureMatrix> features,
             std::shared_ptr<const std::vector<int>> labels, int num_classes)
    : topology_(std::move(topology)),
      features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {}

void Graph::check_payload(std::size_t num_nodes, const FeatureMatrix& features,
                          const std::vector<int>& labels, int num_classes) {
  if (num_classes < 1) throw ParameterError("num_classes must be >= 1");
  if (labels.size() != num_nodes) {
    throw ParameterError("label count " + std::to_string(labels.size()) +
                         " != num_nodes " + std::to_string(num_nodes));
  }
  if (static_cast<std::size_t>(features.rows()) != num_nodes) {
    throw ParameterError("feature rows " + std::to_string(features.rows()) +
                         " != num_nodes " + std::to_string(num_nodes));
  }
  for (std::size_t v = 0; v < num_nodes; ++v) {
    if (labels[v] < 0 || labels[v] >= num_classes) {
      throw ParameterError("label of node " + std::to_string(v) +
                           " outside [0, num_classes)");
    }
  }
}

Graph Graph::from_edges(std::size_t num_nodes,
                        std::span<const std::pair<NodeId, NodeId>> edges,
                        FeatureMatrix features, std::vector<int> labels,
                        int num_classes) {
  check_payload(num_nodes, features, labels, num_classes);
  std::vector<std::vector<NodeId>> adjacency(num_nodes);
  for (const auto& [a, b] : edges) {
    if (a >= num_nodes || b >= num_nodes) {
      throw IndexError("edge endpoint out of range: (" + std::to_string(a) +
                       ", " + std::to_string(b) + ")");
    }
    if (a == b) continue;
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  return from_adjacency(std::move(adjacency), std::move(features),
                        std::move(labels), num_classes);
}

Graph Graph::from_adjacency(std::vector<std::vector<NodeId>> adjacency,
                            FeatureMatrix features, std::vector<int> labels,
                            int num_classes) {
  const std::size_t n = adjacency.size();
  check_payload(n, features, labels, num_classes);
  auto topology = std::make_shared<Topology>();
  topology->offsets.reserve(n + 1);
  topology->offsets.push_back(0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& row = adjacency[v];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    for (NodeId u : row) {
      if (u >= n) throw IndexError("neighbor id out of range");
      if (u == v) {
        throw ParameterError("self-loop at node " + std::to_string(v));
      }
    }
    topology->indices.insert(topology->indices.end(), row.begin(), row.end());
    topology->offsets.push_back(topology->indices.size());
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (NodeId u : adjacency[v]) {
      const auto& back = adjacency[u];
      if (!std::binary_search(back.begin(), back.end(), static_cast<NodeId>(v))) {
        throw ParameterError("adjacency is not symmetric at (" +
                             std::to_string(v) + ", " + std::to_string(u) + ")");
      }
    }
  }
  return Graph(std::move(topology),
               std::make_shared<const FeatureMatrix>(std::move(features)),
               std::make_shared<const std::vector<int>>(std::move(labels)),
               num_classes);
}

std::span<const NodeId> Graph::neighborhood(NodeId v) const {
  if (v >= num_nodes()) {
    throw IndexError("node " + std::to_string(v) + " out of range [0, " +
                     std::to_string(num_nodes()) + ")");
  }
  const auto begin = topology_->offsets[v];
  const auto end = topology_->offsets[v + 1];
  return {topology_->indices.data() + begin, end - begin};
}

Graph Graph::with_features(FeatureMatrix features) const {
  if (features.rows() != features_->rows() ||
      features.cols() != features_->cols()) {
    throw ShapeError("replacement feature matrix has a different shape");
  }
  return Graph(topology_, std::make_shared<const FeatureMatrix>(std::move(features)),
               labels_, num_classes_);
}

std::vector<std::pair<NodeId, NodeId>> Graph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> edges;
  edges.reserve(num_edges());
  for (NodeId v = 0; v < num_nodes(); ++v) {
    for (NodeId u : neighborhood(v)) {
      if (v < u) edges.emplace_back(v, u);
    }
  }
  return edges;
}

bool Graph::operator==(const Graph& other) const {
  return num_classes_ == other.num_classes_ &&
         topology_->offsets == other.topology_->offsets &&
         topology_->indices == other.topology_->indices &&
         *labels_ == *other.labels_ &&
         features_->rows() == other.features_->rows() &&
         features_->cols() == other.features_->cols() &&
         *features_ == *other.features_;
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
    line.remove_suffix(1);
  }
  return line;
}

double parse_feature(std::string_view token, std::size_t line_no,
                     bool require_binary) {
  if (require_binary) {
    if (token == "0") return 0.0;
    if (token == "1") return 1.0;
    throw FormatError("content line " + std::to_string(line_no) +
                      ": non-binary feature token '" + std::string(token) + "'");
  }
  try {
    std::size_t used = 0;
    const double value = std::stod(std::string(token), &used);
    if (used != token.size() || !std::isfinite(value)) throw std::invalid_argument("");
    return value;
  } catch (const std::exception&) {
    throw FormatError("content line " + std::to_string(line_no) +
                      ": unparsable feature token '" + std::string(token) + "'");
  }
}

}  // namespace

std::string LoadReport::to_json() const {
  nlohmann::ordered_json j;
  j["num_nodes"] = num_nodes;
  j["cites_lines"] = cites_lines;
  j["dropped_unknown"] = dropped_unknown;
  j["dropped_self_loops"] = dropped_self_loops;
  j["dropped_duplicates"] = dropped_duplicates;
  j["undirected_edges"] = undirected_edges;
  j["class_names"] = class_names;
  return j.dump(2);
}

CitationDataset load_citation_dataset(std::istream& content, std::istream& cites,
                                      const LoadOptions& options) {
  LoadReport report;
  std::unordered_map<std::string, NodeId> node_index;
  std::unordered_map<std::string, int> class_index;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::size_t feature_dim = 0;

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(content, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() < 2) {
      throw FormatError("content line " + std::to_string(line_no) +
                        ": expected <id> <features...> <class>");
    }
    const std::size_t dim = fields.size() - 2;
    if (rows.empty()) {
      feature_dim = dim;
    } else if (dim != feature_dim) {
      throw FormatError("content line " + std::to_string(line_no) + ": " +
                        std::to_string(dim) + " features, expected " +
                        std::to_string(feature_dim));
    }
    std::string name(fields.front());
    if (node_index.contains(name)) {
      throw FormatError("content line " + std::to_string(line_no) +
                        ": duplicate node id '" + name + "'");
    }
    std::vector<double> row(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      row[k] = parse_feature(fields[k + 1], line_no, options.require_binary);
    }
    std::string cls(fields.back());
    auto [it, inserted] =
        class_index.try_emplace(cls, static_cast<int>(report.class_names.size()));
    if (inserted) report.class_names.push_back(cls);
    node_index.emplace(name, static_cast<NodeId>(rows.size()));
    report.node_names.push_back(std::move(name));
    labels.push_back(it->second);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("content is empty");

  const std::size_t n = rows.size();
  FeatureMatrix features(n, feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < feature_dim; ++k) features(v, k) = rows[v][k];
  }
  rows.clear();

  std::vector<std::pair<NodeId, NodeId>> edges;
  line_no = 0;
  while (std::getline(cites, raw)) {
    ++line_no;
    const auto line = strip_cr(raw);
    if (line.empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != 2) {
      throw FormatError("cites line " + std::to_string(line_no) +
                        ": expected <cited> <citing>");
    }
    ++report.cites_lines;
    const auto a = node_index.find(std::string(fields[0]));
    const auto b = node_index.find(std::string(fields[1]));
    if (a == node_index.end() || b == node_index.end()) {
      ++report.dropped_unknown;
      continue;
    }
    if (a->second == b->second) {
      ++report.dropped_self_loops;
      continue;
    }
    edges.emplace_back(std::min(a->second, b->second),
                       std::max(a->second, b->second));
  }
  std::sort(edges.begin(), edges.end());
  const auto unique_end = std::unique(edges.begin(), edges.end());
  report.dropped_duplicates = static_cast<std::size_t>(edges.end() - unique_end);
  edges.erase(unique_end, edges.end());

  const int num_classes = static_cast<int>(report.class_names.size());
  Graph graph = Graph::from_edges(n, edges, std::move(features), std::move(labels),
                                  num_classes);
  report.num_nodes = n;
  report.undirected_edges = graph.num_edges();
  return CitationDataset{std::move(graph), std::move(report)};
}

void write_citation_dataset(const Graph& graph, std::ostream& content,
                            std::ostream& cites,
                            std::span<const std::string> node_names,
                            std::span<const std::string> class_names) {
  const auto node_name = [&](NodeId v) {
    return node_names.empty() ? std::to_string(v) : node_names[v];
  };
  const auto class_name = [&](int c) {
    return class_names.empty() ? "c" + std::to_string(c) : class_names[c];
  };
  std::ostringstream number;
  number.precision(17);
  const auto& x = graph.features();
  for (NodeId v = 0; v < graph.num_nodes(); ++v) {
    content << node_name(v);
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      number.str({});
      number << x(v, k);
      content << '\t' << number.str();
    }
    content << '\t' << class_name(graph.label(v)) << '\n';
  }
  for (const auto& [a, b] : graph.edge_list()) {
    cites << node_name(a) << '\t' << node_name(b) << '\n';
  }
}

Graph generate_sbm(const SbmParams& params, std::uint64_t seed) {
  if (params.block_sizes.empty()) throw ParameterError("block_sizes is empty");
  const auto in_unit = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!in_unit(params.p_in) || !in_unit(params.p_out)) {
    throw ParameterError("SBM probabilities must lie in [0, 1]");
  }
  if (params.p_out > params.p_in) throw ParameterError("SBM requires p_out <= p_in");
  if (params.feature_dim == 0) throw ParameterError("feature_dim must be >= 1");

  std::vector<int> labels;
  for (std::size_t b = 0; b < params.block_sizes.size(); ++b) {
    labels.insert(labels.end(), params.block_sizes[b], static_cast<int>(b));
  }
  const std::size_t n = labels.size();

  Rng edge_rng(derive_seed(seed, {1}));
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? params.p_in : params.p_out;
      if (uniform01(edge_rng) < p) edges.emplace_back(i, j);
    }
  }

  Rng feature_rng(derive_seed(seed, {2}));
  std::normal_distribution<double> noise(0.0, 1.0);
  FeatureMatrix features(n, params.feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t k = 0; k < params.feature_dim; ++k) {
      features(v, k) = noise(feature_rng);
    }
    features(v, static_cast<std::size_t>(labels[v]) % params.feature_dim) +=
        params.feature_shift;
  }
  return Graph::from_edges(n, edges, std::move(features), std::move(labels),
                           static_cast<int>(params.block_sizes.size()));
}

namespace {

std::vector<NodeId> shuffled_ids(std::size_t n, std::uint64_t seed) {
  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{0});
  Rng rng(seed);
  // Explicit Fisher-Yates keeps the permutation independent of the
  // standard library's shuffle implementation.
  for (std::size_t i = n; i > 1; --i) {
    std::swap(ids[i - 1], ids[uniform_index(rng, i)]);
  }
  return ids;
}

}  // namespace

Split make_split(const Graph& graph, std::size_t train_n, std::size_t val_n,
                 std::size_t test_n, std::uint64_t seed) {
  const std::size_t n = graph.num_nodes();
  if (train_n + val_n + test_n > n) {
    throw ParameterError("split sizes exceed num_nodes (" + std::to_string(n) + ")");
  }
  const auto ids = shuffled_ids(n, seed);
  Split split;
  auto it = ids.begin();
  split.train.assign(it, it + static_cast<std::ptrdiff_t>(train_n));
  it += static_cast<std::ptrdiff_t>(train_n);
  split.val.assign(it, it + static_cast<std::ptrdiff_t>(val_n));
  it += static_cast<std::ptrdiff_t>(val_n);
  split.test.assign(it, it + static_cast<std::ptrdiff_t>(test_n));
  for (auto* part : {&split.train, &split.val, &split.test}) {
    std::sort(part->begin(), part->end());
  }
  return split;
}

Split make_per_class_split(const Graph& graph, std::size_t per_class,
                           std::size_t val_n, std::size_t test_n,
                           std::uint64_t seed) {
  const auto ids = shuffled_ids(graph.num_nodes(), seed);
  std::vector<std::size_t> taken(static_cast<std::size_t>(graph.num_classes()), 0);
  Split split;
  std::vector<NodeId> rest;
  for (NodeId v : ids) {
    auto& count = taken[static_cast<std::size_t>(graph.label(v))];
    if (count < per_class) {
      split.train.push_back(v);
      ++count;
    } else {
      rest.push_back(v);
    }
  }
  if (val_n + test_n > rest.size()) {
    throw ParameterError("split sizes exceed num_nodes (" +
                         std::to_string(graph.num_nodes()) + ")");
  }
  split.val.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(val_n));
  split.test.assign(rest.begin() + static_cast<std::ptrdiff_t>(val_n),
                    rest.begin() + static_cast<std::ptrdiff_t>(val_n + test_n));
  for (auto* part : {&split.train, &split.val, &split.test}) {
    std::sort(part->begin(), part->end());
  }
  return split;
}

}  // namespace cocasage
