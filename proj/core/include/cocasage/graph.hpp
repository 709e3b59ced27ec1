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

#ifndef COCASAGE_GRAPH_HPP_
#define COCASAGE_GRAPH_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace cocasage {

using NodeId = std::uint32_t;
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Undirected attributed graph with class labels.
//
// The adjacency is stored in CSR form with sorted, deduplicated,
// self-loop-free rows and is always symmetric. Graph is immutable; the
// adjacency is shared between copies so that feature-replaced views
// (see with_features) cost one feature matrix and nothing else.
class Graph {
 public:
  // Builds from an undirected edge list. Self-loops and duplicate edges
  // (in either orientation) are dropped. Throws ParameterError/IndexError
  // if an endpoint, label or feature shape is inconsistent.
  static Graph from_edges(std::size_t num_nodes,
                          std::span<const std::pair<NodeId, NodeId>> edges,
                          FeatureMatrix features, std::vector<int> labels,
                          int num_classes);

  // Builds from per-node adjacency lists; rows are sorted and deduplicated
  // but must already be symmetric and self-loop-free.
  static Graph from_adjacency(std::vector<std::vector<NodeId>> adjacency,
                              FeatureMatrix features, std::vector<int> labels,
                              int num_classes);

  std::size_t num_nodes() const { return labels_->size(); }
  std::size_t feature_dim() const {
    return static_cast<std::size_t>(features_->cols());
  }
  int num_classes() const { return num_classes_; }
  std::size_t num_edges() const { return topology_->indices.size() / 2; }

  // Sorted neighbor ids of v. Throws IndexError for v >= num_nodes().
  std::span<const NodeId> neighborhood(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighborhood(v).size(); }

  const FeatureMatrix& features() const { return *features_; }
  auto feature_row(NodeId v) const { return features_->row(v); }
  std::span<const int> labels() const { return *labels_; }
  int label(NodeId v) const { return (*labels_)[v]; }

  // Same topology and labels, different features (must match the shape).
  Graph with_features(FeatureMatrix features) const;

  // Undirected edges (i < j) in ascending order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  bool operator==(const Graph& other) const;

 private:
  struct Topology {
    std::vector<std::size_t> offsets;
    std::vector<NodeId> indices;
  };

  Graph(std::shared_ptr<const Topology> topology,
        std::shared_ptr<const FeatureMatrix> features,
        std::shared_ptr<const std::vector<int>> labels, int num_classes);

  static void check_payload(std::size_t num_nodes, const FeatureMatrix& features,
                            const std::vector<int>& labels, int num_classes);

  std::shared_ptr<const Topology> topology_;
  std::shared_ptr<const FeatureMatrix> features_;
  std::shared_ptr<const std::vector<int>> labels_;
  int num_classes_ = 0;
};

// Disjoint node-id sets used for training, model selection and testing.
struct Split {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;
};

// Ingestion summary for a citation dataset.
struct LoadReport {
  std::size_t num_nodes = 0;
  std::size_t cites_lines = 0;        // non-empty lines in the cites file
  std::size_t dropped_unknown = 0;    // endpoints absent from content
  std::size_t dropped_self_loops = 0;
  std::size_t dropped_duplicates = 0; // repeated pairs, either orientation
  std::size_t undirected_edges = 0;   // after all drops
  std::vector<std::string> node_names;   // dense id -> original id
  std::vector<std::string> class_names;  // class id -> name, first appearance

  std::string to_json() const;
};

struct CitationDataset {
  Graph graph;
  LoadReport report;
};

struct LoadOptions {
  // Citation bag-of-words files must hold 0/1 features; converted TF-IDF
  // exports (Pubmed) turn this off.
  bool require_binary = true;
};

// Reads the tab-separated citation format:
//   content: <node_id> <f_1> ... <f_D> <class_name>
//   cites:   <cited_id> <citing_id>
CitationDataset load_citation_dataset(std::istream& content, std::istream& cites,
                                      const LoadOptions& options = {});

// Writes `graph` in the citation format. Names default to decimal dense
// ids and "c<k>" class names when the spans are empty.
void write_citation_dataset(const Graph& graph, std::ostream& content,
                            std::ostream& cites,
                            std::span<const std::string> node_names = {},
                            std::span<const std::string> class_names = {});

struct SbmParams {
  std::vector<std::size_t> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
  std::size_t feature_dim = 16;
  double feature_shift = 2.0;
};

// Stochastic block model. Labels are block ids; node features are
// feature_shift on coordinate (block mod feature_dim) plus N(0, 1) noise.
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

// Seeded uniform draw without replacement of exactly the requested counts.
Split make_split(const Graph& graph, std::size_t train_n, std::size_t val_n,
                 std::size_t test_n, std::uint64_t seed);

// Planetoid-style split: `per_class` training nodes per class (fewer when
// a class is smaller), then val_n and test_n drawn from the remainder.
Split make_per_class_split(const Graph& graph, std::size_t per_class,
                           std::size_t val_n, std::size_t test_n,
                           std::uint64_t seed);

}  // namespace cocasage

#endif  // COCASAGE_GRAPH_HPP_
