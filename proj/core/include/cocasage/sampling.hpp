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

#ifndef COCASAGE_SAMPLING_HPP_
#define COCASAGE_SAMPLING_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cocasage/density.hpp"
#include "cocasage/graph.hpp"

namespace cocasage {

enum class SamplerKind { kUniform, kCausal, kCoca };
enum class SelectionPolicy { kTopM, kProportional };

std::string_view to_string(SamplerKind kind);
std::string_view to_string(SelectionPolicy policy);
SamplerKind parse_sampler_kind(std::string_view text);
SelectionPolicy parse_selection_policy(std::string_view text);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::kUniform;
  std::vector<std::size_t> fanouts = {10, 10};  // M per hop
  SelectionPolicy policy = SelectionPolicy::kTopM;
  std::size_t mc_budget = 500;  // coalitions per candidate before Monte Carlo
  std::size_t projection_dim = 16;
  KdeConfig kde;

  void validate() const;
};

struct Candidate {
  NodeId id = 0;
  double weight = 0.0;
  bool must_take = false;
};

// Selection weights for the neighbors of one target, in neighbor-id order.
struct SamplerWeights {
  NodeId target = 0;
  std::vector<Candidate> candidates;
};

// Coalition coefficient (M-1)! (T-M)! / (M T!), evaluated in log space.
double q_factor(std::size_t T, std::size_t M);

// C(n, k) as a double; exact while the result fits in 53 bits.
double binomial(std::size_t n, std::size_t k);

SamplerWeights uniform_weights(const Graph& graph, NodeId target);

// Single-node causal weights 1 / (T p(v_i | N(target) \ {v_i})). A degree-1
// target gets weight 1 (empty confounder set); an isolated one, no
// candidates.
SamplerWeights causal_weights(const Graph& graph, NodeId target,
                              const FeatureDensity& density);

// Change in the candidate's causal weight when it joins `coalition`:
//   1/(M p(i | S + i + target)) - 1/(M p(i | S + target)),  M = |S| + 1.
// Throws ParameterError if the candidate is in the coalition or the
// coalition holds a non-neighbor of the target.
double marginal_contribution(const Graph& graph, NodeId target, NodeId candidate,
                             std::span<const NodeId> coalition,
                             const FeatureDensity& density);

struct CocaOptions {
  std::size_t mc_budget = 500;
  // Take the Monte Carlo path even when enumeration would be cheaper.
  bool force_monte_carlo = false;
};

// Cooperative causal weights: for every neighbor i,
//   E(i) = sum over S in N(target)\{i}, |S| = M-1 of
//          Q_T^M (1/p(i | S + i + target) - 1/p(i | S + target)),
// T = |N(target)|. When T <= M every neighbor is must-take with weight 1.
// Coalitions are enumerated in lexicographic order when there are at most
// mc_budget of them; otherwise mc_budget distinct coalitions are drawn
// uniformly and the sum is rescaled by C(T-1, M-1) / mc_budget.
SamplerWeights coca_weights(const Graph& graph, NodeId target, std::size_t M,
                            const FeatureDensity& density, const CocaOptions& options,
                            std::uint64_t seed);

// Picks min(M, |candidates|) distinct ids (returned in ascending order).
// top_m: weight descending, ties broken by a seeded shuffle.
// proportional: weights shifted by -min + 1e-12 when any is negative,
// then drawn without replacement proportionally to weight.
std::vector<NodeId> select_neighbors(const SamplerWeights& weights, std::size_t M,
                                     SelectionPolicy policy, std::uint64_t seed);

// JSON array of {"target", "candidates": [{"id", "weight", "must_take"}]}.
std::string weights_to_json(std::span<const SamplerWeights> weights);

// Stateful front end of the three samplers over one graph view. Weights
// are computed lazily and cached per (node, M); they depend only on the
// view's features and the sampler seed. Not thread-safe.
class NeighborSampler {
 public:
  NeighborSampler(const Graph& graph, SamplerConfig config, std::uint64_t seed);

  const Graph& graph() const { return *graph_; }
  const SamplerConfig& config() const { return config_; }

  const SamplerWeights& weights(NodeId target, std::size_t M);
  std::vector<NodeId> sample(NodeId target, std::size_t M, std::uint64_t draw_seed);

 private:
  const FeatureDensity& density_for(std::size_t M);

  const Graph* graph_;
  SamplerConfig config_;
  std::uint64_t seed_;
  std::map<std::size_t, FeatureDensity> densities_;
  std::map<std::size_t, std::vector<std::optional<SamplerWeights>>> cache_;
};

// Children of the previous hop's node p are nodes[offsets[p], offsets[p+1]).
// The previous hop of hops[0] is the root alone.
struct SampleHop {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> offsets;

  std::span<const NodeId> children(std::size_t parent) const {
    return {nodes.data() + offsets[parent], offsets[parent + 1] - offsets[parent]};
  }
};

struct SampleTree {
  NodeId root = 0;
  std::vector<SampleHop> hops;
};

// Recursively applies the sampler with the configured fanouts; one tree
// per root. The draw for (root, hop, parent) is seeded independently.
std::vector<SampleTree> build_sample_tree(NeighborSampler& sampler,
                                          std::span<const NodeId> roots,
                                          std::uint64_t seed);

}  // namespace cocasage

#endif  // COCASAGE_SAMPLING_HPP_
