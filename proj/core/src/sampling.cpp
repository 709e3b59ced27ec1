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

#include "cocasage/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cocasage/error.hpp"
#include "cocasage/random.hpp"
#include <nlohmann/json.hpp>

namespace cocasage {

std::string_view to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kUniform: return "uniform";
    case SamplerKind::kCausal: return "causal";
    case SamplerKind::kCoca: return "coca";
  }
  return "?";
}

std::string_view to_string(SelectionPolicy policy) {
  return policy == SelectionPolicy::kTopM ? "top_m" : "proportional";
}

SamplerKind parse_sampler_kind(std::string_view text) {
  if (text == "uniform") return SamplerKind::kUniform;
  if (text == "causal") return SamplerKind::kCausal;
  if (text == "coca") return SamplerKind::kCoca;
  throw ParameterError("unknown sampler '" + std::string(text) +
                       "' (expected uniform, causal or coca)");
}

SelectionPolicy parse_selection_policy(std::string_view text) {
  if (text == "top_m") return SelectionPolicy::kTopM;
  if (text == "proportional") return SelectionPolicy::kProportional;
  throw ParameterError("unknown selection policy '" + std::string(text) +
                       "' (expected top_m or proportional)");
}

void SamplerConfig::validate() const {
  if (fanouts.empty()) throw ParameterError("at least one fanout is required");
  for (std::size_t m : fanouts) {
    if (m == 0) throw ParameterError("fanouts must be >= 1");
  }
  if (mc_budget == 0) throw ParameterError("mc_budget must be >= 1");
  kde.validate();
}

double q_factor(std::size_t T, std::size_t M) {
  if (M == 0 || M > T) {
    throw ParameterError("q_factor requires 1 <= M <= T (T=" + std::to_string(T) +
                         ", M=" + std::to_string(M) + ")");
  }
  const double t = static_cast<double>(T);
  const double m = static_cast<double>(M);
  return std::exp(std::lgamma(m) + std::lgamma(t - m + 1.0) - std::log(m) -
                  std::lgamma(t + 1.0));
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  long double result = 1.0L;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * static_cast<long double>(n - k + i) / static_cast<long double>(i);
  }
  return static_cast<double>(std::round(result));
}

SamplerWeights uniform_weights(const Graph& graph, NodeId target) {
  SamplerWeights out{target, {}};
  for (NodeId u : graph.neighborhood(target)) out.candidates.push_back({u, 1.0, false});
  return out;
}

SamplerWeights causal_weights(const Graph& graph, NodeId target,
                              const FeatureDensity& density) {
  const auto neighbors = graph.neighborhood(target);
  SamplerWeights out{target, {}};
  const std::size_t T = neighbors.size();
  if (T == 1) {
    out.candidates.push_back({neighbors[0], 1.0, false});
    return out;
  }
  std::vector<NodeId> confounders;
  confounders.reserve(T);
  for (NodeId i : neighbors) {
    confounders.clear();
    for (NodeId u : neighbors) {
      if (u != i) confounders.push_back(u);
    }
    const double p = density.conditional(i, confounders);
    out.candidates.push_back({i, 1.0 / (static_cast<double>(T) * p), false});
  }
  return out;
}

double marginal_contribution(const Graph& graph, NodeId target, NodeId candidate,
                             std::span<const NodeId> coalition,
                             const FeatureDensity& density) {
  const auto neighbors = graph.neighborhood(target);
  const auto is_neighbor = [&](NodeId v) {
    return std::binary_search(neighbors.begin(), neighbors.end(), v);
  };
  if (!is_neighbor(candidate)) {
    throw ParameterError("candidate " + std::to_string(candidate) +
                         " is not a neighbor of " + std::to_string(target));
  }
  std::vector<NodeId> without;
  without.reserve(coalition.size() + 2);
  for (NodeId s : coalition) {
    if (s == candidate) throw ParameterError("candidate is a member of the coalition");
    if (!is_neighbor(s)) {
      throw ParameterError("coalition member " + std::to_string(s) +
                           " is not a neighbor of " + std::to_string(target));
    }
    without.push_back(s);
  }
  std::sort(without.begin(), without.end());
  if (std::adjacent_find(without.begin(), without.end()) != without.end()) {
    throw ParameterError("coalition has repeated members");
  }
  without.push_back(target);
  std::vector<NodeId> with = without;
  with.push_back(candidate);

  const double m = static_cast<double>(coalition.size() + 1);
  return 1.0 / (m * density.conditional(candidate, with)) -
         1.0 / (m * density.conditional(candidate, without));
}

namespace {

// Advances `combo` (sorted k-subset of [0, n)) to its lexicographic
// successor. Returns false after the last subset.
bool next_combination(std::vector<std::uint32_t>& combo, std::uint32_t n) {
  const std::size_t k = combo.size();
  for (std::size_t pos = k; pos-- > 0;) {
    if (combo[pos] < n - k + pos) {
      ++combo[pos];
      for (std::size_t j = pos + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

std::set<std::vector<std::uint32_t>> draw_coalitions(std::uint32_t n, std::size_t k,
                                                     std::size_t count, Rng& rng) {
  std::set<std::vector<std::uint32_t>> drawn;
  std::vector<std::uint32_t> pool(n);
  while (drawn.size() < count) {
    std::iota(pool.begin(), pool.end(), 0U);
    for (std::size_t j = 0; j < k; ++j) {
      std::swap(pool[j], pool[j + uniform_index(rng, n - j)]);
    }
    std::vector<std::uint32_t> combo(pool.begin(),
                                     pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(combo.begin(), combo.end());
    drawn.insert(std::move(combo));
  }
  return drawn;
}

}  // namespace

SamplerWeights coca_weights(const Graph& graph, NodeId target, std::size_t M,
                            const FeatureDensity& density, const CocaOptions& options,
                            std::uint64_t seed) {
  if (M == 0) throw ParameterError("coca_weights: M must be >= 1");
  if (options.mc_budget == 0) throw ParameterError("coca_weights: mc_budget must be >= 1");
  const auto neighbors = graph.neighborhood(target);
  const std::size_t T = neighbors.size();
  SamplerWeights out{target, {}};
  if (T <= M) {
    for (NodeId u : neighbors) out.candidates.push_back({u, 1.0, true});
    return out;
  }

  // Kernel values between every neighbor (as query) and every neighbor or
  // the target (as conditioner); column T is the target.
  Eigen::MatrixXd kernel(static_cast<Eigen::Index>(T), static_cast<Eigen::Index>(T + 1));
  for (std::size_t a = 0; a < T; ++a) {
    for (std::size_t b = 0; b < T; ++b) {
      kernel(a, b) = b < a ? kernel(b, a) : density.kernel(neighbors[a], neighbors[b]);
    }
    kernel(a, T) = density.kernel(neighbors[a], target);
  }

  const double q = q_factor(T, M);
  const double floor = density.epsilon_floor();
  const std::size_t k = M - 1;
  const auto others_n = static_cast<std::uint32_t>(T - 1);
  const double total = binomial(T - 1, k);
  const bool exact = !options.force_monte_carlo &&
                     total <= static_cast<double>(options.mc_budget);
  const double size_without = static_cast<double>(M);      // |S| + target
  const double size_with = static_cast<double>(M + 1);     // |S| + i + target

  std::vector<std::uint32_t> others(T - 1);
  for (std::size_t i = 0; i < T; ++i) {
    // Column indices of N(target) \ {i}, ascending.
    for (std::uint32_t j = 0, w = 0; j < T; ++j) {
      if (j != i) others[w++] = j;
    }
    const auto row = static_cast<Eigen::Index>(i);
    const double self_kernel = kernel(row, row);
    const double target_kernel = kernel(row, static_cast<Eigen::Index>(T));
    const auto term = [&](const std::vector<std::uint32_t>& combo) {
      double coalition_sum = 0.0;
      for (std::uint32_t s : combo) coalition_sum += kernel(row, others[s]);
      const double p_without =
          std::max((coalition_sum + target_kernel) / size_without, floor);
      const double p_with =
          std::max((coalition_sum + target_kernel + self_kernel) / size_with, floor);
      return 1.0 / p_with - 1.0 / p_without;
    };

    double sum = 0.0;
    if (exact) {
      std::vector<std::uint32_t> combo(k);
      std::iota(combo.begin(), combo.end(), 0U);
      do {
        sum += term(combo);
      } while (next_combination(combo, others_n));
    } else {
      const auto budget = static_cast<std::size_t>(
          std::min(static_cast<double>(options.mc_budget), total));
      Rng rng(derive_seed(seed, {target, neighbors[i]}));
      for (const auto& combo : draw_coalitions(others_n, k, budget, rng)) sum += term(combo);
      sum *= total / static_cast<double>(budget);
    }
    out.candidates.push_back({neighbors[i], q * sum, false});
  }
  return out;
}

std::vector<NodeId> select_neighbors(const SamplerWeights& weights, std::size_t M,
                                     SelectionPolicy policy, std::uint64_t seed) {
  const auto& cands = weights.candidates;
  const std::size_t take = std::min(M, cands.size());
  std::vector<NodeId> chosen;
  if (take == 0) return chosen;
  chosen.reserve(take);
  Rng rng(seed);

  if (take == cands.size()) {
    for (const auto& c : cands) chosen.push_back(c.id);
  } else if (policy == SelectionPolicy::kTopM) {
    std::vector<std::size_t> order(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[uniform_index(rng, i)]);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return cands[a].weight > cands[b].weight;
    });
    for (std::size_t j = 0; j < take; ++j) chosen.push_back(cands[order[j]].id);
  } else {
    std::vector<double> w(cands.size());
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < cands.size(); ++j) {
      w[j] = cands[j].weight;
      if (!std::isfinite(w[j])) throw ParameterError("non-finite sampler weight");
      lowest = std::min(lowest, w[j]);
    }
    if (lowest < 0.0) {
      for (double& x : w) x = x - lowest + 1e-12;
    }
    std::vector<std::size_t> remaining(cands.size());
    std::iota(remaining.begin(), remaining.end(), std::size_t{0});
    for (std::size_t round = 0; round < take; ++round) {
      double mass = 0.0;
      for (std::size_t j : remaining) mass += w[j];
      std::size_t pick = remaining.size() - 1;
      if (mass > 0.0) {
        const double u = uniform01(rng) * mass;
        double acc = 0.0;
        for (std::size_t r = 0; r < remaining.size(); ++r) {
          acc += w[remaining[r]];
          if (u < acc) {
            pick = r;
            break;
          }
        }
      } else {
        pick = uniform_index(rng, remaining.size());
      }
      chosen.push_back(cands[remaining[pick]].id);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::string weights_to_json(std::span<const SamplerWeights> weights) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& w : weights) {
    nlohmann::ordered_json entry;
    entry["target"] = w.target;
    entry["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : w.candidates) {
      entry["candidates"].push_back(
          {{"id", c.id}, {"weight", c.weight}, {"must_take", c.must_take}});
    }
    out.push_back(std::move(entry));
  }
  return out.dump(2);
}

NeighborSampler::NeighborSampler(const Graph& graph, SamplerConfig config,
                                 std::uint64_t seed)
    : graph_(&graph), config_(std::move(config)), seed_(seed) {
  config_.validate();
}

const FeatureDensity& NeighborSampler::density_for(std::size_t M) {
  auto it = densities_.find(M);
  if (it == densities_.end()) {
    it = densities_
             .try_emplace(M, graph_->features(), config_.kde, config_.projection_dim,
                          derive_seed(seed_, {0x6b6465ULL}), M + 1)
             .first;
  }
  return it->second;
}

const SamplerWeights& NeighborSampler::weights(NodeId target, std::size_t M) {
  auto& slots = cache_[M];
  if (slots.empty()) slots.resize(graph_->num_nodes());
  if (target >= slots.size()) {
    throw IndexError("node " + std::to_string(target) + " out of range");
  }
  auto& slot = slots[target];
  if (!slot) {
    switch (config_.kind) {
      case SamplerKind::kUniform:
        slot = uniform_weights(*graph_, target);
        break;
      case SamplerKind::kCausal:
        slot = graph_->degree(target) == 0
                   ? SamplerWeights{target, {}}
                   : causal_weights(*graph_, target, density_for(M));
        break;
      case SamplerKind::kCoca:
        if (graph_->degree(target) <= M) {
          SamplerWeights all{target, {}};
          for (NodeId u : graph_->neighborhood(target)) all.candidates.push_back({u, 1.0, true});
          slot = std::move(all);
        } else {
          slot = coca_weights(*graph_, target, M, density_for(M), {config_.mc_budget, false},
                              derive_seed(seed_, {0x636f6361ULL}));
        }
        break;
    }
  }
  return *slot;
}

std::vector<NodeId> NeighborSampler::sample(NodeId target, std::size_t M,
                                            std::uint64_t draw_seed) {
  return select_neighbors(weights(target, M), M, config_.policy, draw_seed);
}

std::vector<SampleTree> build_sample_tree(NeighborSampler& sampler,
                                          std::span<const NodeId> roots,
                                          std::uint64_t seed) {
  const auto& fanouts = sampler.config().fanouts;
  std::vector<SampleTree> trees;
  trees.reserve(roots.size());
  for (NodeId root : roots) {
    SampleTree tree{root, {}};
    std::vector<NodeId> frontier{root};
    for (std::size_t hop = 0; hop < fanouts.size(); ++hop) {
      SampleHop next;
      next.offsets.push_back(0);
      for (NodeId parent : frontier) {
        const auto picked =
            sampler.sample(parent, fanouts[hop], derive_seed(seed, {root, hop, parent}));
        next.nodes.insert(next.nodes.end(), picked.begin(), picked.end());
        next.offsets.push_back(next.nodes.size());
      }
      frontier = next.nodes;
      tree.hops.push_back(std::move(next));
    }
    trees.push_back(std::move(tree));
  }
  return trees;
}

}  // namespace cocasage
