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

#ifndef COCASAGE_PERTURB_HPP_
#define COCASAGE_PERTURB_HPP_

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "cocasage/graph.hpp"

namespace cocasage {

enum class PerturbationKind {
  kBernoulliXor,   // flip each binary entry with probability intensity
  kGaussianGated,  // gate nodes with probability intensity, add N(0, sigma_col^2)
  kSignFlipGated,  // gate nodes with probability intensity, negate the row
};

enum class Placement { kBoth, kTrainOnly, kTestOnly };

std::string_view to_string(PerturbationKind kind);
std::string_view to_string(Placement placement);
PerturbationKind parse_perturbation_kind(std::string_view text);
Placement parse_placement(std::string_view text);

struct PerturbationSpec {
  PerturbationKind kind = PerturbationKind::kBernoulliXor;
  double intensity = 0.0;  // eta, or the node gate probability
  Placement placement = Placement::kBoth;
  std::uint64_t seed = 0;

  void validate() const;
};

using BinaryMask =
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// i.i.d. Bernoulli(eta) entries.
BinaryMask bernoulli_mask(std::size_t n, std::size_t d, double eta, std::uint64_t seed);

// Mean of all mask entries. Throws ParameterError on an empty mask.
double perturbation_ratio(const BinaryMask& mask);

// out = features XOR mask. Throws DomainError on a non-binary feature and
// ShapeError when shapes differ.
FeatureMatrix apply_bernoulli_xor(const FeatureMatrix& features, const BinaryMask& mask);

// Rows gated with probability gate_p receive additive Gaussian noise with
// the per-column standard deviation of `features`; other rows are copied.
FeatureMatrix apply_gaussian_gated(const FeatureMatrix& features, double gate_p,
                                   std::uint64_t seed);

// Rows gated with probability gate_p are negated.
FeatureMatrix apply_sign_flip_gated(const FeatureMatrix& features, double gate_p,
                                    std::uint64_t seed);

// Perturbs every row of `features` according to spec.kind.
FeatureMatrix perturb_features(const FeatureMatrix& features, const PerturbationSpec& spec);

struct PerturbedViews {
  Graph train_view;  // what training (aggregation and sampler weights) sees
  Graph test_view;   // what validation and testing see
};

// both:       every row perturbed in a single shared matrix.
// train_only: training rows perturbed in the train view; test view pristine.
// test_only:  validation and test rows perturbed in the test view; train
//             view pristine.
PerturbedViews apply_placement(const Graph& graph, const Split& split,
                               const PerturbationSpec& spec);

}  // namespace cocasage

#endif  // COCASAGE_PERTURB_HPP_
