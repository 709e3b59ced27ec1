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

#include "cocasage/perturb.hpp"

#include <cmath>
#include <string>

#include "cocasage/error.hpp"
#include "cocasage/random.hpp"

namespace cocasage {

std::string_view to_string(PerturbationKind kind) {
  switch (kind) {
    case PerturbationKind::kBernoulliXor: return "xor";
    case PerturbationKind::kGaussianGated: return "gauss";
    case PerturbationKind::kSignFlipGated: return "signflip";
  }
  return "?";
}

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::kBoth: return "both";
    case Placement::kTrainOnly: return "train";
    case Placement::kTestOnly: return "test";
  }
  return "?";
}

PerturbationKind parse_perturbation_kind(std::string_view text) {
  if (text == "xor") return PerturbationKind::kBernoulliXor;
  if (text == "gauss") return PerturbationKind::kGaussianGated;
  if (text == "signflip") return PerturbationKind::kSignFlipGated;
  throw ParameterError("unknown perturbation '" + std::string(text) +
                       "' (expected xor, gauss or signflip)");
}

Placement parse_placement(std::string_view text) {
  if (text == "both") return Placement::kBoth;
  if (text == "train") return Placement::kTrainOnly;
  if (text == "test") return Placement::kTestOnly;
  throw ParameterError("unknown placement '" + std::string(text) +
                       "' (expected both, train or test)");
}

namespace {

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ParameterError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

void PerturbationSpec::validate() const { check_probability(intensity, "intensity"); }

BinaryMask bernoulli_mask(std::size_t n, std::size_t d, double eta, std::uint64_t seed) {
  check_probability(eta, "eta");
  BinaryMask mask(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Rng rng(seed);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = uniform01(rng) < eta ? 1 : 0;
  }
  return mask;
}

double perturbation_ratio(const BinaryMask& mask) {
  if (mask.size() == 0) throw ParameterError("perturbation_ratio: empty mask");
  std::size_t ones = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    const auto v = mask.data()[i];
    if (v > 1) throw DomainError("perturbation_ratio: mask entries must be 0 or 1");
    ones += v;
  }
  return static_cast<double>(ones) / static_cast<double>(mask.size());
}

FeatureMatrix apply_bernoulli_xor(const FeatureMatrix& features, const BinaryMask& mask) {
  if (features.rows() != mask.rows() || features.cols() != mask.cols()) {
    throw ShapeError("apply_bernoulli_xor: mask shape differs from features");
  }
  FeatureMatrix out(features.rows(), features.cols());
  for (Eigen::Index i = 0; i < features.size(); ++i) {
    const double x = features.data()[i];
    if (x != 0.0 && x != 1.0) {
      throw DomainError("apply_bernoulli_xor: non-binary feature at flat index " +
                        std::to_string(i));
    }
    out.data()[i] = mask.data()[i] ? 1.0 - x : x;
  }
  return out;
}

FeatureMatrix apply_gaussian_gated(const FeatureMatrix& features, double gate_p,
                                   std::uint64_t seed) {
  check_probability(gate_p, "gate_p");
  const auto n = features.rows();
  Eigen::RowVectorXd sigma = Eigen::RowVectorXd::Zero(features.cols());
  if (n > 1) {
    const Eigen::RowVectorXd mean = features.colwise().mean();
    sigma = ((features.rowwise() - mean).array().square().colwise().sum() /
             static_cast<double>(n - 1))
                .sqrt();
  }
  FeatureMatrix out = features;
  Rng gate_rng(derive_seed(seed, {1}));
  Rng noise_rng(derive_seed(seed, {2}));
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(uniform01(gate_rng) < gate_p)) continue;
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const double z = normal(noise_rng);
      if (sigma[j] > 0.0) out(i, j) += sigma[j] * z;
    }
  }
  return out;
}

FeatureMatrix apply_sign_flip_gated(const FeatureMatrix& features, double gate_p,
                                    std::uint64_t seed) {
  check_probability(gate_p, "gate_p");
  FeatureMatrix out = features;
  Rng gate_rng(derive_seed(seed, {1}));
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    if (uniform01(gate_rng) < gate_p) out.row(i) = -out.row(i);
  }
  return out;
}

FeatureMatrix perturb_features(const FeatureMatrix& features, const PerturbationSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case PerturbationKind::kBernoulliXor:
      return apply_bernoulli_xor(
          features, bernoulli_mask(static_cast<std::size_t>(features.rows()),
                                   static_cast<std::size_t>(features.cols()),
                                   spec.intensity, spec.seed));
    case PerturbationKind::kGaussianGated:
      return apply_gaussian_gated(features, spec.intensity, spec.seed);
    case PerturbationKind::kSignFlipGated:
      return apply_sign_flip_gated(features, spec.intensity, spec.seed);
  }
  throw ParameterError("unknown perturbation kind");
}

PerturbedViews apply_placement(const Graph& graph, const Split& split,
                               const PerturbationSpec& spec) {
  const FeatureMatrix perturbed = perturb_features(graph.features(), spec);
  if (spec.placement == Placement::kBoth) {
    Graph view = graph.with_features(perturbed);
    return {view, view};
  }
  FeatureMatrix mixed = graph.features();
  const auto copy_rows = [&](const std::vector<NodeId>& rows) {
    for (NodeId v : rows) mixed.row(v) = perturbed.row(v);
  };
  if (spec.placement == Placement::kTrainOnly) {
    copy_rows(split.train);
    return {graph.with_features(std::move(mixed)), graph};
  }
  copy_rows(split.val);
  copy_rows(split.test);
  return {graph, graph.with_features(std::move(mixed))};
}

}  // namespace cocasage
