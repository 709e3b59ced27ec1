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

#ifndef COCASAGE_DENSITY_HPP_
#define COCASAGE_DENSITY_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cocasage/graph.hpp"

namespace cocasage {

enum class BandwidthRule { kScott, kFixed };

struct KdeConfig {
  BandwidthRule bandwidth_rule = BandwidthRule::kScott;
  double fixed_bandwidth = 1.0;  // used iff bandwidth_rule == kFixed
  double epsilon_floor = 1e-12;  // lower clamp for densities and bandwidths

  void validate() const;
};

// Scott's rule h = std_avg * n^(-1/(d+4)), floored at epsilon_floor.
double scott_bandwidth(std::size_t n, std::size_t d, double std_avg,
                       double epsilon_floor = 1e-12);

// Isotropic Gaussian kernel K_h(u) = (2 pi h^2)^(-d/2) exp(-|u|^2 / (2 h^2))
// evaluated from the squared norm of u.
double gaussian_kernel(double squared_distance, std::size_t dim, double bandwidth);

// Seeded Gaussian random projection R^input_dim -> R^output_dim with
// entries N(0, 1/output_dim). output_dim == 0 selects the identity map.
class RandomProjection {
 public:
  RandomProjection(std::size_t input_dim, std::size_t output_dim,
                   std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return identity_ ? input_dim_ : output_dim_; }
  bool is_identity() const { return identity_; }

  Eigen::VectorXd apply(std::span<const double> x) const;
  FeatureMatrix apply_rows(const FeatureMatrix& rows) const;

 private:
  std::size_t input_dim_;
  std::size_t output_dim_;
  bool identity_;
  Eigen::MatrixXd matrix_;  // output_dim x input_dim
};

// p(query | conditioning_set): Gaussian KDE over the projected conditioning
// points evaluated at the projected query, clamped below by epsilon_floor.
// Under the Scott rule the bandwidth comes from the conditioning set itself.
double conditional_density(std::span<const double> query,
                           std::span<const std::vector<double>> conditioning_set,
                           const KdeConfig& config, std::size_t projection_dim,
                           std::uint64_t seed);

// Precomputed density model over all node features of one graph view.
//
// Features are projected once; a single bandwidth is resolved for the whole
// view (fixed, or Scott's rule with the mean per-dimension standard
// deviation of the projected features and n = reference_set_size). All
// conditional densities evaluated through this object are therefore on a
// common scale.
class FeatureDensity {
 public:
  FeatureDensity(const FeatureMatrix& features, const KdeConfig& config,
                 std::size_t projection_dim, std::uint64_t seed,
                 std::size_t reference_set_size);

  double bandwidth() const { return bandwidth_; }
  double epsilon_floor() const { return config_.epsilon_floor; }
  std::size_t dim() const { return static_cast<std::size_t>(projected_.cols()); }
  const FeatureMatrix& projected() const { return projected_; }

  // Unclamped kernel between two nodes' projected features.
  double kernel(NodeId a, NodeId b) const;

  // Clamped KDE of `conditioning` evaluated at `query`. Throws
  // ParameterError for an empty conditioning set.
  double conditional(NodeId query, std::span<const NodeId> conditioning) const;

 private:
  KdeConfig config_;
  FeatureMatrix projected_;
  double bandwidth_ = 1.0;
};

}  // namespace cocasage

#endif  // COCASAGE_DENSITY_HPP_
