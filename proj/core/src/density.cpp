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

#include "cocasage/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cocasage/error.hpp"
#include "cocasage/random.hpp"

namespace cocasage {

void KdeConfig::validate() const {
  if (!(fixed_bandwidth > 0.0)) throw ParameterError("fixed_bandwidth must be > 0");
  if (!(epsilon_floor > 0.0)) throw ParameterError("epsilon_floor must be > 0");
}

double scott_bandwidth(std::size_t n, std::size_t d, double std_avg,
                       double epsilon_floor) {
  if (n == 0) throw ParameterError("scott_bandwidth: n must be >= 1");
  if (d == 0) throw ParameterError("scott_bandwidth: d must be >= 1");
  if (std_avg < 0.0) throw ParameterError("scott_bandwidth: std_avg must be >= 0");
  const double h = std_avg * std::pow(static_cast<double>(n),
                                      -1.0 / (static_cast<double>(d) + 4.0));
  return std::max(h, epsilon_floor);
}

double gaussian_kernel(double squared_distance, std::size_t dim, double bandwidth) {
  const double h2 = bandwidth * bandwidth;
  const double log_norm =
      -0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * h2);
  return std::exp(log_norm - squared_distance / (2.0 * h2));
}

RandomProjection::RandomProjection(std::size_t input_dim, std::size_t output_dim,
                                   std::uint64_t seed)
    : input_dim_(input_dim), output_dim_(output_dim), identity_(output_dim == 0) {
  if (input_dim == 0) throw ParameterError("projection input_dim must be >= 1");
  if (identity_) return;
  Rng rng(derive_seed(seed, {0x70726f6aULL}));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(output_dim)));
  matrix_.resize(static_cast<Eigen::Index>(output_dim),
                 static_cast<Eigen::Index>(input_dim));
  for (Eigen::Index r = 0; r < matrix_.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix_.cols(); ++c) matrix_(r, c) = normal(rng);
  }
}

Eigen::VectorXd RandomProjection::apply(std::span<const double> x) const {
  if (x.size() != input_dim_) {
    throw ParameterError("projection input has dimension " + std::to_string(x.size()) +
                         ", expected " + std::to_string(input_dim_));
  }
  const Eigen::Map<const Eigen::VectorXd> v(x.data(), static_cast<Eigen::Index>(x.size()));
  if (identity_) return v;
  return matrix_ * v;
}

FeatureMatrix RandomProjection::apply_rows(const FeatureMatrix& rows) const {
  if (static_cast<std::size_t>(rows.cols()) != input_dim_) {
    throw ParameterError("projection input has dimension " +
                         std::to_string(rows.cols()) + ", expected " +
                         std::to_string(input_dim_));
  }
  if (identity_) return rows;
  return rows * matrix_.transpose();
}

namespace {

double mean_column_std(const FeatureMatrix& points) {
  const auto n = points.rows();
  if (n < 2 || points.cols() == 0) return 0.0;
  const Eigen::RowVectorXd mean = points.colwise().mean();
  const Eigen::RowVectorXd var =
      (points.rowwise() - mean).array().square().colwise().sum() /
      static_cast<double>(n - 1);
  return var.array().sqrt().mean();
}

}  // namespace

double conditional_density(std::span<const double> query,
                           std::span<const std::vector<double>> conditioning_set,
                           const KdeConfig& config, std::size_t projection_dim,
                           std::uint64_t seed) {
  config.validate();
  if (conditioning_set.empty()) {
    throw ParameterError("conditional_density: conditioning set is empty");
  }
  for (const auto& x : conditioning_set) {
    if (x.size() != query.size()) {
      throw ParameterError("conditional_density: dimension mismatch (" +
                           std::to_string(x.size()) + " vs " +
                           std::to_string(query.size()) + ")");
    }
  }
  const RandomProjection projection(query.size(), projection_dim, seed);
  const Eigen::VectorXd q = projection.apply(query);
  FeatureMatrix points(static_cast<Eigen::Index>(conditioning_set.size()), q.size());
  for (std::size_t i = 0; i < conditioning_set.size(); ++i) {
    points.row(static_cast<Eigen::Index>(i)) =
        projection.apply(conditioning_set[i]).transpose();
  }
  const std::size_t dim = static_cast<std::size_t>(q.size());
  const double h = config.bandwidth_rule == BandwidthRule::kFixed
                       ? config.fixed_bandwidth
                       : scott_bandwidth(conditioning_set.size(), dim,
                                         mean_column_std(points), config.epsilon_floor);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    sum += gaussian_kernel((points.row(i).transpose() - q).squaredNorm(), dim, h);
  }
  return std::max(sum / static_cast<double>(points.rows()), config.epsilon_floor);
}

FeatureDensity::FeatureDensity(const FeatureMatrix& features, const KdeConfig& config,
                               std::size_t projection_dim, std::uint64_t seed,
                               std::size_t reference_set_size)
    : config_(config) {
  config_.validate();
  if (features.cols() == 0) throw ParameterError("FeatureDensity: empty feature space");
  const RandomProjection projection(static_cast<std::size_t>(features.cols()),
                                    projection_dim, seed);
  projected_ = projection.apply_rows(features);
  if (config_.bandwidth_rule == BandwidthRule::kFixed) {
    bandwidth_ = config_.fixed_bandwidth;
  } else {
    bandwidth_ = scott_bandwidth(std::max<std::size_t>(reference_set_size, 1), dim(),
                                 mean_column_std(projected_), config_.epsilon_floor);
  }
}

double FeatureDensity::kernel(NodeId a, NodeId b) const {
  return gaussian_kernel((projected_.row(a) - projected_.row(b)).squaredNorm(), dim(),
                         bandwidth_);
}

double FeatureDensity::conditional(NodeId query,
                                   std::span<const NodeId> conditioning) const {
  if (conditioning.empty()) {
    throw ParameterError("conditional density: conditioning set is empty");
  }
  double sum = 0.0;
  for (NodeId x : conditioning) sum += kernel(query, x);
  return std::max(sum / static_cast<double>(conditioning.size()), config_.epsilon_floor);
}

}  // namespace cocasage
