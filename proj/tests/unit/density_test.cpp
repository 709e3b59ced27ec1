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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "cocasage/error.hpp"
#include "gtest/gtest.h"
#include "test_support.hpp"

namespace cocasage {
namespace {

std::vector<double> row(const FeatureMatrix& x, Eigen::Index r) {
  return {x.row(r).data(), x.row(r).data() + x.cols()};
}

TEST(ScottTest, KnownValues) {
  EXPECT_NEAR(scott_bandwidth(16, 1, 1.0), std::pow(16.0, -0.2), 1e-15);
  EXPECT_NEAR(scott_bandwidth(16, 1, 1.0), 0.574349, 1e-6);
  EXPECT_NEAR(scott_bandwidth(10, 16, 2.0), 2.0 * std::pow(10.0, -0.05), 1e-15);
  EXPECT_DOUBLE_EQ(scott_bandwidth(1, 3, 0.7), 0.7);
}

TEST(ScottTest, FloorAppliesToDegenerateSpread) {
  EXPECT_DOUBLE_EQ(scott_bandwidth(5, 2, 0.0), 1e-12);
  EXPECT_DOUBLE_EQ(scott_bandwidth(5, 2, 0.0, 1e-6), 1e-6);
  EXPECT_THROW(scott_bandwidth(0, 2, 1.0), ParameterError);
  EXPECT_THROW(scott_bandwidth(3, 0, 1.0), ParameterError);
}

TEST(KernelTest, PeakValueInOneDimension) {
  EXPECT_NEAR(gaussian_kernel(0.0, 1, 1.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(gaussian_kernel(1.0, 1, 1.0),
              std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi), 1e-15);
}

TEST(KernelTest, IntegratesToOneInOneDimension) {
  for (double h : {0.3, 1.0, 2.5}) {
    const double step = 1e-3;
    double sum = 0.0;
    for (double u = -12.0 * h; u <= 12.0 * h; u += step) sum += gaussian_kernel(u * u, 1, h);
    EXPECT_NEAR(sum * step, 1.0, 1e-6) << "h = " << h;
  }
}

TEST(KernelTest, SeparableAcrossDimensions) {
  const double h = 0.8;
  const double a = 0.3, b = -1.1, c = 0.5;
  const double product = gaussian_kernel(a * a, 1, h) * gaussian_kernel(b * b, 1, h) *
                         gaussian_kernel(c * c, 1, h);
  EXPECT_NEAR(gaussian_kernel(a * a + b * b + c * c, 3, h), product, 1e-15);
}

TEST(ConditionalDensityTest, MatchesLongHandSumWithFixedBandwidth) {
  const FeatureMatrix x = testing::random_features(6, 3, 17);
  KdeConfig config;
  config.bandwidth_rule = BandwidthRule::kFixed;
  config.fixed_bandwidth = 0.9;
  std::vector<std::vector<double>> set;
  for (Eigen::Index r = 1; r < 6; ++r) set.push_back(row(x, r));
  const double got = conditional_density(row(x, 0), set, config, 0, 1);
  EXPECT_NEAR(got, testing::oracle_density(x, 0, {1, 2, 3, 4, 5}, 0.9), 1e-15);
}

TEST(ConditionalDensityTest, ScottBandwidthFromConditioningSet) {
  // Two points at -1 and +1 in 1-d: sample std sqrt(2), n = 2.
  KdeConfig config;
  const std::vector<std::vector<double>> set = {{-1.0}, {1.0}};
  const double h = std::sqrt(2.0) * std::pow(2.0, -0.2);
  const double expected = 0.5 * (gaussian_kernel(1.0, 1, h) + gaussian_kernel(1.0, 1, h));
  EXPECT_NEAR(conditional_density(std::vector<double>{0.0}, set, config, 0, 3), expected,
              1e-15);
}

TEST(ConditionalDensityTest, FarQueryIsClampedAtFloor) {
  KdeConfig config;
  config.bandwidth_rule = BandwidthRule::kFixed;
  config.fixed_bandwidth = 0.1;
  const std::vector<std::vector<double>> set = {{0.0, 0.0}};
  EXPECT_DOUBLE_EQ(conditional_density(std::vector<double>{50.0, 50.0}, set, config, 0, 0),
                   1e-12);
  EXPECT_THROW(conditional_density(std::vector<double>{0.0}, {}, config, 0, 0),
               ParameterError);
  EXPECT_THROW(
      conditional_density(std::vector<double>{0.0}, set, config, 0, 0), ParameterError);
}

TEST(ConditionalDensityTest, NonnegativeAndPermutationInvariant) {
  const FeatureMatrix x = testing::random_features(8, 4, 5);
  KdeConfig config;
  std::vector<std::vector<double>> set;
  for (Eigen::Index r = 1; r < 8; ++r) set.push_back(row(x, r));
  const double base = conditional_density(row(x, 0), set, config, 2, 9);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(set.begin(), set.end(), rng);
    const double p = conditional_density(row(x, 0), set, config, 2, 9);
    EXPECT_GE(p, 1e-12);
    EXPECT_NEAR(p, base, 1e-13 * base);
  }
}

TEST(ProjectionTest, IdentityWhenDimensionIsZero) {
  const RandomProjection p(3, 0, 4);
  EXPECT_TRUE(p.is_identity());
  EXPECT_EQ(p.output_dim(), 3u);
  const std::vector<double> v = {1.0, -2.0, 3.0};
  const Eigen::VectorXd out = p.apply(v);
  EXPECT_EQ(out(1), -2.0);
}

TEST(ProjectionTest, SeededAndApproximatelyNormPreserving) {
  const std::size_t in = 200, out = 64;
  const RandomProjection a(in, out, 7);
  const RandomProjection b(in, out, 7);
  const FeatureMatrix x = testing::random_features(50, in, 3);
  const FeatureMatrix pa = a.apply_rows(x);
  EXPECT_TRUE(pa == b.apply_rows(x));
  EXPECT_FALSE(pa == RandomProjection(in, out, 8).apply_rows(x));
  // E|Rx|^2 = |x|^2 with entries N(0, 1/k).
  double ratio = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    ratio += pa.row(r).squaredNorm() / x.row(r).squaredNorm();
  }
  EXPECT_NEAR(ratio / 50.0, 1.0, 0.1);
  EXPECT_THROW(a.apply(std::vector<double>(3, 0.0)), ParameterError);
}

TEST(FeatureDensityTest, ConditionalMatchesOracle) {
  const FeatureMatrix x = testing::random_features(10, 3, 23);
  KdeConfig config;
  config.bandwidth_rule = BandwidthRule::kFixed;
  config.fixed_bandwidth = 1.3;
  const FeatureDensity density(x, config, 0, 0, 4);
  EXPECT_EQ(density.bandwidth(), 1.3);
  const std::vector<NodeId> set = {2, 5, 7};
  EXPECT_NEAR(density.conditional(0, set), testing::oracle_density(x, 0, set, 1.3), 1e-15);
  EXPECT_NEAR(density.kernel(3, 4), testing::oracle_kernel(x, 3, 4, 1.3), 1e-15);
  EXPECT_THROW(density.conditional(0, {}), ParameterError);
}

TEST(FeatureDensityTest, ScottUsesViewStdAndReferenceSize) {
  FeatureMatrix x(4, 1);
  x << 0.0, 1.0, 2.0, 3.0;
  const FeatureDensity density(x, KdeConfig{}, 0, 0, 6);
  const double std_avg = std::sqrt(5.0 / 3.0);
  EXPECT_NEAR(density.bandwidth(), std_avg * std::pow(6.0, -0.2), 1e-15);
}

TEST(FeatureDensityTest, ConstantFeaturesFallBackToFloorBandwidth) {
  const FeatureDensity density(FeatureMatrix::Ones(5, 2), KdeConfig{}, 0, 0, 3);
  EXPECT_DOUBLE_EQ(density.bandwidth(), 1e-12);
}

TEST(KdeConfigTest, RejectsNonPositiveValues) {
  KdeConfig config;
  config.epsilon_floor = 0.0;
  EXPECT_THROW(config.validate(), ParameterError);
  config = KdeConfig{};
  config.fixed_bandwidth = -1.0;
  EXPECT_THROW(config.validate(), ParameterError);
}

}  // namespace
}  // namespace cocasage
