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

#ifndef COCASAGE_HARNESS_HPP_
#define COCASAGE_HARNESS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cocasage/graph.hpp"
#include "cocasage/model.hpp"
#include "cocasage/perturb.hpp"
#include "cocasage/sampling.hpp"

namespace cocasage {

inline constexpr const char* kDataDirEnv = "COCASAGE_DATA_DIR";

enum class DatasetKind { kCora, kCiteseer, kPubmed, kSbm };

std::string_view to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(std::string_view text);

struct DatasetSpec {
  DatasetKind kind = DatasetKind::kSbm;
  SbmParams sbm{{100, 100, 100}, 0.1, 0.01, 16, 2.0};
  // Root holding <name>/<name>.content and <name>/<name>.cites. Empty means
  // $COCASAGE_DATA_DIR, falling back to ./data.
  std::string data_dir;
};

// per_class > 0 selects the planetoid-style split (per_class training
// nodes per class); per_class == 0 draws `train` nodes uniformly.
struct SplitSpec {
  std::size_t per_class = 20;
  std::size_t train = 0;
  std::size_t val = 500;
  std::size_t test = 1000;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  SplitSpec split;
  SamplerConfig sampler;
  ModelConfig model;
  std::optional<PerturbationSpec> perturbation;  // seed is derived per repeat
  std::size_t repeats = 10;
  std::uint64_t base_seed = 0;

  void validate() const;
  // Canonical JSON of every field; the basis of run-directory hashes.
  std::string to_json() const;
};

struct ReportRow {
  std::string sampler;
  std::string placement;  // "none" when unperturbed
  double eta = 0.0;
  std::size_t sample_size = 0;  // fanout of the first hop
  double accuracy_mean = 0.0;   // percent
  double accuracy_std = 0.0;    // percent, sample standard deviation
  double wall_time_per_epoch = 0.0;  // seconds

  bool operator==(const ReportRow&) const = default;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;

  bool operator==(const ExperimentReport&) const = default;
};

enum class ReportFormat { kCsv, kJson, kMarkdown };
ReportFormat parse_report_format(std::string_view text);

std::filesystem::path resolve_data_dir(const DatasetSpec& spec);

// Loads a citation dataset (throws DatasetError with fetch instructions
// when the files are missing) or generates the SBM with `seed`.
Graph load_dataset(const DatasetSpec& spec, std::uint64_t seed);

Split make_experiment_split(const Graph& graph, const SplitSpec& spec, std::uint64_t seed);

struct TrainedRun {
  TrainResult result;
  double test_accuracy = 0.0;  // fraction in [0, 1]
  double seconds_per_epoch = 0.0;
};

// Repeat `repeat` of an experiment: seed derive_seed(base_seed, repeat),
// perturbed views, training, and test-split evaluation.
TrainedRun train_single(const ExperimentConfig& config, std::size_t repeat);

// Report row for completed repeats of `config` (mean and sample standard
// deviation of test accuracy in percent, median seconds per epoch).
ReportRow summarize_repeats(const ExperimentConfig& config, std::span<const TrainedRun> runs);

// One row: repeats with seeds derive_seed(base_seed, r), each building
// perturbed views, training and evaluating on the test split.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Cross product, rows ordered by (sampler, placement, eta).
ExperimentReport run_sweep(const ExperimentConfig& config, std::span<const double> etas,
                           std::span<const Placement> placements,
                           std::span<const SamplerKind> samplers);

// One row per sample size M (fanouts {M, M}).
ExperimentReport run_sample_size_study(const ExperimentConfig& config,
                                       std::span<const std::size_t> sample_sizes);

// Throws ParameterError on an empty report. With include_timing = false
// the wall-time column is omitted, which makes the text a deterministic
// function of the config.
std::string emit_report(const ExperimentReport& report, ReportFormat format,
                        bool include_timing = true);
ExperimentReport parse_report_json(std::string_view text);

struct WeightTiming {
  std::string sampler;
  std::size_t nodes = 0;
  double total_seconds = 0.0;
  double mean_microseconds_per_node = 0.0;
};

// Times the weight computation of each sampler over every node of the
// (unperturbed) dataset at fanout config.sampler.fanouts[0].
std::vector<WeightTiming> bench_weights(const ExperimentConfig& config,
                                        std::span<const SamplerKind> samplers);

}  // namespace cocasage

#endif  // COCASAGE_HARNESS_HPP_
