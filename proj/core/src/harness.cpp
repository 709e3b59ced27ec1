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

#include "cocasage/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "cocasage/error.hpp"
#include "cocasage/random.hpp"
#include <nlohmann/json.hpp>

namespace cocasage {

std::string_view to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kCora: return "cora";
    case DatasetKind::kCiteseer: return "citeseer";
    case DatasetKind::kPubmed: return "pubmed";
    case DatasetKind::kSbm: return "sbm";
  }
  return "?";
}

DatasetKind parse_dataset_kind(std::string_view text) {
  if (text == "cora") return DatasetKind::kCora;
  if (text == "citeseer") return DatasetKind::kCiteseer;
  if (text == "pubmed") return DatasetKind::kPubmed;
  if (text == "sbm") return DatasetKind::kSbm;
  throw ParameterError("unknown dataset '" + std::string(text) +
                       "' (expected cora, citeseer, pubmed or sbm)");
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  throw ParameterError("unknown report format '" + std::string(text) + "'");
}

void ExperimentConfig::validate() const {
  if (repeats == 0) throw ParameterError("repeats must be >= 1");
  sampler.validate();
  model.validate();
  if (sampler.fanouts.size() != 2) throw ParameterError("exactly two fanouts are required");
  if (perturbation) perturbation->validate();
}

std::string ExperimentConfig::to_json() const {
  nlohmann::ordered_json j;
  j["dataset"] = {{"kind", to_string(dataset.kind)},
                  {"sbm_blocks", dataset.sbm.block_sizes},
                  {"sbm_p_in", dataset.sbm.p_in},
                  {"sbm_p_out", dataset.sbm.p_out},
                  {"sbm_feature_dim", dataset.sbm.feature_dim},
                  {"sbm_shift", dataset.sbm.feature_shift}};
  j["split"] = {{"per_class", split.per_class},
                {"train", split.train},
                {"val", split.val},
                {"test", split.test}};
  j["sampler"] = {{"kind", to_string(sampler.kind)},
                  {"fanouts", sampler.fanouts},
                  {"policy", to_string(sampler.policy)},
                  {"mc_budget", sampler.mc_budget},
                  {"projection_dim", sampler.projection_dim},
                  {"bandwidth_rule",
                   sampler.kde.bandwidth_rule == BandwidthRule::kScott ? "scott" : "fixed"},
                  {"fixed_bandwidth", sampler.kde.fixed_bandwidth},
                  {"epsilon_floor", sampler.kde.epsilon_floor}};
  j["model"] = {{"hidden_dim", model.hidden_dim},
                {"l2_lambda", model.l2_lambda},
                {"learning_rate", model.learning_rate},
                {"batch_size", model.batch_size},
                {"max_epochs", model.max_epochs},
                {"patience", model.patience}};
  if (perturbation) {
    j["perturbation"] = {{"kind", to_string(perturbation->kind)},
                         {"intensity", perturbation->intensity},
                         {"placement", to_string(perturbation->placement)}};
  } else {
    j["perturbation"] = nullptr;
  }
  j["repeats"] = repeats;
  j["base_seed"] = base_seed;
  return j.dump();
}

std::filesystem::path resolve_data_dir(const DatasetSpec& spec) {
  if (!spec.data_dir.empty()) return spec.data_dir;
  if (const char* env = std::getenv(kDataDirEnv); env != nullptr && *env != '\0') {
    return env;
  }
  return "data";
}

Graph load_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.kind == DatasetKind::kSbm) return generate_sbm(spec.sbm, seed);
  const std::string name(to_string(spec.kind));
  const auto dir = resolve_data_dir(spec) / name;
  const auto content_path = dir / (name + ".content");
  const auto cites_path = dir / (name + ".cites");
  std::ifstream content(content_path);
  std::ifstream cites(cites_path);
  if (!content || !cites) {
    throw DatasetError("dataset '" + name + "' not found: expected " +
                       content_path.string() + " and " + cites_path.string() +
                       ". Run scripts/fetch_datasets.sh or point " + kDataDirEnv +
                       " at a directory containing " + name + "/.");
  }
  LoadOptions options;
  options.require_binary = spec.kind != DatasetKind::kPubmed;
  return load_citation_dataset(content, cites, options).graph;
}

Split make_experiment_split(const Graph& graph, const SplitSpec& spec, std::uint64_t seed) {
  if (spec.per_class > 0) {
    return make_per_class_split(graph, spec.per_class, spec.val, spec.test, seed);
  }
  return make_split(graph, spec.train, spec.val, spec.test, seed);
}

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

// Median per-epoch time after a two-epoch warmup (all epochs when fewer
// than three ran).
double epoch_seconds(const std::vector<EpochMetrics>& history) {
  std::vector<double> times;
  const std::size_t skip = history.size() > 2 ? 2 : 0;
  for (std::size_t i = skip; i < history.size(); ++i) times.push_back(history[i].train_seconds);
  return median(std::move(times));
}

TrainedRun run_repeat(const ExperimentConfig& config, const Graph* shared_graph,
                      std::size_t repeat) {
  const std::uint64_t seed = derive_seed(config.base_seed, {repeat});
  const Graph graph = shared_graph != nullptr
                          ? *shared_graph
                          : load_dataset(config.dataset, derive_seed(seed, {0x67726170ULL}));
  const Split split = make_experiment_split(graph, config.split, derive_seed(seed, {0x73706cULL}));

  std::optional<PerturbedViews> views;
  if (config.perturbation) {
    PerturbationSpec spec = *config.perturbation;
    spec.seed = derive_seed(seed, {0x70657274ULL});
    views = apply_placement(graph, split, spec);
  }
  const Graph& train_view = views ? views->train_view : graph;
  const Graph& test_view = views ? views->test_view : graph;

  TrainedRun run;
  run.result = train(train_view, test_view, split, config.sampler, config.model, seed);
  run.test_accuracy = split.test.empty()
                          ? 0.0
                          : evaluate(test_view, run.result.params, split.test,
                                     config.sampler, derive_seed(seed, {0x74657374ULL}));
  run.seconds_per_epoch = epoch_seconds(run.result.history);
  return run;
}

ReportRow run_row(const ExperimentConfig& config, const Graph* shared_graph) {
  config.validate();
  std::vector<TrainedRun> runs;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    runs.push_back(run_repeat(config, shared_graph, r));
  }
  return summarize_repeats(config, runs);
}

std::optional<Graph> shared_dataset(const ExperimentConfig& config) {
  if (config.dataset.kind == DatasetKind::kSbm) return std::nullopt;
  return load_dataset(config.dataset, 0);
}

}  // namespace

ReportRow summarize_repeats(const ExperimentConfig& config, std::span<const TrainedRun> runs) {
  if (runs.empty()) throw ParameterError("summarize_repeats: no runs");
  std::vector<double> accuracies;
  std::vector<double> seconds;
  for (const auto& run : runs) {
    accuracies.push_back(100.0 * run.test_accuracy);
    seconds.push_back(run.seconds_per_epoch);
  }
  const double n = static_cast<double>(accuracies.size());
  const double mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
  double var = 0.0;
  if (accuracies.size() > 1) {
    for (double a : accuracies) var += (a - mean) * (a - mean);
    var /= n - 1.0;
  }
  ReportRow row;
  row.sampler = std::string(to_string(config.sampler.kind));
  row.placement = config.perturbation
                      ? std::string(to_string(config.perturbation->placement))
                      : "none";
  row.eta = config.perturbation ? config.perturbation->intensity : 0.0;
  row.sample_size = config.sampler.fanouts.front();
  row.accuracy_mean = mean;
  row.accuracy_std = std::sqrt(var);
  row.wall_time_per_epoch = median(std::move(seconds));
  return row;
}

TrainedRun train_single(const ExperimentConfig& config, std::size_t repeat) {
  config.validate();
  const auto graph = shared_dataset(config);
  return run_repeat(config, graph ? &*graph : nullptr, repeat);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto graph = shared_dataset(config);
  return {{run_row(config, graph ? &*graph : nullptr)}};
}

ExperimentReport run_sweep(const ExperimentConfig& config, std::span<const double> etas,
                           std::span<const Placement> placements,
                           std::span<const SamplerKind> samplers) {
  if (etas.empty() || placements.empty() || samplers.empty()) {
    throw ParameterError("run_sweep: every axis needs at least one value");
  }
  config.validate();
  const PerturbationSpec base =
      config.perturbation.value_or(PerturbationSpec{PerturbationKind::kBernoulliXor});
  const auto graph = shared_dataset(config);
  ExperimentReport report;
  for (SamplerKind sampler : samplers) {
    for (Placement placement : placements) {
      for (double eta : etas) {
        ExperimentConfig point = config;
        point.sampler.kind = sampler;
        point.perturbation = base;
        point.perturbation->placement = placement;
        point.perturbation->intensity = eta;
        report.rows.push_back(run_row(point, graph ? &*graph : nullptr));
      }
    }
  }
  return report;
}

ExperimentReport run_sample_size_study(const ExperimentConfig& config,
                                       std::span<const std::size_t> sample_sizes) {
  if (sample_sizes.empty()) throw ParameterError("run_sample_size_study: no sizes");
  for (std::size_t m : sample_sizes) {
    if (m == 0) throw ParameterError("sample sizes must be >= 1");
  }
  config.validate();
  const auto graph = shared_dataset(config);
  ExperimentReport report;
  for (std::size_t m : sample_sizes) {
    ExperimentConfig point = config;
    point.sampler.fanouts = {m, m};
    report.rows.push_back(run_row(point, graph ? &*graph : nullptr));
  }
  return report;
}

namespace {

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string format_eta(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", eta);
  return buf;
}

}  // namespace

std::string emit_report(const ExperimentReport& report, ReportFormat format,
                        bool include_timing) {
  if (report.rows.empty()) throw ParameterError("emit_report: report has no rows");
  std::ostringstream out;
  switch (format) {
    case ReportFormat::kCsv: {
      out << "sampler,placement,eta,sample_size,accuracy_mean,accuracy_std";
      if (include_timing) out << ",wall_time_per_epoch";
      out << '\n';
      for (const auto& r : report.rows) {
        out << r.sampler << ',' << r.placement << ',' << format_eta(r.eta) << ','
            << r.sample_size << ',' << format_fixed(r.accuracy_mean, 4) << ','
            << format_fixed(r.accuracy_std, 4);
        if (include_timing) out << ',' << format_fixed(r.wall_time_per_epoch, 6);
        out << '\n';
      }
      break;
    }
    case ReportFormat::kJson: {
      nlohmann::ordered_json rows = nlohmann::ordered_json::array();
      for (const auto& r : report.rows) {
        nlohmann::ordered_json row = {{"sampler", r.sampler},
                                      {"placement", r.placement},
                                      {"eta", r.eta},
                                      {"sample_size", r.sample_size},
                                      {"accuracy_mean", r.accuracy_mean},
                                      {"accuracy_std", r.accuracy_std}};
        if (include_timing) row["wall_time_per_epoch"] = r.wall_time_per_epoch;
        rows.push_back(std::move(row));
      }
      out << nlohmann::ordered_json{{"rows", std::move(rows)}}.dump(2) << '\n';
      break;
    }
    case ReportFormat::kMarkdown: {
      // Models down the side, perturbation ratios across, one block per
      // placement: "mean±std" cells in percent.
      std::vector<double> etas;
      std::vector<std::string> placements;
      for (const auto& r : report.rows) {
        if (std::find(etas.begin(), etas.end(), r.eta) == etas.end()) etas.push_back(r.eta);
        if (std::find(placements.begin(), placements.end(), r.placement) == placements.end()) {
          placements.push_back(r.placement);
        }
      }
      std::sort(etas.begin(), etas.end());
      for (std::size_t b = 0; b < placements.size(); ++b) {
        if (b > 0) out << '\n';
        out << "Placement: " << placements[b] << "\n\n| Model | M |";
        for (double eta : etas) out << ' ' << format_eta(eta) << " |";
        out << "\n|---|---|";
        for (std::size_t i = 0; i < etas.size(); ++i) out << "---|";
        out << '\n';
        std::vector<std::pair<std::string, std::size_t>> keys;
        for (const auto& r : report.rows) {
          if (r.placement != placements[b]) continue;
          const std::pair<std::string, std::size_t> key{r.sampler, r.sample_size};
          if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
        }
        for (const auto& [sampler, m] : keys) {
          out << "| " << sampler << " | " << m << " |";
          for (double eta : etas) {
            const auto it = std::find_if(report.rows.begin(), report.rows.end(),
                                         [&](const ReportRow& r) {
                                           return r.placement == placements[b] &&
                                                  r.sampler == sampler &&
                                                  r.sample_size == m && r.eta == eta;
                                         });
            out << ' '
                << (it == report.rows.end()
                        ? std::string("-")
                        : format_fixed(it->accuracy_mean, 1) + "±" +
                              format_fixed(it->accuracy_std, 1))
                << " |";
          }
          out << '\n';
        }
      }
      break;
    }
  }
  return out.str();
}

ExperimentReport parse_report_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    ExperimentReport report;
    for (const auto& row : j.at("rows")) {
      ReportRow r;
      r.sampler = row.at("sampler").get<std::string>();
      r.placement = row.at("placement").get<std::string>();
      r.eta = row.at("eta").get<double>();
      r.sample_size = row.at("sample_size").get<std::size_t>();
      r.accuracy_mean = row.at("accuracy_mean").get<double>();
      r.accuracy_std = row.at("accuracy_std").get<double>();
      r.wall_time_per_epoch = row.value("wall_time_per_epoch", 0.0);
      report.rows.push_back(std::move(r));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report JSON: ") + e.what());
  }
}

std::vector<WeightTiming> bench_weights(const ExperimentConfig& config,
                                        std::span<const SamplerKind> samplers) {
  config.sampler.validate();
  const Graph graph = load_dataset(config.dataset, derive_seed(config.base_seed, {0}));
  const std::size_t m = config.sampler.fanouts.front();
  std::vector<WeightTiming> out;
  for (SamplerKind kind : samplers) {
    SamplerConfig sc = config.sampler;
    sc.kind = kind;
    NeighborSampler sampler(graph, sc, config.base_seed);
    const auto start = std::chrono::steady_clock::now();
    for (NodeId v = 0; v < graph.num_nodes(); ++v) sampler.weights(v, m);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back({std::string(to_string(kind)), graph.num_nodes(), seconds,
                   1e6 * seconds / static_cast<double>(graph.num_nodes())});
  }
  return out;
}

}  // namespace cocasage
