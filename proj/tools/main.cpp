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

// cocasage: train, sweep, sample-size study and sampler-weight timing.
//
// Every experiment field is a flag; `--config FILE` reads the same keys
// from a flat `key = value` document (see configs/).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cocasage/error.hpp"
#include "cocasage/harness.hpp"
#include "cocasage/model.hpp"
#include "cocasage/random.hpp"

namespace {

using namespace cocasage;

struct Flags {
  std::string dataset = "sbm";
  std::string data_dir;
  std::vector<std::size_t> sbm_blocks = {100, 100, 100};
  double sbm_p_in = 0.1;
  double sbm_p_out = 0.01;
  std::size_t sbm_feature_dim = 16;
  double sbm_shift = 2.0;

  std::size_t split_per_class = 20;
  std::size_t split_train = 0;
  std::size_t split_val = 500;
  std::size_t split_test = 1000;

  std::string sampler = "uniform";
  std::vector<std::size_t> fanouts = {10, 10};
  std::string policy = "top_m";
  std::size_t mc_budget = 500;
  std::size_t projection_dim = 16;
  std::string bandwidth = "scott";
  double epsilon_floor = 1e-12;

  std::size_t hidden_dim = 128;
  double lr = 0.01;
  double l2 = 5e-4;
  std::size_t batch_size = 50;
  std::size_t epochs = 200;
  std::size_t patience = 20;

  std::string perturb = "none";
  double eta = 0.0;
  std::string placement = "both";

  std::size_t repeats = 10;
  std::uint64_t seed = 0;

  std::string format = "markdown";
  std::string output;
  bool no_timing = false;
};

void add_experiment_flags(CLI::App& app, Flags& f) {
  app.add_option("--dataset", f.dataset, "cora | citeseer | pubmed | sbm")->capture_default_str();
  app.add_option("--data-dir", f.data_dir, std::string("Dataset root (default $") + kDataDirEnv + " or ./data)");
  app.add_option("--sbm-blocks", f.sbm_blocks, "SBM block sizes")->capture_default_str();
  app.add_option("--sbm-p-in", f.sbm_p_in, "SBM intra-block edge probability")->capture_default_str();
  app.add_option("--sbm-p-out", f.sbm_p_out, "SBM inter-block edge probability")->capture_default_str();
  app.add_option("--sbm-feature-dim", f.sbm_feature_dim, "SBM feature dimension")->capture_default_str();
  app.add_option("--sbm-shift", f.sbm_shift, "SBM block-mean feature shift")->capture_default_str();

  app.add_option("--split-per-class", f.split_per_class, "Training nodes per class (0: use --split-train)")->capture_default_str();
  app.add_option("--split-train", f.split_train, "Training nodes when --split-per-class=0")->capture_default_str();
  app.add_option("--split-val", f.split_val, "Validation nodes")->capture_default_str();
  app.add_option("--split-test", f.split_test, "Test nodes")->capture_default_str();

  app.add_option("--sampler", f.sampler, "uniform | causal | coca")->capture_default_str();
  app.add_option("--fanouts", f.fanouts, "Sampled neighbors per hop (two values)")->capture_default_str();
  app.add_option("--policy", f.policy, "top_m | proportional")->capture_default_str();
  app.add_option("--mc-budget", f.mc_budget, "Coalitions per candidate before Monte Carlo")->capture_default_str();
  app.add_option("--projection-dim", f.projection_dim, "KDE random projection dimension (0: none)")->capture_default_str();
  app.add_option("--bandwidth", f.bandwidth, "scott or a fixed positive bandwidth")->capture_default_str();
  app.add_option("--epsilon-floor", f.epsilon_floor, "Density clamp")->capture_default_str();

  app.add_option("--hidden-dim", f.hidden_dim, "Hidden layer width")->capture_default_str();
  app.add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
  app.add_option("--l2", f.l2, "L2 regularization constant")->capture_default_str();
  app.add_option("--batch-size", f.batch_size, "Roots per minibatch")->capture_default_str();
  app.add_option("--epochs", f.epochs, "Maximum epochs")->capture_default_str();
  app.add_option("--patience", f.patience, "Early-stopping patience in epochs")->capture_default_str();

  app.add_option("--perturb", f.perturb, "none | xor | gauss | signflip")->capture_default_str();
  app.add_option("--eta", f.eta, "Perturbation ratio / node gate probability")->capture_default_str();
  app.add_option("--placement", f.placement, "both | train | test")->capture_default_str();

  app.add_option("--repeats", f.repeats, "Seeded repeats per report row")->capture_default_str();
  app.add_option("--seed", f.seed, "Base seed")->capture_default_str();

  app.add_option("--format", f.format, "csv | json | markdown")->capture_default_str();
  app.add_option("-o,--output", f.output, "Write the report here instead of stdout");
  app.add_flag("--no-timing", f.no_timing, "Omit wall-time columns");
}

ExperimentConfig to_config(const Flags& f) {
  ExperimentConfig c;
  c.dataset.kind = parse_dataset_kind(f.dataset);
  c.dataset.data_dir = f.data_dir;
  c.dataset.sbm = {f.sbm_blocks, f.sbm_p_in, f.sbm_p_out, f.sbm_feature_dim, f.sbm_shift};
  c.split = {f.split_per_class, f.split_train, f.split_val, f.split_test};
  c.sampler.kind = parse_sampler_kind(f.sampler);
  c.sampler.fanouts = f.fanouts;
  c.sampler.policy = parse_selection_policy(f.policy);
  c.sampler.mc_budget = f.mc_budget;
  c.sampler.projection_dim = f.projection_dim;
  if (f.bandwidth == "scott") {
    c.sampler.kde.bandwidth_rule = BandwidthRule::kScott;
  } else {
    c.sampler.kde.bandwidth_rule = BandwidthRule::kFixed;
    try {
      c.sampler.kde.fixed_bandwidth = std::stod(f.bandwidth);
    } catch (const std::exception&) {
      throw ParameterError("--bandwidth must be 'scott' or a number");
    }
  }
  c.sampler.kde.epsilon_floor = f.epsilon_floor;
  c.model = {f.hidden_dim, f.l2, f.lr, f.batch_size, f.epochs, f.patience};
  if (f.perturb != "none") {
    c.perturbation = PerturbationSpec{parse_perturbation_kind(f.perturb), f.eta,
                                      parse_placement(f.placement), 0};
  }
  c.repeats = f.repeats;
  c.base_seed = f.seed;
  c.validate();
  return c;
}

void write_output(const Flags& f, const std::string& text) {
  if (f.output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(f.output);
  if (!out) throw Error("cannot open " + f.output + " for writing");
  out << text;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

// FNV-1a over the canonical config JSON.
std::uint64_t config_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int run_train(const Flags& f, const std::string& run_root) {
  ExperimentConfig config = to_config(f);
  const std::string config_json = config.to_json();
  const auto dir = std::filesystem::path(run_root) / ("run-" + hex(config_hash(config_json)));
  std::filesystem::create_directories(dir);

  std::vector<TrainedRun> runs;
  for (std::size_t r = 0; r < config.repeats; ++r) {
    const TrainedRun& run = runs.emplace_back(train_single(config, r));
    std::ofstream(dir / ("checkpoint-" + std::to_string(r) + ".json"))
        << checkpoint_to_json(run.result.params, config_json);
    std::ofstream(dir / ("metrics-" + std::to_string(r) + ".csv"))
        << metrics_csv(run.result.history);
    std::cerr << "repeat " << r << ": test accuracy " << 100.0 * run.test_accuracy
              << "% (best epoch " << run.result.best_epoch << ")\n";
  }
  std::ofstream(dir / "config.json") << config_json << '\n';
  const ExperimentReport report{{summarize_repeats(config, runs)}};
  std::ofstream(dir / "report.json") << emit_report(report, ReportFormat::kJson);
  std::cerr << "run directory: " << dir.string() << '\n';
  write_output(f, emit_report(report, parse_report_format(f.format), !f.no_timing));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GraphSAGE node classification with uniform, causal and cooperative-causal "
               "neighborhood sampling"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key = value experiment file");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Flags flags;
  add_experiment_flags(app, flags);

  std::string run_root = "runs";
  auto* train_cmd = app.add_subcommand("train", "Train and evaluate; writes checkpoints and metrics");
  train_cmd->add_option("--run-dir", run_root, "Parent of the per-config run directory")
      ->capture_default_str();

  std::vector<double> etas = {0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> placements = {"both", "train", "test"};
  std::vector<std::string> samplers = {"uniform", "causal", "coca"};
  auto* sweep_cmd = app.add_subcommand("sweep", "Sampler x placement x eta cross product");
  sweep_cmd->add_option("--etas", etas, "Perturbation ratios")->capture_default_str();
  sweep_cmd->add_option("--placements", placements, "Placements")->capture_default_str();
  sweep_cmd->add_option("--samplers", samplers, "Samplers")->capture_default_str();

  std::vector<std::size_t> sizes = {2, 4, 6, 8, 10, 12};
  auto* study_cmd = app.add_subcommand("sample-study", "Accuracy and epoch time versus sample size");
  study_cmd->add_option("--sizes", sizes, "Sample sizes M (both hops)")->capture_default_str();

  std::vector<std::string> bench_samplers = {"uniform", "causal", "coca"};
  auto* bench_cmd = app.add_subcommand("bench-weights", "Time per-node sampler weight computation");
  bench_cmd->add_option("--samplers", bench_samplers, "Samplers")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return run_train(flags, run_root);

    const ExperimentConfig config = to_config(flags);
    const ReportFormat format = parse_report_format(flags.format);
    if (sweep_cmd->parsed()) {
      std::vector<Placement> pl;
      for (const auto& p : placements) pl.push_back(parse_placement(p));
      std::vector<SamplerKind> sk;
      for (const auto& s : samplers) sk.push_back(parse_sampler_kind(s));
      ExperimentConfig base = config;
      if (!base.perturbation) {
        // Citation features are binary; SBM features are real-valued.
        base.perturbation = PerturbationSpec{base.dataset.kind == DatasetKind::kSbm
                                                 ? PerturbationKind::kSignFlipGated
                                                 : PerturbationKind::kBernoulliXor};
      }
      write_output(flags, emit_report(run_sweep(base, etas, pl, sk), format, !flags.no_timing));
    } else if (study_cmd->parsed()) {
      write_output(flags, emit_report(run_sample_size_study(config, sizes), format,
                                      !flags.no_timing));
    } else if (bench_cmd->parsed()) {
      std::vector<SamplerKind> sk;
      for (const auto& s : bench_samplers) sk.push_back(parse_sampler_kind(s));
      std::ostringstream out;
      out << "sampler,nodes,total_seconds,us_per_node\n";
      for (const auto& t : bench_weights(config, sk)) {
        out << t.sampler << ',' << t.nodes << ',' << t.total_seconds << ','
            << t.mean_microseconds_per_node << '\n';
      }
      write_output(flags, out.str());
    }
  } catch (const Error& e) {
    std::cerr << "cocasage: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
