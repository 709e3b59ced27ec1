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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cocasage/error.hpp"
#include "gtest/gtest.h"

namespace cocasage {
namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.dataset.sbm = {{20, 20}, 0.2, 0.02, 4, 2.0};
  c.split = {5, 0, 10, 10};
  c.sampler.fanouts = {3, 3};
  c.model.hidden_dim = 8;
  c.model.max_epochs = 3;
  c.repeats = 2;
  c.base_seed = 7;
  return c;
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

TEST(ParseTest, DatasetAndFormatNames) {
  for (auto k : {DatasetKind::kCora, DatasetKind::kCiteseer, DatasetKind::kPubmed,
                 DatasetKind::kSbm}) {
    EXPECT_EQ(parse_dataset_kind(to_string(k)), k);
  }
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_EQ(parse_report_format("json"), ReportFormat::kJson);
  EXPECT_EQ(parse_report_format("markdown"), ReportFormat::kMarkdown);
  EXPECT_THROW(parse_dataset_kind("reddit"), ParameterError);
  EXPECT_THROW(parse_report_format("xml"), ParameterError);
}

TEST(ConfigTest, ValidationAndCanonicalJson) {
  ExperimentConfig c = tiny_config();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.to_json(), tiny_config().to_json());
  c.base_seed = 8;
  EXPECT_NE(c.to_json(), tiny_config().to_json());
  c.sampler.fanouts = {3};
  EXPECT_THROW(c.validate(), ParameterError);
  c = tiny_config();
  c.repeats = 0;
  EXPECT_THROW(c.validate(), ParameterError);
  c = tiny_config();
  c.perturbation = PerturbationSpec{PerturbationKind::kSignFlipGated, 1.5};
  EXPECT_THROW(c.validate(), ParameterError);
}

TEST(DatasetTest, MissingCitationFilesExplainHowToFetch) {
  DatasetSpec spec;
  spec.kind = DatasetKind::kCora;
  spec.data_dir = (std::filesystem::temp_directory_path() / "cocasage-no-such-dir").string();
  try {
    load_dataset(spec, 0);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("cora.content"), std::string::npos) << msg;
    EXPECT_NE(msg.find(kDataDirEnv), std::string::npos) << msg;
  }
}

TEST(DatasetTest, LoadsCitationFilesFromDataDir) {
  const auto root = std::filesystem::temp_directory_path() / "cocasage-harness-test";
  std::filesystem::create_directories(root / "citeseer");
  {
    std::ofstream content(root / "citeseer" / "citeseer.content");
    std::ofstream cites(root / "citeseer" / "citeseer.cites");
    content << "a\t1\t0\tx\nb\t0\t1\ty\nc\t1\t1\tx\n";
    cites << "a\tb\nc\tb\n";
  }
  DatasetSpec spec;
  spec.kind = DatasetKind::kCiteseer;
  spec.data_dir = root.string();
  const Graph g = load_dataset(spec, 0);
  EXPECT_EQ(g.num_nodes(), 3u);
  EXPECT_EQ(g.num_edges(), 2u);
  std::filesystem::remove_all(root);
}

TEST(SummarizeTest, MeanSampleStdAndMedianTime) {
  ExperimentConfig c = tiny_config();
  c.perturbation = PerturbationSpec{PerturbationKind::kSignFlipGated, 0.25,
                                    Placement::kTestOnly, 0};
  std::vector<TrainedRun> runs(3);
  runs[0].test_accuracy = 0.8;
  runs[1].test_accuracy = 0.9;
  runs[2].test_accuracy = 1.0;
  runs[0].seconds_per_epoch = 3.0;
  runs[1].seconds_per_epoch = 1.0;
  runs[2].seconds_per_epoch = 2.0;
  const ReportRow row = summarize_repeats(c, runs);
  EXPECT_NEAR(row.accuracy_mean, 90.0, 1e-12);
  EXPECT_NEAR(row.accuracy_std, 10.0, 1e-12);
  EXPECT_EQ(row.wall_time_per_epoch, 2.0);
  EXPECT_EQ(row.sampler, "uniform");
  EXPECT_EQ(row.placement, "test");
  EXPECT_EQ(row.eta, 0.25);
  EXPECT_EQ(row.sample_size, 3u);
  EXPECT_EQ(summarize_repeats(c, std::span(runs).first(1)).accuracy_std, 0.0);
  EXPECT_THROW(summarize_repeats(c, {}), ParameterError);
}

TEST(ExperimentTest, RowAggregatesTheIndividualRepeats) {
  const ExperimentConfig c = tiny_config();
  const auto report = run_experiment(c);
  ASSERT_EQ(report.rows.size(), 1u);
  std::vector<TrainedRun> runs;
  for (std::size_t r = 0; r < c.repeats; ++r) runs.push_back(train_single(c, r));
  const ReportRow expected = summarize_repeats(c, runs);
  EXPECT_EQ(report.rows[0].accuracy_mean, expected.accuracy_mean);
  EXPECT_EQ(report.rows[0].accuracy_std, expected.accuracy_std);
  EXPECT_EQ(report.rows[0].placement, "none");
  EXPECT_GE(report.rows[0].accuracy_mean, 0.0);
  EXPECT_LE(report.rows[0].accuracy_mean, 100.0);
}

TEST(ExperimentTest, ReportIsDeterministicWithoutTiming) {
  ExperimentConfig c = tiny_config();
  c.sampler.kind = SamplerKind::kCoca;
  c.perturbation = PerturbationSpec{PerturbationKind::kSignFlipGated, 0.3};
  const auto a = emit_report(run_experiment(c), ReportFormat::kCsv, false);
  const auto b = emit_report(run_experiment(c), ReportFormat::kCsv, false);
  EXPECT_EQ(a, b);
  c.base_seed = 8;
  EXPECT_NE(emit_report(run_experiment(c), ReportFormat::kCsv, false), a);
}

TEST(SweepTest, CrossProductInOrder) {
  ExperimentConfig c = tiny_config();
  c.repeats = 1;
  c.model.max_epochs = 1;
  c.perturbation = PerturbationSpec{PerturbationKind::kSignFlipGated};
  const std::vector<double> etas = {0.0, 0.1, 0.2, 0.3, 0.4};
  const std::vector<Placement> placements = {Placement::kBoth, Placement::kTrainOnly,
                                             Placement::kTestOnly};
  const std::vector<SamplerKind> samplers = {SamplerKind::kUniform, SamplerKind::kCausal,
                                             SamplerKind::kCoca};
  const auto report = run_sweep(c, etas, placements, samplers);
  ASSERT_EQ(report.rows.size(), 45u);
  EXPECT_EQ(count_lines(emit_report(report, ReportFormat::kCsv)), 46u);
  std::size_t k = 0;
  for (auto s : samplers) {
    for (auto p : placements) {
      for (double eta : etas) {
        EXPECT_EQ(report.rows[k].sampler, to_string(s));
        EXPECT_EQ(report.rows[k].placement, to_string(p));
        EXPECT_EQ(report.rows[k].eta, eta);
        ++k;
      }
    }
  }
  EXPECT_THROW(run_sweep(c, {}, placements, samplers), ParameterError);
}

TEST(SampleStudyTest, OneRowPerSize) {
  ExperimentConfig c = tiny_config();
  c.repeats = 1;
  const std::vector<std::size_t> sizes = {1, 2, 5};
  const auto report = run_sample_size_study(c, sizes);
  ASSERT_EQ(report.rows.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(report.rows[i].sample_size, sizes[i]);
  EXPECT_THROW(run_sample_size_study(c, std::vector<std::size_t>{0}), ParameterError);
}

ExperimentReport handmade_report() {
  return {{{"uniform", "both", 0.1, 10, 81.25, 1.5, 0.0123},
           {"coca", "both", 0.1, 10, 83.0, 0.75, 0.5},
           {"coca", "train", 0.3, 10, 70.123456789, 2.0, 1.0 / 3.0}}};
}

TEST(EmitTest, CsvHeaderAndPrecision) {
  const auto csv = emit_report(handmade_report(), ReportFormat::kCsv);
  std::istringstream lines(csv);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header,
            "sampler,placement,eta,sample_size,accuracy_mean,accuracy_std,wall_time_per_epoch");
  EXPECT_EQ(first, "uniform,both,0.1,10,81.2500,1.5000,0.012300");
  const auto untimed = emit_report(handmade_report(), ReportFormat::kCsv, false);
  EXPECT_EQ(untimed.find("wall_time"), std::string::npos);
  EXPECT_THROW(emit_report({}, ReportFormat::kCsv), ParameterError);
}

TEST(EmitTest, JsonRoundTrip) {
  const auto report = handmade_report();
  EXPECT_EQ(parse_report_json(emit_report(report, ReportFormat::kJson)), report);
  EXPECT_THROW(parse_report_json("{\"rows\": [{}]}"), FormatError);
}

TEST(EmitTest, MarkdownPivotsPlacementsAndEtas) {
  const auto md = emit_report(handmade_report(), ReportFormat::kMarkdown);
  EXPECT_NE(md.find("Placement: both"), std::string::npos) << md;
  EXPECT_NE(md.find("Placement: train"), std::string::npos) << md;
  EXPECT_NE(md.find("| Model | M | 0.1 | 0.3 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| coca | 10 | 83.0±0.8 | - |"), std::string::npos) << md;
}

TEST(BenchWeightsTest, OneTimingPerSampler) {
  ExperimentConfig c = tiny_config();
  const std::vector<SamplerKind> samplers = {SamplerKind::kUniform, SamplerKind::kCoca};
  const auto timings = bench_weights(c, samplers);
  ASSERT_EQ(timings.size(), 2u);
  EXPECT_EQ(timings[1].sampler, "coca");
  EXPECT_EQ(timings[0].nodes, 40u);
  EXPECT_GE(timings[1].total_seconds, 0.0);
}

}  // namespace
}  // namespace cocasage
