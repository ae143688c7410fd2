// Copyright 2026 The fedleak Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fedleak/experiments.hpp"
#include "fedleak/report.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

namespace fedleak {
namespace {

using testing::TempDir;

const ReportDocument& sample_report() {
    static const ReportDocument r = [] {
        auto cfg = testing::tiny_scenario();
        cfg.class_names = {"plain", "with,comma"};
        return run_scenario(cfg);
    }();
    return r;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(ReportJson, RoundTripIsExact) {
    const auto& r = sample_report();
    const Json j = Json::parse(dump_json(to_json(r)));
    EXPECT_EQ(report_from_json(j), r);
}

TEST(ReportJson, TopLevelKeyOrder) {
    const Json j = to_json(sample_report());
    std::vector<std::string> keys;
    for (const auto& [k, v] : j.items()) keys.push_back(k);
    EXPECT_EQ(keys, (std::vector<std::string>{"format_version", "kind", "scenario", "parameters", "classes", "layers",
                                              "feature_dim", "folds", "accuracy", "confusion", "per_class",
                                              "predictions", "roster", "operation_counts", "warnings"}));
    EXPECT_EQ(j["format_version"], kReportFormatVersion);
    EXPECT_EQ(j["kind"], "binary");
}

TEST(ReportJson, MalformedReportIsConfigError) {
    Json j = to_json(sample_report());
    j.erase("roster");
    try {
        report_from_json(j);
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.field(), "<report>");
    }
    j = to_json(sample_report());
    j["format_version"] = 99;
    EXPECT_THROW(report_from_json(j), ConfigError);
}

TEST(ReportCsv, ConfusionFollowsClassOrderAndQuotes) {
    std::ostringstream out;
    write_confusion_csv(out, sample_report());
    const auto ls = lines(out.str());
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[0], "truth\\predicted,plain,\"with,comma\"");
    EXPECT_EQ(ls[1].rfind("plain,", 0), 0u);
    EXPECT_EQ(ls[2].rfind("\"with,comma\",", 0), 0u);
}

TEST(ReportCsv, PerClassAndPredictions) {
    const auto& r = sample_report();
    std::ostringstream pc;
    write_per_class_csv(pc, r);
    const auto pcl = lines(pc.str());
    ASSERT_EQ(pcl.size(), 3u);
    EXPECT_EQ(pcl[0], "label,precision,recall,f1,support,predicted,precision_undefined,recall_undefined");

    std::ostringstream pr;
    write_predictions_csv(pr, r);
    const auto prl = lines(pr.str());
    EXPECT_EQ(prl.size(), r.predictions.size() + 1);
    EXPECT_EQ(prl[0], "fold,sample,speaker_id,truth,predicted,distance:plain,\"distance:with,comma\"");
}

TEST(ReportCsv, FoldsValuesRoundTrip) {
    const auto& r = sample_report();
    std::ostringstream out;
    write_folds_csv(out, r);
    const auto ls = lines(out.str());
    ASSERT_EQ(ls.size(), r.folds.size() + 1);
    const std::string acc = ls[1].substr(ls[1].rfind(',') + 1);
    EXPECT_EQ(std::stod(acc), r.folds[0].accuracy);
}

TEST(ReportEmit, JsonAndCsvFiles) {
    TempDir dir;
    const auto json_paths = emit_report(sample_report(), dir / "run", ReportFormat::json);
    ASSERT_EQ(json_paths.size(), 1u);
    EXPECT_EQ(json_paths[0].filename(), "run.json");
    EXPECT_EQ(report_from_json(Json::parse(slurp(json_paths[0]))), sample_report());

    const auto csv_paths = emit_report(sample_report(), dir / "run", ReportFormat::csv);
    std::vector<std::string> names;
    for (const auto& p : csv_paths) names.push_back(p.filename().string());
    EXPECT_EQ(names, (std::vector<std::string>{"run.folds.csv", "run.confusion.csv", "run.confusion_proportions.csv",
                                               "run.per_class.csv", "run.predictions.csv"}));
    for (const auto& p : csv_paths) EXPECT_TRUE(std::filesystem::exists(p));

    const auto rt = emit_runtime(dir / "run", 1.5, 3);
    const Json j = Json::parse(slurp(rt));
    EXPECT_EQ(j["wall_clock_seconds"], 1.5);
    EXPECT_EQ(j["workers"], 3);
}

TEST(ReportFormatTag, ParseTags) {
    EXPECT_EQ(parse_report_format("json"), ReportFormat::json);
    EXPECT_EQ(parse_report_format("csv"), ReportFormat::csv);
    EXPECT_ERRC(parse_report_format("xml"), Errc::UnknownFormat);
}

TEST(ReportSweep, CsvRows) {
    LayerSweepReport r;
    r.scenario = testing::tiny_scenario();
    r.rows.push_back(LayerSweepRow{"list:a", 4, false, {0.5}, IntervalSummary{0.5, 0, 0.5, 0.5, 0.95, 0, true}});
    r.rows.push_back(LayerSweepRow{"all", 8, true, {1.0}, IntervalSummary{1.0, 0, 1.0, 1.0, 0.95, 0, true}});
    std::ostringstream out;
    write_sweep_csv(out, r);
    const auto ls = lines(out.str());
    ASSERT_EQ(ls.size(), 3u);
    EXPECT_EQ(ls[2], "all,8,1,1,1,0,1,1");
    const Json j = to_json(r);
    EXPECT_EQ(j["kind"], "layer_sweep");
    EXPECT_EQ(j["rows"].size(), 2u);
}

}  // namespace
}  // namespace fedleak
