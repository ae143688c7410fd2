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

#pragma once

/// Report documents and their JSON / CSV emission.
///
/// JSON numbers use the shortest representation that parses back to the same
/// double, so reparsing is lossless; CSV numbers use 17 significant digits.
/// Wall-clock runtime is kept out of the documents themselves (it would break
/// byte-identical reruns) and written to a "<stem>.runtime.json" sidecar.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedleak/eval.hpp"
#include "fedleak/scenario.hpp"

namespace fedleak {

inline constexpr int kReportFormatVersion = 1;

enum class ReportFormat { json, csv };

/// Throws Error(UnknownFormat).
ReportFormat parse_report_format(std::string_view tag);

struct FoldRecord {
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    double accuracy = 0.0;
    ConfusionMatrix confusion;

    friend bool operator==(const FoldRecord&, const FoldRecord&) = default;
};

struct PredictionRecord {
    std::size_t fold = 0;
    std::size_t sample = 0;
    std::string speaker_id;
    std::string truth;
    std::string predicted;
    /// (class, distance) for every candidate class of the fold's model, in
    /// model class order.
    std::vector<std::pair<std::string, double>> distances;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

/// One attacked client model: which speaker and utterance produced it and
/// where it was used.
struct RosterEntry {
    std::size_t sample = 0;
    std::string speaker_id;
    std::string label;
    std::uint32_t value = 0;
    std::uint64_t seed = 0;
    std::size_t utterance = 0;
    /// "shadow" or "target" under the designated scheme, else "pool".
    std::string role;
    /// Folds in which this sample was a test sample.
    std::vector<std::size_t> test_folds;

    friend bool operator==(const RosterEntry&, const RosterEntry&) = default;
};

/// Deterministic work counters.
struct OperationCounts {
    std::uint64_t pretrain_steps = 0;
    std::uint64_t defense_steps = 0;
    std::uint64_t client_finetunes = 0;
    std::uint64_t finetune_steps = 0;
    std::uint64_t feature_extractions = 0;
    std::uint64_t distance_evaluations = 0;

    friend bool operator==(const OperationCounts&, const OperationCounts&) = default;
};

struct ReportDocument {
    std::string kind;
    ScenarioConfig scenario;
    /// Run arguments that are not part of the scenario (unseen classes,
    /// defense counts).
    Json parameters = Json::object();
    std::vector<std::string> classes;
    std::string layers;
    std::size_t feature_dim = 0;
    std::vector<FoldRecord> folds;
    IntervalSummary accuracy;
    ConfusionMatrix confusion;
    std::vector<std::vector<double>> confusion_proportions;
    std::vector<ClassMetrics> per_class;
    std::vector<PredictionRecord> predictions;
    std::vector<RosterEntry> roster;
    OperationCounts operations;
    std::vector<std::string> warnings;

    friend bool operator==(const ReportDocument&, const ReportDocument&) = default;
};

struct LayerSweepRow {
    std::string selector;
    std::size_t feature_dim = 0;
    bool baseline = false;
    std::vector<double> fold_accuracies;
    IntervalSummary accuracy;

    friend bool operator==(const LayerSweepRow&, const LayerSweepRow&) = default;
};

struct LayerSweepReport {
    ScenarioConfig scenario;
    std::vector<LayerSweepRow> rows;
    OperationCounts operations;

    friend bool operator==(const LayerSweepReport&, const LayerSweepReport&) = default;
};

struct ClassDelta {
    std::string label;
    double before = 0.0;
    double after = 0.0;
    double delta = 0.0;
    bool tested = true;

    friend bool operator==(const ClassDelta&, const ClassDelta&) = default;
};

struct DefenseReport {
    ReportDocument before;
    ReportDocument after;
    std::vector<std::size_t> defense_counts;  // per class
    std::vector<ClassDelta> per_class;
    double mean_accuracy_delta = 0.0;

    friend bool operator==(const DefenseReport&, const DefenseReport&) = default;
};

Json to_json(const IntervalSummary& s);
Json to_json(const ReportDocument& r);
Json to_json(const LayerSweepReport& r);
Json to_json(const DefenseReport& r);

/// Inverse of to_json; throws ConfigError on a malformed document.
ReportDocument report_from_json(const Json& j);

/// Table writers; each emits a header row then one row per record.
void write_folds_csv(std::ostream& out, const ReportDocument& r);
void write_confusion_csv(std::ostream& out, const ReportDocument& r);
void write_proportions_csv(std::ostream& out, const ReportDocument& r);
void write_per_class_csv(std::ostream& out, const ReportDocument& r);
void write_predictions_csv(std::ostream& out, const ReportDocument& r);
void write_sweep_csv(std::ostream& out, const LayerSweepReport& r);
void write_defense_csv(std::ostream& out, const DefenseReport& r);

/// JSON: writes `stem`.json. CSV: writes `stem`.<table>.csv for each table.
/// Returns the files written. Throws IoFailure.
std::vector<std::filesystem::path> emit_report(const ReportDocument& r, const std::filesystem::path& stem,
                                               ReportFormat format);
std::vector<std::filesystem::path> emit_report(const LayerSweepReport& r, const std::filesystem::path& stem,
                                               ReportFormat format);
std::vector<std::filesystem::path> emit_report(const DefenseReport& r, const std::filesystem::path& stem,
                                               ReportFormat format);

/// Writes `stem`.runtime.json holding wall-clock seconds and worker count.
std::filesystem::path emit_runtime(const std::filesystem::path& stem, double seconds, std::size_t workers);

/// Canonical serialized form used for the .json files.
std::string dump_json(const Json& j);

}  // namespace fedleak
