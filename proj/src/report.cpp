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

#include "fedleak/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fedleak/error.hpp"

namespace fedleak {

ReportFormat parse_report_format(std::string_view tag) {
    if (tag == "json") return ReportFormat::json;
    if (tag == "csv") return ReportFormat::csv;
    throw Error(Errc::UnknownFormat, "report format '" + std::string(tag) + "'");
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

namespace {

Json matrix_json(const ConfusionMatrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.size(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

ConfusionMatrix matrix_from(const Json& rows) {
    ConfusionMatrix m(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size()) throw ConfigError("confusion", "matrix is not square");
        for (std::size_t c = 0; c < rows.size(); ++c) m.add(r, c, rows[r][c].get<std::size_t>());
    }
    return m;
}

Json counts_json(const OperationCounts& o) {
    return Json{{"pretrain_steps", o.pretrain_steps},
                {"defense_steps", o.defense_steps},
                {"client_finetunes", o.client_finetunes},
                {"finetune_steps", o.finetune_steps},
                {"feature_extractions", o.feature_extractions},
                {"distance_evaluations", o.distance_evaluations}};
}

OperationCounts counts_from(const Json& j) {
    OperationCounts o;
    o.pretrain_steps = j.at("pretrain_steps").get<std::uint64_t>();
    o.defense_steps = j.at("defense_steps").get<std::uint64_t>();
    o.client_finetunes = j.at("client_finetunes").get<std::uint64_t>();
    o.finetune_steps = j.at("finetune_steps").get<std::uint64_t>();
    o.feature_extractions = j.at("feature_extractions").get<std::uint64_t>();
    o.distance_evaluations = j.at("distance_evaluations").get<std::uint64_t>();
    return o;
}

IntervalSummary interval_from(const Json& j) {
    IntervalSummary s;
    s.mean = j.at("mean").get<double>();
    s.standard_error = j.at("standard_error").get<double>();
    s.ci_low = j.at("ci_low").get<double>();
    s.ci_high = j.at("ci_high").get<double>();
    s.level = j.at("level").get<double>();
    s.dof = j.at("dof").get<std::size_t>();
    s.degenerate = j.at("degenerate").get<bool>();
    return s;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string field(std::string_view s) {
    if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, std::string_view suffix) {
    std::filesystem::path p = stem;
    p += suffix;
    return p;
}

template <typename Fn>
std::filesystem::path emit_table(const std::filesystem::path& stem, std::string_view table, Fn&& fn) {
    std::ostringstream out;
    fn(out);
    auto path = with_suffix(stem, "." + std::string(table) + ".csv");
    write_file(path, out.str());
    return path;
}

}  // namespace

Json to_json(const IntervalSummary& s) {
    return Json{{"mean", s.mean},     {"standard_error", s.standard_error}, {"ci_low", s.ci_low},
                {"ci_high", s.ci_high}, {"level", s.level},                   {"dof", s.dof},
                {"degenerate", s.degenerate}};
}

Json to_json(const ReportDocument& r) {
    Json folds = Json::array();
    for (std::size_t i = 0; i < r.folds.size(); ++i) {
        const FoldRecord& f = r.folds[i];
        folds.push_back(Json{{"index", i},
                             {"train_size", f.train_size},
                             {"test_size", f.test_size},
                             {"accuracy", f.accuracy},
                             {"confusion", matrix_json(f.confusion)}});
    }
    Json per_class = Json::array();
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const ClassMetrics& m = r.per_class[c];
        per_class.push_back(Json{{"label", r.classes.at(c)},
                                 {"precision", m.precision},
                                 {"recall", m.recall},
                                 {"f1", m.f1},
                                 {"support", m.support},
                                 {"predicted", m.predicted},
                                 {"precision_undefined", m.precision_undefined},
                                 {"recall_undefined", m.recall_undefined}});
    }
    Json predictions = Json::array();
    for (const PredictionRecord& p : r.predictions) {
        Json d = Json::object();
        for (const auto& [label, dist] : p.distances) d[label] = dist;
        predictions.push_back(Json{{"fold", p.fold},
                                   {"sample", p.sample},
                                   {"speaker_id", p.speaker_id},
                                   {"truth", p.truth},
                                   {"predicted", p.predicted},
                                   {"distances", std::move(d)}});
    }
    Json roster = Json::array();
    for (const RosterEntry& e : r.roster) {
        roster.push_back(Json{{"sample", e.sample},
                              {"speaker_id", e.speaker_id},
                              {"label", e.label},
                              {"value", e.value},
                              {"seed", e.seed},
                              {"utterance", e.utterance},
                              {"role", e.role},
                              {"test_folds", e.test_folds}});
    }
    return Json{{"format_version", kReportFormatVersion},
                {"kind", r.kind},
                {"scenario", to_json(r.scenario)},
                {"parameters", r.parameters},
                {"classes", r.classes},
                {"layers", r.layers},
                {"feature_dim", r.feature_dim},
                {"folds", std::move(folds)},
                {"accuracy", to_json(r.accuracy)},
                {"confusion", Json{{"counts", matrix_json(r.confusion)}, {"proportions", r.confusion_proportions}}},
                {"per_class", std::move(per_class)},
                {"predictions", std::move(predictions)},
                {"roster", std::move(roster)},
                {"operation_counts", counts_json(r.operations)},
                {"warnings", r.warnings}};
}

ReportDocument report_from_json(const Json& j) {
    try {
        if (j.at("format_version").get<int>() != kReportFormatVersion) {
            throw ConfigError("format_version", "unsupported report version");
        }
        ReportDocument r;
        r.kind = j.at("kind").get<std::string>();
        r.scenario = scenario_from_json(j.at("scenario"));
        r.parameters = j.at("parameters");
        r.classes = j.at("classes").get<std::vector<std::string>>();
        r.layers = j.at("layers").get<std::string>();
        r.feature_dim = j.at("feature_dim").get<std::size_t>();
        for (const Json& f : j.at("folds")) {
            r.folds.push_back(FoldRecord{f.at("train_size").get<std::size_t>(), f.at("test_size").get<std::size_t>(),
                                         f.at("accuracy").get<double>(), matrix_from(f.at("confusion"))});
        }
        r.accuracy = interval_from(j.at("accuracy"));
        r.confusion = matrix_from(j.at("confusion").at("counts"));
        r.confusion_proportions = j.at("confusion").at("proportions").get<std::vector<std::vector<double>>>();
        for (const Json& m : j.at("per_class")) {
            ClassMetrics cm;
            cm.precision = m.at("precision").get<double>();
            cm.recall = m.at("recall").get<double>();
            cm.f1 = m.at("f1").get<double>();
            cm.support = m.at("support").get<std::size_t>();
            cm.predicted = m.at("predicted").get<std::size_t>();
            cm.precision_undefined = m.at("precision_undefined").get<bool>();
            cm.recall_undefined = m.at("recall_undefined").get<bool>();
            r.per_class.push_back(cm);
        }
        for (const Json& p : j.at("predictions")) {
            PredictionRecord pr;
            pr.fold = p.at("fold").get<std::size_t>();
            pr.sample = p.at("sample").get<std::size_t>();
            pr.speaker_id = p.at("speaker_id").get<std::string>();
            pr.truth = p.at("truth").get<std::string>();
            pr.predicted = p.at("predicted").get<std::string>();
            for (const auto& [label, dist] : p.at("distances").items()) pr.distances.emplace_back(label, dist.get<double>());
            r.predictions.push_back(std::move(pr));
        }
        for (const Json& e : j.at("roster")) {
            RosterEntry re;
            re.sample = e.at("sample").get<std::size_t>();
            re.speaker_id = e.at("speaker_id").get<std::string>();
            re.label = e.at("label").get<std::string>();
            re.value = e.at("value").get<std::uint32_t>();
            re.seed = e.at("seed").get<std::uint64_t>();
            re.utterance = e.at("utterance").get<std::size_t>();
            re.role = e.at("role").get<std::string>();
            re.test_folds = e.at("test_folds").get<std::vector<std::size_t>>();
            r.roster.push_back(std::move(re));
        }
        r.operations = counts_from(j.at("operation_counts"));
        r.warnings = j.at("warnings").get<std::vector<std::string>>();
        return r;
    } catch (const Json::exception& e) {
        throw ConfigError("<report>", e.what());
    }
}

Json to_json(const LayerSweepReport& r) {
    Json rows = Json::array();
    for (const LayerSweepRow& row : r.rows) {
        rows.push_back(Json{{"selector", row.selector},
                            {"feature_dim", row.feature_dim},
                            {"baseline", row.baseline},
                            {"fold_accuracies", row.fold_accuracies},
                            {"accuracy", to_json(row.accuracy)}});
    }
    return Json{{"format_version", kReportFormatVersion},
                {"kind", "layer_sweep"},
                {"scenario", to_json(r.scenario)},
                {"rows", std::move(rows)},
                {"operation_counts", counts_json(r.operations)}};
}

Json to_json(const DefenseReport& r) {
    Json counts = Json::object();
    for (std::size_t c = 0; c < r.defense_counts.size(); ++c) counts[r.before.classes.at(c)] = r.defense_counts[c];
    Json per_class = Json::array();
    for (const ClassDelta& d : r.per_class) {
        per_class.push_back(Json{{"label", d.label},
                                 {"before", d.before},
                                 {"after", d.after},
                                 {"delta", d.delta},
                                 {"tested", d.tested}});
    }
    return Json{{"format_version", kReportFormatVersion},
                {"kind", "defense"},
                {"defense_counts", std::move(counts)},
                {"per_class", std::move(per_class)},
                {"mean_accuracy_delta", r.mean_accuracy_delta},
                {"before", to_json(r.before)},
                {"after", to_json(r.after)}};
}

void write_folds_csv(std::ostream& out, const ReportDocument& r) {
    out << "fold,train_size,test_size,accuracy\n";
    for (std::size_t i = 0; i < r.folds.size(); ++i) {
        const FoldRecord& f = r.folds[i];
        out << i << ',' << f.train_size << ',' << f.test_size << ',' << num(f.accuracy) << '\n';
    }
}

void write_confusion_csv(std::ostream& out, const ReportDocument& r) {
    out << "truth\\predicted";
    for (const std::string& c : r.classes) out << ',' << field(c);
    out << '\n';
    for (std::size_t i = 0; i < r.confusion.size(); ++i) {
        out << field(r.classes.at(i));
        for (std::size_t j = 0; j < r.confusion.size(); ++j) out << ',' << r.confusion(i, j);
        out << '\n';
    }
}

void write_proportions_csv(std::ostream& out, const ReportDocument& r) {
    out << "truth\\predicted";
    for (const std::string& c : r.classes) out << ',' << field(c);
    out << '\n';
    for (std::size_t i = 0; i < r.confusion_proportions.size(); ++i) {
        out << field(r.classes.at(i));
        for (double v : r.confusion_proportions[i]) out << ',' << num(v);
        out << '\n';
    }
}

void write_per_class_csv(std::ostream& out, const ReportDocument& r) {
    out << "label,precision,recall,f1,support,predicted,precision_undefined,recall_undefined\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const ClassMetrics& m = r.per_class[c];
        out << field(r.classes.at(c)) << ',' << num(m.precision) << ',' << num(m.recall) << ',' << num(m.f1) << ','
            << m.support << ',' << m.predicted << ',' << (m.precision_undefined ? 1 : 0) << ','
            << (m.recall_undefined ? 1 : 0) << '\n';
    }
}

void write_predictions_csv(std::ostream& out, const ReportDocument& r) {
    out << "fold,sample,speaker_id,truth,predicted";
    for (const std::string& c : r.classes) out << ',' << field("distance:" + c);
    out << '\n';
    for (const PredictionRecord& p : r.predictions) {
        out << p.fold << ',' << p.sample << ',' << field(p.speaker_id) << ',' << field(p.truth) << ','
            << field(p.predicted);
        for (const std::string& c : r.classes) {
            out << ',';
            for (const auto& [label, dist] : p.distances) {
                if (label == c) out << num(dist);
            }
        }
        out << '\n';
    }
}

void write_sweep_csv(std::ostream& out, const LayerSweepReport& r) {
    out << "selector,feature_dim,baseline,folds,mean,standard_error,ci_low,ci_high\n";
    for (const LayerSweepRow& row : r.rows) {
        out << field(row.selector) << ',' << row.feature_dim << ',' << (row.baseline ? 1 : 0) << ','
            << row.fold_accuracies.size() << ',' << num(row.accuracy.mean) << ',' << num(row.accuracy.standard_error)
            << ',' << num(row.accuracy.ci_low) << ',' << num(row.accuracy.ci_high) << '\n';
    }
}

void write_defense_csv(std::ostream& out, const DefenseReport& r) {
    out << "label,defense_samples,before,after,delta,tested\n";
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        const ClassDelta& d = r.per_class[c];
        out << field(d.label) << ',' << r.defense_counts.at(c) << ',' << num(d.before) << ',' << num(d.after) << ','
            << num(d.delta) << ',' << (d.tested ? 1 : 0) << '\n';
    }
}

std::vector<std::filesystem::path> emit_report(const ReportDocument& r, const std::filesystem::path& stem,
                                               ReportFormat format) {
    if (format == ReportFormat::json) {
        auto path = with_suffix(stem, ".json");
        write_file(path, dump_json(to_json(r)));
        return {path};
    }
    return {
        emit_table(stem, "folds", [&](std::ostream& o) { write_folds_csv(o, r); }),
        emit_table(stem, "confusion", [&](std::ostream& o) { write_confusion_csv(o, r); }),
        emit_table(stem, "confusion_proportions", [&](std::ostream& o) { write_proportions_csv(o, r); }),
        emit_table(stem, "per_class", [&](std::ostream& o) { write_per_class_csv(o, r); }),
        emit_table(stem, "predictions", [&](std::ostream& o) { write_predictions_csv(o, r); }),
    };
}

std::vector<std::filesystem::path> emit_report(const LayerSweepReport& r, const std::filesystem::path& stem,
                                               ReportFormat format) {
    if (format == ReportFormat::json) {
        auto path = with_suffix(stem, ".json");
        write_file(path, dump_json(to_json(r)));
        return {path};
    }
    return {emit_table(stem, "rows", [&](std::ostream& o) { write_sweep_csv(o, r); })};
}

std::vector<std::filesystem::path> emit_report(const DefenseReport& r, const std::filesystem::path& stem,
                                               ReportFormat format) {
    if (format == ReportFormat::json) {
        auto path = with_suffix(stem, ".json");
        write_file(path, dump_json(to_json(r)));
        return {path};
    }
    std::vector<std::filesystem::path> out{
        emit_table(stem, "deltas", [&](std::ostream& o) { write_defense_csv(o, r); })};
    for (auto* part : {&r.before, &r.after}) {
        const auto written = emit_report(*part, with_suffix(stem, part == &r.before ? ".before" : ".after"), format);
        out.insert(out.end(), written.begin(), written.end());
    }
    return out;
}

std::filesystem::path emit_runtime(const std::filesystem::path& stem, double seconds, std::size_t workers) {
    auto path = with_suffix(stem, ".runtime.json");
    write_file(path, dump_json(Json{{"wall_clock_seconds", seconds}, {"workers", workers}}));
    return path;
}

}  // namespace fedleak
