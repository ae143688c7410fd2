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

// fedleak command line. Exit status: 0 success, 2 configuration or usage
// error, 3 runtime error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fedleak/centroid.hpp"
#include "fedleak/error.hpp"
#include "fedleak/experiments.hpp"
#include "fedleak/features.hpp"
#include "fedleak/report.hpp"
#include "fedleak/scenario.hpp"
#include "fedleak/snapshot.hpp"

namespace fs = std::filesystem;
using namespace fedleak;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonArgs {
    std::string scenario;
    std::string out = ".";
    std::string format = "json";
    std::size_t workers = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
    cmd->add_option("scenario", a.scenario, "Scenario JSON file")->required();
    cmd->add_option("--out", a.out, "Output directory")->capture_default_str();
    cmd->add_option("--format", a.format, "Report format: json or csv")->capture_default_str();
    cmd->add_option("--workers", a.workers, "Worker threads")
        ->envname("FEDLEAK_WORKERS")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

fs::path prepare_out(const CommonArgs& a) {
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + a.out + ": " + ec.message());
    return fs::path(a.out);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void print_written(const std::vector<fs::path>& files) {
    for (const fs::path& f : files) std::printf("wrote %s\n", f.string().c_str());
}

void print_summary(const std::string& what, const IntervalSummary& s, std::size_t folds) {
    std::printf("%s: accuracy %.4f, 95%% CI [%.4f, %.4f] over %zu fold(s)\n", what.c_str(), s.mean, s.ci_low,
                s.ci_high, folds);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

// One CSV record; handles double-quoted fields.
std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

struct LabeledPath {
    fs::path path;
    std::string label;
};

std::vector<LabeledPath> read_labels(const fs::path& file, const fs::path& base) {
    std::ifstream in(file);
    if (!in) throw ConfigError("--labels", "cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line) || parse_csv_line(line) != std::vector<std::string>{"path", "label"}) {
        throw ConfigError("--labels", "expected header 'path,label'");
    }
    std::vector<LabeledPath> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        auto cols = parse_csv_line(line);
        if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
            throw ConfigError("--labels", "row " + std::to_string(row) + ": expected path,label");
        }
        fs::path p(cols[0]);
        out.push_back(LabeledPath{p.is_absolute() ? p : base / p, cols[1]});
    }
    if (out.empty()) throw ConfigError("--labels", "no labeled shadow models");
    return out;
}

bool is_summary(const fs::path& p) { return p.extension() == ".fsum"; }

struct AttackArgs {
    std::string global;
    std::string shadows;
    std::string labels;
    std::vector<std::string> targets;
    std::string mode = "raw";
    std::string prefix;
    std::string tensors;
    std::string save_model;
};

LayerSelector selector_from(const std::string& prefix, const std::string& tensors) {
    if (!prefix.empty() && !tensors.empty()) throw ConfigError("--prefix", "use either --prefix or --tensors");
    if (!prefix.empty()) return LayerSelector::prefix(prefix);
    if (!tensors.empty()) return LayerSelector::list(split_list(tensors));
    return LayerSelector::all();
}

int cmd_attack(const AttackArgs& a) {
    if (a.mode != "raw" && a.mode != "delta") throw ConfigError("--mode", "expected raw or delta");
    const bool delta = a.mode == "delta";
    if (delta && a.global.empty()) throw ConfigError("--global", "required in delta mode");
    const LayerSelector sel = selector_from(a.prefix, a.tensors);

    std::shared_ptr<const WeightSnapshot> global;
    if (!a.global.empty()) global = std::make_shared<const WeightSnapshot>(load_snapshot(a.global));
    const FeatureMode mode = delta ? FeatureMode::delta(global) : FeatureMode::raw_weights();

    auto features_of = [&](const fs::path& p) {
        if (is_summary(p)) {
            if (delta) throw ConfigError("--mode", p.string() + " holds statistics only; delta mode needs .fsnp files");
            return extract_features(load_summary(p), sel);
        }
        const WeightSnapshot s = load_snapshot(p);
        if (global) require_same_architecture(s, *global);
        return extract_features(s, sel, mode);
    };

    std::vector<LabeledFeature> train;
    for (const LabeledPath& lp : read_labels(a.labels, a.shadows)) {
        train.push_back(LabeledFeature{features_of(lp.path), ClassLabel{lp.label}});
    }
    const CentroidModel model = CentroidModel::fit(train);
    if (!a.save_model.empty()) save_centroid_model(model, a.save_model);

    Json classes = Json::array();
    for (std::size_t c = 0; c < model.num_classes(); ++c) {
        classes.push_back(Json{{"label", model.classes()[c].name}, {"count", model.count(c)}});
    }
    Json preds = Json::array();
    for (const std::string& t : a.targets) {
        const Prediction p = predict(model, features_of(t));
        Json d = Json::object();
        for (std::size_t c = 0; c < model.num_classes(); ++c) d[model.classes()[c].name] = p.distances[c];
        preds.push_back(Json{{"target", t}, {"label", p.label.name}, {"distances", std::move(d)}});
    }
    const Json out{{"mode", delta ? "delta" : "raw_weights"},
                   {"layers", sel.describe()},
                   {"feature_dim", model.dim()},
                   {"classes", std::move(classes)},
                   {"predictions", std::move(preds)}};
    std::cout << dump_json(out);
    return 0;
}

int run_main(int argc, char** argv) {
    CLI::App app{"Attribute inference on federated client weight updates"};
    app.require_subcommand(1);

    CommonArgs run_args;
    bool emit_snapshots = false;
    auto* run = app.add_subcommand("run", "Run a binary or multi-class scenario");
    add_common(run, run_args);
    run->add_flag("--emit-snapshots", emit_snapshots, "Write global and client snapshots for offline attacks");

    CommonArgs sweep_args;
    auto* sweep = app.add_subcommand("sweep-layers", "Attack each tensor separately plus the full model");
    add_common(sweep, sweep_args);

    CommonArgs defense_args;
    std::size_t defense_samples = 20;
    auto* defense = app.add_subcommand("defense", "Attack before and after extending pre-training coverage");
    add_common(defense, defense_args);
    defense->add_option("--defense-samples", defense_samples, "Fresh speakers per class")->capture_default_str();

    CommonArgs unseen_args;
    std::string unseen_classes;
    std::size_t unseen_shadows = 6;
    std::size_t unseen_tests = 14;
    auto* unseen = app.add_subcommand("unseen", "Attack attribute values absent from pre-training");
    add_common(unseen, unseen_args);
    unseen->add_option("--classes", unseen_classes, "Comma-separated attribute values")->required();
    unseen->add_option("--shadows", unseen_shadows, "Shadow models per class")->capture_default_str();
    unseen->add_option("--tests", unseen_tests, "Test clients per class")->capture_default_str();

    AttackArgs attack_args;
    auto* attack = app.add_subcommand("attack", "Offline attack over snapshot files");
    attack->add_option("--global", attack_args.global, "Global model (.fsnp)");
    attack->add_option("--shadows", attack_args.shadows, "Directory holding the shadow snapshots")->required();
    attack->add_option("--labels", attack_args.labels, "CSV with header path,label")->required();
    attack->add_option("--target", attack_args.targets, "Target snapshot(s) to classify")->required();
    attack->add_option("--mode", attack_args.mode, "Feature mode: raw or delta")->capture_default_str();
    attack->add_option("--prefix", attack_args.prefix, "Only tensors whose name starts with this");
    attack->add_option("--tensors", attack_args.tensors, "Comma-separated tensor names");
    attack->add_option("--save-model", attack_args.save_model, "Write the fitted centroids (.fsum + manifest)");

    std::string feat_path;
    std::string feat_baseline;
    std::string feat_prefix;
    auto* features = app.add_subcommand("features", "Print the feature vector of one snapshot as CSV");
    features->add_option("snapshot", feat_path, ".fsnp or .fsum file")->required();
    features->add_option("--baseline", feat_baseline, "Difference against this snapshot first");
    features->add_option("--prefix", feat_prefix, "Only tensors whose name starts with this");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    const auto start = std::chrono::steady_clock::now();
    auto finish = [&](const CommonArgs& a, const fs::path& stem) {
        print_written({emit_runtime(stem, seconds_since(start), a.workers)});
    };

    if (*run) {
        const ReportFormat format = parse_report_format(run_args.format);
        const ScenarioConfig cfg = load_scenario(run_args.scenario);
        const fs::path dir = prepare_out(run_args);
        RunOptions opts{run_args.workers, {}};
        if (emit_snapshots) opts.snapshot_dir = dir / (cfg.name + "-snapshots");
        const ReportDocument r = run_scenario(cfg, opts);
        const fs::path stem = dir / cfg.name;
        print_written(emit_report(r, stem, format));
        finish(run_args, stem);
        print_summary(cfg.name, r.accuracy, r.folds.size());
        return 0;
    }
    if (*sweep) {
        const ReportFormat format = parse_report_format(sweep_args.format);
        const ScenarioConfig cfg = load_scenario(sweep_args.scenario);
        const fs::path stem = prepare_out(sweep_args) / (cfg.name + ".layers");
        const LayerSweepReport r = run_layer_sweep(cfg, RunOptions{sweep_args.workers, {}});
        print_written(emit_report(r, stem, format));
        finish(sweep_args, stem);
        for (const LayerSweepRow& row : r.rows) print_summary(row.selector, row.accuracy, row.fold_accuracies.size());
        return 0;
    }
    if (*defense) {
        const ReportFormat format = parse_report_format(defense_args.format);
        const ScenarioConfig cfg = load_scenario(defense_args.scenario);
        const fs::path stem = prepare_out(defense_args) / (cfg.name + ".defense");
        const DefenseReport r = run_defense_experiment(cfg, defense_samples, RunOptions{defense_args.workers, {}});
        print_written(emit_report(r, stem, format));
        finish(defense_args, stem);
        print_summary("before", r.before.accuracy, r.before.folds.size());
        print_summary("after", r.after.accuracy, r.after.folds.size());
        return 0;
    }
    if (*unseen) {
        const ReportFormat format = parse_report_format(unseen_args.format);
        std::vector<std::uint32_t> values;
        for (const std::string& s : split_list(unseen_classes)) {
            try {
                std::size_t used = 0;
                const unsigned long v = std::stoul(s, &used);
                if (used != s.size() || v > 0xffffffffUL) throw std::invalid_argument(s);
                values.push_back(static_cast<std::uint32_t>(v));
            } catch (const std::logic_error&) {
                throw ConfigError("--classes", "'" + s + "' is not an attribute value");
            }
        }
        const ScenarioConfig cfg = load_scenario(unseen_args.scenario);
        const fs::path stem = prepare_out(unseen_args) / (cfg.name + ".unseen");
        const ReportDocument r = run_unseen_class_experiment(cfg, values, unseen_shadows, unseen_tests,
                                                             RunOptions{unseen_args.workers, {}});
        print_written(emit_report(r, stem, format));
        finish(unseen_args, stem);
        for (std::size_t c = 0; c < r.per_class.size(); ++c) {
            const ClassMetrics& m = r.per_class[c];
            std::printf("%s: precision %.2f recall %.2f f1 %.2f\n", r.classes[c].c_str(), m.precision, m.recall, m.f1);
        }
        return 0;
    }
    if (*attack) return cmd_attack(attack_args);
    if (*features) {
        const LayerSelector sel = feat_prefix.empty() ? LayerSelector::all() : LayerSelector::prefix(feat_prefix);
        FeatureVector z;
        if (is_summary(feat_path)) {
            if (!feat_baseline.empty()) throw ConfigError("--baseline", "not available for .fsum input");
            z = extract_features(load_summary(feat_path), sel);
        } else {
            const FeatureMode mode = feat_baseline.empty()
                                         ? FeatureMode::raw_weights()
                                         : FeatureMode::delta(std::make_shared<const WeightSnapshot>(load_snapshot(feat_baseline)));
            z = extract_features(load_snapshot(feat_path), sel, mode);
        }
        write_feature_csv(std::cout, z);
        return 0;
    }
    return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "fedleak: configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "fedleak: %s\n", e.what());
        return e.code() == Errc::UnknownFormat ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fedleak: %s\n", e.what());
        return kExitRuntime;
    }
}
