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

#include "fedleak/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <set>

#include "fedleak/error.hpp"
#include "fedleak/parallel.hpp"
#include "fedleak/rng.hpp"

namespace fedleak {

namespace {

constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kCorpusTag = 2;
constexpr std::uint64_t kSpeakerTag = 3;
constexpr std::uint64_t kProfileTag = 4;
constexpr std::uint64_t kSplitTag = 5;
constexpr std::uint64_t kDefenseSpeakerTag = 6;
constexpr std::uint64_t kDefenseProfileTag = 7;

AttributeProfile draw_profile(const World& world, Attribute attacked, std::uint32_t value, std::uint64_t seed) {
    SplitMix64 rng(seed);
    AttributeProfile p;
    for (Attribute a : kAllAttributes) {
        const auto& cov = world.config().spec(a).coverage;
        p[a] = cov[rng.below(cov.size())];
    }
    p[attacked] = value;
    return p;
}

// Everything the scoring step needs besides the client models themselves.
struct AttackContext {
    const ScenarioConfig& cfg;
    const std::vector<std::string>& class_names;
    const Population& pop;
    const WeightSnapshot& global;
    std::size_t workers = 1;
};

std::vector<WeightSnapshot> train_clients(const AttackContext& ctx, const World& world) {
    auto shadows = build_shadow_set(ctx.global, ctx.pop.samples, world, ctx.cfg.finetune, ctx.workers);
    std::vector<WeightSnapshot> out;
    out.reserve(shadows.size());
    for (ShadowModel& s : shadows) out.push_back(std::move(s.weights));
    return out;
}

std::vector<Fold> plan_folds(const ScenarioConfig& cfg, const Population& pop) {
    SplitPlan plan = cfg.split;
    plan.seed = derive_seed(cfg.master_seed, {kSplitTag, cfg.split.seed});
    return make_splits(pop.tags, plan);
}

OperationCounts client_counts(const ScenarioConfig& cfg, std::size_t clients) {
    OperationCounts ops;
    ops.pretrain_steps = cfg.pretrain.steps;
    ops.client_finetunes = clients;
    ops.finetune_steps = clients * cfg.finetune.steps;
    return ops;
}

ReportDocument score(const AttackContext& ctx, std::span<const WeightSnapshot> clients, std::span<const Fold> folds,
                     const LayerSelector& selector, std::string kind) {
    const FeatureMode mode = ctx.cfg.feature_mode == FeatureModeTag::delta
                                 ? FeatureMode::delta(std::make_shared<const WeightSnapshot>(ctx.global))
                                 : FeatureMode::raw_weights();
    std::vector<LabeledFeature> features(clients.size());
    parallel_for(clients.size(), ctx.workers, [&](std::size_t i) {
        features[i].features = extract_features(clients[i], selector, mode);
        features[i].label = ctx.pop.samples[i].label;
    });

    std::vector<ClassLabel> label_space;
    for (const std::string& n : ctx.class_names) label_space.push_back(ClassLabel{n});

    ReportDocument r;
    r.kind = std::move(kind);
    r.scenario = ctx.cfg;
    r.classes = ctx.class_names;
    r.layers = selector.describe();
    r.feature_dim = features.empty() ? 0 : features.front().features.dim();
    r.confusion = ConfusionMatrix(label_space.size());
    r.roster = ctx.pop.roster;
    r.operations.feature_extractions = clients.size();

    std::vector<double> accuracies;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const Fold& fold = folds[f];
        std::vector<LabeledFeature> train;
        train.reserve(fold.train.size());
        for (std::size_t i : fold.train) train.push_back(features[i]);
        std::vector<LabeledFeature> test;
        test.reserve(fold.test.size());
        for (std::size_t i : fold.test) test.push_back(features[i]);

        const CentroidModel model = CentroidModel::fit(train);
        FoldResult res = evaluate_fold(model, test, label_space);
        for (std::size_t t = 0; t < fold.test.size(); ++t) {
            const std::size_t sample = fold.test[t];
            const Prediction& p = res.predictions[t];
            PredictionRecord pr;
            pr.fold = f;
            pr.sample = sample;
            pr.speaker_id = ctx.pop.roster[sample].speaker_id;
            pr.truth = test[t].label.name;
            pr.predicted = p.label.name;
            for (std::size_t c = 0; c < model.num_classes(); ++c) {
                pr.distances.emplace_back(model.classes()[c].name, p.distances[c]);
            }
            r.predictions.push_back(std::move(pr));
            r.roster[sample].test_folds.push_back(f);
        }
        r.operations.distance_evaluations += fold.test.size() * model.num_classes();
        r.confusion += res.confusion;
        accuracies.push_back(res.accuracy);
        r.folds.push_back(FoldRecord{fold.train.size(), fold.test.size(), res.accuracy, std::move(res.confusion)});
    }

    r.accuracy = summarize_folds(accuracies);
    r.per_class = class_metrics(r.confusion);
    r.confusion_proportions = confusion_proportions(r.confusion);
    if (r.accuracy.degenerate) r.warnings.push_back("single fold: standard error is 0 and the interval is degenerate");
    for (std::size_t c = 0; c < r.per_class.size(); ++c) {
        if (r.per_class[c].recall_undefined) {
            r.warnings.push_back("class '" + r.classes[c] + "' has no test samples; recall is reported as 0");
        }
        if (r.per_class[c].precision_undefined) {
            r.warnings.push_back("class '" + r.classes[c] + "' was never predicted; precision is reported as 0");
        }
    }
    return r;
}

void write_snapshots(const std::filesystem::path& dir, const WeightSnapshot& global, std::span<const WeightSnapshot> clients,
                     const Population& pop, const Fold& fold) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    save_snapshot(global, dir / "global.fsnp");
    std::vector<bool> is_test(clients.size(), false);
    for (std::size_t i : fold.test) is_test[i] = true;
    std::ofstream labels(dir / "labels.csv", std::ios::binary | std::ios::trunc);
    std::ofstream targets(dir / "targets.csv", std::ios::binary | std::ios::trunc);
    if (!labels || !targets) throw Error(Errc::IoFailure, "cannot write label files in " + dir.string());
    labels << "path,label\n";
    targets << "path,label\n";
    for (std::size_t i = 0; i < clients.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof name, "client-%05zu.fsnp", i);
        save_snapshot(clients[i], dir / name);
        (is_test[i] ? targets : labels) << name << ',' << pop.samples[i].label.name << '\n';
    }
    if (!labels || !targets) throw Error(Errc::IoFailure, "write failed in " + dir.string());
}

// Shared body of the binary and multi-class runs.
ReportDocument run_attack(const ScenarioConfig& cfg, const RunOptions& opts, std::string kind) {
    cfg.validate();
    const World world(cfg.world);
    const Population pop = make_population(cfg, world);
    const WeightSnapshot global = pretrain_scenario_global(cfg, world);
    const AttackContext ctx{cfg, cfg.class_names, pop, global, opts.workers};
    const auto clients = train_clients(ctx, world);
    const auto folds = plan_folds(cfg, pop);
    if (opts.snapshot_dir) write_snapshots(*opts.snapshot_dir, global, clients, pop, folds.front());

    ReportDocument r = score(ctx, clients, folds, cfg.layers, std::move(kind));
    const OperationCounts base = client_counts(cfg, clients.size());
    r.operations.pretrain_steps = base.pretrain_steps;
    r.operations.client_finetunes = base.client_finetunes;
    r.operations.finetune_steps = base.finetune_steps;
    return r;
}

std::vector<std::size_t> defense_counts(const ScenarioConfig& cfg, const DefenseConfig& d) {
    std::vector<std::size_t> out;
    for (const std::string& n : cfg.class_names) out.push_back(d.samples_for(n));
    return out;
}

// Coverage extension of the global model; a no-op when every count is 0.
WeightSnapshot defended_global(const ScenarioConfig& cfg, const World& world, const WeightSnapshot& global,
                               const DefenseConfig& d, std::span<const std::size_t> counts) {
    const auto speakers = make_defense_speakers(cfg, world, counts);
    if (speakers.empty()) return global;
    return continue_training(global, world, d.train, speakers, "global+defense");
}

}  // namespace

Population make_population(const ScenarioConfig& cfg, const World& world) {
    Population pop;
    const bool designated = cfg.split.scheme == SplitPlan::Scheme::designated;
    for (std::size_t c = 0; c < cfg.num_classes(); ++c) {
        const std::uint32_t value = cfg.class_values[c];
        const std::size_t speakers = cfg.shadow_counts[c] + cfg.test_counts[c];
        for (std::size_t i = 0; i < speakers; ++i) {
            SyntheticSpeaker spk;
            spk.speaker_id = cfg.class_names[c] + "-" + std::to_string(i);
            spk.seed = derive_seed(cfg.master_seed, {kSpeakerTag, value, i});
            spk.profile = draw_profile(world, cfg.attribute, value, derive_seed(cfg.master_seed, {kProfileTag, value, i}));
            const bool shadow = i < cfg.shadow_counts[c];
            for (std::size_t u = 0; u < cfg.utterances_per_speaker; ++u) {
                const std::size_t sample = pop.samples.size();
                pop.samples.push_back(LabeledSpeaker{spk, ClassLabel{cfg.class_names[c]}, u});
                pop.tags.push_back(SampleTag{c, spk.speaker_id, shadow});
                pop.roster.push_back(RosterEntry{sample, spk.speaker_id, cfg.class_names[c], value, spk.seed, u,
                                                 designated ? (shadow ? "shadow" : "target") : "pool", {}});
            }
        }
    }
    return pop;
}

std::vector<SyntheticSpeaker> make_defense_speakers(const ScenarioConfig& cfg, const World& world,
                                                    std::span<const std::size_t> per_class) {
    if (per_class.size() != cfg.num_classes()) {
        throw Error(Errc::InvalidArgument, "defense counts do not match the class count");
    }
    std::vector<SyntheticSpeaker> out;
    for (std::size_t c = 0; c < cfg.num_classes(); ++c) {
        const std::uint32_t value = cfg.class_values[c];
        for (std::size_t i = 0; i < per_class[c]; ++i) {
            SyntheticSpeaker spk;
            spk.speaker_id = "defense-" + cfg.class_names[c] + "-" + std::to_string(i);
            spk.seed = derive_seed(cfg.master_seed, {kDefenseSpeakerTag, value, i});
            spk.profile =
                draw_profile(world, cfg.attribute, value, derive_seed(cfg.master_seed, {kDefenseProfileTag, value, i}));
            out.push_back(std::move(spk));
        }
    }
    return out;
}

WeightSnapshot pretrain_scenario_global(const ScenarioConfig& cfg, const World& world) {
    TrainConfig tc = cfg.pretrain;
    tc.seed = derive_seed(cfg.master_seed, {kInitTag, cfg.pretrain.seed});
    const auto corpus = make_coverage_corpus(world, cfg.corpus_size, derive_seed(cfg.master_seed, {kCorpusTag}));
    return pretrain_global(world, tc, corpus);
}

ReportDocument run_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    return cfg.num_classes() == 2 ? run_binary_scenario(cfg, opts) : run_multiclass_scenario(cfg, opts);
}

ReportDocument run_binary_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.num_classes() != 2) throw ConfigError("class_values", "a binary scenario needs exactly 2 classes");
    return run_attack(cfg, opts, "binary");
}

ReportDocument run_multiclass_scenario(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.num_classes() < 3) throw ConfigError("class_values", "a multi-class scenario needs at least 3 classes");
    return run_attack(cfg, opts, "multiclass");
}

LayerSweepReport run_layer_sweep(const ScenarioConfig& cfg, const RunOptions& opts) {
    if (cfg.num_classes() != 2) throw ConfigError("class_values", "the layer sweep needs exactly 2 classes");
    cfg.validate();
    const World world(cfg.world);
    const Population pop = make_population(cfg, world);
    const WeightSnapshot global = pretrain_scenario_global(cfg, world);
    const AttackContext ctx{cfg, cfg.class_names, pop, global, opts.workers};
    const auto clients = train_clients(ctx, world);
    const auto folds = plan_folds(cfg, pop);

    LayerSweepReport out;
    out.scenario = cfg;
    out.operations = client_counts(cfg, clients.size());
    auto add_row = [&](const LayerSelector& sel, bool baseline) {
        const ReportDocument r = score(ctx, clients, folds, sel, "binary");
        LayerSweepRow row;
        row.selector = sel.describe();
        row.feature_dim = r.feature_dim;
        row.baseline = baseline;
        for (const FoldRecord& f : r.folds) row.fold_accuracies.push_back(f.accuracy);
        row.accuracy = r.accuracy;
        out.rows.push_back(std::move(row));
        out.operations.feature_extractions += r.operations.feature_extractions;
        out.operations.distance_evaluations += r.operations.distance_evaluations;
    };
    for (const TensorRecord& t : global.tensors()) add_row(LayerSelector::list({t.name}), false);
    add_row(LayerSelector::all(), true);
    return out;
}

DefenseReport run_defense_experiment(const ScenarioConfig& cfg, std::optional<std::size_t> samples_per_class,
                                     const RunOptions& opts) {
    ScenarioConfig before_cfg = cfg;
    before_cfg.defense.reset();
    ScenarioConfig after_cfg = cfg;
    if (!after_cfg.defense) after_cfg.defense = DefenseConfig{};
    if (samples_per_class) after_cfg.defense->samples_per_class = *samples_per_class;
    after_cfg.validate();

    const World world(cfg.world);
    const Population pop = make_population(cfg, world);
    const WeightSnapshot global = pretrain_scenario_global(cfg, world);
    const auto counts = defense_counts(after_cfg, *after_cfg.defense);
    const WeightSnapshot defended = defended_global(after_cfg, world, global, *after_cfg.defense, counts);
    const auto folds = plan_folds(cfg, pop);

    auto attack = [&](const ScenarioConfig& echo, const WeightSnapshot& g) {
        const AttackContext ctx{echo, echo.class_names, pop, g, opts.workers};
        const auto clients = train_clients(ctx, world);
        ReportDocument r = score(ctx, clients, folds, echo.layers, cfg.num_classes() == 2 ? "binary" : "multiclass");
        const OperationCounts base = client_counts(echo, clients.size());
        r.operations.pretrain_steps = base.pretrain_steps;
        r.operations.client_finetunes = base.client_finetunes;
        r.operations.finetune_steps = base.finetune_steps;
        return r;
    };

    DefenseReport out;
    out.before = attack(before_cfg, global);
    out.after = attack(after_cfg, defended);
    std::size_t total = 0;
    for (std::size_t n : counts) total += n;
    if (total > 0) out.after.operations.defense_steps = after_cfg.defense->train.steps;
    out.defense_counts = counts;
    for (std::size_t c = 0; c < cfg.num_classes(); ++c) {
        ClassDelta d;
        d.label = cfg.class_names[c];
        d.tested = out.before.per_class[c].support > 0;
        d.before = out.before.per_class[c].recall;
        d.after = out.after.per_class[c].recall;
        d.delta = d.after - d.before;
        out.per_class.push_back(d);
    }
    out.mean_accuracy_delta = out.after.accuracy.mean - out.before.accuracy.mean;
    return out;
}

ReportDocument run_unseen_class_experiment(const ScenarioConfig& cfg, std::span<const std::uint32_t> unseen_values,
                                           std::size_t shadows_per_class, std::size_t tests_per_class,
                                           const RunOptions& opts) {
    cfg.validate();
    const AttributeSpec& spec = cfg.world.spec(cfg.attribute);
    if (unseen_values.size() < 2) throw ConfigError("classes", "need at least 2 unseen classes");
    if (shadows_per_class == 0) throw ConfigError("shadows", "must be positive");
    if (tests_per_class == 0) throw ConfigError("tests", "must be positive");
    std::set<std::uint32_t> seen;
    for (std::uint32_t v : unseen_values) {
        const std::string tag = "value " + std::to_string(v);
        if (v >= spec.cardinality) throw ConfigError("classes", tag + " exceeds the attribute's cardinality");
        if (!seen.insert(v).second) throw ConfigError("classes", "duplicate " + tag);
        if (std::find(spec.coverage.begin(), spec.coverage.end(), v) != spec.coverage.end()) {
            throw ConfigError("classes", tag + " is covered by pre-training");
        }
        if (cfg.defense && std::find(cfg.class_values.begin(), cfg.class_values.end(), v) != cfg.class_values.end()) {
            throw ConfigError("classes", tag + " is used by the defense step");
        }
    }

    const World world(cfg.world);
    WeightSnapshot global = pretrain_scenario_global(cfg, world);
    std::uint64_t defense_steps = 0;
    if (cfg.defense) {
        const auto counts = defense_counts(cfg, *cfg.defense);
        const WeightSnapshot defended = defended_global(cfg, world, global, *cfg.defense, counts);
        if (!(defended == global)) defense_steps = cfg.defense->train.steps;
        global = defended;
    }

    // The unseen classes replace the scenario's classes for the attack itself.
    ScenarioConfig attack_cfg = cfg;
    attack_cfg.class_values.assign(unseen_values.begin(), unseen_values.end());
    attack_cfg.class_names.clear();
    for (std::uint32_t v : unseen_values) {
        attack_cfg.class_names.push_back(std::string(to_string(cfg.attribute)) + "=" + std::to_string(v));
    }
    attack_cfg.shadow_counts.assign(unseen_values.size(), shadows_per_class);
    attack_cfg.test_counts.assign(unseen_values.size(), tests_per_class);
    attack_cfg.split = SplitPlan{};
    attack_cfg.defense.reset();

    const Population pop = make_population(attack_cfg, world);
    const AttackContext ctx{attack_cfg, attack_cfg.class_names, pop, global, opts.workers};
    const auto clients = train_clients(ctx, world);
    const auto folds = plan_folds(attack_cfg, pop);
    if (opts.snapshot_dir) write_snapshots(*opts.snapshot_dir, global, clients, pop, folds.front());

    ReportDocument r = score(ctx, clients, folds, cfg.layers, "unseen");
    r.scenario = cfg;
    r.parameters = Json{{"unseen_values", attack_cfg.class_values},
                        {"shadows_per_class", shadows_per_class},
                        {"tests_per_class", tests_per_class}};
    const OperationCounts base = client_counts(cfg, clients.size());
    r.operations.pretrain_steps = base.pretrain_steps;
    r.operations.defense_steps = defense_steps;
    r.operations.client_finetunes = base.client_finetunes;
    r.operations.finetune_steps = base.finetune_steps;
    return r;
}

}  // namespace fedleak
