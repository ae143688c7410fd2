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
#include <set>

#include "fedleak/experiments.hpp"
#include "fixtures.hpp"
#include "test_support.hpp"

namespace fedleak {
namespace {

using testing::TempDir;
using testing::tiny_multiclass;
using testing::tiny_scenario;

std::size_t line_count(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string l; std::getline(in, l);) ++n;
    return n;
}

TEST(Population, IdsRolesAndSeeds) {
    const auto cfg = tiny_scenario();
    const World world(cfg.world);
    const auto pop = make_population(cfg, world);
    ASSERT_EQ(pop.samples.size(), 24u);
    EXPECT_EQ(pop.samples[0].speaker.speaker_id, "native-0");
    EXPECT_EQ(pop.roster[5].role, "shadow");
    EXPECT_EQ(pop.roster[6].role, "target");
    EXPECT_EQ(pop.samples[12].label.name, "accented");
    std::set<std::uint64_t> seeds;
    for (const auto& s : pop.samples) {
        seeds.insert(s.speaker.seed);
        EXPECT_EQ(s.speaker.profile[Attribute::accent], s.label.name == "native" ? 0u : 1u);
    }
    EXPECT_EQ(seeds.size(), 24u);
    EXPECT_EQ(make_population(cfg, world).roster, pop.roster);
}

TEST(Population, NuisanceAttributesStayInCoverage) {
    auto cfg = tiny_scenario();
    cfg.world.spec(Attribute::emotion).coverage = {2, 5};
    const World world(cfg.world);
    for (const auto& s : make_population(cfg, world).samples) {
        const auto e = s.speaker.profile[Attribute::emotion];
        EXPECT_TRUE(e == 2 || e == 5);
    }
}

TEST(BinaryScenario, UncoveredAttributeLeaks) {
    const auto r = run_scenario(tiny_scenario());
    EXPECT_EQ(r.kind, "binary");
    EXPECT_EQ(r.folds.size(), 1u);
    EXPECT_EQ(r.folds[0].train_size, 12u);
    EXPECT_EQ(r.folds[0].test_size, 12u);
    EXPECT_EQ(r.feature_dim, 16u);
    EXPECT_GE(r.accuracy.mean, 0.9);
    EXPECT_TRUE(r.accuracy.degenerate);
    EXPECT_EQ(r.operations.client_finetunes, 24u);
    EXPECT_EQ(r.operations.finetune_steps, 240u);
    EXPECT_EQ(r.operations.distance_evaluations, 24u);
}

TEST(BinaryScenario, ZeroSignalIsNearChance) {
    double total = 0;
    const int seeds = 10;
    for (int s = 1; s <= seeds; ++s) {
        auto cfg = tiny_scenario();
        cfg.world.spec(Attribute::accent).effect = 0.0;
        cfg.master_seed = static_cast<std::uint64_t>(s);
        total += run_scenario(cfg).accuracy.mean;
    }
    const double mean = total / seeds;
    EXPECT_GT(mean, 0.3);
    EXPECT_LT(mean, 0.7);
}

TEST(BinaryScenario, DeterministicAndWorkerInvariant) {
    const auto cfg = tiny_scenario();
    const auto a = run_scenario(cfg);
    EXPECT_EQ(run_scenario(cfg), a);
    RunOptions opts;
    opts.workers = 4;
    const auto b = run_scenario(cfg, opts);
    EXPECT_EQ(b, a);
    EXPECT_EQ(dump_json(to_json(b)), dump_json(to_json(a)));
}

TEST(BinaryScenario, MasterSeedOnlyChangesItsOwnOutputs) {
    auto c1 = tiny_scenario();
    auto c2 = tiny_scenario();
    c2.master_seed = 2;
    const auto r1 = run_scenario(c1);
    const auto r2 = run_scenario(c2);
    EXPECT_NE(r1.roster[0].seed, r2.roster[0].seed);
    EXPECT_NE(r1.predictions[0].distances, r2.predictions[0].distances);
    Json e1 = to_json(r1.scenario);
    Json e2 = to_json(r2.scenario);
    e1.erase("master_seed");
    e2.erase("master_seed");
    EXPECT_EQ(e1, e2);
}

TEST(BinaryScenario, AccuracyVariesAcrossSeedsWhenSignalIsWeak) {
    std::set<double> seen;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        auto cfg = tiny_scenario();
        cfg.world.spec(Attribute::accent).effect = 0.3;
        cfg.master_seed = s;
        seen.insert(run_scenario(cfg).accuracy.mean);
    }
    EXPECT_GT(seen.size(), 1u);
}

TEST(BinaryScenario, TestSamplesNeverTrain) {
    const auto r = run_scenario(tiny_scenario());
    for (const auto& e : r.roster) {
        if (e.role == "shadow") {
            EXPECT_TRUE(e.test_folds.empty()) << e.speaker_id;
        } else {
            EXPECT_EQ(e.test_folds, (std::vector<std::size_t>{0})) << e.speaker_id;
        }
    }
    for (const auto& p : r.predictions) EXPECT_EQ(r.roster[p.sample].role, "target");
}

TEST(BinaryScenario, KFoldTestsEverySampleOnce) {
    auto cfg = tiny_scenario();
    cfg.split.scheme = SplitPlan::Scheme::k_fold;
    cfg.split.k = 3;
    const auto r = run_scenario(cfg);
    EXPECT_EQ(r.folds.size(), 3u);
    EXPECT_FALSE(r.accuracy.degenerate);
    EXPECT_EQ(r.predictions.size(), 24u);
    for (const auto& e : r.roster) {
        EXPECT_EQ(e.role, "pool");
        EXPECT_EQ(e.test_folds.size(), 1u);
    }
    EXPECT_LE(r.accuracy.ci_low, r.accuracy.mean);
    EXPECT_GE(r.accuracy.ci_high, r.accuracy.mean);
}

TEST(BinaryScenario, RejectsWrongClassCount) {
    EXPECT_THROW(run_binary_scenario(tiny_multiclass(3, 0.3)), ConfigError);
    EXPECT_THROW(run_multiclass_scenario(tiny_scenario()), ConfigError);
}

TEST(BinaryScenario, EmitsSnapshotsForOfflineAttack) {
    TempDir dir;
    RunOptions opts;
    opts.snapshot_dir = dir.path() / "snaps";
    run_scenario(tiny_scenario(), opts);
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "snaps" / "global.fsnp"));
    EXPECT_TRUE(std::filesystem::exists(dir.path() / "snaps" / "client-00023.fsnp"));
    EXPECT_EQ(line_count(dir.path() / "snaps" / "labels.csv"), 13u);
    EXPECT_EQ(line_count(dir.path() / "snaps" / "targets.csv"), 13u);
    const auto g = load_snapshot(dir.path() / "snaps" / "global.fsnp");
    EXPECT_EQ(g.size(), 4u);
}

TEST(LayerSweep, OneRowPerTensorPlusBaseline) {
    const auto cfg = tiny_scenario();
    const auto sweep = run_layer_sweep(cfg);
    ASSERT_EQ(sweep.rows.size(), 5u);
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(sweep.rows[i].feature_dim, 4u);
        EXPECT_FALSE(sweep.rows[i].baseline);
        EXPECT_EQ(sweep.rows[i].selector.rfind("list:", 0), 0u);
    }
    EXPECT_EQ(sweep.rows[0].selector, "list:hidden.bias");
    EXPECT_TRUE(sweep.rows[4].baseline);
    EXPECT_EQ(sweep.rows[4].selector, "all");
    EXPECT_EQ(sweep.rows[4].feature_dim, 16u);
    EXPECT_EQ(sweep.rows[4].accuracy, run_scenario(cfg).accuracy);
    EXPECT_THROW(run_layer_sweep(tiny_multiclass(3, 0.3)), ConfigError);
}

TEST(Multiclass, SeparatedClassesArePrecise) {
    const auto r = run_scenario(tiny_multiclass(4, 0.05));
    EXPECT_EQ(r.kind, "multiclass");
    ASSERT_EQ(r.per_class.size(), 4u);
    for (const auto& m : r.per_class) EXPECT_GE(m.precision, 0.9);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_DOUBLE_EQ(r.confusion_proportions[c][c], r.per_class[c].precision);
}

TEST(Multiclass, TrainOnlyClassHasEmptyRow) {
    auto cfg = tiny_multiclass(4, 0.3);
    cfg.test_counts.back() = 0;
    cfg.class_names.back() = "train-only";
    const auto r = run_scenario(cfg);
    ASSERT_EQ(r.confusion.size(), 4u);
    EXPECT_EQ(r.confusion.row_sum(3), 0u);
    EXPECT_TRUE(r.per_class[3].recall_undefined);
    bool warned = false;
    for (const auto& w : r.warnings) warned = warned || w.find("'train-only' has no test samples") != std::string::npos;
    EXPECT_TRUE(warned);
    // Every prediction still ranks the train-only candidate.
    for (const auto& p : r.predictions) EXPECT_EQ(p.distances.size(), 4u);
}

TEST(Defense, ZeroSamplesLeavesResultsUnchanged) {
    auto cfg = tiny_scenario();
    const auto d = run_defense_experiment(cfg, 0);
    EXPECT_EQ(d.defense_counts, (std::vector<std::size_t>{0, 0}));
    EXPECT_EQ(d.after.accuracy, d.before.accuracy);
    EXPECT_EQ(d.after.confusion, d.before.confusion);
    EXPECT_EQ(d.after.predictions, d.before.predictions);
    EXPECT_EQ(d.mean_accuracy_delta, 0.0);
    EXPECT_EQ(d.after.operations.defense_steps, 0u);
}

TEST(Defense, CoverageExtensionReducesLeakage) {
    auto cfg = tiny_scenario();
    cfg.defense = DefenseConfig{};
    cfg.defense->samples_per_class = 8;
    cfg.defense->train = TrainConfig{0.1, 600, 0};
    const auto d = run_defense_experiment(cfg, std::nullopt);
    EXPECT_EQ(d.defense_counts, (std::vector<std::size_t>{8, 8}));
    EXPECT_EQ(d.after.operations.defense_steps, 600u);
    EXPECT_FALSE(d.before.scenario.defense.has_value());
    EXPECT_TRUE(d.after.scenario.defense.has_value());
    // Both attacks see the same population and split.
    EXPECT_EQ(d.before.folds[0].train_size, d.after.folds[0].train_size);
    EXPECT_EQ(d.before.folds[0].test_size, d.after.folds[0].test_size);
    for (std::size_t i = 0; i < d.before.roster.size(); ++i) {
        EXPECT_EQ(d.before.roster[i].seed, d.after.roster[i].seed);
    }
    ASSERT_EQ(d.per_class.size(), 2u);
    EXPECT_EQ(d.per_class[0].before, d.before.per_class[0].recall);
    EXPECT_DOUBLE_EQ(d.mean_accuracy_delta, d.after.accuracy.mean - d.before.accuracy.mean);
    EXPECT_LT(d.after.accuracy.mean, d.before.accuracy.mean);
}

TEST(Defense, PerClassOverride) {
    auto cfg = tiny_scenario();
    cfg.defense = DefenseConfig{};
    cfg.defense->per_class["accented"] = 3;
    cfg.defense->train.steps = 10;
    const auto d = run_defense_experiment(cfg, 5);
    EXPECT_EQ(d.defense_counts, (std::vector<std::size_t>{5, 3}));
}

TEST(DefenseSpeakers, DistinctFromPopulation) {
    const auto cfg = tiny_scenario();
    const World world(cfg.world);
    const std::vector<std::size_t> counts = {3, 2};
    const auto spk = make_defense_speakers(cfg, world, counts);
    ASSERT_EQ(spk.size(), 5u);
    EXPECT_EQ(spk[3].speaker_id, "defense-accented-0");
    std::set<std::uint64_t> pop_seeds;
    for (const auto& s : make_population(cfg, world).samples) pop_seeds.insert(s.speaker.seed);
    for (const auto& s : spk) EXPECT_FALSE(pop_seeds.contains(s.seed));
    EXPECT_ERRC(make_defense_speakers(cfg, world, std::vector<std::size_t>{1}), Errc::InvalidArgument);
}

ScenarioConfig unseen_base(double noise, double effect) {
    auto cfg = tiny_scenario();
    cfg.world.noise = noise;
    cfg.world.spec(Attribute::accent).effect = effect;
    return cfg;
}

TEST(Unseen, FiveClassTable) {
    const std::vector<std::uint32_t> values = {2, 3, 4, 5, 6};
    const auto r = run_unseen_class_experiment(unseen_base(0.3, 4.0), values, 4, 4);
    EXPECT_EQ(r.kind, "unseen");
    ASSERT_EQ(r.per_class.size(), 5u);
    EXPECT_EQ(r.classes[0], "accent=2");
    EXPECT_EQ(r.scenario, unseen_base(0.3, 4.0));
    EXPECT_EQ(r.parameters["unseen_values"], Json(values));
    EXPECT_EQ(r.parameters["shadows_per_class"], 4);
    EXPECT_EQ(r.predictions.size(), 20u);
}

TEST(Unseen, PerfectSeparation) {
    const std::vector<std::uint32_t> values = {2, 3, 4, 5, 6};
    const auto r = run_unseen_class_experiment(unseen_base(0.01, 4.0), values, 4, 4);
    for (const auto& m : r.per_class) {
        EXPECT_EQ(m.precision, 1.0);
        EXPECT_EQ(m.recall, 1.0);
        EXPECT_EQ(m.f1, 1.0);
    }
}

TEST(Unseen, ZeroSignalNearChance) {
    const std::vector<std::uint32_t> values = {2, 3, 4, 5, 6};
    double total = 0;
    for (std::uint64_t s = 1; s <= 8; ++s) {
        auto cfg = unseen_base(0.3, 0.0);
        cfg.master_seed = s;
        total += run_unseen_class_experiment(cfg, values, 4, 4).accuracy.mean;
    }
    const double mean = total / 8;
    EXPECT_GT(mean, 0.05);
    EXPECT_LT(mean, 0.4);
}

TEST(Unseen, AppliesDefenseFirst) {
    auto cfg = tiny_scenario();
    cfg.defense = DefenseConfig{};
    cfg.defense->samples_per_class = 2;
    cfg.defense->train.steps = 5;
    const std::vector<std::uint32_t> values = {2, 3};
    const auto r = run_unseen_class_experiment(cfg, values, 3, 3);
    EXPECT_EQ(r.operations.defense_steps, 5u);
}

TEST(Unseen, ArgumentErrors) {
    auto cfg = tiny_scenario();
    cfg.defense = DefenseConfig{};
    auto field = [&](std::vector<std::uint32_t> v, std::size_t shadows, std::size_t tests) {
        try {
            run_unseen_class_experiment(cfg, v, shadows, tests);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    EXPECT_EQ(field({0, 2}, 3, 3), "classes");   // covered by pre-training
    EXPECT_EQ(field({1, 2}, 3, 3), "classes");   // used by the defense
    EXPECT_EQ(field({2, 2}, 3, 3), "classes");   // duplicate
    EXPECT_EQ(field({2, 16}, 3, 3), "classes");  // out of range
    EXPECT_EQ(field({2}, 3, 3), "classes");
    EXPECT_EQ(field({2, 3}, 0, 3), "shadows");
    EXPECT_EQ(field({2, 3}, 3, 0), "tests");
}

}  // namespace
}  // namespace fedleak
