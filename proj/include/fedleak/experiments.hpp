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

/// End-to-end experiment protocols.
///
/// Every run pre-trains a global model on a coverage-restricted corpus,
/// fine-tunes one client model per (speaker, utterance) sample, extracts
/// features, and scores the centroid attack fold by fold. All randomness is
/// derived from the scenario's master seed:
///
///   init       derive_seed(master, {1, pretrain.seed})
///   corpus     derive_seed(master, {2})
///   speaker    derive_seed(master, {3, value, i})
///   profile    derive_seed(master, {4, value, i})   nuisance attributes
///   split      derive_seed(master, {5, split.seed})
///   defense    derive_seed(master, {6, value, i}) / {7, value, i}
///
/// Speakers are keyed by attribute value, so a class keeps its speakers when
/// other classes are added or removed.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "fedleak/flsim.hpp"
#include "fedleak/report.hpp"
#include "fedleak/scenario.hpp"

namespace fedleak {

struct RunOptions {
    std::size_t workers = 1;
    /// When set, the global model, every client model and labels.csv /
    /// targets.csv are written here for offline attacks.
    std::optional<std::filesystem::path> snapshot_dir;
};

/// Client samples of a scenario: one entry per (speaker, utterance).
struct Population {
    std::vector<LabeledSpeaker> samples;
    std::vector<SampleTag> tags;
    std::vector<RosterEntry> roster;
};

/// Builds the shadow and target speakers for the configured classes.
/// Nuisance attributes are drawn uniformly from their coverage sets.
Population make_population(const ScenarioConfig& cfg, const World& world);

/// Fresh speakers of every class value for coverage extension; counts per
/// class as given.
std::vector<SyntheticSpeaker> make_defense_speakers(const ScenarioConfig& cfg, const World& world,
                                                    std::span<const std::size_t> per_class);

/// Global model of the scenario: deterministic init and coverage corpus.
WeightSnapshot pretrain_scenario_global(const ScenarioConfig& cfg, const World& world);

/// Dispatches on the class count.
ReportDocument run_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Requires exactly 2 classes (ConfigError on class_values otherwise).
ReportDocument run_binary_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// Requires at least 3 classes; zero test counts mark train-only classes.
ReportDocument run_multiclass_scenario(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// One row per tensor of the model plus an all-tensors baseline row, all
/// scored on the same client models and folds.
LayerSweepReport run_layer_sweep(const ScenarioConfig& cfg, const RunOptions& opts = {});

/// BEFORE attacks the original global model; AFTER repeats the attack on the
/// same speakers after the global model is trained further on fresh speakers
/// of every class. `samples_per_class` replaces the scenario's default count
/// (per-class overrides in the scenario still apply).
DefenseReport run_defense_experiment(const ScenarioConfig& cfg, std::optional<std::size_t> samples_per_class,
                                     const RunOptions& opts = {});

/// Attacks classes the global model never saw, neither in pre-training nor
/// in the scenario's defense step (applied first when configured). Throws
/// ConfigError("classes") when a value is covered or defended.
ReportDocument run_unseen_class_experiment(const ScenarioConfig& cfg, std::span<const std::uint32_t> unseen_values,
                                           std::size_t shadows_per_class, std::size_t tests_per_class,
                                           const RunOptions& opts = {});

}  // namespace fedleak
