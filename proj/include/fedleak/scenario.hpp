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

/// Declarative experiment description. Scenario files are JSON documents
/// mirroring ScenarioConfig field for field; to_json() emits the normalized
/// form that reports echo, and parsing that echo yields an equal config.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fedleak/eval.hpp"
#include "fedleak/features.hpp"
#include "fedleak/flsim.hpp"

namespace fedleak {

using Json = nlohmann::ordered_json;

enum class FeatureModeTag { raw_weights, delta };

std::string_view to_string(FeatureModeTag m) noexcept;

/// Coverage extension applied by the defense experiment: the global model is
/// trained further on fresh speakers of every attacked class value.
struct DefenseConfig {
    std::size_t samples_per_class = 20;
    /// Overrides keyed by class name.
    std::map<std::string, std::size_t> per_class;
    TrainConfig train{0.1, 3000, 0};

    [[nodiscard]] std::size_t samples_for(const std::string& class_name) const;

    friend bool operator==(const DefenseConfig&, const DefenseConfig&) = default;
};

struct ScenarioConfig {
    std::string name;
    WorldConfig world;
    TrainConfig pretrain{0.1, 3000, 0};
    std::size_t corpus_size = 64;
    TrainConfig finetune;
    Attribute attribute = Attribute::accent;
    std::vector<std::uint32_t> class_values;
    /// Defaults to "<attribute>=<value>".
    std::vector<std::string> class_names;
    std::vector<std::size_t> shadow_counts;
    /// 0 marks a train-only class (designated scheme only).
    std::vector<std::size_t> test_counts;
    std::size_t utterances_per_speaker = 1;
    SplitPlan split;
    FeatureModeTag feature_mode = FeatureModeTag::raw_weights;
    LayerSelector layers = LayerSelector::all();
    std::uint64_t master_seed = 0;
    std::optional<DefenseConfig> defense;

    [[nodiscard]] std::size_t num_classes() const noexcept { return class_values.size(); }
    [[nodiscard]] std::vector<ClassLabel> labels() const;

    /// Throws ConfigError naming the offending field.
    void validate() const;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Missing optional fields take the ScenarioConfig defaults; unknown fields
/// are rejected. Throws ConfigError (also for malformed JSON).
ScenarioConfig scenario_from_json(const Json& j);
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::filesystem::path& path);

Json to_json(const ScenarioConfig& cfg);
Json to_json(const WorldConfig& w);
Json to_json(const TrainConfig& t);
Json to_json(const SplitPlan& p);
Json to_json(const LayerSelector& s);

}  // namespace fedleak
