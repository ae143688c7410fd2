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

#include <string>

#include "fedleak/scenario.hpp"

namespace fedleak::testing {

/// Small world that trains in milliseconds. Accent carries the signal and
/// only value 0 is covered by pre-training.
inline ScenarioConfig tiny_scenario(std::string name = "tiny") {
    ScenarioConfig c;
    c.name = std::move(name);
    c.world.seed = 3;
    c.world.feature_dim = 8;
    c.world.vocab_size = 5;
    c.world.hidden_dim = 8;
    c.world.frames = 12;
    c.world.noise = 0.3;
    c.world.spec(Attribute::accent).effect = 4.0;
    c.world.spec(Attribute::accent).coverage = {0};
    c.pretrain = TrainConfig{0.1, 300, 0};
    c.corpus_size = 16;
    c.finetune = TrainConfig{0.05, 10, 0};
    c.attribute = Attribute::accent;
    c.class_values = {0, 1};
    c.class_names = {"native", "accented"};
    c.shadow_counts = {6, 6};
    c.test_counts = {6, 6};
    c.feature_mode = FeatureModeTag::delta;
    c.master_seed = 1;
    return c;
}

/// Same world, several accent classes, none covered by pre-training.
inline ScenarioConfig tiny_multiclass(std::size_t classes, double noise) {
    ScenarioConfig c = tiny_scenario("tiny-multi");
    c.world.noise = noise;
    c.world.spec(Attribute::accent).coverage = {15};
    c.class_values.clear();
    c.class_names.clear();
    for (std::uint32_t v = 0; v < classes; ++v) {
        c.class_values.push_back(v);
        c.class_names.push_back("a" + std::to_string(v));
    }
    c.shadow_counts.assign(classes, 5);
    c.test_counts.assign(classes, 5);
    return c;
}

}  // namespace fedleak::testing
