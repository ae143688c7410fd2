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

#include "fedleak/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "fedleak/error.hpp"

namespace fedleak {

std::string_view to_string(FeatureModeTag m) noexcept {
    return m == FeatureModeTag::delta ? "delta" : "raw_weights";
}

std::size_t DefenseConfig::samples_for(const std::string& class_name) const {
    const auto it = per_class.find(class_name);
    return it == per_class.end() ? samples_per_class : it->second;
}

std::vector<ClassLabel> ScenarioConfig::labels() const {
    std::vector<ClassLabel> out;
    out.reserve(class_names.size());
    for (const std::string& n : class_names) out.push_back(ClassLabel{n});
    return out;
}

void ScenarioConfig::validate() const {
    if (name.empty()) throw ConfigError("name", "must not be empty");
    world.validate();
    pretrain.validate("pretrain");
    if (corpus_size == 0) throw ConfigError("pretrain.corpus_size", "must be positive");
    finetune.validate("finetune");

    const AttributeSpec& spec = world.spec(attribute);
    if (class_values.size() < 2) throw ConfigError("class_values", "need at least 2 classes");
    std::set<std::uint32_t> seen_values;
    for (std::uint32_t v : class_values) {
        if (v >= spec.cardinality) {
            throw ConfigError("class_values", "value " + std::to_string(v) + " exceeds the cardinality of " +
                                                  std::string(to_string(attribute)));
        }
        if (!seen_values.insert(v).second) throw ConfigError("class_values", "duplicate value " + std::to_string(v));
    }
    if (class_names.size() != class_values.size()) {
        throw ConfigError("class_names", "expected " + std::to_string(class_values.size()) + " names");
    }
    std::set<std::string> seen_names;
    for (const std::string& n : class_names) {
        if (n.empty()) throw ConfigError("class_names", "names must not be empty");
        if (!seen_names.insert(n).second) throw ConfigError("class_names", "duplicate name '" + n + "'");
    }
    if (shadow_counts.size() != class_values.size()) {
        throw ConfigError("shadow_counts", "expected " + std::to_string(class_values.size()) + " entries");
    }
    if (test_counts.size() != class_values.size()) {
        throw ConfigError("test_counts", "expected " + std::to_string(class_values.size()) + " entries");
    }
    for (std::size_t c = 0; c < shadow_counts.size(); ++c) {
        if (shadow_counts[c] == 0) throw ConfigError("shadow_counts", "class '" + class_names[c] + "' has no shadows");
    }
    if (utterances_per_speaker == 0) throw ConfigError("utterances_per_speaker", "must be positive");

    const std::size_t tested = static_cast<std::size_t>(
        std::count_if(test_counts.begin(), test_counts.end(), [](std::size_t n) { return n > 0; }));
    switch (split.scheme) {
        case SplitPlan::Scheme::designated:
            if (tested == 0) throw ConfigError("test_counts", "at least one class needs test speakers");
            break;
        case SplitPlan::Scheme::holdout:
            if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
                throw ConfigError("split.train_fraction", "must lie in (0, 1)");
            }
            [[fallthrough]];
        case SplitPlan::Scheme::k_fold:
        case SplitPlan::Scheme::leave_one_speaker_out:
            if (tested != test_counts.size()) {
                throw ConfigError("test_counts", "train-only classes need the designated split scheme");
            }
            break;
    }
    if (split.scheme == SplitPlan::Scheme::k_fold && split.k < 2) throw ConfigError("split.k", "must be at least 2");

    if (defense) {
        defense->train.validate("defense");
        for (const auto& [cls, n] : defense->per_class) {
            (void)n;
            if (!seen_names.contains(cls)) throw ConfigError("defense.per_class", "unknown class '" + cls + "'");
        }
    }
}

namespace {

// Reads fields out of one JSON object, tracking the dotted path for errors
// and rejecting keys nobody asked for.
class ObjectReader {
public:
    ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    [[nodiscard]] std::string field(std::string_view key) const {
        return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
    }

    const Json* find(std::string_view key) {
        used_.insert(std::string(key));
        const auto it = j_.find(std::string(key));
        return it == j_.end() ? nullptr : &*it;
    }

    void read(std::string_view key, std::string& out) {
        if (const Json* v = find(key)) {
            if (!v->is_string()) throw ConfigError(field(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    void read(std::string_view key, double& out) {
        if (const Json* v = find(key)) {
            if (!v->is_number()) throw ConfigError(field(key), "expected a number");
            out = v->get<double>();
        }
    }

    void read(std::string_view key, bool& out) {
        if (const Json* v = find(key)) {
            if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    template <typename U>
        requires std::is_unsigned_v<U>
    void read(std::string_view key, U& out) {
        if (const Json* v = find(key)) out = unsigned_value<U>(*v, field(key));
    }

    template <typename U>
    void read(std::string_view key, std::vector<U>& out) {
        if (const Json* v = find(key)) {
            if (!v->is_array()) throw ConfigError(field(key), "expected an array");
            out.clear();
            for (const Json& e : *v) {
                if constexpr (std::is_same_v<U, std::string>) {
                    if (!e.is_string()) throw ConfigError(field(key), "expected an array of strings");
                    out.push_back(e.get<std::string>());
                } else {
                    out.push_back(unsigned_value<U>(e, field(key)));
                }
            }
        }
    }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            (void)value;
            if (!used_.contains(key)) throw ConfigError(field(key), "unknown field");
        }
    }

    template <typename U>
    static U unsigned_value(const Json& v, const std::string& field) {
        // Documents built in code hold signed integers even when non-negative.
        if (!v.is_number_integer()) throw ConfigError(field, "expected a non-negative integer");
        if (!v.is_number_unsigned() && v.get<std::int64_t>() < 0) throw ConfigError(field, "must not be negative");
        const auto raw = v.get<std::uint64_t>();
        if (raw > std::numeric_limits<U>::max()) throw ConfigError(field, "value out of range");
        return static_cast<U>(raw);
    }

private:
    const Json& j_;
    std::string path_;
    std::set<std::string> used_;
};

TrainConfig read_train(ObjectReader& r, TrainConfig t) {
    r.read("learning_rate", t.learning_rate);
    r.read("steps", t.steps);
    r.read("seed", t.seed);
    return t;
}

WorldConfig read_world(const Json& j) {
    WorldConfig w;
    ObjectReader r(j, "world");
    r.read("seed", w.seed);
    r.read("feature_dim", w.feature_dim);
    r.read("vocab_size", w.vocab_size);
    r.read("hidden_dim", w.hidden_dim);
    r.read("frames", w.frames);
    r.read("noise", w.noise);
    if (const Json* attrs = r.find("attributes")) {
        ObjectReader ar(*attrs, "world.attributes");
        for (Attribute a : kAllAttributes) {
            const std::string name(to_string(a));
            const Json* one = ar.find(name);
            if (one == nullptr) continue;
            AttributeSpec& spec = w.spec(a);
            ObjectReader sr(*one, ar.field(name));
            const std::uint32_t old_cardinality = spec.cardinality;
            sr.read("cardinality", spec.cardinality);
            sr.read("effect", spec.effect);
            if (sr.find("coverage") == nullptr && spec.cardinality != old_cardinality) {
                // Default coverage tracks the declared cardinality.
                spec.coverage.clear();
                for (std::uint32_t v = 0; v < spec.cardinality; ++v) spec.coverage.push_back(v);
            }
            sr.read("coverage", spec.coverage);
            sr.finish();
        }
        ar.finish();
    }
    r.finish();
    return w;
}

SplitPlan read_split(const Json& j) {
    SplitPlan p;
    ObjectReader r(j, "split");
    std::string scheme(to_string(p.scheme));
    r.read("scheme", scheme);
    try {
        p.scheme = parse_scheme(scheme);
    } catch (const Error&) {
        throw ConfigError("split.scheme", "unknown scheme '" + scheme + "'");
    }
    r.read("train_fraction", p.train_fraction);
    r.read("k", p.k);
    r.read("stratified", p.stratified);
    r.read("seed", p.seed);
    r.finish();
    return p;
}

LayerSelector read_layers(const Json& j) {
    ObjectReader r(j, "layers");
    std::string mode = "all";
    r.read("mode", mode);
    LayerSelector out = LayerSelector::all();
    if (mode == "all") {
    } else if (mode == "prefix") {
        std::string prefix;
        r.read("prefix", prefix);
        if (prefix.empty()) throw ConfigError("layers.prefix", "must not be empty");
        out = LayerSelector::prefix(prefix);
    } else if (mode == "list") {
        std::vector<std::string> names;
        r.read("names", names);
        if (names.empty()) throw ConfigError("layers.names", "must not be empty");
        out = LayerSelector::list(names);
    } else {
        throw ConfigError("layers.mode", "expected all, prefix or list");
    }
    r.finish();
    return out;
}

// Counts may be given as one number for every class.
void read_counts(ObjectReader& r, std::string_view key, std::vector<std::size_t>& out, std::size_t classes) {
    const Json* v = r.find(key);
    if (v == nullptr) return;
    if (v->is_number()) {
        out.assign(classes, ObjectReader::unsigned_value<std::size_t>(*v, r.field(key)));
        return;
    }
    if (!v->is_array()) throw ConfigError(r.field(key), "expected a number or an array");
    out.clear();
    for (const Json& e : *v) out.push_back(ObjectReader::unsigned_value<std::size_t>(e, r.field(key)));
}

}  // namespace

ScenarioConfig scenario_from_json(const Json& j) {
    ScenarioConfig c;
    ObjectReader r(j, "");
    r.read("name", c.name);
    if (const Json* w = r.find("world")) c.world = read_world(*w);
    if (const Json* p = r.find("pretrain")) {
        ObjectReader pr(*p, "pretrain");
        c.pretrain = read_train(pr, c.pretrain);
        pr.read("corpus_size", c.corpus_size);
        pr.finish();
    }
    if (const Json* f = r.find("finetune")) {
        ObjectReader fr(*f, "finetune");
        c.finetune = read_train(fr, c.finetune);
        fr.finish();
    }
    if (const Json* a = r.find("attribute")) {
        if (!a->is_string()) throw ConfigError("attribute", "expected a string");
        const auto parsed = parse_attribute(a->get<std::string>());
        if (!parsed) throw ConfigError("attribute", "unknown attribute '" + a->get<std::string>() + "'");
        c.attribute = *parsed;
    }
    r.read("class_values", c.class_values);
    r.read("class_names", c.class_names);
    if (c.class_names.empty()) {
        for (std::uint32_t v : c.class_values) c.class_names.push_back(std::string(to_string(c.attribute)) + "=" + std::to_string(v));
    }
    read_counts(r, "shadow_counts", c.shadow_counts, c.class_values.size());
    read_counts(r, "test_counts", c.test_counts, c.class_values.size());
    r.read("utterances_per_speaker", c.utterances_per_speaker);
    if (const Json* s = r.find("split")) c.split = read_split(*s);
    std::string mode(to_string(c.feature_mode));
    r.read("feature_mode", mode);
    if (mode == "delta") {
        c.feature_mode = FeatureModeTag::delta;
    } else if (mode == "raw_weights") {
        c.feature_mode = FeatureModeTag::raw_weights;
    } else {
        throw ConfigError("feature_mode", "expected raw_weights or delta");
    }
    if (const Json* l = r.find("layers")) c.layers = read_layers(*l);
    r.read("master_seed", c.master_seed);
    if (const Json* d = r.find("defense"); d != nullptr && !d->is_null()) {
        DefenseConfig def;
        ObjectReader dr(*d, "defense");
        dr.read("samples_per_class", def.samples_per_class);
        def.train = read_train(dr, def.train);
        if (const Json* pc = dr.find("per_class")) {
            if (!pc->is_object()) throw ConfigError("defense.per_class", "expected an object");
            for (const auto& [k, v] : pc->items()) {
                def.per_class[k] = ObjectReader::unsigned_value<std::size_t>(v, "defense.per_class." + k);
            }
        }
        dr.finish();
        c.defense = std::move(def);
    }
    r.finish();
    c.validate();
    return c;
}

ScenarioConfig parse_scenario(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError("<document>", std::string("malformed JSON: ") + e.what());
    }
    return scenario_from_json(j);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<document>", "cannot open scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

Json to_json(const TrainConfig& t) {
    return Json{{"learning_rate", t.learning_rate}, {"steps", t.steps}, {"seed", t.seed}};
}

Json to_json(const WorldConfig& w) {
    Json attrs = Json::object();
    for (Attribute a : kAllAttributes) {
        const AttributeSpec& s = w.spec(a);
        attrs[std::string(to_string(a))] =
            Json{{"cardinality", s.cardinality}, {"effect", s.effect}, {"coverage", s.coverage}};
    }
    return Json{{"seed", w.seed},
                {"feature_dim", w.feature_dim},
                {"vocab_size", w.vocab_size},
                {"hidden_dim", w.hidden_dim},
                {"frames", w.frames},
                {"noise", w.noise},
                {"attributes", std::move(attrs)}};
}

Json to_json(const SplitPlan& p) {
    return Json{{"scheme", to_string(p.scheme)},
                {"train_fraction", p.train_fraction},
                {"k", p.k},
                {"stratified", p.stratified},
                {"seed", p.seed}};
}

Json to_json(const LayerSelector& s) {
    switch (s.mode()) {
        case LayerSelector::Mode::all: return Json{{"mode", "all"}};
        case LayerSelector::Mode::name_prefix: return Json{{"mode", "prefix"}, {"prefix", s.prefix_text()}};
        case LayerSelector::Mode::name_list: return Json{{"mode", "list"}, {"names", s.names()}};
    }
    return Json{};
}

Json to_json(const ScenarioConfig& c) {
    Json pre = to_json(c.pretrain);
    pre["corpus_size"] = c.corpus_size;
    Json j{{"name", c.name},
           {"world", to_json(c.world)},
           {"pretrain", std::move(pre)},
           {"finetune", to_json(c.finetune)},
           {"attribute", to_string(c.attribute)},
           {"class_values", c.class_values},
           {"class_names", c.class_names},
           {"shadow_counts", c.shadow_counts},
           {"test_counts", c.test_counts},
           {"utterances_per_speaker", c.utterances_per_speaker},
           {"split", to_json(c.split)},
           {"feature_mode", to_string(c.feature_mode)},
           {"layers", to_json(c.layers)},
           {"master_seed", c.master_seed}};
    if (c.defense) {
        Json per = Json::object();
        for (const auto& [k, v] : c.defense->per_class) per[k] = v;
        Json d{{"samples_per_class", c.defense->samples_per_class}, {"per_class", std::move(per)}};
        d.update(to_json(c.defense->train));
        j["defense"] = std::move(d);
    }
    return j;
}

}  // namespace fedleak
