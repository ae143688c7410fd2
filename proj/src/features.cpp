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

#include "fedleak/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "fedleak/error.hpp"
#include "fedleak/kernels.hpp"

namespace fedleak {

bool LayerSelector::matches(std::string_view tensor_name) const noexcept {
    switch (mode_) {
        case Mode::all: return true;
        case Mode::name_prefix: return tensor_name.starts_with(prefix_);
        case Mode::name_list: return std::find(names_.begin(), names_.end(), tensor_name) != names_.end();
    }
    return false;
}

std::string LayerSelector::describe() const {
    switch (mode_) {
        case Mode::all: return "all";
        case Mode::name_prefix: return "prefix:" + prefix_;
        case Mode::name_list: {
            std::string out = "list:";
            for (std::size_t i = 0; i < names_.size(); ++i) {
                if (i) out += ',';
                out += names_[i];
            }
            return out;
        }
    }
    return {};
}

std::vector<std::size_t> LayerSelector::select(std::span<const std::string> tensor_names) const {
    if (mode_ == Mode::name_list) {
        for (const std::string& n : names_) {
            if (std::find(tensor_names.begin(), tensor_names.end(), n) == tensor_names.end()) {
                throw Error(Errc::UnknownTensor, "selector names tensor '" + n + "' which the snapshot lacks");
            }
        }
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < tensor_names.size(); ++i) {
        if (matches(tensor_names[i])) out.push_back(i);
    }
    if (out.empty()) throw Error(Errc::EmptySelection, "selector '" + describe() + "' matches no tensor");
    return out;
}

TensorStats summarize_values(std::span<const double> values) {
    if (values.empty()) throw Error(Errc::EmptyTensor, "cannot summarize an empty tensor");
    const kernels::Moments m = kernels::moments(values);
    if (m.min == m.max) return {m.min, 0.0, m.min, m.max};
    TensorStats st;
    st.mean = std::clamp(m.mean, m.min, m.max);
    st.std = std::sqrt(m.m2 / static_cast<double>(m.count));
    st.min = m.min;
    st.max = m.max;
    return st;
}

TensorStats summarize_tensor(const TensorRecord& p) {
    if (p.values.empty()) throw Error(Errc::EmptyTensor, "tensor '" + p.name + "' has no elements");
    return summarize_values(p.values);
}

SummarySnapshot summarize_snapshot(const WeightSnapshot& s) {
    std::vector<SummaryEntry> entries;
    entries.reserve(s.size());
    for (const TensorRecord& t : s.tensors()) entries.push_back({t.name, summarize_tensor(t)});
    return SummarySnapshot(s.model_id(), std::move(entries));
}

namespace {

template <typename Items>
std::vector<std::string> names_of(const Items& items) {
    std::vector<std::string> out;
    out.reserve(items.size());
    for (const auto& item : items) out.push_back(item.name);
    return out;
}

void append_block(FeatureVector& z, const std::string& name, const TensorStats& st) {
    z.layout.push_back({name, z.values.size()});
    z.values.insert(z.values.end(), {st.mean, st.std, st.min, st.max});
}

}  // namespace

FeatureVector extract_features(const WeightSnapshot& s, const LayerSelector& sel, const FeatureMode& mode) {
    const WeightSnapshot* baseline = mode.baseline();
    if (baseline != nullptr) require_same_architecture(s, *baseline);

    const std::vector<std::string> names = names_of(s.tensors());
    const std::vector<std::size_t> picked = sel.select(names);

    FeatureVector z;
    z.values.reserve(picked.size() * kStatsPerTensor);
    std::vector<double> scratch;
    for (std::size_t idx : picked) {
        const TensorRecord& t = s.tensors()[idx];
        if (baseline == nullptr) {
            append_block(z, t.name, summarize_tensor(t));
            continue;
        }
        // Same subtraction as snapshot_delta so both routes agree bit-for-bit.
        const TensorRecord& g = baseline->tensors()[idx];
        scratch.resize(t.values.size());
        for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] = t.values[k] - g.values[k];
        if (scratch.empty()) throw Error(Errc::EmptyTensor, "tensor '" + t.name + "' has no elements");
        append_block(z, t.name, summarize_values(scratch));
    }
    return z;
}

FeatureVector extract_features(const SummarySnapshot& s, const LayerSelector& sel) {
    const std::vector<std::string> names = names_of(s.entries());
    FeatureVector z;
    for (std::size_t idx : sel.select(names)) append_block(z, s.entries()[idx].name, s.entries()[idx].stats);
    return z;
}

std::size_t feature_dim(const WeightSnapshot& s, const LayerSelector& sel) {
    return kStatsPerTensor * sel.select(names_of(s.tensors())).size();
}

void write_feature_csv(std::ostream& out, const FeatureVector& z) {
    static constexpr const char* kStatNames[kStatsPerTensor] = {"mean", "std", "min", "max"};
    for (std::size_t b = 0; b < z.layout.size(); ++b) {
        for (std::size_t k = 0; k < kStatsPerTensor; ++k) {
            if (b || k) out << ',';
            out << z.layout[b].tensor << ':' << kStatNames[k];
        }
    }
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < z.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", z.values[i]);
        if (i) out << ',';
        out << buf;
    }
    out << '\n';
}

}  // namespace fedleak
