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

#include "fedleak/snapshot.hpp"

#include <algorithm>
#include <cmath>

#include "fedleak/error.hpp"

namespace fedleak {

std::size_t TensorRecord::element_count() const noexcept {
    std::size_t n = 1;
    for (std::uint32_t d : shape) n *= d;
    return n;
}

WeightSnapshot::WeightSnapshot(std::string model_id, std::vector<TensorRecord> tensors)
    : model_id_(std::move(model_id)), tensors_(std::move(tensors)) {
    std::stable_sort(tensors_.begin(), tensors_.end(),
                     [](const TensorRecord& a, const TensorRecord& b) { return a.name < b.name; });
}

const TensorRecord* WeightSnapshot::find(std::string_view name) const noexcept {
    auto it = std::lower_bound(tensors_.begin(), tensors_.end(), name,
                               [](const TensorRecord& t, std::string_view n) { return t.name < n; });
    if (it == tensors_.end() || it->name != name) return nullptr;
    return &*it;
}

SummarySnapshot::SummarySnapshot(std::string model_id, std::vector<SummaryEntry> entries)
    : model_id_(std::move(model_id)), entries_(std::move(entries)) {
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const SummaryEntry& a, const SummaryEntry& b) { return a.name < b.name; });
}

namespace {

template <typename Item>
void check_names(std::span<const Item> items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string& name = items[i].name;
        if (name.empty()) throw Error(Errc::InvalidArgument, "tensor at position " + std::to_string(i) + " has an empty name");
        if (i == 0) continue;
        const std::string& prev = items[i - 1].name;
        if (prev == name) throw Error(Errc::DuplicateTensorName, "tensor '" + name + "' appears more than once");
        // char_traits<char> compares as unsigned char, i.e. by byte value.
        if (!(prev < name)) {
            throw Error(Errc::UnsortedTensors, "tensor '" + name + "' follows '" + prev + "' out of canonical order");
        }
    }
}

}  // namespace

void validate_snapshot(const WeightSnapshot& s) {
    if (s.size() == 0) throw Error(Errc::EmptySnapshot, "snapshot '" + s.model_id() + "' has no tensors");
    check_names(s.tensors());
    for (const TensorRecord& t : s.tensors()) {
        for (std::uint32_t d : t.shape) {
            if (d == 0) throw Error(Errc::ShapeMismatch, "tensor '" + t.name + "' has a zero dimension");
        }
        if (t.values.size() != t.element_count()) {
            throw Error(Errc::ShapeMismatch, "tensor '" + t.name + "' has " + std::to_string(t.values.size()) +
                                                 " values but its shape implies " + std::to_string(t.element_count()));
        }
        for (std::size_t i = 0; i < t.values.size(); ++i) {
            if (!std::isfinite(t.values[i])) {
                throw Error(Errc::NonFiniteValue,
                            "tensor '" + t.name + "' holds a non-finite value at index " + std::to_string(i));
            }
        }
    }
}

void validate_summary(const SummarySnapshot& s) {
    if (s.size() == 0) throw Error(Errc::EmptySnapshot, "summary '" + s.model_id() + "' has no entries");
    check_names(s.entries());
    for (const SummaryEntry& e : s.entries()) {
        const TensorStats& st = e.stats;
        if (!std::isfinite(st.mean) || !std::isfinite(st.std) || !std::isfinite(st.min) || !std::isfinite(st.max)) {
            throw Error(Errc::NonFiniteValue, "entry '" + e.name + "' holds a non-finite statistic");
        }
        if (st.std < 0.0 || st.min > st.mean || st.mean > st.max) {
            throw Error(Errc::InvalidStatistics, "entry '" + e.name + "' violates min <= mean <= max or std >= 0");
        }
    }
}

bool same_architecture(const WeightSnapshot& a, const WeightSnapshot& b) noexcept {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.tensors()[i].name != b.tensors()[i].name || a.tensors()[i].shape != b.tensors()[i].shape) return false;
    }
    return true;
}

void require_same_architecture(const WeightSnapshot& a, const WeightSnapshot& b) {
    for (const TensorRecord& t : a.tensors()) {
        const TensorRecord* other = b.find(t.name);
        if (other == nullptr) {
            throw Error(Errc::ArchitectureMismatch, "tensor '" + t.name + "' missing from '" + b.model_id() + "'");
        }
        if (other->shape != t.shape) throw Error(Errc::ArchitectureMismatch, "tensor '" + t.name + "' differs in shape");
    }
    for (const TensorRecord& t : b.tensors()) {
        if (a.find(t.name) == nullptr) {
            throw Error(Errc::ArchitectureMismatch, "tensor '" + t.name + "' missing from '" + a.model_id() + "'");
        }
    }
}

WeightSnapshot snapshot_delta(const WeightSnapshot& w_s, const WeightSnapshot& w_g) {
    require_same_architecture(w_s, w_g);
    std::vector<TensorRecord> out;
    out.reserve(w_s.size());
    for (std::size_t i = 0; i < w_s.size(); ++i) {
        const TensorRecord& a = w_s.tensors()[i];
        const TensorRecord& b = w_g.tensors()[i];
        TensorRecord d{a.name, a.shape, std::vector<double>(a.values.size())};
        for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = a.values[k] - b.values[k];
        out.push_back(std::move(d));
    }
    return WeightSnapshot(w_s.model_id() + "+delta", std::move(out));
}

}  // namespace fedleak
