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

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fedleak/snapshot.hpp"

namespace fedleak {

/// Which tensors contribute to a feature vector. Selection always follows
/// the snapshot's canonical order, whatever order a name list is given in.
class LayerSelector {
public:
    enum class Mode { all, name_prefix, name_list };

    static LayerSelector all() { return LayerSelector(Mode::all, {}, {}); }
    static LayerSelector prefix(std::string p) { return LayerSelector(Mode::name_prefix, std::move(p), {}); }
    static LayerSelector list(std::vector<std::string> names) {
        return LayerSelector(Mode::name_list, {}, std::move(names));
    }

    [[nodiscard]] Mode mode() const noexcept { return mode_; }
    [[nodiscard]] const std::string& prefix_text() const noexcept { return prefix_; }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }

    [[nodiscard]] bool matches(std::string_view tensor_name) const noexcept;

    /// Human-readable form used in reports, e.g. "all", "prefix:hidden.".
    [[nodiscard]] std::string describe() const;

    /// Indices into `tensor_names` (canonical order) that the selector keeps.
    /// Throws EmptySelection when nothing matches and UnknownTensor when a
    /// listed name is absent.
    [[nodiscard]] std::vector<std::size_t> select(std::span<const std::string> tensor_names) const;

    friend bool operator==(const LayerSelector&, const LayerSelector&) = default;

private:
    LayerSelector(Mode m, std::string p, std::vector<std::string> n)
        : mode_(m), prefix_(std::move(p)), names_(std::move(n)) {}

    Mode mode_;
    std::string prefix_;
    std::vector<std::string> names_;
};

/// Statistics of the raw fine-tuned weights, or of their difference from a
/// baseline (normally the global model the client started from).
class FeatureMode {
public:
    static FeatureMode raw_weights() { return FeatureMode(nullptr); }
    static FeatureMode delta(std::shared_ptr<const WeightSnapshot> baseline) {
        return FeatureMode(std::move(baseline));
    }

    [[nodiscard]] bool is_delta() const noexcept { return baseline_ != nullptr; }
    [[nodiscard]] const WeightSnapshot* baseline() const noexcept { return baseline_.get(); }

private:
    explicit FeatureMode(std::shared_ptr<const WeightSnapshot> b) : baseline_(std::move(b)) {}

    std::shared_ptr<const WeightSnapshot> baseline_;
};

struct LayoutEntry {
    std::string tensor;
    std::size_t offset = 0;

    friend bool operator==(const LayoutEntry&, const LayoutEntry&) = default;
};

/// Concatenated (mean, std, min, max) blocks, one per selected tensor.
struct FeatureVector {
    std::vector<double> values;
    std::vector<LayoutEntry> layout;

    [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

inline constexpr std::size_t kStatsPerTensor = 4;

/// Mean, population standard deviation and extrema. Throws EmptyTensor.
TensorStats summarize_values(std::span<const double> values);

TensorStats summarize_tensor(const TensorRecord& p);

/// Full-snapshot statistics in .fsum form.
SummarySnapshot summarize_snapshot(const WeightSnapshot& s);

FeatureVector extract_features(const WeightSnapshot& s, const LayerSelector& sel, const FeatureMode& mode);

/// Features straight from exported statistics. Only meaningful for raw-weight
/// features: a summary cannot be differenced against a baseline.
FeatureVector extract_features(const SummarySnapshot& s, const LayerSelector& sel);

std::size_t feature_dim(const WeightSnapshot& s, const LayerSelector& sel);

/// CSV: a header row "tensor:stat" per column, then one row of values.
void write_feature_csv(std::ostream& out, const FeatureVector& z);

}  // namespace fedleak
