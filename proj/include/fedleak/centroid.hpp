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

/// Nearest-centroid attribute classifier over weight-statistic features.
///
/// The distance between a query z and a centroid c is
///
///     ||z - c||_2 / (||z||_2 * ||c||_2)
///
/// i.e. the Euclidean distance divided by the product of the two norms. This
/// is not cosine distance and is deliberately not replaced by it. Zero-norm
/// vectors make it undefined and are reported as errors.

#include <compare>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fedleak/features.hpp"

namespace fedleak {

struct ClassLabel {
    std::string name;

    auto operator<=>(const ClassLabel&) const = default;
};

struct LabeledFeature {
    FeatureVector features;
    ClassLabel label;
};

class CentroidModel {
public:
    /// Averages the samples of each class. Classes are ordered by first
    /// appearance in `samples`; that order also breaks distance ties.
    /// Throws DimensionMismatch, NoSamplesForClass, FewerThanTwoClasses.
    static CentroidModel fit(std::span<const LabeledFeature> samples);

    /// Direct construction (deserialization, tests). Validates invariants.
    CentroidModel(std::vector<ClassLabel> classes, std::vector<std::vector<double>> centroids,
                  std::vector<std::size_t> counts, std::vector<LayoutEntry> layout = {});

    [[nodiscard]] std::span<const ClassLabel> classes() const noexcept { return classes_; }
    [[nodiscard]] std::span<const double> centroid(std::size_t c) const noexcept { return centroids_[c]; }
    [[nodiscard]] std::size_t count(std::size_t c) const noexcept { return counts_[c]; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t num_classes() const noexcept { return classes_.size(); }
    [[nodiscard]] const std::vector<LayoutEntry>& layout() const noexcept { return layout_; }

    /// Index of `label` in the class ordering, or num_classes() when absent.
    [[nodiscard]] std::size_t index_of(const ClassLabel& label) const noexcept;

private:
    std::vector<ClassLabel> classes_;
    std::vector<std::vector<double>> centroids_;
    std::vector<std::size_t> counts_;
    std::vector<LayoutEntry> layout_;
    std::size_t dim_ = 0;
};

struct Prediction {
    ClassLabel label;
    std::size_t class_index = 0;
    /// One entry per model class, in class order.
    std::vector<double> distances;
};

/// Throws DimensionMismatch, or ZeroNormVector naming "query" or "centroid".
double normalized_distance(std::span<const double> z, std::span<const double> c);

Prediction predict(const CentroidModel& m, const FeatureVector& z);

/// Throws BatchError carrying the index of the first failing query.
std::vector<Prediction> predict_batch(const CentroidModel& m, std::span<const FeatureVector> zs);

/// Sum by recursive halving; error grows with log(n) rather than n.
double pairwise_sum(std::span<const double> values) noexcept;

/// Writes `path` (.fsum: one entry "<class>/<tensor>" per 4-block) and
/// `path` + ".manifest" (class order, sample counts, dimension).
void save_centroid_model(const CentroidModel& m, const std::filesystem::path& path);
CentroidModel load_centroid_model(const std::filesystem::path& path);

}  // namespace fedleak
