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

/// Evaluation protocols: splits, per-fold scoring, confusion matrices and
/// t-based confidence intervals over fold accuracies.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/centroid.hpp"

namespace fedleak {

struct SplitPlan {
    /// `designated`: every sample carries a fixed train/test role (shadow vs
    /// target clients); used when test counts are set per class, including
    /// train-only classes.
    enum class Scheme { holdout, k_fold, leave_one_speaker_out, designated };

    Scheme scheme = Scheme::designated;
    double train_fraction = 0.75;
    std::size_t k = 5;
    bool stratified = true;
    std::uint64_t seed = 0;

    friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

std::string_view to_string(SplitPlan::Scheme s) noexcept;

/// Throws Error(UnknownScheme).
SplitPlan::Scheme parse_scheme(std::string_view name);

struct SampleTag {
    std::size_t class_index = 0;
    std::string speaker_id;
    bool designated_train = false;
};

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Index sets are returned sorted ascending. Throws TooFewSamples or
/// InvalidArgument for out-of-range plan parameters.
std::vector<Fold> make_splits(std::span<const SampleTag> samples, const SplitPlan& plan);

/// Square count matrix; rows are true classes, columns predicted classes.
class ConfusionMatrix {
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {}

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t operator()(std::size_t truth, std::size_t predicted) const noexcept {
        return counts_[truth * n_ + predicted];
    }
    void add(std::size_t truth, std::size_t predicted, std::size_t count = 1) noexcept {
        counts_[truth * n_ + predicted] += count;
    }
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);

    [[nodiscard]] std::size_t row_sum(std::size_t r) const noexcept;
    [[nodiscard]] std::size_t column_sum(std::size_t c) const noexcept;
    [[nodiscard]] std::size_t trace() const noexcept;
    [[nodiscard]] std::size_t total() const noexcept;

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::size_t n_ = 0;
    std::vector<std::size_t> counts_;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;  // true instances
    std::size_t predicted = 0;
    bool precision_undefined = false;  // column empty
    bool recall_undefined = false;     // row empty

    friend bool operator==(const ClassMetrics&, const ClassMetrics&) = default;
};

/// Precision = M[c,c] / column_sum(c), recall = M[c,c] / row_sum(c); an empty
/// denominator yields 0 and sets the matching flag. F1 is 0 when both are 0.
std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& m);

/// Column-normalized proportions, so the diagonal equals per-class precision.
/// All-zero columns stay zero.
std::vector<std::vector<double>> confusion_proportions(const ConfusionMatrix& m);

struct FoldResult {
    double accuracy = 0.0;
    ConfusionMatrix confusion;
    std::vector<ClassMetrics> per_class;
    std::vector<Prediction> predictions;
};

/// Scores the model on labeled test vectors. The confusion axes follow
/// `label_space` (defaults to the model's classes); every model class must
/// appear in it. Throws EmptyTestSet, UnknownClass, and prediction errors.
FoldResult evaluate_fold(const CentroidModel& model, std::span<const LabeledFeature> test,
                         std::span<const ClassLabel> label_space = {});

struct IntervalSummary {
    double mean = 0.0;
    double standard_error = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    std::size_t dof = 0;
    /// Set for a single value: SE is 0 and the interval collapses to the mean.
    bool degenerate = false;

    friend bool operator==(const IntervalSummary&, const IntervalSummary&) = default;
};

/// Two-sided 95% Student-t critical value: tabulated to 4 decimals for
/// dof 1..120, normal limit 1.9600 beyond. dof must be positive.
double t_critical_95(std::size_t dof);

/// Mean, SE = sample SD / sqrt(n), CI = mean +/- t(n-1) * SE.
/// Throws EmptyValues; only level 0.95 is tabulated (InvalidArgument otherwise).
IntervalSummary summarize_folds(std::span<const double> values, double level = 0.95);

}  // namespace fedleak
