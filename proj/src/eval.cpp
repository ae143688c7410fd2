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

#include "fedleak/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fedleak/error.hpp"
#include "fedleak/rng.hpp"

namespace fedleak {

std::string_view to_string(SplitPlan::Scheme s) noexcept {
    switch (s) {
        case SplitPlan::Scheme::holdout: return "holdout";
        case SplitPlan::Scheme::k_fold: return "k_fold";
        case SplitPlan::Scheme::leave_one_speaker_out: return "leave_one_speaker_out";
        case SplitPlan::Scheme::designated: return "designated";
    }
    return "unknown";
}

SplitPlan::Scheme parse_scheme(std::string_view name) {
    for (auto s : {SplitPlan::Scheme::holdout, SplitPlan::Scheme::k_fold, SplitPlan::Scheme::leave_one_speaker_out,
                   SplitPlan::Scheme::designated}) {
        if (to_string(s) == name) return s;
    }
    if (name == "loso") return SplitPlan::Scheme::leave_one_speaker_out;
    throw Error(Errc::UnknownScheme, "split scheme '" + std::string(name) + "'");
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(std::span<const SampleTag> samples) {
    std::size_t classes = 0;
    for (const SampleTag& s : samples) classes = std::max(classes, s.class_index + 1);
    std::vector<std::vector<std::size_t>> out(classes);
    for (std::size_t i = 0; i < samples.size(); ++i) out[samples[i].class_index].push_back(i);
    return out;
}

void finalize(std::vector<Fold>& folds) {
    for (Fold& f : folds) {
        std::sort(f.train.begin(), f.train.end());
        std::sort(f.test.begin(), f.test.end());
    }
}

// Puts every index not in `test` into `train`.
void complement(Fold& f, std::size_t n) {
    std::vector<bool> in_test(n, false);
    for (std::size_t i : f.test) in_test[i] = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (!in_test[i]) f.train.push_back(i);
    }
}

std::vector<Fold> holdout(std::span<const SampleTag> samples, const SplitPlan& plan) {
    if (!(plan.train_fraction > 0.0 && plan.train_fraction < 1.0)) {
        throw Error(Errc::InvalidArgument, "holdout train_fraction must lie in (0, 1)");
    }
    Fold f;
    auto take = [&](std::vector<std::size_t> idx, std::uint64_t stream, const std::string& what) {
        if (idx.size() < 2) throw Error(Errc::TooFewSamples, what + " needs at least 2 samples for a holdout split");
        SplitMix64 rng(derive_seed(plan.seed, {stream}));
        rng.shuffle(std::span<std::size_t>(idx));
        auto n_train = static_cast<std::size_t>(std::llround(plan.train_fraction * static_cast<double>(idx.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        f.train.insert(f.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
        f.test.insert(f.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
    };
    if (plan.stratified) {
        const auto by_class = indices_by_class(samples);
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (by_class[c].empty()) continue;
            take(by_class[c], c, "class " + std::to_string(c));
        }
    } else {
        std::vector<std::size_t> all(samples.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        take(std::move(all), 0, "the sample set");
    }
    std::vector<Fold> out{std::move(f)};
    finalize(out);
    return out;
}

std::vector<Fold> k_fold(std::span<const SampleTag> samples, const SplitPlan& plan) {
    if (plan.k < 2) throw Error(Errc::InvalidArgument, "k_fold needs k >= 2");
    std::vector<Fold> folds(plan.k);
    std::size_t next_fold = 0;
    auto deal = [&](std::vector<std::size_t> idx, std::uint64_t stream) {
        SplitMix64 rng(derive_seed(plan.seed, {stream}));
        rng.shuffle(std::span<std::size_t>(idx));
        for (std::size_t i : idx) {
            folds[next_fold].test.push_back(i);
            next_fold = (next_fold + 1) % plan.k;
        }
    };
    if (plan.stratified) {
        const auto by_class = indices_by_class(samples);
        for (std::size_t c = 0; c < by_class.size(); ++c) {
            if (by_class[c].empty()) continue;
            if (by_class[c].size() < plan.k) {
                throw Error(Errc::TooFewSamples, "class " + std::to_string(c) + " has " +
                                                     std::to_string(by_class[c].size()) + " samples, fewer than k=" +
                                                     std::to_string(plan.k));
            }
            deal(by_class[c], c);
        }
    } else {
        if (samples.size() < plan.k) {
            throw Error(Errc::TooFewSamples, std::to_string(samples.size()) + " samples, fewer than k=" +
                                                 std::to_string(plan.k));
        }
        std::vector<std::size_t> all(samples.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        deal(std::move(all), 0);
    }
    for (Fold& f : folds) complement(f, samples.size());
    finalize(folds);
    return folds;
}

std::vector<Fold> leave_one_speaker_out(std::span<const SampleTag> samples) {
    std::vector<std::string> speakers;
    std::vector<Fold> folds;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto it = std::find(speakers.begin(), speakers.end(), samples[i].speaker_id);
        std::size_t f = static_cast<std::size_t>(it - speakers.begin());
        if (it == speakers.end()) {
            speakers.push_back(samples[i].speaker_id);
            folds.emplace_back();
        }
        folds[f].test.push_back(i);
    }
    if (folds.size() < 2) throw Error(Errc::TooFewSamples, "leave-one-speaker-out needs at least 2 speakers");
    for (Fold& f : folds) complement(f, samples.size());
    finalize(folds);
    return folds;
}

std::vector<Fold> designated(std::span<const SampleTag> samples) {
    Fold f;
    for (std::size_t i = 0; i < samples.size(); ++i) (samples[i].designated_train ? f.train : f.test).push_back(i);
    if (f.train.empty() || f.test.empty()) {
        throw Error(Errc::TooFewSamples, "designated split needs both training and test samples");
    }
    return {std::move(f)};
}

}  // namespace

std::vector<Fold> make_splits(std::span<const SampleTag> samples, const SplitPlan& plan) {
    if (samples.empty()) throw Error(Errc::TooFewSamples, "no samples to split");
    switch (plan.scheme) {
        case SplitPlan::Scheme::holdout: return holdout(samples, plan);
        case SplitPlan::Scheme::k_fold: return k_fold(samples, plan);
        case SplitPlan::Scheme::leave_one_speaker_out: return leave_one_speaker_out(samples);
        case SplitPlan::Scheme::designated: return designated(samples);
    }
    throw Error(Errc::UnknownScheme, "unhandled split scheme");
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
    if (other.n_ != n_) throw Error(Errc::DimensionMismatch, "confusion matrices differ in size");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
}

std::size_t ConfusionMatrix::row_sum(std::size_t r) const noexcept {
    std::size_t s = 0;
    for (std::size_t c = 0; c < n_; ++c) s += (*this)(r, c);
    return s;
}

std::size_t ConfusionMatrix::column_sum(std::size_t c) const noexcept {
    std::size_t s = 0;
    for (std::size_t r = 0; r < n_; ++r) s += (*this)(r, c);
    return s;
}

std::size_t ConfusionMatrix::trace() const noexcept {
    std::size_t s = 0;
    for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
    return s;
}

std::size_t ConfusionMatrix::total() const noexcept {
    std::size_t s = 0;
    for (std::size_t v : counts_) s += v;
    return s;
}

std::vector<ClassMetrics> class_metrics(const ConfusionMatrix& m) {
    std::vector<ClassMetrics> out(m.size());
    for (std::size_t c = 0; c < m.size(); ++c) {
        ClassMetrics& cm = out[c];
        const auto tp = static_cast<double>(m(c, c));
        cm.support = m.row_sum(c);
        cm.predicted = m.column_sum(c);
        cm.precision_undefined = cm.predicted == 0;
        cm.recall_undefined = cm.support == 0;
        cm.precision = cm.precision_undefined ? 0.0 : tp / static_cast<double>(cm.predicted);
        cm.recall = cm.recall_undefined ? 0.0 : tp / static_cast<double>(cm.support);
        const double denom = cm.precision + cm.recall;
        cm.f1 = denom > 0.0 ? 2.0 * cm.precision * cm.recall / denom : 0.0;
    }
    return out;
}

std::vector<std::vector<double>> confusion_proportions(const ConfusionMatrix& m) {
    std::vector<std::vector<double>> out(m.size(), std::vector<double>(m.size(), 0.0));
    for (std::size_t c = 0; c < m.size(); ++c) {
        const std::size_t col = m.column_sum(c);
        if (col == 0) continue;
        for (std::size_t r = 0; r < m.size(); ++r) {
            out[r][c] = static_cast<double>(m(r, c)) / static_cast<double>(col);
        }
    }
    return out;
}

FoldResult evaluate_fold(const CentroidModel& model, std::span<const LabeledFeature> test,
                         std::span<const ClassLabel> label_space) {
    if (test.empty()) throw Error(Errc::EmptyTestSet, "cannot evaluate an empty test set");
    if (label_space.empty()) label_space = model.classes();

    auto position = [&](const ClassLabel& label) {
        const auto it = std::find(label_space.begin(), label_space.end(), label);
        if (it == label_space.end()) throw Error(Errc::UnknownClass, "class '" + label.name + "' not in the label space");
        return static_cast<std::size_t>(it - label_space.begin());
    };
    std::vector<std::size_t> model_to_space(model.num_classes());
    for (std::size_t c = 0; c < model.num_classes(); ++c) model_to_space[c] = position(model.classes()[c]);

    std::vector<FeatureVector> queries;
    queries.reserve(test.size());
    std::vector<std::size_t> truth;
    truth.reserve(test.size());
    for (const LabeledFeature& lf : test) {
        truth.push_back(position(lf.label));
        queries.push_back(lf.features);
    }

    FoldResult r;
    r.predictions = predict_batch(model, queries);
    r.confusion = ConfusionMatrix(label_space.size());
    for (std::size_t i = 0; i < test.size(); ++i) r.confusion.add(truth[i], model_to_space[r.predictions[i].class_index]);
    r.accuracy = static_cast<double>(r.confusion.trace()) / static_cast<double>(r.confusion.total());
    r.per_class = class_metrics(r.confusion);
    return r;
}

namespace {

constexpr std::array<double, 120> kT975{
    12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281,
    2.2010, 2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860,
    2.0796, 2.0739, 2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423,
    2.0395, 2.0369, 2.0345, 2.0322, 2.0301, 2.0281, 2.0262, 2.0244, 2.0227, 2.0211,
    2.0195, 2.0181, 2.0167, 2.0154, 2.0141, 2.0129, 2.0117, 2.0106, 2.0096, 2.0086,
    2.0076, 2.0066, 2.0057, 2.0049, 2.0040, 2.0032, 2.0025, 2.0017, 2.0010, 2.0003,
    1.9996, 1.9990, 1.9983, 1.9977, 1.9971, 1.9966, 1.9960, 1.9955, 1.9949, 1.9944,
    1.9939, 1.9935, 1.9930, 1.9925, 1.9921, 1.9917, 1.9913, 1.9908, 1.9905, 1.9901,
    1.9897, 1.9893, 1.9890, 1.9886, 1.9883, 1.9879, 1.9876, 1.9873, 1.9870, 1.9867,
    1.9864, 1.9861, 1.9858, 1.9855, 1.9853, 1.9850, 1.9847, 1.9845, 1.9842, 1.9840,
    1.9837, 1.9835, 1.9833, 1.9830, 1.9828, 1.9826, 1.9824, 1.9822, 1.9820, 1.9818,
    1.9816, 1.9814, 1.9812, 1.9810, 1.9808, 1.9806, 1.9804, 1.9803, 1.9801, 1.9799,
};

constexpr double kNormal975 = 1.9600;

}  // namespace

double t_critical_95(std::size_t dof) {
    if (dof == 0) throw Error(Errc::InvalidArgument, "t critical value needs dof >= 1");
    return dof <= kT975.size() ? kT975[dof - 1] : kNormal975;
}

IntervalSummary summarize_folds(std::span<const double> values, double level) {
    if (values.empty()) throw Error(Errc::EmptyValues, "no fold values to summarize");
    if (level != 0.95) throw Error(Errc::InvalidArgument, "only the 0.95 level is tabulated");
    const auto n = static_cast<double>(values.size());
    IntervalSummary s;
    s.level = level;
    s.mean = pairwise_sum(values) / n;
    s.dof = values.size() - 1;
    if (values.size() == 1) {
        s.degenerate = true;
        s.ci_low = s.ci_high = s.mean;
        return s;
    }
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    const double half = t_critical_95(s.dof) * s.standard_error;
    s.ci_low = s.mean - half;
    s.ci_high = s.mean + half;
    return s;
}

}  // namespace fedleak
