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

#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <set>

#include "fedleak/eval.hpp"
#include "test_support.hpp"

namespace fedleak {
namespace {

std::vector<SampleTag> balanced(std::size_t classes, std::size_t per_class) {
    std::vector<SampleTag> out;
    for (std::size_t i = 0; i < per_class; ++i) {
        for (std::size_t c = 0; c < classes; ++c) {
            out.push_back({c, "spk-" + std::to_string(c) + "-" + std::to_string(i), false});
        }
    }
    return out;
}

// Every index lands in exactly one of train/test, and test sets partition the
// sample set for the multi-fold schemes.
void expect_partitions(const std::vector<Fold>& folds, std::size_t n, bool tests_cover) {
    std::vector<int> tested(n, 0);
    for (const Fold& f : folds) {
        std::vector<int> seen(n, 0);
        for (std::size_t i : f.train) seen[i]++;
        for (std::size_t i : f.test) {
            seen[i]++;
            tested[i]++;
        }
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(seen[i], 1) << "index " << i;
        EXPECT_TRUE(std::is_sorted(f.train.begin(), f.train.end()));
    }
    if (tests_cover) {
        for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(tested[i], 1) << "index " << i;
    }
}

std::size_t count_class(const std::vector<SampleTag>& s, const std::vector<std::size_t>& idx, std::size_t c) {
    return static_cast<std::size_t>(std::count_if(idx.begin(), idx.end(), [&](std::size_t i) { return s[i].class_index == c; }));
}

TEST(Splits, KFoldEqualFolds) {
    const auto s = balanced(2, 24);
    SplitPlan p;
    p.scheme = SplitPlan::Scheme::k_fold;
    p.k = 6;
    const auto folds = make_splits(s, p);
    ASSERT_EQ(folds.size(), 6u);
    for (const Fold& f : folds) {
        EXPECT_EQ(f.test.size(), 8u);
        EXPECT_EQ(count_class(s, f.test, 0), 4u);
    }
    expect_partitions(folds, s.size(), true);
}

TEST(Splits, KFoldTooFewPerClass) {
    auto s = balanced(2, 5);
    SplitPlan p;
    p.scheme = SplitPlan::Scheme::k_fold;
    p.k = 6;
    EXPECT_ERRC(make_splits(s, p), Errc::TooFewSamples);
    p.k = 1;
    EXPECT_ERRC(make_splits(s, p), Errc::InvalidArgument);
}

TEST(Splits, LeaveOneSpeakerOut) {
    std::vector<SampleTag> s;
    for (std::size_t spk = 0; spk < 15; ++spk) {
        for (std::size_t u = 0; u < 3; ++u) s.push_back({spk % 2, "speaker" + std::to_string(spk), false});
    }
    SplitPlan p;
    p.scheme = parse_scheme("loso");
    const auto folds = make_splits(s, p);
    ASSERT_EQ(folds.size(), 15u);
    for (std::size_t f = 0; f < folds.size(); ++f) {
        ASSERT_EQ(folds[f].test.size(), 3u);
        for (std::size_t i : folds[f].test) EXPECT_EQ(s[i].speaker_id, "speaker" + std::to_string(f));
        for (std::size_t i : folds[f].train) EXPECT_NE(s[i].speaker_id, "speaker" + std::to_string(f));
    }
    expect_partitions(folds, s.size(), true);
}

TEST(Splits, StratifiedHoldout) {
    const auto s = balanced(2, 100);
    SplitPlan p;
    p.scheme = SplitPlan::Scheme::holdout;
    p.train_fraction = 0.75;
    p.seed = 3;
    const auto folds = make_splits(s, p);
    ASSERT_EQ(folds.size(), 1u);
    EXPECT_EQ(count_class(s, folds[0].train, 0), 75u);
    EXPECT_EQ(count_class(s, folds[0].train, 1), 75u);
    EXPECT_EQ(count_class(s, folds[0].test, 0), 25u);
    EXPECT_EQ(count_class(s, folds[0].test, 1), 25u);
    expect_partitions(folds, s.size(), false);
    EXPECT_EQ(make_splits(s, p)[0].test, folds[0].test);
    p.seed = 4;
    EXPECT_NE(make_splits(s, p)[0].test, folds[0].test);
}

TEST(Splits, HoldoutKeepsBothSidesNonEmpty) {
    const auto s = balanced(2, 2);
    SplitPlan p;
    p.scheme = SplitPlan::Scheme::holdout;
    p.train_fraction = 0.99;
    const auto folds = make_splits(s, p);
    EXPECT_EQ(count_class(s, folds[0].test, 0), 1u);
    EXPECT_ERRC(make_splits(balanced(2, 1), p), Errc::TooFewSamples);
}

TEST(Splits, Designated) {
    auto s = balanced(2, 5);
    for (std::size_t i = 0; i < s.size(); i += 2) s[i].designated_train = true;
    SplitPlan p;
    const auto folds = make_splits(s, p);
    ASSERT_EQ(folds.size(), 1u);
    for (std::size_t i : folds[0].train) EXPECT_TRUE(s[i].designated_train);
    for (std::size_t i : folds[0].test) EXPECT_FALSE(s[i].designated_train);
    expect_partitions(folds, s.size(), false);
    for (auto& t : s) t.designated_train = true;
    EXPECT_ERRC(make_splits(s, p), Errc::TooFewSamples);
}

TEST(Splits, RandomizedPartitionProperties) {
    SplitMix64 rng(51);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t classes = 2 + rng.below(4);
        std::vector<SampleTag> s;
        for (std::size_t c = 0; c < classes; ++c) {
            const std::size_t n = 5 + rng.below(20);
            for (std::size_t i = 0; i < n; ++i) s.push_back({c, "s" + std::to_string(rng.below(12)), false});
        }
        SplitPlan p;
        p.seed = rng.next();
        p.scheme = SplitPlan::Scheme::k_fold;
        p.k = 2 + rng.below(4);
        expect_partitions(make_splits(s, p), s.size(), true);
        p.scheme = SplitPlan::Scheme::leave_one_speaker_out;
        expect_partitions(make_splits(s, p), s.size(), true);
        p.scheme = SplitPlan::Scheme::holdout;
        expect_partitions(make_splits(s, p), s.size(), false);
    }
}

TEST(Splits, SchemeNamesAndErrors) {
    EXPECT_EQ(parse_scheme("k_fold"), SplitPlan::Scheme::k_fold);
    EXPECT_EQ(to_string(parse_scheme("leave_one_speaker_out")), "leave_one_speaker_out");
    EXPECT_ERRC(parse_scheme("bootstrap"), Errc::UnknownScheme);
    EXPECT_ERRC(make_splits(std::vector<SampleTag>{}, SplitPlan{}), Errc::TooFewSamples);
}

CentroidModel two_class_model() {
    return CentroidModel({{"A"}, {"B"}}, {{1, 0}, {0, 1}}, {1, 1});
}

LabeledFeature sample(std::vector<double> v, std::string label) { return {{std::move(v), {}}, {std::move(label)}}; }

TEST(EvaluateFold, ConstantPredictor) {
    // Every query sits nearest to A.
    const std::vector<LabeledFeature> test = {sample({1, 0}, "A"), sample({2, 0.1}, "A"), sample({1, 0.2}, "B"),
                                              sample({3, 0}, "B")};
    const auto r = evaluate_fold(two_class_model(), test);
    EXPECT_EQ(r.accuracy, 0.5);
    EXPECT_EQ(r.confusion(0, 0), 2u);
    EXPECT_EQ(r.confusion(1, 0), 2u);
    EXPECT_EQ(r.per_class[0].precision, 0.5);
    EXPECT_EQ(r.per_class[0].recall, 1.0);
    EXPECT_DOUBLE_EQ(r.per_class[0].f1, 2.0 / 3.0);
    EXPECT_TRUE(r.per_class[1].precision_undefined);
    EXPECT_EQ(r.per_class[1].f1, 0.0);
    EXPECT_EQ(r.predictions.size(), 4u);
}

TEST(EvaluateFold, LabelSpaceWiderThanModel) {
    const std::vector<ClassLabel> space = {{"B"}, {"C"}, {"A"}};
    const auto r = evaluate_fold(two_class_model(), std::vector<LabeledFeature>{sample({0, 1}, "C")}, space);
    ASSERT_EQ(r.confusion.size(), 3u);
    EXPECT_EQ(r.confusion(1, 0), 1u);  // truth C, predicted B
    EXPECT_TRUE(r.per_class[2].recall_undefined);
}

TEST(EvaluateFold, Errors) {
    EXPECT_ERRC(evaluate_fold(two_class_model(), std::vector<LabeledFeature>{}), Errc::EmptyTestSet);
    EXPECT_ERRC(evaluate_fold(two_class_model(), std::vector<LabeledFeature>{sample({1, 1}, "Z")}), Errc::UnknownClass);
}

TEST(ConfusionProportions, ColumnNormalized) {
    ConfusionMatrix m(3);
    m.add(0, 0, 3);
    m.add(1, 0, 1);
    m.add(1, 1, 2);
    const auto p = confusion_proportions(m);
    EXPECT_EQ(p[0][0], 0.75);
    EXPECT_EQ(p[1][0], 0.25);
    EXPECT_EQ(p[1][1], 1.0);
    EXPECT_EQ(p[2][2], 0.0);  // empty column stays zero
}

TEST(ConfusionProportions, DiagonalEqualsPrecision) {
    SplitMix64 rng(52);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(9);
        ConfusionMatrix m(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < n; ++c) {
                if (rng.below(3)) m.add(r, c, rng.below(20));
            }
        }
        const auto p = confusion_proportions(m);
        const auto metrics = class_metrics(m);
        for (std::size_t c = 0; c < n; ++c) {
            EXPECT_DOUBLE_EQ(p[c][c], metrics[c].precision);
            if (m.column_sum(c) == 0) continue;
            double col = 0;
            for (std::size_t r = 0; r < n; ++r) col += p[r][c];
            EXPECT_NEAR(col, 1.0, 1e-12);
        }
    }
}

TEST(ConfusionMatrix, Accumulates) {
    ConfusionMatrix a(2), b(2);
    a.add(0, 1);
    b.add(0, 1, 2);
    b.add(1, 1);
    a += b;
    EXPECT_EQ(a(0, 1), 3u);
    EXPECT_EQ(a.trace(), 1u);
    EXPECT_EQ(a.total(), 4u);
    ConfusionMatrix c(3);
    EXPECT_ERRC(a += c, Errc::DimensionMismatch);
}

TEST(SummarizeFolds, FiveValues) {
    const std::vector<double> v = {0.8, 0.9, 1.0, 0.7, 0.6};
    const auto s = summarize_folds(v);
    EXPECT_NEAR(s.mean, 0.8, 1e-15);
    EXPECT_NEAR(s.standard_error, std::sqrt(0.025 / 5), 1e-15);
    EXPECT_NEAR(s.ci_low, 0.6037, 1e-4);
    EXPECT_NEAR(s.ci_high, 0.9963, 1e-4);
    EXPECT_EQ(s.dof, 4u);
    EXPECT_FALSE(s.degenerate);
}

TEST(SummarizeFolds, SingleValueIsDegenerate) {
    const auto s = summarize_folds(std::vector<double>{0.7});
    EXPECT_TRUE(s.degenerate);
    EXPECT_EQ(s.standard_error, 0.0);
    EXPECT_EQ(s.ci_low, 0.7);
    EXPECT_EQ(s.ci_high, 0.7);
}

TEST(SummarizeFolds, Errors) {
    EXPECT_ERRC(summarize_folds(std::vector<double>{}), Errc::EmptyValues);
    EXPECT_ERRC(summarize_folds(std::vector<double>{1, 2}, 0.9), Errc::InvalidArgument);
    EXPECT_ERRC(t_critical_95(0), Errc::InvalidArgument);
}

TEST(SummarizeFolds, TableMatchesStudentT) {
    for (std::size_t dof = 1; dof <= 120; ++dof) {
        const boost::math::students_t dist(static_cast<double>(dof));
        EXPECT_NEAR(t_critical_95(dof), boost::math::quantile(dist, 0.975), 5.1e-5) << "dof=" << dof;
    }
    EXPECT_EQ(t_critical_95(121), 1.96);
    EXPECT_EQ(t_critical_95(100000), 1.96);
}

TEST(SummarizeFolds, IntervalCoverage) {
    SplitMix64 rng(53);
    const int reps = 10000;
    int covered = 0;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> v(5);
        for (double& x : v) x = 0.8 + 0.05 * rng.gaussian();
        const auto s = summarize_folds(v);
        covered += s.ci_low <= 0.8 && 0.8 <= s.ci_high;
    }
    const double rate = static_cast<double>(covered) / reps;
    EXPECT_GT(rate, 0.93);
    EXPECT_LT(rate, 0.97);
}

}  // namespace
}  // namespace fedleak
