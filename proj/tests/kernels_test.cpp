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

#include <cmath>
#include <vector>

#include "fedleak/kernels.hpp"
#include "fedleak/rng.hpp"

namespace fedleak {
namespace {

using kernels::KernelTable;

// Sizes straddling vector widths, unroll factors and the moments block size.
const std::size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 255, 256, 257, 511, 1000, 4097};

std::vector<double> random_values(SplitMix64& rng, std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(lo, hi);
    return v;
}

double rel_err(double a, double b) {
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) / scale;
}

TEST(KernelDispatch, ScalarAlwaysAvailableAndFirst) {
    const auto tables = kernels::available_tables();
    ASSERT_FALSE(tables.empty());
    EXPECT_EQ(tables.front()->isa, kernels::Isa::scalar);
    EXPECT_EQ(&kernels::scalar_table(), kernels::table_for(kernels::Isa::scalar));
}

TEST(KernelDispatch, ActiveTableIsOneOfTheAvailable) {
    const auto tables = kernels::available_tables();
    bool found = false;
    for (const KernelTable* t : tables) found = found || t == &kernels::active();
    EXPECT_TRUE(found) << kernels::to_string(kernels::active().isa);
}

TEST(KernelScalar, HandComputedValues) {
    const KernelTable& s = kernels::scalar_table();
    const double a[] = {1, 2, 3};
    const double b[] = {4, -5, 6};
    EXPECT_EQ(s.dot(a, b, 3), 12.0);
    EXPECT_EQ(s.squared_distance(a, b, 3), 9.0 + 49.0 + 9.0);
    double y[] = {1, 1, 1};
    s.axpy(2.0, a, y, 3);
    EXPECT_EQ(y[0], 3.0);
    EXPECT_EQ(y[2], 7.0);
    const double x[] = {1, 2, 3, 4};
    const auto m = s.moments(x, 4);
    EXPECT_EQ(m.count, 4u);
    EXPECT_EQ(m.mean, 2.5);
    EXPECT_EQ(m.m2, 5.0);
    EXPECT_EQ(m.min, 1.0);
    EXPECT_EQ(m.max, 4.0);
}

TEST(KernelScalar, MergeMatchesSinglePass) {
    SplitMix64 rng(5);
    const auto v = random_values(rng, 1000, -3, 7);
    const KernelTable& s = kernels::scalar_table();
    const auto whole = s.moments(v.data(), v.size());
    const auto merged = kernels::merge(s.moments(v.data(), 377), s.moments(v.data() + 377, v.size() - 377));
    EXPECT_EQ(merged.count, whole.count);
    EXPECT_LT(rel_err(merged.mean, whole.mean), 1e-14);
    EXPECT_LT(rel_err(merged.m2, whole.m2), 1e-12);
    EXPECT_EQ(merged.min, whole.min);
    EXPECT_EQ(merged.max, whole.max);
}

class KernelEquivalence : public ::testing::TestWithParam<const KernelTable*> {};

TEST_P(KernelEquivalence, DotAndDistanceMatchScalar) {
    const KernelTable& ref = kernels::scalar_table();
    const KernelTable& t = *GetParam();
    SplitMix64 rng(11);
    for (std::size_t n : kSizes) {
        const auto a = random_values(rng, n, -1, 1);
        const auto b = random_values(rng, n, -1, 1);
        // Reassociation error is bounded relative to sum |a_i b_i|.
        double mag = 0;
        for (std::size_t i = 0; i < n; ++i) mag += std::fabs(a[i] * b[i]);
        EXPECT_LE(std::fabs(t.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)), 1e-14 * mag + 1e-300)
            << "n=" << n;
        EXPECT_LT(rel_err(t.squared_distance(a.data(), b.data(), n), ref.squared_distance(a.data(), b.data(), n)),
                  1e-13)
            << "n=" << n;
    }
}

TEST_P(KernelEquivalence, AxpyMatchesScalar) {
    const KernelTable& ref = kernels::scalar_table();
    const KernelTable& t = *GetParam();
    SplitMix64 rng(12);
    for (std::size_t n : kSizes) {
        const auto x = random_values(rng, n, -1, 1);
        auto y1 = random_values(rng, n, -1, 1);
        auto y2 = y1;
        ref.axpy(-0.37, x.data(), y1.data(), n);
        t.axpy(-0.37, x.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) {
            // FMA rounds once where the scalar loop rounds twice.
            EXPECT_NEAR(y1[i], y2[i], 4e-16 * (std::fabs(y1[i]) + 1.0)) << "n=" << n << " i=" << i;
        }
    }
}

TEST_P(KernelEquivalence, MomentsMatchScalar) {
    const KernelTable& ref = kernels::scalar_table();
    const KernelTable& t = *GetParam();
    SplitMix64 rng(13);
    for (std::size_t n : kSizes) {
        // Large offset, small spread: the case that breaks naive sum-of-squares.
        const auto x = random_values(rng, n, 1e6, 1e6 + 1e-3);
        const auto a = ref.moments(x.data(), n);
        const auto b = t.moments(x.data(), n);
        EXPECT_EQ(a.count, b.count);
        EXPECT_LT(rel_err(a.mean, b.mean), 1e-15) << "n=" << n;
        if (n > 1) {
            EXPECT_LT(rel_err(a.m2, b.m2), 1e-9) << "n=" << n;
        }
        EXPECT_EQ(a.min, b.min);
        EXPECT_EQ(a.max, b.max);
    }
}

TEST_P(KernelEquivalence, ConstantInputHasZeroSpread) {
    const KernelTable& t = *GetParam();
    for (std::size_t n : kSizes) {
        const std::vector<double> x(n, 5.0);
        const auto m = t.moments(x.data(), n);
        EXPECT_EQ(m.mean, 5.0);
        EXPECT_EQ(m.m2, 0.0);
        EXPECT_EQ(m.min, 5.0);
        EXPECT_EQ(m.max, 5.0);
    }
}

std::string isa_name(const ::testing::TestParamInfo<const KernelTable*>& info) {
    return std::string(kernels::to_string(info.param->isa));
}

INSTANTIATE_TEST_SUITE_P(AllTables, KernelEquivalence, ::testing::ValuesIn(kernels::available_tables()), isa_name);

}  // namespace
}  // namespace fedleak
