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

// AArch64 NEON kernels (two double lanes). Advanced SIMD is mandatory on
// AArch64, so no runtime check is needed beyond compiling this file.

#include <arm_neon.h>

#include <algorithm>

#include "kernels_internal.hpp"

namespace fedleak::kernels {

namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
        const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

Moments moments_neon(const double* x, std::size_t n) {
    if (n == 0) return {};
    float64x2_t sum = vdupq_n_f64(0.0);
    float64x2_t lo = vdupq_n_f64(x[0]);
    float64x2_t hi = lo;
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t v = vld1q_f64(x + i);
        sum = vaddq_f64(sum, v);
        lo = vminq_f64(lo, v);
        hi = vmaxq_f64(hi, v);
    }
    double s = vaddvq_f64(sum);
    double mn = vminvq_f64(lo);
    double mx = vmaxvq_f64(hi);
    for (; i < n; ++i) {
        s += x[i];
        mn = std::min(mn, x[i]);
        mx = std::max(mx, x[i]);
    }
    const double mean = s / static_cast<double>(n);

    const float64x2_t vmean = vdupq_n_f64(mean);
    float64x2_t sq = vdupq_n_f64(0.0);
    float64x2_t lin = vdupq_n_f64(0.0);
    i = 0;
    for (; i + 2 <= n; i += 2) {
        const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vmean);
        lin = vaddq_f64(lin, d);
        sq = vfmaq_f64(sq, d, d);
    }
    double q = vaddvq_f64(sq);
    double c = vaddvq_f64(lin);
    for (; i < n; ++i) {
        const double d = x[i] - mean;
        c += d;
        q += d * d;
    }
    Moments m;
    m.count = n;
    m.mean = mean + c / static_cast<double>(n);
    m.m2 = std::max(0.0, q - c * c / static_cast<double>(n));
    m.min = mn;
    m.max = mx;
    return m;
}

constexpr KernelTable kNeon{
    Isa::neon, &dot_neon, &squared_distance_neon, &axpy_neon, &moments_neon,
};

}  // namespace

const KernelTable& neon_table() noexcept { return kNeon; }

}  // namespace fedleak::kernels
