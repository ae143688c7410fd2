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

// Reference kernels. Straight loops; the SIMD tables are tested against these.

#include "fedleak/kernels.hpp"

namespace fedleak::kernels {

Moments merge(const Moments& a, const Moments& b) noexcept {
    if (a.count == 0) return b;
    if (b.count == 0) return a;
    Moments out;
    out.count = a.count + b.count;
    const double na = static_cast<double>(a.count);
    const double nb = static_cast<double>(b.count);
    const double n = static_cast<double>(out.count);
    const double delta = b.mean - a.mean;
    out.mean = a.mean + delta * (nb / n);
    out.m2 = a.m2 + b.m2 + delta * delta * (na * nb / n);
    out.min = a.min < b.min ? a.min : b.min;
    out.max = a.max > b.max ? a.max : b.max;
    return out;
}

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// Corrected two-pass: mean first, then centered squares. The sum of the
// centered values cancels the rounding error left in the first-pass mean.
Moments moments_scalar(const double* x, std::size_t n) {
    Moments m;
    if (n == 0) return m;
    m.min = x[0];
    m.max = x[0];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s += x[i];
        if (x[i] < m.min) m.min = x[i];
        if (x[i] > m.max) m.max = x[i];
    }
    const double nd = static_cast<double>(n);
    const double mean = s / nd;
    double q = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = x[i] - mean;
        c += d;
        q += d * d;
    }
    m.count = n;
    m.mean = mean + c / nd;
    m.m2 = q - c * c / nd;
    if (m.m2 < 0.0) m.m2 = 0.0;
    return m;
}

constexpr KernelTable kScalar{
    Isa::scalar, &dot_scalar, &squared_distance_scalar, &axpy_scalar, &moments_scalar,
};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace fedleak::kernels
