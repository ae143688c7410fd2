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

/// Arithmetic inner loops shared by feature extraction, the centroid
/// classifier and the simulated model.
///
/// Each kernel has a scalar reference implementation plus SIMD variants
/// (AVX2+FMA on x86-64, NEON on AArch64). One table is selected at first use
/// from the host CPU; set FEDLEAK_KERNELS=scalar|avx2|neon to force a choice
/// (falls back to the best supported table when the request is unavailable).
/// Variants agree to within floating-point reassociation, not bit-exactly,
/// so a process uses a single table for its whole lifetime.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace fedleak::kernels {

/// Streaming moments of a sequence: count, mean, sum of squared deviations
/// from the mean (m2), and extrema.
struct Moments {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

/// Chan et al. pairwise combination of two partial moment sets.
Moments merge(const Moments& a, const Moments& b) noexcept;

enum class Isa { scalar, avx2, neon };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
    Isa isa;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*squared_distance)(const double* a, const double* b, std::size_t n);
    /// y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    /// n must be positive.
    Moments (*moments)(const double* x, std::size_t n);
};

const KernelTable& scalar_table() noexcept;

/// Table for the requested ISA, or nullptr when it is not compiled in or the
/// CPU lacks it.
const KernelTable* table_for(Isa isa) noexcept;

/// All tables usable on this host, scalar first.
std::vector<const KernelTable*> available_tables();

const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
    return active().dot(a.data(), b.data(), a.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
    return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
    active().axpy(alpha, x.data(), y.data(), x.size());
}

inline Moments moments(std::span<const double> x) noexcept { return active().moments(x.data(), x.size()); }

}  // namespace fedleak::kernels
