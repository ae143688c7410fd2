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

#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace fedleak::kernels {

std::string_view to_string(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
        case Isa::neon: return "neon";
    }
    return "unknown";
}

const KernelTable* table_for(Isa isa) noexcept {
    switch (isa) {
        case Isa::scalar: return &scalar_table();
        case Isa::avx2:
#if defined(FEDLEAK_HAVE_AVX2)
            if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &avx2_table();
#endif
            return nullptr;
        case Isa::neon:
#if defined(FEDLEAK_HAVE_NEON)
            return &neon_table();
#else
            return nullptr;
#endif
    }
    return nullptr;
}

std::vector<const KernelTable*> available_tables() {
    std::vector<const KernelTable*> out;
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (const KernelTable* t = table_for(isa)) out.push_back(t);
    }
    return out;
}

namespace {

const KernelTable& best_table() noexcept {
    for (Isa isa : {Isa::avx2, Isa::neon}) {
        if (const KernelTable* t = table_for(isa)) return *t;
    }
    return scalar_table();
}

const KernelTable& select_table() noexcept {
    const char* env = std::getenv("FEDLEAK_KERNELS");
    if (env == nullptr) return best_table();
    const std::string_view want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
        if (want == to_string(isa)) {
            if (const KernelTable* t = table_for(isa)) return *t;
        }
    }
    return best_table();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select_table();
    return table;
}

}  // namespace fedleak::kernels
