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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fedleak/error.hpp"
#include "fedleak/rng.hpp"
#include "fedleak/snapshot.hpp"

namespace fedleak::testing {

#define EXPECT_ERRC(stmt, errc)                                                       \
    do {                                                                              \
        try {                                                                         \
            stmt;                                                                     \
            ADD_FAILURE() << "expected " << ::fedleak::to_string(errc) << ", got none"; \
        } catch (const ::fedleak::Error& e_) {                                        \
            EXPECT_EQ(e_.code(), errc) << e_.what();                                  \
        }                                                                             \
    } while (0)

inline TensorRecord tensor(std::string name, std::vector<std::uint32_t> shape, std::vector<double> values) {
    return TensorRecord{std::move(name), std::move(shape), std::move(values)};
}

/// Random architecture with `count` tensors named t0000.. and 1-3 dims.
inline WeightSnapshot random_snapshot(SplitMix64& rng, std::size_t count, std::size_t max_dim = 6) {
    std::vector<TensorRecord> ts;
    for (std::size_t i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "layer%04zu.w", i);
        std::vector<std::uint32_t> shape(1 + rng.below(3));
        std::size_t n = 1;
        for (auto& d : shape) {
            d = static_cast<std::uint32_t>(1 + rng.below(max_dim));
            n *= d;
        }
        std::vector<double> v(n);
        for (double& x : v) x = rng.uniform(-2.0, 2.0);
        ts.push_back(TensorRecord{name, shape, v});
    }
    return WeightSnapshot("random", std::move(ts));
}

/// Same names and shapes as `arch`, fresh values.
inline WeightSnapshot refill(const WeightSnapshot& arch, SplitMix64& rng) {
    std::vector<TensorRecord> ts(arch.tensors().begin(), arch.tensors().end());
    for (auto& t : ts) {
        for (double& x : t.values) x = rng.uniform(-2.0, 2.0);
    }
    return WeightSnapshot(arch.model_id(), std::move(ts));
}

/// Scratch directory removed at scope exit.
class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = std::filesystem::temp_directory_path() /
                ("fedleak-" + std::string(info->test_suite_name()) + "-" + info->name());
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace fedleak::testing
