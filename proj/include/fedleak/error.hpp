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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedleak {

enum class Errc {
    // snapshot-core
    DuplicateTensorName,
    ShapeMismatch,
    NonFiniteValue,
    EmptySnapshot,
    UnsortedTensors,
    ArchitectureMismatch,
    IoFailure,
    BadMagic,
    UnsupportedVersion,
    TruncatedFile,
    TrailingData,
    InvalidStatistics,
    // feature-extraction
    EmptyTensor,
    EmptySelection,
    UnknownTensor,
    // centroid-classifier
    DimensionMismatch,
    NoSamplesForClass,
    FewerThanTwoClasses,
    ZeroNormVector,
    UnknownClass,
    // fl-sim
    InvalidProfile,
    EmptyCorpus,
    // eval-harness
    TooFewSamples,
    UnknownScheme,
    EmptyValues,
    EmptyTestSet,
    // experiment-runner
    InvalidConfig,
    UnknownFormat,
    InvalidArgument,
};

std::string_view to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library. The code is the
/// machine-readable part; the message names the offending item.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    [[nodiscard]] Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Raised when a scenario or CLI argument fails validation. The CLI maps it
/// to exit code 2.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& what);

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised by batch operations; carries the index of the first failing element.
class BatchError : public Error {
public:
    BatchError(std::size_t index, const Error& cause);

    [[nodiscard]] std::size_t index() const noexcept { return index_; }
    [[nodiscard]] Errc cause() const noexcept { return cause_; }

private:
    std::size_t index_;
    Errc cause_;
};

}  // namespace fedleak
