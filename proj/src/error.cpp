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

#include "fedleak/error.hpp"

namespace fedleak {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::DuplicateTensorName: return "DuplicateTensorName";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::NonFiniteValue: return "NonFiniteValue";
        case Errc::EmptySnapshot: return "EmptySnapshot";
        case Errc::UnsortedTensors: return "UnsortedTensors";
        case Errc::ArchitectureMismatch: return "ArchitectureMismatch";
        case Errc::IoFailure: return "IoFailure";
        case Errc::BadMagic: return "BadMagic";
        case Errc::UnsupportedVersion: return "UnsupportedVersion";
        case Errc::TruncatedFile: return "TruncatedFile";
        case Errc::TrailingData: return "TrailingData";
        case Errc::InvalidStatistics: return "InvalidStatistics";
        case Errc::EmptyTensor: return "EmptyTensor";
        case Errc::EmptySelection: return "EmptySelection";
        case Errc::UnknownTensor: return "UnknownTensor";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::NoSamplesForClass: return "NoSamplesForClass";
        case Errc::FewerThanTwoClasses: return "FewerThanTwoClasses";
        case Errc::ZeroNormVector: return "ZeroNormVector";
        case Errc::UnknownClass: return "UnknownClass";
        case Errc::InvalidProfile: return "InvalidProfile";
        case Errc::EmptyCorpus: return "EmptyCorpus";
        case Errc::TooFewSamples: return "TooFewSamples";
        case Errc::UnknownScheme: return "UnknownScheme";
        case Errc::EmptyValues: return "EmptyValues";
        case Errc::EmptyTestSet: return "EmptyTestSet";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::UnknownFormat: return "UnknownFormat";
        case Errc::InvalidArgument: return "InvalidArgument";
    }
    return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

ConfigError::ConfigError(std::string field, const std::string& what)
    : Error(Errc::InvalidConfig, "field '" + field + "': " + what), field_(std::move(field)) {}

BatchError::BatchError(std::size_t index, const Error& cause)
    : Error(cause.code(), "element " + std::to_string(index) + ": " + cause.what()),
      index_(index),
      cause_(cause.code()) {}

}  // namespace fedleak
