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

/// Weight snapshots: the named parameter tensors of one model instance, the
/// compact per-tensor summary form, and the binary file formats for both.
///
/// File layouts (all integers and reals little-endian):
///
///   .fsnp  "FSNP" | u32 version=1 | u16 len + model_id | u32 tensor_count |
///          per tensor: u16 len + name | u8 ndim | ndim x u32 dim |
///                      prod(dims) x f64 value
///   .fsum  "FSUM" | u32 version=1 | u16 len + model_id | u32 entry_count |
///          per entry:  u16 len + name | f64 mean | f64 std | f64 min | f64 max
///
/// Tensors and entries are stored in canonical order (names sorted by byte
/// value), which is also the in-memory order.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace fedleak {

struct TensorRecord {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<double> values;

    /// Product of the shape entries (1 for an empty shape).
    [[nodiscard]] std::size_t element_count() const noexcept;

    friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

/// Named parameter tensors of a model. Construction sorts the tensors into
/// canonical order; contents are immutable afterwards.
class WeightSnapshot {
public:
    WeightSnapshot() = default;
    WeightSnapshot(std::string model_id, std::vector<TensorRecord> tensors);

    [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
    [[nodiscard]] std::span<const TensorRecord> tensors() const noexcept { return tensors_; }
    [[nodiscard]] std::size_t size() const noexcept { return tensors_.size(); }

    /// nullptr when absent.
    [[nodiscard]] const TensorRecord* find(std::string_view name) const noexcept;

    friend bool operator==(const WeightSnapshot&, const WeightSnapshot&) = default;

private:
    std::string model_id_;
    std::vector<TensorRecord> tensors_;
};

/// Population statistics of one tensor.
struct TensorStats {
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;

    friend bool operator==(const TensorStats&, const TensorStats&) = default;
};

struct SummaryEntry {
    std::string name;
    TensorStats stats;

    friend bool operator==(const SummaryEntry&, const SummaryEntry&) = default;
};

/// Per-tensor statistics only; what gets exported for models too large to
/// ship as full snapshots. Construction sorts entries canonically.
class SummarySnapshot {
public:
    SummarySnapshot() = default;
    SummarySnapshot(std::string model_id, std::vector<SummaryEntry> entries);

    [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
    [[nodiscard]] std::span<const SummaryEntry> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }

    friend bool operator==(const SummarySnapshot&, const SummarySnapshot&) = default;

private:
    std::string model_id_;
    std::vector<SummaryEntry> entries_;
};

/// Throws Error(DuplicateTensorName | ShapeMismatch | NonFiniteValue |
/// EmptySnapshot | UnsortedTensors) naming the offending tensor.
void validate_snapshot(const WeightSnapshot& s);

/// Throws Error(EmptySnapshot | DuplicateTensorName | UnsortedTensors |
/// NonFiniteValue | InvalidStatistics).
void validate_summary(const SummarySnapshot& s);

/// True when both snapshots have the same tensor names and shapes.
bool same_architecture(const WeightSnapshot& a, const WeightSnapshot& b) noexcept;

/// Throws ArchitectureMismatch describing the first difference.
void require_same_architecture(const WeightSnapshot& a, const WeightSnapshot& b);

/// Element-wise w_s - w_g. The result's model_id is w_s's with "+delta".
WeightSnapshot snapshot_delta(const WeightSnapshot& w_s, const WeightSnapshot& w_g);

void save_snapshot(const WeightSnapshot& s, const std::filesystem::path& path);
WeightSnapshot load_snapshot(const std::filesystem::path& path);

void save_summary(const SummarySnapshot& s, const std::filesystem::path& path);
SummarySnapshot load_summary(const std::filesystem::path& path);

/// In-memory encoders used by the file functions; exposed for tests.
std::vector<std::uint8_t> encode_snapshot(const WeightSnapshot& s);
WeightSnapshot decode_snapshot(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_summary(const SummarySnapshot& s);
SummarySnapshot decode_summary(std::span<const std::uint8_t> bytes);

}  // namespace fedleak
