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

#include <array>
#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

#include "fedleak/error.hpp"
#include "fedleak/snapshot.hpp"

namespace fedleak {

namespace {

constexpr std::array<std::uint8_t, 4> kSnapshotMagic{'F', 'S', 'N', 'P'};
constexpr std::array<std::uint8_t, 4> kSummaryMagic{'F', 'S', 'U', 'M'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
public:
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    template <typename U>
    void uint(U v) {
        for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void real(double v) { uint(std::bit_cast<std::uint64_t>(v)); }

    void text(const std::string& s, const char* what) {
        if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw Error(Errc::InvalidArgument, std::string(what) + " longer than 65535 bytes");
        }
        uint(static_cast<std::uint16_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    void need(std::size_t n, const char* what) const {
        if (in_.size() - pos_ < n) throw Error(Errc::TruncatedFile, std::string("file ends inside ") + what);
    }

    template <typename U>
    U uint(const char* what) {
        need(sizeof(U), what);
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in_[pos_ + i]) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }

    double real(const char* what) { return std::bit_cast<double>(uint<std::uint64_t>(what)); }

    std::string text(const char* what) {
        const auto len = uint<std::uint16_t>(what);
        need(len, what);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), len);
        pos_ += len;
        return s;
    }

    void magic(const std::array<std::uint8_t, 4>& expected) {
        if (in_.size() < expected.size() || !std::equal(expected.begin(), expected.end(), in_.begin())) {
            throw Error(Errc::BadMagic, std::string("expected magic '") +
                                            std::string(expected.begin(), expected.end()) + "'");
        }
        pos_ = expected.size();
        const auto version = uint<std::uint32_t>("header");
        if (version != kFormatVersion) {
            throw Error(Errc::UnsupportedVersion, "format version " + std::to_string(version));
        }
    }

    void finish() const {
        if (pos_ != in_.size()) {
            throw Error(Errc::TrailingData, std::to_string(in_.size() - pos_) + " bytes after the last record");
        }
    }

    [[nodiscard]] std::size_t remaining() const noexcept { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoFailure, "cannot open '" + path.string() + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::IoFailure, "read error on '" + path.string() + "'");
    return bytes;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoFailure, "cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(Errc::IoFailure, "write error on '" + path.string() + "'");
}

}  // namespace

std::vector<std::uint8_t> encode_snapshot(const WeightSnapshot& s) {
    validate_snapshot(s);
    Writer w;
    w.bytes(kSnapshotMagic);
    w.uint(kFormatVersion);
    w.text(s.model_id(), "model_id");
    w.uint(static_cast<std::uint32_t>(s.size()));
    for (const TensorRecord& t : s.tensors()) {
        w.text(t.name, "tensor name");
        if (t.shape.size() > std::numeric_limits<std::uint8_t>::max()) {
            throw Error(Errc::InvalidArgument, "tensor '" + t.name + "' has more than 255 dimensions");
        }
        w.uint(static_cast<std::uint8_t>(t.shape.size()));
        for (std::uint32_t d : t.shape) w.uint(d);
        for (double v : t.values) w.real(v);
    }
    return w.take();
}

WeightSnapshot decode_snapshot(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.magic(kSnapshotMagic);
    std::string model_id = r.text("model_id");
    const auto count = r.uint<std::uint32_t>("tensor count");
    std::vector<TensorRecord> tensors;
    for (std::uint32_t i = 0; i < count; ++i) {
        TensorRecord t;
        t.name = r.text("tensor name");
        const auto ndim = r.uint<std::uint8_t>("tensor header");
        t.shape.resize(ndim);
        for (auto& d : t.shape) d = r.uint<std::uint32_t>("tensor shape");
        const std::size_t n = t.element_count();
        // Guard the allocation against a corrupt header before reserving.
        if (n > r.remaining() / sizeof(double)) throw Error(Errc::TruncatedFile, "file ends inside tensor '" + t.name + "'");
        t.values.resize(n);
        for (double& v : t.values) v = r.real("tensor values");
        tensors.push_back(std::move(t));
    }
    r.finish();
    WeightSnapshot s(std::move(model_id), std::move(tensors));
    validate_snapshot(s);
    return s;
}

std::vector<std::uint8_t> encode_summary(const SummarySnapshot& s) {
    validate_summary(s);
    Writer w;
    w.bytes(kSummaryMagic);
    w.uint(kFormatVersion);
    w.text(s.model_id(), "model_id");
    w.uint(static_cast<std::uint32_t>(s.size()));
    for (const SummaryEntry& e : s.entries()) {
        w.text(e.name, "entry name");
        w.real(e.stats.mean);
        w.real(e.stats.std);
        w.real(e.stats.min);
        w.real(e.stats.max);
    }
    return w.take();
}

SummarySnapshot decode_summary(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    r.magic(kSummaryMagic);
    std::string model_id = r.text("model_id");
    const auto count = r.uint<std::uint32_t>("entry count");
    std::vector<SummaryEntry> entries;
    for (std::uint32_t i = 0; i < count; ++i) {
        SummaryEntry e;
        e.name = r.text("entry name");
        e.stats.mean = r.real("entry statistics");
        e.stats.std = r.real("entry statistics");
        e.stats.min = r.real("entry statistics");
        e.stats.max = r.real("entry statistics");
        entries.push_back(std::move(e));
    }
    r.finish();
    SummarySnapshot s(std::move(model_id), std::move(entries));
    validate_summary(s);
    return s;
}

void save_snapshot(const WeightSnapshot& s, const std::filesystem::path& path) { write_file(path, encode_snapshot(s)); }

WeightSnapshot load_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_file(path)); }

void save_summary(const SummarySnapshot& s, const std::filesystem::path& path) { write_file(path, encode_summary(s)); }

SummarySnapshot load_summary(const std::filesystem::path& path) { return decode_summary(read_file(path)); }

}  // namespace fedleak
