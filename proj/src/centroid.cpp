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

#include "fedleak/centroid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedleak/error.hpp"
#include "fedleak/kernels.hpp"

namespace fedleak {

double pairwise_sum(std::span<const double> values) noexcept {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

CentroidModel::CentroidModel(std::vector<ClassLabel> classes, std::vector<std::vector<double>> centroids,
                             std::vector<std::size_t> counts, std::vector<LayoutEntry> layout)
    : classes_(std::move(classes)),
      centroids_(std::move(centroids)),
      counts_(std::move(counts)),
      layout_(std::move(layout)) {
    if (classes_.size() < 2) {
        throw Error(Errc::FewerThanTwoClasses, "a centroid model needs at least two classes, got " +
                                                   std::to_string(classes_.size()));
    }
    if (centroids_.size() != classes_.size() || counts_.size() != classes_.size()) {
        throw Error(Errc::DimensionMismatch, "class, centroid and count lists differ in length");
    }
    dim_ = centroids_.front().size();
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        if (classes_[c].name.empty()) throw Error(Errc::InvalidArgument, "class label at position " + std::to_string(c) + " is empty");
        for (std::size_t k = 0; k < c; ++k) {
            if (classes_[k] == classes_[c]) throw Error(Errc::InvalidArgument, "class '" + classes_[c].name + "' repeated");
        }
        if (centroids_[c].size() != dim_) {
            throw Error(Errc::DimensionMismatch, "centroid of class '" + classes_[c].name + "' has length " +
                                                     std::to_string(centroids_[c].size()) + ", expected " +
                                                     std::to_string(dim_));
        }
        if (counts_[c] == 0) throw Error(Errc::NoSamplesForClass, "class '" + classes_[c].name + "' has no samples");
    }
}

CentroidModel CentroidModel::fit(std::span<const LabeledFeature> samples) {
    if (samples.empty()) throw Error(Errc::FewerThanTwoClasses, "no samples to fit");
    const std::size_t dim = samples.front().features.dim();

    std::vector<ClassLabel> classes;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].features.dim() != dim) {
            throw Error(Errc::DimensionMismatch, "sample " + std::to_string(i) + " has dimension " +
                                                     std::to_string(samples[i].features.dim()) + ", expected " +
                                                     std::to_string(dim));
        }
        std::size_t c = 0;
        while (c < classes.size() && classes[c] != samples[i].label) ++c;
        if (c == classes.size()) {
            classes.push_back(samples[i].label);
            members.emplace_back();
        }
        members[c].push_back(i);
    }
    if (classes.size() < 2) {
        throw Error(Errc::FewerThanTwoClasses, "samples cover only class '" + classes.front().name + "'");
    }

    std::vector<std::vector<double>> centroids(classes.size(), std::vector<double>(dim));
    std::vector<std::size_t> counts(classes.size());
    std::vector<double> column;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        counts[c] = members[c].size();
        column.resize(members[c].size());
        for (std::size_t j = 0; j < dim; ++j) {
            for (std::size_t k = 0; k < members[c].size(); ++k) column[k] = samples[members[c][k]].features.values[j];
            centroids[c][j] = pairwise_sum(column) / static_cast<double>(counts[c]);
        }
    }
    return CentroidModel(std::move(classes), std::move(centroids), std::move(counts), samples.front().features.layout);
}

std::size_t CentroidModel::index_of(const ClassLabel& label) const noexcept {
    std::size_t c = 0;
    while (c < classes_.size() && classes_[c] != label) ++c;
    return c;
}

double normalized_distance(std::span<const double> z, std::span<const double> c) {
    if (z.size() != c.size()) {
        throw Error(Errc::DimensionMismatch,
                    "query has dimension " + std::to_string(z.size()) + ", centroid " + std::to_string(c.size()));
    }
    const double zn = std::sqrt(kernels::dot(z, z));
    if (!(zn > 0.0)) throw Error(Errc::ZeroNormVector, "query vector has zero norm");
    const double cn = std::sqrt(kernels::dot(c, c));
    if (!(cn > 0.0)) throw Error(Errc::ZeroNormVector, "centroid vector has zero norm");
    return std::sqrt(kernels::squared_distance(z, c)) / (zn * cn);
}

Prediction predict(const CentroidModel& m, const FeatureVector& z) {
    if (z.dim() != m.dim()) {
        throw Error(Errc::DimensionMismatch,
                    "query has dimension " + std::to_string(z.dim()) + ", model " + std::to_string(m.dim()));
    }
    Prediction p;
    p.distances.resize(m.num_classes());
    for (std::size_t c = 0; c < m.num_classes(); ++c) {
        p.distances[c] = normalized_distance(z.values, m.centroid(c));
        // Strict comparison: the first class in model order wins ties.
        if (p.distances[c] < p.distances[p.class_index]) p.class_index = c;
    }
    p.label = m.classes()[p.class_index];
    return p;
}

std::vector<Prediction> predict_batch(const CentroidModel& m, std::span<const FeatureVector> zs) {
    std::vector<Prediction> out;
    out.reserve(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) {
        try {
            out.push_back(predict(m, zs[i]));
        } catch (const Error& e) {
            throw BatchError(i, e);
        }
    }
    return out;
}

namespace {

std::filesystem::path manifest_path(const std::filesystem::path& path) {
    std::filesystem::path p = path;
    p += ".manifest";
    return p;
}

std::string entry_name(std::size_t c, std::size_t block, const std::string& tensor) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "c%05zu/b%06zu/", c, block);
    return buf + tensor;
}

}  // namespace

void save_centroid_model(const CentroidModel& m, const std::filesystem::path& path) {
    if (m.dim() % kStatsPerTensor != 0) {
        throw Error(Errc::InvalidArgument, "centroid dimension " + std::to_string(m.dim()) + " is not a multiple of 4");
    }
    const std::size_t blocks = m.dim() / kStatsPerTensor;
    std::vector<SummaryEntry> entries;
    entries.reserve(m.num_classes() * blocks);
    for (std::size_t c = 0; c < m.num_classes(); ++c) {
        const auto z = m.centroid(c);
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::string tensor =
                b < m.layout().size() ? m.layout()[b].tensor : "block" + std::to_string(b);
            const std::size_t o = b * kStatsPerTensor;
            entries.push_back({entry_name(c, b, tensor), TensorStats{z[o], z[o + 1], z[o + 2], z[o + 3]}});
        }
    }
    save_summary(SummarySnapshot("centroids", std::move(entries)), path);

    std::ofstream out(manifest_path(path));
    if (!out) throw Error(Errc::IoFailure, "cannot write '" + manifest_path(path).string() + "'");
    out << "fedleak-centroids 1\n";
    out << "dim " << m.dim() << '\n';
    for (std::size_t c = 0; c < m.num_classes(); ++c) out << "class " << m.count(c) << ' ' << m.classes()[c].name << '\n';
    if (!out) throw Error(Errc::IoFailure, "write error on '" + manifest_path(path).string() + "'");
}

CentroidModel load_centroid_model(const std::filesystem::path& path) {
    const SummarySnapshot summary = load_summary(path);

    std::ifstream in(manifest_path(path));
    if (!in) throw Error(Errc::IoFailure, "cannot open '" + manifest_path(path).string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != "fedleak-centroids 1") throw Error(Errc::BadMagic, "manifest header '" + line + "'");
    std::size_t dim = 0;
    std::vector<ClassLabel> classes;
    std::vector<std::size_t> counts;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "dim") {
            ls >> dim;
        } else if (key == "class") {
            std::size_t n = 0;
            ls >> n;
            ls.get();
            std::string name;
            std::getline(ls, name);
            classes.push_back({name});
            counts.push_back(n);
        } else if (!key.empty()) {
            throw Error(Errc::InvalidArgument, "unknown manifest line '" + line + "'");
        }
    }
    const std::size_t blocks = dim / kStatsPerTensor;
    if (summary.size() != classes.size() * blocks) {
        throw Error(Errc::DimensionMismatch, "manifest describes " + std::to_string(classes.size()) + " x " +
                                                 std::to_string(blocks) + " blocks, file holds " +
                                                 std::to_string(summary.size()));
    }
    std::vector<std::vector<double>> centroids(classes.size());
    std::vector<LayoutEntry> layout;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        for (std::size_t b = 0; b < blocks; ++b) {
            const SummaryEntry& e = summary.entries()[c * blocks + b];
            const std::string expected = entry_name(c, b, "");
            if (e.name.compare(0, expected.size(), expected) != 0) {
                throw Error(Errc::InvalidArgument, "unexpected centroid entry '" + e.name + "'");
            }
            centroids[c].insert(centroids[c].end(), {e.stats.mean, e.stats.std, e.stats.min, e.stats.max});
            if (c == 0) layout.push_back({e.name.substr(expected.size()), b * kStatsPerTensor});
        }
    }
    return CentroidModel(std::move(classes), std::move(centroids), std::move(counts), std::move(layout));
}

}  // namespace fedleak
