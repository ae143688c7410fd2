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

/// Desk-scale federated personalization.
///
/// Speakers carry five categorical attributes. Every speaker reads the same
/// world-level token script; frame t of an utterance is
///
///     content(token_t) + sum_a effect_a * direction_a(value_a) + noise_t
///
/// with unit-norm per-(attribute, value) directions and Gaussian noise drawn
/// from the speaker's seed and utterance index. A one-hidden-layer tanh
/// network classifies each frame into its token. The global model is trained
/// on a corpus restricted to the world's coverage sets; clients fine-tune it
/// on exactly one utterance each.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedleak/centroid.hpp"
#include "fedleak/snapshot.hpp"

namespace fedleak {

enum class Attribute : std::size_t { gender, age_group, accent, emotion, dysarthria };

inline constexpr std::size_t kAttributeCount = 5;
inline constexpr std::array<Attribute, kAttributeCount> kAllAttributes{
    Attribute::gender, Attribute::age_group, Attribute::accent, Attribute::emotion, Attribute::dysarthria};

std::string_view to_string(Attribute a) noexcept;
std::optional<Attribute> parse_attribute(std::string_view name) noexcept;

struct AttributeProfile {
    std::array<std::uint32_t, kAttributeCount> values{};

    std::uint32_t operator[](Attribute a) const noexcept { return values[static_cast<std::size_t>(a)]; }
    std::uint32_t& operator[](Attribute a) noexcept { return values[static_cast<std::size_t>(a)]; }

    friend bool operator==(const AttributeProfile&, const AttributeProfile&) = default;
};

struct SyntheticSpeaker {
    std::string speaker_id;
    AttributeProfile profile;
    std::uint64_t seed = 0;
};

/// T frames of D features (row-major) plus frame-level token targets.
struct Utterance {
    std::size_t frames = 0;
    std::size_t dim = 0;
    std::vector<double> features;
    std::vector<std::uint32_t> tokens;

    [[nodiscard]] std::span<const double> frame(std::size_t t) const noexcept {
        return std::span<const double>(features).subspan(t * dim, dim);
    }

    friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct AttributeSpec {
    std::uint32_t cardinality = 2;
    /// Magnitude of the attribute's shift along its direction; >= 0.
    double effect = 0.0;
    /// Values present in the global model's training corpus; non-empty.
    std::vector<std::uint32_t> coverage;

    friend bool operator==(const AttributeSpec&, const AttributeSpec&) = default;
};

struct WorldConfig {
    std::uint64_t seed = 0;
    std::size_t feature_dim = 16;
    std::size_t vocab_size = 8;
    std::size_t hidden_dim = 16;
    std::size_t frames = 24;
    double noise = 0.3;
    std::array<AttributeSpec, kAttributeCount> attributes = default_attributes();

    [[nodiscard]] const AttributeSpec& spec(Attribute a) const noexcept {
        return attributes[static_cast<std::size_t>(a)];
    }
    AttributeSpec& spec(Attribute a) noexcept { return attributes[static_cast<std::size_t>(a)]; }

    /// Gender 2, age group 2, accent 16, emotion 8, dysarthria 2; no effects;
    /// full coverage.
    static std::array<AttributeSpec, kAttributeCount> default_attributes();

    /// Throws ConfigError naming the field.
    void validate() const;

    friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

/// A WorldConfig with its derived constants: script, content embeddings and
/// effect directions.
class World {
public:
    explicit World(WorldConfig cfg);

    [[nodiscard]] const WorldConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] std::span<const std::uint32_t> script() const noexcept { return script_; }
    [[nodiscard]] std::span<const double> content(std::uint32_t token) const noexcept;
    [[nodiscard]] std::span<const double> direction(Attribute a, std::uint32_t value) const noexcept;

    /// Throws InvalidProfile when a value exceeds its cardinality.
    void validate_profile(const AttributeProfile& p) const;
    [[nodiscard]] bool covers(const AttributeProfile& p) const noexcept;

private:
    WorldConfig cfg_;
    std::vector<std::uint32_t> script_;
    std::vector<double> content_;  // V x D
    std::array<std::vector<double>, kAttributeCount> directions_;  // cardinality x D each
};

Utterance synthesize_utterance(const SyntheticSpeaker& spk, const World& world, std::size_t utt_index);

/// Utterances synthesized by the calling thread so far.
std::uint64_t synthesis_count() noexcept;

inline constexpr std::string_view kHiddenWeight = "hidden.weight";
inline constexpr std::string_view kHiddenBias = "hidden.bias";
inline constexpr std::string_view kOutputWeight = "output.weight";
inline constexpr std::string_view kOutputBias = "output.bias";

/// logits = W2^T tanh(W1^T x + b1) + b2, with W1 (D x H) and W2 (H x V)
/// stored row-major.
struct TinyModel {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t vocab_size = 0;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    std::vector<double> b2;

    static TinyModel zeros(std::size_t d, std::size_t h, std::size_t v);

    /// Uniform in [-0.1, 0.1] from SplitMix64(seed), filling w1, b1, w2, b2
    /// in that order, row-major.
    static TinyModel initialize(std::size_t d, std::size_t h, std::size_t v, std::uint64_t seed);

    [[nodiscard]] WeightSnapshot to_snapshot(std::string model_id) const;

    /// Throws ArchitectureMismatch unless `s` holds exactly the four tensors
    /// with shapes (d,h), (h), (h,v), (v).
    static TinyModel from_snapshot(const WeightSnapshot& s, std::size_t d, std::size_t h, std::size_t v);

    friend bool operator==(const TinyModel&, const TinyModel&) = default;
};

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t steps = 20;
    std::uint64_t seed = 0;

    /// Throws ConfigError with the given field prefix.
    void validate(const std::string& field) const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Mean per-frame cross-entropy. Throws ShapeMismatch.
double forward_loss(const TinyModel& m, const Utterance& u);

struct LossAndGradient {
    double loss = 0.0;
    TinyModel gradient;
};

LossAndGradient loss_and_gradient(const TinyModel& m, const Utterance& u);

/// One full-batch gradient step over the utterance. Returns a new model.
TinyModel train_step(const TinyModel& m, const Utterance& u, double lr);

/// `count` speakers whose attribute values are drawn from the coverage sets,
/// balanced per value: attribute a of speaker i cycles through a shuffled
/// repetition of coverage(a).
std::vector<SyntheticSpeaker> make_coverage_corpus(const World& world, std::size_t count, std::uint64_t seed,
                                                   std::string_view id_prefix = "corpus");

/// Initializes from cfg.seed and runs cfg.steps train steps cycling through
/// one utterance per corpus speaker. Throws EmptyCorpus, or InvalidProfile
/// when a speaker falls outside the world's coverage.
WeightSnapshot pretrain_global(const World& world, const TrainConfig& cfg, std::span<const SyntheticSpeaker> corpus);

/// Continues training an existing global model on more speakers (no coverage
/// restriction; this is how coverage is extended).
WeightSnapshot continue_training(const WeightSnapshot& w_g, const World& world, const TrainConfig& cfg,
                                 std::span<const SyntheticSpeaker> speakers, std::string model_id);

/// Synthesizes exactly one utterance for `spk` and takes cfg.steps steps on
/// it starting from w_g.
WeightSnapshot client_finetune(const WeightSnapshot& w_g, const SyntheticSpeaker& spk, const World& world,
                               const TrainConfig& cfg, std::size_t utt_index = 0);

struct LabeledSpeaker {
    SyntheticSpeaker speaker;
    ClassLabel label;
    std::size_t utterance = 0;
};

struct ShadowModel {
    WeightSnapshot weights;
    ClassLabel label;
};

std::vector<ShadowModel> build_shadow_set(const WeightSnapshot& w_g, std::span<const LabeledSpeaker> speakers,
                                          const World& world, const TrainConfig& cfg, std::size_t workers = 1);

}  // namespace fedleak
