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

#include "fedleak/flsim.hpp"

#include <algorithm>
#include <cmath>

#include "fedleak/error.hpp"
#include "fedleak/kernels.hpp"
#include "fedleak/parallel.hpp"
#include "fedleak/rng.hpp"

namespace fedleak {

namespace {

constexpr std::array<std::string_view, kAttributeCount> kAttributeNames{"gender", "age_group", "accent", "emotion",
                                                                       "dysarthria"};

// Seed-derivation tags for world constants.
constexpr std::uint64_t kScriptTag = 1;
constexpr std::uint64_t kContentTag = 2;
constexpr std::uint64_t kDirectionTag = 3;

thread_local std::uint64_t t_synthesis_count = 0;

}  // namespace

std::string_view to_string(Attribute a) noexcept { return kAttributeNames[static_cast<std::size_t>(a)]; }

std::optional<Attribute> parse_attribute(std::string_view name) noexcept {
    for (Attribute a : kAllAttributes) {
        if (to_string(a) == name) return a;
    }
    return std::nullopt;
}

std::array<AttributeSpec, kAttributeCount> WorldConfig::default_attributes() {
    std::array<AttributeSpec, kAttributeCount> out;
    const std::array<std::uint32_t, kAttributeCount> card{2, 2, 16, 8, 2};
    for (std::size_t a = 0; a < kAttributeCount; ++a) {
        out[a].cardinality = card[a];
        out[a].effect = 0.0;
        out[a].coverage.resize(card[a]);
        for (std::uint32_t v = 0; v < card[a]; ++v) out[a].coverage[v] = v;
    }
    return out;
}

void WorldConfig::validate() const {
    if (feature_dim == 0) throw ConfigError("world.feature_dim", "must be positive");
    if (vocab_size < 2) throw ConfigError("world.vocab_size", "must be at least 2");
    if (hidden_dim == 0) throw ConfigError("world.hidden_dim", "must be positive");
    if (frames == 0) throw ConfigError("world.frames", "must be positive");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConfigError("world.noise", "must be finite and >= 0");
    for (Attribute a : kAllAttributes) {
        const AttributeSpec& s = spec(a);
        const std::string field = "world.attributes." + std::string(to_string(a));
        if (s.cardinality == 0) throw ConfigError(field + ".cardinality", "must be positive");
        if (!(s.effect >= 0.0) || !std::isfinite(s.effect)) throw ConfigError(field + ".effect", "must be finite and >= 0");
        if (s.coverage.empty()) throw ConfigError(field + ".coverage", "must not be empty");
        for (std::uint32_t v : s.coverage) {
            if (v >= s.cardinality) {
                throw ConfigError(field + ".coverage", "value " + std::to_string(v) + " exceeds cardinality");
            }
        }
    }
}

World::World(WorldConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    const std::size_t d = cfg_.feature_dim;

    SplitMix64 script_rng(derive_seed(cfg_.seed, {kScriptTag}));
    script_.resize(cfg_.frames);
    for (auto& tok : script_) tok = static_cast<std::uint32_t>(script_rng.below(cfg_.vocab_size));

    SplitMix64 content_rng(derive_seed(cfg_.seed, {kContentTag}));
    content_.resize(cfg_.vocab_size * d);
    for (double& x : content_) x = content_rng.gaussian();

    for (Attribute a : kAllAttributes) {
        const auto ai = static_cast<std::size_t>(a);
        const std::uint32_t card = cfg_.spec(a).cardinality;
        directions_[ai].resize(static_cast<std::size_t>(card) * d);
        for (std::uint32_t v = 0; v < card; ++v) {
            SplitMix64 rng(derive_seed(cfg_.seed, {kDirectionTag, ai, v}));
            const std::span<double> dir(directions_[ai].data() + static_cast<std::size_t>(v) * d, d);
            double norm2 = 0.0;
            do {
                for (double& x : dir) x = rng.gaussian();
                norm2 = kernels::scalar_table().dot(dir.data(), dir.data(), d);
            } while (!(norm2 > 0.0));
            const double inv = 1.0 / std::sqrt(norm2);
            for (double& x : dir) x *= inv;
        }
    }
}

std::span<const double> World::content(std::uint32_t token) const noexcept {
    return std::span<const double>(content_).subspan(static_cast<std::size_t>(token) * cfg_.feature_dim,
                                                     cfg_.feature_dim);
}

std::span<const double> World::direction(Attribute a, std::uint32_t value) const noexcept {
    return std::span<const double>(directions_[static_cast<std::size_t>(a)])
        .subspan(static_cast<std::size_t>(value) * cfg_.feature_dim, cfg_.feature_dim);
}

void World::validate_profile(const AttributeProfile& p) const {
    for (Attribute a : kAllAttributes) {
        if (p[a] >= cfg_.spec(a).cardinality) {
            throw Error(Errc::InvalidProfile, std::string(to_string(a)) + " value " + std::to_string(p[a]) +
                                                  " exceeds cardinality " +
                                                  std::to_string(cfg_.spec(a).cardinality));
        }
    }
}

bool World::covers(const AttributeProfile& p) const noexcept {
    for (Attribute a : kAllAttributes) {
        const auto& cov = cfg_.spec(a).coverage;
        if (std::find(cov.begin(), cov.end(), p[a]) == cov.end()) return false;
    }
    return true;
}

Utterance synthesize_utterance(const SyntheticSpeaker& spk, const World& world, std::size_t utt_index) {
    world.validate_profile(spk.profile);
    ++t_synthesis_count;

    const WorldConfig& cfg = world.config();
    const std::size_t d = cfg.feature_dim;
    std::vector<double> offset(d, 0.0);
    for (Attribute a : kAllAttributes) {
        const double effect = cfg.spec(a).effect;
        if (effect != 0.0) kernels::axpy(effect, world.direction(a, spk.profile[a]), offset);
    }

    Utterance u;
    u.frames = cfg.frames;
    u.dim = d;
    u.tokens.assign(world.script().begin(), world.script().end());
    u.features.resize(u.frames * d);
    SplitMix64 rng(derive_seed(spk.seed, {utt_index}));
    for (std::size_t t = 0; t < u.frames; ++t) {
        const auto content = world.content(u.tokens[t]);
        double* row = u.features.data() + t * d;
        for (std::size_t i = 0; i < d; ++i) {
            // Draw noise unconditionally so the stream layout does not depend on cfg.noise.
            const double eps = rng.gaussian();
            row[i] = content[i] + offset[i] + cfg.noise * eps;
        }
    }
    return u;
}

std::uint64_t synthesis_count() noexcept { return t_synthesis_count; }

TinyModel TinyModel::zeros(std::size_t d, std::size_t h, std::size_t v) {
    TinyModel m;
    m.input_dim = d;
    m.hidden_dim = h;
    m.vocab_size = v;
    m.w1.assign(d * h, 0.0);
    m.b1.assign(h, 0.0);
    m.w2.assign(h * v, 0.0);
    m.b2.assign(v, 0.0);
    return m;
}

TinyModel TinyModel::initialize(std::size_t d, std::size_t h, std::size_t v, std::uint64_t seed) {
    TinyModel m = zeros(d, h, v);
    SplitMix64 rng(seed);
    for (auto* tensor : {&m.w1, &m.b1, &m.w2, &m.b2}) {
        for (double& x : *tensor) x = rng.uniform(-0.1, 0.1);
    }
    return m;
}

WeightSnapshot TinyModel::to_snapshot(std::string model_id) const {
    const auto d = static_cast<std::uint32_t>(input_dim);
    const auto h = static_cast<std::uint32_t>(hidden_dim);
    const auto v = static_cast<std::uint32_t>(vocab_size);
    std::vector<TensorRecord> tensors;
    tensors.push_back({std::string(kHiddenWeight), {d, h}, w1});
    tensors.push_back({std::string(kHiddenBias), {h}, b1});
    tensors.push_back({std::string(kOutputWeight), {h, v}, w2});
    tensors.push_back({std::string(kOutputBias), {v}, b2});
    return WeightSnapshot(std::move(model_id), std::move(tensors));
}

TinyModel TinyModel::from_snapshot(const WeightSnapshot& s, std::size_t d, std::size_t h, std::size_t v) {
    const TinyModel shape = zeros(d, h, v);
    require_same_architecture(s, shape.to_snapshot("expected"));
    TinyModel m;
    m.input_dim = d;
    m.hidden_dim = h;
    m.vocab_size = v;
    m.w1 = s.find(kHiddenWeight)->values;
    m.b1 = s.find(kHiddenBias)->values;
    m.w2 = s.find(kOutputWeight)->values;
    m.b2 = s.find(kOutputBias)->values;
    return m;
}

void TrainConfig::validate(const std::string& field) const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError(field + ".learning_rate", "must be finite and >= 0");
    }
}

namespace {

void check_shapes(const TinyModel& m, const Utterance& u) {
    if (u.dim != m.input_dim) {
        throw Error(Errc::ShapeMismatch, "utterance frames have dimension " + std::to_string(u.dim) +
                                             ", model expects " + std::to_string(m.input_dim));
    }
    if (u.frames == 0 || u.features.size() != u.frames * u.dim || u.tokens.size() != u.frames) {
        throw Error(Errc::ShapeMismatch, "utterance buffers do not match its frame count");
    }
    if (m.w1.size() != m.input_dim * m.hidden_dim || m.b1.size() != m.hidden_dim ||
        m.w2.size() != m.hidden_dim * m.vocab_size || m.b2.size() != m.vocab_size) {
        throw Error(Errc::ShapeMismatch, "model tensors do not match its declared dimensions");
    }
    for (std::uint32_t tok : u.tokens) {
        if (tok >= m.vocab_size) throw Error(Errc::ShapeMismatch, "token " + std::to_string(tok) + " outside vocabulary");
    }
}

// Per-frame activations: hidden = tanh(W1^T x + b1), logits = W2^T hidden + b2.
void forward_frame(const TinyModel& m, std::span<const double> x, std::span<double> hidden, std::span<double> logits) {
    const std::size_t h = m.hidden_dim;
    const std::size_t v = m.vocab_size;
    std::copy(m.b1.begin(), m.b1.end(), hidden.begin());
    for (std::size_t i = 0; i < m.input_dim; ++i) {
        kernels::axpy(x[i], std::span<const double>(m.w1).subspan(i * h, h), hidden);
    }
    for (double& a : hidden) a = std::tanh(a);
    std::copy(m.b2.begin(), m.b2.end(), logits.begin());
    for (std::size_t j = 0; j < h; ++j) {
        kernels::axpy(hidden[j], std::span<const double>(m.w2).subspan(j * v, v), logits);
    }
}

// Turns logits into softmax probabilities in place; returns -log p[target].
double softmax_xent(std::span<double> logits, std::uint32_t target) {
    const double mx = *std::max_element(logits.begin(), logits.end());
    const double shifted_target = logits[target] - mx;
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        z += l;
    }
    for (double& l : logits) l /= z;
    return std::log(z) - shifted_target;
}

}  // namespace

double forward_loss(const TinyModel& m, const Utterance& u) {
    check_shapes(m, u);
    std::vector<double> hidden(m.hidden_dim);
    std::vector<double> logits(m.vocab_size);
    double total = 0.0;
    for (std::size_t t = 0; t < u.frames; ++t) {
        forward_frame(m, u.frame(t), hidden, logits);
        total += softmax_xent(logits, u.tokens[t]);
    }
    return total / static_cast<double>(u.frames);
}

LossAndGradient loss_and_gradient(const TinyModel& m, const Utterance& u) {
    check_shapes(m, u);
    const std::size_t h = m.hidden_dim;
    const std::size_t v = m.vocab_size;
    const double inv_t = 1.0 / static_cast<double>(u.frames);

    LossAndGradient out{0.0, TinyModel::zeros(m.input_dim, h, v)};
    TinyModel& g = out.gradient;
    std::vector<double> hidden(h);
    std::vector<double> probs(v);
    std::vector<double> grad_pre(h);
    for (std::size_t t = 0; t < u.frames; ++t) {
        const auto x = u.frame(t);
        forward_frame(m, x, hidden, probs);
        out.loss += softmax_xent(probs, u.tokens[t]);

        // d(loss)/d(logits) = (softmax - onehot) / T
        probs[u.tokens[t]] -= 1.0;
        for (double& p : probs) p *= inv_t;

        kernels::axpy(1.0, probs, g.b2);
        for (std::size_t j = 0; j < h; ++j) {
            const auto w2_row = std::span<const double>(m.w2).subspan(j * v, v);
            kernels::axpy(hidden[j], probs, std::span<double>(g.w2).subspan(j * v, v));
            grad_pre[j] = kernels::dot(w2_row, probs) * (1.0 - hidden[j] * hidden[j]);
        }
        kernels::axpy(1.0, grad_pre, g.b1);
        for (std::size_t i = 0; i < m.input_dim; ++i) {
            kernels::axpy(x[i], grad_pre, std::span<double>(g.w1).subspan(i * h, h));
        }
    }
    out.loss *= inv_t;
    return out;
}

TinyModel train_step(const TinyModel& m, const Utterance& u, double lr) {
    if (!(lr >= 0.0)) throw Error(Errc::InvalidArgument, "learning rate must be >= 0");
    const LossAndGradient lg = loss_and_gradient(m, u);
    TinyModel next = m;
    kernels::axpy(-lr, lg.gradient.w1, next.w1);
    kernels::axpy(-lr, lg.gradient.b1, next.b1);
    kernels::axpy(-lr, lg.gradient.w2, next.w2);
    kernels::axpy(-lr, lg.gradient.b2, next.b2);
    return next;
}

std::vector<SyntheticSpeaker> make_coverage_corpus(const World& world, std::size_t count, std::uint64_t seed,
                                                   std::string_view id_prefix) {
    std::vector<SyntheticSpeaker> out(count);
    SplitMix64 rng(derive_seed(seed, {0}));
    for (Attribute a : kAllAttributes) {
        const auto& cov = world.config().spec(a).coverage;
        std::vector<std::uint32_t> values(count);
        for (std::size_t i = 0; i < count; ++i) values[i] = cov[i % cov.size()];
        rng.shuffle(std::span<std::uint32_t>(values));
        for (std::size_t i = 0; i < count; ++i) out[i].profile[a] = values[i];
    }
    for (std::size_t i = 0; i < count; ++i) {
        out[i].speaker_id = std::string(id_prefix) + "-" + std::to_string(i);
        out[i].seed = derive_seed(seed, {1, i});
    }
    return out;
}

namespace {

TinyModel run_training(TinyModel model, const World& world, const TrainConfig& cfg,
                       std::span<const SyntheticSpeaker> speakers) {
    if (cfg.steps == 0) return model;
    std::vector<Utterance> utts;
    utts.reserve(speakers.size());
    for (const SyntheticSpeaker& s : speakers) utts.push_back(synthesize_utterance(s, world, 0));
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        model = train_step(model, utts[step % utts.size()], cfg.learning_rate);
    }
    return model;
}

}  // namespace

WeightSnapshot pretrain_global(const World& world, const TrainConfig& cfg, std::span<const SyntheticSpeaker> corpus) {
    if (corpus.empty()) throw Error(Errc::EmptyCorpus, "pre-training corpus is empty");
    for (const SyntheticSpeaker& s : corpus) {
        world.validate_profile(s.profile);
        if (!world.covers(s.profile)) {
            throw Error(Errc::InvalidProfile, "corpus speaker '" + s.speaker_id + "' lies outside the coverage sets");
        }
    }
    const WorldConfig& wc = world.config();
    TinyModel model = TinyModel::initialize(wc.feature_dim, wc.hidden_dim, wc.vocab_size, cfg.seed);
    return run_training(std::move(model), world, cfg, corpus).to_snapshot("global");
}

WeightSnapshot continue_training(const WeightSnapshot& w_g, const World& world, const TrainConfig& cfg,
                                 std::span<const SyntheticSpeaker> speakers, std::string model_id) {
    const WorldConfig& wc = world.config();
    TinyModel model = TinyModel::from_snapshot(w_g, wc.feature_dim, wc.hidden_dim, wc.vocab_size);
    if (speakers.empty()) return model.to_snapshot(std::move(model_id));
    return run_training(std::move(model), world, cfg, speakers).to_snapshot(std::move(model_id));
}

WeightSnapshot client_finetune(const WeightSnapshot& w_g, const SyntheticSpeaker& spk, const World& world,
                               const TrainConfig& cfg, std::size_t utt_index) {
    const WorldConfig& wc = world.config();
    TinyModel model = TinyModel::from_snapshot(w_g, wc.feature_dim, wc.hidden_dim, wc.vocab_size);
    const Utterance u = synthesize_utterance(spk, world, utt_index);
    for (std::size_t step = 0; step < cfg.steps; ++step) model = train_step(model, u, cfg.learning_rate);
    return model.to_snapshot(spk.speaker_id + "/u" + std::to_string(utt_index));
}

std::vector<ShadowModel> build_shadow_set(const WeightSnapshot& w_g, std::span<const LabeledSpeaker> speakers,
                                          const World& world, const TrainConfig& cfg, std::size_t workers) {
    std::vector<ShadowModel> out(speakers.size());
    parallel_for(speakers.size(), workers, [&](std::size_t i) {
        out[i].weights = client_finetune(w_g, speakers[i].speaker, world, cfg, speakers[i].utterance);
        out[i].label = speakers[i].label;
    });
    return out;
}

}  // namespace fedleak
