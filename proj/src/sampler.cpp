#include "omnidiff/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "omnidiff/errors.hpp"

namespace omnidiff {

void DecodeConfig::validate() const {
    if (steps < 1) throw ConfigError("steps must be >= 1");
    if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (repetition_penalty < 1.0) throw ConfigError("repetition penalty must be >= 1");
    if (position_penalty.gamma_p <= 0.0 || position_penalty.gamma_p > 1.0)
        throw ConfigError("gamma_p must lie in (0, 1]");
    if (position_penalty.early_fraction < 0.0 || position_penalty.early_fraction > 1.0)
        throw ConfigError("early_fraction must lie in [0, 1]");
}

std::size_t DecodeState::remaining_masks() const {
    std::size_t n = 0;
    for (char c : committed)
        if (!c) ++n;
    return n;
}

std::vector<std::size_t> DecodeState::masked_positions() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < committed.size(); ++i)
        if (!committed[i]) out.push_back(i);
    return out;
}

DecodeState DecodeState::fresh(std::size_t length, const Vocabulary& vocab,
                               const std::vector<TokenId>& condition_prefix) {
    if (condition_prefix.size() > length)
        throw ConfigError("condition prefix longer than sequence");
    DecodeState st;
    st.tokens.assign(length, vocab.mask());
    st.committed.assign(length, 0);
    st.condition.assign(length, 0);
    for (std::size_t i = 0; i < condition_prefix.size(); ++i) {
        st.tokens[i] = condition_prefix[i];
        st.committed[i] = 1;
        st.condition[i] = 1;
    }
    return st;
}

double entropy_confidence(const Eigen::Ref<const Eigen::VectorXf>& probs_row) {
    double total = 0.0;
    for (Eigen::Index v = 0; v < probs_row.size(); ++v) {
        const double p = probs_row(v);
        if (p < -1e-6) throw DomainError("negative probability in confidence row");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-6)
        throw DomainError("probability row is not normalized");
    double c = 0.0;
    for (Eigen::Index v = 0; v < probs_row.size(); ++v) {
        const double p = probs_row(v);
        if (p > 0.0) c += p * std::log(p);
    }
    return c;
}

void apply_repetition_penalty(Logits& logits, const DecodeState& state, double rho,
                              const Vocabulary& vocab, bool all_modalities) {
    if (rho < 1.0) throw ConfigError("repetition penalty must be >= 1");
    if (rho == 1.0) return;
    std::vector<char> hit(static_cast<std::size_t>(logits.cols()), 0);
    for (std::size_t i = 0; i < state.tokens.size(); ++i) {
        if (!state.committed[i]) continue;
        const TokenId id = state.tokens[i];
        if (id < 0 || id >= logits.cols()) continue;
        if (!all_modalities && vocab.in_range(id, Modality::Image)) continue;
        hit[static_cast<std::size_t>(id)] = 1;
    }
    const float r = static_cast<float>(rho);
    for (std::size_t i = 0; i < state.tokens.size(); ++i) {
        if (state.committed[i]) continue;
        auto row = logits.row(static_cast<Eigen::Index>(i));
        for (Eigen::Index v = 0; v < logits.cols(); ++v) {
            if (!hit[static_cast<std::size_t>(v)]) continue;
            row(v) = row(v) > 0.0f ? row(v) / r : row(v) * r;
        }
    }
}

Logits apply_cfg(const Logits& cond, const Logits& uncond, double s) {
    if (cond.rows() != uncond.rows() || cond.cols() != uncond.cols())
        throw ShapeError("CFG logits shape mismatch");
    // s = 1 must be a bitwise identity, not merely u + 1*(c - u).
    if (s == 1.0) return cond;
    return uncond + static_cast<float>(s) * (cond - uncond);
}

void apply_position_penalty(Logits& logits, const DecodeState& state, const DecodeConfig& cfg,
                            const SegmentSpec& gen_segment) {
    const auto& pp = cfg.position_penalty;
    if (pp.gamma_p >= 1.0 || pp.n_p == 0) return;
    if (pp.n_p > gen_segment.length)
        throw ConfigError("position penalty window exceeds generation segment");
    std::size_t committed_in_seg = 0;
    for (std::size_t i = gen_segment.start; i < gen_segment.start + gen_segment.length; ++i)
        if (state.committed[i]) ++committed_in_seg;
    const double fraction =
        static_cast<double>(committed_in_seg) / static_cast<double>(gen_segment.length);
    if (fraction >= pp.early_fraction) return;
    const std::size_t tail_begin = gen_segment.start + gen_segment.length - pp.n_p;
    for (std::size_t i = tail_begin; i < gen_segment.start + gen_segment.length; ++i) {
        if (state.committed[i]) continue;
        logits.row(static_cast<Eigen::Index>(i)) *= static_cast<float>(pp.gamma_p);
    }
}

namespace {

Eigen::VectorXf softmax_row(const Eigen::Ref<const Eigen::RowVectorXf>& row) {
    Eigen::VectorXf p = row.transpose();
    const float mx = p.maxCoeff();
    p = (p.array() - mx).exp();
    p /= p.sum();
    return p;
}

TokenId sample_row(const Eigen::Ref<const Eigen::RowVectorXf>& row, double tau, Rng& rng) {
    if (tau == 0.0) {
        Eigen::Index best = 0;
        row.maxCoeff(&best);
        return static_cast<TokenId>(best);
    }
    Eigen::VectorXf scaled = row.transpose() / static_cast<float>(tau);
    const float mx = scaled.maxCoeff();
    Eigen::VectorXd p = (scaled.array() - mx).exp().cast<double>();
    const double z = p.sum();
    double u = rng.uniform_real() * z;
    for (Eigen::Index v = 0; v < p.size(); ++v) {
        u -= p(v);
        if (u < 0.0) return static_cast<TokenId>(v);
    }
    return static_cast<TokenId>(p.size() - 1);
}

}  // namespace

void select_and_commit(const Logits& logits, DecodeState& state, std::size_t k, double tau,
                       Rng& rng, Ranking ranking, std::vector<std::size_t>* committed_out) {
    if (k < 1) throw ScheduleError("k must be >= 1");
    auto masked = state.masked_positions();
    if (k > masked.size()) throw ScheduleError("k exceeds remaining masked positions");

    std::vector<std::size_t> chosen;
    if (ranking == Ranking::Random) {
        rng.shuffle(masked);
        chosen.assign(masked.begin(), masked.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(chosen.begin(), chosen.end());
    } else {
        std::vector<std::pair<double, std::size_t>> ranked;
        ranked.reserve(masked.size());
        for (std::size_t i : masked) {
            const Eigen::VectorXf p = softmax_row(logits.row(static_cast<Eigen::Index>(i)));
            ranked.emplace_back(entropy_confidence(p), i);
        }
        // Highest confidence first; ties broken by lower position index.
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (std::size_t j = 0; j < k; ++j) chosen.push_back(ranked[j].second);
        std::sort(chosen.begin(), chosen.end());
    }

    for (std::size_t i : chosen) {
        state.tokens[i] =
            sample_row(logits.row(static_cast<Eigen::Index>(i)), tau, rng);
        state.committed[i] = 1;
        if (committed_out) committed_out->push_back(i);
    }
}

DecodeResult decode(const DenoiserFn& denoiser, DecodeState state, const DecodeConfig& cfg,
                    const Vocabulary& vocab, const std::optional<SegmentSpec>& gen_segment) {
    cfg.validate();
    std::size_t remaining = state.remaining_masks();
    if (remaining == 0) throw ScheduleError("decode requires at least one masked position");

    Rng rng(cfg.seed);
    DecodeResult result;
    result.commit_step.assign(state.tokens.size(), 0);

    const std::size_t total_steps = std::min(cfg.steps, remaining);
    for (std::size_t step = 0; step < total_steps; ++step) {
        const std::size_t remaining_steps = total_steps - step;
        const std::size_t k = (remaining + remaining_steps - 1) / remaining_steps;

        Logits logits = denoiser(state.tokens);
        if (cfg.cfg_scale != 1.0) {
            std::vector<TokenId> uncond_tokens = state.tokens;
            for (std::size_t i = 0; i < uncond_tokens.size(); ++i)
                if (state.condition[i]) uncond_tokens[i] = vocab.mask();
            logits = apply_cfg(logits, denoiser(uncond_tokens), cfg.cfg_scale);
        }
        apply_repetition_penalty(logits, state, cfg.repetition_penalty, vocab,
                                 cfg.repetition_all_modalities);
        if (gen_segment) apply_position_penalty(logits, state, cfg, *gen_segment);

        std::vector<std::size_t> committed_now;
        select_and_commit(logits, state, k, cfg.temperature, rng, cfg.ranking, &committed_now);
        for (std::size_t i : committed_now) result.commit_step[i] = step + 1;
        remaining -= committed_now.size();
        state.step = step + 1;
    }
    if (remaining != 0) throw ScheduleError("decode finished with masks remaining");
    result.tokens = std::move(state.tokens);
    return result;
}

void pre_infill(DecodeState& state, std::size_t L, const Vocabulary& vocab,
                std::size_t region_offset) {
    if (L < 4) throw DomainError("pre-infill requires region length >= 4");
    const std::size_t idx = region_offset + L / 4;
    if (idx >= state.tokens.size()) throw DomainError("pre-infill index out of bounds");
    if (state.committed[idx])
        throw ConfigError("pre-infill conflict: position already committed");
    state.tokens[idx] = vocab.bos_speech_response();
    state.committed[idx] = 1;
}

std::size_t adaptive_init_length(SpeechTask task, std::size_t input_token_count) {
    if (input_token_count < 1) throw ConfigError("adaptive length requires a nonempty input");
    const double factor = (task == SpeechTask::TTS) ? 3.5 : 0.2;
    return static_cast<std::size_t>(
        std::ceil(factor * static_cast<double>(input_token_count)));
}

DecodeResult inpaint(const std::vector<TokenId>& partial, const DenoiserFn& denoiser,
                     const DecodeConfig& cfg, const Vocabulary& vocab) {
    DecodeState state;
    state.tokens = partial;
    state.committed.assign(partial.size(), 0);
    state.condition.assign(partial.size(), 0);
    std::size_t masks = 0;
    for (std::size_t i = 0; i < partial.size(); ++i) {
        if (partial[i] == vocab.mask()) {
            ++masks;
        } else {
            state.committed[i] = 1;
            state.condition[i] = 1;
        }
    }
    if (masks == 0) throw DomainError("nothing to inpaint: no MASK tokens present");
    return decode(denoiser, std::move(state), cfg, vocab);
}

UnifiedSequence strip_trailing_pads(const UnifiedSequence& seq, const Vocabulary& vocab) {
    UnifiedSequence out = seq;
    while (!out.tokens.empty() && out.tokens.back() == vocab.pad()) out.tokens.pop_back();
    return out;
}

std::size_t scaled_tail_window(std::size_t segment_length) {
    // Reference setting: window L - 100 at an image sequence of L = 256.
    const double keep = 100.0 / 256.0;
    const auto margin = static_cast<std::size_t>(
        std::lround(keep * static_cast<double>(segment_length)));
    return segment_length > margin ? segment_length - margin : 0;
}

}  // namespace omnidiff
