#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "omnidiff/rng.hpp"
#include "omnidiff/sequence.hpp"

namespace omnidiff {

using Logits = Eigen::MatrixXf;

// Per-position vocabulary logits for the given (partially masked) tokens.
using DenoiserFn = std::function<Logits(const std::vector<TokenId>&)>;

enum class Ranking { Entropy, Random };

struct PositionPenalty {
    double gamma_p = 1.0;        // logit scale for the tail window, <= 1
    std::size_t n_p = 0;         // tail window length within the generation segment
    double early_fraction = 0.5; // penalty active while committed fraction < this
};

struct DecodeConfig {
    std::size_t steps = 1;             // T
    double temperature = 1.0;          // tau; 0 => argmax
    double cfg_scale = 1.0;            // s
    double repetition_penalty = 1.0;   // rho >= 1
    PositionPenalty position_penalty;
    std::uint64_t seed = 0;
    Ranking ranking = Ranking::Entropy;
    // When false, the repetition penalty only touches text and speech ids.
    bool repetition_all_modalities = true;

    void validate() const;
};

struct DecodeState {
    std::vector<TokenId> tokens;        // MASK at undecoded positions
    std::vector<char> committed;        // per position
    std::vector<char> condition;        // conditioning positions (CFG masks these)
    std::size_t step = 0;

    std::size_t remaining_masks() const;
    std::vector<std::size_t> masked_positions() const;

    // All positions masked except an optional committed conditioning prefix.
    static DecodeState fresh(std::size_t length, const Vocabulary& vocab,
                             const std::vector<TokenId>& condition_prefix = {});
};

struct DecodeResult {
    std::vector<TokenId> tokens;
    std::vector<std::size_t> commit_step;  // step index at which each position committed
};

// c = sum_v p_v log p_v (negative entropy, <= 0); one-hot rows give 0.
double entropy_confidence(const Eigen::Ref<const Eigen::VectorXf>& probs_row);

// Divide positive / multiply negative logits of already-committed ids at every
// still-masked row.
void apply_repetition_penalty(Logits& logits, const DecodeState& state, double rho,
                              const Vocabulary& vocab, bool all_modalities = true);

// z = uncond + s * (cond - uncond).
Logits apply_cfg(const Logits& cond, const Logits& uncond, double s);

// Scales the logits of the still-masked tail of the generation segment by
// gamma_p while the committed fraction of the segment is below early_fraction.
void apply_position_penalty(Logits& logits, const DecodeState& state, const DecodeConfig& cfg,
                            const SegmentSpec& gen_segment);

// Commits the k most confident masked positions (or k random ones under
// Ranking::Random), sampling each token from softmax(logits / tau).
void select_and_commit(const Logits& logits, DecodeState& state, std::size_t k, double tau,
                       Rng& rng, Ranking ranking = Ranking::Entropy,
                       std::vector<std::size_t>* committed_out = nullptr);

// Entropy-confidence parallel decoding with the even k-schedule:
// k = ceil(remaining / remaining_steps); finishes in min(T, masks) steps.
DecodeResult decode(const DenoiserFn& denoiser, DecodeState init, const DecodeConfig& cfg,
                    const Vocabulary& vocab,
                    const std::optional<SegmentSpec>& gen_segment = std::nullopt);

// Commits BOS_SPEECH_RESPONSE at region_offset + floor(0.25 * L).
void pre_infill(DecodeState& state, std::size_t L, const Vocabulary& vocab,
                std::size_t region_offset = 0);

enum class SpeechTask { TTS, ASR };

// TTS: ceil(3.5 x); ASR: ceil(0.2 x).
std::size_t adaptive_init_length(SpeechTask task, std::size_t input_token_count);

// Fills the MASK holes of a partial sequence; known tokens stay untouched.
DecodeResult inpaint(const std::vector<TokenId>& partial, const DenoiserFn& denoiser,
                     const DecodeConfig& cfg, const Vocabulary& vocab);

UnifiedSequence strip_trailing_pads(const UnifiedSequence& seq, const Vocabulary& vocab);

// Tail window for a generation segment of length L: the reference setting
// L - 100 at L = 256, rescaled to preserve the window fraction.
std::size_t scaled_tail_window(std::size_t segment_length);

}  // namespace omnidiff
