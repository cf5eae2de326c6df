#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "omnidiff/oracle.hpp"
#include "omnidiff/rng.hpp"
#include "omnidiff/sequence.hpp"

namespace omnidiff {

// Toy modalities with analytically known distributions. Text comes from a
// first-order Markov chain; images are deterministic tilings of 2x2 patterns
// keyed by text tokens; speech is per-token duration expansion.
struct ToyWorldConfig {
    int alphabet = 6;
    int text_len_min = 3;
    int text_len_max = 6;
    int grid_side = 4;      // even, >= 2
    int expand_min = 2;     // speech repeats per text token
    int expand_max = 5;
    std::uint64_t seed = 0;

    // Markov chain over the text alphabet; exported so oracles can be rebuilt
    // bit-identically from the config alone.
    std::vector<double> init_probs;
    std::vector<std::vector<double>> transition;

    // Structured default chain: nonuniform weights, zero self-transitions so
    // run-length decoding of speech is exactly invertible.
    static ToyWorldConfig make_default(int alphabet = 6, int len_min = 3, int len_max = 6,
                                       int side = 4, int emin = 2, int emax = 5);

    // Image codebook holds 4 distinct cells per text token.
    ModalitySizes modality_sizes() const {
        return {alphabet, 4 * alphabet, alphabet};
    }
    int tiles() const { return grid_side * grid_side / 4; }

    void validate() const;

    friend bool operator==(const ToyWorldConfig&, const ToyWorldConfig&) = default;
};

enum class TaskTag : std::uint8_t { T2I, I2T, TTS, ASR, S2I, SQA, SVQA };

const char* task_name(TaskTag t);
TaskTag task_from_name(const std::string& name);

struct PairedSample {
    TaskTag task = TaskTag::T2I;
    std::vector<SegmentPart> prompt;
    std::vector<SegmentPart> response;
};

// Spoken-dialogue response layout: text answer segment, interior pads, the
// [begin-of-speech] marker at one quarter of the region, speech answer, tail
// pads.
constexpr std::size_t kDialogRegionLen = 128;
constexpr std::size_t kDialogBosIndex = kDialogRegionLen / 4;

std::vector<TokenId> gen_text(const ToyWorldConfig& world, const Vocabulary& vocab, Rng& rng);

std::vector<TokenId> render_image_toy(const std::vector<TokenId>& text,
                                      const ToyWorldConfig& world, const Vocabulary& vocab);

std::vector<TokenId> render_speech_toy(const std::vector<TokenId>& text,
                                       const ToyWorldConfig& world, const Vocabulary& vocab,
                                       Rng& rng);

// Run-length decode; exact inverse of render_speech_toy for repeat-free text.
std::vector<TokenId> speech_to_text(const std::vector<TokenId>& speech,
                                    const ToyWorldConfig& world, const Vocabulary& vocab);

// Majority tile rule used by the dialogue tasks: most frequent text token in
// the tiling, ties to the smallest id.
TokenId majority_text_token(const std::vector<TokenId>& image, const ToyWorldConfig& world,
                            const Vocabulary& vocab);

std::vector<PairedSample> make_dataset(TaskTag task, std::size_t n, const ToyWorldConfig& world,
                                       const Vocabulary& vocab, Rng& rng);

// Exact joint over assembled unified sequences. Durations are enumerated, so
// the support must stay small (<= limit).
OracleModel joint_distribution(TaskTag task, const ToyWorldConfig& world,
                               const Vocabulary& vocab, std::size_t limit = 1000000);

// Training-ready view of a sample: unified tokens plus protected (prompt)
// positions. Dialogue tasks use the fixed-length response layout.
struct TrainingSequence {
    UnifiedSequence seq;
    std::unordered_set<std::size_t> protected_positions;
    std::size_t response_offset = 0;
};

TrainingSequence to_training_sequence(const PairedSample& sample, const ToyWorldConfig& world,
                                      const Vocabulary& vocab);

std::vector<TokenId> dialog_response_layout(const std::vector<TokenId>& answer_text,
                                            const std::vector<TokenId>& answer_speech,
                                            const Vocabulary& vocab);

struct EvalReport {
    double token_accuracy = 0.0;
    double exact_match = 0.0;
    double duplication_score = 0.0;
    double tv_distance = 0.0;
    double nll = 0.0;
};

// Fraction of top-half grid rows whose exact pattern recurs in the bottom half.
double duplication_score(const std::vector<TokenId>& image, int grid_side);

EvalReport evaluate(const std::vector<std::vector<TokenId>>& outputs,
                    const std::vector<std::vector<TokenId>>& references, TaskTag task,
                    const ToyWorldConfig& world);

// Total variation between the empirical distribution of samples and an oracle.
double total_variation(const std::vector<std::vector<TokenId>>& samples,
                       const OracleModel& oracle);

double mean_nll(const std::vector<std::vector<TokenId>>& samples, const OracleModel& oracle);

}  // namespace omnidiff
