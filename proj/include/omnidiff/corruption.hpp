#pragma once

#include <unordered_set>
#include <vector>

#include "omnidiff/rng.hpp"
#include "omnidiff/sequence.hpp"

namespace omnidiff {

// x_t: the clean sequence with a subset of positions replaced by MASK.
struct CorruptedSequence {
    std::vector<TokenId> tokens;
    std::vector<std::size_t> mask_positions;  // sorted ascending
    double t = 0.0;
    UnifiedSequence origin;
};

struct MaskPlan {
    double base_ratio = 0.0;                    // r
    double pad_attenuation = 1.0;               // gamma, applied to PAD positions
    std::unordered_set<std::size_t> protected_positions;
};

// t ~ Uniform[0, 1].
double sample_time(Rng& rng);

// Mask ratio schedule: identity, r = t.
double mask_ratio(double t);

// Independent Bernoulli masking: probability r per non-protected position,
// gamma * r for PAD positions. If r > 0 and no position was masked, the draw
// is repeated once and the second outcome accepted as-is.
CorruptedSequence corrupt(const UnifiedSequence& x0, const MaskPlan& plan,
                          const Vocabulary& vocab, Rng& rng);

// Appends k ~ Uniform{0..max_pads} PAD tokens after the final token.
UnifiedSequence append_tail_pads(const UnifiedSequence& x0, Rng& rng, std::size_t max_pads,
                                 const Vocabulary& vocab);

}  // namespace omnidiff
