#include "omnidiff/corruption.hpp"

#include "omnidiff/errors.hpp"

namespace omnidiff {

double sample_time(Rng& rng) { return rng.uniform_real(); }

double mask_ratio(double t) {
    if (t < 0.0 || t > 1.0) throw DomainError("time step outside [0, 1]");
    return t;
}

namespace {

std::vector<std::size_t> draw_masks(const UnifiedSequence& x0, const MaskPlan& plan,
                                    const Vocabulary& vocab, Rng& rng) {
    std::vector<std::size_t> masked;
    for (std::size_t i = 0; i < x0.tokens.size(); ++i) {
        if (plan.protected_positions.count(i)) continue;
        const double p = (x0.tokens[i] == vocab.pad())
                             ? plan.pad_attenuation * plan.base_ratio
                             : plan.base_ratio;
        if (rng.bernoulli(p)) masked.push_back(i);
    }
    return masked;
}

}  // namespace

CorruptedSequence corrupt(const UnifiedSequence& x0, const MaskPlan& plan,
                          const Vocabulary& vocab, Rng& rng) {
    if (plan.base_ratio < 0.0 || plan.base_ratio > 1.0)
        throw DomainError("mask ratio outside [0, 1]");
    if (plan.pad_attenuation <= 0.0 || plan.pad_attenuation > 1.0)
        throw DomainError("pad attenuation outside (0, 1]");
    for (std::size_t p : plan.protected_positions)
        if (p >= x0.tokens.size()) throw DomainError("protected position out of bounds");

    auto masked = draw_masks(x0, plan, vocab, rng);
    if (masked.empty() && plan.base_ratio > 0.0)
        masked = draw_masks(x0, plan, vocab, rng);  // resample once, accept either way

    CorruptedSequence out;
    out.origin = x0;
    out.tokens = x0.tokens;
    out.t = plan.base_ratio;
    out.mask_positions = std::move(masked);
    for (std::size_t i : out.mask_positions) out.tokens[i] = vocab.mask();
    return out;
}

UnifiedSequence append_tail_pads(const UnifiedSequence& x0, Rng& rng, std::size_t max_pads,
                                 const Vocabulary& vocab) {
    UnifiedSequence out = x0;
    const std::size_t k =
        static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_pads)));
    out.tokens.insert(out.tokens.end(), k, vocab.pad());
    return out;
}

}  // namespace omnidiff
