#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "omnidiff/vocab.hpp"

namespace omnidiff {

// Span of one modality's content tokens inside a unified sequence. `start`
// indexes the first content token; the bracketing BOT/EOT sit at start-1 and
// start+length.
struct SegmentSpec {
    Modality modality = Modality::Text;
    std::size_t start = 0;
    std::size_t length = 0;

    friend bool operator==(const SegmentSpec&, const SegmentSpec&) = default;
};

// Delimiter-wrapped concatenation of modality segments.
struct UnifiedSequence {
    std::vector<TokenId> tokens;
    std::vector<SegmentSpec> segments;

    std::size_t length() const { return tokens.size(); }

    friend bool operator==(const UnifiedSequence&, const UnifiedSequence&) = default;
};

using SegmentPart = std::pair<Modality, std::vector<TokenId>>;

// [BOT_m] ++ tokens ++ [EOT_m]; every token must lie in m's range.
std::vector<TokenId> wrap_segment(const std::vector<TokenId>& tokens, Modality m,
                                  const Vocabulary& vocab);

// Concatenates wrapped parts and records segment spans.
UnifiedSequence assemble_sequence(const std::vector<SegmentPart>& parts, const Vocabulary& vocab);

// Recovers segment spans from BOT/EOT bracketing. PAD and BOS_SPEECH_RESPONSE
// are permitted between segments; anything else outside a segment, unbalanced
// delimiters, or out-of-range content tokens are rejected.
std::vector<SegmentSpec> parse_sequence(const std::vector<TokenId>& tokens,
                                        const Vocabulary& vocab);

}  // namespace omnidiff
