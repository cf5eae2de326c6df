#pragma once

#include <optional>

#include "omnidiff/net.hpp"
#include "omnidiff/sampler.hpp"
#include "omnidiff/toyworld.hpp"

namespace omnidiff {

// Wraps trained parameters as a logits function over token sequences.
DenoiserFn make_denoiser(const NetParams<float>& params);

// A conditional decode problem: the prompt committed as conditioning evidence,
// followed by a masked response region with its delimiters pre-committed (or,
// for the spoken-dialogue tasks, a raw 128-token region with only the
// speech-response marker planted).
struct ResponsePlan {
    DecodeState state;
    std::size_t region_begin = 0;  // first content position of the response
    std::size_t region_len = 0;    // masked content positions
    SegmentSpec gen_segment;       // content region, for the position penalty
};

// Region length defaults: grid size for image responses, the adaptive 3.5x /
// 0.2x rules for TTS / ASR, the fixed dialogue region for SQA / SVQA;
// content_len overrides the default where that makes sense (text responses).
ResponsePlan plan_response(TaskTag task, const std::vector<SegmentPart>& prompt,
                           const ToyWorldConfig& world, const Vocabulary& vocab,
                           std::optional<std::size_t> content_len = std::nullopt);

// Content tokens of the decoded response region.
std::vector<TokenId> extract_response(const ResponsePlan& plan, const DecodeResult& result);

}  // namespace omnidiff
