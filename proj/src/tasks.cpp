#include "omnidiff/tasks.hpp"

#include <cmath>

#include "omnidiff/errors.hpp"

namespace omnidiff {

DenoiserFn make_denoiser(const NetParams<float>& params) {
    return [&params](const std::vector<TokenId>& tokens) {
        return denoiser_forward(params, tokens);
    };
}

namespace {

std::size_t content_count(const std::vector<SegmentPart>& prompt, Modality m) {
    std::size_t n = 0;
    for (const auto& [mod, toks] : prompt)
        if (mod == m) n += toks.size();
    return n;
}

}  // namespace

ResponsePlan plan_response(TaskTag task, const std::vector<SegmentPart>& prompt,
                           const ToyWorldConfig& world, const Vocabulary& vocab,
                           std::optional<std::size_t> content_len) {
    const auto prompt_tokens = assemble_sequence(prompt, vocab).tokens;
    const std::size_t offset = prompt_tokens.size();

    ResponsePlan plan;
    const bool dialogue = task == TaskTag::SQA || task == TaskTag::SVQA;
    Modality response_modality = Modality::Text;
    std::size_t len = 0;
    switch (task) {
        case TaskTag::T2I:
        case TaskTag::S2I:
            response_modality = Modality::Image;
            len = static_cast<std::size_t>(world.grid_side) * world.grid_side;
            break;
        case TaskTag::TTS:
            response_modality = Modality::Speech;
            len = adaptive_init_length(SpeechTask::TTS, content_count(prompt, Modality::Text));
            break;
        case TaskTag::ASR:
            response_modality = Modality::Text;
            len = adaptive_init_length(SpeechTask::ASR, content_count(prompt, Modality::Speech));
            break;
        case TaskTag::I2T:
            response_modality = Modality::Text;
            len = static_cast<std::size_t>(world.text_len_max);
            break;
        case TaskTag::SQA:
        case TaskTag::SVQA:
            len = kDialogRegionLen;
            break;
    }
    if (content_len) len = *content_len;
    if (len < 1) throw ConfigError("response region must hold at least one token");

    const std::size_t total =
        offset + (dialogue ? kDialogRegionLen : len + 2);
    plan.state = DecodeState::fresh(total, vocab, prompt_tokens);

    if (dialogue) {
        plan.region_begin = offset;
        plan.region_len = kDialogRegionLen;
        plan.gen_segment = SegmentSpec{Modality::Speech, offset, kDialogRegionLen};
        pre_infill(plan.state, kDialogRegionLen, vocab, offset);
    } else {
        plan.state.tokens[offset] = vocab.bot(response_modality);
        plan.state.committed[offset] = 1;
        plan.state.tokens[offset + len + 1] = vocab.eot(response_modality);
        plan.state.committed[offset + len + 1] = 1;
        plan.region_begin = offset + 1;
        plan.region_len = len;
        plan.gen_segment = SegmentSpec{response_modality, offset + 1, len};
    }
    return plan;
}

std::vector<TokenId> extract_response(const ResponsePlan& plan, const DecodeResult& result) {
    if (plan.region_begin + plan.region_len > result.tokens.size())
        throw ShapeError("decode result shorter than the planned region");
    return {result.tokens.begin() + static_cast<std::ptrdiff_t>(plan.region_begin),
            result.tokens.begin() +
                static_cast<std::ptrdiff_t>(plan.region_begin + plan.region_len)};
}

}  // namespace omnidiff
