#include "omnidiff/sequence.hpp"

#include <string>

#include "omnidiff/errors.hpp"

namespace omnidiff {

std::vector<TokenId> wrap_segment(const std::vector<TokenId>& tokens, Modality m,
                                  const Vocabulary& vocab) {
    for (TokenId id : tokens) {
        if (!vocab.in_range(id, m))
            throw ModalityViolation("token " + std::to_string(id) + " outside " +
                                    modality_name(m) + " range");
    }
    std::vector<TokenId> out;
    out.reserve(tokens.size() + 2);
    out.push_back(vocab.bot(m));
    out.insert(out.end(), tokens.begin(), tokens.end());
    out.push_back(vocab.eot(m));
    return out;
}

UnifiedSequence assemble_sequence(const std::vector<SegmentPart>& parts,
                                  const Vocabulary& vocab) {
    if (parts.empty()) throw DomainError("cannot assemble an empty part list");
    UnifiedSequence seq;
    for (const auto& [modality, tokens] : parts) {
        if (tokens.empty()) throw DomainError("empty segment in assemble_sequence");
        const auto wrapped = wrap_segment(tokens, modality, vocab);
        seq.segments.push_back({modality, seq.tokens.size() + 1, tokens.size()});
        seq.tokens.insert(seq.tokens.end(), wrapped.begin(), wrapped.end());
    }
    return seq;
}

std::vector<SegmentSpec> parse_sequence(const std::vector<TokenId>& tokens,
                                        const Vocabulary& vocab) {
    std::vector<SegmentSpec> segments;
    std::size_t i = 0;
    const std::size_t n = tokens.size();
    auto bot_modality = [&](TokenId id) -> const Modality* {
        static const Modality kAll[] = {Modality::Text, Modality::Image, Modality::Speech};
        for (const Modality& m : kAll)
            if (id == vocab.bot(m)) return &m;
        return nullptr;
    };
    while (i < n) {
        const TokenId id = tokens[i];
        if (id == vocab.pad() || id == vocab.bos_speech_response()) {
            ++i;
            continue;
        }
        const Modality* m = bot_modality(id);
        if (m == nullptr) {
            if (id == vocab.mask())
                throw ParseError("MASK token at position " + std::to_string(i));
            if (vocab.is_special(id))
                throw ParseError("stray delimiter at position " + std::to_string(i));
            throw ModalityViolation("modality token outside any segment at position " +
                                    std::to_string(i));
        }
        const std::size_t start = i + 1;
        std::size_t j = start;
        const TokenId eot = vocab.eot(*m);
        while (j < n && tokens[j] != eot) {
            if (!vocab.in_range(tokens[j], *m)) {
                if (vocab.is_special(tokens[j]))
                    throw ParseError("delimiter inside open " + std::string(modality_name(*m)) +
                                     " segment at position " + std::to_string(j));
                throw ModalityViolation("token outside enclosing segment range at position " +
                                        std::to_string(j));
            }
            ++j;
        }
        if (j == n) throw ParseError("unbalanced delimiters: missing EOT");
        if (j == start) throw ParseError("empty segment at position " + std::to_string(i));
        segments.push_back({*m, start, j - start});
        i = j + 1;
    }
    return segments;
}

}  // namespace omnidiff
