#pragma once

#include <cstdint>
#include <string>

namespace omnidiff {

using TokenId = std::int32_t;

enum class Modality { Text, Image, Speech };

const char* modality_name(Modality m);

// Half-open id interval [begin, end).
struct IdRange {
    TokenId begin = 0;
    TokenId end = 0;

    TokenId size() const { return end - begin; }
    bool contains(TokenId id) const { return id >= begin && id < end; }

    friend bool operator==(const IdRange&, const IdRange&) = default;
};

struct ModalitySizes {
    TokenId text = 0;
    TokenId image = 0;
    TokenId speech = 0;
};

// Shared discrete token space: special tokens first, then contiguous text,
// image and speech ranges. Immutable after construction.
class Vocabulary {
public:
    static constexpr int kNumSpecials = 9;

    // Special token ids (specials-first layout).
    TokenId mask() const { return 0; }
    TokenId pad() const { return 1; }
    TokenId bot(Modality m) const;
    TokenId eot(Modality m) const;
    TokenId bos_speech_response() const { return 8; }

    const IdRange& range(Modality m) const;
    const IdRange& text_range() const { return text_; }
    const IdRange& image_range() const { return image_; }
    const IdRange& speech_range() const { return speech_; }

    TokenId total_size() const { return total_size_; }

    bool is_special(TokenId id) const { return id >= 0 && id < kNumSpecials; }
    bool in_range(TokenId id, Modality m) const { return range(m).contains(id); }

    // Versioned text manifest, bit-exact round-trip.
    std::string to_manifest() const;
    static Vocabulary from_manifest(const std::string& text);
    std::uint64_t manifest_hash() const;

    friend Vocabulary build_vocabulary(const ModalitySizes& sizes);
    friend bool operator==(const Vocabulary&, const Vocabulary&) = default;

private:
    Vocabulary() = default;

    IdRange text_, image_, speech_;
    TokenId total_size_ = 0;
};

// Deterministic id assignment: specials first, then text, image, speech.
Vocabulary build_vocabulary(const ModalitySizes& sizes);

}  // namespace omnidiff
