#include "omnidiff/vocab.hpp"

#include <sstream>

#include "omnidiff/errors.hpp"

namespace omnidiff {

const char* modality_name(Modality m) {
    switch (m) {
        case Modality::Text: return "text";
        case Modality::Image: return "image";
        case Modality::Speech: return "speech";
    }
    return "?";
}

TokenId Vocabulary::bot(Modality m) const {
    switch (m) {
        case Modality::Text: return 2;
        case Modality::Image: return 4;
        case Modality::Speech: return 6;
    }
    throw DomainError("unknown modality");
}

TokenId Vocabulary::eot(Modality m) const { return bot(m) + 1; }

const IdRange& Vocabulary::range(Modality m) const {
    switch (m) {
        case Modality::Text: return text_;
        case Modality::Image: return image_;
        case Modality::Speech: return speech_;
    }
    throw DomainError("unknown modality");
}

Vocabulary build_vocabulary(const ModalitySizes& sizes) {
    if (sizes.text < 1 || sizes.image < 1 || sizes.speech < 1)
        throw ConfigError("modality sizes must all be >= 1");
    Vocabulary v;
    TokenId next = Vocabulary::kNumSpecials;
    v.text_ = {next, next + sizes.text};
    next = v.text_.end;
    v.image_ = {next, next + sizes.image};
    next = v.image_.end;
    v.speech_ = {next, next + sizes.speech};
    v.total_size_ = v.speech_.end;
    return v;
}

namespace {
constexpr const char* kManifestVersion = "omnidiff-vocab-v1";

const char* kSpecialNames[Vocabulary::kNumSpecials] = {
    "MASK",       "PAD",        "BOT_text",   "EOT_text",          "BOT_image",
    "EOT_image",  "BOT_speech", "EOT_speech", "BOS_SPEECH_RESPONSE"};
}  // namespace

std::string Vocabulary::to_manifest() const {
    std::ostringstream out;
    out << kManifestVersion << "\n";
    for (TokenId id = 0; id < kNumSpecials; ++id)
        out << kSpecialNames[id] << "=" << id << "\n";
    out << "text=" << text_.begin << ".." << text_.end << "\n";
    out << "image=" << image_.begin << ".." << image_.end << "\n";
    out << "speech=" << speech_.begin << ".." << speech_.end << "\n";
    return out.str();
}

Vocabulary Vocabulary::from_manifest(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != kManifestVersion)
        throw ParseError("bad vocabulary manifest version line");
    for (TokenId id = 0; id < kNumSpecials; ++id) {
        if (!std::getline(in, line))
            throw ParseError("truncated vocabulary manifest");
        const std::string expect = std::string(kSpecialNames[id]) + "=" + std::to_string(id);
        if (line != expect)
            throw ParseError("unexpected manifest line: " + line);
    }
    auto read_range = [&](const char* name) {
        if (!std::getline(in, line)) throw ParseError("truncated vocabulary manifest");
        const std::string prefix = std::string(name) + "=";
        if (line.rfind(prefix, 0) != 0) throw ParseError("unexpected manifest line: " + line);
        const auto dots = line.find("..");
        if (dots == std::string::npos) throw ParseError("malformed range: " + line);
        IdRange r;
        r.begin = static_cast<TokenId>(std::stol(line.substr(prefix.size(), dots - prefix.size())));
        r.end = static_cast<TokenId>(std::stol(line.substr(dots + 2)));
        return r;
    };
    Vocabulary v;
    v.text_ = read_range("text");
    v.image_ = read_range("image");
    v.speech_ = read_range("speech");
    v.total_size_ = v.speech_.end;
    if (v.text_.begin != kNumSpecials || v.image_.begin != v.text_.end ||
        v.speech_.begin != v.image_.end || v.text_.size() < 1 || v.image_.size() < 1 ||
        v.speech_.size() < 1)
        throw ParseError("vocabulary manifest violates layout invariants");
    return v;
}

std::uint64_t Vocabulary::manifest_hash() const {
    // FNV-1a over the manifest text.
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : to_manifest()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace omnidiff
