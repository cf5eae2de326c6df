#include <doctest.h>

#include "omnidiff/errors.hpp"
#include "omnidiff/rng.hpp"
#include "omnidiff/sequence.hpp"
#include "omnidiff/vocab.hpp"

using namespace omnidiff;

TEST_CASE("build_vocabulary assigns contiguous disjoint ranges") {
    const auto v = build_vocabulary({8, 16, 8});
    CHECK(v.total_size() == 41);
    CHECK(v.text_range().begin == 9);
    CHECK(v.text_range().end == 17);
    CHECK(v.image_range().begin == 17);
    CHECK(v.speech_range().end == 41);
    // ranges never contain the specials
    for (TokenId id = 0; id < Vocabulary::kNumSpecials; ++id) {
        CHECK_FALSE(v.in_range(id, Modality::Text));
        CHECK_FALSE(v.in_range(id, Modality::Image));
        CHECK_FALSE(v.in_range(id, Modality::Speech));
    }
}

TEST_CASE("build_vocabulary minimal and invalid sizes") {
    const auto v = build_vocabulary({1, 1, 1});
    CHECK(v.text_range().size() == 1);
    CHECK(v.image_range().size() == 1);
    CHECK(v.speech_range().size() == 1);
    CHECK_THROWS_AS(build_vocabulary({0, 4, 4}), ConfigError);
    CHECK_THROWS_AS(build_vocabulary({4, -1, 4}), ConfigError);
}

TEST_CASE("wrap_segment brackets tokens with BOT/EOT") {
    const auto v = build_vocabulary({4, 4, 4});
    const TokenId t1 = v.text_range().begin, t2 = t1 + 1;
    const auto wrapped = wrap_segment({t1, t2}, Modality::Text, v);
    CHECK(wrapped == std::vector<TokenId>{v.bot(Modality::Text), t1, t2, v.eot(Modality::Text)});

    const auto empty = wrap_segment({}, Modality::Image, v);
    CHECK(empty == std::vector<TokenId>{v.bot(Modality::Image), v.eot(Modality::Image)});

    CHECK_THROWS_AS(wrap_segment({v.image_range().begin}, Modality::Text, v),
                    ModalityViolation);
}

TEST_CASE("assemble_sequence records segments and total length") {
    const auto v = build_vocabulary({4, 4, 4});
    const TokenId a = v.text_range().begin;
    const TokenId b = v.image_range().begin, c = b + 1;
    const auto seq = assemble_sequence({{Modality::Text, {a}}, {Modality::Image, {b, c}}}, v);
    CHECK(seq.length() == 7);
    REQUIRE(seq.segments.size() == 2);
    CHECK(seq.segments[0] == SegmentSpec{Modality::Text, 1, 1});
    CHECK(seq.segments[1] == SegmentSpec{Modality::Image, 4, 2});
    CHECK_THROWS_AS(assemble_sequence({}, v), DomainError);
}

TEST_CASE("parse_sequence round-trips and rejects malformed input") {
    const auto v = build_vocabulary({4, 4, 4});
    const TokenId t = v.text_range().begin;
    const TokenId img = v.image_range().begin;
    const auto seq = assemble_sequence(
        {{Modality::Text, {t, t + 1}}, {Modality::Speech, {v.speech_range().begin}}}, v);
    CHECK(parse_sequence(seq.tokens, v) == seq.segments);

    CHECK_THROWS_AS(parse_sequence({v.bot(Modality::Text), t}, v), ParseError);
    CHECK_THROWS_AS(parse_sequence({v.bot(Modality::Text), img, v.eot(Modality::Text)}, v),
                    ModalityViolation);
    // PAD and the speech-response marker are legal between segments
    std::vector<TokenId> padded = seq.tokens;
    padded.push_back(v.pad());
    padded.push_back(v.bos_speech_response());
    CHECK(parse_sequence(padded, v) == seq.segments);
}

TEST_CASE("property: parse(assemble(parts)) recovers segments for random parts") {
    const auto v = build_vocabulary({6, 8, 6});
    Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<SegmentPart> parts;
        const int n = static_cast<int>(rng.uniform_int(1, 4));
        std::size_t expect_len = 0;
        for (int i = 0; i < n; ++i) {
            const auto m = static_cast<Modality>(rng.uniform_int(0, 2));
            std::vector<TokenId> toks;
            const int len = static_cast<int>(rng.uniform_int(1, 5));
            for (int j = 0; j < len; ++j)
                toks.push_back(v.range(m).begin +
                               static_cast<TokenId>(rng.uniform_int(0, v.range(m).size() - 1)));
            expect_len += toks.size() + 2;
            parts.emplace_back(m, std::move(toks));
        }
        const auto seq = assemble_sequence(parts, v);
        CHECK(seq.length() == expect_len);
        CHECK(parse_sequence(seq.tokens, v) == seq.segments);
        // no MASK or PAD in a freshly assembled clean sequence
        for (TokenId id : seq.tokens) {
            CHECK(id != v.mask());
            CHECK(id != v.pad());
        }
    }
}

TEST_CASE("vocabulary manifest round-trips bit-exactly") {
    const auto v = build_vocabulary({5, 12, 7});
    const auto manifest = v.to_manifest();
    const auto back = Vocabulary::from_manifest(manifest);
    CHECK(back == v);
    CHECK(back.to_manifest() == manifest);
    CHECK(back.manifest_hash() == v.manifest_hash());
    CHECK_THROWS_AS(Vocabulary::from_manifest("garbage"), ParseError);
}
