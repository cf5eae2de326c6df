#include "omnidiff/corpus.hpp"

#include <cstring>
#include <fstream>

#include "omnidiff/errors.hpp"

namespace omnidiff {

namespace {

constexpr char kMagic[8] = {'O', 'D', 'C', 'O', 'R', 'P', '0', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError("truncated corpus file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u32(out, static_cast<std::uint32_t>(bits));
    put_u32(out, static_cast<std::uint32_t>(bits >> 32));
}

double get_f64(std::istream& in) {
    const std::uint64_t lo = get_u32(in);
    const std::uint64_t hi = get_u32(in);
    const std::uint64_t bits = lo | (hi << 32);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void put_parts(std::ostream& out, const std::vector<SegmentPart>& parts) {
    put_u32(out, static_cast<std::uint32_t>(parts.size()));
    for (const auto& [modality, tokens] : parts) {
        out.put(static_cast<char>(modality));
        put_u32(out, static_cast<std::uint32_t>(tokens.size()));
        for (TokenId id : tokens) put_u32(out, static_cast<std::uint32_t>(id));
    }
}

std::vector<SegmentPart> get_parts(std::istream& in) {
    std::vector<SegmentPart> parts(get_u32(in));
    for (auto& [modality, tokens] : parts) {
        const int m = in.get();
        if (m < 0 || m > 2) throw IoError("bad modality byte in corpus");
        modality = static_cast<Modality>(m);
        tokens.resize(get_u32(in));
        for (auto& id : tokens) id = static_cast<TokenId>(get_u32(in));
    }
    return parts;
}

}  // namespace

void write_corpus(const std::string& path, const ToyWorldConfig& world,
                  const std::vector<PairedSample>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open corpus for writing: " + path);
    out.write(kMagic, 8);
    put_u32(out, static_cast<std::uint32_t>(world.alphabet));
    put_u32(out, static_cast<std::uint32_t>(world.text_len_min));
    put_u32(out, static_cast<std::uint32_t>(world.text_len_max));
    put_u32(out, static_cast<std::uint32_t>(world.grid_side));
    put_u32(out, static_cast<std::uint32_t>(world.expand_min));
    put_u32(out, static_cast<std::uint32_t>(world.expand_max));
    put_u32(out, static_cast<std::uint32_t>(world.seed));
    put_u32(out, static_cast<std::uint32_t>(world.seed >> 32));
    for (double p : world.init_probs) put_f64(out, p);
    for (const auto& row : world.transition)
        for (double p : row) put_f64(out, p);
    put_u32(out, static_cast<std::uint32_t>(samples.size()));
    for (const auto& s : samples) {
        out.put(static_cast<char>(s.task));
        put_parts(out, s.prompt);
        put_parts(out, s.response);
    }
    if (!out) throw IoError("failed writing corpus: " + path);
}

std::pair<ToyWorldConfig, std::vector<PairedSample>> read_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) throw IoError("bad corpus magic");
    ToyWorldConfig world;
    world.alphabet = static_cast<int>(get_u32(in));
    world.text_len_min = static_cast<int>(get_u32(in));
    world.text_len_max = static_cast<int>(get_u32(in));
    world.grid_side = static_cast<int>(get_u32(in));
    world.expand_min = static_cast<int>(get_u32(in));
    world.expand_max = static_cast<int>(get_u32(in));
    const std::uint64_t lo = get_u32(in);
    const std::uint64_t hi = get_u32(in);
    world.seed = lo | (hi << 32);
    world.init_probs.resize(static_cast<std::size_t>(world.alphabet));
    for (auto& p : world.init_probs) p = get_f64(in);
    world.transition.assign(static_cast<std::size_t>(world.alphabet),
                            std::vector<double>(static_cast<std::size_t>(world.alphabet)));
    for (auto& row : world.transition)
        for (auto& p : row) p = get_f64(in);
    world.validate();
    std::vector<PairedSample> samples(get_u32(in));
    for (auto& s : samples) {
        const int tag = in.get();
        if (tag < 0 || tag > static_cast<int>(TaskTag::SVQA))
            throw IoError("bad task tag in corpus");
        s.task = static_cast<TaskTag>(tag);
        s.prompt = get_parts(in);
        s.response = get_parts(in);
    }
    return {world, samples};
}

}  // namespace omnidiff
