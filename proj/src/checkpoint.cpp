#include "omnidiff/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "omnidiff/errors.hpp"

namespace omnidiff {

namespace {

constexpr char kMagic[4] = {'O', 'D', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    write_u32(out, static_cast<std::uint32_t>(v));
    write_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw IoError("truncated checkpoint");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint64_t read_u64(std::istream& in) {
    const std::uint64_t lo = read_u32(in);
    const std::uint64_t hi = read_u32(in);
    return lo | (hi << 32);
}

}  // namespace

void write_checkpoint(const std::string& path, const NetParams<float>& params,
                      const Vocabulary& vocab) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out.write(kMagic, 4);
    write_u32(out, kVersion);
    write_u32(out, static_cast<std::uint32_t>(params.hyper.layers));
    write_u32(out, static_cast<std::uint32_t>(params.hyper.d));
    write_u32(out, static_cast<std::uint32_t>(params.hyper.heads));
    write_u32(out, static_cast<std::uint32_t>(params.hyper.vocab_size));
    write_u32(out, static_cast<std::uint32_t>(params.hyper.max_len));
    write_u64(out, vocab.manifest_hash());

    auto tensors = tensor_list(const_cast<NetParams<float>&>(params));
    write_u32(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, mat] : tensors) {
        write_u32(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_u32(out, static_cast<std::uint32_t>(mat->rows()));
        write_u32(out, static_cast<std::uint32_t>(mat->cols()));
        for (Eigen::Index j = 0; j < mat->cols(); ++j) {
            for (Eigen::Index i = 0; i < mat->rows(); ++i) {
                const float v = (*mat)(i, j);
                std::uint32_t bits;
                std::memcpy(&bits, &v, 4);
                write_u32(out, bits);
            }
        }
    }
    if (!out) throw IoError("failed writing checkpoint: " + path);
}

NetParams<float> read_checkpoint(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad checkpoint magic");
    if (read_u32(in) != kVersion) throw IoError("unsupported checkpoint version");
    NetHyper hyper;
    hyper.layers = static_cast<int>(read_u32(in));
    hyper.d = static_cast<int>(read_u32(in));
    hyper.heads = static_cast<int>(read_u32(in));
    hyper.vocab_size = static_cast<int>(read_u32(in));
    hyper.max_len = static_cast<int>(read_u32(in));
    const std::uint64_t hash = read_u64(in);
    if (hash != vocab.manifest_hash())
        throw IoError("checkpoint vocabulary hash does not match the loaded manifest");

    Rng tmp(0);
    NetParams<float> params = init_params<float>(hyper, tmp);
    auto tensors = tensor_list(params);
    const std::uint32_t count = read_u32(in);
    if (count != tensors.size()) throw IoError("checkpoint tensor count mismatch");
    for (auto& [name, mat] : tensors) {
        const std::uint32_t name_len = read_u32(in);
        std::string got(name_len, '\0');
        in.read(got.data(), name_len);
        if (!in || got != name) throw IoError("checkpoint tensor order mismatch at " + name);
        const auto rows = static_cast<Eigen::Index>(read_u32(in));
        const auto cols = static_cast<Eigen::Index>(read_u32(in));
        if (rows != mat->rows() || cols != mat->cols())
            throw IoError("checkpoint tensor shape mismatch at " + name);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < rows; ++i) {
                const std::uint32_t bits = read_u32(in);
                float v;
                std::memcpy(&v, &bits, 4);
                (*mat)(i, j) = v;
            }
        }
    }
    return params;
}

}  // namespace omnidiff
