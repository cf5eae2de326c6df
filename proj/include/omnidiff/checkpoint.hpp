#pragma once

#include <string>

#include "omnidiff/net.hpp"
#include "omnidiff/vocab.hpp"

namespace omnidiff {

// Versioned binary checkpoint: header {magic, version, hyperparams, vocabulary
// manifest hash} followed by named float32 tensors in declared order,
// little-endian. write -> read -> write is byte-identical.
void write_checkpoint(const std::string& path, const NetParams<float>& params,
                      const Vocabulary& vocab);

NetParams<float> read_checkpoint(const std::string& path, const Vocabulary& vocab);

}  // namespace omnidiff
