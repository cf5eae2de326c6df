#pragma once

#include <string>
#include <vector>

#include "omnidiff/toyworld.hpp"

namespace omnidiff {

// Length-prefixed binary corpus: serialized world config, then one record per
// sample {task tag, prompt parts, response parts}. Byte-exact round-trip.
void write_corpus(const std::string& path, const ToyWorldConfig& world,
                  const std::vector<PairedSample>& samples);

std::pair<ToyWorldConfig, std::vector<PairedSample>> read_corpus(const std::string& path);

}  // namespace omnidiff
