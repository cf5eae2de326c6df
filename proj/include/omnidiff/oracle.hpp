#pragma once

#include <Eigen/Dense>
#include <vector>

#include "omnidiff/vocab.hpp"

namespace omnidiff {

// Explicit joint distribution over clean sequences of one fixed length.
// Serves as an exact denoiser for tests: posteriors are computed by summing
// the joint over every support element consistent with the evidence.
struct OracleModel {
    std::vector<std::vector<TokenId>> support;
    std::vector<double> probs;
    int vocab_size = 0;

    std::size_t sequence_length() const { return support.empty() ? 0 : support[0].size(); }
    void validate() const;  // probs nonnegative, sum to 1, uniform lengths
};

// Exact log p(x0^i | unmasked evidence) for every masked position i; one-hot
// style logits (log 1 vs -inf clamped) at observed positions. `mask_id` marks
// unknown positions in `tokens`.
Eigen::MatrixXd oracle_posterior(const OracleModel& oracle, const std::vector<TokenId>& tokens,
                                 TokenId mask_id);

}  // namespace omnidiff
