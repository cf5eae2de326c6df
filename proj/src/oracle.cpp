#include "omnidiff/oracle.hpp"

#include <cmath>

#include "omnidiff/errors.hpp"

namespace omnidiff {

namespace {
// Finite stand-in for log 0 / log 1 one-hot logits; large enough that softmax
// is numerically one-hot, small enough to stay finite in float32.
constexpr double kNegInf = -1e4;
}  // namespace

void OracleModel::validate() const {
    if (support.size() != probs.size() || support.empty())
        throw ConfigError("oracle support/probability size mismatch");
    const std::size_t len = support[0].size();
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
        if (support[i].size() != len)
            throw ConfigError("oracle support sequences must share one length");
        if (probs[i] < 0.0) throw ConfigError("negative probability in oracle");
        total += probs[i];
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ConfigError("oracle probabilities do not sum to 1");
}

Eigen::MatrixXd oracle_posterior(const OracleModel& oracle, const std::vector<TokenId>& tokens,
                                 TokenId mask_id) {
    const std::size_t L = tokens.size();
    if (L != oracle.sequence_length())
        throw ShapeError("evidence length does not match oracle support");

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L),
                                                   oracle.vocab_size);
    double evidence_mass = 0.0;
    for (std::size_t s = 0; s < oracle.support.size(); ++s) {
        const auto& seq = oracle.support[s];
        bool consistent = true;
        for (std::size_t i = 0; i < L; ++i) {
            if (tokens[i] != mask_id && tokens[i] != seq[i]) {
                consistent = false;
                break;
            }
        }
        if (!consistent) continue;
        evidence_mass += oracle.probs[s];
        for (std::size_t i = 0; i < L; ++i)
            counts(static_cast<Eigen::Index>(i), seq[i]) += oracle.probs[s];
    }
    if (evidence_mass <= 0.0)
        throw ZeroProbabilityEvidence("evidence inconsistent with every oracle support element");

    Eigen::MatrixXd logits(static_cast<Eigen::Index>(L), oracle.vocab_size);
    for (std::size_t i = 0; i < L; ++i) {
        if (tokens[i] != mask_id) {
            logits.row(static_cast<Eigen::Index>(i)).setConstant(kNegInf);
            logits(static_cast<Eigen::Index>(i), tokens[i]) = 0.0;
            continue;
        }
        for (int v = 0; v < oracle.vocab_size; ++v) {
            const double p = counts(static_cast<Eigen::Index>(i), v) / evidence_mass;
            logits(static_cast<Eigen::Index>(i), v) = p > 0.0 ? std::log(p) : kNegInf;
        }
    }
    return logits;
}

}  // namespace omnidiff
