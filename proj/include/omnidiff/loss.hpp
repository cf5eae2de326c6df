#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "omnidiff/errors.hpp"
#include "omnidiff/vocab.hpp"

namespace omnidiff {

struct LossReport {
    double total = 0.0;
    std::vector<std::pair<std::size_t, double>> per_position;
    std::size_t masked_count = 0;
    std::size_t pad_masked_count = 0;
};

enum class LossNorm { Mean, Sum };

// Cross-entropy at masked positions only. Returns the report and writes the
// gradient w.r.t. the logits into `dlogits` (zero rows at unmasked positions).
template <typename Mat>
LossReport masked_ce_loss(const Mat& logits, const std::vector<TokenId>& targets,
                          const std::vector<std::size_t>& mask_positions,
                          const Vocabulary& vocab, Mat* dlogits = nullptr,
                          LossNorm norm = LossNorm::Mean) {
    using S = typename Mat::Scalar;
    if (static_cast<std::size_t>(logits.rows()) != targets.size())
        throw ShapeError("logits rows do not match target length");
    if (mask_positions.empty()) throw DomainError("degenerate batch: no masked positions");

    const std::size_t m = mask_positions.size();
    const double inv = (norm == LossNorm::Mean) ? 1.0 / static_cast<double>(m) : 1.0;
    if (dlogits) {
        dlogits->resize(logits.rows(), logits.cols());
        dlogits->setZero();
    }

    LossReport report;
    report.masked_count = m;
    for (std::size_t i : mask_positions) {
        if (i >= targets.size()) throw ShapeError("mask position out of bounds");
        const TokenId target = targets[i];
        if (target < 0 || target >= logits.cols())
            throw VocabularyError("target id outside vocabulary");
        const auto row = logits.row(static_cast<Eigen::Index>(i));
        const S mx = row.maxCoeff();
        Eigen::Matrix<S, 1, Eigen::Dynamic> ex = (row.array() - mx).exp();
        const S z = ex.sum();
        const double logp =
            static_cast<double>(row(target)) - static_cast<double>(mx) - std::log(static_cast<double>(z));
        report.per_position.emplace_back(i, -logp);
        if (target == vocab.pad()) ++report.pad_masked_count;
        if (dlogits) {
            dlogits->row(static_cast<Eigen::Index>(i)) = (ex / z) * static_cast<S>(inv);
            (*dlogits)(static_cast<Eigen::Index>(i), target) -= static_cast<S>(inv);
        }
    }
    double total = 0.0;
    for (const auto& [idx, v] : report.per_position) total += v;
    report.total = total * inv;
    return report;
}

}  // namespace omnidiff
