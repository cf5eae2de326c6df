#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "omnidiff/errors.hpp"
#include "omnidiff/rng.hpp"
#include "omnidiff/vocab.hpp"

namespace omnidiff {

// Mask-token predictor p_theta(x0 | x_t): a small bidirectional transformer
// (pre-LN, learned absolute position embeddings, full attention, no causal
// mask). Templated on the scalar type so training runs in float while
// gradient checks run in double.

struct NetHyper {
    int layers = 2;
    int d = 64;
    int heads = 4;
    int vocab_size = 0;
    int max_len = 512;

    friend bool operator==(const NetHyper&, const NetHyper&) = default;
};

template <typename S>
struct NetParams {
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

    struct Layer {
        Mat ln1_g, ln1_b;        // d x 1
        Mat wq, wk, wv, wo;      // d x d
        Mat bq, bk, bv, bo;      // d x 1
        Mat ln2_g, ln2_b;        // d x 1
        Mat w1;                  // d x 4d
        Mat b1;                  // 4d x 1
        Mat w2;                  // 4d x d
        Mat b2;                  // d x 1
    };

    NetHyper hyper;
    Mat embed;                   // V x d
    Mat pos;                     // max_len x d
    std::vector<Layer> layers;
    Mat lnf_g, lnf_b;            // d x 1
    Mat wout;                    // d x V
    Mat bout;                    // V x 1
};

// Named pointers to every tensor, in a fixed declared order. Drives the
// optimizer, checkpoints and gradient checks.
template <typename S>
std::vector<std::pair<std::string, typename NetParams<S>::Mat*>> tensor_list(NetParams<S>& p) {
    std::vector<std::pair<std::string, typename NetParams<S>::Mat*>> out;
    out.emplace_back("embed", &p.embed);
    out.emplace_back("pos", &p.pos);
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        auto& lay = p.layers[l];
        const std::string pre = "layer" + std::to_string(l) + ".";
        out.emplace_back(pre + "ln1_g", &lay.ln1_g);
        out.emplace_back(pre + "ln1_b", &lay.ln1_b);
        out.emplace_back(pre + "wq", &lay.wq);
        out.emplace_back(pre + "bq", &lay.bq);
        out.emplace_back(pre + "wk", &lay.wk);
        out.emplace_back(pre + "bk", &lay.bk);
        out.emplace_back(pre + "wv", &lay.wv);
        out.emplace_back(pre + "bv", &lay.bv);
        out.emplace_back(pre + "wo", &lay.wo);
        out.emplace_back(pre + "bo", &lay.bo);
        out.emplace_back(pre + "ln2_g", &lay.ln2_g);
        out.emplace_back(pre + "ln2_b", &lay.ln2_b);
        out.emplace_back(pre + "w1", &lay.w1);
        out.emplace_back(pre + "b1", &lay.b1);
        out.emplace_back(pre + "w2", &lay.w2);
        out.emplace_back(pre + "b2", &lay.b2);
    }
    out.emplace_back("lnf_g", &p.lnf_g);
    out.emplace_back("lnf_b", &p.lnf_b);
    out.emplace_back("wout", &p.wout);
    out.emplace_back("bout", &p.bout);
    return out;
}

template <typename S>
NetParams<S> init_params(const NetHyper& hyper, Rng& rng) {
    if (hyper.d % hyper.heads != 0)
        throw ConfigError("model width must be divisible by head count");
    if (hyper.layers < 1 || hyper.vocab_size < 1 || hyper.max_len < 1)
        throw ConfigError("invalid network hyperparameters");
    using Mat = typename NetParams<S>::Mat;
    const S sigma = static_cast<S>(0.02);
    auto randn = [&](int r, int c) {
        Mat m(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) m(i, j) = sigma * static_cast<S>(rng.normal());
        return m;
    };
    NetParams<S> p;
    p.hyper = hyper;
    const int d = hyper.d;
    p.embed = randn(hyper.vocab_size, d);
    p.pos = randn(hyper.max_len, d);
    p.layers.resize(hyper.layers);
    for (auto& lay : p.layers) {
        lay.ln1_g = Mat::Ones(d, 1);
        lay.ln1_b = Mat::Zero(d, 1);
        lay.wq = randn(d, d);
        lay.wk = randn(d, d);
        lay.wv = randn(d, d);
        lay.wo = randn(d, d);
        lay.bq = Mat::Zero(d, 1);
        lay.bk = Mat::Zero(d, 1);
        lay.bv = Mat::Zero(d, 1);
        lay.bo = Mat::Zero(d, 1);
        lay.ln2_g = Mat::Ones(d, 1);
        lay.ln2_b = Mat::Zero(d, 1);
        lay.w1 = randn(d, 4 * d);
        lay.b1 = Mat::Zero(4 * d, 1);
        lay.w2 = randn(4 * d, d);
        lay.b2 = Mat::Zero(d, 1);
    }
    p.lnf_g = Mat::Ones(d, 1);
    p.lnf_b = Mat::Zero(d, 1);
    p.wout = randn(d, hyper.vocab_size);
    p.bout = Mat::Zero(hyper.vocab_size, 1);
    return p;
}

template <typename S>
NetParams<S> zero_like(const NetParams<S>& p) {
    NetParams<S> z = p;
    for (auto& [name, t] : tensor_list(z)) t->setZero();
    return z;
}

namespace detail {

constexpr double kLnEps = 1e-5;

template <typename Mat>
struct LnCache {
    Mat xhat;                                   // L x d
    Eigen::Matrix<typename Mat::Scalar, Eigen::Dynamic, 1> inv_std;  // L
};

template <typename Mat>
Mat layernorm_fwd(const Mat& x, const Mat& g, const Mat& b, LnCache<Mat>& cache) {
    using S = typename Mat::Scalar;
    const Eigen::Index L = x.rows(), d = x.cols();
    cache.xhat.resize(L, d);
    cache.inv_std.resize(L);
    Mat y(L, d);
    for (Eigen::Index i = 0; i < L; ++i) {
        const S mu = x.row(i).mean();
        const S var = (x.row(i).array() - mu).square().mean();
        const S inv = S(1) / std::sqrt(var + static_cast<S>(kLnEps));
        cache.inv_std(i) = inv;
        cache.xhat.row(i) = ((x.row(i).array() - mu) * inv).matrix();
        y.row(i) = cache.xhat.row(i).cwiseProduct(g.transpose()) + b.transpose();
    }
    return y;
}

template <typename Mat>
Mat layernorm_bwd(const Mat& dy, const Mat& g, const LnCache<Mat>& cache, Mat& dg, Mat& db) {
    using S = typename Mat::Scalar;
    const Eigen::Index L = dy.rows(), d = dy.cols();
    Mat dx(L, d);
    for (Eigen::Index i = 0; i < L; ++i) {
        dg.col(0) += dy.row(i).cwiseProduct(cache.xhat.row(i)).transpose();
        db.col(0) += dy.row(i).transpose();
        const Eigen::Matrix<S, 1, Eigen::Dynamic> dxhat =
            dy.row(i).cwiseProduct(g.transpose());
        const S m1 = dxhat.mean();
        const S m2 = dxhat.cwiseProduct(cache.xhat.row(i)).mean();
        dx.row(i) =
            ((dxhat.array() - m1 - cache.xhat.row(i).array() * m2) * cache.inv_std(i))
                .matrix();
    }
    return dx;
}

template <typename S>
S gelu(S x) {
    const S c = static_cast<S>(0.7978845608028654);  // sqrt(2/pi)
    const S u = c * (x + static_cast<S>(0.044715) * x * x * x);
    return static_cast<S>(0.5) * x * (S(1) + std::tanh(u));
}

template <typename S>
S gelu_grad(S x) {
    const S c = static_cast<S>(0.7978845608028654);
    const S u = c * (x + static_cast<S>(0.044715) * x * x * x);
    const S th = std::tanh(u);
    const S du = c * (S(1) + static_cast<S>(0.134145) * x * x);
    return static_cast<S>(0.5) * (S(1) + th) +
           static_cast<S>(0.5) * x * (S(1) - th * th) * du;
}

}  // namespace detail

template <typename S>
struct ForwardCache {
    using Mat = typename NetParams<S>::Mat;

    struct LayerCache {
        Mat x_in;                         // residual stream entering the block
        detail::LnCache<Mat> ln1;
        Mat q, k, v;                      // L x d
        std::vector<Mat> attn;            // per head, L x L softmax rows
        Mat attn_concat;                  // L x d, before wo
        Mat x_mid;                        // after attention residual
        detail::LnCache<Mat> ln2;
        Mat ln2_out;                      // L x d
        Mat h_pre;                        // L x 4d pre-activation
        Mat h_act;                        // L x 4d gelu output
    };

    std::vector<TokenId> tokens;
    std::vector<LayerCache> layers;
    Mat x_final;                          // before final LN
    detail::LnCache<Mat> lnf;
    Mat lnf_out;
};

// Full bidirectional forward pass; logits for every position.
template <typename S>
typename NetParams<S>::Mat denoiser_forward(const NetParams<S>& p,
                                            const std::vector<TokenId>& tokens,
                                            ForwardCache<S>* cache = nullptr) {
    using Mat = typename NetParams<S>::Mat;
    const Eigen::Index L = static_cast<Eigen::Index>(tokens.size());
    if (L < 1) throw DomainError("empty input sequence");
    if (L > p.hyper.max_len) throw DomainError("sequence longer than max_len");
    for (TokenId id : tokens)
        if (id < 0 || id >= p.hyper.vocab_size)
            throw VocabularyError("token id " + std::to_string(id) + " outside vocabulary");

    const int d = p.hyper.d;
    const int heads = p.hyper.heads;
    const int dk = d / heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dk));

    Mat x(L, d);
    for (Eigen::Index i = 0; i < L; ++i)
        x.row(i) = p.embed.row(tokens[i]) + p.pos.row(i);

    if (cache) {
        cache->tokens = tokens;
        cache->layers.resize(p.layers.size());
    }

    detail::LnCache<Mat> ln_tmp;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& lay = p.layers[l];
        auto* lc = cache ? &cache->layers[l] : nullptr;
        if (lc) lc->x_in = x;

        Mat a = detail::layernorm_fwd(x, lay.ln1_g, lay.ln1_b, lc ? lc->ln1 : ln_tmp);
        Mat q = (a * lay.wq).rowwise() + lay.bq.col(0).transpose();
        Mat k = (a * lay.wk).rowwise() + lay.bk.col(0).transpose();
        Mat v = (a * lay.wv).rowwise() + lay.bv.col(0).transpose();

        Mat concat(L, d);
        std::vector<Mat> attn_save;
        for (int h = 0; h < heads; ++h) {
            Mat scores = q.middleCols(h * dk, dk) * k.middleCols(h * dk, dk).transpose() * scale;
            for (Eigen::Index i = 0; i < L; ++i) {
                const S mx = scores.row(i).maxCoeff();
                scores.row(i) = (scores.row(i).array() - mx).exp();
                scores.row(i) /= scores.row(i).sum();
            }
            concat.middleCols(h * dk, dk) = scores * v.middleCols(h * dk, dk);
            if (lc) attn_save.push_back(std::move(scores));
        }
        Mat attn_out = (concat * lay.wo).rowwise() + lay.bo.col(0).transpose();
        if (lc) {
            lc->q = std::move(q);
            lc->k = std::move(k);
            lc->v = std::move(v);
            lc->attn = std::move(attn_save);
            lc->attn_concat = concat;
        }
        x += attn_out;
        if (lc) lc->x_mid = x;

        Mat b = detail::layernorm_fwd(x, lay.ln2_g, lay.ln2_b, lc ? lc->ln2 : ln_tmp);
        Mat h_pre = (b * lay.w1).rowwise() + lay.b1.col(0).transpose();
        Mat h_act = h_pre.unaryExpr([](S t) { return detail::gelu(t); });
        Mat mlp_out = (h_act * lay.w2).rowwise() + lay.b2.col(0).transpose();
        if (lc) {
            lc->ln2_out = std::move(b);
            lc->h_pre = std::move(h_pre);
            lc->h_act = std::move(h_act);
        }
        x += mlp_out;
    }

    if (cache) cache->x_final = x;
    Mat xf = detail::layernorm_fwd(x, p.lnf_g, p.lnf_b, cache ? cache->lnf : ln_tmp);
    if (cache) cache->lnf_out = xf;
    Mat logits = (xf * p.wout).rowwise() + p.bout.col(0).transpose();
    return logits;
}

// Accumulates parameter gradients from d(loss)/d(logits) into `grads`.
template <typename S>
void denoiser_backward(const NetParams<S>& p, const ForwardCache<S>& cache,
                       const typename NetParams<S>::Mat& dlogits, NetParams<S>& grads) {
    using Mat = typename NetParams<S>::Mat;
    const Eigen::Index L = dlogits.rows();
    const int d = p.hyper.d;
    const int heads = p.hyper.heads;
    const int dk = d / heads;
    const S scale = S(1) / std::sqrt(static_cast<S>(dk));

    grads.wout += cache.lnf_out.transpose() * dlogits;
    grads.bout.col(0) += dlogits.colwise().sum().transpose();
    Mat dxf = dlogits * p.wout.transpose();
    Mat dx = detail::layernorm_bwd(dxf, p.lnf_g, cache.lnf, grads.lnf_g, grads.lnf_b);

    for (std::size_t li = p.layers.size(); li-- > 0;) {
        const auto& lay = p.layers[li];
        const auto& lc = cache.layers[li];
        auto& gl = grads.layers[li];

        // MLP branch
        Mat dmlp = dx;  // residual: dx flows to both branch and input
        gl.w2 += lc.h_act.transpose() * dmlp;
        gl.b2.col(0) += dmlp.colwise().sum().transpose();
        Mat dh_act = dmlp * lay.w2.transpose();
        Mat dh_pre =
            dh_act.cwiseProduct(lc.h_pre.unaryExpr([](S t) { return detail::gelu_grad(t); }));
        gl.w1 += lc.ln2_out.transpose() * dh_pre;
        gl.b1.col(0) += dh_pre.colwise().sum().transpose();
        Mat db = dh_pre * lay.w1.transpose();
        dx += detail::layernorm_bwd(db, lay.ln2_g, lc.ln2, gl.ln2_g, gl.ln2_b);

        // Attention branch
        Mat dattn_out = dx;
        gl.wo += lc.attn_concat.transpose() * dattn_out;
        gl.bo.col(0) += dattn_out.colwise().sum().transpose();
        Mat dconcat = dattn_out * lay.wo.transpose();

        Mat dq = Mat::Zero(L, d), dkm = Mat::Zero(L, d), dv = Mat::Zero(L, d);
        for (int h = 0; h < heads; ++h) {
            const auto& A = lc.attn[h];
            Mat doh = dconcat.middleCols(h * dk, dk);
            Mat dA = doh * lc.v.middleCols(h * dk, dk).transpose();
            dv.middleCols(h * dk, dk) = A.transpose() * doh;
            Mat dS(L, L);
            for (Eigen::Index i = 0; i < L; ++i) {
                const S dot = dA.row(i).cwiseProduct(A.row(i)).sum();
                dS.row(i) = (A.row(i).array() * (dA.row(i).array() - dot)).matrix() * scale;
            }
            dq.middleCols(h * dk, dk) = dS * lc.k.middleCols(h * dk, dk);
            dkm.middleCols(h * dk, dk) = dS.transpose() * lc.q.middleCols(h * dk, dk);
        }
        // Recompute ln1 output from the cache (xhat * g + b).
        Mat a(L, d);
        for (Eigen::Index i = 0; i < L; ++i)
            a.row(i) = lc.ln1.xhat.row(i).cwiseProduct(lay.ln1_g.col(0).transpose()) +
                       lay.ln1_b.col(0).transpose();
        gl.wq += a.transpose() * dq;
        gl.bq.col(0) += dq.colwise().sum().transpose();
        gl.wk += a.transpose() * dkm;
        gl.bk.col(0) += dkm.colwise().sum().transpose();
        gl.wv += a.transpose() * dv;
        gl.bv.col(0) += dv.colwise().sum().transpose();
        Mat da = dq * lay.wq.transpose() + dkm * lay.wk.transpose() + dv * lay.wv.transpose();
        dx += detail::layernorm_bwd(da, lay.ln1_g, lc.ln1, gl.ln1_g, gl.ln1_b);
    }

    for (Eigen::Index i = 0; i < L; ++i) {
        grads.embed.row(cache.tokens[i]) += dx.row(i);
        grads.pos.row(i) += dx.row(i);
    }
}

using NetParamsF = NetParams<float>;
using NetParamsD = NetParams<double>;

// Float <-> double conversion (gradient checks run the same model in double).
template <typename To, typename From>
NetParams<To> cast_params(const NetParams<From>& src) {
    NetParams<To> dst;
    dst.hyper = src.hyper;
    dst.layers.resize(src.layers.size());
    auto s = tensor_list(const_cast<NetParams<From>&>(src));
    // Shape destination tensors first.
    {
        Rng tmp(0);
        dst = init_params<To>(src.hyper, tmp);
    }
    auto t = tensor_list(dst);
    for (std::size_t i = 0; i < s.size(); ++i) *t[i].second = s[i].second->template cast<To>();
    return dst;
}

}  // namespace omnidiff
