#pragma once

#include <cmath>
#include <string>

#include "omnidiff/errors.hpp"
#include "omnidiff/net.hpp"

namespace omnidiff {

struct AdamHyper {
    double beta1 = 0.9;
    double beta2 = 0.95;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

template <typename S>
struct OptimizerState {
    NetParams<S> m;
    NetParams<S> v;
    std::int64_t step = 0;
    AdamHyper hyper;

    static OptimizerState make(const NetParams<S>& params, AdamHyper hyper = {}) {
        OptimizerState st;
        st.m = zero_like(params);
        st.v = zero_like(params);
        st.hyper = hyper;
        return st;
    }
};

// Decoupled-weight-decay Adam. Rejects the step on non-finite gradients.
// Weight decay is not applied to the embedding table or the LN/bias vectors.
template <typename S>
void adamw_step(NetParams<S>& params, const NetParams<S>& grads, OptimizerState<S>& state,
                double lr) {
    auto ps = tensor_list(params);
    auto gs = tensor_list(const_cast<NetParams<S>&>(grads));
    auto ms = tensor_list(state.m);
    auto vs = tensor_list(state.v);
    for (const auto& [name, g] : gs)
        if (!g->allFinite())
            throw DivergenceError("non-finite gradient in tensor " + name);

    const auto& h = state.hyper;
    ++state.step;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < ps.size(); ++i) {
        auto& p = *ps[i].second;
        const auto& g = *gs[i].second;
        auto& m = *ms[i].second;
        auto& v = *vs[i].second;
        m = static_cast<S>(h.beta1) * m + static_cast<S>(1.0 - h.beta1) * g;
        v = (static_cast<S>(h.beta2) * v.array() +
             static_cast<S>(1.0 - h.beta2) * g.array().square())
                .matrix();
        const auto mhat = m.array() / static_cast<S>(bc1);
        const auto vhat = v.array() / static_cast<S>(bc2);
        const bool decay = h.weight_decay > 0.0 && ps[i].first != "embed" && p.cols() > 1;
        if (decay) p.array() -= static_cast<S>(lr * h.weight_decay) * p.array();
        p.array() -= static_cast<S>(lr) * mhat / (vhat.sqrt() + static_cast<S>(h.eps));
    }
}

}  // namespace omnidiff
