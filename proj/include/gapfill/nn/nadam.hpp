#pragma once

#include <cmath>
#include <cstdint>

#include "gapfill/error.hpp"
#include "gapfill/nn/model.hpp"

namespace gapfill::nn {

struct NadamConfig {
    double learning_rate = 0.002;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// First/second moment accumulators, zero-initialized, shapes mirroring the model.
struct NadamState {
    NadamConfig cfg;
    std::uint64_t step = 0;
    ModelParams m, v;

    static NadamState create(const ModelParams& model, const NadamConfig& cfg = {}) {
        NadamState st;
        st.cfg = cfg;
        st.m = zeros_like(model);
        st.v = zeros_like(model);
        return st;
    }
};

/// Nadam: Adam with a Nesterov-corrected first moment,
///   theta -= lr * (beta1 * m_hat + (1-beta1) * g / (1-beta1^t)) / (sqrt(v_hat) + eps)
/// where m_hat = m_t / (1 - beta1^(t+1)) and v_hat = v_t / (1 - beta2^t).
inline void nadam_update(NadamState& st, ModelParams& params, ModelParams& grads) {
    ++st.step;
    const double b1 = st.cfg.beta1, b2 = st.cfg.beta2;
    const double t = static_cast<double>(st.step);
    const double bc1 = 1.0 - std::pow(b1, t);
    const double bc1_next = 1.0 - std::pow(b1, t + 1.0);
    const double bc2 = 1.0 - std::pow(b2, t);

    auto p = trainable_params(params);
    auto g = trainable_params(grads);
    auto mo = trainable_params(st.m);
    auto vo = trainable_params(st.v);
    if (p.size() != g.size() || p.size() != mo.size())
        throw config_error("nadam_update: parameter registries do not align");

    for (std::size_t k = 0; k < p.size(); ++k) {
        if (!p[k].mat->same_shape(*g[k].mat))
            throw config_error("nadam_update: shape mismatch for " + p[k].name);
        double* theta = p[k].mat->a.data();
        const double* grad = g[k].mat->a.data();
        double* m = mo[k].mat->a.data();
        double* v = vo[k].mat->a.data();
        const std::size_t n = p[k].mat->size();
        for (std::size_t i = 0; i < n; ++i) {
            const double gi = grad[i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            const double m_hat = m[i] / bc1_next;
            const double g_hat = gi / bc1;
            const double v_hat = v[i] / bc2;
            theta[i] -= st.cfg.learning_rate * (b1 * m_hat + (1.0 - b1) * g_hat) /
                        (std::sqrt(v_hat) + st.cfg.epsilon);
        }
    }
}

} // namespace gapfill::nn
