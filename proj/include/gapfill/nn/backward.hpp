#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <thread>
#include <vector>

#include "gapfill/error.hpp"
#include "gapfill/nn/model.hpp"

namespace gapfill::nn {

namespace detail {

/// Reverse-mode step through one cell. dh/dc_in are the gradients on this
/// step's outputs; writes the gradients on the previous state and on the
/// layer input, and accumulates parameter gradients into `g`.
inline void cell_backward(const LstmCellParams& p, const LayerTape& tape, std::size_t t,
                          std::span<const double> dh, std::span<const double> dc_in,
                          LstmCellParams& g, std::span<double> dx_out,
                          std::span<double> dh_prev_out, std::span<double> dc_prev_out,
                          std::array<std::vector<double>, 4>& da) {
    const std::size_t H = p.hidden;
    const std::size_t base = t * H;
    for (auto& v : da) v.assign(H, 0.0);

    for (std::size_t i = 0; i < H; ++i) {
        const std::size_t ix = base + i;
        const double k = tape.phased ? tape.k[ix] : 1.0;
        const double hold = 1.0 - k;
        // through the blend: candidate path scaled by k, hold path by (1-k)
        const double dht = dh[i] * k;
        double dct = dc_in[i] * k;
        dh_prev_out[i] = dh[i] * hold;
        dc_prev_out[i] = dc_in[i] * hold;

        const double o = tape.go[ix];
        const double tct = tape.tanh_ct[ix];
        const double d_o = dht * tct;
        const double da_o = d_o * o * (1.0 - o);
        dct += dht * o * (1.0 - tct * tct) + da_o * p.peephole[2](0, i);

        const double gi = tape.gi[ix], gf = tape.gf[ix], gc = tape.gc[ix];
        const double c_prev = tape.c_prev[ix];
        const double da_i = dct * gc * gi * (1.0 - gi);
        const double da_f = dct * c_prev * gf * (1.0 - gf);
        const double da_c = dct * gi * (1.0 - gc * gc);

        dc_prev_out[i] += dct * gf + da_i * p.peephole[0](0, i) + da_f * p.peephole[1](0, i);

        g.peephole[0](0, i) += da_i * c_prev;
        g.peephole[1](0, i) += da_f * c_prev;
        g.peephole[2](0, i) += da_o * tape.c_tilde[ix];
        g.bias[GATE_I](0, i) += da_i;
        g.bias[GATE_F](0, i) += da_f;
        g.bias[GATE_C](0, i) += da_c;
        g.bias[GATE_O](0, i) += da_o;

        da[GATE_I][i] = da_i;
        da[GATE_F][i] = da_f;
        da[GATE_C][i] = da_c;
        da[GATE_O][i] = da_o;
    }

    const double* x = tape.x.data() + t * p.input_dim;
    const double* h_prev = tape.h_prev.data() + base;
    for (std::size_t gi = 0; gi < 4; ++gi) {
        const double* d = da[gi].data();
        for (std::size_t j = 0; j < p.input_dim; ++j) {
            const double xj = x[j];
            double* gw = g.w_x[gi].row(j);
            for (std::size_t i = 0; i < H; ++i) gw[i] += xj * d[i];
        }
        for (std::size_t j = 0; j < H; ++j) {
            const double hj = h_prev[j];
            double* gw = g.w_h[gi].row(j);
            for (std::size_t i = 0; i < H; ++i) gw[i] += hj * d[i];
        }
    }
    if (!dx_out.empty()) {
        for (std::size_t j = 0; j < p.input_dim; ++j) {
            double acc = 0.0;
            for (std::size_t gi = 0; gi < 4; ++gi) {
                const double* w = p.w_x[gi].row(j);
                const double* d = da[gi].data();
                for (std::size_t i = 0; i < H; ++i) acc += d[i] * w[i];
            }
            dx_out[j] = acc;
        }
    }
    for (std::size_t j = 0; j < H; ++j) {
        double acc = 0.0;
        for (std::size_t gi = 0; gi < 4; ++gi) {
            const double* w = p.w_h[gi].row(j);
            const double* d = da[gi].data();
            for (std::size_t i = 0; i < H; ++i) acc += d[i] * w[i];
        }
        dh_prev_out[j] += acc;
    }
}

/// BPTT over one two-layer direction stack. d_final lands on the last step of
/// layer 1; layer-1 input gradients become per-step h-gradients for layer 0.
inline void direction_backward(const std::array<LstmCellParams, 2>& cells, DirectionTape& tape,
                               std::span<const double> d_final,
                               std::array<LstmCellParams, 2>& grads, Workspace& ws) {
    const std::size_t H = cells[0].hidden, steps = tape.l1.steps;
    ws.dh_inject.assign(steps * H, 0.0);
    ws.dh_a.assign(H, 0.0);
    ws.dc_a.assign(H, 0.0);
    ws.dh_b.assign(H, 0.0);
    ws.dc_b.assign(H, 0.0);

    // layer 1
    for (std::size_t t = steps; t-- > 0;) {
        // total gradient on h_t: recurrent flow plus the final-state injection
        if (t == steps - 1)
            for (std::size_t i = 0; i < H; ++i) ws.dh_a[i] += d_final[i];
        cell_backward(cells[1], tape.l1, t, ws.dh_a, ws.dc_a, grads[1],
                      std::span<double>(ws.dh_inject.data() + t * H, H), ws.dh_b, ws.dc_b, ws.da);
        std::swap(ws.dh_a, ws.dh_b);
        std::swap(ws.dc_a, ws.dc_b);
    }

    // layer 0 (input gradients are not needed)
    ws.dh_a.assign(H, 0.0);
    ws.dc_a.assign(H, 0.0);
    for (std::size_t t = steps; t-- > 0;) {
        for (std::size_t i = 0; i < H; ++i) ws.dh_a[i] += ws.dh_inject[t * H + i];
        cell_backward(cells[0], tape.l0, t, ws.dh_a, ws.dc_a, grads[0], {}, ws.dh_b, ws.dc_b,
                      ws.da);
        std::swap(ws.dh_a, ws.dh_b);
        std::swap(ws.dc_a, ws.dc_b);
    }
}

} // namespace detail

/// Forward + reverse pass for one sample; accumulates `weight * dLoss/dtheta`
/// into `grads` where Loss = |y - target| (subgradient 0 at the kink).
/// Returns the absolute residual.
inline double sample_backward(const ModelParams& m, const ContextSample& s, double dropout_rate,
                              std::uint64_t mask_seed, double weight, ModelParams& grads,
                              Workspace& ws) {
    const double y = forward_sample(m, s, true, dropout_rate, mask_seed, ws);
    const double r = y - s.target;
    const double dy = (r > 0.0 ? 1.0 : (r < 0.0 ? -1.0 : 0.0)) * weight;

    const std::size_t n = ws.concat.size();
    ws.dconcat.resize(n);
    const double keep = 1.0 - dropout_rate;
    grads.head_b(0, 0) += dy;
    for (std::size_t i = 0; i < n; ++i) {
        grads.head_w(i, 0) += dy * ws.dropped[i];
        double dz = dy * m.head_w(i, 0);
        if (dropout_rate > 0.0) dz *= ws.mask[i] / keep;
        ws.dconcat[i] = dz;
    }
    const std::size_t H = m.shape.hidden;
    detail::direction_backward(m.fwd, ws.fwd, std::span<const double>(ws.dconcat.data(), H),
                               grads.fwd, ws);
    detail::direction_backward(m.bwd, ws.bwd, std::span<const double>(ws.dconcat.data() + H, H),
                               grads.bwd, ws);
    return std::abs(r);
}

/// Mean |y - target| over a batch; same mask derivation as batch_backward so
/// finite differences see the identical stochastic function.
inline double batch_loss(const ModelParams& m, std::span<const ContextSample> batch,
                         double dropout_rate, std::uint64_t mask_seed, Workspace& ws) {
    if (batch.empty()) throw config_error("batch_loss: empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double y = forward_sample(m, batch[i], true, dropout_rate, derive_seed(mask_seed, i), ws);
        sum += std::abs(y - batch[i].target);
    }
    return sum / static_cast<double>(batch.size());
}

namespace detail {

inline void accumulate_params(ModelParams& into, ModelParams& from) {
    auto a = trainable_params(into);
    auto b = trainable_params(from);
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t n = a[i].mat->size();
        for (std::size_t j = 0; j < n; ++j) a[i].mat->a[j] += b[i].mat->a[j];
    }
}

} // namespace detail

/// Gradient of the batch-mean MAE. Work is split into fixed chunks whose
/// partial sums are reduced in chunk order, so the result does not depend on
/// the number of threads. Returns the batch-mean loss (normalized units).
inline double batch_backward(const ModelParams& m, std::span<const ContextSample> batch,
                             double dropout_rate, std::uint64_t mask_seed, ModelParams& grads,
                             int num_threads = 1, std::vector<double>* abs_residuals = nullptr) {
    if (batch.empty()) throw config_error("batch_backward: empty batch");
    constexpr std::size_t kChunk = 16;
    const std::size_t n_chunks = (batch.size() + kChunk - 1) / kChunk;
    const double weight = 1.0 / static_cast<double>(batch.size());

    std::vector<ModelParams> chunk_grads(n_chunks, zeros_like(m));
    std::vector<double> chunk_loss(n_chunks, 0.0);
    if (abs_residuals) abs_residuals->assign(batch.size(), 0.0);

    auto run_chunk = [&](std::size_t c, Workspace& ws) {
        const std::size_t lo = c * kChunk, hi = std::min(batch.size(), lo + kChunk);
        for (std::size_t i = lo; i < hi; ++i) {
            const double r = sample_backward(m, batch[i], dropout_rate, derive_seed(mask_seed, i),
                                             weight, chunk_grads[c], ws);
            chunk_loss[c] += r;
            if (abs_residuals) (*abs_residuals)[i] = r;
        }
    };

    const int threads = std::max(1, std::min<int>(num_threads, static_cast<int>(n_chunks)));
    if (threads == 1) {
        Workspace ws;
        for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c, ws);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                Workspace ws;
                for (std::size_t c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1))
                    run_chunk(c, ws);
            });
        }
        for (auto& t : pool) t.join();
    }

    double loss = 0.0;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        loss += chunk_loss[c];
        detail::accumulate_params(grads, chunk_grads[c]);
    }
    for (auto& ref : trainable_params(grads)) {
        for (double v : ref.mat->a) {
            if (!std::isfinite(v))
                throw numeric_error("non-finite gradient in parameter " + ref.name);
        }
    }
    return loss / static_cast<double>(batch.size());
}

} // namespace gapfill::nn
