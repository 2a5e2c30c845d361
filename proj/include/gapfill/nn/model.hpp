#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gapfill/error.hpp"
#include "gapfill/nn/cell.hpp"
#include "gapfill/nn/tensor.hpp"
#include "gapfill/util/rng.hpp"

namespace gapfill::nn {

struct ShapeSpec {
    std::size_t input_dim = 1;
    std::size_t hidden = 50;
    static constexpr std::size_t layers = 2;
    std::size_t concat_dim() const { return 2 * hidden; }
};

/// All weights of the bidirectional two-layer encoder plus the affine output
/// head. Layer 0 consumes the raw series, layer 1 consumes layer 0's outputs.
struct ModelParams {
    CellKind kind = CellKind::Standard;
    ShapeSpec shape;
    std::array<LstmCellParams, 2> fwd, bwd;       // [layer]
    std::array<TimeGateParams, 2> fwd_gate, bwd_gate; // used when kind == Phased
    Mat head_w; // [concat x 1]
    Mat head_b; // [1 x 1]
};

struct ParamRef {
    std::string name;
    Mat* mat;
};

namespace detail {

inline void push_cell_params(std::vector<ParamRef>& out, const std::string& prefix,
                             LstmCellParams& c) {
    static const char* gate_tag[4] = {"i", "f", "c", "o"};
    static const char* peep_tag[3] = {"i", "f", "o"};
    for (std::size_t g = 0; g < 4; ++g) out.push_back({prefix + ".W_x" + gate_tag[g], &c.w_x[g]});
    for (std::size_t g = 0; g < 4; ++g) out.push_back({prefix + ".W_h" + gate_tag[g], &c.w_h[g]});
    for (std::size_t g = 0; g < 3; ++g) out.push_back({prefix + ".w_c" + peep_tag[g], &c.peephole[g]});
    for (std::size_t g = 0; g < 4; ++g) out.push_back({prefix + ".b_" + gate_tag[g], &c.bias[g]});
}

inline void push_gate_params(std::vector<ParamRef>& out, const std::string& prefix,
                             TimeGateParams& g) {
    out.push_back({prefix + ".tau", &g.period});
    out.push_back({prefix + ".r_on", &g.open_ratio});
    out.push_back({prefix + ".s", &g.shift});
}

} // namespace detail

/// Optimizable parameters in a fixed, stable order.
inline std::vector<ParamRef> trainable_params(ModelParams& m) {
    std::vector<ParamRef> out;
    for (std::size_t l = 0; l < 2; ++l) detail::push_cell_params(out, "f" + std::to_string(l), m.fwd[l]);
    for (std::size_t l = 0; l < 2; ++l) detail::push_cell_params(out, "b" + std::to_string(l), m.bwd[l]);
    out.push_back({"head.W", &m.head_w});
    out.push_back({"head.b", &m.head_b});
    return out;
}

/// Everything persisted in a checkpoint; time-gate oscillation parameters are
/// fixed after initialization, so they appear here but not in trainable_params.
inline std::vector<ParamRef> all_params(ModelParams& m) {
    auto out = trainable_params(m);
    if (m.kind == CellKind::Phased) {
        for (std::size_t l = 0; l < 2; ++l)
            detail::push_gate_params(out, "f" + std::to_string(l), m.fwd_gate[l]);
        for (std::size_t l = 0; l < 2; ++l)
            detail::push_gate_params(out, "b" + std::to_string(l), m.bwd_gate[l]);
    }
    return out;
}

/// Same shapes as `like`, all parameter values zero. Used for gradients and
/// optimizer moments.
inline ModelParams zeros_like(const ModelParams& like) {
    ModelParams z;
    z.kind = like.kind;
    z.shape = like.shape;
    for (std::size_t l = 0; l < 2; ++l) {
        z.fwd[l] = LstmCellParams::zeros(like.fwd[l].input_dim, like.fwd[l].hidden);
        z.bwd[l] = LstmCellParams::zeros(like.bwd[l].input_dim, like.bwd[l].hidden);
        z.fwd_gate[l] = TimeGateParams::defaults(like.shape.hidden);
        z.bwd_gate[l] = TimeGateParams::defaults(like.shape.hidden);
    }
    z.head_w = Mat(like.head_w.rows, like.head_w.cols);
    z.head_b = Mat(1, 1);
    return z;
}

namespace detail {

/// Householder QR; returns Q with columns sign-corrected so the factorization
/// has a positive diagonal R (the standard orthogonal-init convention).
inline Mat orthogonal_from_normal(std::size_t n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Mat a(n, n);
    for (double& v : a.a) v = normal(rng);

    Mat q(n, n);
    for (std::size_t i = 0; i < n; ++i) q(i, i) = 1.0;

    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < n; ++i) norm += a(i, k) * a(i, k);
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        const double alpha = a(k, k) >= 0.0 ? -norm : norm;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) {
            v[i] = a(i, k) - (i == k ? alpha : 0.0);
            vnorm2 += v[i] * v[i];
        }
        if (vnorm2 == 0.0) continue;
        // apply H = I - 2 v v^T / (v^T v) to A (left) and accumulate into Q (right)
        for (std::size_t j = k; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < n; ++i) dot += v[i] * a(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = k; i < n; ++i) a(i, j) -= f * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0.0;
            for (std::size_t j = k; j < n; ++j) dot += q(i, j) * v[j];
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t j = k; j < n; ++j) q(i, j) -= f * v[j];
        }
    }
    // R = H_k..H_1 A has diagonal a(k,k); flip Q columns where it is negative.
    for (std::size_t k = 0; k < n; ++k) {
        if (a(k, k) < 0.0)
            for (std::size_t i = 0; i < n; ++i) q(i, k) = -q(i, k);
    }
    return q;
}

inline void glorot_fill(Mat& m, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(m.rows + m.cols));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : m.a) v = u(rng);
}

inline void log_uniform_fill(Mat& m, double lo, double hi, Rng& rng) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    for (double& v : m.a) v = std::exp(u(rng));
}

inline void init_cell(LstmCellParams& c, Rng& rng) {
    for (auto& m : c.w_x) glorot_fill(m, rng);
    for (auto& m : c.w_h) m = orthogonal_from_normal(c.hidden, rng);
    // biases and peepholes start at zero
}

} // namespace detail

/// Glorot-uniform kernels, orthogonal recurrent kernels, zero biases and
/// peepholes. For phased cells, tau and s are log-uniform over [1, time_span],
/// r_on = 0.05. Bitwise deterministic for a given seed.
inline ModelParams init_params(const ShapeSpec& shape, CellKind kind, std::uint64_t seed,
                               double time_span = 24.0) {
    ModelParams m;
    m.kind = kind;
    m.shape = shape;
    Rng rng = make_rng(derive_seed(seed, 0xA11CE));
    for (std::size_t l = 0; l < 2; ++l) {
        const std::size_t in = l == 0 ? shape.input_dim : shape.hidden;
        m.fwd[l] = LstmCellParams::zeros(in, shape.hidden);
        m.bwd[l] = LstmCellParams::zeros(in, shape.hidden);
    }
    for (std::size_t l = 0; l < 2; ++l) detail::init_cell(m.fwd[l], rng);
    for (std::size_t l = 0; l < 2; ++l) detail::init_cell(m.bwd[l], rng);
    m.head_w = Mat(shape.concat_dim(), 1);
    detail::glorot_fill(m.head_w, rng);
    m.head_b = Mat(1, 1);

    const double span = std::max(time_span, 1.0 + 1e-9);
    for (std::size_t l = 0; l < 2; ++l) {
        m.fwd_gate[l] = TimeGateParams::defaults(shape.hidden);
        m.bwd_gate[l] = TimeGateParams::defaults(shape.hidden);
    }
    if (kind == CellKind::Phased) {
        for (auto* gates : {&m.fwd_gate, &m.bwd_gate}) {
            for (std::size_t l = 0; l < 2; ++l) {
                detail::log_uniform_fill((*gates)[l].period, 1.0, span, rng);
                detail::log_uniform_fill((*gates)[l].shift, 1.0, span, rng);
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Taped forward pass (shared by training, validation and prediction).
// ---------------------------------------------------------------------------

/// Activation record for one layer over a whole sequence; flat [steps x dim].
struct LayerTape {
    std::size_t steps = 0, input_dim = 0, hidden = 0;
    bool phased = false;
    std::vector<double> x;        // [steps x input_dim]
    std::vector<double> h_prev, c_prev;
    std::vector<double> gi, gf, gc, go;
    std::vector<double> c_tilde, tanh_ct; // candidate cell state, tanh of it
    std::vector<double> k;                // time gate (phased only)
    std::vector<double> h, c;             // post-blend outputs
    std::vector<double> h_tilde;          // candidate output (phased only)
    std::vector<double> times;            // [steps]

    void resize(std::size_t n_steps, std::size_t in, std::size_t hid, bool is_phased) {
        steps = n_steps;
        input_dim = in;
        hidden = hid;
        phased = is_phased;
        x.assign(n_steps * in, 0.0);
        const std::size_t m = n_steps * hid;
        for (auto* v : {&h_prev, &c_prev, &gi, &gf, &gc, &go, &c_tilde, &tanh_ct, &h, &c})
            v->assign(m, 0.0);
        if (is_phased) {
            k.assign(m, 0.0);
            h_tilde.assign(m, 0.0);
        } else {
            k.clear();
            h_tilde.clear();
        }
        times.assign(n_steps, 0.0);
    }
};

struct DirectionTape {
    LayerTape l0, l1;
};

/// One encoder input: sequences already in consumption order (the forward
/// direction reads its context chronologically, the backward direction reads
/// its context from the far side inward).
struct ContextSample {
    std::vector<double> fwd_seq, fwd_times;
    std::vector<double> bwd_seq, bwd_times;
    double target = 0.0;       // normalized label (training/validation only)
    double denorm_scale = 1.0; // multiplier restoring de-normalized error units
};

struct Workspace {
    DirectionTape fwd, bwd;
    std::vector<double> concat;  // [2H] encoder output
    std::vector<double> dropped; // [2H] after dropout
    std::vector<double> mask;    // [2H] dropout mask (0/1)
    // backward scratch
    std::array<std::vector<double>, 4> da;
    std::vector<double> dh_a, dh_b, dc_a, dc_b, dstate;
    std::vector<double> dh_inject; // [steps x hidden]
    std::vector<double> dconcat;
};

namespace detail {

inline void layer_forward(const LstmCellParams& p, const TimeGateParams& gate, bool phased,
                          bool training, std::span<const double> seq_times, LayerTape& tape) {
    const std::size_t H = p.hidden, steps = tape.steps;
    const double alpha = training ? gate.leak : 0.0;
    std::array<std::vector<double>, 4> pre;
    std::vector<double> h(H, 0.0), c(H, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
        tape.times[t] = seq_times[t];
        std::copy(h.begin(), h.end(), tape.h_prev.begin() + t * H);
        std::copy(c.begin(), c.end(), tape.c_prev.begin() + t * H);
        std::span<const double> x(tape.x.data() + t * p.input_dim, p.input_dim);
        gate_preactivations(p, x, h, c, pre);
        for (std::size_t i = 0; i < H; ++i) {
            const double a_i = sigmoid(pre[GATE_I][i]);
            const double a_f = sigmoid(pre[GATE_F][i]);
            const double a_c = std::tanh(pre[GATE_C][i]);
            const double ct = a_f * c[i] + a_i * a_c;
            const double a_o = sigmoid(pre[GATE_O][i] + p.peephole[2](0, i) * ct);
            const double tct = std::tanh(ct);
            const double ht = a_o * tct;
            const std::size_t ix = t * H + i;
            tape.gi[ix] = a_i;
            tape.gf[ix] = a_f;
            tape.gc[ix] = a_c;
            tape.go[ix] = a_o;
            tape.c_tilde[ix] = ct;
            tape.tanh_ct[ix] = tct;
            if (phased) {
                const double k = time_gate(seq_times[t], gate.period(0, i), gate.open_ratio(0, i),
                                           gate.shift(0, i), alpha);
                tape.k[ix] = k;
                tape.h_tilde[ix] = ht;
                tape.c[ix] = k * ct + (1.0 - k) * c[i];
                tape.h[ix] = k * ht + (1.0 - k) * h[i];
            } else {
                tape.c[ix] = ct;
                tape.h[ix] = ht;
            }
            c[i] = tape.c[ix];
            h[i] = tape.h[ix];
        }
    }
}

inline void direction_forward(const ModelParams& m, const std::array<LstmCellParams, 2>& cells,
                              const std::array<TimeGateParams, 2>& gates,
                              std::span<const double> seq, std::span<const double> times,
                              bool training, DirectionTape& tape) {
    const bool phased = m.kind == CellKind::Phased;
    const std::size_t H = m.shape.hidden, steps = seq.size();
    tape.l0.resize(steps, m.shape.input_dim, H, phased);
    tape.l1.resize(steps, H, H, phased);
    for (std::size_t t = 0; t < steps; ++t) tape.l0.x[t] = seq[t];
    layer_forward(cells[0], gates[0], phased, training, times, tape.l0);
    tape.l1.x = tape.l0.h;
    layer_forward(cells[1], gates[1], phased, training, times, tape.l1);
}

} // namespace detail

/// Runs both direction stacks over a context sample; the final layer-1 states
/// land in ws.concat as [h_f | h_b].
inline void encode_context(const ModelParams& m, const ContextSample& s, bool training,
                           Workspace& ws) {
    if (s.fwd_seq.empty() || s.bwd_seq.empty())
        throw config_error("encode_context: empty context sequence");
    detail::direction_forward(m, m.fwd, m.fwd_gate, s.fwd_seq, s.fwd_times, training, ws.fwd);
    detail::direction_forward(m, m.bwd, m.bwd_gate, s.bwd_seq, s.bwd_times, training, ws.bwd);
    const std::size_t H = m.shape.hidden;
    ws.concat.resize(2 * H);
    const std::size_t lf = (ws.fwd.l1.steps - 1) * H, lb = (ws.bwd.l1.steps - 1) * H;
    std::copy(ws.fwd.l1.h.begin() + lf, ws.fwd.l1.h.begin() + lf + H, ws.concat.begin());
    std::copy(ws.bwd.l1.h.begin() + lb, ws.bwd.l1.h.begin() + lb + H, ws.concat.begin() + H);
}

/// Affine head over the 100-dim concatenation with inverted dropout while
/// training (eval mode ignores the mask entirely).
inline double output_head(const ModelParams& m, std::span<const double> concat, bool training,
                          std::span<const double> dropout_mask, double dropout_rate,
                          Workspace& ws) {
    const std::size_t n = concat.size();
    ws.dropped.resize(n);
    const double keep = 1.0 - dropout_rate;
    if (training && dropout_rate > 0.0) {
        for (std::size_t i = 0; i < n; ++i) ws.dropped[i] = concat[i] * dropout_mask[i] / keep;
    } else {
        std::copy(concat.begin(), concat.end(), ws.dropped.begin());
    }
    double y = m.head_b(0, 0);
    for (std::size_t i = 0; i < n; ++i) y += ws.dropped[i] * m.head_w(i, 0);
    return y;
}

/// Deterministic per-sample dropout mask (0/1 entries).
inline void fill_dropout_mask(std::vector<double>& mask, std::size_t n, double rate,
                              std::uint64_t seed) {
    mask.resize(n);
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) mask[i] = u(rng) < rate ? 0.0 : 1.0;
}

/// Full forward for one sample. Training mode keeps the tapes for backward.
inline double forward_sample(const ModelParams& m, const ContextSample& s, bool training,
                             double dropout_rate, std::uint64_t mask_seed, Workspace& ws) {
    encode_context(m, s, training, ws);
    if (training && dropout_rate > 0.0)
        fill_dropout_mask(ws.mask, ws.concat.size(), dropout_rate, mask_seed);
    return output_head(m, ws.concat, training, ws.mask, dropout_rate, ws);
}

} // namespace gapfill::nn
