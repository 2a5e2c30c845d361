#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gapfill/error.hpp"
#include "gapfill/nn/tensor.hpp"

namespace gapfill::nn {

enum class CellKind : std::uint8_t { Standard, Phased };

inline const char* cell_kind_name(CellKind k) {
    return k == CellKind::Standard ? "standard" : "phased";
}

inline CellKind cell_kind_from_name(const std::string& s) {
    if (s == "standard") return CellKind::Standard;
    if (s == "phased") return CellKind::Phased;
    throw config_error("unknown cell kind '" + s + "'");
}

// Gate order used throughout: input, forget, cell, output.
enum GateIndex : std::size_t { GATE_I = 0, GATE_F = 1, GATE_C = 2, GATE_O = 3 };

struct LstmCellParams {
    std::size_t input_dim = 0, hidden = 0;
    std::array<Mat, 4> w_x;      // [input_dim x hidden]
    std::array<Mat, 4> w_h;      // [hidden x hidden]
    std::array<Mat, 3> peephole; // [1 x hidden], for gates i, f, o
    std::array<Mat, 4> bias;     // [1 x hidden]

    static LstmCellParams zeros(std::size_t input_dim, std::size_t hidden) {
        LstmCellParams p;
        p.input_dim = input_dim;
        p.hidden = hidden;
        for (auto& m : p.w_x) m = Mat(input_dim, hidden);
        for (auto& m : p.w_h) m = Mat(hidden, hidden);
        for (auto& m : p.peephole) m = Mat(1, hidden);
        for (auto& m : p.bias) m = Mat(1, hidden);
        return p;
    }
};

/// Per-unit oscillation parameters of the time gate. The leak applies while
/// training; evaluation uses a fully closed off-phase (leak 0).
struct TimeGateParams {
    Mat period;     // tau > 0
    Mat shift;      // s
    Mat open_ratio; // r_on in (0,1]
    double leak = 1e-3;

    static TimeGateParams defaults(std::size_t hidden) {
        TimeGateParams g;
        g.period = Mat(1, hidden);
        g.shift = Mat(1, hidden);
        g.open_ratio = Mat(1, hidden);
        for (std::size_t i = 0; i < hidden; ++i) {
            g.period(0, i) = 1.0;
            g.open_ratio(0, i) = 0.05;
        }
        return g;
    }
};

/// A phased cell is a standard cell plus its time gate.
struct PhasedCellParams {
    const LstmCellParams& cell;
    const TimeGateParams& gate;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Periodic openness in [0, 1] while the gate is open, leaking alpha*phase when closed.
inline double time_gate(double t, double tau, double r_on, double s, double alpha) {
    double phase = std::fmod(t - s, tau) / tau;
    if (phase < 0.0) phase += 1.0;
    if (phase < 0.5 * r_on) return 2.0 * phase / r_on;
    if (phase < r_on) return 2.0 - 2.0 * phase / r_on;
    return alpha * phase;
}

namespace detail {

/// Gate pre-activations for one step: bias + x*W_x + h_prev*W_h (+ peepholes on i,f).
inline void gate_preactivations(const LstmCellParams& p, std::span<const double> x,
                                std::span<const double> h_prev, std::span<const double> c_prev,
                                std::array<std::vector<double>, 4>& pre) {
    const std::size_t H = p.hidden;
    for (std::size_t g = 0; g < 4; ++g) {
        pre[g].assign(p.bias[g].a.begin(), p.bias[g].a.end());
        for (std::size_t j = 0; j < p.input_dim; ++j) {
            const double xj = x[j];
            const double* wr = p.w_x[g].row(j);
            double* out = pre[g].data();
            for (std::size_t i = 0; i < H; ++i) out[i] += xj * wr[i];
        }
        for (std::size_t j = 0; j < H; ++j) {
            const double hj = h_prev[j];
            const double* wr = p.w_h[g].row(j);
            double* out = pre[g].data();
            for (std::size_t i = 0; i < H; ++i) out[i] += hj * wr[i];
        }
    }
    for (std::size_t i = 0; i < H; ++i) {
        pre[GATE_I][i] += p.peephole[0](0, i) * c_prev[i];
        pre[GATE_F][i] += p.peephole[1](0, i) * c_prev[i];
    }
}

} // namespace detail

/// One standard LSTM update with peephole connections: the input and forget
/// gates see c_{t-1}, the output gate sees the fresh c_t.
inline void lstm_step(const LstmCellParams& p, std::span<const double> x,
                      std::span<const double> h_prev, std::span<const double> c_prev,
                      std::span<double> h_out, std::span<double> c_out) {
    if (x.size() != p.input_dim || h_prev.size() != p.hidden || c_prev.size() != p.hidden)
        throw config_error("lstm_step: shape mismatch");
    const std::size_t H = p.hidden;
    std::array<std::vector<double>, 4> pre;
    detail::gate_preactivations(p, x, h_prev, c_prev, pre);
    for (std::size_t i = 0; i < H; ++i) {
        const double gi = sigmoid(pre[GATE_I][i]);
        const double gf = sigmoid(pre[GATE_F][i]);
        const double gc = std::tanh(pre[GATE_C][i]);
        const double c = gf * c_prev[i] + gi * gc;
        const double go = sigmoid(pre[GATE_O][i] + p.peephole[2](0, i) * c);
        c_out[i] = c;
        h_out[i] = go * std::tanh(c);
    }
}

/// One phased update: the candidate state follows the standard equations, then
/// the time gate blends it with the previous state.
inline void phased_step(const PhasedCellParams& p, std::span<const double> x, double t,
                        std::span<const double> h_prev, std::span<const double> c_prev,
                        std::span<double> h_out, std::span<double> c_out, bool training = false) {
    const LstmCellParams& cell = p.cell;
    if (x.size() != cell.input_dim || h_prev.size() != cell.hidden || c_prev.size() != cell.hidden)
        throw config_error("phased_step: shape mismatch");
    const std::size_t H = cell.hidden;
    std::array<std::vector<double>, 4> pre;
    detail::gate_preactivations(cell, x, h_prev, c_prev, pre);
    const double alpha = training ? p.gate.leak : 0.0;
    for (std::size_t i = 0; i < H; ++i) {
        const double gi = sigmoid(pre[GATE_I][i]);
        const double gf = sigmoid(pre[GATE_F][i]);
        const double gc = std::tanh(pre[GATE_C][i]);
        const double c_tilde = gf * c_prev[i] + gi * gc;
        const double go = sigmoid(pre[GATE_O][i] + cell.peephole[2](0, i) * c_tilde);
        const double h_tilde = go * std::tanh(c_tilde);
        const double k = time_gate(t, p.gate.period(0, i), p.gate.open_ratio(0, i),
                                   p.gate.shift(0, i), alpha);
        c_out[i] = k * c_tilde + (1.0 - k) * c_prev[i];
        h_out[i] = k * h_tilde + (1.0 - k) * h_prev[i];
    }
}

} // namespace gapfill::nn
