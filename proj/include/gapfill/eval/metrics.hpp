#pragma once

#include <cmath>
#include <span>

#include "gapfill/error.hpp"

namespace gapfill::eval {

/// MAE = sum |x - x_hat| / N
inline double mae(std::span<const double> truth, std::span<const double> est) {
    if (truth.size() != est.size()) throw config_error("mae: length mismatch");
    if (truth.empty()) throw config_error("mae: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) sum += std::abs(truth[i] - est[i]);
    return sum / static_cast<double>(truth.size());
}

/// MRE = sum |x - x_hat| / sum x; undefined for a non-positive truth sum.
inline double mre(std::span<const double> truth, std::span<const double> est) {
    if (truth.size() != est.size()) throw config_error("mre: length mismatch");
    if (truth.empty()) throw config_error("mre: empty input");
    double err = 0.0, denom = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        err += std::abs(truth[i] - est[i]);
        denom += truth[i];
    }
    if (denom == 0.0) throw data_error("mre: truth values sum to zero");
    return err / denom;
}

} // namespace gapfill::eval
