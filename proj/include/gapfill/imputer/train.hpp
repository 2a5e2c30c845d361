#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "gapfill/error.hpp"
#include "gapfill/imputer/pairs.hpp"
#include "gapfill/nn/backward.hpp"
#include "gapfill/nn/nadam.hpp"
#include "gapfill/util/rng.hpp"

namespace gapfill::imputer {

/// Stops after `patience` consecutive epochs without strict improvement
/// (patience 0 stops at the first non-improving epoch).
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    bool observe(double value) {
        if (value < best_) {
            best_ = value;
            streak_ = 0;
            improved_ = true;
        } else {
            ++streak_;
            improved_ = false;
        }
        return streak_ > patience_;
    }

    bool improved() const { return improved_; }
    double best() const { return best_; }

private:
    int patience_;
    int streak_ = 0;
    bool improved_ = false;
    double best_ = std::numeric_limits<double>::infinity();
};

/// One pass over the pairs: seeded shuffle, minibatches, one optimizer step
/// per batch. Returns the epoch-mean training MAE in de-normalized units.
inline double train_epoch(nn::ModelParams& model, nn::NadamState& opt,
                          const std::vector<nn::ContextSample>& pairs, const TrainConfig& cfg,
                          std::uint64_t epoch_seed) {
    if (pairs.empty()) throw config_error("train_epoch: empty pair stream");
    Rng rng = make_rng(epoch_seed);
    std::vector<std::size_t> order(pairs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);

    const int threads = cfg.effective_threads();
    nn::ModelParams grads = nn::zeros_like(model);
    std::vector<nn::ContextSample> batch;
    batch.reserve(cfg.batch_size);

    double abs_err_sum = 0.0; // de-normalized
    std::size_t seen = 0;
    std::size_t batch_no = 0;
    std::vector<double> residuals;
    for (std::size_t pos = 0; pos < order.size(); pos += cfg.batch_size, ++batch_no) {
        const std::size_t end = std::min(order.size(), pos + cfg.batch_size);
        batch.clear();
        for (std::size_t i = pos; i < end; ++i) batch.push_back(pairs[order[i]]);

        for (auto& ref : nn::trainable_params(grads)) ref.mat->zero();
        const std::uint64_t mask_seed = derive_seed(epoch_seed, 0xD0 + batch_no);
        const double norm_loss =
            nn::batch_backward(model, batch, cfg.dropout, mask_seed, grads, threads, &residuals);
        if (!std::isfinite(norm_loss)) throw numeric_error("train_epoch: non-finite batch loss");

        for (std::size_t i = 0; i < batch.size(); ++i)
            abs_err_sum += residuals[i] * batch[i].denorm_scale;
        seen += batch.size();

        nn::nadam_update(opt, model, grads);
    }
    return abs_err_sum / static_cast<double>(seen);
}

/// Mean absolute error of eval-mode predictions over a pair set, de-normalized.
inline double evaluate_pairs(const nn::ModelParams& model, const std::vector<nn::ContextSample>& pairs,
                             nn::Workspace& ws) {
    if (pairs.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (const auto& s : pairs) {
        const double y = nn::forward_sample(model, s, false, 0.0, 0, ws);
        sum += std::abs(y - s.target) * s.denorm_scale;
    }
    return sum / static_cast<double>(pairs.size());
}

struct FitResult {
    nn::ModelParams best_model;
    double best_validation_mae = std::numeric_limits<double>::infinity();
    std::vector<double> epoch_train_mae;
    std::vector<double> epoch_validation_mae;
    int epochs_run = 0;
};

/// Trains up to max_epochs with early stopping on validation MAE and returns
/// the checkpoint that scored best on validation.
inline FitResult fit(nn::ModelParams model, const std::vector<nn::ContextSample>& train_pairs,
                     const std::vector<nn::ContextSample>& validation_pairs, const TrainConfig& cfg,
                     std::uint64_t fit_seed) {
    if (train_pairs.empty())
        throw config_error(
            "fit: no valid training pairs; consider a larger window w or a lower missing rate");
    FitResult r;
    nn::NadamState opt = nn::NadamState::create(model, cfg.optimizer);
    nn::Workspace ws;
    EarlyStopper stopper(cfg.patience);
    r.best_model = model;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double train_mae = train_epoch(model, opt, train_pairs, cfg, derive_seed(fit_seed, epoch));
        const double val_mae = evaluate_pairs(model, validation_pairs, ws);
        r.epoch_train_mae.push_back(train_mae);
        r.epoch_validation_mae.push_back(val_mae);
        ++r.epochs_run;

        const double stop_metric = std::isnan(val_mae) ? train_mae : val_mae;
        const bool stop = stopper.observe(stop_metric);
        if (stopper.improved()) {
            r.best_model = model;
            r.best_validation_mae = stop_metric;
        }
        if (stop) break;
    }
    return r;
}

} // namespace gapfill::imputer
