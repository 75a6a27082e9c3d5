#pragma once

#include "psfc/channel.hpp"
#include "psfc/model.hpp"

#include <iosfwd>
#include <optional>

namespace psfc {

struct TrainConfig {
    int64_t batch_size = 256;
    int64_t epochs = 1000;
    double learning_rate = 1e-4;
    double train_snr_db = 20.0;
    bool noiseless = false;
    double gain = 1.0;
    int64_t train_count = 128000;
    int64_t val_count = 32000;
    uint64_t seed = 1;

    void validate() const;
};

/// Bias-corrected Adam with per-parameter moment buffers, keyed to the
/// trainable entries of one registry in order.
struct AdamState {
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    int64_t t = 0;
    std::vector<std::vector<double>> m, v;

    void init_for(const ParamRegistry& reg);
    bool initialized() const { return !m.empty(); }
};

/// One update from the gradients currently stored on the trainable params;
/// applies registry projections afterwards. Throws std::runtime_error naming
/// the parameter on a non-finite gradient.
void adam_step(ParamRegistry& reg, AdamState& state, double lr);

/// Mean squared error over all entries (1/M sum of squared differences).
Tensor mse_loss(const Tensor& theta_hat, const Tensor& theta);

struct HistoryRow {
    int64_t epoch = 0;
    double train_loss = 0, val_loss = 0, val_accuracy = 0, val_nmse_db = 0;
};

struct TrainResult {
    std::vector<HistoryRow> history;
    int64_t best_epoch = -1;
    double best_val_loss = 0;
    std::vector<double> best_params;  // flat snapshot at the best epoch
};

/// Thrown when the training loss goes non-finite.
struct TrainingDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Full training loop: per-epoch seeded shuffle, fresh channel noise each
/// step, validation with noise fixed by seed, best-epoch snapshot. The model
/// is left at its final (not best) parameters so a resumed run continues the
/// exact seed schedule; `start_epoch` skips already-completed epochs.
TrainResult train(Model& model, const TrainConfig& cfg, AdamState& adam, int64_t start_epoch = 0,
                  std::ostream* log = nullptr);

struct EvalStats {
    double loss = 0, accuracy = 0, nmse_db = 0;
};

/// Loss/accuracy/NMSE of a model over a sample set at one channel setting,
/// with all noise drawn from `noise_seed`.
EvalStats evaluate_samples(const Model& model, const std::vector<QpsVector>& samples,
                           const ChannelSpec& spec, uint64_t noise_seed);

}  // namespace psfc
