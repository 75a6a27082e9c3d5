#pragma once

#include "psfc/train.hpp"

#include <string>
#include <vector>

namespace psfc {

/// ||theta - theta_hat||^2 / ||theta||^2 in normalized space (linear ratio).
double nmse(const Tensor& theta, const Tensor& theta_hat);
/// 10*log10(linear) with a -100 dB floor for exact reconstructions.
double nmse_db(double linear);
/// Fraction of positions whose re-quantized index matches the reference.
double accuracy(const Tensor& theta_hat, const QpsVector& q);

struct EvalRow {
    double snr_db = 0;  // +inf for the noiseless point
    double nmse_db = 0;
    double accuracy = 0;
    int64_t samples = 0;
};

struct EvalReport {
    std::string label;
    std::vector<EvalRow> rows;  // sorted by snr_db
};

/// Runs a fresh uniform test set through encode -> channel -> decode at each
/// SNR; noise derived deterministically per (seed, SNR point).
EvalReport sweep_snr(const Model& model, const std::vector<double>& snrs_db, int64_t test_count,
                     uint64_t seed, double gain = 1.0);

struct VariantResult {
    std::string variant;
    uint64_t seed = 0;
    double train_accuracy = 0, val_accuracy = 0, val_nmse_db = 0;
};

/// Named attention/ablation variants trained under identical budgets.
/// Known names: global, with-pooling, no-joint-branch, tse, triplet, se,
/// cbam, no-gdn.
ModelConfig variant_config(const ModelConfig& base, const std::string& variant);
std::vector<VariantResult> compare_attention(const ModelConfig& base, const TrainConfig& budget,
                                             const std::vector<std::string>& variants,
                                             const std::vector<uint64_t>& seeds,
                                             std::ostream* log = nullptr);

void emit_csv(const EvalReport& report, const std::string& path);
void emit_svg(const std::vector<EvalReport>& reports, const std::string& path);

}  // namespace psfc
