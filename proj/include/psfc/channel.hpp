#pragma once

#include "psfc/rng.hpp"
#include "psfc/tensor.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace psfc {

/// One quantized phase-shift vector: M indices, each in [0, 2^K).
struct QpsVector {
    std::vector<uint32_t> indices;
    int64_t k = 8;

    int64_t m() const { return static_cast<int64_t>(indices.size()); }
    uint32_t levels() const { return 1u << k; }
};

/// Feedback link model: scalar gain plus AWGN at a signal-relative SNR.
struct ChannelSpec {
    double gain = 1.0;
    double snr_db = 20.0;
    bool noiseless = false;
};

std::vector<QpsVector> sample_qps(int64_t m, int64_t k, int64_t count, uint64_t seed);

/// Index -> [0,1) value: x = index / 2^K. Shape (M x 1).
Tensor normalize(const QpsVector& q);

/// [0,1) value -> index: round half-up to the grid, wrap mod 2^K.
QpsVector requantize(const Tensor& theta_hat, int64_t k);

/// y = g*code + n with noise variance sigma^2 = P / 10^(snr_db/10), where P is
/// the mean squared entry of this code. The noise is a constant in the
/// autodiff graph. Throws on an all-zero code with finite SNR.
Tensor apply_channel(const Tensor& code, const ChannelSpec& spec, Rng& rng);

/// Dataset container for the QPS1 binary format (K <= 8 only).
struct QpsDataset {
    int64_t m = 0;
    int64_t k = 0;
    std::vector<QpsVector> samples;
};

void save_qps1(const std::string& path, const QpsDataset& ds);
QpsDataset load_qps1(const std::string& path);
/// FNV-1a over the index payload bytes; used for dataset identity checks.
uint64_t qps1_checksum(const QpsDataset& ds);

}  // namespace psfc
