#pragma once

#include "psfc/tensor.hpp"

namespace psfc {

enum class Pad { Same, Valid };

/// 1-D cross-correlation. x is (length x in_ch), kernel (k x in_ch x out_ch),
/// bias (out_ch) or undefined. Same padding keeps out_length = ceil(length/stride).
Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int64_t stride = 1,
              Pad pad = Pad::Same);

/// Exact adjoint of same-padded conv1d with the identical kernel and stride:
/// maps (length x out_ch) to (length*stride x in_ch). bias (in_ch) optional.
Tensor conv1d_transpose(const Tensor& x, const Tensor& kernel, const Tensor& bias, int64_t stride);

/// Single-channel 2-D cross-correlation on an (H x W) grid, same padding.
/// kernel is (kh x kw), bias a scalar tensor or undefined.
Tensor conv2d_single(const Tensor& x, const Tensor& kernel, const Tensor& bias, int64_t stride_h,
                     int64_t stride_w);

/// Adjoint of conv2d_single: (H x W) -> (H*stride_h x W*stride_w).
Tensor conv2d_single_transpose(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                               int64_t stride_h, int64_t stride_w);

/// Disjoint pairwise max along axis 0; ties route the gradient to the first index.
Tensor maxpool1d(const Tensor& x);

/// Nearest-neighbor doubling along axis 0.
Tensor upsample1d(const Tensor& x);

/// Average over disjoint tiles of `tile` rows.
Tensor avgpool1d(const Tensor& x, int64_t tile);

/// Generalized divisive normalization, y_i = z_i / (beta_i + sum_j gamma_ij |z_j|^2)^0.5
/// applied across channels at every spatial position. beta (ch), gamma (ch x ch).
Tensor gdn(const Tensor& x, const Tensor& beta, const Tensor& gamma);

/// One-step multiplicative inverse, y_i = x_i * (beta_i + sum_j gamma_ij |x_j|^2)^0.5.
Tensor igdn(const Tensor& x, const Tensor& beta, const Tensor& gamma);

/// Exact inverse of gdn by fixed-point iteration z <- y * (beta + gamma |z|^2)^0.5.
/// Throws if the max-norm residual stays above tol after `iters` rounds.
Tensor gdn_invert_exact(const Tensor& y, const Tensor& beta, const Tensor& gamma, int iters,
                        double tol);

constexpr double kGdnAlpha = 2.0;
constexpr double kGdnEpsilon = 0.5;
constexpr double kGdnBetaMin = 1e-6;

}  // namespace psfc
