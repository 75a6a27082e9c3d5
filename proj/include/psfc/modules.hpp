#pragma once

#include "psfc/layers.hpp"
#include "psfc/params.hpp"

#include <string>

namespace psfc {

/// Conv layer wrappers own their kernel/bias registry entries.
/// Kernels are Glorot-uniform, biases zero.
struct Conv1dLayer {
    Tensor kernel, bias;
    int64_t stride = 1;
    Pad pad = Pad::Same;

    Conv1dLayer() = default;
    Conv1dLayer(ParamRegistry& reg, const std::string& name, int64_t k, int64_t cin, int64_t cout,
                Rng& rng, int64_t stride_ = 1, Pad pad_ = Pad::Same)
        : stride(stride_), pad(pad_) {
        kernel = reg.add(name + ".kernel", glorot_uniform({k, cin, cout}, k * cin, k * cout, rng));
        bias = reg.add(name + ".bias", Tensor::zeros({cout}, true));
    }
    Tensor operator()(const Tensor& x) const { return conv1d(x, kernel, bias, stride, pad); }
};

struct Conv1dTransposeLayer {
    Tensor kernel, bias;
    int64_t stride = 2;

    Conv1dTransposeLayer() = default;
    // Maps cin -> cout; stored kernel is the forward-conv kernel (k x cout x cin).
    Conv1dTransposeLayer(ParamRegistry& reg, const std::string& name, int64_t k, int64_t cin,
                         int64_t cout, Rng& rng, int64_t stride_)
        : stride(stride_) {
        kernel = reg.add(name + ".kernel", glorot_uniform({k, cout, cin}, k * cin, k * cout, rng));
        bias = reg.add(name + ".bias", Tensor::zeros({cout}, true));
    }
    Tensor operator()(const Tensor& x) const { return conv1d_transpose(x, kernel, bias, stride); }
};

struct Conv2dSingleLayer {
    Tensor kernel, bias;
    int64_t stride_h = 1, stride_w = 1;
    bool transpose = false;

    Conv2dSingleLayer() = default;
    Conv2dSingleLayer(ParamRegistry& reg, const std::string& name, int64_t kh, int64_t kw, Rng& rng,
                      int64_t sh = 1, int64_t sw = 1, bool transpose_ = false)
        : stride_h(sh), stride_w(sw), transpose(transpose_) {
        kernel = reg.add(name + ".kernel", glorot_uniform({kh, kw}, kh * kw, kh * kw, rng));
        bias = reg.add(name + ".bias", Tensor::zeros({1}, true));
    }
    Tensor operator()(const Tensor& x) const {
        return transpose ? conv2d_single_transpose(x, kernel, bias, stride_h, stride_w)
                         : conv2d_single(x, kernel, bias, stride_h, stride_w);
    }
};

/// GDN/IGDN with trainable beta (>= beta_min) and gamma (>= 0, init identity*1e-3).
struct GdnLayer {
    Tensor beta, gamma;
    bool inverse = false;

    GdnLayer() = default;
    GdnLayer(ParamRegistry& reg, const std::string& name, int64_t channels, bool inverse_)
        : inverse(inverse_) {
        beta = reg.add(name + ".beta", Tensor::full({channels}, 1.0, true), true,
                       Projection::ClampBetaMin);
        std::vector<double> g(static_cast<size_t>(channels * channels), 0.0);
        for (int64_t i = 0; i < channels; ++i) g[i * channels + i] = 1e-3;
        gamma = reg.add(name + ".gamma",
                        Tensor::from_vector({channels, channels}, std::move(g), true), true,
                        Projection::ClampNonNegative);
    }
    Tensor operator()(const Tensor& x) const {
        return inverse ? igdn(x, beta, gamma) : gdn(x, beta, gamma);
    }
};

/// Per-channel batch normalization over the spatial axis. Batch statistics in
/// training, running statistics (momentum 0.9) in evaluation.
struct BatchNormLayer {
    Tensor scale, shift;
    Tensor running_mean, running_var;  // non-trainable state
    double momentum = 0.9;
    double eps = 1e-5;

    BatchNormLayer() = default;
    BatchNormLayer(ParamRegistry& reg, const std::string& name, int64_t channels) {
        scale = reg.add(name + ".scale", Tensor::full({channels}, 1.0, true));
        shift = reg.add(name + ".shift", Tensor::zeros({channels}, true));
        running_mean = reg.add(name + ".running_mean", Tensor::zeros({channels}, false), false);
        running_var = reg.add(name + ".running_var", Tensor::full({channels}, 1.0, false), false);
    }

    Tensor operator()(const Tensor& x, bool training) const {
        int64_t c = x.shape()[1];
        if (training) {
            Tensor mu = mean_axis(x, 0);
            Tensor centered = sub(x, mu);
            Tensor var = mean_axis(mul(centered, centered), 0);
            {
                NoGrad ng;
                for (int64_t j = 0; j < c; ++j) {
                    running_mean.node()->v[j] =
                        momentum * running_mean.data()[j] + (1 - momentum) * mu.data()[j];
                    running_var.node()->v[j] =
                        momentum * running_var.data()[j] + (1 - momentum) * var.data()[j];
                }
            }
            Tensor xhat = divide(centered, pow_const(add_scalar(var, eps), 0.5));
            return add(mul(xhat, reshape(scale, {1, c})), reshape(shift, {1, c}));
        }
        Tensor mu = reshape(running_mean, {1, c});
        Tensor var = reshape(running_var, {1, c});
        Tensor xhat = divide(sub(x, mu), pow_const(add_scalar(var, eps), 0.5));
        return add(mul(xhat, reshape(scale, {1, c})), reshape(shift, {1, c}));
    }
};

}  // namespace psfc
