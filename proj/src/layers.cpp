#include "psfc/layers.hpp"

#include <algorithm>
#include <cmath>

namespace psfc {

namespace {

NodeP make_op(Shape shape, std::vector<double> v, std::vector<NodeP> parents,
              std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->v = std::move(v);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    if (rg && grad_enabled()) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backprop = std::move(backprop);
    }
    return n;
}

struct ConvGeom {
    int64_t out_len;
    int64_t pad_left;
};

ConvGeom conv_geometry(int64_t len, int64_t k, int64_t stride, Pad pad) {
    if (pad == Pad::Valid) {
        if (len < k) throw std::invalid_argument("conv1d: input shorter than kernel with valid padding");
        return {(len - k) / stride + 1, 0};
    }
    int64_t out = (len + stride - 1) / stride;
    int64_t total = std::max<int64_t>((out - 1) * stride + k - len, 0);
    return {out, total / 2};
}

}  // namespace

Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int64_t stride, Pad pad) {
    NodeP nx = x.node(), nk = kernel.node();
    NodeP nb = bias.defined() ? bias.node() : nullptr;
    if (nx->shape.size() != 2 || nk->shape.size() != 3)
        throw std::invalid_argument("conv1d: expected x (L x Cin) and kernel (k x Cin x Cout)");
    int64_t len = nx->shape[0], cin = nx->shape[1];
    int64_t k = nk->shape[0], kin = nk->shape[1], cout = nk->shape[2];
    if (cin != kin)
        throw std::invalid_argument("conv1d: channel mismatch, input has " + std::to_string(cin) +
                                    ", kernel expects " + std::to_string(kin));
    if (nb && nb->numel() != cout) throw std::invalid_argument("conv1d: bias size mismatch");
    auto [out_len, pad_left] = conv_geometry(len, k, stride, pad);

    std::vector<double> out(static_cast<size_t>(out_len * cout), 0.0);
    for (int64_t o = 0; o < out_len; ++o) {
        double* orow = &out[o * cout];
        for (int64_t t = 0; t < k; ++t) {
            int64_t i = o * stride + t - pad_left;
            if (i < 0 || i >= len) continue;
            for (int64_t ci = 0; ci < cin; ++ci) {
                double xv = nx->v[i * cin + ci];
                const double* krow = &nk->v[(t * cin + ci) * cout];
                for (int64_t co = 0; co < cout; ++co) orow[co] += xv * krow[co];
            }
        }
        if (nb)
            for (int64_t co = 0; co < cout; ++co) orow[co] += nb->v[co];
    }

    std::vector<NodeP> parents = {nx, nk};
    if (nb) parents.push_back(nb);
    int64_t pl = pad_left;
    return Tensor(make_op({out_len, cout}, std::move(out), std::move(parents),
                          [nx, nk, nb, len, cin, k, cout, stride, pl, out_len](Node& n) {
        bool wx = nx->requires_grad, wk = nk->requires_grad, wb = nb && nb->requires_grad;
        if (wx) nx->ensure_grad();
        if (wk) nk->ensure_grad();
        if (wb) nb->ensure_grad();
        for (int64_t o = 0; o < out_len; ++o) {
            const double* grow = &n.g[o * cout];
            for (int64_t t = 0; t < k; ++t) {
                int64_t i = o * stride + t - pl;
                if (i < 0 || i >= len) continue;
                for (int64_t ci = 0; ci < cin; ++ci) {
                    const double* krow = &nk->v[(t * cin + ci) * cout];
                    double xv = nx->v[i * cin + ci];
                    if (wx) {
                        double acc = 0;
                        for (int64_t co = 0; co < cout; ++co) acc += grow[co] * krow[co];
                        nx->g[i * cin + ci] += acc;
                    }
                    if (wk) {
                        double* kg = &nk->g[(t * cin + ci) * cout];
                        for (int64_t co = 0; co < cout; ++co) kg[co] += xv * grow[co];
                    }
                }
            }
            if (wb)
                for (int64_t co = 0; co < cout; ++co) nb->g[co] += grow[co];
        }
    }));
}

Tensor conv1d_transpose(const Tensor& x, const Tensor& kernel, const Tensor& bias, int64_t stride) {
    NodeP nx = x.node(), nk = kernel.node();
    NodeP nb = bias.defined() ? bias.node() : nullptr;
    if (nx->shape.size() != 2 || nk->shape.size() != 3)
        throw std::invalid_argument("conv1d_transpose: expected x (L x Cout) and kernel (k x Cin x Cout)");
    int64_t in_len = nx->shape[0], cout = nx->shape[1];
    int64_t k = nk->shape[0], cin = nk->shape[1];
    if (cout != nk->shape[2])
        throw std::invalid_argument("conv1d_transpose: channel mismatch, input has " + std::to_string(cout) +
                                    ", kernel expects " + std::to_string(nk->shape[2]));
    if (nb && nb->numel() != cin) throw std::invalid_argument("conv1d_transpose: bias size mismatch");
    int64_t out_len = in_len * stride;
    // pad of the forward same-padded conv this op is the adjoint of
    int64_t pad_left = std::max<int64_t>(k - stride, 0) / 2;

    std::vector<double> out(static_cast<size_t>(out_len * cin), 0.0);
    for (int64_t o = 0; o < in_len; ++o) {
        const double* xrow = &nx->v[o * cout];
        for (int64_t t = 0; t < k; ++t) {
            int64_t i = o * stride + t - pad_left;
            if (i < 0 || i >= out_len) continue;
            for (int64_t ci = 0; ci < cin; ++ci) {
                const double* krow = &nk->v[(t * cin + ci) * cout];
                double acc = 0;
                for (int64_t co = 0; co < cout; ++co) acc += xrow[co] * krow[co];
                out[i * cin + ci] += acc;
            }
        }
    }
    if (nb)
        for (int64_t i = 0; i < out_len; ++i)
            for (int64_t ci = 0; ci < cin; ++ci) out[i * cin + ci] += nb->v[ci];

    std::vector<NodeP> parents = {nx, nk};
    if (nb) parents.push_back(nb);
    return Tensor(make_op({out_len, cin}, std::move(out), std::move(parents),
                          [nx, nk, nb, in_len, cout, k, cin, stride, pad_left, out_len](Node& n) {
        bool wx = nx->requires_grad, wk = nk->requires_grad, wb = nb && nb->requires_grad;
        if (wx) nx->ensure_grad();
        if (wk) nk->ensure_grad();
        if (wb) nb->ensure_grad();
        for (int64_t o = 0; o < in_len; ++o) {
            const double* xrow = &nx->v[o * cout];
            double* xg = wx ? &nx->g[o * cout] : nullptr;
            for (int64_t t = 0; t < k; ++t) {
                int64_t i = o * stride + t - pad_left;
                if (i < 0 || i >= out_len) continue;
                for (int64_t ci = 0; ci < cin; ++ci) {
                    double gv = n.g[i * cin + ci];
                    const double* krow = &nk->v[(t * cin + ci) * cout];
                    if (wx)
                        for (int64_t co = 0; co < cout; ++co) xg[co] += gv * krow[co];
                    if (wk) {
                        double* kg = &nk->g[(t * cin + ci) * cout];
                        for (int64_t co = 0; co < cout; ++co) kg[co] += gv * xrow[co];
                    }
                }
            }
        }
        if (wb)
            for (int64_t i = 0; i < out_len; ++i)
                for (int64_t ci = 0; ci < cin; ++ci) nb->g[ci] += n.g[i * cin + ci];
    }));
}

Tensor conv2d_single(const Tensor& x, const Tensor& kernel, const Tensor& bias, int64_t stride_h,
                     int64_t stride_w) {
    NodeP nx = x.node(), nk = kernel.node();
    NodeP nb = bias.defined() ? bias.node() : nullptr;
    if (nx->shape.size() != 2 || nk->shape.size() != 2)
        throw std::invalid_argument("conv2d_single: expected 2-D input and kernel");
    int64_t h = nx->shape[0], w = nx->shape[1];
    int64_t kh = nk->shape[0], kw = nk->shape[1];
    auto [oh, ph] = conv_geometry(h, kh, stride_h, Pad::Same);
    auto [ow, pw] = conv_geometry(w, kw, stride_w, Pad::Same);

    std::vector<double> out(static_cast<size_t>(oh * ow), nb ? nb->v[0] : 0.0);
    for (int64_t a = 0; a < oh; ++a)
        for (int64_t b = 0; b < ow; ++b) {
            double acc = 0;
            for (int64_t u = 0; u < kh; ++u) {
                int64_t i = a * stride_h + u - ph;
                if (i < 0 || i >= h) continue;
                for (int64_t v = 0; v < kw; ++v) {
                    int64_t j = b * stride_w + v - pw;
                    if (j < 0 || j >= w) continue;
                    acc += nx->v[i * w + j] * nk->v[u * kw + v];
                }
            }
            out[a * ow + b] += acc;
        }

    std::vector<NodeP> parents = {nx, nk};
    if (nb) parents.push_back(nb);
    return Tensor(make_op({oh, ow}, std::move(out), std::move(parents),
                          [nx, nk, nb, h, w, kh, kw, stride_h, stride_w, ph, pw, oh, ow](Node& n) {
        bool wx = nx->requires_grad, wk = nk->requires_grad, wb = nb && nb->requires_grad;
        if (wx) nx->ensure_grad();
        if (wk) nk->ensure_grad();
        if (wb) nb->ensure_grad();
        for (int64_t a = 0; a < oh; ++a)
            for (int64_t b = 0; b < ow; ++b) {
                double gv = n.g[a * ow + b];
                if (wb) nb->g[0] += gv;
                for (int64_t u = 0; u < kh; ++u) {
                    int64_t i = a * stride_h + u - ph;
                    if (i < 0 || i >= h) continue;
                    for (int64_t v = 0; v < kw; ++v) {
                        int64_t j = b * stride_w + v - pw;
                        if (j < 0 || j >= w) continue;
                        if (wx) nx->g[i * w + j] += gv * nk->v[u * kw + v];
                        if (wk) nk->g[u * kw + v] += gv * nx->v[i * w + j];
                    }
                }
            }
    }));
}

Tensor conv2d_single_transpose(const Tensor& x, const Tensor& kernel, const Tensor& bias,
                               int64_t stride_h, int64_t stride_w) {
    NodeP nx = x.node(), nk = kernel.node();
    NodeP nb = bias.defined() ? bias.node() : nullptr;
    if (nx->shape.size() != 2 || nk->shape.size() != 2)
        throw std::invalid_argument("conv2d_single_transpose: expected 2-D input and kernel");
    int64_t h = nx->shape[0], w = nx->shape[1];
    int64_t kh = nk->shape[0], kw = nk->shape[1];
    int64_t oh = h * stride_h, ow = w * stride_w;
    int64_t ph = std::max<int64_t>(kh - stride_h, 0) / 2;
    int64_t pw = std::max<int64_t>(kw - stride_w, 0) / 2;

    std::vector<double> out(static_cast<size_t>(oh * ow), nb ? nb->v[0] : 0.0);
    for (int64_t a = 0; a < h; ++a)
        for (int64_t b = 0; b < w; ++b) {
            double xv = nx->v[a * w + b];
            for (int64_t u = 0; u < kh; ++u) {
                int64_t i = a * stride_h + u - ph;
                if (i < 0 || i >= oh) continue;
                for (int64_t v = 0; v < kw; ++v) {
                    int64_t j = b * stride_w + v - pw;
                    if (j < 0 || j >= ow) continue;
                    out[i * ow + j] += xv * nk->v[u * kw + v];
                }
            }
        }

    std::vector<NodeP> parents = {nx, nk};
    if (nb) parents.push_back(nb);
    return Tensor(make_op({oh, ow}, std::move(out), std::move(parents),
                          [nx, nk, nb, h, w, kh, kw, stride_h, stride_w, ph, pw, oh, ow](Node& n) {
        bool wx = nx->requires_grad, wk = nk->requires_grad, wb = nb && nb->requires_grad;
        if (wx) nx->ensure_grad();
        if (wk) nk->ensure_grad();
        if (wb) nb->ensure_grad();
        if (wb)
            for (double g : n.g) nb->g[0] += g;
        for (int64_t a = 0; a < h; ++a)
            for (int64_t b = 0; b < w; ++b) {
                double xv = nx->v[a * w + b];
                double acc = 0;
                for (int64_t u = 0; u < kh; ++u) {
                    int64_t i = a * stride_h + u - ph;
                    if (i < 0 || i >= oh) continue;
                    for (int64_t v = 0; v < kw; ++v) {
                        int64_t j = b * stride_w + v - pw;
                        if (j < 0 || j >= ow) continue;
                        double gv = n.g[i * ow + j];
                        acc += gv * nk->v[u * kw + v];
                        if (wk) nk->g[u * kw + v] += gv * xv;
                    }
                }
                if (wx) nx->g[a * w + b] += acc;
            }
    }));
}

Tensor maxpool1d(const Tensor& x) {
    NodeP nx = x.node();
    if (nx->shape.size() != 2) throw std::invalid_argument("maxpool1d expects a 2-D tensor");
    int64_t len = nx->shape[0], c = nx->shape[1];
    if (len % 2 != 0) throw std::invalid_argument("maxpool1d: odd input length " + std::to_string(len));
    int64_t out_len = len / 2;
    std::vector<double> out(static_cast<size_t>(out_len * c));
    auto arg = std::make_shared<std::vector<int64_t>>(out_len * c);
    for (int64_t o = 0; o < out_len; ++o)
        for (int64_t j = 0; j < c; ++j) {
            double a = nx->v[(2 * o) * c + j], b = nx->v[(2 * o + 1) * c + j];
            // first index wins ties
            int64_t best = (b > a) ? 2 * o + 1 : 2 * o;
            out[o * c + j] = nx->v[best * c + j];
            (*arg)[o * c + j] = best;
        }
    return Tensor(make_op({out_len, c}, std::move(out), {nx}, [nx, c, arg](Node& n) {
        nx->ensure_grad();
        for (size_t i = 0; i < n.v.size(); ++i) nx->g[(*arg)[i] * c + (i % c)] += n.g[i];
    }));
}

Tensor upsample1d(const Tensor& x) { return repeat_rows(x, 2); }

Tensor avgpool1d(const Tensor& x, int64_t tile) {
    NodeP nx = x.node();
    if (nx->shape.size() != 2) throw std::invalid_argument("avgpool1d expects a 2-D tensor");
    int64_t len = nx->shape[0], c = nx->shape[1];
    if (tile < 1 || len % tile != 0)
        throw std::invalid_argument("avgpool1d: tile size " + std::to_string(tile) +
                                    " does not divide length " + std::to_string(len));
    int64_t out_len = len / tile;
    std::vector<double> out(static_cast<size_t>(out_len * c), 0.0);
    for (int64_t o = 0; o < out_len; ++o)
        for (int64_t t = 0; t < tile; ++t)
            for (int64_t j = 0; j < c; ++j) out[o * c + j] += nx->v[(o * tile + t) * c + j];
    for (auto& v : out) v /= static_cast<double>(tile);
    return Tensor(make_op({out_len, c}, std::move(out), {nx}, [nx, c, tile, out_len](Node& n) {
        nx->ensure_grad();
        double inv = 1.0 / static_cast<double>(tile);
        for (int64_t o = 0; o < out_len; ++o)
            for (int64_t t = 0; t < tile; ++t)
                for (int64_t j = 0; j < c; ++j) nx->g[(o * tile + t) * c + j] += n.g[o * c + j] * inv;
    }));
}

namespace {

// beta_i + sum_j gamma_ij |z_j|^alpha, as a graph so beta/gamma get gradients.
Tensor gdn_denominator(const Tensor& z, const Tensor& beta, const Tensor& gamma) {
    int64_t c = z.shape()[1];
    if (beta.numel() != c || gamma.shape() != Shape{c, c})
        throw std::invalid_argument("gdn: parameter shapes do not match channel count");
    Tensor p = pow_const(abs(z), kGdnAlpha);
    Tensor s = matmul(p, transpose2d(gamma));
    Tensor d = add(s, reshape(beta, {1, c}));
    return pow_const(d, kGdnEpsilon);
}

}  // namespace

Tensor gdn(const Tensor& x, const Tensor& beta, const Tensor& gamma) {
    return divide(x, gdn_denominator(x, beta, gamma));
}

Tensor igdn(const Tensor& x, const Tensor& beta, const Tensor& gamma) {
    return mul(x, gdn_denominator(x, beta, gamma));
}

Tensor gdn_invert_exact(const Tensor& y, const Tensor& beta, const Tensor& gamma, int iters,
                        double tol) {
    if (iters < 1) throw std::invalid_argument("gdn_invert_exact: iters must be >= 1");
    if (tol <= 0) throw std::invalid_argument("gdn_invert_exact: tol must be positive");
    NoGrad ng;
    int64_t h = y.shape()[0], c = y.shape()[1];
    const auto& yv = y.data();
    const auto& bv = beta.data();
    const auto& gv = gamma.data();
    std::vector<double> z = yv;
    std::vector<double> den(static_cast<size_t>(h * c));
    auto fill_den = [&]() {
        for (int64_t i = 0; i < h; ++i)
            for (int64_t a = 0; a < c; ++a) {
                double s = bv[a];
                for (int64_t j = 0; j < c; ++j) {
                    double zj = z[i * c + j];
                    s += gv[a * c + j] * zj * zj;
                }
                den[i * c + a] = std::sqrt(s);
            }
    };
    for (int it = 0; it < iters; ++it) {
        fill_den();
        double resid = 0;
        for (size_t i = 0; i < z.size(); ++i) resid = std::max(resid, std::fabs(z[i] / den[i] - yv[i]));
        if (resid <= tol) return Tensor::from_vector(y.shape(), std::move(z));
        for (size_t i = 0; i < z.size(); ++i) z[i] = yv[i] * den[i];
    }
    fill_den();
    double resid = 0;
    for (size_t i = 0; i < z.size(); ++i) resid = std::max(resid, std::fabs(z[i] / den[i] - yv[i]));
    if (resid <= tol) return Tensor::from_vector(y.shape(), std::move(z));
    throw std::runtime_error("gdn_invert_exact: no convergence after " + std::to_string(iters) +
                             " iterations (residual " + std::to_string(resid) + ")");
}

}  // namespace psfc
