#include "psfc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace psfc {

int64_t shape_numel(const Shape& s) {
    int64_t n = 1;
    for (int64_t d : s) {
        if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
    os << ")";
    return os.str();
}

Tensor Tensor::zeros(Shape s, bool requires_grad) {
    return full(std::move(s), 0.0, requires_grad);
}

Tensor Tensor::full(Shape s, double value, bool requires_grad) {
    auto n = std::make_shared<Node>();
    int64_t count = shape_numel(s);
    n->shape = std::move(s);
    n->v.assign(static_cast<size_t>(count), value);
    n->requires_grad = requires_grad;
    return Tensor(n);
}

Tensor Tensor::from_vector(Shape s, std::vector<double> v, bool requires_grad) {
    if (shape_numel(s) != static_cast<int64_t>(v.size()))
        throw std::invalid_argument("data length does not match shape " + shape_str(s));
    auto n = std::make_shared<Node>();
    n->shape = std::move(s);
    n->v = std::move(v);
    n->requires_grad = requires_grad;
    return Tensor(n);
}

Tensor Tensor::scalar(double v, bool requires_grad) {
    return from_vector({1}, {v}, requires_grad);
}

double Tensor::item() const {
    if (numel() != 1) throw std::logic_error("item() on non-scalar tensor " + shape_str(shape()));
    return n_->v[0];
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool grad_enabled() { return g_grad_enabled; }
NoGrad::NoGrad() : prev(g_grad_enabled) { g_grad_enabled = false; }
NoGrad::~NoGrad() { g_grad_enabled = prev; }

namespace {

NodeP make_result(Shape shape, std::vector<double> v, std::vector<NodeP> parents,
                  std::function<void(Node&)> backprop) {
    auto n = std::make_shared<Node>();
    n->shape = std::move(shape);
    n->v = std::move(v);
    bool rg = false;
    for (const auto& p : parents) rg = rg || p->requires_grad;
    if (rg && g_grad_enabled) {
        n->requires_grad = true;
        n->parents = std::move(parents);
        n->backprop = std::move(backprop);
    }
    return n;
}

// Broadcast layout: shapes padded to equal rank with leading 1s, each axis
// equal or 1. Strides of broadcast axes are 0.
struct BcastPlan {
    Shape out;
    std::vector<int64_t> sa, sb;  // strides into a and b per output axis
    int64_t count;
};

BcastPlan broadcast_plan(const Shape& a, const Shape& b) {
    size_t rank = std::max(a.size(), b.size());
    if (rank > 3) throw std::invalid_argument("broadcast supports rank <= 3");
    Shape pa(rank, 1), pb(rank, 1);
    std::copy(a.begin(), a.end(), pa.begin() + (rank - a.size()));
    std::copy(b.begin(), b.end(), pb.begin() + (rank - b.size()));
    BcastPlan plan;
    plan.out.resize(rank);
    for (size_t i = 0; i < rank; ++i) {
        if (pa[i] != pb[i] && pa[i] != 1 && pb[i] != 1)
            throw std::invalid_argument("shape mismatch: " + shape_str(a) + " vs " + shape_str(b));
        plan.out[i] = std::max(pa[i], pb[i]);
    }
    auto strides = [rank](const Shape& s) {
        std::vector<int64_t> st(rank);
        int64_t acc = 1;
        for (size_t i = rank; i-- > 0;) {
            st[i] = acc;
            acc *= s[i];
        }
        return st;
    };
    auto stA = strides(pa), stB = strides(pb);
    plan.sa.resize(rank);
    plan.sb.resize(rank);
    for (size_t i = 0; i < rank; ++i) {
        plan.sa[i] = (pa[i] == 1 && plan.out[i] != 1) ? 0 : stA[i];
        plan.sb[i] = (pb[i] == 1 && plan.out[i] != 1) ? 0 : stB[i];
    }
    plan.count = shape_numel(plan.out);
    return plan;
}

// Visits every output index together with the mapped flat offsets into a, b.
template <typename F>
void bcast_for_each(const BcastPlan& p, F&& f) {
    size_t rank = p.out.size();
    std::vector<int64_t> sa = p.sa, sb = p.sb;
    sa.insert(sa.begin(), 3 - rank, 0);
    sb.insert(sb.begin(), 3 - rank, 0);
    Shape dd(3, 1);
    std::copy(p.out.begin(), p.out.end(), dd.begin() + (3 - rank));
    int64_t o = 0;
    for (int64_t i = 0; i < dd[0]; ++i)
        for (int64_t j = 0; j < dd[1]; ++j)
            for (int64_t k = 0; k < dd[2]; ++k, ++o)
                f(o, i * sa[0] + j * sa[1] + k * sa[2], i * sb[0] + j * sb[1] + k * sb[2]);
}

Tensor binary_op(const Tensor& a, const Tensor& b, double (*fwd)(double, double),
                 void (*bwd)(double x, double y, double g, double& gx, double& gy)) {
    NodeP na = a.node(), nb = b.node();
    if (na->shape == nb->shape) {
        // fast path, no index mapping
        std::vector<double> out(na->v.size());
        for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(na->v[i], nb->v[i]);
        return Tensor(make_result(na->shape, std::move(out), {na, nb}, [na, nb, bwd](Node& n) {
            bool wa = na->requires_grad, wb = nb->requires_grad;
            if (wa) na->ensure_grad();
            if (wb) nb->ensure_grad();
            for (size_t i = 0; i < n.v.size(); ++i) {
                double gx = 0, gy = 0;
                bwd(na->v[i], nb->v[i], n.g[i], gx, gy);
                if (wa) na->g[i] += gx;
                if (wb) nb->g[i] += gy;
            }
        }));
    }
    BcastPlan plan = broadcast_plan(na->shape, nb->shape);
    std::vector<double> out(static_cast<size_t>(plan.count));
    bcast_for_each(plan, [&](int64_t o, int64_t ia, int64_t ib) { out[o] = fwd(na->v[ia], nb->v[ib]); });
    return Tensor(make_result(plan.out, std::move(out), {na, nb}, [na, nb, plan, bwd](Node& n) {
        bool wa = na->requires_grad, wb = nb->requires_grad;
        if (wa) na->ensure_grad();
        if (wb) nb->ensure_grad();
        bcast_for_each(plan, [&](int64_t o, int64_t ia, int64_t ib) {
            double gx = 0, gy = 0;
            bwd(na->v[ia], nb->v[ib], n.g[o], gx, gy);
            if (wa) na->g[ia] += gx;
            if (wb) nb->g[ib] += gy;
        });
    }));
}

Tensor unary_op(const Tensor& a, const std::function<double(double)>& fwd,
                const std::function<double(double x, double y)>& dydx) {
    NodeP na = a.node();
    std::vector<double> out(na->v.size());
    for (size_t i = 0; i < out.size(); ++i) out[i] = fwd(na->v[i]);
    return Tensor(make_result(na->shape, std::move(out), {na}, [na, dydx](Node& n) {
        na->ensure_grad();
        for (size_t i = 0; i < n.v.size(); ++i) na->g[i] += n.g[i] * dydx(na->v[i], n.v[i]);
    }));
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x + y; },
        [](double, double, double g, double& gx, double& gy) {
            gx = g;
            gy = g;
        });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x - y; },
        [](double, double, double g, double& gx, double& gy) {
            gx = g;
            gy = -g;
        });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x * y; },
        [](double x, double y, double g, double& gx, double& gy) {
            gx = g * y;
            gy = g * x;
        });
}

Tensor divide(const Tensor& a, const Tensor& b) {
    return binary_op(
        a, b, [](double x, double y) { return x / y; },
        [](double x, double y, double g, double& gx, double& gy) {
            gx = g / y;
            gy = -g * x / (y * y);
        });
}

Tensor add_scalar(const Tensor& a, double c) {
    return unary_op(a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

Tensor mul_scalar(const Tensor& a, double c) {
    return unary_op(a, [c](double x) { return x * c; }, [c](double, double) { return c; });
}

Tensor abs(const Tensor& a) {
    return unary_op(a, [](double x) { return std::fabs(x); },
                    [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Tensor pow_const(const Tensor& a, double e) {
    for (double x : a.data())
        if (x < 0 && e != std::floor(e))
            throw std::domain_error("pow_const: negative base with non-integer exponent");
    return unary_op(a, [e](double x) { return std::pow(x, e); },
                    [e](double x, double) { return x == 0.0 && e < 1.0 ? 0.0 : e * std::pow(x, e - 1.0); });
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                    [](double, double y) { return y * (1.0 - y); });
}

Tensor relu(const Tensor& a) {
    return unary_op(a, [](double x) { return x > 0 ? x : 0.0; },
                    [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Tensor sum(const Tensor& a) {
    NodeP na = a.node();
    double s = 0;
    for (double x : na->v) s += x;
    return Tensor(make_result({1}, {s}, {na}, [na](Node& n) {
        na->ensure_grad();
        for (double& g : na->g) g += n.g[0];
    }));
}

Tensor mean_all(const Tensor& a) {
    return mul_scalar(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor mean_axis(const Tensor& a, int axis) {
    NodeP na = a.node();
    if (na->shape.size() != 2) throw std::invalid_argument("mean_axis expects a 2-D tensor");
    int64_t h = na->shape[0], c = na->shape[1];
    if (axis == 0) {
        std::vector<double> out(static_cast<size_t>(c), 0.0);
        for (int64_t i = 0; i < h; ++i)
            for (int64_t j = 0; j < c; ++j) out[j] += na->v[i * c + j];
        for (auto& x : out) x /= static_cast<double>(h);
        return Tensor(make_result({1, c}, std::move(out), {na}, [na, h, c](Node& n) {
            na->ensure_grad();
            double inv = 1.0 / static_cast<double>(h);
            for (int64_t i = 0; i < h; ++i)
                for (int64_t j = 0; j < c; ++j) na->g[i * c + j] += n.g[j] * inv;
        }));
    }
    if (axis == 1) {
        std::vector<double> out(static_cast<size_t>(h), 0.0);
        for (int64_t i = 0; i < h; ++i) {
            for (int64_t j = 0; j < c; ++j) out[i] += na->v[i * c + j];
            out[i] /= static_cast<double>(c);
        }
        return Tensor(make_result({h, 1}, std::move(out), {na}, [na, h, c](Node& n) {
            na->ensure_grad();
            double inv = 1.0 / static_cast<double>(c);
            for (int64_t i = 0; i < h; ++i)
                for (int64_t j = 0; j < c; ++j) na->g[i * c + j] += n.g[i] * inv;
        }));
    }
    throw std::invalid_argument("mean_axis: axis must be 0 or 1");
}

Tensor max_axis(const Tensor& a, int axis) {
    NodeP na = a.node();
    if (na->shape.size() != 2) throw std::invalid_argument("max_axis expects a 2-D tensor");
    int64_t h = na->shape[0], c = na->shape[1];
    if (axis == 0) {
        std::vector<double> out(static_cast<size_t>(c));
        auto arg = std::make_shared<std::vector<int64_t>>(c);
        for (int64_t j = 0; j < c; ++j) {
            int64_t best = 0;
            for (int64_t i = 1; i < h; ++i)
                if (na->v[i * c + j] > na->v[best * c + j]) best = i;
            (*arg)[j] = best;
            out[j] = na->v[best * c + j];
        }
        return Tensor(make_result({1, c}, std::move(out), {na}, [na, c, arg](Node& n) {
            na->ensure_grad();
            for (int64_t j = 0; j < c; ++j) na->g[(*arg)[j] * c + j] += n.g[j];
        }));
    }
    if (axis == 1) {
        std::vector<double> out(static_cast<size_t>(h));
        auto arg = std::make_shared<std::vector<int64_t>>(h);
        for (int64_t i = 0; i < h; ++i) {
            int64_t best = 0;
            for (int64_t j = 1; j < c; ++j)
                if (na->v[i * c + j] > na->v[i * c + best]) best = j;
            (*arg)[i] = best;
            out[i] = na->v[i * c + best];
        }
        return Tensor(make_result({h, 1}, std::move(out), {na}, [na, c, arg](Node& n) {
            na->ensure_grad();
            for (int64_t i = 0; i < static_cast<int64_t>(n.v.size()); ++i)
                na->g[i * c + (*arg)[i]] += n.g[i];
        }));
    }
    throw std::invalid_argument("max_axis: axis must be 0 or 1");
}

Tensor reshape(const Tensor& a, Shape s) {
    NodeP na = a.node();
    if (shape_numel(s) != na->numel())
        throw std::invalid_argument("reshape: element count mismatch " + shape_str(na->shape) + " -> " + shape_str(s));
    return Tensor(make_result(std::move(s), na->v, {na}, [na](Node& n) {
        na->ensure_grad();
        for (size_t i = 0; i < n.v.size(); ++i) na->g[i] += n.g[i];
    }));
}

Tensor transpose2d(const Tensor& a) {
    NodeP na = a.node();
    if (na->shape.size() != 2) throw std::invalid_argument("transpose2d expects a 2-D tensor");
    int64_t h = na->shape[0], c = na->shape[1];
    std::vector<double> out(na->v.size());
    for (int64_t i = 0; i < h; ++i)
        for (int64_t j = 0; j < c; ++j) out[j * h + i] = na->v[i * c + j];
    return Tensor(make_result({c, h}, std::move(out), {na}, [na, h, c](Node& n) {
        na->ensure_grad();
        for (int64_t i = 0; i < h; ++i)
            for (int64_t j = 0; j < c; ++j) na->g[i * c + j] += n.g[j * h + i];
    }));
}

Tensor concat_axis1(const Tensor& a, const Tensor& b) {
    NodeP na = a.node(), nb = b.node();
    if (na->shape.size() != 2 || nb->shape.size() != 2 || na->shape[0] != nb->shape[0])
        throw std::invalid_argument("concat_axis1: incompatible shapes");
    int64_t h = na->shape[0], ca = na->shape[1], cb = nb->shape[1];
    std::vector<double> out(static_cast<size_t>(h * (ca + cb)));
    for (int64_t i = 0; i < h; ++i) {
        for (int64_t j = 0; j < ca; ++j) out[i * (ca + cb) + j] = na->v[i * ca + j];
        for (int64_t j = 0; j < cb; ++j) out[i * (ca + cb) + ca + j] = nb->v[i * cb + j];
    }
    return Tensor(make_result({h, ca + cb}, std::move(out), {na, nb}, [na, nb, h, ca, cb](Node& n) {
        bool wa = na->requires_grad, wb = nb->requires_grad;
        if (wa) na->ensure_grad();
        if (wb) nb->ensure_grad();
        for (int64_t i = 0; i < h; ++i) {
            if (wa)
                for (int64_t j = 0; j < ca; ++j) na->g[i * ca + j] += n.g[i * (ca + cb) + j];
            if (wb)
                for (int64_t j = 0; j < cb; ++j) nb->g[i * cb + j] += n.g[i * (ca + cb) + ca + j];
        }
    }));
}

Tensor repeat_rows(const Tensor& a, int64_t times) {
    NodeP na = a.node();
    if (na->shape.size() != 2) throw std::invalid_argument("repeat_rows expects a 2-D tensor");
    if (times < 1) throw std::invalid_argument("repeat_rows: times must be >= 1");
    int64_t h = na->shape[0], c = na->shape[1];
    std::vector<double> out(static_cast<size_t>(h * times * c));
    for (int64_t i = 0; i < h; ++i)
        for (int64_t t = 0; t < times; ++t)
            for (int64_t j = 0; j < c; ++j) out[(i * times + t) * c + j] = na->v[i * c + j];
    return Tensor(make_result({h * times, c}, std::move(out), {na}, [na, h, c, times](Node& n) {
        na->ensure_grad();
        for (int64_t i = 0; i < h; ++i)
            for (int64_t t = 0; t < times; ++t)
                for (int64_t j = 0; j < c; ++j) na->g[i * c + j] += n.g[(i * times + t) * c + j];
    }));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    NodeP na = a.node(), nb = b.node();
    if (na->shape.size() != 2 || nb->shape.size() != 2 || na->shape[1] != nb->shape[0])
        throw std::invalid_argument("matmul: incompatible shapes " + shape_str(na->shape) + " x " +
                                    shape_str(nb->shape));
    int64_t n = na->shape[0], k = na->shape[1], m = nb->shape[1];
    std::vector<double> out(static_cast<size_t>(n * m), 0.0);
    for (int64_t i = 0; i < n; ++i)
        for (int64_t p = 0; p < k; ++p) {
            double av = na->v[i * k + p];
            const double* brow = &nb->v[p * m];
            double* orow = &out[i * m];
            for (int64_t j = 0; j < m; ++j) orow[j] += av * brow[j];
        }
    return Tensor(make_result({n, m}, std::move(out), {na, nb}, [na, nb, n, k, m](Node& node) {
        bool wa = na->requires_grad, wb = nb->requires_grad;
        if (wa) na->ensure_grad();
        if (wb) nb->ensure_grad();
        if (wa) {
            // gA = g * B^T
            for (int64_t i = 0; i < n; ++i)
                for (int64_t p = 0; p < k; ++p) {
                    double acc = 0;
                    const double* grow = &node.g[i * m];
                    const double* brow = &nb->v[p * m];
                    for (int64_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
                    na->g[i * k + p] += acc;
                }
        }
        if (wb) {
            // gB = A^T * g
            for (int64_t p = 0; p < k; ++p)
                for (int64_t i = 0; i < n; ++i) {
                    double av = na->v[i * k + p];
                    const double* grow = &node.g[i * m];
                    double* brow = &nb->g[p * m];
                    for (int64_t j = 0; j < m; ++j) brow[j] += av * grow[j];
                }
        }
    }));
}

void backward(const Tensor& loss) {
    NodeP root = loss.node();
    if (!root) throw std::logic_error("backward on undefined tensor");
    if (root->numel() != 1) throw std::logic_error("backward requires a scalar loss");
    if (root->consumed) throw std::logic_error("backward: graph already consumed");
    if (!root->requires_grad) throw std::logic_error("backward: loss does not require grad");
    root->consumed = true;

    // Iterative post-order DFS for a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> visited;
    std::vector<std::pair<Node*, size_t>> stack;
    stack.emplace_back(root.get(), 0);
    visited.insert(root.get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* p = node->parents[next++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.emplace_back(p, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root->ensure_grad();
    root->g[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backprop && !node->g.empty()) node->backprop(*node);
    }
}

double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double step) {
    if (step <= 0) throw std::invalid_argument("grad_check: step must be positive");
    Tensor xg = Tensor::from_vector(x.shape(), x.data(), true);
    Tensor y = f(xg);
    backward(y);
    std::vector<double> analytic = xg.grad();
    if (analytic.empty()) analytic.assign(x.data().size(), 0.0);

    Tensor xp = Tensor::from_vector(x.shape(), x.data(), false);
    double worst = 0.0;
    NoGrad ng;
    for (size_t i = 0; i < xp.data().size(); ++i) {
        double orig = xp.data()[i];
        xp.data()[i] = orig + step;
        double up = f(xp).item();
        xp.data()[i] = orig - step;
        double dn = f(xp).item();
        xp.data()[i] = orig;
        double numeric = (up - dn) / (2.0 * step);
        double denom = std::max(1e-12, std::fabs(analytic[i]) + std::fabs(numeric));
        worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
    }
    return worst;
}

}  // namespace psfc
