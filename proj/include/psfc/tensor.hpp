#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace psfc {

using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);

struct Node;
using NodeP = std::shared_ptr<Node>;

/// One recorded operation (or leaf) on the tape. Values live in `v`,
/// gradients are allocated lazily in `g` during backward.
struct Node {
    Shape shape;
    std::vector<double> v;
    std::vector<double> g;
    bool requires_grad = false;
    bool consumed = false;
    std::vector<NodeP> parents;
    // Pulls this node's gradient into its parents' gradients.
    std::function<void(Node&)> backprop;

    int64_t numel() const { return static_cast<int64_t>(v.size()); }
    void ensure_grad() {
        if (g.size() != v.size()) g.assign(v.size(), 0.0);
    }
};

/// Dense row-major tensor of 64-bit floats with reverse-mode autodiff.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(NodeP n) : n_(std::move(n)) {}

    static Tensor zeros(Shape s, bool requires_grad = false);
    static Tensor full(Shape s, double value, bool requires_grad = false);
    static Tensor from_vector(Shape s, std::vector<double> v, bool requires_grad = false);
    static Tensor scalar(double v, bool requires_grad = false);

    bool defined() const { return n_ != nullptr; }
    const Shape& shape() const { return n_->shape; }
    int64_t dim(size_t i) const { return n_->shape[i]; }
    int64_t numel() const { return n_->numel(); }
    std::vector<double>& data() { return n_->v; }
    const std::vector<double>& data() const { return n_->v; }
    const std::vector<double>& grad() const { return n_->g; }
    bool requires_grad() const { return n_->requires_grad; }
    void zero_grad() { n_->g.assign(n_->v.size(), 0.0); }
    double item() const;
    NodeP node() const { return n_; }

private:
    NodeP n_;
};

/// Autodiff recording is on by default; NoGrad disables it for a scope.
bool grad_enabled();
struct NoGrad {
    NoGrad();
    ~NoGrad();
    bool prev;
};

// Elementwise ops with trailing-axis broadcasting (rank <= 3).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor add_scalar(const Tensor& a, double c);
Tensor mul_scalar(const Tensor& a, double c);
Tensor abs(const Tensor& a);
Tensor pow_const(const Tensor& a, double e);
Tensor sigmoid(const Tensor& a);
Tensor relu(const Tensor& a);

// Reductions.
Tensor sum(const Tensor& a);
Tensor mean_all(const Tensor& a);
// 2-D only; keep the reduced axis with size 1.
Tensor mean_axis(const Tensor& a, int axis);
Tensor max_axis(const Tensor& a, int axis);

// Shape manipulation.
Tensor reshape(const Tensor& a, Shape s);
Tensor transpose2d(const Tensor& a);
Tensor concat_axis1(const Tensor& a, const Tensor& b);
/// Repeat every row `times` times (nearest-neighbor upscale along axis 0).
Tensor repeat_rows(const Tensor& a, int64_t times);

// (n x k) * (k x m) matrix product.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Reverse-mode sweep from a scalar loss. Gradients accumulate additively
/// into every reachable node with requires_grad.
void backward(const Tensor& loss);

/// Max relative error between analytic and central-difference gradients of a
/// scalar-valued function at x.
double grad_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double step);

}  // namespace psfc
