#include "psfc/params.hpp"

#include <algorithm>
#include <cmath>

#include "psfc/layers.hpp"

namespace psfc {

Tensor ParamRegistry::add(const std::string& name, Tensor t, bool trainable, Projection proj) {
    if (find(name)) throw std::logic_error("duplicate parameter name: " + name);
    items_.push_back(Param{name, t, trainable, proj});
    return t;
}

Param* ParamRegistry::find(const std::string& name) {
    for (auto& p : items_)
        if (p.name == name) return &p;
    return nullptr;
}

int64_t ParamRegistry::trainable_count() const {
    int64_t n = 0;
    for (const auto& p : items_)
        if (p.trainable) n += p.tensor.numel();
    return n;
}

int64_t ParamRegistry::trainable_count(const std::string& prefix) const {
    int64_t n = 0;
    for (const auto& p : items_)
        if (p.trainable && p.name.rfind(prefix, 0) == 0) n += p.tensor.numel();
    return n;
}

void ParamRegistry::apply_projections() {
    for (auto& p : items_) {
        if (p.projection == Projection::None) continue;
        double lo = p.projection == Projection::ClampBetaMin ? kGdnBetaMin : 0.0;
        for (double& v : p.tensor.data()) v = std::max(v, lo);
    }
}

Tensor glorot_uniform(Shape shape, int64_t fan_in, int64_t fan_out, Rng& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    int64_t n = shape_numel(shape);
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = rng.uniform(-limit, limit);
    return Tensor::from_vector(std::move(shape), std::move(v), true);
}

}  // namespace psfc
