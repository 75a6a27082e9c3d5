#pragma once

#include "psfc/rng.hpp"
#include "psfc/tensor.hpp"

#include <string>
#include <vector>

namespace psfc {

/// Constraint re-applied after every optimizer step.
enum class Projection { None, ClampBetaMin, ClampNonNegative };

struct Param {
    std::string name;
    Tensor tensor;
    bool trainable = true;
    Projection projection = Projection::None;
};

/// Ordered, uniquely named parameter collection for one model.
class ParamRegistry {
public:
    Tensor add(const std::string& name, Tensor t, bool trainable = true,
               Projection proj = Projection::None);
    Param* find(const std::string& name);
    const std::vector<Param>& items() const { return items_; }
    std::vector<Param>& items() { return items_; }
    int64_t trainable_count() const;
    /// Sum of trainable element counts for params whose name starts with prefix.
    int64_t trainable_count(const std::string& prefix) const;
    void apply_projections();

private:
    std::vector<Param> items_;
};

/// Glorot-uniform kernel with fan counts (fan_in, fan_out).
Tensor glorot_uniform(Shape shape, int64_t fan_in, int64_t fan_out, Rng& rng);

}  // namespace psfc
