#pragma once

#include "psfc/model.hpp"
#include "psfc/train.hpp"

#include <optional>
#include <string>

namespace psfc {

/// Thrown on bad magic, truncation, version or name mismatches.
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Self-describing binary snapshot: magic "PSFC", format version, the model
/// config as key-value text, one record per parameter (name, dims, f64
/// payload), then optional Adam moment records. All integers little-endian.
void save_checkpoint(const std::string& path, const Model& model, uint64_t init_seed,
                     const AdamState* adam = nullptr, int64_t completed_epochs = 0);

struct LoadedCheckpoint {
    ModelConfig config;
    uint64_t init_seed = 0;
    int64_t completed_epochs = 0;
    std::unique_ptr<Model> model;
    std::optional<AdamState> adam;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace psfc
