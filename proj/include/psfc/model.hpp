#pragma once

#include "psfc/attention.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace psfc {

enum class Arch { GAPSCN, SGAPSCN };

Arch arch_from_string(const std::string& s);
std::string arch_name(Arch a);

struct ModelConfig {
    Arch arch = Arch::GAPSCN;
    int64_t m = 128;
    int64_t k = 8;
    int cr_den = 2;  // compression ratio 1/cr_den
    int64_t width = 64;
    AttentionKind attention = AttentionKind::Global;
    // ablation toggles
    bool with_pooling = false;
    bool no_joint_branch = false;
    bool no_gdn = false;
    bool identity_attention = false;  // test-only pass-through attention

    void validate() const;
    int64_t code_len() const { return m / cr_den; }
    std::string to_text() const;
    static ModelConfig from_text(const std::string& text);
};

struct ShapeTraceEntry {
    std::string label;
    Shape in, out;
};

/// Sink for block-internal activations, used by wiring tests.
using ProbeSink = std::vector<std::pair<std::string, Tensor>>;
struct ProbeScope {
    explicit ProbeScope(ProbeSink* sink);
    ~ProbeScope();
};

class Model {
public:
    Model(const ModelConfig& config, uint64_t init_seed);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    ~Model();

    const ModelConfig& config() const { return config_; }
    uint64_t init_seed() const { return init_seed_; }

    Tensor encode(const Tensor& theta_norm, bool training = false,
                  std::vector<ShapeTraceEntry>* trace = nullptr) const;
    Tensor decode(const Tensor& received, bool training = false,
                  std::vector<ShapeTraceEntry>* trace = nullptr) const;

    ParamRegistry& params() { return params_; }
    const ParamRegistry& params() const { return params_; }
    int64_t param_count() const { return params_.trainable_count(); }
    int64_t encoder_param_count() const { return params_.trainable_count("enc."); }
    int64_t decoder_param_count() const { return params_.trainable_count("dec."); }

    std::vector<double> snapshot_params() const;
    void restore_params(const std::vector<double>& flat);

private:
    struct Impl;
    ModelConfig config_;
    uint64_t init_seed_;
    ParamRegistry params_;
    std::unique_ptr<Impl> impl_;
};

Model build_model(const ModelConfig& config, uint64_t init_seed);

}  // namespace psfc
