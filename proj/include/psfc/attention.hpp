#pragma once

#include "psfc/modules.hpp"

#include <memory>
#include <string>

namespace psfc {

enum class AttentionKind { SE, CBAM, TSE, Triplet, Global, SimplifiedGlobal };

AttentionKind attention_kind_from_string(const std::string& s);
std::string attention_kind_name(AttentionKind k);

struct AttentionOptions {
    int64_t se_ratio = 4;     // FC bottleneck; must divide the channel count
    int64_t tse_tile = 0;     // 0 -> H/2
    bool with_pooling = false;     // ablation: pooled squeeze inside global attention
    bool no_joint_branch = false;  // ablation: drop the joint channel-spatial branch
};

/// One attention mechanism instantiated for a fixed (H x C) feature map.
/// Output shape always equals input shape; attention maps are sigmoid-valued.
class AttentionModule {
public:
    AttentionModule(ParamRegistry& reg, const std::string& prefix, AttentionKind kind, int64_t h,
                    int64_t c, const AttentionOptions& opts, Rng& rng);
    Tensor forward(const Tensor& x, bool training) const;
    AttentionKind kind() const { return kind_; }

private:
    AttentionKind kind_;
    int64_t h_, c_;
    AttentionOptions opts_;

    // SE / CBAM shared-MLP weights
    Tensor fc1_w, fc1_b, fc2_w, fc2_b;
    // CBAM spatial stage
    Conv1dLayer spatial_conv;
    BatchNormLayer spatial_bn;
    // TSE squeeze convs
    Conv1dLayer tse_conv1, tse_conv2;
    // Triplet branch convs
    Conv1dLayer trip_conv1, trip_conv2, trip_conv3;
    // Global attention branches
    Conv1dLayer ga_spatial, ga_channel;
    Conv2dSingleLayer ga_joint;

    Tensor se_forward(const Tensor& x) const;
    Tensor cbam_forward(const Tensor& x, bool training) const;
    Tensor tse_forward(const Tensor& x) const;
    Tensor triplet_forward(const Tensor& x) const;
    Tensor global_forward(const Tensor& x) const;
};

/// Simplified global attention stage: joint attention map at the target scale
/// times a strided value convolution. Down halves H, up doubles it.
class SimplifiedGlobalStage {
public:
    enum class Direction { Down, Up };
    SimplifiedGlobalStage(ParamRegistry& reg, const std::string& prefix, Direction dir, int64_t c,
                          Rng& rng);
    Tensor forward(const Tensor& x) const;

private:
    Direction dir_;
    Conv1dLayer value_down;
    Conv1dTransposeLayer value_up;
    Conv2dSingleLayer att_conv;
};

/// Multi-scale simplified global attention: two downscales (first attentive),
/// two upscales (first attentive), with skip and residual additions.
class Mssgam {
public:
    Mssgam(ParamRegistry& reg, const std::string& prefix, int64_t c, Rng& rng);
    Tensor forward(const Tensor& x) const;

private:
    SimplifiedGlobalStage down_stage, up_stage;
    Conv1dLayer mid_conv;
    Conv1dTransposeLayer final_conv;
};

}  // namespace psfc
