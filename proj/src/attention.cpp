#include "psfc/attention.hpp"

#include <algorithm>

namespace psfc {

AttentionKind attention_kind_from_string(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "se") return AttentionKind::SE;
    if (t == "cbam") return AttentionKind::CBAM;
    if (t == "tse") return AttentionKind::TSE;
    if (t == "triplet") return AttentionKind::Triplet;
    if (t == "global") return AttentionKind::Global;
    if (t == "simplified-global" || t == "simplifiedglobal") return AttentionKind::SimplifiedGlobal;
    throw std::invalid_argument("unknown attention kind: " + s);
}

std::string attention_kind_name(AttentionKind k) {
    switch (k) {
        case AttentionKind::SE: return "se";
        case AttentionKind::CBAM: return "cbam";
        case AttentionKind::TSE: return "tse";
        case AttentionKind::Triplet: return "triplet";
        case AttentionKind::Global: return "global";
        case AttentionKind::SimplifiedGlobal: return "simplified-global";
    }
    return "?";
}

AttentionModule::AttentionModule(ParamRegistry& reg, const std::string& prefix, AttentionKind kind,
                                 int64_t h, int64_t c, const AttentionOptions& opts, Rng& rng)
    : kind_(kind), h_(h), c_(c), opts_(opts) {
    switch (kind_) {
        case AttentionKind::SE:
        case AttentionKind::CBAM: {
            if (c % opts_.se_ratio != 0)
                throw std::invalid_argument("attention bottleneck ratio " +
                                            std::to_string(opts_.se_ratio) +
                                            " does not divide channel count " + std::to_string(c));
            int64_t hid = c / opts_.se_ratio;
            fc1_w = reg.add(prefix + ".fc1.weight", glorot_uniform({c, hid}, c, hid, rng));
            fc1_b = reg.add(prefix + ".fc1.bias", Tensor::zeros({1, hid}, true));
            fc2_w = reg.add(prefix + ".fc2.weight", glorot_uniform({hid, c}, hid, c, rng));
            fc2_b = reg.add(prefix + ".fc2.bias", Tensor::zeros({1, c}, true));
            if (kind_ == AttentionKind::CBAM) {
                spatial_conv = Conv1dLayer(reg, prefix + ".spatial", 7, 2, 1, rng);
                spatial_bn = BatchNormLayer(reg, prefix + ".bn", 1);
            }
            break;
        }
        case AttentionKind::TSE: {
            if (opts_.tse_tile == 0) opts_.tse_tile = std::max<int64_t>(h / 2, 1);
            if (h % opts_.tse_tile != 0)
                throw std::invalid_argument("TSE tile size " + std::to_string(opts_.tse_tile) +
                                            " does not divide length " + std::to_string(h));
            if (c % opts_.se_ratio != 0)
                throw std::invalid_argument("TSE bottleneck ratio does not divide channel count");
            int64_t hid = c / opts_.se_ratio;
            tse_conv1 = Conv1dLayer(reg, prefix + ".conv1", 1, c, hid, rng);
            tse_conv2 = Conv1dLayer(reg, prefix + ".conv2", 1, hid, c, rng);
            break;
        }
        case AttentionKind::Triplet:
            trip_conv1 = Conv1dLayer(reg, prefix + ".branch1", 7, 2, 1, rng);
            trip_conv2 = Conv1dLayer(reg, prefix + ".branch2", 7, 2, 1, rng);
            trip_conv3 = Conv1dLayer(reg, prefix + ".branch3", 7, 2, 1, rng);
            break;
        case AttentionKind::Global:
            if (opts_.with_pooling) {
                ga_channel = Conv1dLayer(reg, prefix + ".channel", 1, 2, 1, rng);
                ga_spatial = Conv1dLayer(reg, prefix + ".spatial", 1, 2, 1, rng);
            } else {
                ga_channel = Conv1dLayer(reg, prefix + ".channel", 1, h, h, rng);
                ga_spatial = Conv1dLayer(reg, prefix + ".spatial", 1, c, c, rng);
            }
            if (!opts_.no_joint_branch)
                ga_joint = Conv2dSingleLayer(reg, prefix + ".joint", 1, 1, rng);
            break;
        case AttentionKind::SimplifiedGlobal:
            throw std::invalid_argument(
                "simplified global attention is a scaling stage; it is used inside MSSGAM, not as a "
                "block attention variant");
    }
}

Tensor AttentionModule::forward(const Tensor& x, bool training) const {
    if (x.shape() != Shape{h_, c_})
        throw std::invalid_argument("attention input shape " + shape_str(x.shape()) +
                                    " does not match module shape " + shape_str({h_, c_}));
    switch (kind_) {
        case AttentionKind::SE: return se_forward(x);
        case AttentionKind::CBAM: return cbam_forward(x, training);
        case AttentionKind::TSE: return tse_forward(x);
        case AttentionKind::Triplet: return triplet_forward(x);
        case AttentionKind::Global: return global_forward(x);
        default: throw std::logic_error("unreachable attention kind");
    }
}

Tensor AttentionModule::se_forward(const Tensor& x) const {
    Tensor squeezed = mean_axis(x, 0);  // GAP over the spatial axis -> (1 x C)
    Tensor hidden = relu(add(matmul(squeezed, fc1_w), fc1_b));
    Tensor am = sigmoid(add(matmul(hidden, fc2_w), fc2_b));
    return mul(x, am);
}

Tensor AttentionModule::cbam_forward(const Tensor& x, bool training) const {
    auto mlp = [&](const Tensor& in) {
        return add(matmul(relu(add(matmul(in, fc1_w), fc1_b)), fc2_w), fc2_b);
    };
    Tensor am_c = sigmoid(add(mlp(mean_axis(x, 0)), mlp(max_axis(x, 0))));
    Tensor att_c = mul(x, am_c);
    Tensor pooled = concat_axis1(mean_axis(att_c, 1), max_axis(att_c, 1));  // (H x 2)
    Tensor am_s = sigmoid(spatial_bn(spatial_conv(pooled), training));
    return mul(att_c, am_s);
}

Tensor AttentionModule::tse_forward(const Tensor& x) const {
    Tensor pooled = avgpool1d(x, opts_.tse_tile);
    Tensor am = repeat_rows(sigmoid(tse_conv2(relu(tse_conv1(pooled)))), opts_.tse_tile);
    return mul(x, am);
}

Tensor AttentionModule::triplet_forward(const Tensor& x) const {
    auto rotated_branch = [&](const Conv1dLayer& conv) {
        Tensor xr = transpose2d(x);  // (C x H)
        Tensor pooled = concat_axis1(mean_axis(xr, 1), max_axis(xr, 1));
        Tensor am = sigmoid(conv(pooled));  // (C x 1)
        return transpose2d(mul(xr, am));
    };
    Tensor b1 = rotated_branch(trip_conv1);
    Tensor b2 = rotated_branch(trip_conv2);
    Tensor pooled3 = concat_axis1(mean_axis(x, 1), max_axis(x, 1));
    Tensor b3 = mul(x, sigmoid(trip_conv3(pooled3)));
    return mul_scalar(add(add(b1, b2), b3), 1.0 / 3.0);
}

Tensor AttentionModule::global_forward(const Tensor& x) const {
    Tensor att_channel, att_spatial;
    if (opts_.with_pooling) {
        Tensor xr = transpose2d(x);
        Tensor am1 = sigmoid(ga_channel(concat_axis1(mean_axis(xr, 1), max_axis(xr, 1))));
        att_channel = transpose2d(mul(xr, am1));
        Tensor am3 = sigmoid(ga_spatial(concat_axis1(mean_axis(x, 1), max_axis(x, 1))));
        att_spatial = mul(x, am3);
    } else {
        // channel branch: rotate, 1x1 conv across the rotated channel axis, rotate back
        Tensor xr = transpose2d(x);
        att_channel = transpose2d(mul(xr, sigmoid(ga_channel(xr))));
        // spatial branch: 1x1 conv, no pooling anywhere
        att_spatial = mul(x, sigmoid(ga_spatial(x)));
    }
    Tensor out = add(att_channel, att_spatial);
    if (!opts_.no_joint_branch) {
        // joint branch: treat (H x C) as a single-channel 2-D map
        Tensor att_joint = mul(x, sigmoid(ga_joint(x)));
        out = add(out, att_joint);
    }
    return out;
}

SimplifiedGlobalStage::SimplifiedGlobalStage(ParamRegistry& reg, const std::string& prefix,
                                             Direction dir, int64_t c, Rng& rng)
    : dir_(dir) {
    if (dir_ == Direction::Down) {
        value_down = Conv1dLayer(reg, prefix + ".value", 3, c, c, rng, 2);
        att_conv = Conv2dSingleLayer(reg, prefix + ".att", 3, 3, rng, 2, 1, false);
    } else {
        value_up = Conv1dTransposeLayer(reg, prefix + ".value", 3, c, c, rng, 2);
        att_conv = Conv2dSingleLayer(reg, prefix + ".att", 3, 3, rng, 2, 1, true);
    }
}

Tensor SimplifiedGlobalStage::forward(const Tensor& x) const {
    if (dir_ == Direction::Down && x.shape()[0] % 2 != 0)
        throw std::invalid_argument("simplified global downscale needs an even length");
    Tensor am = sigmoid(att_conv(x));
    Tensor value = dir_ == Direction::Down ? value_down(x) : value_up(x);
    return mul(value, am);
}

Mssgam::Mssgam(ParamRegistry& reg, const std::string& prefix, int64_t c, Rng& rng)
    : down_stage(reg, prefix + ".down", SimplifiedGlobalStage::Direction::Down, c, rng),
      up_stage(reg, prefix + ".up", SimplifiedGlobalStage::Direction::Up, c, rng),
      mid_conv(reg, prefix + ".mid", 3, c, c, rng, 2),
      final_conv(reg, prefix + ".final", 3, c, c, rng, 2) {}

Tensor Mssgam::forward(const Tensor& x) const {
    if (x.shape()[0] % 4 != 0)
        throw std::invalid_argument("MSSGAM input length must be divisible by 4, got " +
                                    std::to_string(x.shape()[0]));
    Tensor d1 = down_stage.forward(x);        // H/2
    Tensor d2 = mid_conv(d1);                 // H/4
    Tensor u1 = up_stage.forward(d2);         // H/2
    return add(final_conv(add(u1, d1)), x);   // H, residual
}

}  // namespace psfc
