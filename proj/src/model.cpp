#include "psfc/model.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace psfc {

Arch arch_from_string(const std::string& s) {
    std::string t;
    for (char c : s) t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "gapscn") return Arch::GAPSCN;
    if (t == "sgapscn" || t == "s-gapscn") return Arch::SGAPSCN;
    throw std::invalid_argument("unknown architecture: " + s);
}

std::string arch_name(Arch a) { return a == Arch::GAPSCN ? "gapscn" : "sgapscn"; }

void ModelConfig::validate() const {
    if (m < 2 || (m & (m - 1)) != 0) throw std::invalid_argument("m must be a power of two >= 2");
    if (k < 1 || k > 16) throw std::invalid_argument("k must be in [1,16]");
    if (cr_den != 2 && cr_den != 4 && cr_den != 8)
        throw std::invalid_argument("unsupported compression ratio 1/" + std::to_string(cr_den));
    if (m % cr_den != 0 || m / cr_den < 1)
        throw std::invalid_argument("code length m/cr_den must be a positive integer");
    if (width < 1) throw std::invalid_argument("width must be positive");
    if (attention == AttentionKind::SimplifiedGlobal)
        throw std::invalid_argument("simplified-global is not a block attention variant");
}

std::string ModelConfig::to_text() const {
    std::ostringstream os;
    os << "arch=" << arch_name(arch) << "\n"
       << "m=" << m << "\n"
       << "k=" << k << "\n"
       << "cr_den=" << cr_den << "\n"
       << "width=" << width << "\n"
       << "attention=" << attention_kind_name(attention) << "\n"
       << "with_pooling=" << (with_pooling ? 1 : 0) << "\n"
       << "no_joint_branch=" << (no_joint_branch ? 1 : 0) << "\n"
       << "no_gdn=" << (no_gdn ? 1 : 0) << "\n"
       << "identity_attention=" << (identity_attention ? 1 : 0) << "\n";
    return os.str();
}

ModelConfig ModelConfig::from_text(const std::string& text) {
    ModelConfig c;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad config line: " + line);
        std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "arch") c.arch = arch_from_string(val);
        else if (key == "m") c.m = std::stoll(val);
        else if (key == "k") c.k = std::stoll(val);
        else if (key == "cr_den") c.cr_den = std::stoi(val);
        else if (key == "width") c.width = std::stoll(val);
        else if (key == "attention") c.attention = attention_kind_from_string(val);
        else if (key == "with_pooling") c.with_pooling = val == "1";
        else if (key == "no_joint_branch") c.no_joint_branch = val == "1";
        else if (key == "no_gdn") c.no_gdn = val == "1";
        else if (key == "identity_attention") c.identity_attention = val == "1";
        else throw std::invalid_argument("unknown config key: " + key);
    }
    c.validate();
    return c;
}

namespace {

thread_local ProbeSink* g_probe = nullptr;

void probe(const std::string& name, const Tensor& t) {
    if (g_probe) g_probe->emplace_back(name, t);
}

struct Block {
    std::string label;
    explicit Block(std::string l) : label(std::move(l)) {}
    virtual Tensor forward(const Tensor& x, bool training) const = 0;
    virtual ~Block() = default;
};

using BlockP = std::unique_ptr<Block>;

// conv(k1) -> conv(k3) -> conv(k1), residual add around the stack
struct ResidualBlock {
    Conv1dLayer c1, c2, c3;
    ResidualBlock(ParamRegistry& reg, const std::string& name, int64_t width, Rng& rng)
        : c1(reg, name + ".conv1", 1, width, width, rng),
          c2(reg, name + ".conv2", 3, width, width, rng),
          c3(reg, name + ".conv3", 1, width, width, rng) {}
    Tensor forward(const Tensor& x) const { return add(x, c3(c2(c1(x)))); }
};

struct MaybeGdn {
    std::optional<GdnLayer> layer;
    MaybeGdn() = default;
    MaybeGdn(ParamRegistry& reg, const std::string& name, int64_t ch, bool inverse, bool disabled) {
        if (!disabled) layer.emplace(reg, name, ch, inverse);
    }
    Tensor operator()(const Tensor& x) const { return layer ? (*layer)(x) : x; }
};

// two branches (conv+pool / conv+pool+conv) summed, then GDN
struct CompressionResidualBlock {
    Conv1dLayer b1_conv, b2_conv1, b2_conv2;
    MaybeGdn gdn_layer;
    CompressionResidualBlock(ParamRegistry& reg, const std::string& name, int64_t cin, int64_t width,
                             bool no_gdn, Rng& rng)
        : b1_conv(reg, name + ".b1.conv", 3, cin, width, rng),
          b2_conv1(reg, name + ".b2.conv1", 3, cin, width, rng),
          b2_conv2(reg, name + ".b2.conv2", 3, width, width, rng),
          gdn_layer(reg, name + ".gdn", width, false, no_gdn) {}
    Tensor forward(const Tensor& x) const {
        Tensor b1 = maxpool1d(b1_conv(x));
        Tensor b2 = b2_conv2(maxpool1d(b2_conv1(x)));
        return gdn_layer(add(b1, b2));
    }
};

// mirror of the CRB with upsampling and IGDN
struct ReconstructionResidualBlock {
    Conv1dLayer b1_conv, b2_conv1, b2_conv2;
    MaybeGdn igdn_layer;
    ReconstructionResidualBlock(ParamRegistry& reg, const std::string& name, int64_t cin,
                                int64_t width, bool no_gdn, Rng& rng)
        : b1_conv(reg, name + ".b1.conv", 3, cin, width, rng),
          b2_conv1(reg, name + ".b2.conv1", 3, cin, width, rng),
          b2_conv2(reg, name + ".b2.conv2", 3, width, width, rng),
          igdn_layer(reg, name + ".igdn", width, true, no_gdn) {}
    Tensor forward(const Tensor& x) const {
        Tensor b1 = upsample1d(b1_conv(x));
        Tensor b2 = b2_conv2(upsample1d(b2_conv1(x)));
        return igdn_layer(add(b1, b2));
    }
};

struct AttentionSlot {
    std::optional<AttentionModule> module;
    AttentionSlot(ParamRegistry& reg, const std::string& name, const ModelConfig& cfg, int64_t h,
                  Rng& rng) {
        if (cfg.identity_attention) return;
        AttentionOptions opts;
        opts.with_pooling = cfg.with_pooling;
        opts.no_joint_branch = cfg.no_joint_branch;
        opts.se_ratio = cfg.width % 4 == 0 ? 4 : 1;
        module.emplace(reg, name, cfg.attention, h, cfg.width, opts, rng);
    }
    Tensor forward(const Tensor& x, bool training) const {
        return module ? module->forward(x, training) : x;
    }
};

struct CarbBlock : Block {
    CompressionResidualBlock crb;
    std::vector<ResidualBlock> rbs;
    AttentionSlot attention;
    MaybeGdn gdn_layer;
    std::string name;

    CarbBlock(ParamRegistry& reg, const std::string& n, const ModelConfig& cfg, int64_t cin,
              int64_t out_len, Rng& rng)
        : Block("CARB"),
          crb(reg, n + ".crb", cin, cfg.width, cfg.no_gdn, rng),
          attention(reg, n + ".att", cfg, out_len, rng),
          gdn_layer(reg, n + ".gdn", cfg.width, false, cfg.no_gdn),
          name(n) {
        for (int i = 0; i < 3; ++i) rbs.emplace_back(reg, n + ".rb" + std::to_string(i), cfg.width, rng);
    }

    Tensor forward(const Tensor& x, bool training) const override {
        Tensor crb_out = crb.forward(x);
        Tensor rb = crb_out;
        for (const auto& b : rbs) rb = b.forward(rb);
        Tensor out = add(gdn_layer(attention.forward(rb, training)), rb);
        probe(name + ".crb", crb_out);
        probe(name + ".rb", rb);
        probe(name + ".out", out);
        return out;
    }
};

struct RarbBlock : Block {
    ReconstructionResidualBlock rrb;
    std::vector<ResidualBlock> rbs;
    AttentionSlot attention;
    MaybeGdn igdn_layer;
    std::string name;

    RarbBlock(ParamRegistry& reg, const std::string& n, const ModelConfig& cfg, int64_t cin,
              int64_t out_len, Rng& rng)
        : Block("RARB"),
          rrb(reg, n + ".rrb", cin, cfg.width, cfg.no_gdn, rng),
          attention(reg, n + ".att", cfg, out_len, rng),
          igdn_layer(reg, n + ".igdn", cfg.width, true, cfg.no_gdn),
          name(n) {
        for (int i = 0; i < 3; ++i) rbs.emplace_back(reg, n + ".rb" + std::to_string(i), cfg.width, rng);
    }

    Tensor forward(const Tensor& x, bool training) const override {
        Tensor rrb_out = rrb.forward(x);
        Tensor rb = rrb_out;
        for (const auto& b : rbs) rb = b.forward(rb);
        Tensor out = add(igdn_layer(attention.forward(rb, training)), rb);
        probe(name + ".rrb", rrb_out);
        probe(name + ".rb", rb);
        probe(name + ".out", out);
        return out;
    }
};

struct GdnBlock : Block {
    MaybeGdn layer;
    GdnBlock(ParamRegistry& reg, const std::string& name, int64_t ch, bool inverse, bool disabled)
        : Block(inverse ? "IGDN" : "GDN"), layer(reg, name, ch, inverse, disabled) {}
    Tensor forward(const Tensor& x, bool) const override { return layer(x); }
};

struct ConvBlock : Block {
    Conv1dLayer conv;
    ConvBlock(ParamRegistry& reg, const std::string& name, int64_t k, int64_t cin, int64_t cout,
              Rng& rng)
        : Block("Conv"), conv(reg, name, k, cin, cout, rng) {}
    Tensor forward(const Tensor& x, bool) const override { return conv(x); }
};

struct SigmoidBlock : Block {
    SigmoidBlock() : Block("Sigmoid") {}
    Tensor forward(const Tensor& x, bool) const override { return sigmoid(x); }
};

struct UpConvBlock : Block {
    Conv1dLayer conv;
    UpConvBlock(ParamRegistry& reg, const std::string& name, int64_t cin, int64_t cout, Rng& rng)
        : Block("Upsample+Conv"), conv(reg, name, 3, cin, cout, rng) {}
    Tensor forward(const Tensor& x, bool) const override { return conv(upsample1d(x)); }
};

struct RbBlock : Block {
    ResidualBlock rb;
    RbBlock(ParamRegistry& reg, const std::string& name, int64_t width, Rng& rng)
        : Block("RB"), rb(reg, name, width, rng) {}
    Tensor forward(const Tensor& x, bool) const override { return rb.forward(x); }
};

struct MssgamBlock : Block {
    Mssgam mssgam;
    MssgamBlock(ParamRegistry& reg, const std::string& name, int64_t c, Rng& rng)
        : Block("MSSGAM"), mssgam(reg, name, c, rng) {}
    Tensor forward(const Tensor& x, bool) const override { return mssgam.forward(x); }
};

int stage_count(int cr_den) { return cr_den == 2 ? 1 : cr_den == 4 ? 2 : 3; }

}  // namespace

ProbeScope::ProbeScope(ProbeSink* sink) { g_probe = sink; }
ProbeScope::~ProbeScope() { g_probe = nullptr; }

struct Model::Impl {
    std::vector<BlockP> encoder;
    std::vector<BlockP> decoder;
};

Model::Model(const ModelConfig& config, uint64_t init_seed)
    : config_(config), init_seed_(init_seed), impl_(std::make_unique<Impl>()) {
    config_.validate();
    const int64_t m = config_.m, width = config_.width;
    const int stages = stage_count(config_.cr_den);

    // encoder: CARB stack, GDN, 1x1 conv to one channel, GDN
    Rng enc_rng(Rng::derive(init_seed, "model.encoder"));
    int64_t len = m, cin = 1;
    for (int i = 0; i < stages; ++i) {
        len /= 2;
        impl_->encoder.push_back(std::make_unique<CarbBlock>(
            params_, "enc.carb" + std::to_string(i), config_, cin, len, enc_rng));
        cin = width;
    }
    impl_->encoder.push_back(
        std::make_unique<GdnBlock>(params_, "enc.gdn", width, false, config_.no_gdn));
    impl_->encoder.push_back(std::make_unique<ConvBlock>(params_, "enc.head", 1, width, 1, enc_rng));
    impl_->encoder.push_back(
        std::make_unique<GdnBlock>(params_, "enc.gdn_code", 1, false, config_.no_gdn));

    Rng dec_rng(Rng::derive(init_seed, "model.decoder"));
    if (config_.arch == Arch::GAPSCN) {
        // decoder mirrors the encoder: RARB stack, IGDN, 1x1 conv, sigmoid
        int64_t dlen = config_.code_len(), dcin = 1;
        for (int i = 0; i < stages; ++i) {
            dlen *= 2;
            impl_->decoder.push_back(std::make_unique<RarbBlock>(
                params_, "dec.rarb" + std::to_string(i), config_, dcin, dlen, dec_rng));
            dcin = width;
        }
        impl_->decoder.push_back(
            std::make_unique<GdnBlock>(params_, "dec.igdn", width, true, config_.no_gdn));
        impl_->decoder.push_back(std::make_unique<ConvBlock>(params_, "dec.head", 1, width, 1, dec_rng));
        impl_->decoder.push_back(std::make_unique<SigmoidBlock>());
    } else {
        // lightweight decoder: restore length, one RB, MSSGAM denoiser, 1x1 conv, sigmoid
        int64_t dcin = 1;
        for (int i = 0; i < stages; ++i) {
            impl_->decoder.push_back(std::make_unique<UpConvBlock>(
                params_, "dec.up" + std::to_string(i), dcin, width, dec_rng));
            dcin = width;
        }
        impl_->decoder.push_back(std::make_unique<RbBlock>(params_, "dec.rb", width, dec_rng));
        impl_->decoder.push_back(std::make_unique<MssgamBlock>(params_, "dec.mssgam", width, dec_rng));
        impl_->decoder.push_back(std::make_unique<ConvBlock>(params_, "dec.head", 1, width, 1, dec_rng));
        impl_->decoder.push_back(std::make_unique<SigmoidBlock>());
    }
}

Model::~Model() = default;

namespace {
Tensor run_blocks(const std::vector<BlockP>& blocks, Tensor x, bool training,
                  std::vector<ShapeTraceEntry>* trace) {
    for (const auto& b : blocks) {
        Shape in = x.shape();
        x = b->forward(x, training);
        if (trace) trace->push_back({b->label, in, x.shape()});
    }
    return x;
}
}  // namespace

Tensor Model::encode(const Tensor& theta_norm, bool training,
                     std::vector<ShapeTraceEntry>* trace) const {
    if (theta_norm.shape() != Shape{config_.m, 1})
        throw std::invalid_argument("encode: expected input shape " + shape_str({config_.m, 1}) +
                                    ", got " + shape_str(theta_norm.shape()));
    return run_blocks(impl_->encoder, theta_norm, training, trace);
}

Tensor Model::decode(const Tensor& received, bool training,
                     std::vector<ShapeTraceEntry>* trace) const {
    if (received.shape() != Shape{config_.code_len(), 1})
        throw std::invalid_argument("decode: expected input shape " +
                                    shape_str({config_.code_len(), 1}) + ", got " +
                                    shape_str(received.shape()));
    return run_blocks(impl_->decoder, received, training, trace);
}

std::vector<double> Model::snapshot_params() const {
    std::vector<double> flat;
    for (const auto& p : params_.items())
        flat.insert(flat.end(), p.tensor.data().begin(), p.tensor.data().end());
    return flat;
}

void Model::restore_params(const std::vector<double>& flat) {
    size_t off = 0;
    for (auto& p : params_.items()) {
        auto& d = p.tensor.data();
        if (off + d.size() > flat.size()) throw std::logic_error("restore_params: size mismatch");
        std::copy(flat.begin() + off, flat.begin() + off + d.size(), d.begin());
        off += d.size();
    }
    if (off != flat.size()) throw std::logic_error("restore_params: size mismatch");
}

Model build_model(const ModelConfig& config, uint64_t init_seed) {
    return Model(config, init_seed);
}

}  // namespace psfc
