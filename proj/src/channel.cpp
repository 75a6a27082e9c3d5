#include "psfc/channel.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace psfc {

std::vector<QpsVector> sample_qps(int64_t m, int64_t k, int64_t count, uint64_t seed) {
    if (m < 1 || k < 1 || count < 0) throw std::invalid_argument("sample_qps: bad dimensions");
    Rng rng(Rng::derive(seed, "qps.sample"));
    const uint32_t levels = 1u << k;
    std::vector<QpsVector> out;
    out.reserve(static_cast<size_t>(count));
    for (int64_t i = 0; i < count; ++i) {
        QpsVector q;
        q.k = k;
        q.indices.resize(static_cast<size_t>(m));
        for (auto& idx : q.indices) idx = rng.uniform_int(levels);
        out.push_back(std::move(q));
    }
    return out;
}

Tensor normalize(const QpsVector& q) {
    const double scale = 1.0 / static_cast<double>(q.levels());
    std::vector<double> v(q.indices.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = q.indices[i] * scale;
    return Tensor::from_vector({q.m(), 1}, std::move(v));
}

QpsVector requantize(const Tensor& theta_hat, int64_t k) {
    QpsVector q;
    q.k = k;
    const double levels = static_cast<double>(int64_t{1} << k);
    const uint32_t mask_mod = (1u << k);
    q.indices.reserve(theta_hat.data().size());
    for (double x : theta_hat.data()) {
        // round half-up, wrap onto the circular grid
        int64_t idx = static_cast<int64_t>(std::floor(x * levels + 0.5));
        idx %= mask_mod;
        if (idx < 0) idx += mask_mod;
        q.indices.push_back(static_cast<uint32_t>(idx));
    }
    return q;
}

Tensor apply_channel(const Tensor& code, const ChannelSpec& spec, Rng& rng) {
    if (code.numel() == 0) throw std::invalid_argument("apply_channel: empty code");
    Tensor scaled = spec.gain == 1.0 ? code : mul_scalar(code, spec.gain);
    if (spec.noiseless) return scaled;

    double power = 0.0;
    for (double c : code.data()) power += c * c;
    power /= static_cast<double>(code.numel());
    if (power == 0.0)
        throw std::domain_error("apply_channel: zero code power, SNR is ill-defined");

    const double sigma = std::sqrt(power / std::pow(10.0, spec.snr_db / 10.0));
    std::vector<double> n(static_cast<size_t>(code.numel()));
    for (auto& x : n) x = sigma * rng.normal();
    Tensor noise = Tensor::from_vector(code.shape(), std::move(n));
    return add(scaled, noise);
}

namespace {

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("QPS1: truncated file");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void save_qps1(const std::string& path, const QpsDataset& ds) {
    if (ds.k > 8) throw std::invalid_argument("QPS1 stores one byte per index; K must be <= 8");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f.write("QPS1", 4);
    put_u32(f, static_cast<uint32_t>(ds.m));
    put_u32(f, static_cast<uint32_t>(ds.k));
    put_u32(f, static_cast<uint32_t>(ds.samples.size()));
    std::vector<unsigned char> row(static_cast<size_t>(ds.m));
    for (const auto& q : ds.samples) {
        if (q.m() != ds.m) throw std::invalid_argument("QPS1: inconsistent sample length");
        for (size_t i = 0; i < row.size(); ++i) row[i] = static_cast<unsigned char>(q.indices[i]);
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

QpsDataset load_qps1(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "QPS1", 4) != 0)
        throw std::runtime_error("QPS1: bad magic in " + path);
    QpsDataset ds;
    ds.m = get_u32(f);
    ds.k = get_u32(f);
    uint32_t count = get_u32(f);
    if (ds.m < 1 || ds.k < 1 || ds.k > 8) throw std::runtime_error("QPS1: bad header in " + path);
    ds.samples.resize(count);
    std::vector<unsigned char> row(static_cast<size_t>(ds.m));
    const uint32_t levels = 1u << ds.k;
    for (auto& q : ds.samples) {
        if (!f.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size())))
            throw std::runtime_error("QPS1: truncated payload in " + path);
        q.k = ds.k;
        q.indices.assign(row.begin(), row.end());
        for (uint32_t idx : q.indices)
            if (idx >= levels) throw std::runtime_error("QPS1: index out of range in " + path);
    }
    return ds;
}

uint64_t qps1_checksum(const QpsDataset& ds) {
    uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](uint64_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    mix(static_cast<uint64_t>(ds.m));
    mix(static_cast<uint64_t>(ds.k));
    for (const auto& q : ds.samples)
        for (uint32_t idx : q.indices) mix(idx & 0xff);
    return h;
}

}  // namespace psfc
