#include "psfc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

namespace psfc {

namespace {

constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void put_u64(std::ostream& os, uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

uint32_t get_u32(std::istream& is) {
    uint32_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 4)) throw CheckpointError("checkpoint: truncated file");
    return v;
}

uint64_t get_u64(std::istream& is) {
    uint64_t v;
    if (!is.read(reinterpret_cast<char*>(&v), 8)) throw CheckpointError("checkpoint: truncated file");
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    uint32_t len = get_u32(is);
    std::string s(len, '\0');
    if (!is.read(s.data(), len)) throw CheckpointError("checkpoint: truncated string");
    return s;
}

void put_payload(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

void get_payload(std::istream& is, std::vector<double>& v) {
    if (!is.read(reinterpret_cast<char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double))))
        throw CheckpointError("checkpoint: truncated payload");
}

void put_record(std::ostream& os, const std::string& name, const Shape& dims,
                const std::vector<double>& payload) {
    put_string(os, name);
    put_u32(os, static_cast<uint32_t>(dims.size()));
    for (int64_t d : dims) put_u64(os, static_cast<uint64_t>(d));
    put_payload(os, payload);
}

struct Record {
    std::string name;
    Shape dims;
    std::vector<double> payload;
};

Record get_record(std::istream& is) {
    Record r;
    r.name = get_string(is);
    uint32_t rank = get_u32(is);
    if (rank > 8) throw CheckpointError("checkpoint: implausible tensor rank");
    int64_t numel = 1;
    for (uint32_t i = 0; i < rank; ++i) {
        int64_t d = static_cast<int64_t>(get_u64(is));
        if (d < 0 || d > (1 << 28)) throw CheckpointError("checkpoint: implausible dimension");
        r.dims.push_back(d);
        numel *= d;
    }
    r.payload.resize(static_cast<size_t>(numel));
    get_payload(is, r.payload);
    return r;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, uint64_t init_seed,
                     const AdamState* adam, int64_t completed_epochs) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open for writing: " + path);
    f.write("PSFC", 4);
    put_u32(f, kVersion);
    put_string(f, model.config().to_text());
    put_u64(f, init_seed);
    put_u64(f, static_cast<uint64_t>(completed_epochs));

    const auto& items = model.params().items();
    put_u32(f, static_cast<uint32_t>(items.size()));
    for (const auto& p : items) put_record(f, p.name, p.tensor.shape(), p.tensor.data());

    if (adam && adam->initialized()) {
        put_u32(f, 1);
        put_u64(f, static_cast<uint64_t>(adam->t));
        size_t slot = 0;
        for (const auto& p : items) {
            if (!p.trainable) continue;
            put_record(f, p.name + "#m", p.tensor.shape(), adam->m[slot]);
            put_record(f, p.name + "#v", p.tensor.shape(), adam->v[slot]);
            ++slot;
        }
    } else {
        put_u32(f, 0);
    }
    if (!f) throw CheckpointError("write failed: " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw CheckpointError("cannot open: " + path);
    char magic[4];
    if (!f.read(magic, 4) || std::memcmp(magic, "PSFC", 4) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path);
    uint32_t version = get_u32(f);
    if (version != kVersion)
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));

    LoadedCheckpoint out;
    out.config = ModelConfig::from_text(get_string(f));
    out.init_seed = get_u64(f);
    out.completed_epochs = static_cast<int64_t>(get_u64(f));
    out.model = std::make_unique<Model>(out.config, out.init_seed);

    uint32_t count = get_u32(f);
    auto& items = out.model->params().items();
    if (count != items.size())
        throw CheckpointError("checkpoint: parameter count mismatch in " + path);
    for (auto& p : items) {
        Record r = get_record(f);
        if (r.name != p.name)
            throw CheckpointError("checkpoint: unknown or out-of-order parameter " + r.name);
        if (r.dims != p.tensor.shape())
            throw CheckpointError("checkpoint: shape mismatch for " + r.name);
        p.tensor.data() = std::move(r.payload);
    }

    uint32_t has_adam = get_u32(f);
    if (has_adam) {
        AdamState adam;
        adam.init_for(out.model->params());
        adam.t = static_cast<int64_t>(get_u64(f));
        size_t slot = 0;
        for (const auto& p : items) {
            if (!p.trainable) continue;
            Record rm = get_record(f), rv = get_record(f);
            if (rm.name != p.name + "#m" || rv.name != p.name + "#v")
                throw CheckpointError("checkpoint: optimizer record mismatch at " + p.name);
            if (rm.payload.size() != adam.m[slot].size() || rv.payload.size() != adam.v[slot].size())
                throw CheckpointError("checkpoint: optimizer payload size mismatch at " + p.name);
            adam.m[slot] = std::move(rm.payload);
            adam.v[slot] = std::move(rv.payload);
            ++slot;
        }
        out.adam = std::move(adam);
    }
    return out;
}

}  // namespace psfc
