#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace psfc {

/// Seeded random stream. Independent streams are derived from a base seed and
/// a stream tag so that workers and resumed runs never share state.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
    uint32_t uniform_int(uint32_t n) { return std::uniform_int_distribution<uint32_t>(0, n - 1)(eng_); }
    std::mt19937_64& engine() { return eng_; }

    /// splitmix64 mix of (seed, stream id); stable across platforms.
    static uint64_t derive(uint64_t seed, uint64_t stream) {
        uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static uint64_t derive(uint64_t seed, std::string_view tag, uint64_t stream = 0) {
        uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
        for (char c : tag) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        return derive(derive(seed, h), stream);
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace psfc
