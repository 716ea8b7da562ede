#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace eventqa {

/// Portable seeded generator.
///
/// std::mt19937_64 is fully specified by the standard, but the std distributions
/// are not, so every draw goes through the helpers below. Identical seeds give
/// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive), unbiased by rejection.
    int uniform_int(int lo, int hi);

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i - 1)));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Per-scene substream seed: base seed xor scene index, then mixed.
inline std::uint64_t scene_seed(std::uint64_t base, std::uint64_t scene_index) {
    return mix_seed(base ^ scene_index);
}

/// 64-bit FNV-1a over a byte string (config hashes, split assignment).
std::uint64_t fnv1a64(const void* data, std::size_t size);

}  // namespace eventqa
