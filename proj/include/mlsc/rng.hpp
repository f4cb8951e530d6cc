#pragma once

#include <cstdint>
#include <span>

namespace mlsc {

/// Counter-based uniform stream: the state is derived from
/// (seed, level, sample index), so per-level streams are independent and any
/// sample can be regenerated without sequencing.
class UniformStream {
  public:
    UniformStream(std::uint64_t seed, std::uint64_t level, std::uint64_t sample) {
        state_ = mix(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^ (level + 1)) ^ (sample + 1));
    }

    /// Next uniform draw on [-1, 1].
    double next() {
        state_ += 0x9e3779b97f4a7c15ull;
        const std::uint64_t z = mix(state_);
        return 2.0 * ((z >> 11) * 0x1.0p-53) - 1.0;
    }

    void fill(std::span<double> out) {
        for (double& v : out) v = next();
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }
    std::uint64_t state_;
};

}  // namespace mlsc
