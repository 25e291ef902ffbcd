#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace marls {

/// 64-bit finalizer used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Stable 64-bit hash of a purpose label (FNV-1a).
std::uint64_t purpose_key(std::string_view purpose) noexcept;

/**
 * Splittable pseudo-random stream.
 *
 * Each stream is an mt19937_64 engine seeded from a 64-bit key. Child streams
 * are derived from the parent key (not the engine state), so `split(x)` is a
 * pure function of the parent seed and `x`: streams for different agents or
 * purposes never share draws, and results do not depend on the order in which
 * children are created. Doubles are built from the top 53 bits of each draw,
 * which is bit-exact across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

    std::uint64_t seed() const noexcept { return seed_; }

    Rng split(std::uint64_t key) const { return Rng(mix64(seed_ ^ mix64(key + 0x9e3779b97f4a7c15ULL))); }
    Rng split(std::string_view purpose) const { return split(purpose_key(purpose)); }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

}  // namespace marls
