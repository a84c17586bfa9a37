#pragma once

#include <cstdint>
#include <random>

namespace cepmc {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for replication `rep` of a run with master seed `master`.
/// Injective in `rep` for a fixed master: the argument of mix64 is an affine
/// map with odd multiplier, and mix64 itself is a bijection.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep) noexcept {
    return mix64(mix64(master) + 0x9e3779b97f4a7c15ULL * (rep + 1));
}

/// Random stream used by every sampling routine. Deterministic for a given
/// seed on a given build; not shareable across threads.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace cepmc
