#pragma once

#include <cstdint>
#include <random>
#include <utility>

namespace faten {

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent stream seed for `stream` under `master`.
///
/// Replication k of a sweep uses derive_seed(master, k); inside a panel each
/// random component draws from derive_seed(panel_seed, component_id).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(derive_seed(master, stream)),
                      static_cast<std::uint32_t>(derive_seed(master, stream) >> 32)};
    return Rng(seq);
}

/// Standard normal draws bound to one engine (the distribution caches a spare draw).
class NormalStream {
public:
    NormalStream(std::uint64_t master, std::uint64_t stream) : rng_(make_rng(master, stream)) {}
    explicit NormalStream(Rng rng) : rng_(std::move(rng)) {}

    double operator()() { return dist_(rng_); }
    Rng& engine() { return rng_; }

private:
    Rng rng_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace faten
