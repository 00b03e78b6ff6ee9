#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "debias/geometry.hpp"

namespace debias {

/// SplitMix64 finalizer. Bijective 64-bit mix with good avalanche.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Derives an independent sub-seed from (seed, stream).
///
/// This is the counter-based splitter used everywhere a seed spawns
/// child streams: sub = mix64(seed + (stream + 1) * golden), with the
/// SplitMix64 golden-ratio increment. Reimplementations only need this
/// one formula to reproduce every stream in the project.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;
    return mix64(seed + (stream + 1) * golden);
}

/// Named sub-seed streams of one experiment trial.
enum class SeedStream : std::uint64_t {
    Mixture = 0,
    TruthField = 1,
    PredictorField = 2,
    TrainDraw = 3,
    EvalDraw = 4,
    KdeDraw = 5,
};

inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
    return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

/// Deterministic random generator.
///
/// Wraps std::mt19937_64 (whose output sequence is fixed by the standard)
/// and applies hand-rolled transforms, so every draw is bit-reproducible
/// across platforms and standard libraries. No global state; callers own
/// the generator.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1]; safe as a log() argument.
    double uniform01_pos() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal via Box-Muller, one spare cached per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const auto [z0, z1] = normal_pair();
        spare_ = z1;
        has_spare_ = true;
        return z0;
    }

    /// A fresh independent standard-normal pair (ignores the spare cache).
    std::pair<double, double> normal_pair() {
        const double u1 = uniform01_pos();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * pi() * u2;
        return {r * std::cos(theta), r * std::sin(theta)};
    }

    /// Index draw from a normalized cumulative weight table.
    std::size_t categorical(std::span<const double> cdf) {
        const double u = uniform01();
        for (std::size_t k = 0; k + 1 < cdf.size(); ++k)
            if (u < cdf[k]) return k;
        return cdf.size() - 1;
    }

    static constexpr double pi() { return 3.141592653589793238462643383279502884; }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace debias
