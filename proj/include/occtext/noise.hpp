#pragma once

#include "occtext/types.hpp"

#include <cstdint>
#include <random>

namespace occtext {

// Deterministic randomness. Every random quantity in the toy pipeline is drawn
// through NormalSampler so that runs are reproducible bit-for-bit:
//
//   * engine: std::mt19937_64 seeded directly with the 64-bit key. The
//     engine's output sequence is fixed by the C++ standard, so identical
//     keys give identical raw streams on every platform.
//   * uniforms: u = (x >> 11) * 2^-53, i.e. the top 53 bits of each raw
//     64-bit output mapped into [0, 1).
//   * normals: Marsaglia polar method. Draw a = 2u1 - 1, b = 2u2 - 1 until
//     0 < s = a^2 + b^2 < 1, then emit a * sqrt(-2 ln(s) / s) and keep the
//     b-scaled mate as the next sample.
//
// Values are consumed in call order; matrices fill row-major (token-major).

/// Mixes words into a single 64-bit stream key (splitmix64 finalizer chain).
std::uint64_t mix_key(std::uint64_t a, std::uint64_t b = 0x9e3779b97f4a7c15ULL,
                      std::uint64_t c = 0);

/// 64-bit FNV-1a hash of a byte string, used to key prompt conditioning.
std::uint64_t fnv1a64(const std::string& text);

class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t key) : engine_(key) {}

    Real uniform() {
        return static_cast<Real>(engine_() >> 11) * 0x1.0p-53;
    }

    Real normal();

    /// rows x cols matrix of standard normals, filled row-major.
    Mat matrix(Eigen::Index rows, Eigen::Index cols);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    Real spare_ = 0.0;
};

/// Shared initial latent z_0: standard-normal entries keyed only by
/// (seed, grid, channels). Bit-identical for identical arguments.
LatentTokens seeded_noise(std::uint64_t seed, TokenGrid grid, int channels);

}  // namespace occtext
