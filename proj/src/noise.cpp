#include "occtext/noise.hpp"

#include <cmath>

namespace occtext {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
}  // namespace

std::uint64_t mix_key(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t state = a;
    std::uint64_t k = splitmix64(state);
    state ^= b + 0x2545f4914f6cdd1dULL;
    k ^= splitmix64(state);
    state ^= c + 0xda942042e4dd58b5ULL;
    k ^= splitmix64(state);
    return k;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char byte : text) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Real NormalSampler::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    while (true) {
        Real a = 2.0 * uniform() - 1.0;
        Real b = 2.0 * uniform() - 1.0;
        Real s = a * a + b * b;
        if (s > 0.0 && s < 1.0) {
            Real f = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = b * f;
            has_spare_ = true;
            return a * f;
        }
    }
}

Mat NormalSampler::matrix(Eigen::Index rows, Eigen::Index cols) {
    Mat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = normal();
        }
    }
    return m;
}

LatentTokens seeded_noise(std::uint64_t seed, TokenGrid grid, int channels) {
    require(channels >= 1, "seeded_noise: channels must be >= 1, got ", channels);
    NormalSampler sampler(mix_key(seed,
                                  static_cast<std::uint64_t>(grid.height) << 32 |
                                      static_cast<std::uint64_t>(grid.width),
                                  static_cast<std::uint64_t>(channels)));
    return LatentTokens(grid, sampler.matrix(grid.size(), channels));
}

}  // namespace occtext
