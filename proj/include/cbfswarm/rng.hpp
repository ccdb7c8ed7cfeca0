#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "cbfswarm/core.hpp"

namespace cbfswarm {

/// Counter-based deterministic generator. A stream is identified by a seed
/// plus up to three lane ids (e.g. purpose, agent id, step); every draw is a
/// pure function of (key, counter). Streams never share state, so adding an
/// agent or reordering loops cannot shift anyone else's samples.
class SplitRng {
  public:
    explicit SplitRng(std::uint64_t seed, std::uint64_t lane0 = 0,
                      std::uint64_t lane1 = 0, std::uint64_t lane2 = 0) {
        key_ = mix(seed + 0x9e3779b97f4a7c15ull);
        key_ = mix(key_ ^ mix(lane0 + 0xbf58476d1ce4e5b9ull));
        key_ = mix(key_ ^ mix(lane1 + 0x94d049bb133111ebull));
        key_ = mix(key_ ^ mix(lane2 + 0xd6e8feb86659fd93ull));
    }

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the sine partner is cached.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Vec2 gauss_pair() {
        const double a = gauss();
        const double b = gauss();
        return {a, b};
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

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Draws mean + L z with L the Cholesky factor of the covariance.
inline Vec2 sample_noise(const NoiseModel& model, SplitRng& rng) {
    const Mat2 l = cholesky_lower(model.covariance);
    const Vec2 z = rng.gauss_pair();
    return model.mean + Vec2{l.m00 * z.x, l.m10 * z.x + l.m11 * z.y};
}

}  // namespace cbfswarm
