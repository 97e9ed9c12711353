#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace xmint {

/// Deterministic standard-normal stream.
///
/// Draws come from a Mersenne Twister (std::mt19937_64) pushed through the
/// Marsaglia polar method. Both pieces are fully specified algorithms, so a
/// given seed always yields the same sequence regardless of the standard
/// library's own (implementation-defined) normal_distribution.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

    /// Uniform draw on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// One N(0, 1) draw.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace xmint
