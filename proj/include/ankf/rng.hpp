// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ankf {

// Seeded RNG with a fixed gaussian algorithm (Box-Muller) so that streams
// are reproducible independent of the standard library's distributions.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    double uniform() {
        // 53-bit mantissa uniform in [0,1).
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    double gaussian(double stddev) { return stddev > 0.0 ? stddev * gaussian() : 0.0; }

    bool bernoulli(double p) { return uniform() < p; }

    uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ankf
