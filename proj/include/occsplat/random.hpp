// Copyright Contributors to the occsplat project
// SPDX-License-Identifier: Apache-2.0

#ifndef OCCSPLAT_RANDOM_HPP
#define OCCSPLAT_RANDOM_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace occsplat {

/// Seeded generator whose draws are identical on every standard library.
/// std::uniform_real_distribution and friends are implementation-defined, so
/// the conversions to real numbers are done here.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1).
    double
    uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double
    uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    /// Standard normal via Box-Muller; one draw per call.
    double
    normal() {
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t
    next() {
        return engine_();
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace occsplat

#endif // OCCSPLAT_RANDOM_HPP
