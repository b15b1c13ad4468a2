#pragma once

#include <cstdint>
#include <random>

#include "jumpreach/common.hpp"

namespace jumpreach {

// splitmix64 step; used both as a seed mixer and for deriving per-trial
// streams. Trial i of a run seeded with s uses derive_seed(s, i), so the
// trial map is order-independent and worker-count independent.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return splitmix64(base ^ splitmix64(index + 1));
}

// mt19937_64 with explicit double conversions so draws do not depend on
// the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t bits() { return eng_(); }

    // uniform on (0,1), both endpoints excluded
    double uniform() {
        return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    std::uint64_t integer(std::uint64_t n) {  // uniform on {0,...,n-1}
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t v;
        do {
            v = eng_();
        } while (v >= limit);
        return v % n;
    }

    double exponential() { return -std::log(uniform()); }

    double normal() {
        // Marsaglia polar method; the spare is cached.
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        have_spare_ = true;
        return u * f;
    }

    // Counting exponential gaps keeps this exact for any lambda without
    // the e^{-lambda} underflow of the product method.
    long long poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        long long k = 0;
        double s = exponential();
        while (s < lambda) {
            ++k;
            s += exponential();
        }
        return k;
    }

    Vec normal_vec(int d) {
        Vec v(static_cast<std::size_t>(d));
        for (double& x : v) x = normal();
        return v;
    }

    Vec unit_vec(int d) {
        Vec v;
        double n;
        do {
            v = normal_vec(d);
            n = norm(v);
        } while (n == 0.0);
        return scaled(std::move(v), 1.0 / n);
    }

    Vec uniform_in_ball(const Vec& center, double radius) {
        const int d = static_cast<int>(center.size());
        Vec v = unit_vec(d);
        const double r = radius * std::pow(uniform(), 1.0 / d);
        for (std::size_t i = 0; i < center.size(); ++i) v[i] = center[i] + r * v[i];
        return v;
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace jumpreach
