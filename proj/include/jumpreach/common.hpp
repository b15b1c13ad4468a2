#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace jumpreach {

using Vec = std::vector<double>;

// Errors are split by origin so callers can react (retry with a larger
// cutoff, report quadrature trouble, ...) instead of parsing strings.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyRegionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InfiniteMassError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, double when)
        : std::runtime_error(what), time(when) {}
    double time;
};

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vec& a) { return dot(a, a); }

inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double dist(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

inline Vec add(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline Vec sub(Vec a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

inline Vec scaled(Vec a, double c) {
    for (double& x : a) x *= c;
    return a;
}

inline void axpy(double c, const Vec& x, Vec& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline Vec zeros(int d) { return Vec(static_cast<std::size_t>(d), 0.0); }

inline Vec basis(int d, int i, double c = 1.0) {
    Vec e = zeros(d);
    e[static_cast<std::size_t>(i)] = c;
    return e;
}

inline bool all_finite(const Vec& a) {
    for (double x : a)
        if (!std::isfinite(x)) return false;
    return true;
}

// d x d row-major matrix helpers used by the matrix-coefficient models.
using Mat = std::vector<double>;

inline Vec mat_apply(const Mat& m, const Vec& x) {
    const std::size_t d = x.size();
    Vec y(d, 0.0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) y[i] += m[i * d + j] * x[j];
    return y;
}

// Solves m * x = rhs by Gaussian elimination with partial pivoting.
// Returns false when a pivot falls below the singularity threshold.
bool solve_linear(Mat m, Vec rhs, Vec& x, double* condition_estimate = nullptr);

enum class TriState { yes, no, inconclusive };

inline const char* to_string(TriState t) {
    switch (t) {
        case TriState::yes: return "true";
        case TriState::no: return "false";
        default: return "inconclusive";
    }
}

}  // namespace jumpreach
