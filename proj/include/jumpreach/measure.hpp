#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jumpreach/common.hpp"
#include "jumpreach/rng.hpp"

namespace jumpreach {

// How the driving process attached to a measure is represented in
// simulation. A compound-Poisson measure drives the raw jump sum; an
// ito_levy measure compensates jumps of norm <= 1, so integrators add
// the drift -int_{delta<|z|<=1} sigma(x,z) nu(dz).
enum class Representation { compound_poisson, ito_levy };

// Named catalog of radial tempering functions q(r).
struct Tempering {
    enum class Kind { constant, exponential, truncation };
    Kind kind = Kind::constant;
    double scale = 1.0;    // multiplies every variant
    double lambda = 1.0;   // exponential: q(r) = scale * exp(-lambda r)
    double radius = 1.0;   // truncation: q(r) = scale * 1{r <= radius}

    double operator()(double r) const;
    static Tempering constant(double c = 1.0);
    static Tempering exponential(double lambda, double c = 1.0);
    static Tempering truncation(double R, double c = 1.0);
};

struct AtomEntry {
    Vec location;
    double rate;
};

struct RadialDirection {
    Vec u;          // unit vector
    double weight;  // mass of the sphere measure at u
    // optional direction-specific radial profile, realizing q(r, u);
    // falls back to the measure-wide tempering when absent
    std::optional<Tempering> q_dir = std::nullopt;
};

// Declared support of nu: isolated points plus radial segments
// {r*direction : r in (r_lo, r_hi]}. "dense" marks measures whose support
// is all of R^d (subordinated Gaussian).
struct SupportDescription {
    struct Ray {
        Vec direction;
        double r_lo = 0.0;
        double r_hi = 0.0;  // +inf allowed
    };
    std::vector<Vec> points;
    std::vector<Ray> rays;
    bool dense = false;
    bool accumulates_at_zero = false;

    bool empty() const { return points.empty() && rays.empty() && !dense; }
};

// Immutable description of a pure-jump intensity measure on R^d.
// All queries are const and the handle is cheap to copy, so a measure can
// be shared across concurrent workers.
class IntensityMeasure {
public:
    enum class Variant { atomic, radial_polar, product, subordinated };

    static IntensityMeasure atomic(int dimension, std::vector<AtomEntry> atoms,
                                   Representation rep = Representation::compound_poisson);
    static IntensityMeasure radial_polar(int dimension, double alpha,
                                         std::vector<RadialDirection> directions,
                                         Tempering q,
                                         Representation rep = Representation::ito_levy);
    // Continuous sphere density discretized to n_directions quadrature
    // points (an approximation knob; see mass/sampling docs).
    static IntensityMeasure radial_polar_density(int dimension, double alpha,
                                                 std::function<double(const Vec&)> density,
                                                 Tempering q, int n_directions = 256,
                                                 Representation rep = Representation::ito_levy);
    static IntensityMeasure product(std::vector<IntensityMeasure> components_1d,
                                    std::vector<double> scales,
                                    std::optional<Representation> rep = std::nullopt);
    // Base process = isotropic Gaussian with covariance variance * I.
    static IntensityMeasure subordinated_gaussian(int dimension, double variance,
                                                  IntensityMeasure subordinator_1d,
                                                  double drift_beta0 = 0.0);
    static IntensityMeasure subordinated_product(IntensityMeasure base_product,
                                                 IntensityMeasure subordinator_1d,
                                                 double drift_beta0 = 0.0);

    int dimension() const;
    Variant variant() const;
    Representation representation() const;

    // nu({|z| > radius}); exact for atomic, closed-form or adaptive
    // quadrature (relative error <= 1e-8) otherwise. Throws
    // InfiniteMassError when the region has infinite mass and
    // QuadratureError when the quadrature fails to converge.
    double mass_above(double radius) const;
    double mass_of_region(int m) const { return mass_above(1.0 / m); }

    double mass_in_ball(const Vec& center, double radius) const;

    bool total_mass_finite() const;
    double total_mass() const;  // throws InfiniteMassError when infinite

    // int (|z|^2 ^ 1) nu(dz); for product measures this is the
    // per-coordinate sum criterion.
    double square_integrability() const;

    Vec sample_above(double radius, Rng& rng) const;
    Vec sample_in_ball(const Vec& center, double radius, Rng& rng) const;

    // int_{lo < |z| <= hi} z nu(dz). Finite for any 0 < lo <= hi <= 1
    // and the basis of the compensator fast path for additive models.
    Vec mean_in_annulus(double lo, double hi) const;

    // int_{lo < |z| <= hi} f(z) nu(dz) with vector-valued f, adaptive.
    Vec integrate_annulus(const std::function<Vec(const Vec&)>& f, double lo, double hi) const;

    // int_{|z| <= delta} z z^T nu(dz), row-major; small-jump covariance
    // for the Gaussian approximation mode.
    Mat small_jump_covariance(double delta) const;

    const SupportDescription& support() const;

    // Representative support points with norm <= max_norm; radial
    // segments are discretized to at most grid points each.
    std::vector<Vec> support_points(double max_norm, int grid = 64) const;

    // Accessors used by samplers and the oracle.
    const std::vector<AtomEntry>& atoms() const;                  // atomic only
    const std::vector<RadialDirection>& radial_directions() const;  // radial_polar only
    struct SubordinatedView {
        const IntensityMeasure* base_product;  // null when base is Gaussian
        double gaussian_variance;
        const IntensityMeasure* subordinator;
        double beta0;
    };
    SubordinatedView subordinated_view() const;  // subordinated only
    const std::vector<IntensityMeasure>& product_components() const;  // product only
    const std::vector<double>& product_scales() const;                // product only

private:
    struct Impl;
    explicit IntensityMeasure(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

// int_{1/m < |z| <= 1} sigma(x, z) nu(dz): the drift added to the
// truncated equation. Exact sums for atomic measures, adaptive
// quadrature otherwise.
Vec compensator_drift(const IntensityMeasure& measure,
                      const std::function<Vec(const Vec&, const Vec&)>& sigma,
                      const Vec& x, int m);

}  // namespace jumpreach
