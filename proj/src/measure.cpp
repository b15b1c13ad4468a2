#include "jumpreach/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

namespace jumpreach {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRelTol = 1e-9;  // quadrature target, comfortably below the 1e-8 contract

double sphere_area(int d) {
    if (d == 1) return 2.0;
    return 2.0 * std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d);
}

// Adaptive Simpson on [a,b]. Throws QuadratureError instead of returning NaN.
template <typename F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm,
                    double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (!std::isfinite(delta)) throw QuadratureError("non-finite integrand in adaptive quadrature");
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0) throw QuadratureError("adaptive quadrature failed to converge");
    return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate_adaptive(const F& f, double a, double b, double tol_abs) {
    if (b <= a) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, std::max(tol_abs, 1e-300), 48);
}

}  // namespace

double Tempering::operator()(double r) const {
    switch (kind) {
        case Kind::constant: return scale;
        case Kind::exponential: return scale * std::exp(-lambda * r);
        case Kind::truncation: return r <= radius ? scale : 0.0;
    }
    return 0.0;
}

Tempering Tempering::constant(double c) {
    Tempering t;
    t.kind = Kind::constant;
    t.scale = c;
    return t;
}

Tempering Tempering::exponential(double lambda, double c) {
    Tempering t;
    t.kind = Kind::exponential;
    t.lambda = lambda;
    t.scale = c;
    return t;
}

Tempering Tempering::truncation(double R, double c) {
    Tempering t;
    t.kind = Kind::truncation;
    t.radius = R;
    t.scale = c;
    return t;
}

namespace {

// Radial integrals int_a^b r^k q(r) r^{-1-alpha} dr for k = 0,1,2.
// b may be +inf. Throws InfiniteMassError on divergence.
double radial_moment(const Tempering& q, double alpha, int k, double a, double b) {
    if (b <= a) return 0.0;
    const double p = static_cast<double>(k) - alpha;  // integrand r^{p-1} times q
    switch (q.kind) {
        case Tempering::Kind::truncation:
            b = std::min(b, q.radius);
            if (b <= a) return 0.0;
            [[fallthrough]];
        case Tempering::Kind::constant: {
            if (std::isinf(b) && p >= 0.0)
                throw InfiniteMassError("radial integral diverges at infinity (alpha too small)");
            if (a <= 0.0 && p <= 0.0)
                throw InfiniteMassError("radial integral diverges at zero");
            if (p == 0.0) return q.scale * std::log(b / a);
            const double hi = std::isinf(b) ? 0.0 : std::pow(b, p);
            const double lo = a <= 0.0 ? 0.0 : std::pow(a, p);
            return q.scale * (hi - lo) / p;
        }
        case Tempering::Kind::exponential: {
            if (a <= 0.0 && p <= 0.0)
                throw InfiniteMassError("radial integral diverges at zero");
            // integrate in log space: int e^{p s} e^{-lambda e^s} ds is
            // smooth down to s = -inf whenever p > 0
            double hi = b;
            if (std::isinf(hi)) {
                double cap = std::max(a, 1.0);
                while (std::exp(-q.lambda * cap) * std::pow(cap, std::max(p, 1.0)) >
                       1e-20 * q.lambda)
                    cap *= 2.0;
                hi = cap;
            }
            const double s_hi = std::log(hi);
            const double s_lo = a > 0.0 ? std::log(a) : s_hi - 44.0 / p;
            const auto g = [&](double s) {
                const double r = std::exp(s);
                return std::exp(p * s) * std::exp(-q.lambda * r);
            };
            const double rough =
                (s_hi - s_lo) * std::max({g(s_lo), g(s_hi), g(0.5 * (s_lo + s_hi))});
            return q.scale *
                   integrate_adaptive(g, s_lo, s_hi, kRelTol * std::max(rough, 1e-12));
        }
    }
    return 0.0;
}

// Inverse-CDF / rejection sampling of the radial density q(r) r^{-1-alpha}
// restricted to (a, b].
double sample_radius(const Tempering& q, double alpha, double a, double b, Rng& rng) {
    if (q.kind == Tempering::Kind::truncation) b = std::min(b, q.radius);
    if (b <= a) throw EmptyRegionError("empty radial interval");
    if (q.kind != Tempering::Kind::exponential) {
        const double u = rng.uniform();
        if (alpha == 0.0) {
            if (std::isinf(b)) throw InfiniteMassError("untruncated alpha=0 radial measure");
            return a * std::pow(b / a, u);  // log-uniform
        }
        if (std::isinf(b)) return a * std::pow(u, -1.0 / alpha);
        const double ca = std::pow(a, -alpha), cb = std::pow(b, -alpha);
        return std::pow(ca - u * (ca - cb), -1.0 / alpha);
    }
    // exponential tempering: envelope rejection
    for (int attempt = 0; attempt < 1000000; ++attempt) {
        if (alpha > 0.0) {
            // Pareto proposal, accept with exp(-lambda (r - a))
            double r;
            if (std::isinf(b)) {
                r = a * std::pow(rng.uniform(), -1.0 / alpha);
            } else {
                const double ca = std::pow(a, -alpha), cb = std::pow(b, -alpha);
                r = std::pow(ca - rng.uniform() * (ca - cb), -1.0 / alpha);
            }
            if (rng.uniform() <= std::exp(-q.lambda * (r - a))) return r;
        } else {
            // shifted-exponential proposal, accept with (a/r)^{1+alpha}
            const double r = a + rng.exponential() / q.lambda;
            if (!std::isinf(b) && r > b) continue;
            if (rng.uniform() <= std::pow(a / r, 1.0 + alpha)) return r;
        }
    }
    throw QuadratureError("radial rejection sampler exceeded attempt budget");
}

// Intersection of the ray {r u : r > 0} with the open ball B(c, eps):
// returns (lo, hi) with lo < hi, or an empty interval.
std::pair<double, double> ray_ball_interval(const Vec& u, const Vec& c, double eps) {
    const double uc = dot(u, c);
    const double disc = uc * uc - (norm2(c) - eps * eps);
    if (disc <= 0.0) return {0.0, 0.0};
    const double s = std::sqrt(disc);
    const double lo = std::max(uc - s, 0.0);
    const double hi = uc + s;
    if (hi <= lo) return {0.0, 0.0};
    return {lo, hi};
}

double chi_square_survival(int d, double x) {  // P(chi^2_d > x)
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * d, 0.5 * x);
}

double chi_square_cdf(int d, double x) {
    if (x <= 0.0) return 0.0;
    return boost::math::gamma_p(0.5 * d, 0.5 * x);
}

}  // namespace

struct IntensityMeasure::Impl {
    Variant variant;
    int dimension = 1;
    Representation rep = Representation::compound_poisson;

    // atomic
    std::vector<AtomEntry> atoms;

    // radial polar
    double alpha = 0.0;
    std::vector<RadialDirection> directions;
    Tempering q;

    const Tempering& dir_q(const RadialDirection& dir) const {
        return dir.q_dir ? *dir.q_dir : q;
    }

    // product
    std::vector<IntensityMeasure> components;
    std::vector<double> scales;

    // subordinated
    std::shared_ptr<const IntensityMeasure> base;  // product base, or null for Gaussian
    double gaussian_variance = 1.0;
    std::shared_ptr<const IntensityMeasure> subordinator;
    double beta0 = 0.0;

    SupportDescription support;
};

IntensityMeasure::IntensityMeasure(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

int IntensityMeasure::dimension() const { return impl_->dimension; }
IntensityMeasure::Variant IntensityMeasure::variant() const { return impl_->variant; }
Representation IntensityMeasure::representation() const { return impl_->rep; }
const SupportDescription& IntensityMeasure::support() const { return impl_->support; }

const std::vector<AtomEntry>& IntensityMeasure::atoms() const {
    if (impl_->variant != Variant::atomic)
        throw std::logic_error("atoms() requires an atomic measure");
    return impl_->atoms;
}

const std::vector<RadialDirection>& IntensityMeasure::radial_directions() const {
    if (impl_->variant != Variant::radial_polar)
        throw std::logic_error("radial_directions() requires a radial-polar measure");
    return impl_->directions;
}

const std::vector<IntensityMeasure>& IntensityMeasure::product_components() const {
    if (impl_->variant != Variant::product)
        throw std::logic_error("product_components() requires a product measure");
    return impl_->components;
}

const std::vector<double>& IntensityMeasure::product_scales() const {
    if (impl_->variant != Variant::product)
        throw std::logic_error("product_scales() requires a product measure");
    return impl_->scales;
}

IntensityMeasure::SubordinatedView IntensityMeasure::subordinated_view() const {
    if (impl_->variant != Variant::subordinated)
        throw std::logic_error("subordinated_view() requires a subordinated measure");
    return {impl_->base.get(), impl_->gaussian_variance, impl_->subordinator.get(), impl_->beta0};
}

IntensityMeasure IntensityMeasure::atomic(int dimension, std::vector<AtomEntry> atoms,
                                          Representation rep) {
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
    auto impl = std::make_shared<Impl>();
    impl->variant = Variant::atomic;
    impl->dimension = dimension;
    impl->rep = rep;
    for (const auto& a : atoms) {
        if (static_cast<int>(a.location.size()) != dimension)
            throw std::invalid_argument("atom dimension mismatch");
        if (norm(a.location) <= 0.0)
            throw std::invalid_argument("intensity measures give no mass to the origin");
        if (!(a.rate > 0.0)) throw std::invalid_argument("atom rates must be positive");
        impl->support.points.push_back(a.location);
    }
    impl->atoms = std::move(atoms);
    return IntensityMeasure(std::move(impl));
}

IntensityMeasure IntensityMeasure::radial_polar(int dimension, double alpha,
                                                std::vector<RadialDirection> directions,
                                                Tempering q, Representation rep) {
    if (dimension < 1) throw std::invalid_argument("dimension must be >= 1");
    if (!(alpha >= 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in [0,2)");
    if (directions.empty()) throw std::invalid_argument("at least one direction required");
    auto impl = std::make_shared<Impl>();
    impl->variant = Variant::radial_polar;
    impl->dimension = dimension;
    impl->rep = rep;
    impl->alpha = alpha;
    impl->q = q;
    for (auto& dir : directions) {
        if (static_cast<int>(dir.u.size()) != dimension)
            throw std::invalid_argument("direction dimension mismatch");
        const double n = norm(dir.u);
        if (n <= 0.0 || !(dir.weight > 0.0))
            throw std::invalid_argument("directions must be nonzero with positive weight");
        dir.u = scaled(dir.u, 1.0 / n);
        const Tempering& dq = dir.q_dir ? *dir.q_dir : q;
        SupportDescription::Ray ray;
        ray.direction = dir.u;
        ray.r_lo = 0.0;
        ray.r_hi = dq.kind == Tempering::Kind::truncation ? dq.radius : kInf;
        impl->support.rays.push_back(std::move(ray));
    }
    impl->support.accumulates_at_zero = true;
    impl->directions = std::move(directions);
    // reject configurations with infinite mass on some annulus Z_m
    for (const auto& dir : impl->directions)
        radial_moment(impl->dir_q(dir), impl->alpha, 0, 1.0, kInf);
    if (rep == Representation::compound_poisson && alpha >= 1.0)
        throw std::invalid_argument(
            "compound-Poisson representation needs finite variation (alpha < 1)");
    return IntensityMeasure(std::move(impl));
}

IntensityMeasure IntensityMeasure::radial_polar_density(int dimension, double alpha,
                                                        std::function<double(const Vec&)> density,
                                                        Tempering q, int n_directions,
                                                        Representation rep) {
    if (n_directions < 1) throw std::invalid_argument("n_directions must be >= 1");
    std::vector<RadialDirection> dirs;
    if (dimension == 1) {
        for (double s : {1.0, -1.0}) {
            Vec u{s};
            const double w = density(u);
            if (w > 0.0) dirs.push_back({u, w});
        }
    } else if (dimension == 2) {
        for (int k = 0; k < n_directions; ++k) {
            const double phi = 2.0 * M_PI * (k + 0.5) / n_directions;
            Vec u{std::cos(phi), std::sin(phi)};
            const double w = density(u) * sphere_area(2) / n_directions;
            if (w > 0.0) dirs.push_back({std::move(u), w});
        }
    } else {
        // deterministic quasi-uniform grid from a fixed-seed stream
        Rng grid_rng(0x5EEDull ^ static_cast<std::uint64_t>(dimension));
        for (int k = 0; k < n_directions; ++k) {
            Vec u = grid_rng.unit_vec(dimension);
            const double w = density(u) * sphere_area(dimension) / n_directions;
            if (w > 0.0) dirs.push_back({std::move(u), w});
        }
    }
    if (dirs.empty()) throw std::invalid_argument("sphere density vanishes on the whole grid");
    return radial_polar(dimension, alpha, std::move(dirs), q, rep);
}

IntensityMeasure IntensityMeasure::product(std::vector<IntensityMeasure> components_1d,
                                           std::vector<double> scales,
                                           std::optional<Representation> rep) {
    if (components_1d.empty() || components_1d.size() != scales.size())
        throw std::invalid_argument("product needs matching non-empty components and scales");
    auto impl = std::make_shared<Impl>();
    impl->variant = Variant::product;
    impl->dimension = static_cast<int>(components_1d.size());
    bool all_raw = true;
    for (std::size_t i = 0; i < components_1d.size(); ++i) {
        if (components_1d[i].dimension() != 1)
            throw std::invalid_argument("product components must be one-dimensional");
        if (scales[i] == 0.0) throw std::invalid_argument("product scales must be nonzero");
        all_raw = all_raw &&
                  components_1d[i].representation() == Representation::compound_poisson;
        const auto& sup = components_1d[i].support();
        const int d = impl->dimension;
        for (const auto& p : sup.points)
            impl->support.points.push_back(basis(d, static_cast<int>(i), scales[i] * p[0]));
        for (const auto& ray : sup.rays) {
            SupportDescription::Ray em;
            const double s = scales[i] * ray.direction[0];
            em.direction = basis(d, static_cast<int>(i), s > 0.0 ? 1.0 : -1.0);
            em.r_lo = ray.r_lo * std::abs(scales[i]);
            em.r_hi = ray.r_hi * std::abs(scales[i]);
            impl->support.rays.push_back(std::move(em));
            impl->support.accumulates_at_zero =
                impl->support.accumulates_at_zero || em.r_lo == 0.0;
        }
    }
    impl->rep = rep.value_or(all_raw ? Representation::compound_poisson
                                     : Representation::ito_levy);
    impl->components = std::move(components_1d);
    impl->scales = std::move(scales);
    // per-coordinate integrability sum: sum_i int (|b_i x|^2 ^ 1) nu_i(dx)
    double total = 0.0;
    for (std::size_t i = 0; i < impl->components.size(); ++i) {
        const double b = std::abs(impl->scales[i]);
        const IntensityMeasure& c = impl->components[i];
        total += b * b * c.small_jump_covariance(1.0 / b)[0] + c.mass_above(1.0 / b);
    }
    if (!std::isfinite(total)) throw InfiniteMassError("product integrability sum diverges");
    return IntensityMeasure(std::move(impl));
}

IntensityMeasure IntensityMeasure::subordinated_gaussian(int dimension, double variance,
                                                         IntensityMeasure subordinator_1d,
                                                         double drift_beta0) {
    if (dimension < 1 || !(variance > 0.0))
        throw std::invalid_argument("subordinated_gaussian needs dimension >= 1, variance > 0");
    if (drift_beta0 != 0.0)
        throw std::invalid_argument(
            "a Gaussian base with subordinator drift is not a pure-jump process; use beta0 = 0");
    auto impl = std::make_shared<Impl>();
    impl->variant = Variant::subordinated;
    impl->dimension = dimension;
    impl->rep = Representation::ito_levy;
    impl->gaussian_variance = variance;
    impl->subordinator = std::make_shared<IntensityMeasure>(std::move(subordinator_1d));
    impl->beta0 = 0.0;
    const auto& sup = impl->subordinator->support();
    for (const auto& p : sup.points)
        if (p[0] <= 0.0) throw std::invalid_argument("subordinator must live on (0, inf)");
    for (const auto& ray : sup.rays)
        if (ray.direction[0] < 0.0)
            throw std::invalid_argument("subordinator must live on (0, inf)");
    // int (1 ^ s) rho(ds) < inf
    const double m1 =
        impl->subordinator->integrate_annulus([](const Vec& s) { return Vec{s[0]}; }, 0.0, 1.0)[0];
    if (!std::isfinite(m1)) throw InfiniteMassError("subordinator fails int(1^s) rho(ds) < inf");
    impl->support.dense = true;
    impl->support.accumulates_at_zero = true;
    return IntensityMeasure(std::move(impl));
}

IntensityMeasure IntensityMeasure::subordinated_product(IntensityMeasure base_product,
                                                        IntensityMeasure subordinator_1d,
                                                        double drift_beta0) {
    if (base_product.variant() != Variant::product)
        throw std::invalid_argument("subordinated_product expects a product base");
    if (drift_beta0 < 0.0) throw std::invalid_argument("beta0 must be >= 0");
    auto impl = std::make_shared<Impl>();
    impl->variant = Variant::subordinated;
    impl->dimension = base_product.dimension();
    impl->rep = base_product.representation();
    impl->base = std::make_shared<IntensityMeasure>(std::move(base_product));
    impl->subordinator = std::make_shared<IntensityMeasure>(std::move(subordinator_1d));
    impl->beta0 = drift_beta0;
    const double m1 =
        impl->subordinator->integrate_annulus([](const Vec& s) { return Vec{s[0]}; }, 0.0, 1.0)[0];
    if (!std::isfinite(m1)) throw InfiniteMassError("subordinator fails int(1^s) rho(ds) < inf");
    impl->support = impl->base->support();  // declared: base support (sums thereof omitted)
    return IntensityMeasure(std::move(impl));
}

namespace {

// integral of f over (0, S] against a 1-D measure, optionally adding the
// measure's mass beyond S for integrands that approach 1 at infinity.
double integrate_1d_capped(const IntensityMeasure& m, const std::function<double(double)>& f,
                           double S, bool tail_is_one) {
    double v = m.integrate_annulus([&](const Vec& z) { return Vec{f(z[0])}; }, 0.0, S)[0];
    if (tail_is_one) v += m.mass_above(S);
    return v;
}

}  // namespace

double IntensityMeasure::mass_above(double radius) const {
    if (!(radius > 0.0)) throw std::invalid_argument("mass_above needs radius > 0");
    const Impl& im = *impl_;
    switch (im.variant) {
        case Variant::atomic: {
            double s = 0.0;
            for (const auto& a : im.atoms)
                if (norm(a.location) > radius) s += a.rate;
            return s;
        }
        case Variant::radial_polar: {
            double s = 0.0;
            for (const auto& dir : im.directions)
                s += dir.weight * radial_moment(im.dir_q(dir), im.alpha, 0, radius, kInf);
            return s;
        }
        case Variant::product: {
            double s = 0.0;
            for (std::size_t i = 0; i < im.components.size(); ++i)
                s += im.components[i].mass_above(radius / std::abs(im.scales[i]));
            return s;
        }
        case Variant::subordinated: {
            double s = 0.0;
            // P(|X_s| > radius) for a compound base has no closed form
            if (im.base)
                throw QuadratureError(
                    "mass queries for product-base subordinated measures are unsupported; "
                    "use path sampling");
            const int d = im.dimension;
            const double v = im.gaussian_variance;
            const auto tail = [&](double t) {
                return t <= 0.0 ? 0.0 : chi_square_survival(d, radius * radius / (t * v));
            };
            // beyond S the conditional tail is ~1 and each subordinator
            // jump counts with its full rate
            double S = std::max(1.0, radius * radius / v);
            while (tail(S) < 1.0 - 1e-10 && S < 1e30) S *= 4.0;
            s += integrate_1d_capped(*im.subordinator, tail, S, true);
            return s;
        }
    }
    return 0.0;
}

bool IntensityMeasure::total_mass_finite() const {
    const Impl& im = *impl_;
    switch (im.variant) {
        case Variant::atomic: return true;
        case Variant::radial_polar:
            try {
                for (const auto& dir : im.directions)
                    radial_moment(im.dir_q(dir), im.alpha, 0, 0.0, kInf);
                return true;
            } catch (const InfiniteMassError&) {
                return false;
            }
        case Variant::product:
            for (const auto& c : im.components)
                if (!c.total_mass_finite()) return false;
            return true;
        case Variant::subordinated: return im.subordinator->total_mass_finite();
    }
    return true;
}

double IntensityMeasure::total_mass() const {
    const Impl& im = *impl_;
    switch (im.variant) {
        case Variant::atomic: {
            double s = 0.0;
            for (const auto& a : im.atoms) s += a.rate;
            return s;
        }
        case Variant::radial_polar: {
            double s = 0.0;
            for (const auto& dir : im.directions)
                s += dir.weight * radial_moment(im.dir_q(dir), im.alpha, 0, 0.0, kInf);
            return s;
        }
        case Variant::product: {
            double s = 0.0;
            for (const auto& c : im.components) s += c.total_mass();
            return s;
        }
        case Variant::subordinated:
            return im.subordinator->total_mass() +
                   (im.base && im.beta0 > 0.0 ? im.beta0 * im.base->total_mass() : 0.0);
    }
    return 0.0;
}

double IntensityMeasure::square_integrability() const {
    const Impl& im = *impl_;
    switch (im.variant) {
        case Variant::atomic: {
            double s = 0.0;
            for (const auto& a : im.atoms) s += a.rate * std::min(norm2(a.location), 1.0);
            return s;
        }
        case Variant::radial_polar: {
            double s = 0.0;
            for (const auto& dir : im.directions)
                s += dir.weight * (radial_moment(im.dir_q(dir), im.alpha, 2, 0.0, 1.0) +
                                   radial_moment(im.dir_q(dir), im.alpha, 0, 1.0, kInf));
            return s;
        }
        case Variant::product: {
            double s = 0.0;
            for (std::size_t i = 0; i < im.components.size(); ++i) {
                const double b = std::abs(im.scales[i]);
                s += b * b * im.components[i].small_jump_covariance(1.0 / b)[0] +
                     im.components[i].mass_above(1.0 / b);
            }
            return s;
        }
        case Variant::subordinated: {
            if (im.base) {
                // upper bound: every subordinator jump contributes at most 1
                if (!im.subordinator->total_mass_finite())
                    throw QuadratureError(
                        "square integrability for product-base subordination needs a "
                        "finite-mass subordinator");
                return im.subordinator->total_mass() +
                       im.beta0 * im.base->square_integrability();
            }
            const int d = im.dimension;
            const double v = im.gaussian_variance;
            // bounded by min(d s v, 1), which is exactly 1 beyond 1/(d v)
            const auto f = [&](double s) { return std::min(d * s * v, 1.0); };
            return integrate_1d_capped(*im.subordinator, f, 1.0 / (d * v), true);
        }
    }
    return 0.0;
}

double IntensityMeasure::mass_in_ball(const Vec& center, double radius) const {
    const Impl& im = *impl_;
    if (static_cast<int>(center.size()) != im.dimension)
        throw std::invalid_argument("ball center dimension mismatch");
    switch (im.variant) {
        case Variant::atomic: {
            double s = 0.0;
            for (const auto& a : im.atoms)
                if (dist(a.location, center) < radius) s += a.rate;
            return s;
        }
        case Variant::radial_polar: {
            double s = 0.0;
            for (const auto& dir : im.directions) {
                const auto [lo, hi] = ray_ball_interval(dir.u, center, radius);
                if (hi > lo) s += dir.weight * radial_moment(im.dir_q(dir), im.alpha, 0, lo, hi);
            }
            return s;
        }
        case Variant::product: {
            double s = 0.0;
            const double r2 = radius * radius;
            const double c2 = norm2(center);
            for (std::size_t i = 0; i < im.components.size(); ++i) {
                const double ci = center[i];
                const double slack = r2 - (c2 - ci * ci);
                if (slack <= 0.0) continue;
                const double h = std::sqrt(slack);
                const double b = im.scales[i];
                s += im.components[i].mass_in_ball(Vec{ci / b}, h / std::abs(b));
            }
            return s;
        }
        case Variant::subordinated: {
            if (im.base)
                throw QuadratureError(
                    "mass queries for product-base subordinated measures are unsupported");
            const double v = im.gaussian_variance;
            if (im.dimension == 1) {
                const double c = center[0];
                const auto f = [&](double s) {
                    const double sd = std::sqrt(s * v);
                    return 0.5 * (std::erf((c + radius) / (sd * M_SQRT2)) -
                                  std::erf((c - radius) / (sd * M_SQRT2)));
                };
                // window probability decays like s^{-1/2}; cap where the
                // remainder is negligible
                double S = std::max(1.0, (norm2(center) + radius * radius) / v);
                while (f(S) > 1e-12 && S < 1e30) S *= 4.0;
                return integrate_1d_capped(*im.subordinator, f, S, false);
            }
            // d > 1: rigorous positive lower bound via the density minimum
            const int d = im.dimension;
            const double far2 = (norm(center) + radius) * (norm(center) + radius);
            const double vol = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0) *
                               std::pow(radius, d);
            const auto f = [&](double s) {
                const double sv = s * v;
                return vol * std::pow(2.0 * M_PI * sv, -0.5 * d) *
                       std::exp(-0.5 * far2 / sv);
            };
            double S = std::max(1.0, far2 / v);
            while (f(S) > 1e-15 && S < 1e30) S *= 4.0;
            return integrate_1d_capped(*im.subordinator, f, S, false);
        }
    }
    return 0.0;
}

Vec IntensityMeasure::sample_above(double radius, Rng& rng) const {
    const Impl& im = *impl_;
    switch (im.variant) {
        case Variant::atomic: {
            double total = 0.0;
            for (const auto& a : im.atoms)
                if (norm(a.location) > radius) total += a.rate;
            if (total <= 0.0) throw EmptyRegionError("no atoms beyond the requested radius");
            double u = rng.uniform() * total;
            for (const auto& a : im.atoms) {
                if (norm(a.location) <= radius) continue;
                u -= a.rate;
                if (u <= 0.0) return a.location;
            }
            return im.atoms.back().location;
        }
        case Variant::radial_polar: {
            std::vector<double> mass(im.directions.size());
            double total = 0.0;
            for (std::size_t i = 0; i < im.directions.size(); ++i) {
                mass[i] = im.directions[i].weight *
                          radial_moment(im.dir_q(im.directions[i]), im.alpha, 0, radius, kInf);
                total += mass[i];
            }
            if (total <= 0.0) throw EmptyRegionError("radial region has zero mass");
            double u = rng.uniform() * total;
            std::size_t pick = im.directions.size() - 1;
            for (std::size_t i = 0; i < mass.size(); ++i) {
                u -= mass[i];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            const double r =
                sample_radius(im.dir_q(im.directions[pick]), im.alpha, radius, kInf, rng);
            return scaled(im.directions[pick].u, r);
        }
        case Variant::product: {
            std::vector<double> mass(im.components.size());
            double total = 0.0;
            for (std::size_t i = 0; i < im.components.size(); ++i) {
                mass[i] = im.components[i].mass_above(radius / std::abs(im.scales[i]));
                total += mass[i];
            }
            if (total <= 0.0) throw EmptyRegionError("product region has zero mass");
            double u = rng.uniform() * total;
            std::size_t pick = im.components.size() - 1;
            for (std::size_t i = 0; i < mass.size(); ++i) {
                u -= mass[i];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            const Vec x =
                im.components[pick].sample_above(radius / std::abs(im.scales[pick]), rng);
            return basis(im.dimension, static_cast<int>(pick), im.scales[pick] * x[0]);
        }
        case Variant::subordinated: {
            if (im.base)
                throw QuadratureError(
                    "region sampling for product-base subordinated measures is unsupported; "
                    "use path sampling");
            // draw s from rho weighted by the conditional tail, then a
            // conditioned Gaussian by rejection
            const auto& sub = *im.subordinator;
            if (sub.variant() == Variant::atomic) {
                const auto& satoms = sub.atoms();
                std::vector<double> mass(satoms.size());
                double total = 0.0;
                for (std::size_t j = 0; j < satoms.size(); ++j) {
                    mass[j] = satoms[j].rate *
                              chi_square_survival(im.dimension,
                                                  radius * radius /
                                                      (satoms[j].location[0] *
                                                       im.gaussian_variance));
                    total += mass[j];
                }
                if (total <= 0.0) throw EmptyRegionError("subordinated region has zero mass");
                double u = rng.uniform() * total;
                std::size_t pick = satoms.size() - 1;
                for (std::size_t j = 0; j < mass.size(); ++j) {
                    u -= mass[j];
                    if (u <= 0.0) {
                        pick = j;
                        break;
                    }
                }
                const double sd = std::sqrt(satoms[pick].location[0] * im.gaussian_variance);
                for (int attempt = 0; attempt < 1000000; ++attempt) {
                    Vec z = rng.normal_vec(im.dimension);
                    for (double& zi : z) zi *= sd;
                    if (norm(z) > radius) return z;
                }
                throw QuadratureError("conditioned Gaussian rejection exceeded attempt budget");
            }
            throw QuadratureError(
                "region sampling needs an atomic subordinator; use path sampling");
        }
    }
    throw std::logic_error("unreachable");
}

Vec IntensityMeasure::sample_in_ball(const Vec& center, double radius, Rng& rng) const {
    const Impl& im = *impl_;
    switch (im.variant) {
        case Variant::atomic: {
            double total = 0.0;
            for (const auto& a : im.atoms)
                if (dist(a.location, center) < radius) total += a.rate;
            if (total <= 0.0) throw EmptyRegionError("ball contains no atoms");
            double u = rng.uniform() * total;
            for (const auto& a : im.atoms) {
                if (dist(a.location, center) >= radius) continue;
                u -= a.rate;
                if (u <= 0.0) return a.location;
            }
            return im.atoms.back().location;
        }
        case Variant::radial_polar: {
            std::vector<double> mass(im.directions.size());
            std::vector<std::pair<double, double>> ivs(im.directions.size());
            double total = 0.0;
            for (std::size_t i = 0; i < im.directions.size(); ++i) {
                ivs[i] = ray_ball_interval(im.directions[i].u, center, radius);
                mass[i] = ivs[i].second > ivs[i].first
                              ? im.directions[i].weight *
                                    radial_moment(im.dir_q(im.directions[i]), im.alpha, 0,
                                                  ivs[i].first, ivs[i].second)
                              : 0.0;
                total += mass[i];
            }
            if (total <= 0.0) throw EmptyRegionError("ball has zero mass");
            double u = rng.uniform() * total;
            std::size_t pick = im.directions.size() - 1;
            for (std::size_t i = 0; i < mass.size(); ++i) {
                u -= mass[i];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            const double r = sample_radius(im.dir_q(im.directions[pick]), im.alpha,
                                           ivs[pick].first, ivs[pick].second, rng);
            return scaled(im.directions[pick].u, r);
        }
        default: {
            // rejection from the enclosing annulus
            const double lo = std::max(norm(center) - radius, 0.0);
            if (mass_in_ball(center, radius) <= 0.0)
                throw EmptyRegionError("ball has zero mass");
            for (int attempt = 0; attempt < 1000000; ++attempt) {
                Vec z = sample_above(std::max(lo, 1e-12), rng);
                if (dist(z, center) < radius) return z;
            }
            throw QuadratureError("ball rejection sampler exceeded attempt budget");
        }
    }
}

Vec IntensityMeasure::mean_in_annulus(double lo, double hi) const {
    const Impl& im = *impl_;
    Vec out = zeros(im.dimension);
    if (hi <= lo) return out;
    switch (im.variant) {
        case Variant::atomic: {
            for (const auto& a : im.atoms) {
                const double n = norm(a.location);
                if (n > lo && n <= hi) axpy(a.rate, a.location, out);
            }
            return out;
        }
        case Variant::radial_polar: {
            for (const auto& dir : im.directions) {
                const double m1 = radial_moment(im.dir_q(dir), im.alpha, 1, lo, hi);
                axpy(dir.weight * m1, dir.u, out);
            }
            return out;
        }
        case Variant::product: {
            for (std::size_t i = 0; i < im.components.size(); ++i) {
                const double b = im.scales[i];
                const Vec m = im.components[i].mean_in_annulus(lo / std::abs(b), hi / std::abs(b));
                out[i] += b * m[0];
            }
            return out;
        }
        case Variant::subordinated: {
            if (!im.base) return out;  // centred Gaussian mixture: zero by symmetry
            throw QuadratureError(
                "mean_in_annulus is unsupported for product-base subordination");
        }
    }
    return out;
}

Vec IntensityMeasure::integrate_annulus(const std::function<Vec(const Vec&)>& f, double lo,
                                        double hi) const {
    const Impl& im = *impl_;
    if (hi <= lo) return zeros(im.dimension > 0 ? static_cast<int>(f(zeros(im.dimension)).size()) : 1);
    switch (im.variant) {
        case Variant::atomic: {
            Vec out;
            bool first = true;
            for (const auto& a : im.atoms) {
                const double n = norm(a.location);
                if (!(n > lo && n <= hi)) continue;
                Vec v = f(a.location);
                if (first) {
                    out = zeros(static_cast<int>(v.size()));
                    first = false;
                }
                axpy(a.rate, v, out);
            }
            if (first) out = zeros(static_cast<int>(f(im.atoms.empty()
                                                          ? zeros(im.dimension)
                                                          : im.atoms.front().location)
                                                        .size()));
            return out;
        }
        case Variant::radial_polar: {
            // componentwise quadrature over each ray, in log space so power
            // singularities at r = 0 become smooth exponentials
            Vec probe = f(scaled(im.directions.front().u, std::max(lo, 1e-6)));
            Vec out = zeros(static_cast<int>(probe.size()));
            for (const auto& dir : im.directions) {
                const Tempering& dq = im.dir_q(dir);
                double hi_eff = hi;
                if (std::isinf(hi_eff)) {
                    if (dq.kind == Tempering::Kind::truncation)
                        hi_eff = dq.radius;
                    else if (dq.kind == Tempering::Kind::exponential)
                        hi_eff = std::max(lo, 1.0) + 60.0 / dq.lambda;
                    else
                        throw QuadratureError(
                            "integrate_annulus needs a finite outer radius for untruncated "
                            "measures");
                }
                if (dq.kind == Tempering::Kind::truncation)
                    hi_eff = std::min(hi_eff, dq.radius);
                if (hi_eff <= lo) continue;
                const double s_hi = std::log(hi_eff);
                double s_lo;
                if (lo > 0.0) {
                    s_lo = std::log(lo);
                } else {
                    // extend downward until the integrand is negligible;
                    // a growing integrand means a genuine divergence
                    s_lo = s_hi - 30.0;
                    const auto probe_g = [&](double s) {
                        const double r = std::exp(s);
                        double mx = 0.0;
                        const Vec v = f(scaled(dir.u, r));
                        for (double c : v) mx = std::max(mx, std::abs(c));
                        return mx * dq(r) * std::exp(-im.alpha * s);
                    };
                    double tail = probe_g(s_lo);
                    int guard = 0;
                    while (tail > 1e-14 && guard < 20) {
                        if (probe_g(s_lo - 15.0) > tail)
                            throw InfiniteMassError("annulus integral diverges at the origin");
                        s_lo -= 30.0;
                        tail = probe_g(s_lo);
                        ++guard;
                    }
                }
                for (std::size_t c = 0; c < out.size(); ++c) {
                    const auto g = [&](double s) {
                        const double r = std::exp(s);
                        return f(scaled(dir.u, r))[c] * dq(r) * std::exp(-im.alpha * s);
                    };
                    out[c] += dir.weight *
                              integrate_adaptive(g, s_lo, s_hi, kRelTol * 1e-3 + 1e-14);
                }
            }
            return out;
        }
        case Variant::product: {
            Vec out;
            bool first = true;
            for (std::size_t i = 0; i < im.components.size(); ++i) {
                const double b = im.scales[i];
                const auto g = [&](const Vec& x) {
                    return f(basis(im.dimension, static_cast<int>(i), b * x[0]));
                };
                Vec v = im.components[i].integrate_annulus(g, lo / std::abs(b),
                                                           hi / std::abs(b));
                if (first) {
                    out = std::move(v);
                    first = false;
                } else {
                    axpy(1.0, v, out);
                }
            }
            return out;
        }
        case Variant::subordinated: {
            if (im.base)
                throw QuadratureError(
                    "integrate_annulus is unsupported for product-base subordination");
            if (im.dimension != 1)
                throw QuadratureError(
                    "integrate_annulus for subordinated measures is implemented in 1-D only");
            const double v = im.gaussian_variance;
            const auto g = [&](const Vec& s_vec) {
                const double s = s_vec[0];
                const double sd = std::sqrt(s * v);
                // E[f(Z) 1{lo < |Z| <= hi}], Z ~ N(0, s v), by quadrature
                const auto h = [&](double z) {
                    const double phi =
                        std::exp(-0.5 * z * z / (sd * sd)) / (sd * std::sqrt(2.0 * M_PI));
                    return (f(Vec{z})[0] + f(Vec{-z})[0]) * phi;
                };
                const double cap = std::min(hi, sd * 10.0);
                if (cap <= lo) return Vec{0.0};
                return Vec{integrate_adaptive(h, std::max(lo, 1e-300), cap, 1e-14)};
            };
            return im.subordinator->integrate_annulus(g, 0.0, kInf);
        }
    }
    throw std::logic_error("unreachable");
}

Mat IntensityMeasure::small_jump_covariance(double delta) const {
    const Impl& im = *impl_;
    const int d = im.dimension;
    Mat cov(static_cast<std::size_t>(d) * d, 0.0);
    switch (im.variant) {
        case Variant::atomic: {
            for (const auto& a : im.atoms) {
                if (norm(a.location) > delta) continue;
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        cov[i * d + j] += a.rate * a.location[i] * a.location[j];
            }
            return cov;
        }
        case Variant::radial_polar: {
            for (const auto& dir : im.directions) {
                const double m2 = radial_moment(im.dir_q(dir), im.alpha, 2, 0.0, delta);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j)
                        cov[i * d + j] += dir.weight * m2 * dir.u[i] * dir.u[j];
            }
            return cov;
        }
        case Variant::product: {
            for (std::size_t i = 0; i < im.components.size(); ++i) {
                const double b = im.scales[i];
                const double m2 = im.components[i].integrate_annulus(
                    [](const Vec& z) { return Vec{z[0] * z[0]}; }, 0.0,
                    delta / std::abs(b))[0];
                cov[i * d + i] += b * b * m2;
            }
            return cov;
        }
        case Variant::subordinated: {
            if (im.base) throw QuadratureError("unsupported for product-base subordination");
            const double v = im.gaussian_variance;
            const auto f = [&](double s) {
                // E[|Z|^2 1{|Z| <= delta}]/d for Z ~ N(0, s v I_d)
                return s * v * chi_square_cdf(d + 2, delta * delta / (s * v));
            };
            double S = std::max(1.0, delta * delta / v);
            while (f(S) > 1e-15 * delta * delta && S < 1e30) S *= 4.0;
            const double c = integrate_1d_capped(*im.subordinator, f, S, false);
            for (int i = 0; i < d; ++i) cov[i * d + i] = c;
            return cov;
        }
    }
    return cov;
}

std::vector<Vec> IntensityMeasure::support_points(double max_norm, int grid) const {
    const Impl& im = *impl_;
    std::vector<Vec> pts;
    for (const auto& p : im.support.points)
        if (norm(p) <= max_norm) pts.push_back(p);
    for (const auto& ray : im.support.rays) {
        const double hi = std::min(ray.r_hi, max_norm);
        const double lo = ray.r_lo;
        if (hi <= lo) continue;
        const int n = std::max(grid, 1);
        for (int k = 1; k <= n; ++k) {
            const double r = lo + (hi - lo) * k / n;
            pts.push_back(scaled(ray.direction, r));
        }
    }
    return pts;
}

Vec compensator_drift(const IntensityMeasure& measure,
                      const std::function<Vec(const Vec&, const Vec&)>& sigma, const Vec& x,
                      int m) {
    if (m < 1) throw std::invalid_argument("truncation index must be >= 1");
    if (m == 1) return zeros(measure.dimension());
    return measure.integrate_annulus([&](const Vec& z) { return sigma(x, z); }, 1.0 / m, 1.0);
}

bool solve_linear(Mat m, Vec rhs, Vec& x, double* condition_estimate) {
    const std::size_t d = rhs.size();
    double max_entry = 0.0;
    for (double v : m) max_entry = std::max(max_entry, std::abs(v));
    if (max_entry == 0.0) return false;
    double min_pivot = kInf;
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(m[r * d + col]) > std::abs(m[piv * d + col])) piv = r;
        if (piv != col) {
            for (std::size_t c = 0; c < d; ++c) std::swap(m[col * d + c], m[piv * d + c]);
            std::swap(rhs[col], rhs[piv]);
        }
        const double p = m[col * d + col];
        if (std::abs(p) < 1e-13 * max_entry) return false;
        min_pivot = std::min(min_pivot, std::abs(p));
        for (std::size_t r = col + 1; r < d; ++r) {
            const double f = m[r * d + col] / p;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < d; ++c) m[r * d + c] -= f * m[col * d + c];
            rhs[r] -= f * rhs[col];
        }
    }
    x.assign(d, 0.0);
    for (std::size_t ri = d; ri-- > 0;) {
        double s = rhs[ri];
        for (std::size_t c = ri + 1; c < d; ++c) s -= m[ri * d + c] * x[c];
        x[ri] = s / m[ri * d + ri];
    }
    if (condition_estimate) *condition_estimate = max_entry / min_pivot;
    return true;
}

}  // namespace jumpreach
