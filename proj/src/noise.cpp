#include "jumpreach/noise.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace jumpreach {

int annulus_index_of(double mark_norm) {
    if (mark_norm > 1.0) return 1;
    if (mark_norm <= 0.0) throw std::invalid_argument("mark norm must be positive");
    // smallest m with mark_norm > 1/m
    const double raw = 1.0 / mark_norm;
    int m = static_cast<int>(std::floor(raw)) + 1;
    while (m > 1 && mark_norm > 1.0 / (m - 1)) --m;  // float-boundary repair
    return m;
}

namespace {

void finalize_common(NoiseRealization& out, const IntensityMeasure& measure) {
    std::sort(out.jumps.begin(), out.jumps.end(),
              [](const Jump& a, const Jump& b) { return a.time < b.time; });
    if (out.representation == Representation::ito_levy) {
        out.compensator_mean = measure.mean_in_annulus(out.cutoff, 1.0);
    } else {
        out.compensator_mean = zeros(measure.dimension());
    }
    if (out.mode == SmallJumpMode::gaussian_approximation)
        out.small_jump_cov = measure.small_jump_covariance(out.cutoff);
}

}  // namespace

NoiseRealization sample_noise(const IntensityMeasure& measure, double horizon, double cutoff,
                              SmallJumpMode mode, std::uint64_t seed) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be positive");
    if (horizon < 0.0) throw std::invalid_argument("horizon must be nonnegative");
    if (measure.variant() == IntensityMeasure::Variant::subordinated) {
        NoiseRealization out = sample_subordinated_path(measure, horizon, cutoff, seed);
        out.mode = mode;
        if (mode == SmallJumpMode::gaussian_approximation)
            out.small_jump_cov = measure.small_jump_covariance(cutoff);
        return out;
    }

    NoiseRealization out;
    out.horizon = horizon;
    out.cutoff = cutoff;
    out.mode = mode;
    out.representation = measure.representation();
    out.seed = seed;

    double mass;
    try {
        mass = measure.mass_above(cutoff);
    } catch (const InfiniteMassError&) {
        throw InfiniteMassError(
            "intensity mass above the cutoff is infinite; increase the cutoff");
    }
    if (!std::isfinite(mass))
        throw InfiniteMassError(
            "intensity mass above the cutoff is infinite; increase the cutoff");

    Rng rng(seed);
    if (horizon > 0.0 && mass > 0.0) {
        const long long count = rng.poisson(horizon * mass);
        out.jumps.reserve(static_cast<std::size_t>(count));
        for (long long i = 0; i < count; ++i) {
            Jump j;
            j.time = horizon * rng.uniform();  // uniform order statistics after sort
            j.mark = measure.sample_above(cutoff, rng);
            j.annulus_index = annulus_index_of(norm(j.mark));
            out.jumps.push_back(std::move(j));
        }
    }
    finalize_common(out, measure);
    return out;
}

NoiseRealization thin_to_cutoff(const NoiseRealization& noise, const IntensityMeasure& measure,
                                double larger_cutoff) {
    if (larger_cutoff < noise.cutoff)
        throw std::invalid_argument("thinning only removes marks; cutoff must grow");
    NoiseRealization out = noise;
    out.cutoff = larger_cutoff;
    out.jumps.clear();
    for (const auto& j : noise.jumps)
        if (norm(j.mark) > larger_cutoff) out.jumps.push_back(j);
    finalize_common(out, measure);
    return out;
}

double sample_stable_1d(double alpha, double skew, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw std::invalid_argument("alpha must lie in (0,2)");
    if (!(skew >= -1.0 && skew <= 1.0)) throw std::invalid_argument("skew must lie in [-1,1]");
    const double v = M_PI * (rng.uniform() - 0.5);  // uniform on (-pi/2, pi/2)
    const double w = rng.exponential();
    if (alpha == 1.0) {
        const double a = M_PI_2 + skew * v;
        return (2.0 / M_PI) *
               (a * std::tan(v) - skew * std::log((M_PI_2 * w * std::cos(v)) / a));
    }
    const double t = skew * std::tan(M_PI_2 * alpha);
    const double b = std::atan(t) / alpha;
    const double s = std::pow(1.0 + t * t, 0.5 / alpha);
    return s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
           std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
}

NoiseRealization sample_subordinated_path(const IntensityMeasure& subordinated, double horizon,
                                          double cutoff, std::uint64_t seed) {
    const auto view = subordinated.subordinated_view();
    NoiseRealization out;
    out.horizon = horizon;
    out.cutoff = cutoff;
    out.representation = subordinated.representation();
    out.seed = seed;

    Rng rng(derive_seed(seed, 0x5b));
    // subordinator jumps above a relative cutoff; smaller subordinator
    // jumps mostly produce sub-cutoff marks and are dropped with them
    const double sub_cutoff =
        view.base_product ? 1e-4 : std::min(1e-4, 0.01 * cutoff * cutoff /
                                                       std::max(view.gaussian_variance, 1e-12));
    NoiseRealization sub = sample_noise(*view.subordinator, horizon, sub_cutoff,
                                        SmallJumpMode::drop_with_compensator,
                                        derive_seed(seed, 0xa1));

    const int d = subordinated.dimension();
    for (const auto& sj : sub.jumps) {
        const double s = sj.mark[0];
        Vec mark;
        if (view.base_product == nullptr) {
            mark = rng.normal_vec(d);
            const double sd = std::sqrt(s * view.gaussian_variance);
            for (double& x : mark) x *= sd;
        } else {
            // base increment over operational time s: a compound sum
            mark = zeros(d);
            const double base_mass = view.base_product->mass_above(cutoff * 1e-3);
            const long long k = rng.poisson(s * base_mass);
            for (long long i = 0; i < k; ++i)
                axpy(1.0, view.base_product->sample_above(cutoff * 1e-3, rng), mark);
        }
        const double mark_norm = norm(mark);
        if (mark_norm > cutoff)
            out.jumps.push_back({sj.time, std::move(mark), annulus_index_of(mark_norm)});
    }

    if (view.base_product && view.beta0 > 0.0) {
        // drift part: an independent copy of the base jumps at rate beta0
        NoiseRealization drift_part =
            sample_noise(*view.base_product, horizon * view.beta0, cutoff,
                         SmallJumpMode::drop_with_compensator, derive_seed(seed, 0xd2));
        for (auto& j : drift_part.jumps) {
            j.time /= view.beta0;
            out.jumps.push_back(std::move(j));
        }
    }

    std::sort(out.jumps.begin(), out.jumps.end(),
              [](const Jump& a, const Jump& b) { return a.time < b.time; });
    if (out.representation == Representation::ito_levy) {
        if (view.base_product == nullptr) {
            out.compensator_mean = zeros(d);  // centred Gaussian mixture
        } else {
            out.compensator_mean = subordinated.mean_in_annulus(cutoff, 1.0);
        }
    } else {
        out.compensator_mean = zeros(d);
    }
    return out;
}

std::string noise_to_json(const NoiseRealization& noise) {
    nlohmann::ordered_json j;
    j["horizon"] = noise.horizon;
    j["cutoff"] = noise.cutoff;
    j["mode"] = noise.mode == SmallJumpMode::drop_with_compensator ? "drop_with_compensator"
                                                                   : "gaussian_approximation";
    j["representation"] =
        noise.representation == Representation::compound_poisson ? "compound_poisson"
                                                                 : "ito_levy";
    j["seed"] = noise.seed;
    j["compensator_mean"] = noise.compensator_mean;
    j["small_jump_cov"] = noise.small_jump_cov;
    auto jumps = nlohmann::ordered_json::array();
    for (const auto& jp : noise.jumps)
        jumps.push_back({{"time", jp.time}, {"mark", jp.mark}, {"annulus", jp.annulus_index}});
    j["jumps"] = std::move(jumps);
    return j.dump(2);
}

NoiseRealization noise_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    NoiseRealization out;
    out.horizon = j.at("horizon").get<double>();
    out.cutoff = j.at("cutoff").get<double>();
    out.mode = j.at("mode").get<std::string>() == "gaussian_approximation"
                   ? SmallJumpMode::gaussian_approximation
                   : SmallJumpMode::drop_with_compensator;
    out.representation = j.at("representation").get<std::string>() == "ito_levy"
                             ? Representation::ito_levy
                             : Representation::compound_poisson;
    out.seed = j.at("seed").get<std::uint64_t>();
    out.compensator_mean = j.at("compensator_mean").get<Vec>();
    out.small_jump_cov = j.at("small_jump_cov").get<Mat>();
    for (const auto& je : j.at("jumps")) {
        Jump jp;
        jp.time = je.at("time").get<double>();
        jp.mark = je.at("mark").get<Vec>();
        jp.annulus_index = je.at("annulus").get<int>();
        out.jumps.push_back(std::move(jp));
    }
    return out;
}

}  // namespace jumpreach
