#pragma once

#include <cstdint>
#include <vector>

#include "jumpreach/integrate.hpp"
#include "jumpreach/model.hpp"
#include "jumpreach/noise.hpp"

namespace jumpreach {

struct Ball {
    Vec center;
    double radius;
};

// Exact binomial (Clopper-Pearson) interval; the lower bound is 0 exactly
// when no success was observed, so strict positivity is certified by a
// single hit.
std::pair<double, double> clopper_pearson(long long successes, long long trials,
                                          double confidence);

struct MCEstimate {
    long long trials = 0;     // valid trials (divergent paths excluded)
    long long successes = 0;
    double point = 0.0;
    double lower = 0.0;
    double upper = 1.0;
    double confidence = 0.99;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    long long divergent = 0;
};

MCEstimate make_estimate(long long successes, long long trials, long long divergent,
                         double confidence, std::uint64_t seed, double wall_seconds);

// P(X^x(T) in B(y, kappa)) by independent trials over the seed stream
// derive_seed(seed, trial). Divergent paths are counted separately; more
// than 1% of them aborts the run.
MCEstimate estimate_hitting(const ModelSpec& model, const IntensityMeasure& measure,
                            const Vec& x0, double T, const Ball& ball, long long n, double dt,
                            double delta, std::uint64_t seed, double confidence = 0.99,
                            int workers = 0);

struct OracleResult {
    double probability = 0.0;
    double tail_bound = 0.0;
    int truncation = 0;
    long long terms = 0;
};

// Exact hitting probability for a drift-free compound-Poisson sum:
// P = sum over multi-indices of prod_j Pois(T rate_j)(m_j) * 1[sum m_j a_j in ball],
// truncated at a total jump count with a rigorous Poisson tail bound.
OracleResult exact_cp_hitting_oracle(const IntensityMeasure& atomic_measure, double T,
                                     const Ball& ball, int truncation,
                                     double tail_tolerance = 1e-9);

struct StayProbeResult {
    Vec initial;
    MCEstimate estimate;
};

struct StayReport {
    MCEstimate worst;
    std::vector<StayProbeResult> probes;
};

// Worst-case over probe starts in B(h, probe_eps) of P(the path stays in
// the open ball B(h, eta) through time t).
StayReport estimate_stay_in_ball(const ModelSpec& model, const IntensityMeasure& measure,
                                 const Vec& h, double eta, double t, double probe_eps,
                                 int n_initials, long long n_paths, double dt, double delta,
                                 std::uint64_t seed, double confidence = 0.99, int workers = 0);

// P(L(s) in B(h, eps)) for the measure's canonical driving process:
// the raw jump sum for compound-Poisson representations, compensated for
// ito_levy ones.
MCEstimate estimate_levy_support(const IntensityMeasure& measure, double s, const Vec& h,
                                 double eps, long long n, double delta, std::uint64_t seed,
                                 double confidence = 0.99, int workers = 0);

struct EPropertyReport {
    double mean_square = 0.0;
    double bound_square = 0.0;
    double slack_factor = 1.05;
    double std_error = 0.0;
    long long trials = 0;
    bool pass = false;
};

// Common-noise pairs from x and y; the monotone additive contraction
// gives E|X^x(T)-X^y(T)|^2 <= |x-y|^2 up to scheme slack.
EPropertyReport check_e_property(const ModelSpec& model, const IntensityMeasure& measure,
                                 const Vec& x, const Vec& y, double T, long long n, double dt,
                                 double delta, std::uint64_t seed, int workers = 0);

}  // namespace jumpreach
