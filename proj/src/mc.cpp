#include "jumpreach/mc.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace jumpreach {

namespace {

// trial outcome: 1 hit, 0 miss, -1 divergent
struct Tally {
    long long hits = 0;
    long long divergent = 0;
};

template <typename TrialFn>
Tally run_trials(long long n, int workers, const TrialFn& trial) {
    if (workers <= 0)
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = static_cast<int>(std::min<long long>(workers, std::max<long long>(n, 1)));
    if (workers == 1) {
        Tally t;
        for (long long i = 0; i < n; ++i) {
            const int r = trial(i);
            if (r > 0)
                ++t.hits;
            else if (r < 0)
                ++t.divergent;
        }
        return t;
    }
    std::vector<Tally> parts(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            Tally local;
            for (long long i = w; i < n; i += workers) {
                const int r = trial(i);
                if (r > 0)
                    ++local.hits;
                else if (r < 0)
                    ++local.divergent;
            }
            parts[static_cast<std::size_t>(w)] = local;
        });
    }
    for (auto& th : pool) th.join();
    Tally total;
    for (const auto& p : parts) {
        total.hits += p.hits;
        total.divergent += p.divergent;
    }
    return total;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void enforce_divergence_budget(long long divergent, long long n) {
    if (divergent * 100 > n)
        throw std::runtime_error("more than 1% of paths diverged; the estimate is aborted");
}

}  // namespace

std::pair<double, double> clopper_pearson(long long successes, long long trials,
                                          double confidence) {
    if (trials <= 0 || successes < 0 || successes > trials)
        throw std::invalid_argument("clopper_pearson needs 0 <= successes <= trials");
    const double a = 0.5 * (1.0 - confidence);
    const double k = static_cast<double>(successes);
    const double n = static_cast<double>(trials);
    const double lo =
        successes == 0 ? 0.0 : boost::math::ibeta_inv(k, n - k + 1.0, a);
    const double hi =
        successes == trials ? 1.0 : boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - a);
    return {lo, hi};
}

MCEstimate make_estimate(long long successes, long long trials, long long divergent,
                         double confidence, std::uint64_t seed, double wall_seconds) {
    MCEstimate e;
    e.trials = trials;
    e.successes = successes;
    e.point = trials > 0 ? static_cast<double>(successes) / static_cast<double>(trials) : 0.0;
    if (trials > 0) std::tie(e.lower, e.upper) = clopper_pearson(successes, trials, confidence);
    e.confidence = confidence;
    e.seed = seed;
    e.wall_seconds = wall_seconds;
    e.divergent = divergent;
    return e;
}

MCEstimate estimate_hitting(const ModelSpec& model, const IntensityMeasure& measure,
                            const Vec& x0, double T, const Ball& ball, long long n, double dt,
                            double delta, std::uint64_t seed, double confidence, int workers) {
    if (n < 1) throw std::invalid_argument("estimate_hitting needs n >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    const auto trial = [&](long long i) -> int {
        const NoiseRealization noise = sample_noise(
            measure, T, delta, SmallJumpMode::drop_with_compensator, derive_seed(seed, i));
        const TerminalResult r = integrate_terminal(model, x0, noise, dt, &measure);
        if (r.diverged) return -1;
        return dist(r.state, ball.center) < ball.radius ? 1 : 0;
    };
    const Tally tally = run_trials(n, workers, trial);
    enforce_divergence_budget(tally.divergent, n);
    return make_estimate(tally.hits, n - tally.divergent, tally.divergent, confidence, seed,
                         seconds_since(t0));
}

OracleResult exact_cp_hitting_oracle(const IntensityMeasure& atomic_measure, double T,
                                     const Ball& ball, int truncation, double tail_tolerance) {
    if (atomic_measure.variant() != IntensityMeasure::Variant::atomic)
        throw std::invalid_argument("the exact oracle needs an atomic measure");
    if (truncation < 0) throw std::invalid_argument("truncation must be >= 0");
    const auto& atoms = atomic_measure.atoms();
    const std::size_t J = atoms.size();

    double lambda_total = 0.0;
    for (const auto& a : atoms) lambda_total += a.rate;
    OracleResult out;
    out.truncation = truncation;
    // P(Pois(lambda T) > N) via the regularized incomplete gamma
    out.tail_bound = boost::math::gamma_p(static_cast<double>(truncation + 1), lambda_total * T);
    if (out.tail_bound > tail_tolerance)
        throw std::invalid_argument(
            "Poisson tail bound exceeds the requested accuracy; increase the truncation");

    // per-atom Poisson weights w_j[m] = e^{-rate T} (rate T)^m / m!
    std::vector<std::vector<double>> weights(J);
    for (std::size_t j = 0; j < J; ++j) {
        const double mu = atoms[j].rate * T;
        weights[j].resize(static_cast<std::size_t>(truncation) + 1);
        double w = std::exp(-mu);
        for (int m = 0; m <= truncation; ++m) {
            weights[j][static_cast<std::size_t>(m)] = w;
            w *= mu / (m + 1);
        }
    }

    // guard against combinatorial blowup of the multi-index enumeration
    double combos = 1.0;
    for (std::size_t j = 0; j < J; ++j) combos *= (static_cast<double>(truncation) + J - j) /
                                                  static_cast<double>(J - j);
    if (combos > 5e7)
        throw std::invalid_argument(
            "too many multi-indices at this truncation; reduce atoms or truncation");

    const int d = atomic_measure.dimension();
    double prob = 0.0;
    long long terms = 0;
    Vec sum = zeros(d);
    // depth-first over multiplicities with incremental sums and weights
    std::function<void(std::size_t, int, double)> recurse = [&](std::size_t j, int used,
                                                                double weight) {
        if (j == J) {
            ++terms;
            if (dist(sum, ball.center) < ball.radius) prob += weight;
            return;
        }
        int added = 0;
        for (int m = 0; used + m <= truncation; ++m) {
            if (m > 0) {
                axpy(1.0, atoms[j].location, sum);
                ++added;
            }
            recurse(j + 1, used + m, weight * weights[j][static_cast<std::size_t>(m)]);
        }
        for (int k = 0; k < added; ++k) axpy(-1.0, atoms[j].location, sum);
    };
    recurse(0, 0, 1.0);
    out.probability = prob;
    out.terms = terms;
    return out;
}

StayReport estimate_stay_in_ball(const ModelSpec& model, const IntensityMeasure& measure,
                                 const Vec& h, double eta, double t, double probe_eps,
                                 int n_initials, long long n_paths, double dt, double delta,
                                 std::uint64_t seed, double confidence, int workers) {
    if (!(probe_eps <= 0.5 * eta))
        throw std::invalid_argument("probe radius must satisfy eps <= eta/2");
    if (n_initials < 0 || n_paths < 1) throw std::invalid_argument("bad probe/path counts");
    const auto t0 = std::chrono::steady_clock::now();
    const int d = model.dimension;

    std::vector<Vec> initials;
    Rng probe_rng(derive_seed(seed, 0x9999));
    for (int i = 0; i < n_initials; ++i) initials.push_back(probe_rng.uniform_in_ball(h, probe_eps));
    for (int i = 0; i < d; ++i) {
        initials.push_back(add(h, basis(d, i, probe_eps)));
        initials.push_back(add(h, basis(d, i, -probe_eps)));
    }

    StayReport report;
    bool first = true;
    for (std::size_t pi = 0; pi < initials.size(); ++pi) {
        const Vec& init = initials[pi];
        const std::uint64_t probe_seed = derive_seed(seed, 0x1000 + pi);
        const auto trial = [&](long long i) -> int {
            const NoiseRealization noise =
                sample_noise(measure, t, delta, SmallJumpMode::drop_with_compensator,
                             derive_seed(probe_seed, i));
            const StayResult r = stays_in_ball(model, init, noise, dt, h, eta, t, &measure);
            if (r.diverged) return -1;
            return r.stayed ? 1 : 0;
        };
        const Tally tally = run_trials(n_paths, workers, trial);
        enforce_divergence_budget(tally.divergent, n_paths);
        MCEstimate est = make_estimate(tally.hits, n_paths - tally.divergent, tally.divergent,
                                       confidence, probe_seed, 0.0);
        if (first || est.point < report.worst.point) {
            report.worst = est;
            first = false;
        }
        report.probes.push_back({init, std::move(est)});
    }
    report.worst.wall_seconds = seconds_since(t0);
    return report;
}

MCEstimate estimate_levy_support(const IntensityMeasure& measure, double s, const Vec& h,
                                 double eps, long long n, double delta, std::uint64_t seed,
                                 double confidence, int workers) {
    if (n < 1) throw std::invalid_argument("estimate_levy_support needs n >= 1");
    const auto t0 = std::chrono::steady_clock::now();
    const int d = measure.dimension();
    const auto trial = [&](long long i) -> int {
        const NoiseRealization noise = sample_noise(
            measure, s, delta, SmallJumpMode::drop_with_compensator, derive_seed(seed, i));
        Vec value = zeros(d);
        for (const auto& j : noise.jumps) axpy(1.0, j.mark, value);
        if (noise.representation == Representation::ito_levy)
            axpy(-s, noise.compensator_mean, value);
        return dist(value, h) < eps ? 1 : 0;
    };
    const Tally tally = run_trials(n, workers, trial);
    return make_estimate(tally.hits, n, 0, confidence, seed, seconds_since(t0));
}

EPropertyReport check_e_property(const ModelSpec& model, const IntensityMeasure& measure,
                                 const Vec& x, const Vec& y, double T, long long n, double dt,
                                 double delta, std::uint64_t seed, int workers) {
    if (!model.has_tag(ModelTag::monotone_drift) || !model.has_tag(ModelTag::additive))
        throw std::invalid_argument(
            "the contraction check needs a model tagged monotone with additive noise");
    if (n < 1) throw std::invalid_argument("check_e_property needs n >= 1");

    constexpr double kDivergentMark = -1.0;
    std::vector<double> sq(static_cast<std::size_t>(n), kDivergentMark);
    const auto trial = [&](long long i) -> int {
        const NoiseRealization noise = sample_noise(
            measure, T, delta, SmallJumpMode::drop_with_compensator, derive_seed(seed, i));
        const TerminalResult rx = integrate_terminal(model, x, noise, dt, &measure);
        const TerminalResult ry = integrate_terminal(model, y, noise, dt, &measure);
        if (rx.diverged || ry.diverged) return -1;
        const double dd = dist(rx.state, ry.state);
        sq[static_cast<std::size_t>(i)] = dd * dd;
        return 1;
    };
    const Tally tally = run_trials(n, workers, trial);
    enforce_divergence_budget(tally.divergent, n);

    const long long valid = n - tally.divergent;
    double mean = 0.0;
    for (double v : sq)
        if (v != kDivergentMark) mean += v;
    mean /= static_cast<double>(valid);
    double var = 0.0;
    for (double v : sq)
        if (v != kDivergentMark) var += (v - mean) * (v - mean);
    var /= std::max<double>(1.0, static_cast<double>(valid - 1));

    EPropertyReport rep;
    rep.mean_square = mean;
    rep.bound_square = norm2(sub(x, y));
    rep.std_error = std::sqrt(var / static_cast<double>(valid));
    rep.trials = valid;
    rep.pass = mean <= rep.bound_square * rep.slack_factor;
    return rep;
}

}  // namespace jumpreach
