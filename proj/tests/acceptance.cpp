// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances and runtime limits are pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "jumpreach/experiment.hpp"
#include "jumpreach/planner.hpp"
#include "jumpreach/support.hpp"

using namespace jumpreach;

namespace {

const double kSqrt2 = std::sqrt(2.0);

struct Criterion {
    int id;
    std::string label;
    std::function<std::string()> body;  // throws on failure, returns a summary
    double time_limit_seconds = 0.0;    // 0 = no stated limit
};

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
    if (!cond) throw Failure(what);
}

// ---- shared instance builders -------------------------------------------

IntensityMeasure two_atom_cp() {
    return IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}, {Vec{-kSqrt2}, 1.0}});
}

IntensityMeasure frame_ray_measure(const std::vector<Vec>& frame) {
    std::vector<RadialDirection> dirs;
    for (const auto& f : frame) dirs.push_back({f, 1.0});
    return IntensityMeasure::radial_polar(static_cast<int>(frame.front().size()), 0.5,
                                          std::move(dirs), Tempering::truncation(1.0));
}

Mat random_orthogonal(int n, Rng& rng) {
    std::vector<Vec> cols;
    for (int c = 0; c < n; ++c) {
        Vec v = rng.normal_vec(n);
        for (const auto& u : cols) axpy(-dot(u, v), u, v);
        cols.push_back(scaled(v, 1.0 / norm(v)));
    }
    Mat q(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q[i * n + j] = cols[j][i];
    return q;
}

struct GreedyInstance {
    ModelSpec model;
    IntensityMeasure measure;
    Vec target;
    double kappa;
    double lambda;
};

GreedyInstance random_greedy_instance(Rng& rng) {
    const int d = 2 + static_cast<int>(rng.integer(4));  // 2..5
    const double lambda = 1.0 + 2.0 * rng.uniform();     // [1,3]
    const Mat qmat = random_orthogonal(d, rng);
    const Mat umat = random_orthogonal(d, rng);
    Vec svals(static_cast<std::size_t>(d));
    for (auto& s : svals) s = 1.0 / lambda + (lambda - 1.0 / lambda) * rng.uniform();
    Mat sigma(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) sigma[i * d + j] = umat[i * d + j] * svals[j];
    // frame = sigma^{-1} (+- Q e_j), so the pushed directions cover the
    // sphere with constant 1/sqrt(d) >= 0.447
    std::vector<Vec> frame;
    for (int j = 0; j < d; ++j) {
        for (double sign : {1.0, -1.0}) {
            Vec dir(static_cast<std::size_t>(d));
            for (int i = 0; i < d; ++i) dir[i] = sign * qmat[i * d + j];
            Vec f;
            if (!solve_linear(sigma, dir, f)) throw Failure("singular random sigma");
            frame.push_back(scaled(f, 1.0 / norm(f)));
        }
    }
    const double kappa = 0.2 + (1.0 / std::sqrt(d) - 0.21) * rng.uniform();

    GreedyInstance inst{ModelSpec{}, frame_ray_measure(frame), {}, kappa, lambda};
    inst.model.dimension = d;
    inst.model.name = "random_frame";
    inst.model.drift = [d](const Vec&) { return zeros(d); };
    inst.model.sigma_matrix = [sigma](const Vec&) { return sigma; };
    inst.model.jump_coeff = [sigma](const Vec&, const Vec& z) { return mat_apply(sigma, z); };
    LipschitzData lip;
    lip.sigma_z = lambda;
    inst.model.lipschitz = lip;
    FrameData fd;
    fd.frame = frame;
    fd.kappa = kappa;
    fd.lambda_bound = lambda;
    inst.model.frame = fd;
    inst.target = scaled(rng.unit_vec(d), 0.5 + 2.5 * rng.uniform());
    return inst;
}

struct CoordInstance {
    ModelSpec model;
    IntensityMeasure measure;
    Vec start, target;
    double eta_bar;
};

CoordInstance random_coord_instance(Rng& rng, bool declare_lipschitz) {
    const int d = 1 + static_cast<int>(rng.integer(4));  // 1..4
    CoordInstance inst{ModelSpec{}, IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}}), {}, {}, 0.0};
    inst.model.dimension = d;
    inst.model.name = "random_coordwise";
    inst.model.drift = [d](const Vec&) { return zeros(d); };
    CoordinatewiseData cw;
    cw.kappa1 = 2.0;
    cw.kappa2 = 0.5;
    double max_lip = 0.0;
    std::vector<double> amp(static_cast<std::size_t>(d)), base(static_cast<std::size_t>(d)),
        freq(static_cast<std::size_t>(d)), sgn(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        base[i] = 0.9 + 0.6 * rng.uniform();                       // (0.9, 1.5)
        amp[i] = 0.8 * std::min(base[i] - 0.5, 2.0 - base[i]) * rng.uniform();
        freq[i] = 2.0 * rng.uniform();
        sgn[i] = rng.uniform() < 0.5 ? 1.0 : -1.0;
        max_lip = std::max(max_lip, amp[i] * freq[i]);
        cw.sigma_i.push_back([i, base, amp, freq, sgn](const Vec& x) {
            return sgn[i] * (base[i] + amp[i] * std::sin(freq[i] * x[i % x.size()]));
        });
        cw.beta.push_back(1.0);
    }
    inst.model.coordwise = cw;
    inst.model.jump_coeff = [cw](const Vec& x, const Vec& z) {
        Vec out(z.size(), 0.0);
        for (std::size_t i = 0; i < z.size(); ++i)
            if (z[i] != 0.0) out[i] = cw.sigma_i[i](x) * z[i];
        return out;
    };
    if (declare_lipschitz) {
        LipschitzData lip;
        lip.sigma_z = cw.kappa1;
        lip.sigma_x_per_z = max_lip;
        inst.model.lipschitz = lip;
    }
    std::vector<AtomEntry> atoms;
    for (int i = 0; i < d; ++i)
        for (int k = 0; k <= 12; ++k)
            for (double s : {1.0, -1.0})
                atoms.push_back({basis(d, i, s * std::pow(2.0, -k)), 1.0});
    inst.measure = IntensityMeasure::atomic(d, std::move(atoms));
    inst.start = scaled(rng.normal_vec(d), 0.5);
    inst.target = scaled(rng.normal_vec(d), 1.0);
    inst.eta_bar = 0.2 + 1.3 * rng.uniform();
    return inst;
}

// certificates accumulated for criterion 7
std::vector<std::tuple<JumpChainCertificate, ModelSpec, IntensityMeasure>> g_certs_lipschitz;
std::vector<std::tuple<JumpChainCertificate, ModelSpec, IntensityMeasure>> g_certs_probed;

// criterion-2 estimates reused by criterion 4
MCEstimate g_frame_dt2, g_quadrant_dt2;
// criterion-3 estimates reused by criterion 4
MCEstimate g_support_a_d3, g_support_b_d3;

// ---- criteria ------------------------------------------------------------

std::string criterion1() {
    ModelSpec model = one_sided_counterexample();
    const IntensityMeasure& measure = *model.default_measure;
    const MCEstimate e = estimate_hitting(model, measure, Vec{0.0}, 1.0, Ball{Vec{-1.0}, 0.5},
                                          1000000, 1e-2, 1e-3, 101);
    require(e.successes == 0, "expected exactly 0 hits, saw " + std::to_string(e.successes));
    require(e.lower == 0.0, "zero hits must give a zero lower bound");
    // spot-check a finer step; positivity of the paths is dt-independent
    const MCEstimate fine = estimate_hitting(model, measure, Vec{0.0}, 1.0,
                                             Ball{Vec{-1.0}, 0.5}, 100000, 1e-3, 1e-3, 102);
    require(fine.successes == 0, "fine-step run must also see 0 hits");

    const PlanResult pr = plan_additive(model, measure, Vec{0.0}, Vec{-1.0}, 1.0, 64);
    require(!pr.feasible(), "additive planner must be infeasible");
    require(pr.failure->kind == PlanFailure::Kind::structural,
            "infeasibility must be structural, not budget");
    return "0/1000000 hits; additive planner structurally infeasible";
}

std::string criterion2() {
    const Ball ball{Vec{-1.0, -1.0}, 0.3};
    // locked frame: planner infeasible and no hits
    ModelSpec locked = quadrant_locked_2d();
    const PlanResult locked_plan =
        plan_greedy_frame(locked, *locked.default_measure, Vec{0.0, 0.0}, ball.center, 0.6);
    require(!locked_plan.feasible(), "quadrant plan must be infeasible");
    g_quadrant_dt2 = estimate_hitting(locked, *locked.default_measure, Vec{0.0, 0.0}, 1.0, ball,
                                      1000000, 1e-2, 1e-3, 202);
    require(g_quadrant_dt2.successes == 0, "quadrant MC must have zero hits, saw " +
                                               std::to_string(g_quadrant_dt2.successes));

    // repaired frame: plan (<= 12 steps) and a strictly positive lower bound
    ModelSpec fixed = frame_fixed_2d();
    const PlanResult fixed_plan =
        plan_greedy_frame(fixed, *fixed.default_measure, Vec{0.0, 0.0}, ball.center, 0.6);
    require(fixed_plan.feasible(), "frame-fixed plan must be feasible");
    require(fixed_plan.certificate->steps() <= 12,
            "plan must take at most 12 steps, took " +
                std::to_string(fixed_plan.certificate->steps()));
    g_certs_lipschitz.emplace_back(*fixed_plan.certificate, fixed, *fixed.default_measure);

    g_frame_dt2 = estimate_hitting(fixed, *fixed.default_measure, Vec{0.0, 0.0}, 1.0, ball,
                                   1000000, 1e-2, 1e-3, 203);
    require(g_frame_dt2.successes > 0, "frame-fixed MC needs at least one hit");
    require(g_frame_dt2.lower > 0.0, "99% lower confidence bound must be positive");

    char buf[160];
    std::snprintf(buf, sizeof(buf), "locked: infeasible, 0 hits; fixed: %d steps, k=%lld, lcb=%.3g",
                  fixed_plan.certificate->steps(),
                  static_cast<long long>(g_frame_dt2.successes), g_frame_dt2.lower);
    return buf;
}

std::string criterion3() {
    const IntensityMeasure m = two_atom_cp();
    const Ball ball_a{Vec{-0.7}, 0.05};
    const Ball ball_b{Vec{0.3}, 0.05};
    const OracleResult oa = exact_cp_hitting_oracle(m, 1.0, ball_a, 40, 1e-12);
    const OracleResult ob = exact_cp_hitting_oracle(m, 1.0, ball_b, 40, 1e-12);
    require(oa.tail_bound <= 1e-12 && ob.tail_bound <= 1e-12, "oracle tail bound too large");
    require(oa.probability > 0.0 && ob.probability > 0.0, "oracle must be strictly positive");

    const long long n = 10000000;
    g_support_a_d3 = estimate_levy_support(m, 1.0, ball_a.center, ball_a.radius, n, 1e-3, 303);
    g_support_b_d3 = estimate_levy_support(m, 1.0, ball_b.center, ball_b.radius, n, 1e-3, 304);
    for (const auto& [est, oracle] :
         {std::pair{g_support_a_d3, oa}, std::pair{g_support_b_d3, ob}}) {
        const double sigma = std::sqrt(oracle.probability * (1.0 - oracle.probability) /
                                       static_cast<double>(n));
        require(std::abs(est.point - oracle.probability) <= 3.0 * sigma + oracle.tail_bound,
                "MC point estimate outside the 3-sigma band of the oracle");
    }
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "oracle A=%.4g (MC %.4g), oracle B=%.4g (MC %.4g), tails<=1e-12",
                  oa.probability, g_support_a_d3.point, ob.probability, g_support_b_d3.point);
    return buf;
}

std::string criterion4() {
    // finite-activity support estimates agree exactly across cutoffs under
    // common seeds
    const IntensityMeasure m = two_atom_cp();
    const long long n = 10000000;
    const MCEstimate a2 = estimate_levy_support(m, 1.0, Vec{-0.7}, 0.05, n, 1e-2, 303);
    const MCEstimate b2 = estimate_levy_support(m, 1.0, Vec{0.3}, 0.05, n, 1e-2, 304);
    require(a2.successes == g_support_a_d3.successes && b2.successes == g_support_b_d3.successes,
            "finite-activity estimates must agree exactly across delta");

    // criterion-2 estimates across dt within overlapping 99% intervals
    ModelSpec fixed = frame_fixed_2d();
    const Ball ball{Vec{-1.0, -1.0}, 0.3};
    const MCEstimate frame_dt3 = estimate_hitting(fixed, *fixed.default_measure, Vec{0.0, 0.0},
                                                  1.0, ball, 1000000, 1e-3, 1e-3, 203);
    require(frame_dt3.lower <= g_frame_dt2.upper && g_frame_dt2.lower <= frame_dt3.upper,
            "frame-fixed intervals at dt=1e-2 and 1e-3 must overlap");

    ModelSpec locked = quadrant_locked_2d();
    const MCEstimate locked_dt3 = estimate_hitting(locked, *locked.default_measure,
                                                   Vec{0.0, 0.0}, 1.0, ball, 1000000, 1e-3,
                                                   1e-3, 202);
    require(locked_dt3.successes == 0 && g_quadrant_dt2.successes == 0,
            "quadrant estimates must both be zero");

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "delta ladder exact (k=%lld,%lld); dt ladder overlaps (k=%lld vs %lld)",
                  static_cast<long long>(g_support_a_d3.successes),
                  static_cast<long long>(g_support_b_d3.successes),
                  static_cast<long long>(g_frame_dt2.successes),
                  static_cast<long long>(frame_dt3.successes));
    return buf;
}

std::string criterion5() {
    Rng rng(505);
    const double eta_bar = 0.2;
    const double eta = 0.05;
    int total_steps = 0;
    for (int inst = 0; inst < 1000; ++inst) {
        GreedyInstance gi = random_greedy_instance(rng);
        const PlanResult pr = plan_greedy_frame(gi.model, gi.measure, zeros(gi.model.dimension),
                                                gi.target, eta_bar, 100000, eta);
        require(pr.feasible(), "greedy instance " + std::to_string(inst) + " failed to plan");
        const double rho0 = norm(gi.target);
        for (const auto& step : pr.greedy_steps) {
            const double rho2 = step.rho * step.rho;
            if (step.rho * gi.kappa > 1.0 / gi.lambda) {
                require(step.g_value <= rho2 - 1.0 / (gi.lambda * gi.lambda) + 1e-12,
                        "big-step contraction bound violated");
            } else {
                require(step.g_value <= rho2 * (1.0 - gi.kappa * gi.kappa) * (1.0 + 1e-12),
                        "small-step contraction bound violated");
            }
            if (!step.clamped) {
                const double expected = rho2 * (1.0 - step.varpi * step.varpi);
                require(std::abs(step.g_value - expected) <=
                            1e-12 * std::max(rho2, 1.0) + 1e-15,
                        "exact quadratic step identity violated");
            }
        }
        const double len_bound =
            std::ceil((rho0 * rho0 - eta * eta / 64.0) * gi.lambda * gi.lambda) +
            std::ceil(std::log(8.0 * rho0 / eta) /
                      (-0.5 * std::log(1.0 - gi.kappa * gi.kappa))) +
            1.0;
        require(static_cast<double>(pr.certificate->steps()) <= len_bound,
                "termination length bound violated");
        total_steps += pr.certificate->steps();
        g_certs_lipschitz.emplace_back(*pr.certificate, gi.model, gi.measure);
    }
    return "1000 instances, all step bounds and length bounds hold (" +
           std::to_string(total_steps) + " steps total)";
}

std::string criterion6() {
    Rng rng(606);
    for (int inst = 0; inst < 1000; ++inst) {
        CoordInstance ci = random_coord_instance(rng, true);
        const PlanResult pr =
            plan_coordinatewise(ci.model, ci.measure, ci.start, ci.target, ci.eta_bar);
        require(pr.feasible(), "coordinatewise instance " + std::to_string(inst) + " failed");
        const double err = dist(pr.certificate->states.back(), ci.target);
        require(err <= 3.0 * ci.eta_bar / 8.0, "terminal error above 3 eta / 8");
        g_certs_lipschitz.emplace_back(*pr.certificate, ci.model, ci.measure);
    }
    // 20 instances without declared Lipschitz data exercise the sampled path
    for (int inst = 0; inst < 20; ++inst) {
        CoordInstance ci = random_coord_instance(rng, false);
        const PlanResult pr =
            plan_coordinatewise(ci.model, ci.measure, ci.start, ci.target, ci.eta_bar);
        require(pr.feasible(), "probed coordinatewise instance failed");
        require(dist(pr.certificate->states.back(), ci.target) <= 3.0 * ci.eta_bar / 8.0,
                "terminal error above 3 eta / 8");
        g_certs_probed.emplace_back(*pr.certificate, ci.model, ci.measure);
    }
    return "1020 instances, terminal error <= 3 eta / 8 in every run";
}

std::string criterion7() {
    long long deterministic = 0, sampled = 0;
    for (const auto& [cert, model, measure] : g_certs_lipschitz) {
        const VerifyReport r = verify_certificate(cert, model, measure, 50, 707);
        require(r.structural_pass, "certificate failed the structural check");
        require(r.deterministic_available && r.deterministic_pass,
                "declared-Lipschitz certificate failed the deterministic check");
        require(r.sampled_pass, "certificate failed spot sampling");
        ++deterministic;
    }
    for (const auto& [cert, model, measure] : g_certs_probed) {
        const VerifyReport r = verify_certificate(cert, model, measure, 10000, 708);
        require(r.structural_pass && r.sampled_pass,
                "probed certificate failed the 10^4-sample check");
        ++sampled;
    }
    // the criterion-2 certificate also at full sample count
    {
        const auto& [cert, model, measure] = g_certs_lipschitz.front();
        const VerifyReport r = verify_certificate(cert, model, measure, 10000, 709);
        require(r.pass, "criterion-2 certificate failed the 10^4-sample check");
    }
    return std::to_string(deterministic) + " deterministic + " + std::to_string(sampled) +
           " sampled certificates verified, zero violations";
}

std::string criterion8() {
    Rng rng(808);
    int checked_pairs = 0;
    for (int inst = 0; inst < 100; ++inst) {
        const int d = 1 + static_cast<int>(rng.integer(3));
        const double theta = 0.2 + 1.3 * rng.uniform();
        ModelSpec model = ornstein_uhlenbeck(d, theta);

        IntensityMeasure measure = [&]() {
            if (inst % 2 == 0) {
                std::vector<AtomEntry> atoms;
                for (int a = 0; a < 3; ++a)
                    atoms.push_back({scaled(rng.unit_vec(d), 0.3 + 1.7 * rng.uniform()),
                                     0.3 + rng.uniform()});
                return IntensityMeasure::atomic(d, std::move(atoms));
            }
            std::vector<RadialDirection> dirs;
            for (int k = 0; k < 2 * d; ++k) dirs.push_back({rng.unit_vec(d), 1.0});
            return IntensityMeasure::radial_polar(d, 0.5, std::move(dirs),
                                                  Tempering::truncation(2.0));
        }();

        const NoiseRealization noise = sample_noise(
            measure, 2.0, 1e-2, SmallJumpMode::drop_with_compensator, derive_seed(808, inst));
        const Vec x0 = scaled(rng.normal_vec(d), 0.5);
        const PathRecord full = integrate(model, x0, noise, 1e-2, &measure);
        for (int m : {1, 2, 4}) {
            const PathRecord trunc = integrate_truncated(model, x0, noise, 1e-2, m, &measure);
            const auto tau = first_jump_time(noise, m, 1);
            const double horizon = tau.value_or(noise.horizon + 1.0);
            for (std::size_t k = 0; k < full.times.size() && full.times[k] < horizon; ++k) {
                require(full.times[k] == trunc.times[k], "grid mismatch before truncation");
                for (int c = 0; c < d; ++c)
                    require(full.states[k][c] == trunc.states[k][c],
                            "states differ bitwise before the first big jump");
            }
            ++checked_pairs;
        }
    }
    return std::to_string(checked_pairs) + " model/m pairs bitwise identical before tau_m^1";
}

std::string criterion9() {
    ModelSpec model = monotone_cubic(1);
    const IntensityMeasure& measure = *model.default_measure;
    Rng rng(909);
    double worst_ratio = 0.0;
    for (int pair = 0; pair < 20; ++pair) {
        const Vec x{3.0 * (rng.uniform() - 0.5)};
        Vec y{3.0 * (rng.uniform() - 0.5)};
        if (x[0] == y[0]) y[0] += 0.1;
        const EPropertyReport r = check_e_property(model, measure, x, y, 1.0, 10000, 1e-3,
                                                   1e-3, derive_seed(909, pair));
        require(r.pass, "mean-square contraction failed for a pair");
        worst_ratio = std::max(worst_ratio, r.mean_square / r.bound_square);
    }
    char buf[120];
    std::snprintf(buf, sizeof(buf), "20 pairs pass; worst mean/bound ratio %.3f <= 1.05",
                  worst_ratio);
    return buf;
}

std::string criterion10() {
    Rng rng(1010);
    int inside = 0;
    const int n_stable = 100000;
    for (int i = 0; i < n_stable; ++i)
        if (std::abs(sample_stable_1d(1.0, 0.0, rng)) <= 1.0) ++inside;
    const double frac = inside / static_cast<double>(n_stable);
    require(std::abs(frac - 0.5) <= 0.01, "Cauchy calibration outside 0.5 +- 0.01");

    const IntensityMeasure m = two_atom_cp();
    const double lambda = m.mass_above(1e-3);
    const int reals = 10000;
    long long count = 0;
    for (int i = 0; i < reals; ++i)
        count += static_cast<long long>(
            sample_noise(m, 1.0, 1e-3, SmallJumpMode::drop_with_compensator,
                         derive_seed(1010, i))
                .jumps.size());
    const double mean = count / static_cast<double>(reals);
    require(std::abs(mean - lambda) <= 3.0 * std::sqrt(lambda / reals),
            "Poisson count calibration outside 3 sigma");
    char buf[120];
    std::snprintf(buf, sizeof(buf), "P(|Cauchy|<=1)=%.4f; mean jump count %.4f vs %.1f", frac,
                  mean, lambda);
    return buf;
}

}  // namespace

int main() {
    std::vector<Criterion> criteria = {
        {1, "counterexample soundness", criterion1, 120.0},
        {2, "quadrant counterexample and repair", criterion2, 300.0},
        {3, "oracle agreement", criterion3, 600.0},
        {4, "discretization stability", criterion4, 0.0},
        {5, "greedy contraction suite", criterion5, 60.0},
        {6, "coordinatewise planner bound", criterion6, 0.0},
        {7, "certificate verification", criterion7, 0.0},
        {8, "truncation coincidence", criterion8, 0.0},
        {9, "mean-square contraction", criterion9, 0.0},
        {10, "sampler calibration", criterion10, 0.0},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string verdict, detail;
        try {
            detail = c.body();
            verdict = "PASS";
        } catch (const std::exception& e) {
            detail = e.what();
            verdict = "FAIL";
            ++failures;
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (verdict == "PASS" && c.time_limit_seconds > 0.0 && secs > c.time_limit_seconds) {
            verdict = "FAIL";
            detail += " (runtime limit exceeded)";
            ++failures;
        }
        std::printf("[%s] criterion %2d (%s): %s  [%.1f s]\n", verdict.c_str(), c.id,
                    c.label.c_str(), detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%s: %d/10 criteria passed\n", failures == 0 ? "SUCCESS" : "FAILURE",
                10 - failures);
    return failures == 0 ? 0 : 1;
}
