#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jumpreach/mc.hpp"

using namespace jumpreach;

namespace {

const double kSqrt2 = std::sqrt(2.0);

IntensityMeasure two_atoms() {
    return IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}, {Vec{-kSqrt2}, 1.0}});
}

}  // namespace

TEST_CASE("exact binomial interval certifies positivity exactly when hits exist") {
    SUBCASE("zero hits pin the lower bound to zero") {
        const auto [lo, hi] = clopper_pearson(0, 1000, 0.99);
        CHECK(lo == 0.0);
        CHECK(hi > 0.0);
        CHECK(hi < 0.01);
    }
    SUBCASE("a single hit lifts the lower bound strictly above zero") {
        const auto [lo, hi] = clopper_pearson(1, 1000, 0.99);
        CHECK(lo > 0.0);
        CHECK(lo < 1.0 / 1000.0);
        CHECK(hi > 1.0 / 1000.0);
    }
    SUBCASE("the interval brackets the point estimate") {
        for (long long k : {1LL, 17LL, 500LL, 999LL}) {
            const auto [lo, hi] = clopper_pearson(k, 1000, 0.99);
            const double p = k / 1000.0;
            CHECK(lo <= p);
            CHECK(hi >= p);
        }
    }
    SUBCASE("all hits pin the upper bound to one") {
        const auto [lo, hi] = clopper_pearson(50, 50, 0.99);
        CHECK(hi == 1.0);
        CHECK(lo < 1.0);
    }
}

TEST_CASE("frozen model hits its own ball always") {
    auto model = frozen_model(1);
    const MCEstimate e = estimate_hitting(model, *model.default_measure, Vec{0.2}, 1.0,
                                          Ball{Vec{0.2}, 0.1}, 500, 1e-2, 1e-3, 42);
    CHECK(e.point == 1.0);
    CHECK(e.successes == 500);
    CHECK(e.lower > 0.98);
    CHECK(e.upper == 1.0);
}

TEST_CASE("one-sided counterexample never hits the negative ball") {
    auto model = one_sided_counterexample();
    const MCEstimate e = estimate_hitting(model, *model.default_measure, Vec{0.0}, 1.0,
                                          Ball{Vec{-1.0}, 0.5}, 20000, 1e-2, 1e-3, 7);
    CHECK(e.successes == 0);
    CHECK(e.lower == 0.0);
}

TEST_CASE("oracle includes the zero-jump contribution") {
    auto m = IntensityMeasure::atomic(1, {{Vec{1.0}, 0.8}});
    const OracleResult o = exact_cp_hitting_oracle(m, 1.0, Ball{Vec{0.0}, 0.01}, 30);
    // only the zero-jump path lands at 0: P = e^{-0.8}
    CHECK(o.probability == doctest::Approx(std::exp(-0.8)).epsilon(1e-12));
    CHECK(o.tail_bound < 1e-12);
}

TEST_CASE("oracle on a positive cone gives zero for negative balls") {
    auto m = IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}});
    const OracleResult o = exact_cp_hitting_oracle(m, 1.0, Ball{Vec{-1.0}, 0.4}, 30);
    CHECK(o.probability == 0.0);
}

TEST_CASE("oracle dominated by the (5,4) lattice term") {
    const OracleResult o =
        exact_cp_hitting_oracle(two_atoms(), 1.0, Ball{Vec{-0.7}, 0.05}, 40, 1e-12);
    // e^{-2}/(5! 4!) = 4.69914e-5; higher-order pairs contribute ~1e-15
    CHECK(o.probability == doctest::Approx(std::exp(-2.0) / 2880.0).epsilon(1e-6));
    CHECK(o.tail_bound <= 1e-12);
    CHECK(o.truncation == 40);
}

TEST_CASE("oracle refuses truncations with a loose tail") {
    CHECK_THROWS_AS(exact_cp_hitting_oracle(two_atoms(), 1.0, Ball{Vec{-0.7}, 0.05}, 3, 1e-9),
                    std::invalid_argument);
}

TEST_CASE("support estimate tracks the oracle at desk scale") {
    auto m = two_atoms();
    const Ball ball{Vec{-0.7}, 0.05};
    const OracleResult o = exact_cp_hitting_oracle(m, 1.0, ball, 40, 1e-12);
    const long long n = 400000;
    const MCEstimate e = estimate_levy_support(m, 1.0, ball.center, ball.radius, n, 1e-3, 2718);
    const double sigma = std::sqrt(o.probability * (1.0 - o.probability) / n);
    CHECK(std::abs(e.point - o.probability) <= 3.0 * sigma + o.tail_bound);
    CHECK(e.successes > 0);
    CHECK(e.lower > 0.0);
}

TEST_CASE("hitting estimate on the additive drift-free model matches the oracle too") {
    auto model = pure_noise_model(1);
    auto m = two_atoms();
    const Ball ball{Vec{-0.7}, 0.05};
    const OracleResult o = exact_cp_hitting_oracle(m, 1.0, ball, 40, 1e-12);
    const long long n = 400000;
    const MCEstimate e =
        estimate_hitting(model, m, Vec{0.0}, 1.0, ball, n, 1e-2, 1e-3, 314159);
    const double sigma = std::sqrt(o.probability * (1.0 - o.probability) / n);
    CHECK(std::abs(e.point - o.probability) <= 3.0 * sigma + o.tail_bound);
}

TEST_CASE("one-sided support misses negative windows entirely") {
    auto m = IntensityMeasure::atomic(1, {{Vec{0.5}, 1.0}});
    const MCEstimate e = estimate_levy_support(m, 1.0, Vec{-0.4}, 0.1, 5000, 1e-3, 5);
    CHECK(e.successes == 0);
}

TEST_CASE("near-zero window always contains the no-jump event") {
    auto m = two_atoms();
    const MCEstimate e = estimate_levy_support(m, 1.0, Vec{0.0}, 0.05, 20000, 1e-3, 6);
    // P >= e^{-2} = 0.135
    CHECK(e.point > 0.10);
    CHECK(e.lower > 0.0);
}

TEST_CASE("stay-in-ball worst case") {
    SUBCASE("frozen model never leaves") {
        auto model = frozen_model(1);
        const StayReport r = estimate_stay_in_ball(model, *model.default_measure, Vec{0.0}, 0.5,
                                                   1.0, 0.25, 4, 200, 1e-2, 1e-3, 3);
        CHECK(r.worst.point == 1.0);
        for (const auto& p : r.probes) CHECK(p.estimate.point == 1.0);
    }
    SUBCASE("deterministic drift leaves before the deadline") {
        auto model = pure_drift_model(Vec{1.0});
        auto quiet = IntensityMeasure::atomic(1, {{Vec{5.0}, 1e-9}});
        const StayReport r =
            estimate_stay_in_ball(model, quiet, Vec{0.0}, 0.25, 1.0, 0.125, 4, 100, 1e-2, 1e-3, 3);
        CHECK(r.worst.point == 0.0);
    }
    SUBCASE("monotone cubic with tiny-rate noise stays put") {
        auto model = monotone_cubic(1);
        auto tiny = IntensityMeasure::atomic(1, {{Vec{0.5}, 0.05}});
        const StayReport r =
            estimate_stay_in_ball(model, tiny, Vec{0.0}, 0.4, 0.5, 0.2, 4, 400, 1e-2, 1e-3, 3);
        CHECK(r.worst.lower > 0.0);
    }
    SUBCASE("the probe constraint eps <= eta/2 is enforced") {
        auto model = frozen_model(1);
        CHECK_THROWS(estimate_stay_in_ball(model, *model.default_measure, Vec{0.0}, 0.5, 1.0,
                                           0.3, 1, 10, 1e-2, 1e-3, 3));
    }
}

TEST_CASE("mean-square contraction reports") {
    auto model = monotone_cubic(1);
    const auto& measure = *model.default_measure;
    SUBCASE("identical starts give exactly zero") {
        const EPropertyReport r =
            check_e_property(model, measure, Vec{0.7}, Vec{0.7}, 1.0, 200, 1e-2, 1e-3, 4);
        CHECK(r.mean_square == 0.0);
        CHECK(r.pass);
    }
    SUBCASE("pure noise keeps the distance exactly") {
        auto flat = pure_noise_model(1);
        const EPropertyReport r = check_e_property(flat, measure, Vec{1.0}, Vec{0.4}, 1.0, 300,
                                                   1e-2, 1e-3, 4);
        CHECK(r.mean_square == doctest::Approx(0.36).epsilon(1e-12));
        CHECK(r.bound_square == doctest::Approx(0.36));
        CHECK(r.pass);
    }
    SUBCASE("cubic drift contracts") {
        const EPropertyReport r =
            check_e_property(model, measure, Vec{1.0}, Vec{0.9}, 1.0, 2000, 1e-3, 1e-3, 4);
        CHECK(r.mean_square <= 0.01 * 1.05);
        CHECK(r.pass);
    }
    SUBCASE("models without the tags are rejected") {
        auto drifty = pure_drift_model(Vec{1.0});
        CHECK_THROWS(check_e_property(drifty, measure, Vec{0.0}, Vec{0.1}, 1.0, 10, 1e-2,
                                       1e-3, 4));
    }
}

TEST_CASE("per-trial seed streams look independent") {
    auto model = pure_noise_model(1);
    auto m = IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}});
    // calibration instance: P(hit) = P(exactly one jump) = e^{-1} ~ 0.368
    const long long n = 20000;
    std::vector<int> hit(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i) {
        const auto noise = sample_noise(m, 1.0, 1e-3, SmallJumpMode::drop_with_compensator,
                                        derive_seed(1001, i));
        const TerminalResult r = integrate_terminal(model, Vec{0.0}, noise, 1e-2);
        hit[static_cast<std::size_t>(i)] = dist(r.state, Vec{1.0}) < 0.5 ? 1 : 0;
    }
    double mean = 0.0;
    for (int h : hit) mean += h;
    mean /= static_cast<double>(n);
    double cov = 0.0, var = 0.0;
    for (long long i = 0; i + 1 < n; ++i) {
        cov += (hit[i] - mean) * (hit[i + 1] - mean);
        var += (hit[i] - mean) * (hit[i] - mean);
    }
    const double corr = cov / var;
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("hitting counts are monotone in the ball radius under common seeds") {
    auto model = pure_noise_model(1);
    auto m = two_atoms();
    const std::uint64_t seed = 777;
    const MCEstimate small = estimate_hitting(model, m, Vec{0.0}, 1.0, Ball{Vec{1.0}, 0.3},
                                              20000, 1e-2, 1e-3, seed);
    const MCEstimate big = estimate_hitting(model, m, Vec{0.0}, 1.0, Ball{Vec{1.0}, 0.6},
                                            20000, 1e-2, 1e-3, seed);
    CHECK(small.successes <= big.successes);
    CHECK(big.successes > 0);
}

TEST_CASE("runaway divergence aborts the estimate") {
    ModelSpec model;
    model.dimension = 1;
    model.name = "explosive";
    model.drift = [](const Vec& x) { return Vec{x[0] * x[0] * x[0] * 10.0}; };
    model.jump_coeff = [](const Vec&, const Vec& z) { return z; };
    model.tags.insert(ModelTag::additive);
    auto m = IntensityMeasure::atomic(1, {{Vec{1.0}, 1e-9}});
    CHECK_THROWS_AS(estimate_hitting(model, m, Vec{2.0}, 10.0, Ball{Vec{0.0}, 0.1}, 50, 1e-2,
                                     1e-3, 1),
                    std::runtime_error);
}

TEST_CASE("estimates are reproducible and worker-count independent") {
    auto model = pure_noise_model(1);
    auto m = two_atoms();
    const MCEstimate a =
        estimate_hitting(model, m, Vec{0.0}, 1.0, Ball{Vec{1.0}, 0.4}, 5000, 1e-2, 1e-3, 99, 0.99, 1);
    const MCEstimate b =
        estimate_hitting(model, m, Vec{0.0}, 1.0, Ball{Vec{1.0}, 0.4}, 5000, 1e-2, 1e-3, 99, 0.99, 3);
    CHECK(a.successes == b.successes);
    CHECK(a.point == b.point);
}
