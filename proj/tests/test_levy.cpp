#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jumpreach/noise.hpp"

using namespace jumpreach;

namespace {

IntensityMeasure two_atoms() {
    return IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}, {Vec{-std::sqrt(2.0)}, 1.0}});
}

}  // namespace

TEST_CASE("jump counts match the Poisson mean within three sigma") {
    auto m = two_atoms();  // total rate 2, both atoms above any small cutoff
    const double T = 1.0;
    const int R = 10000;
    long long total = 0;
    for (int i = 0; i < R; ++i)
        total += static_cast<long long>(
            sample_noise(m, T, 1e-3, SmallJumpMode::drop_with_compensator, derive_seed(9, i))
                .jumps.size());
    const double lambda = T * m.mass_above(1e-3);
    const double mean = total / static_cast<double>(R);
    CHECK(std::abs(mean - lambda) <= 3.0 * std::sqrt(lambda / R));
}

TEST_CASE("zero horizon gives an empty realization") {
    const auto noise =
        sample_noise(two_atoms(), 0.0, 1e-3, SmallJumpMode::drop_with_compensator, 1);
    CHECK(noise.jumps.empty());
}

TEST_CASE("realizations are deterministic in the seed") {
    auto m = two_atoms();
    const auto a = sample_noise(m, 2.0, 1e-3, SmallJumpMode::drop_with_compensator, 123);
    const auto b = sample_noise(m, 2.0, 1e-3, SmallJumpMode::drop_with_compensator, 123);
    REQUIRE(a.jumps.size() == b.jumps.size());
    for (std::size_t i = 0; i < a.jumps.size(); ++i) {
        CHECK(a.jumps[i].time == b.jumps[i].time);
        CHECK(a.jumps[i].mark == b.jumps[i].mark);
    }
    const auto c = sample_noise(m, 2.0, 1e-3, SmallJumpMode::drop_with_compensator, 124);
    CHECK(a.jumps.size() != c.jumps.size());  // different stream (rate 4: collision unlikely)
}

TEST_CASE("jump times are strictly increasing within the horizon") {
    const auto noise =
        sample_noise(two_atoms(), 5.0, 1e-3, SmallJumpMode::drop_with_compensator, 77);
    REQUIRE(noise.jumps.size() > 2);
    for (std::size_t i = 1; i < noise.jumps.size(); ++i) {
        CHECK(noise.jumps[i].time > noise.jumps[i - 1].time);
        CHECK(noise.jumps[i].time <= 5.0);
        CHECK(noise.jumps[i].time > 0.0);
    }
}

TEST_CASE("truncated flights never exceed the truncation radius") {
    auto m = IntensityMeasure::radial_polar(2, 0.0,
                                            {{Vec{1.0, 0.0}, 1.0}, {Vec{0.0, 1.0}, 1.0}},
                                            Tempering::truncation(0.8));
    const auto noise = sample_noise(m, 20.0, 1e-2, SmallJumpMode::drop_with_compensator, 3);
    REQUIRE(!noise.jumps.empty());
    for (const auto& j : noise.jumps) {
        CHECK(norm(j.mark) <= 0.8);
        CHECK(norm(j.mark) > 1e-2);
    }
}

TEST_CASE("thinning to a larger cutoff matches direct sampling in law") {
    auto m = IntensityMeasure::atomic(
        1, {{Vec{0.3}, 2.0}, {Vec{0.7}, 1.0}, {Vec{-1.2}, 0.5}});
    const double T = 1.0;
    const int R = 4000;
    // counts per atom over many realizations, thinned vs direct
    long long thinned[3] = {0, 0, 0}, direct[3] = {0, 0, 0};
    auto classify = [](const Vec& mark) {
        if (std::abs(mark[0] - 0.3) < 1e-12) return 0;
        if (std::abs(mark[0] - 0.7) < 1e-12) return 1;
        return 2;
    };
    for (int i = 0; i < R; ++i) {
        const auto fine =
            sample_noise(m, T, 0.1, SmallJumpMode::drop_with_compensator, derive_seed(21, i));
        const auto thin = thin_to_cutoff(fine, m, 0.5);
        for (const auto& j : thin.jumps) ++thinned[classify(j.mark)];
        const auto coarse =
            sample_noise(m, T, 0.5, SmallJumpMode::drop_with_compensator, derive_seed(77, i));
        for (const auto& j : coarse.jumps) ++direct[classify(j.mark)];
    }
    CHECK(thinned[0] == 0);  // 0.3 <= cutoff 0.5
    CHECK(direct[0] == 0);
    // chi-square style three-sigma comparison per surviving atom
    const double rates[3] = {2.0, 1.0, 0.5};
    for (int a = 1; a < 3; ++a) {
        const double mu = rates[a] * T * R;
        CHECK(std::abs(thinned[a] - direct[a]) <= 3.0 * std::sqrt(2.0 * mu));
    }
}

TEST_CASE("product coordinates jump independently") {
    auto c1 = IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}});
    auto c2 = IntensityMeasure::atomic(1, {{Vec{-1.0}, 1.0}});
    auto m = IntensityMeasure::product({c1, c2}, {1.0, 1.0});
    const int R = 4000;
    double sum1 = 0, sum2 = 0, sum12 = 0, sq1 = 0, sq2 = 0;
    for (int i = 0; i < R; ++i) {
        const auto noise =
            sample_noise(m, 1.0, 1e-3, SmallJumpMode::drop_with_compensator, derive_seed(5, i));
        int n1 = 0, n2 = 0;
        for (const auto& j : noise.jumps) (j.mark[0] != 0.0 ? n1 : n2)++;
        sum1 += n1;
        sum2 += n2;
        sum12 += n1 * n2;
        sq1 += n1 * n1;
        sq2 += n2 * n2;
    }
    const double m1 = sum1 / R, m2 = sum2 / R;
    const double cov = sum12 / R - m1 * m2;
    const double v1 = sq1 / R - m1 * m1, v2 = sq2 / R - m2 * m2;
    const double corr = cov / std::sqrt(v1 * v2);
    CHECK(std::abs(corr) <= 3.0 / std::sqrt(static_cast<double>(R)));
}

TEST_CASE("stable sampler calibration") {
    Rng rng(31415);
    SUBCASE("alpha = 1 is standard Cauchy") {
        // oracle: P(|X| <= 1) = 2 atan(1)/pi = 1/2
        const int N = 100000;
        int inside = 0;
        for (int i = 0; i < N; ++i)
            if (std::abs(sample_stable_1d(1.0, 0.0, rng)) <= 1.0) ++inside;
        CHECK(std::abs(inside / static_cast<double>(N) - 0.5) < 0.01);
    }
    SUBCASE("symmetric medians vanish") {
        for (double alpha : {0.6, 1.0, 1.4, 1.9}) {
            const int N = 20000;
            std::vector<double> xs(N);
            for (auto& x : xs) x = sample_stable_1d(alpha, 0.0, rng);
            std::nth_element(xs.begin(), xs.begin() + N / 2, xs.end());
            CHECK(std::abs(xs[N / 2]) < 0.02);
        }
    }
    SUBCASE("one-sided half-stable is positive with the Levy law") {
        // oracle: standard one-sided alpha=1/2 stable has CDF erfc(1/sqrt(2x))
        const int N = 50000;
        int below_median = 0;
        // median: erfc(1/sqrt(2m)) = 1/2 -> m = 0.5/erfc_inv(0.5)^2 ~ 2.19811
        const double median = 2.198109338;
        for (int i = 0; i < N; ++i) {
            const double x = sample_stable_1d(0.5, 1.0, rng);
            CHECK(x > 0.0);
            if (x <= median) ++below_median;
        }
        CHECK(std::abs(below_median / static_cast<double>(N) - 0.5) <
              3.0 * 0.5 / std::sqrt(static_cast<double>(N)));
    }
}

TEST_CASE("subordinated path marks are the base law at subordinator jumps") {
    auto sub = IntensityMeasure::atomic(1, {{Vec{1.0}, 3.0}});  // s = 1 at rate 3
    auto m = IntensityMeasure::subordinated_gaussian(1, 1.0, sub);
    long long count = 0;
    double sumsq = 0.0;
    const int R = 3000;
    for (int i = 0; i < R; ++i) {
        const auto noise =
            sample_noise(m, 1.0, 1e-3, SmallJumpMode::drop_with_compensator, derive_seed(1, i));
        count += static_cast<long long>(noise.jumps.size());
        for (const auto& j : noise.jumps) sumsq += j.mark[0] * j.mark[0];
    }
    // mark count ~ Poisson(rate T) (cutoff loss is ~0.1%)
    const double lambda = 3.0;
    CHECK(std::abs(count / static_cast<double>(R) - lambda) <=
          3.0 * std::sqrt(lambda / R) + 0.01);
    // marks are N(0,1): empirical variance within 0.05
    CHECK(std::abs(sumsq / static_cast<double>(count) - 1.0) < 0.05);
}

TEST_CASE("subordinated empty cases") {
    auto sub = IntensityMeasure::atomic(1, {{Vec{1.0}, 1.0}});
    auto m = IntensityMeasure::subordinated_gaussian(1, 1.0, sub);
    CHECK(sample_noise(m, 0.0, 1e-3, SmallJumpMode::drop_with_compensator, 4).jumps.empty());
}

TEST_CASE("noise serialization round-trips bit for bit") {
    const auto noise =
        sample_noise(two_atoms(), 2.0, 1e-3, SmallJumpMode::drop_with_compensator, 55);
    const auto back = noise_from_json(noise_to_json(noise));
    CHECK(back.horizon == noise.horizon);
    CHECK(back.cutoff == noise.cutoff);
    CHECK(back.seed == noise.seed);
    REQUIRE(back.jumps.size() == noise.jumps.size());
    for (std::size_t i = 0; i < noise.jumps.size(); ++i) {
        CHECK(back.jumps[i].time == noise.jumps[i].time);
        CHECK(back.jumps[i].mark == noise.jumps[i].mark);
        CHECK(back.jumps[i].annulus_index == noise.jumps[i].annulus_index);
    }
    CHECK(back.compensator_mean == noise.compensator_mean);
}

TEST_CASE("annulus indices match the strict norm regions") {
    CHECK(annulus_index_of(2.0) == 1);
    CHECK(annulus_index_of(1.0) == 2);   // |z| = 1 is not > 1
    CHECK(annulus_index_of(0.6) == 2);   // > 1/2
    CHECK(annulus_index_of(0.5) == 3);   // not > 1/2, but > 1/3
    CHECK(annulus_index_of(0.26) == 4);
}

TEST_CASE("ito realizations carry the annulus compensator mean") {
    auto m = IntensityMeasure::radial_polar(1, 0.5, {{Vec{1.0}, 1.0}},
                                            Tempering::truncation(1.0));
    const auto noise = sample_noise(m, 1.0, 0.01, SmallJumpMode::drop_with_compensator, 8);
    CHECK(noise.representation == Representation::ito_levy);
    // oracle: int_{0.01}^{1} r * r^{-1.5} dr = 2(1 - 0.1)
    CHECK(noise.compensator_mean[0] == doctest::Approx(2.0 * (1.0 - 0.1)).epsilon(1e-9));

    auto raw = IntensityMeasure::atomic(1, {{Vec{0.5}, 1.0}});
    const auto raw_noise = sample_noise(raw, 1.0, 0.01, SmallJumpMode::drop_with_compensator, 8);
    CHECK(raw_noise.representation == Representation::compound_poisson);
    CHECK(raw_noise.compensator_mean[0] == 0.0);
}

TEST_CASE("gaussian approximation mode carries the small-jump covariance") {
    auto m = IntensityMeasure::radial_polar(1, 1.0, {{Vec{1.0}, 1.0}, {Vec{-1.0}, 1.0}},
                                            Tempering::truncation(1.0));
    const auto noise = sample_noise(m, 1.0, 0.2, SmallJumpMode::gaussian_approximation, 8);
    REQUIRE(noise.small_jump_cov.size() == 1);
    CHECK(noise.small_jump_cov[0] == doctest::Approx(2.0 * 0.2).epsilon(1e-9));
}
