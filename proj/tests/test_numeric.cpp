#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rgbm/errors.hpp"
#include "rgbm/numeric.hpp"

using namespace rgbm;

TEST_CASE("pairwise sum matches sequential sum on benign data") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int n : {0, 1, 31, 32, 33, 1000, 12345}) {
        std::vector<double> v(n);
        for (auto& x : v) x = u(rng);
        const double seq = std::accumulate(v.begin(), v.end(), 0.0);
        CHECK(pairwise_sum(v) == doctest::Approx(seq).epsilon(1e-13));
    }
}

TEST_CASE("pairwise sum is exact on integers") {
    std::vector<double> v(100000, 1.0);
    CHECK(pairwise_sum(v) == 100000.0);
}

TEST_CASE("normal quantile reference values") {
    // Constants cross-checked against an independent high-precision evaluation
    // of the standard normal inverse CDF.
    CHECK(norm_ppf(0.5) == 0.0);
    CHECK(norm_ppf(0.9) == doctest::Approx(1.2815515655446004).epsilon(1e-14));
    CHECK(norm_ppf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
    CHECK(norm_ppf(0.1) == doctest::Approx(-1.2815515655446004).epsilon(1e-14));
    CHECK(norm_ppf(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-12));
    CHECK(norm_ppf(0.8) == doctest::Approx(0.8416212335729143).epsilon(1e-14));
}

TEST_CASE("normal quantile and CDF are inverse") {
    for (double p : {1e-8, 1e-4, 0.01, 0.2, 0.5, 0.77, 0.99, 1.0 - 1e-6}) {
        CHECK(norm_cdf(norm_ppf(p)) == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK_THROWS_AS(norm_ppf(0.0), Error);
    CHECK_THROWS_AS(norm_ppf(1.0), Error);
}

TEST_CASE("incomplete gamma against closed forms") {
    // P(1, x) = 1 - exp(-x)
    for (double x : {0.1, 1.0, 3.0, 10.0}) {
        CHECK(gamma_p(1.0, x) == doctest::Approx(1.0 - std::exp(-x)).epsilon(1e-13));
    }
    // P(3, 2) = 1 - e^{-2}(1 + 2 + 2)
    CHECK(gamma_p(3.0, 2.0) ==
          doctest::Approx(1.0 - 5.0 * std::exp(-2.0)).epsilon(1e-13));
    // Q(1/2, x) = erfc(sqrt(x))
    for (double x : {0.25, 1.0, 4.0}) {
        CHECK(gamma_q(0.5, x) ==
              doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-12));
    }
    CHECK(gamma_p(2.5, 0.0) == 0.0);
    CHECK(gamma_q(2.5, 0.0) == 1.0);
    // Complementarity across the series/continued-fraction switch.
    for (double a : {0.3, 1.0, 7.7, 120.0, 5000.0}) {
        for (double x : {0.5 * a, a, a + 1.5, 2.0 * a}) {
            CHECK(gamma_p(a, x) + gamma_q(a, x) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    // Median-ish behavior at large shape: P(a, a) -> 1/2 from below.
    CHECK(gamma_p(5000.0, 5000.0) == doctest::Approx(0.5).epsilon(1e-2));
    CHECK_THROWS_AS(gamma_p(-1.0, 1.0), Error);
}

TEST_CASE("adaptive quadrature on known integrals") {
    const auto sq = [](double x) { return x * x; };
    auto r = integrate_adaptive(sq, 0.0, 1.0, 1e-12);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    const auto sine = [](double x) { return std::sin(x); };
    r = integrate_adaptive(sine, 0.0, 3.141592653589793, 1e-10);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

    // Narrow Gaussian spike: forces subdivision.
    const auto spike = [](double x) {
        const double d = (x - 0.3) / 1e-3;
        return std::exp(-0.5 * d * d);
    };
    r = integrate_adaptive(spike, 0.0, 1.0, 1e-12);
    CHECK(r.converged);
    CHECK(r.subdivisions > 1);
    const double exact = 1e-3 * std::sqrt(2.0 * 3.141592653589793);
    CHECK(r.value == doctest::Approx(exact).epsilon(1e-9));

    r = integrate_adaptive(sq, 2.0, 2.0, 1e-12);
    CHECK(r.value == 0.0);
}

TEST_CASE("ols fit recovers exact lines") {
    std::vector<double> x, y;
    for (int i = 0; i < 10; ++i) {
        x.push_back(i);
        y.push_back(2.5 * i - 1.0);
    }
    const LinearFit f = ols_fit(x, y);
    CHECK(f.slope == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.slope_stderr == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
}

TEST_CASE("ols stderr on a hand-checked case") {
    // Points (0,0), (1,1), (2,0): slope 0 fails to explain variance.
    // slope = 0, intercept = 1/3, residuals {-1/3, 2/3, -1/3},
    // ssr = 2/3, sigma2 = 2/3, sxx = 2 -> stderr = sqrt(1/3).
    const std::vector<double> x{0.0, 1.0, 2.0};
    const std::vector<double> y{0.0, 1.0, 0.0};
    const LinearFit f = ols_fit(x, y);
    CHECK(f.slope == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
    CHECK(f.intercept == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(f.slope_stderr == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-13));
    CHECK_THROWS_AS(ols_fit(std::vector<double>{1, 1, 1}, y), Error);
    CHECK_THROWS_AS(ols_fit(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                    Error);
}
