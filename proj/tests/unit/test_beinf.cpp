#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "betssm/beinf.hpp"
#include "betssm/error.hpp"

using namespace betssm;

TEST_CASE("shape parameters follow the mean / scale parametrisation") {
    const auto sh = shapes_from_mean_sd(0.3, 0.2);
    CHECK(sh.a == doctest::Approx(0.3 * 24.0).epsilon(1e-14));
    CHECK(sh.b == doctest::Approx(0.7 * 24.0).epsilon(1e-14));
    // precision does not depend on mu
    for (double mu : {0.1, 0.5, 0.9}) {
        const auto s = shapes_from_mean_sd(mu, 0.3);
        CHECK(s.a + s.b == doctest::Approx(beta_precision(0.3)).epsilon(1e-14));
    }
    // sigma^2 = 1 / (a + b + 1)
    CHECK(1.0 / std::sqrt(sh.a + sh.b + 1.0) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("uniform special case") {
    const BeinfParams u{0.5, std::sqrt(1.0 / 3.0), 0.0, 0.0};
    const auto sh = shapes_from_mean_sd(u.mu, u.sigma);
    CHECK(sh.a == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sh.b == doctest::Approx(1.0).epsilon(1e-12));
    for (double y : {0.01, 0.3, 0.77}) CHECK(beinf_density(y, u) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("density matches an independent beta implementation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const BeinfParams prm{0.02 + 0.96 * U(rng), 0.05 + 0.8 * U(rng), 0.3 * U(rng), 0.3 * U(rng)};
        const auto sh = shapes_from_mean_sd(prm.mu, prm.sigma);
        boost::math::beta_distribution<double> dist(sh.a, sh.b);
        const double y = 0.001 + 0.998 * U(rng);
        const double expect = (1.0 - prm.p - prm.q) * boost::math::pdf(dist, y);
        CHECK(beinf_density(y, prm) == doctest::Approx(expect).epsilon(1e-10));
        CHECK(beinf_cdf(y, prm) == doctest::Approx(prm.p + (1.0 - prm.p - prm.q) * boost::math::cdf(dist, y)).epsilon(1e-12));
    }
}

TEST_CASE("point masses at the boundaries") {
    const BeinfParams prm{0.4, 0.3, 0.1, 0.05};
    CHECK(beinf_density(0.0, prm) == doctest::Approx(0.1));
    CHECK(beinf_density(1.0, prm) == doctest::Approx(0.05));
    CHECK(beinf_cdf(0.0, prm) == doctest::Approx(0.1));
    CHECK(beinf_cdf(-0.1, prm) == 0.0);
    CHECK(beinf_cdf(1.0, prm) == 1.0);
    CHECK(beinf_cdf(std::nextafter(1.0, 0.0), prm) == doctest::Approx(0.95).epsilon(1e-9));
    // zero mass at the boundary -> density zero, log density -inf
    const BeinfParams none{0.4, 0.3, 0.0, 0.0};
    CHECK(beinf_density(0.0, none) == 0.0);
    CHECK(std::isinf(beinf_log_density(1.0, none)));
}

TEST_CASE("continuous part integrates to 1 - p - q") {
    boost::math::quadrature::tanh_sinh<double> ts;
    for (const BeinfParams prm : {BeinfParams{0.3, 0.3, 0.05, 0.02}, BeinfParams{0.7, 0.2, 0.0, 0.1},
                                  BeinfParams{0.5, 0.1, 0.2, 0.2}}) {
        const double mass = ts.integrate([&](double y) { return beinf_density(y, prm); }, 0.0, 1.0, 1e-12);
        CHECK(mass + prm.p + prm.q == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("mean formula agrees with quadrature and with sampling") {
    const BeinfParams prm{0.35, 0.25, 0.08, 0.12};
    boost::math::quadrature::tanh_sinh<double> ts;
    const double cont = ts.integrate([&](double y) { return y * beinf_density(y, prm); }, 0.0, 1.0, 1e-12);
    CHECK(beinf_mean(prm) == doctest::Approx(cont + prm.q).epsilon(1e-10));

    std::mt19937_64 rng(11);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    int zeros = 0, ones = 0;
    for (int i = 0; i < n; ++i) {
        const double y = beinf_sample(prm, rng);
        REQUIRE(y >= 0.0);
        REQUIRE(y <= 1.0);
        zeros += y == 0.0;
        ones += y == 1.0;
        s += y;
        s2 += y * y;
    }
    const double mean = s / n, sd = std::sqrt(s2 / n - mean * mean);
    CHECK(std::abs(mean - beinf_mean(prm)) < 4.0 * sd / std::sqrt(double(n)));
    CHECK(std::abs(zeros / double(n) - prm.p) < 4.0 * std::sqrt(prm.p * (1 - prm.p) / n));
    CHECK(std::abs(ones / double(n) - prm.q) < 4.0 * std::sqrt(prm.q * (1 - prm.q) / n));
}

TEST_CASE("sampling is deterministic given the seed") {
    const BeinfParams prm{0.6, 0.3, 0.1, 0.1};
    CHECK(beinf_sample(prm, 42u) == beinf_sample(prm, 42u));
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(BeinfParams({0.0, 0.3, 0.0, 0.0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(BeinfParams({0.5, 1.0, 0.0, 0.0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(BeinfParams({0.5, 0.3, -0.1, 0.0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(BeinfParams({0.5, 0.3, 0.6, 0.4}).validate(), InvalidParameter);
    CHECK_THROWS_AS(beinf_density(1.2, {0.5, 0.3, 0.0, 0.0}), DomainError);
}
