#include <doctest.h>

#include <cmath>
#include <vector>

#include "betssm/error.hpp"
#include "betssm/splines.hpp"

using namespace betssm;

namespace {

// Cox-de Boor recursion on the same knot vector.
double de_boor(const std::vector<double>& knots, int j, int degree, double x) {
    if (degree == 0) return (knots[j] <= x && x < knots[j + 1]) ? 1.0 : 0.0;
    double v = 0.0;
    const double d1 = knots[j + degree] - knots[j];
    const double d2 = knots[j + degree + 1] - knots[j + 1];
    if (d1 > 0) v += (x - knots[j]) / d1 * de_boor(knots, j, degree - 1, x);
    if (d2 > 0) v += (knots[j + degree + 1] - x) / d2 * de_boor(knots, j + 1, degree - 1, x);
    return v;
}

std::vector<double> oracle_knots(int K) {
    const double d = 84.0 / (K - 3);
    std::vector<double> k;
    for (int j = 0; j <= K + 3; ++j) k.push_back(1.0 + (j - 3) * d);
    return k;
}

}  // namespace

TEST_CASE("basis agrees with the Cox-de Boor recursion") {
    for (int K : {4, 5, 7, 10, 15}) {
        const SplineBasis basis(K);
        const auto knots = oracle_knots(K);
        for (double x = 1.0; x <= 85.0; x += 0.37)
            for (int j = 0; j < K; ++j) CHECK(basis.value(j, x) == doctest::Approx(de_boor(knots, j, 3, x)).epsilon(1e-12));
    }
}

TEST_CASE("partition of unity and nonnegativity on [1, 85]") {
    const SplineBasis basis(10);
    for (int t = 1; t <= 85; ++t) {
        const auto row = basis.at_minute(t);
        double s = 0.0;
        for (double v : row) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("design matrix has shape 85 x K") {
    const auto B = basis_matrix(10);
    CHECK(B.rows() == 85);
    CHECK(B.cols() == 10);
    CHECK(B.rowwise().sum().minCoeff() == doctest::Approx(1.0));
}

TEST_CASE("linear coefficients reproduce a linear function") {
    // Coefficients on a line give a linear curve: the second-difference
    // penalty's null space.
    const int K = 8;
    const SplineBasis basis(K);
    std::vector<double> nu(K);
    for (int k = 0; k < K; ++k) nu[k] = 0.5 - 0.25 * k;
    VaryingCoefficient f{nu, &basis};
    const double slope = evaluate_coefficient(f, 2) - evaluate_coefficient(f, 1);
    for (int t = 2; t <= 85; ++t)
        CHECK(evaluate_coefficient(f, t) - evaluate_coefficient(f, t - 1) == doctest::Approx(slope).epsilon(1e-10));
    CHECK(penalty(nu, 100.0) == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(max_abs_second_difference(nu) < 1e-15);
}

TEST_CASE("constant coefficients give a constant curve") {
    const SplineBasis basis(6);
    std::vector<double> nu(6, 1.7);
    VaryingCoefficient f{nu, &basis};
    for (int t = 1; t <= 85; ++t) CHECK(evaluate_coefficient(f, t) == doctest::Approx(1.7).epsilon(1e-13));
}

TEST_CASE("penalty equals lambda/2 times the squared second differences") {
    const std::vector<double> nu{0.0, 1.0, 0.0, 2.0, 5.0};
    // differences: -2, 3, 1
    CHECK(penalty(nu, 3.0) == doctest::Approx(1.5 * 14.0));
    const auto D = difference_matrix(5);
    CHECK(D.rows() == 3);
    CHECK(D.cols() == 5);
    CHECK(D(0, 0) == 1.0);
    CHECK(D(0, 1) == -2.0);
    CHECK(D(0, 2) == 1.0);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(SplineBasis(3), ConfigError);
    const SplineBasis basis(6);
    CHECK_THROWS_AS(basis.at_minute(0), DomainError);
    CHECK_THROWS_AS(basis.at_minute(86), DomainError);
    CHECK_THROWS_AS(penalty(std::vector<double>{1.0, 2.0}, 1.0), ConfigError);
    CHECK_THROWS_AS(penalty(std::vector<double>{1.0, 2.0, 3.0}, -1.0), ConfigError);
}
