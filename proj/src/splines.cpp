#include "betssm/splines.hpp"

#include <cmath>
#include <string>

#include "betssm/error.hpp"

namespace betssm {

namespace {

// Cardinal cubic B-spline supported on [0, 4).
double cardinal_cubic(double u) {
    if (u < 0.0 || u >= 4.0) return 0.0;
    if (u < 1.0) return u * u * u / 6.0;
    if (u < 2.0) return (((-3.0 * u + 12.0) * u - 12.0) * u + 4.0) / 6.0;
    if (u < 3.0) return (((3.0 * u - 24.0) * u + 60.0) * u - 44.0) / 6.0;
    const double v = 4.0 - u;
    return v * v * v / 6.0;
}

}  // namespace

SplineBasis::SplineBasis(int K, double lo, double hi) : K_(K), lo_(lo), hi_(hi) {
    if (K < 4) throw ConfigError("spline basis needs K >= 4, got " + std::to_string(K));
    if (!(hi > lo)) throw ConfigError("spline basis needs an increasing range");
    spacing_ = (hi - lo) / (K - 3);
    for (int t = kFirstMinute; t <= kLastMinute; ++t) minute_rows_.push_back(row(t));
}

std::vector<double> SplineBasis::knots() const {
    std::vector<double> out;
    out.reserve(K_ + 4);
    for (int j = 0; j < K_ + 4; ++j) out.push_back(lo_ + (j - 3) * spacing_);
    return out;
}

double SplineBasis::value(int k, double t) const {
    const double left = lo_ + (k - 3) * spacing_;
    return cardinal_cubic((t - left) / spacing_);
}

Eigen::VectorXd SplineBasis::row(double t) const {
    Eigen::VectorXd r(K_);
    for (int k = 0; k < K_; ++k) r[k] = value(k, t);
    return r;
}

const Eigen::VectorXd& SplineBasis::at_minute(int t) const {
    if (t < kFirstMinute || t > kLastMinute)
        throw DomainError("spline basis: minute " + std::to_string(t) + " outside [1,85]");
    return minute_rows_[t - kFirstMinute];
}

Eigen::MatrixXd basis_matrix(int K, std::span<const int> t_values) {
    SplineBasis basis(K);
    Eigen::MatrixXd out(t_values.size(), K);
    for (std::size_t j = 0; j < t_values.size(); ++j) out.row(j) = basis.row(t_values[j]).transpose();
    return out;
}

Eigen::MatrixXd basis_matrix(int K) {
    std::vector<int> minutes;
    for (int t = kFirstMinute; t <= kLastMinute; ++t) minutes.push_back(t);
    return basis_matrix(K, minutes);
}

double evaluate_coefficient(const VaryingCoefficient& vc, int t) {
    if (vc.basis == nullptr || static_cast<int>(vc.coeffs.size()) != vc.basis->size())
        throw ConfigError("varying coefficient: coefficient count does not match basis");
    const Eigen::VectorXd& b = vc.basis->at_minute(t);
    double s = 0.0;
    for (int k = 0; k < b.size(); ++k) s += vc.coeffs[k] * b[k];
    return s;
}

double penalty(std::span<const double> coeffs, double lambda) {
    if (coeffs.size() < 3) throw ConfigError("penalty needs at least 3 coefficients");
    if (!(lambda >= 0.0)) throw ConfigError("penalty: lambda must be nonnegative");
    double s = 0.0;
    for (std::size_t k = 2; k < coeffs.size(); ++k) {
        const double d2 = coeffs[k] - 2.0 * coeffs[k - 1] + coeffs[k - 2];
        s += d2 * d2;
    }
    return 0.5 * lambda * s;
}

Eigen::MatrixXd difference_matrix(int K) {
    if (K < 3) throw ConfigError("difference matrix needs K >= 3");
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(K - 2, K);
    for (int r = 0; r < K - 2; ++r) {
        D(r, r) = 1.0;
        D(r, r + 1) = -2.0;
        D(r, r + 2) = 1.0;
    }
    return D;
}

double max_abs_second_difference(std::span<const double> coeffs) {
    double m = 0.0;
    for (std::size_t k = 2; k < coeffs.size(); ++k)
        m = std::max(m, std::abs(coeffs[k] - 2.0 * coeffs[k - 1] + coeffs[k - 2]));
    return m;
}

}  // namespace betssm
