#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace betssm {

inline constexpr int kFirstMinute = 1;
inline constexpr int kLastMinute = 85;

// Equidistant cubic B-spline basis with K functions on [lo, hi]. Interior
// knots split [lo, hi] into K - 3 equal intervals and three further knots of
// the same spacing are placed outside each end, so the basis is a partition
// of unity on [lo, hi].
class SplineBasis {
public:
    explicit SplineBasis(int K, double lo = kFirstMinute, double hi = kLastMinute);

    int size() const { return K_; }
    double lower() const { return lo_; }
    double upper() const { return hi_; }
    double spacing() const { return spacing_; }
    // All K + 4 knots, ascending.
    std::vector<double> knots() const;

    // B_k(t) for k = 0..K-1 (zero-based). Defined for any real t.
    double value(int k, double t) const;
    Eigen::VectorXd row(double t) const;

    // Cached K-vector of basis values at integer minute t in [kFirstMinute, kLastMinute].
    const Eigen::VectorXd& at_minute(int t) const;

private:
    int K_;
    double lo_;
    double hi_;
    double spacing_;
    std::vector<Eigen::VectorXd> minute_rows_;
};

// Row j holds B_1..B_K evaluated at t_values[j].
Eigen::MatrixXd basis_matrix(int K, std::span<const int> t_values);
// Rows for t = 1..85.
Eigen::MatrixXd basis_matrix(int K);

// Time-varying effect sum_k coeffs[k] B_k(t).
struct VaryingCoefficient {
    std::vector<double> coeffs;
    const SplineBasis* basis;
};

// Throws DomainError unless t is an integer minute in [1, 85].
double evaluate_coefficient(const VaryingCoefficient& vc, int t);

// (lambda / 2) * sum_{k>=3} (nu_k - 2 nu_{k-1} + nu_{k-2})^2.
double penalty(std::span<const double> coeffs, double lambda);

// (K - 2) x K second-difference matrix.
Eigen::MatrixXd difference_matrix(int K);

// Max |second difference| of the coefficient sequence.
double max_abs_second_difference(std::span<const double> coeffs);

}  // namespace betssm
