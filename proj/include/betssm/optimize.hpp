#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>

namespace betssm {

// Value and gradient of a function to be minimised. A non-finite value marks
// an infeasible point; the line search backs off from it.
struct ObjectiveValue {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

using Objective = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

enum class OptimStatus { Converged, MaxIterations, LineSearchFailed, InvalidStart };

std::string to_string(OptimStatus s);

struct OptimOptions {
    int max_iterations = 500;
    // Stop when max_k |g_k| <= gradient_tolerance * max(1, |f|).
    double gradient_tolerance = 1e-5;
};

struct OptimResult {
    Eigen::VectorXd x;
    double value = 0.0;
    Eigen::VectorXd gradient;
    int iterations = 0;
    int evaluations = 0;
    double gradient_norm = 0.0;  // max-norm
    OptimStatus status = OptimStatus::MaxIterations;
};

// Quasi-Newton (BFGS) minimisation with a strong-Wolfe line search. The
// inverse Hessian starts from `initial_inverse_hessian` when given, otherwise
// from a scaled identity.
OptimResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0,
                          const OptimOptions& options,
                          const std::optional<Eigen::MatrixXd>& initial_inverse_hessian = std::nullopt);

// Central differences of an analytic gradient, symmetrised.
Eigen::MatrixXd finite_difference_hessian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
    const Eigen::VectorXd& x, double relative_step = 1e-4);

// Inverse of H after replacing each eigenvalue by max(|ev|, floor * max|ev|).
Eigen::MatrixXd positive_definite_inverse(const Eigen::MatrixXd& H, double floor = 1e-8);

}  // namespace betssm
