#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <vector>

#include "betssm/model.hpp"

namespace betssm {

struct ForwardResult {
    double log_likelihood = 0.0;
    // Row t-1 holds P(g_t in C_i | y_1..y_t).
    Eigen::MatrixXd filtered;
    // log of the normaliser at each minute; sums to log_likelihood.
    std::vector<double> log_scaling;
};

// Scaled forward recursion for delta P(y_1) Gamma(1) P(y_2) ... P(y_T) 1 on
// the given grid. Missing observations contribute an identity P. Returns
// log_likelihood = -inf (with a truncated filter) if the recursion hits a
// zero or non-finite normaliser.
ForwardResult forward(const MatchSeries& match, const ModelParams& params, const StateGrid& grid);

// Sum of per-match forward log-likelihoods, order independent.
double joint_log_likelihood(std::span<const MatchSeries> matches, const ModelParams& params,
                            const StateGrid& grid);

// (lambda_alpha / 2) sum (D2 nu_alpha)^2 + (lambda_beta / 2) sum (D2 nu_beta)^2.
// Throws ConfigError for the baseline variant.
double spline_penalty(const ModelParams& params, double lambda_alpha, double lambda_beta);

// joint_log_likelihood minus the spline penalty.
double penalized_objective(std::span<const MatchSeries> matches, const ModelParams& params,
                           const StateGrid& grid, double lambda_alpha, double lambda_beta);

// Log-likelihood on a grid rebuilt from the parameters themselves
// (build_grid(params, m, span_sds)), with its gradient in the packed natural
// layout. This is the objective the estimator maximises.
struct LogLikGradient {
    double value = 0.0;
    Eigen::VectorXd gradient;
};

double match_log_likelihood(const MatchSeries& match, const ModelParams& params,
                            const GridConfig& config);
LogLikGradient match_log_likelihood_gradient(const MatchSeries& match, const ModelParams& params,
                                             const GridConfig& config);

double joint_log_likelihood(std::span<const MatchSeries> matches, const ModelParams& params,
                            const GridConfig& config);
LogLikGradient joint_log_likelihood_gradient(std::span<const MatchSeries> matches,
                                             const ModelParams& params, const GridConfig& config);

// Gradient of spline_penalty in the packed natural layout (zero outside the
// spline blocks).
Eigen::VectorXd spline_penalty_gradient(const ModelParams& params, double lambda_alpha,
                                        double lambda_beta);
// Hessian of spline_penalty in the packed natural layout.
Eigen::MatrixXd spline_penalty_hessian(const ModelParams& params, double lambda_alpha,
                                       double lambda_beta);

// Applies the transition matrix for a given mean shift without forming it.
// gamma_ij = h N(c_j; phi c_i + s, omega^2) factors as
// C(s) u_i(s) A_ij w_j(s) with A_ij = exp(-(c_j - phi c_i)^2 / (2 omega^2)),
// so only A is stored; a dense matrix is used when the factors would
// overflow.
class TransitionKernel {
public:
    TransitionKernel(const ModelParams& params, const StateGrid& grid);

    void set_shift(double shift);
    double shift() const { return shift_; }

    // out = x^T Gamma
    void left_apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;
    // out = Gamma x
    void right_apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const;

    Eigen::MatrixXd dense() const;

private:
    Eigen::VectorXd c_;
    // Shared between copies; depends on (phi, omega, grid) only.
    std::shared_ptr<const Eigen::MatrixXd> A_;
    double c0_;
    double h_;
    double phi_;
    double omega_;
    double norm_;
    double shift_ = 0.0;
    bool use_dense_ = false;
    double scale_ = 1.0;
    Eigen::VectorXd u_;
    Eigen::VectorXd w_;
    Eigen::MatrixXd G_;
    mutable Eigen::VectorXd tmp_;
};

}  // namespace betssm
