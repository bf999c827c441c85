#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betssm/model.hpp"
#include "betssm/optimize.hpp"

namespace betssm {

// Working (unconstrained) scale:
//   phi   = 2 logistic(w) - 1
//   omega = exp(w)
//   sigma = logistic(w)
//   (p, q) = (e^w1, e^w2) / (1 + e^w1 + e^w2)
// All regression and spline coefficients are left unchanged.
Eigen::VectorXd transform_to_unconstrained(const ModelParams& params);
ModelParams transform_to_natural(const ModelParams& like, const Eigen::VectorXd& working);
// d natural / d working in the packed layout.
Eigen::MatrixXd transform_jacobian(const ModelParams& like, const Eigen::VectorXd& working);

struct FitOptions {
    Variant variant = Variant::Baseline;
    int K = 10;
    GridConfig grid;
    double lambda_alpha = 0.0;
    double lambda_beta = 0.0;
    OptimOptions optim;
    // Skip the Hessian at the solution (no CIs, no df).
    bool compute_information = true;
};

struct ParameterEstimate {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;  // natural scale, delta method
    double lower = 0.0;
    double upper = 0.0;
};

struct ConvergenceReport {
    OptimStatus status = OptimStatus::MaxIterations;
    int iterations = 0;
    int evaluations = 0;
    double gradient_norm = 0.0;
    double relative_gradient = 0.0;
    // phi ended next to the largest value the state grid resolves; a finer
    // grid (larger m) lifts the limit.
    bool at_grid_limit = false;
    bool converged() const { return status == OptimStatus::Converged; }
};

struct FitResult {
    ModelParams params;
    FitOptions options;
    ConvergenceReport convergence;
    long n_obs = 0;
    double loglik = 0.0;
    double penalized_loglik = 0.0;
    double df = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double hq = 0.0;
    // Negative Hessians on the working scale.
    Eigen::MatrixXd unpenalized_information;
    Eigen::MatrixXd penalized_information;
    bool covariance_available = false;
    Eigen::MatrixXd working_covariance;
    // Spline coefficients get no intervals.
    std::vector<ParameterEstimate> estimates;
};

int parameter_count(const ModelParams& params);
long observation_count(std::span<const MatchSeries> matches);

// Penalised maximum likelihood. `init` defaults to ModelParams::initial.
// `warm_information` (unpenalised information on the working scale, e.g.
// from a neighbouring fit) preconditions the quasi-Newton start; without it
// a finite-difference Hessian at the start point is used.
FitResult fit(std::span<const MatchSeries> matches, const FitOptions& options,
              const std::optional<ModelParams>& init = std::nullopt,
              const std::optional<Eigen::MatrixXd>& warm_information = std::nullopt);

// Negative Hessian of the unpenalised log-likelihood on the working scale.
Eigen::MatrixXd unpenalized_information(std::span<const MatchSeries> matches,
                                        const ModelParams& params, const GridConfig& grid);

// trace(I_unpen * I_pen^{-1}) at the fitted parameters. Throws NumericalError
// if the penalised information is singular.
double effective_df(std::span<const MatchSeries> matches, const FitResult& fit);
double effective_df(const Eigen::MatrixXd& unpenalized, const Eigen::MatrixXd& penalized);

struct TuneCell {
    double lambda_alpha = 0.0;
    double lambda_beta = 0.0;
    bool ok = false;
    std::string error;
    double loglik = 0.0;
    double penalized_loglik = 0.0;
    double df = 0.0;
    double aic = 0.0;
    double bic = 0.0;
    double hq = 0.0;
    ConvergenceReport convergence;
};

struct TuneResult {
    std::vector<double> lambda_alpha_grid;
    std::vector<double> lambda_beta_grid;
    // Row-major: cells[i * |beta grid| + j] holds (alpha_grid[i], beta_grid[j]).
    std::vector<TuneCell> cells;
    std::size_t best_index = 0;
    FitResult best_fit;

    const TuneCell& cell(std::size_t i, std::size_t j) const {
        return cells[i * lambda_beta_grid.size() + j];
    }
};

// {0.05, 0.25, 1, 5, 25, 100, 500}
std::vector<double> default_lambda_grid();

// Fits every (lambda_alpha, lambda_beta) pair, each warm-started from its
// already-fitted neighbour, and selects the smallest AIC. AIC ties within
// 1e-9 go to the larger lambda_alpha, then the larger lambda_beta.
TuneResult tune(std::span<const MatchSeries> matches, const FitOptions& base,
                const std::vector<double>& lambda_alpha_grid,
                const std::vector<double>& lambda_beta_grid);

// Index of the selected cell under the AIC / tie-break rule.
std::size_t select_best_cell(const std::vector<TuneCell>& cells);

}  // namespace betssm
