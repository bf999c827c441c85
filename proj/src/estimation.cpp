#include "betssm/estimation.hpp"

#include <cmath>
#include <limits>

#include "betssm/error.hpp"
#include "betssm/likelihood.hpp"

namespace betssm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kZ95 = 1.959963984540054;

using L = ParamLayout;

}  // namespace

Eigen::VectorXd transform_to_unconstrained(const ModelParams& params) {
    params.validate();
    if (!(params.p > 0.0) || !(params.q > 0.0))
        throw InvalidParameter("working scale needs p > 0 and q > 0 (boundary value)");
    Eigen::VectorXd w = pack(params);
    w[L::kPhi] = std::log1p(params.phi) - std::log1p(-params.phi);
    w[L::kOmega] = std::log(params.omega);
    w[L::kSigma] = std::log(params.sigma) - std::log1p(-params.sigma);
    const double rest = 1.0 - params.p - params.q;
    w[L::kP] = std::log(params.p) - std::log(rest);
    w[L::kQ] = std::log(params.q) - std::log(rest);
    if (!w.allFinite()) throw InvalidParameter("parameters lie on the boundary of their domain");
    return w;
}

ModelParams transform_to_natural(const ModelParams& like, const Eigen::VectorXd& working) {
    Eigen::VectorXd v = working;
    v[L::kPhi] = std::tanh(0.5 * working[L::kPhi]);
    v[L::kOmega] = std::exp(working[L::kOmega]);
    v[L::kSigma] = inv_logit(working[L::kSigma]);
    const double w1 = working[L::kP], w2 = working[L::kQ];
    const double top = std::max({0.0, w1, w2});
    const double e0 = std::exp(-top), e1 = std::exp(w1 - top), e2 = std::exp(w2 - top);
    const double z = e0 + e1 + e2;
    v[L::kP] = e1 / z;
    v[L::kQ] = e2 / z;
    return unpack(like, v);
}

Eigen::MatrixXd transform_jacobian(const ModelParams& like, const Eigen::VectorXd& working) {
    const ModelParams nat = transform_to_natural(like, working);
    const int n = static_cast<int>(working.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
    J(L::kPhi, L::kPhi) = 0.5 * (1.0 - nat.phi * nat.phi);
    J(L::kOmega, L::kOmega) = nat.omega;
    J(L::kSigma, L::kSigma) = nat.sigma * (1.0 - nat.sigma);
    J(L::kP, L::kP) = nat.p * (1.0 - nat.p);
    J(L::kP, L::kQ) = -nat.p * nat.q;
    J(L::kQ, L::kP) = -nat.p * nat.q;
    J(L::kQ, L::kQ) = nat.q * (1.0 - nat.q);
    return J;
}

int parameter_count(const ModelParams& params) { return ParamLayout::of(params).size(); }

long observation_count(std::span<const MatchSeries> matches) {
    long n = 0;
    for (const auto& m : matches)
        for (double y : m.y)
            if (!is_missing(y)) ++n;
    return n;
}

namespace {

// Negative (penalised) log-likelihood and its gradient on the working scale.
class WorkingObjective {
public:
    WorkingObjective(std::span<const MatchSeries> matches, const ModelParams& like,
                     const FitOptions& options)
        : matches_(matches), like_(like), options_(options) {}

    ObjectiveValue operator()(const Eigen::VectorXd& w, bool penalized = true) const {
        ObjectiveValue out;
        out.gradient = Eigen::VectorXd::Zero(w.size());
        try {
            const ModelParams theta = transform_to_natural(like_, w);
            // Beyond this the quadrature rows no longer sum to one and the
            // approximate likelihood grows without bound as phi -> 1.
            if (grid_resolution(theta, options_.grid) < kMinGridResolution) {
                out.value = kInf;
                return out;
            }
            const LogLikGradient ll = joint_log_likelihood_gradient(matches_, theta, options_.grid);
            if (!std::isfinite(ll.value) || !ll.gradient.allFinite()) {
                out.value = kInf;
                return out;
            }
            Eigen::VectorXd g = ll.gradient;
            double value = ll.value;
            if (penalized && theta.variant == Variant::Varying) {
                value -= spline_penalty(theta, options_.lambda_alpha, options_.lambda_beta);
                g -= spline_penalty_gradient(theta, options_.lambda_alpha, options_.lambda_beta);
            }
            out.value = -value;
            out.gradient = -(transform_jacobian(like_, w).transpose() * g);
        } catch (const InvalidParameter&) {
            out.value = kInf;
        }
        return out;
    }

    Eigen::MatrixXd unpenalized_hessian(const Eigen::VectorXd& w) const {
        return finite_difference_hessian(
            [this](const Eigen::VectorXd& x) { return (*this)(x, false).gradient; }, w);
    }

private:
    std::span<const MatchSeries> matches_;
    ModelParams like_;
    FitOptions options_;
};

void check_options(const FitOptions& options, const ModelParams& init) {
    if (!(options.lambda_alpha >= 0.0) || !(options.lambda_beta >= 0.0))
        throw ConfigError("smoothing parameters must be nonnegative");
    if (init.variant != options.variant) throw ConfigError("initial values use a different model variant");
    if (options.variant == Variant::Baseline && (options.lambda_alpha > 0.0 || options.lambda_beta > 0.0))
        throw ConfigError("smoothing parameters apply to the varying-coefficient model only");
    if (options.variant == Variant::Varying && init.K() != options.K)
        throw ConfigError("initial values use a different number of basis functions");
    if (options.grid.m < 2 || !(options.grid.span_sds > 0.0)) throw ConfigError("invalid state grid configuration");
}

std::vector<ParameterEstimate> interval_table(const ModelParams& params, const Eigen::VectorXd& w,
                                              const std::optional<Eigen::MatrixXd>& cov) {
    const ParamLayout layout = ParamLayout::of(params);
    const auto names = layout.names();
    const Eigen::VectorXd nat = pack(params);
    Eigen::VectorXd se_nat = Eigen::VectorXd::Constant(nat.size(), kNaN);
    if (cov) {
        const Eigen::MatrixXd J = transform_jacobian(params, w);
        se_nat = (J * *cov * J.transpose()).diagonal().cwiseMax(0.0).cwiseSqrt();
    }
    std::vector<ParameterEstimate> out;
    for (int k = 0; k < layout.size(); ++k) {
        const bool spline = params.variant == Variant::Varying && k >= L::kAlphaBegin && k < layout.zeta1();
        if (spline) continue;
        ParameterEstimate e{names[k], nat[k], se_nat[k], kNaN, kNaN};
        if (cov) {
            const double sw = std::sqrt(std::max(0.0, (*cov)(k, k)));
            Eigen::VectorXd lo = w, hi = w;
            lo[k] -= kZ95 * sw;
            hi[k] += kZ95 * sw;
            const double a = pack(transform_to_natural(params, lo))[k];
            const double b = pack(transform_to_natural(params, hi))[k];
            e.lower = std::min(a, b);
            e.upper = std::max(a, b);
        }
        out.push_back(e);
    }
    return out;
}

}  // namespace

double effective_df(const Eigen::MatrixXd& unpenalized, const Eigen::MatrixXd& penalized) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(penalized);
    if (!lu.isInvertible())
        throw NumericalError("penalised information matrix is singular (rank " +
                             std::to_string(lu.rank()) + " of " + std::to_string(penalized.rows()) + ")");
    return lu.solve(unpenalized).trace();
}

Eigen::MatrixXd unpenalized_information(std::span<const MatchSeries> matches,
                                        const ModelParams& params, const GridConfig& grid) {
    FitOptions options;
    options.variant = params.variant;
    options.K = params.K();
    options.grid = grid;
    WorkingObjective objective(matches, params, options);
    return objective.unpenalized_hessian(transform_to_unconstrained(params));
}

double effective_df(std::span<const MatchSeries> matches, const FitResult& fit) {
    const Eigen::MatrixXd I_u = unpenalized_information(matches, fit.params, fit.options.grid);
    const Eigen::MatrixXd S =
        spline_penalty_hessian(fit.params, fit.options.lambda_alpha, fit.options.lambda_beta);
    return effective_df(I_u, I_u + S);
}

FitResult fit(std::span<const MatchSeries> matches, const FitOptions& options,
              const std::optional<ModelParams>& init, const std::optional<Eigen::MatrixXd>& warm_information) {
    if (matches.empty()) throw DataError("fit needs at least one match");
    for (const auto& m : matches) m.validate();
    const ModelParams start = init ? *init : ModelParams::initial(options.variant, options.K);
    check_options(options, start);

    const WorkingObjective objective(matches, start, options);
    const Eigen::VectorXd w0 = transform_to_unconstrained(start);
    const Eigen::MatrixXd S = spline_penalty_hessian(start, options.lambda_alpha, options.lambda_beta);

    const ObjectiveValue f0 = objective(w0);
    if (!std::isfinite(f0.value)) throw NumericalError("log-likelihood is not finite at the starting values");
    Eigen::MatrixXd start_information =
        warm_information ? Eigen::MatrixXd(*warm_information + S)
                         : finite_difference_hessian(
                               [&](const Eigen::VectorXd& x) { return objective(x).gradient; }, w0);
    const Eigen::MatrixXd H0 = positive_definite_inverse(start_information);

    const OptimResult opt = minimize_bfgs(
        [&](const Eigen::VectorXd& w) { return objective(w); }, w0, options.optim, H0);

    FitResult out;
    out.options = options;
    out.params = transform_to_natural(start, opt.x);
    out.convergence.status = opt.status;
    out.convergence.iterations = opt.iterations;
    out.convergence.evaluations = opt.evaluations;
    out.convergence.gradient_norm = opt.gradient_norm;
    out.convergence.relative_gradient = opt.gradient_norm / std::max(1.0, std::abs(opt.value));
    out.convergence.at_grid_limit = grid_resolution(out.params, options.grid) < 1.05 * kMinGridResolution;
    out.n_obs = observation_count(matches);

    const bool varying = options.variant == Variant::Varying;
    out.penalized_loglik = -opt.value;
    out.loglik = varying ? out.penalized_loglik +
                               spline_penalty(out.params, options.lambda_alpha, options.lambda_beta)
                         : out.penalized_loglik;

    const int n = parameter_count(out.params);
    std::optional<Eigen::MatrixXd> cov;
    out.df = varying ? kNaN : static_cast<double>(n);
    if (options.compute_information) {
        out.unpenalized_information = objective.unpenalized_hessian(opt.x);
        out.penalized_information = out.unpenalized_information + S;
        Eigen::LLT<Eigen::MatrixXd> llt(out.penalized_information);
        if (llt.info() == Eigen::Success) {
            cov = llt.solve(Eigen::MatrixXd::Identity(n, n));
            out.covariance_available = true;
            out.working_covariance = *cov;
        }
        if (varying) {
            try {
                out.df = effective_df(out.unpenalized_information, out.penalized_information);
            } catch (const NumericalError&) {
                out.df = kNaN;
            }
        }
    }
    const double nobs = static_cast<double>(out.n_obs);
    out.aic = -2.0 * out.loglik + 2.0 * out.df;
    out.bic = -2.0 * out.loglik + std::log(nobs) * out.df;
    out.hq = -2.0 * out.loglik + 2.0 * std::log(std::log(nobs)) * out.df;
    out.estimates = interval_table(out.params, opt.x, cov);
    return out;
}

std::vector<double> default_lambda_grid() { return {0.05, 0.25, 1.0, 5.0, 25.0, 100.0, 500.0}; }

std::size_t select_best_cell(const std::vector<TuneCell>& cells) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < cells.size(); ++k) {
        const TuneCell& c = cells[k];
        if (!c.ok || !std::isfinite(c.aic)) continue;
        if (!best) {
            best = k;
            continue;
        }
        const TuneCell& b = cells[*best];
        if (c.aic < b.aic - 1e-9) {
            best = k;
        } else if (std::abs(c.aic - b.aic) <= 1e-9) {
            if (c.lambda_alpha > b.lambda_alpha ||
                (c.lambda_alpha == b.lambda_alpha && c.lambda_beta > b.lambda_beta))
                best = k;
        }
    }
    if (!best) throw NumericalError("every smoothing-parameter cell failed to fit");
    return *best;
}

TuneResult tune(std::span<const MatchSeries> matches, const FitOptions& base,
                const std::vector<double>& lambda_alpha_grid, const std::vector<double>& lambda_beta_grid) {
    if (base.variant != Variant::Varying) throw ConfigError("tuning needs the varying-coefficient model");
    if (lambda_alpha_grid.empty() || lambda_beta_grid.empty()) throw ConfigError("empty smoothing grid");
    const std::size_t na = lambda_alpha_grid.size(), nb = lambda_beta_grid.size();
    TuneResult out;
    out.lambda_alpha_grid = lambda_alpha_grid;
    out.lambda_beta_grid = lambda_beta_grid;
    out.cells.resize(na * nb);
    std::vector<std::optional<FitResult>> fits(na * nb);

    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) {
            const std::size_t k = i * nb + j;
            TuneCell& cell = out.cells[k];
            cell.lambda_alpha = lambda_alpha_grid[i];
            cell.lambda_beta = lambda_beta_grid[j];
            // Nearest fitted neighbour: left in the row, else the row above.
            const std::optional<FitResult>* neighbour = nullptr;
            if (j > 0 && fits[k - 1]) neighbour = &fits[k - 1];
            else if (i > 0 && fits[k - nb]) neighbour = &fits[k - nb];
            FitOptions options = base;
            options.lambda_alpha = cell.lambda_alpha;
            options.lambda_beta = cell.lambda_beta;
            options.compute_information = true;
            try {
                FitResult f = neighbour ? fit(matches, options, (*neighbour)->params,
                                              (*neighbour)->unpenalized_information)
                                        : fit(matches, options);
                cell.loglik = f.loglik;
                cell.penalized_loglik = f.penalized_loglik;
                cell.df = f.df;
                cell.aic = f.aic;
                cell.bic = f.bic;
                cell.hq = f.hq;
                cell.convergence = f.convergence;
                cell.ok = f.convergence.converged() && std::isfinite(f.df);
                if (!cell.ok)
                    cell.error = f.convergence.converged() ? "degrees of freedom unavailable"
                                                           : "optimizer: " + to_string(f.convergence.status);
                fits[k] = std::move(f);
            } catch (const Error& e) {
                cell.ok = false;
                cell.error = e.what();
            }
        }
    }
    out.best_index = select_best_cell(out.cells);
    out.best_fit = *fits[out.best_index];
    return out;
}

}  // namespace betssm
