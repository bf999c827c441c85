#include "betssm/likelihood.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "betssm/error.hpp"
#include "betssm/parallel.hpp"

namespace betssm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Largest total exponent allowed in the factored kernel before falling back
// to a dense matrix.
constexpr double kMaxFactorExponent = 300.0;

double digamma(double x) { return boost::math::digamma(x); }

// Per-state beta quantities for one value of the linear offset. Reused across
// minutes while the offset does not change (always, for the baseline model).
class ObservationCache {
public:
    ObservationCache(const ModelParams& params, const StateGrid& grid, bool with_derivatives)
        : c_(grid.midpoints), with_derivatives_(with_derivatives) {
        tau_ = beta_precision(params.sigma);
        log_continuous_ = std::log1p(-(params.p + params.q));
        lgamma_tau_ = std::lgamma(tau_);
        psi_tau_ = with_derivatives ? digamma(tau_) : 0.0;
        const int m = grid.m;
        mu_.resize(m);
        a_.resize(m);
        b_.resize(m);
        lbeta_.resize(m);
        if (with_derivatives) {
            psi_a_.resize(m);
            psi_b_.resize(m);
        }
    }

    void update(double offset) {
        if (valid_ && offset == offset_) return;
        offset_ = offset;
        valid_ = true;
        for (int i = 0; i < mu_.size(); ++i) {
            const double mu = inv_logit(offset + c_[i]);
            // Keep both shapes strictly positive when the logistic saturates.
            const double mu_c = std::clamp(mu, 1e-300, 1.0 - 1e-16);
            mu_[i] = mu_c;
            a_[i] = mu_c * tau_;
            b_[i] = (1.0 - mu_c) * tau_;
            lbeta_[i] = std::lgamma(a_[i]) + std::lgamma(b_[i]) - lgamma_tau_;
            if (with_derivatives_) {
                psi_a_[i] = digamma(a_[i]);
                psi_b_[i] = digamma(b_[i]);
            }
        }
    }

    double tau() const { return tau_; }
    double log_continuous() const { return log_continuous_; }
    double psi_tau() const { return psi_tau_; }
    const Eigen::VectorXd& mu() const { return mu_; }
    const Eigen::VectorXd& a() const { return a_; }
    const Eigen::VectorXd& b() const { return b_; }
    const Eigen::VectorXd& lbeta() const { return lbeta_; }
    const Eigen::VectorXd& psi_a() const { return psi_a_; }
    const Eigen::VectorXd& psi_b() const { return psi_b_; }

private:
    std::vector<double> c_;
    bool with_derivatives_;
    double tau_ = 0.0;
    double log_continuous_ = 0.0;
    double lgamma_tau_ = 0.0;
    double psi_tau_ = 0.0;
    double offset_ = 0.0;
    bool valid_ = false;
    Eigen::VectorXd mu_, a_, b_, lbeta_, psi_a_, psi_b_;
};

enum class ObsKind { Missing, Zero, One, Interior };

ObsKind classify(double y) {
    if (is_missing(y)) return ObsKind::Missing;
    if (y == 0.0) return ObsKind::Zero;
    if (y == 1.0) return ObsKind::One;
    if (!(y > 0.0 && y < 1.0)) throw DataError("relative stake outside [0,1]");
    return ObsKind::Interior;
}

// Everything the backward pass needs from the forward pass.
struct ForwardPass {
    bool ok = true;
    double log_likelihood = 0.0;
    int steps = 0;                  // minutes processed before a failure
    Eigen::MatrixXd alpha;          // T x m, rows normalised
    Eigen::MatrixXd P;              // T x m, observation densities / exp(log_shift)
    Eigen::MatrixXd d_eta;          // T x m, d log f / d eta (interior minutes)
    Eigen::MatrixXd d_tau;          // T x m, d log f / d tau (interior minutes)
    std::vector<double> scale;      // normaliser in shifted units
    std::vector<double> log_scaling;
    std::vector<ObsKind> kinds;
};

double transition_shift(const ModelParams& params, const MatchSeries& match, int t_into) {
    return params.beta_at(t_into) * match.vaepdiff[t_into - 2];
}

ForwardPass run_forward(const MatchSeries& match, const ModelParams& params,
                        const StateGrid& grid, const Eigen::VectorXd& delta,
                        TransitionKernel& kernel, bool with_derivatives) {
    const int T = match.T();
    const int m = grid.m;
    ForwardPass fp;
    fp.alpha.resize(T, m);
    fp.P.resize(T, m);
    if (with_derivatives) {
        fp.d_eta.setZero(T, m);
        fp.d_tau.setZero(T, m);
    }
    fp.scale.assign(T, 1.0);
    fp.log_scaling.assign(T, 0.0);
    fp.kinds.resize(T);

    ObservationCache cache(params, grid, with_derivatives);
    const double log_p = std::log(params.p);
    const double log_q = std::log(params.q);

    Eigen::VectorXd log_f(m), v(m);
    CompensatedSum total;
    for (int t = 1; t <= T; ++t) {
        const double y = match.y[t - 1];
        const ObsKind kind = classify(y);
        fp.kinds[t - 1] = kind;
        double log_shift = 0.0;
        auto Prow = fp.P.row(t - 1);
        switch (kind) {
            case ObsKind::Missing:
                Prow.setOnes();
                break;
            case ObsKind::Zero:
                log_shift = log_p;
                Prow.setOnes();
                break;
            case ObsKind::One:
                log_shift = log_q;
                Prow.setOnes();
                break;
            case ObsKind::Interior: {
                cache.update(linear_offset(params, match, t));
                const double ly = std::log(y);
                const double l1y = std::log1p(-y);
                log_f = cache.log_continuous() + (cache.a().array() - 1.0) * ly +
                        (cache.b().array() - 1.0) * l1y - cache.lbeta().array();
                log_shift = log_f.maxCoeff();
                Prow = (log_f.array() - log_shift).exp().matrix().transpose();
                if (with_derivatives) {
                    const auto& mu = cache.mu().array();
                    const auto ra = ly - cache.psi_a().array();
                    const auto rb = l1y - cache.psi_b().array();
                    fp.d_eta.row(t - 1) = (mu * (1.0 - mu) * cache.tau() * (ra - rb)).matrix().transpose();
                    fp.d_tau.row(t - 1) = (mu * ra + (1.0 - mu) * rb + cache.psi_tau()).matrix().transpose();
                }
                break;
            }
        }
        if (!std::isfinite(log_shift)) {
            fp.ok = false;
            fp.steps = t - 1;
            fp.log_likelihood = kNegInf;
            return fp;
        }
        if (t == 1) {
            v = delta.array() * Prow.transpose().array();
        } else {
            kernel.set_shift(transition_shift(params, match, t));
            kernel.left_apply(fp.alpha.row(t - 2).transpose(), v);
            v.array() *= Prow.transpose().array();
        }
        const double s = v.sum();
        if (!(s > 0.0) || !std::isfinite(s)) {
            fp.ok = false;
            fp.steps = t - 1;
            fp.log_likelihood = kNegInf;
            return fp;
        }
        fp.alpha.row(t - 1) = (v / s).transpose();
        fp.scale[t - 1] = s;
        fp.log_scaling[t - 1] = std::log(s) + log_shift;
        total.add(fp.log_scaling[t - 1]);
    }
    fp.steps = T;
    fp.log_likelihood = total.value();
    if (!std::isfinite(fp.log_likelihood)) {
        fp.ok = false;
        fp.log_likelihood = kNegInf;
    }
    return fp;
}

void check_series(const MatchSeries& match, const ModelParams& params) {
    if (match.T() == 0) throw DataError("empty match series");
    if (params.variant == Variant::Varying && match.T() > kLastMinute)
        throw DataError("varying model supports at most 85 minutes");
}

}  // namespace

// ---------------------------------------------------------------------------

TransitionKernel::TransitionKernel(const ModelParams& params, const StateGrid& grid)
    : phi_(params.phi), omega_(params.omega) {
    const int m = grid.m;
    c_ = Eigen::Map<const Eigen::VectorXd>(grid.midpoints.data(), m);
    c0_ = grid.c0;
    h_ = grid.h;
    auto A = std::make_shared<Eigen::MatrixXd>(m, m);
    const double inv2w2 = 1.0 / (2.0 * omega_ * omega_);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) {
            const double d = c_[j] - phi_ * c_[i];
            (*A)(i, j) = std::exp(-d * d * inv2w2);
        }
    A_ = std::move(A);
    norm_ = grid.h / (std::sqrt(2.0 * std::numbers::pi) * omega_);
    u_.setOnes(m);
    w_.setOnes(m);
    scale_ = norm_;
    tmp_.resize(m);
}

namespace {
// exp(k * c_i) on the equidistant midpoints, built as a geometric sequence
// and re-anchored every 16 terms.
void exp_on_grid(double k, double c0, double h, Eigen::VectorXd& out) {
    const int m = static_cast<int>(out.size());
    const double ratio = std::exp(k * h);
    for (int i = 0; i < m; ++i) {
        if (i % 16 == 0)
            out[i] = std::exp(k * (c0 + (i + 0.5) * h));
        else
            out[i] = out[i - 1] * ratio;
    }
}
}  // namespace

void TransitionKernel::set_shift(double shift) {
    if (shift == shift_) return;
    shift_ = shift;
    const double w2 = omega_ * omega_;
    const double cmax = c_.cwiseAbs().maxCoeff();
    const double bound = cmax * std::abs(shift) * (1.0 + std::abs(phi_)) / w2 + shift * shift / (2.0 * w2);
    if (bound > kMaxFactorExponent) {
        use_dense_ = true;
        const int m = static_cast<int>(c_.size());
        G_.resize(m, m);
        const double inv2w2 = 1.0 / (2.0 * w2);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) {
                const double d = c_[j] - phi_ * c_[i] - shift;
                G_(i, j) = norm_ * std::exp(-d * d * inv2w2);
            }
        return;
    }
    use_dense_ = false;
    if (shift == 0.0) {
        u_.setOnes();
        w_.setOnes();
        scale_ = norm_;
        return;
    }
    exp_on_grid(-phi_ * shift / w2, c0_, h_, u_);
    exp_on_grid(shift / w2, c0_, h_, w_);
    scale_ = norm_ * std::exp(-shift * shift / (2.0 * w2));
}

void TransitionKernel::left_apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    if (use_dense_) {
        out.noalias() = G_.transpose() * x;
        return;
    }
    tmp_ = x.cwiseProduct(u_);
    out.noalias() = A_->transpose() * tmp_;
    out.array() *= w_.array() * scale_;
}

void TransitionKernel::right_apply(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    if (use_dense_) {
        out.noalias() = G_ * x;
        return;
    }
    tmp_ = x.cwiseProduct(w_);
    out.noalias() = *A_ * tmp_;
    out.array() *= u_.array() * scale_;
}

Eigen::MatrixXd TransitionKernel::dense() const {
    if (use_dense_) return G_;
    return scale_ * u_.asDiagonal() * (*A_) * w_.asDiagonal();
}

// ---------------------------------------------------------------------------

namespace {

ForwardResult forward_impl(const MatchSeries& match, const ModelParams& params, const StateGrid& grid,
                           const Eigen::VectorXd& delta, TransitionKernel kernel) {
    check_series(match, params);
    ForwardPass fp = run_forward(match, params, grid, delta, kernel, false);
    ForwardResult out;
    out.log_likelihood = fp.log_likelihood;
    out.filtered = fp.alpha.topRows(fp.steps);
    out.log_scaling.assign(fp.log_scaling.begin(), fp.log_scaling.begin() + fp.steps);
    return out;
}

}  // namespace

ForwardResult forward(const MatchSeries& match, const ModelParams& params, const StateGrid& grid) {
    params.validate();
    return forward_impl(match, params, grid, initial_distribution(params, grid), TransitionKernel(params, grid));
}

double joint_log_likelihood(std::span<const MatchSeries> matches, const ModelParams& params,
                            const StateGrid& grid) {
    if (matches.empty()) throw DataError("joint likelihood needs at least one match");
    params.validate();
    const Eigen::VectorXd delta = initial_distribution(params, grid);
    const TransitionKernel kernel(params, grid);
    std::vector<double> per_match(matches.size());
    parallel_for(matches.size(), [&](std::size_t k) {
        per_match[k] = forward_impl(matches[k], params, grid, delta, kernel).log_likelihood;
    });
    CompensatedSum s;
    for (double v : per_match) s.add(v);
    return s.value();
}

double spline_penalty(const ModelParams& params, double lambda_alpha, double lambda_beta) {
    if (params.variant != Variant::Varying)
        throw ConfigError("the spline penalty applies to the varying-coefficient model only");
    return penalty(params.alpha, lambda_alpha) + penalty(params.beta, lambda_beta);
}

double penalized_objective(std::span<const MatchSeries> matches, const ModelParams& params,
                           const StateGrid& grid, double lambda_alpha, double lambda_beta) {
    const double pen = spline_penalty(params, lambda_alpha, lambda_beta);
    return joint_log_likelihood(matches, params, grid) - pen;
}

Eigen::VectorXd spline_penalty_gradient(const ModelParams& params, double lambda_alpha,
                                        double lambda_beta) {
    const ParamLayout layout = ParamLayout::of(params);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(layout.size());
    if (params.variant != Variant::Varying) return g;
    const Eigen::MatrixXd D = difference_matrix(layout.n_alpha);
    const Eigen::MatrixXd DtD = D.transpose() * D;
    const Eigen::Map<const Eigen::VectorXd> a(params.alpha.data(), layout.n_alpha);
    const Eigen::Map<const Eigen::VectorXd> b(params.beta.data(), layout.n_beta);
    g.segment(ParamLayout::kAlphaBegin, layout.n_alpha) = lambda_alpha * DtD * a;
    g.segment(layout.beta_begin(), layout.n_beta) = lambda_beta * DtD * b;
    return g;
}

Eigen::MatrixXd spline_penalty_hessian(const ModelParams& params, double lambda_alpha,
                                       double lambda_beta) {
    const ParamLayout layout = ParamLayout::of(params);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(layout.size(), layout.size());
    if (params.variant != Variant::Varying) return H;
    const Eigen::MatrixXd D = difference_matrix(layout.n_alpha);
    const Eigen::MatrixXd DtD = D.transpose() * D;
    H.block(ParamLayout::kAlphaBegin, ParamLayout::kAlphaBegin, layout.n_alpha, layout.n_alpha) =
        lambda_alpha * DtD;
    H.block(layout.beta_begin(), layout.beta_begin(), layout.n_beta, layout.n_beta) = lambda_beta * DtD;
    return H;
}

// ---------------------------------------------------------------------------

double match_log_likelihood(const MatchSeries& match, const ModelParams& params,
                            const GridConfig& config) {
    const StateGrid grid = build_grid(params, config.m, config.span_sds);
    return forward(match, params, grid).log_likelihood;
}

// The objective moves the grid with the parameters: c_i = kappa z_i and
// h = kappa h_z with kappa the stationary sd and z a fixed standardised grid.
// The initial vector delta_i = h f(c_i) is then parameter free, and the
// derivative of log L is the posterior expectation (over discrete state
// paths) of the derivative of each log path weight, computed with one
// backward sweep.
namespace {

LogLikGradient gradient_impl(const MatchSeries& match, const ModelParams& params, const StateGrid& grid,
                             const Eigen::VectorXd& delta, TransitionKernel kernel) {
    check_series(match, params);
    const ParamLayout layout = ParamLayout::of(params);
    LogLikGradient out;
    out.gradient = Eigen::VectorXd::Zero(layout.size());

    const int m = grid.m;
    const int T = match.T();
    ForwardPass fp = run_forward(match, params, grid, delta, kernel, true);
    out.value = fp.log_likelihood;
    if (!fp.ok) return out;

    const Eigen::Map<const Eigen::VectorXd> c(grid.midpoints.data(), m);
    const Eigen::ArrayXd c2 = c.array().square();
    const double phi = params.phi;
    const double omega = params.omega;
    const double w2 = omega * omega;
    const double kappa = params.stationary_sd();
    const double sigma = params.sigma;
    const bool varying = params.variant == Variant::Varying;

    double g_phi = 0.0, g_omega = 0.0, g_kappa = 0.0, g_sigma = 0.0, g_p = 0.0, g_q = 0.0;
    double g_alpha0 = 0.0, g_zeta1 = 0.0, g_zeta2 = 0.0;
    Eigen::VectorXd g_alpha = Eigen::VectorXd::Zero(layout.n_alpha);
    Eigen::VectorXd g_beta = Eigen::VectorXd::Zero(layout.n_beta);
    const double d_cont = -1.0 / (1.0 - params.p - params.q);

    auto observation_terms = [&](int t, const Eigen::VectorXd& post) {
        switch (fp.kinds[t - 1]) {
            case ObsKind::Missing:
                return;
            case ObsKind::Zero:
                g_p += 1.0 / params.p;
                return;
            case ObsKind::One:
                g_q += 1.0 / params.q;
                return;
            case ObsKind::Interior:
                break;
        }
        g_p += d_cont;
        g_q += d_cont;
        const double D = post.dot(fp.d_eta.row(t - 1).transpose());
        g_kappa += (post.array() * fp.d_eta.row(t - 1).transpose().array() * c.array()).sum() / kappa;
        g_sigma += post.dot(fp.d_tau.row(t - 1).transpose()) * (-2.0 / (sigma * sigma * sigma));
        g_alpha0 += D;
        if (varying) {
            g_alpha += D * match.prewindiff * params.basis->at_minute(t);
            g_zeta1 += D * match.scorediff[t - 1];
            g_zeta2 += D * match.winprobteam[t - 1];
        } else {
            g_alpha[0] += D * match.prewindiff;
        }
    };

    Eigen::VectorXd beta_next = Eigen::VectorXd::Ones(m);  // scaled backward vector at t+1
    Eigen::VectorXd post_next = fp.alpha.row(T - 1).transpose();
    observation_terms(T, post_next);
    Eigen::VectorXd b(m), Gb(m), Gcb(m), cb(m), beta_t(m), post_t(m);
    for (int t = T - 1; t >= 1; --t) {
        // transition from minute t into t+1
        const double s = transition_shift(params, match, t + 1);
        kernel.set_shift(s);
        b = fp.P.row(t).transpose().cwiseProduct(beta_next);
        kernel.right_apply(b, Gb);
        cb = c.cwiseProduct(b);
        kernel.right_apply(cb, Gcb);
        const double norm = fp.scale[t];
        beta_t = Gb / norm;
        const auto alpha_t = fp.alpha.row(t - 1).transpose();
        post_t = alpha_t.cwiseProduct(beta_t);

        const double Ei = post_t.dot(c);
        const double Eii = (post_t.array() * c2).sum();
        const double Ej = post_next.dot(c);
        const double Ejj = (post_next.array() * c2).sum();
        const double Eij = alpha_t.cwiseProduct(c).dot(Gcb) / norm;

        const double E_res = Ej - phi * Ei - s;
        const double E_res_ci = Eij - phi * Eii - s * Ei;
        const double E_res2 = Ejj + phi * phi * Eii + s * s - 2.0 * phi * Eij - 2.0 * s * Ej + 2.0 * phi * s * Ei;

        g_phi += E_res_ci / w2;
        g_omega += -1.0 / omega + E_res2 / (w2 * omega);
        g_kappa += 1.0 / kappa - (E_res2 + s * E_res) / (kappa * w2);
        const double g_shift = E_res / w2;
        const double v_prev = match.vaepdiff[t - 1];
        if (varying)
            g_beta += g_shift * v_prev * params.basis->at_minute(t + 1);
        else
            g_beta[0] += g_shift * v_prev;

        observation_terms(t, post_t);
        beta_next = beta_t;
        post_next = post_t;
    }

    g_phi += g_kappa * kappa * phi / (1.0 - phi * phi);
    g_omega += g_kappa * kappa / omega;

    Eigen::VectorXd& g = out.gradient;
    g[ParamLayout::kPhi] = g_phi;
    g[ParamLayout::kOmega] = g_omega;
    g[ParamLayout::kSigma] = g_sigma;
    g[ParamLayout::kP] = g_p;
    g[ParamLayout::kQ] = g_q;
    g[ParamLayout::kAlpha0] = g_alpha0;
    g.segment(ParamLayout::kAlphaBegin, layout.n_alpha) = g_alpha;
    g.segment(layout.beta_begin(), layout.n_beta) = g_beta;
    if (layout.has_zeta) {
        g[layout.zeta1()] = g_zeta1;
        g[layout.zeta2()] = g_zeta2;
    }
    return out;
}

}  // namespace

LogLikGradient match_log_likelihood_gradient(const MatchSeries& match, const ModelParams& params,
                                             const GridConfig& config) {
    params.validate();
    const StateGrid grid = build_grid(params, config.m, config.span_sds);
    return gradient_impl(match, params, grid, initial_distribution(params, grid), TransitionKernel(params, grid));
}

double joint_log_likelihood(std::span<const MatchSeries> matches, const ModelParams& params,
                            const GridConfig& config) {
    const StateGrid grid = build_grid(params, config.m, config.span_sds);
    return joint_log_likelihood(matches, params, grid);
}

LogLikGradient joint_log_likelihood_gradient(std::span<const MatchSeries> matches,
                                             const ModelParams& params, const GridConfig& config) {
    if (matches.empty()) throw DataError("joint likelihood needs at least one match");
    params.validate();
    const StateGrid grid = build_grid(params, config.m, config.span_sds);
    const Eigen::VectorXd delta = initial_distribution(params, grid);
    const TransitionKernel kernel(params, grid);
    std::vector<LogLikGradient> per_match(matches.size());
    parallel_for(matches.size(), [&](std::size_t k) {
        per_match[k] = gradient_impl(matches[k], params, grid, delta, kernel);
    });
    const int n = ParamLayout::of(params).size();
    LogLikGradient out;
    out.gradient = Eigen::VectorXd::Zero(n);
    CompensatedSum value;
    std::vector<CompensatedSum> grad(n);
    for (const auto& r : per_match) {
        value.add(r.value);
        for (int k = 0; k < n; ++k) grad[k].add(r.gradient[k]);
    }
    out.value = value.value();
    for (int k = 0; k < n; ++k) out.gradient[k] = grad[k].value();
    if (!std::isfinite(out.value)) out.value = kNegInf;
    return out;
}

}  // namespace betssm
