#include "betssm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "betssm/error.hpp"

namespace betssm {

std::string to_string(Variant v) { return v == Variant::Baseline ? "baseline" : "varying"; }

Variant variant_from_string(const std::string& s) {
    if (s == "baseline") return Variant::Baseline;
    if (s == "varying") return Variant::Varying;
    throw ConfigError("unknown model variant '" + s + "' (expected baseline or varying)");
}

ModelParams ModelParams::baseline(double phi, double omega, double sigma, double p, double q,
                                  double alpha0, double alpha, double beta) {
    ModelParams out;
    out.variant = Variant::Baseline;
    out.phi = phi;
    out.omega = omega;
    out.sigma = sigma;
    out.p = p;
    out.q = q;
    out.alpha0 = alpha0;
    out.alpha = {alpha};
    out.beta = {beta};
    return out;
}

ModelParams ModelParams::varying(int K, double phi, double omega, double sigma, double p,
                                 double q, double alpha0, double alpha, double beta,
                                 double zeta1, double zeta2) {
    ModelParams out = baseline(phi, omega, sigma, p, q, alpha0, alpha, beta);
    out.variant = Variant::Varying;
    out.basis = std::make_shared<const SplineBasis>(K);
    out.alpha.assign(K, alpha);
    out.beta.assign(K, beta);
    out.zeta1 = zeta1;
    out.zeta2 = zeta2;
    return out;
}

ModelParams ModelParams::initial(Variant variant, int K) {
    if (variant == Variant::Baseline) return baseline(0.9, 0.2, 0.3, 0.01, 0.01, 0.0, 0.0, 0.0);
    return varying(K, 0.9, 0.2, 0.3, 0.01, 0.01, 0.0, 0.0, 0.0);
}

void ModelParams::validate() const {
    if (!(std::abs(phi) < 1.0)) throw InvalidParameter("phi must lie in (-1,1)");
    if (!(omega > 0.0) || !std::isfinite(omega)) throw InvalidParameter("omega must be positive");
    if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidParameter("sigma must lie in (0,1)");
    if (!(p >= 0.0) || !(q >= 0.0) || !(p + q < 1.0))
        throw InvalidParameter("masses need p >= 0, q >= 0, p + q < 1");
    if (variant == Variant::Baseline) {
        if (alpha.size() != 1 || beta.size() != 1)
            throw ConfigError("baseline model takes scalar alpha and beta");
    } else {
        if (!basis) throw ConfigError("varying model needs a spline basis");
        const std::size_t K = basis->size();
        if (alpha.size() != K || beta.size() != K)
            throw ConfigError("varying model needs K spline coefficients for alpha and beta");
    }
}

double ModelParams::alpha_at(int t) const {
    if (variant == Variant::Baseline) return alpha[0];
    return evaluate_coefficient({alpha, basis.get()}, t);
}

double ModelParams::beta_at(int t) const {
    if (variant == Variant::Baseline) return beta[0];
    return evaluate_coefficient({beta, basis.get()}, t);
}

double ModelParams::stationary_sd() const {
    if (!(std::abs(phi) < 1.0)) throw InvalidParameter("stationary sd needs |phi| < 1");
    return omega / std::sqrt(1.0 - phi * phi);
}

ParamLayout ParamLayout::of(const ModelParams& params) {
    ParamLayout l;
    l.n_alpha = static_cast<int>(params.alpha.size());
    l.n_beta = static_cast<int>(params.beta.size());
    l.has_zeta = params.variant == Variant::Varying;
    return l;
}

std::vector<std::string> ParamLayout::names() const {
    std::vector<std::string> out{"phi", "omega", "sigma", "p", "q", "alpha0"};
    if (n_alpha == 1 && !has_zeta) {
        out.push_back("alpha");
        out.push_back("beta");
        return out;
    }
    for (int k = 1; k <= n_alpha; ++k) out.push_back("nu_alpha_" + std::to_string(k));
    for (int k = 1; k <= n_beta; ++k) out.push_back("nu_beta_" + std::to_string(k));
    if (has_zeta) {
        out.push_back("zeta1");
        out.push_back("zeta2");
    }
    return out;
}

Eigen::VectorXd pack(const ModelParams& params) {
    const ParamLayout l = ParamLayout::of(params);
    Eigen::VectorXd v(l.size());
    v[ParamLayout::kPhi] = params.phi;
    v[ParamLayout::kOmega] = params.omega;
    v[ParamLayout::kSigma] = params.sigma;
    v[ParamLayout::kP] = params.p;
    v[ParamLayout::kQ] = params.q;
    v[ParamLayout::kAlpha0] = params.alpha0;
    for (int k = 0; k < l.n_alpha; ++k) v[ParamLayout::kAlphaBegin + k] = params.alpha[k];
    for (int k = 0; k < l.n_beta; ++k) v[l.beta_begin() + k] = params.beta[k];
    if (l.has_zeta) {
        v[l.zeta1()] = params.zeta1;
        v[l.zeta2()] = params.zeta2;
    }
    return v;
}

ModelParams unpack(const ModelParams& like, const Eigen::VectorXd& v) {
    const ParamLayout l = ParamLayout::of(like);
    if (v.size() != l.size()) throw ConfigError("parameter vector has the wrong length");
    ModelParams out = like;
    out.phi = v[ParamLayout::kPhi];
    out.omega = v[ParamLayout::kOmega];
    out.sigma = v[ParamLayout::kSigma];
    out.p = v[ParamLayout::kP];
    out.q = v[ParamLayout::kQ];
    out.alpha0 = v[ParamLayout::kAlpha0];
    for (int k = 0; k < l.n_alpha; ++k) out.alpha[k] = v[ParamLayout::kAlphaBegin + k];
    for (int k = 0; k < l.n_beta; ++k) out.beta[k] = v[l.beta_begin() + k];
    if (l.has_zeta) {
        out.zeta1 = v[l.zeta1()];
        out.zeta2 = v[l.zeta2()];
    }
    return out;
}

void MatchSeries::validate() const {
    const std::size_t T = y.size();
    if (T == 0) throw DataError("match " + match_id + ": empty series");
    if (T > static_cast<std::size_t>(kLastMinute))
        throw DataError("match " + match_id + ": more than 85 minutes");
    if (vaepdiff.size() != T || scorediff.size() != T || winprobteam.size() != T)
        throw DataError("match " + match_id + ": per-minute vectors differ in length");
    if (!(prewindiff >= -1.0 && prewindiff <= 1.0))
        throw DataError("match " + match_id + ": prewindiff outside [-1,1]");
    for (double v : y)
        if (!is_missing(v) && !(v >= 0.0 && v <= 1.0))
            throw DataError("match " + match_id + ": relative stake outside [0,1]");
}

double inv_logit(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double linear_offset(const ModelParams& params, const MatchSeries& match, int t) {
    if (t < 1 || t > match.T()) throw DomainError("minute outside the match series");
    double eta = params.alpha0 + params.alpha_at(t) * match.prewindiff;
    if (params.variant == Variant::Varying)
        eta += params.zeta1 * match.scorediff[t - 1] + params.zeta2 * match.winprobteam[t - 1];
    return eta;
}

double mean_predictor(const ModelParams& params, const MatchSeries& match, int t, double g) {
    return inv_logit(linear_offset(params, match, t) + g);
}

namespace {
double normal_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}
}  // namespace

double state_transition_density(const ModelParams& params, double g_next, double g_prev,
                                double vaepdiff_prev, int t) {
    const double mean = params.phi * g_prev + params.beta_at(t) * vaepdiff_prev;
    return normal_pdf(g_next, mean, params.omega);
}

StateGrid StateGrid::uniform(double c0, double cm, int m) {
    if (m < 2) throw ConfigError("state grid needs m >= 2");
    if (!(cm > c0)) throw ConfigError("state grid needs c0 < cm");
    StateGrid g;
    g.c0 = c0;
    g.cm = cm;
    g.m = m;
    g.h = (cm - c0) / m;
    g.midpoints.resize(m);
    for (int i = 0; i < m; ++i) g.midpoints[i] = c0 + (i + 0.5) * g.h;
    return g;
}

double grid_resolution(const ModelParams& params, const GridConfig& grid) {
    return grid.m * std::sqrt(std::max(0.0, 1.0 - params.phi * params.phi)) / (2.0 * grid.span_sds);
}

StateGrid build_grid(const ModelParams& params, int m, double span_sds) {
    if (m < 2) throw ConfigError("state grid needs m >= 2");
    if (!(span_sds > 0.0)) throw ConfigError("state grid needs span_sds > 0");
    if (!(std::abs(params.phi) < 1.0)) throw InvalidParameter("state grid needs |phi| < 1");
    const double r = span_sds * params.stationary_sd();
    return StateGrid::uniform(-r, r, m);
}

Eigen::VectorXd initial_distribution(const ModelParams& params, const StateGrid& grid) {
    const double sd = params.stationary_sd();
    Eigen::VectorXd delta(grid.m);
    for (int i = 0; i < grid.m; ++i) delta[i] = grid.h * normal_pdf(grid.midpoints[i], 0.0, sd);
    return delta;
}

Eigen::MatrixXd transition_matrix(const ModelParams& params, const StateGrid& grid,
                                  double vaepdiff_prev, int t) {
    const double shift = params.beta_at(t) * vaepdiff_prev;
    Eigen::MatrixXd G(grid.m, grid.m);
    for (int i = 0; i < grid.m; ++i) {
        const double mean = params.phi * grid.midpoints[i] + shift;
        for (int j = 0; j < grid.m; ++j)
            G(i, j) = grid.h * normal_pdf(grid.midpoints[j], mean, params.omega);
    }
    return G;
}

}  // namespace betssm
