#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "betssm/beinf.hpp"
#include "betssm/splines.hpp"

namespace betssm {

enum class Variant {
    // logit(mu_t) = alpha0 + alpha * prewindiff + g_t, g_t = phi g_{t-1} + beta vaepdiff_{t-1} + omega eta_t
    Baseline,
    // alpha and beta become B-spline functions of the minute; scorediff and
    // winprobteam enter the mean predictor with zeta1 and zeta2.
    Varying,
};

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

struct ModelParams {
    Variant variant = Variant::Baseline;
    double phi = 0.9;
    double omega = 0.2;
    double sigma = 0.3;
    double p = 0.01;
    double q = 0.01;
    double alpha0 = 0.0;
    // One entry for the baseline model, K spline coefficients otherwise.
    std::vector<double> alpha{0.0};
    std::vector<double> beta{0.0};
    double zeta1 = 0.0;
    double zeta2 = 0.0;
    // Shared immutable basis; set for the varying model only.
    std::shared_ptr<const SplineBasis> basis;

    static ModelParams baseline(double phi, double omega, double sigma, double p, double q,
                                double alpha0, double alpha, double beta);
    // Varying model with spline coefficients set to the given constants.
    static ModelParams varying(int K, double phi, double omega, double sigma, double p,
                               double q, double alpha0, double alpha, double beta,
                               double zeta1 = 0.0, double zeta2 = 0.0);
    // Default starting values: phi 0.9, omega 0.2, sigma 0.3, p = q = 0.01,
    // all regression and spline coefficients 0.
    static ModelParams initial(Variant variant, int K = 10);

    int K() const { return basis ? basis->size() : 0; }
    void validate() const;

    // Effects at minute t (constant for the baseline model).
    double alpha_at(int t) const;
    double beta_at(int t) const;

    // sd of the stationary AR(1) law, omega / sqrt(1 - phi^2).
    double stationary_sd() const;

    BeinfParams beinf(double mu) const { return {mu, sigma, p, q}; }
};

// Packed natural-scale parameter vector:
// phi, omega, sigma, p, q, alpha0, alpha[...], beta[...], (zeta1, zeta2).
struct ParamLayout {
    static constexpr int kPhi = 0;
    static constexpr int kOmega = 1;
    static constexpr int kSigma = 2;
    static constexpr int kP = 3;
    static constexpr int kQ = 4;
    static constexpr int kAlpha0 = 5;
    static constexpr int kAlphaBegin = 6;

    int n_alpha = 1;
    int n_beta = 1;
    bool has_zeta = false;

    static ParamLayout of(const ModelParams& params);

    int beta_begin() const { return kAlphaBegin + n_alpha; }
    int zeta1() const { return beta_begin() + n_beta; }
    int zeta2() const { return zeta1() + 1; }
    int size() const { return beta_begin() + n_beta + (has_zeta ? 2 : 0); }
    std::vector<std::string> names() const;
};

Eigen::VectorXd pack(const ModelParams& params);
// Same variant and basis as `like`, values from `v`.
ModelParams unpack(const ModelParams& like, const Eigen::VectorXd& v);

// One match in model-ready form. Minutes are 1-based: entry t-1 of each
// vector holds minute t. Missing observations are NaN in y.
struct MatchSeries {
    std::string match_id;
    std::vector<double> y;
    double prewindiff = 0.0;
    std::vector<double> vaepdiff;
    std::vector<int> scorediff;
    std::vector<double> winprobteam;

    int T() const { return static_cast<int>(y.size()); }
    void validate() const;
};

inline bool is_missing(double y) { return std::isnan(y); }
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// Linear predictor for minute t without the state term.
double linear_offset(const ModelParams& params, const MatchSeries& match, int t);

// mu_t = logit^-1(linear_offset + g).
double mean_predictor(const ModelParams& params, const MatchSeries& match, int t, double g);

double inv_logit(double x);

// Normal density of g_next with mean phi g_prev + beta_t vaepdiff_prev and sd
// omega; t is the minute being entered.
double state_transition_density(const ModelParams& params, double g_next, double g_prev,
                                double vaepdiff_prev, int t);

// Discretisation of [c0, cm] into m equal intervals.
struct StateGrid {
    double c0 = 0.0;
    double cm = 0.0;
    int m = 0;
    double h = 0.0;
    std::vector<double> midpoints;

    static StateGrid uniform(double c0, double cm, int m);
};

// Symmetric grid [-r, r] with r = span_sds * stationary_sd(params).
StateGrid build_grid(const ModelParams& params, int m, double span_sds);

struct GridConfig {
    int m = 100;
    double span_sds = 5.0;
};

// Transition sd over grid spacing, omega / h = m sqrt(1 - phi^2) / (2 span_sds).
// The unnormalised midpoint rows sum to one only while this ratio is not
// small; their error is about 2 exp(-2 pi^2 ratio^2).
double grid_resolution(const ModelParams& params, const GridConfig& grid);
// Estimation treats working points below this ratio as invalid (row-sum
// error above about 3e-5).
inline constexpr double kMinGridResolution = 0.75;

// delta_i = h f(c_i*) with f the stationary N(0, omega^2 / (1 - phi^2)).
Eigen::VectorXd initial_distribution(const ModelParams& params, const StateGrid& grid);

// gamma_ij = h f(c_j* | c_i*) for the transition into minute t. Rows are not
// renormalised.
Eigen::MatrixXd transition_matrix(const ModelParams& params, const StateGrid& grid,
                                  double vaepdiff_prev, int t);

}  // namespace betssm
