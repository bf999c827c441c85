#include "betssm/forecast.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <random>

#include "betssm/error.hpp"

namespace betssm {

PredictiveMixture::PredictiveMixture(Eigen::VectorXd weights, Eigen::VectorXd mus, double sigma,
                                     double p, double q)
    : weights_(std::move(weights)), mus_(std::move(mus)), sigma_(sigma), p_(p), q_(q) {
    BeinfParams{0.5, sigma, p, q}.validate();
    if (weights_.size() != mus_.size()) throw ConfigError("mixture weights and means differ in length");
    const double top = weights_.maxCoeff();
    for (int i = 0; i < weights_.size(); ++i)
        if (weights_[i] > 1e-16 * top) active_.push_back(i);
}

double PredictiveMixture::mean() const {
    return (1.0 - p_ - q_) * weights_.dot(mus_) + q_ * weights_.sum();
}

double PredictiveMixture::continuous_density(double y) const {
    if (!(y > 0.0 && y < 1.0)) return 0.0;
    double s = 0.0;
    for (int i : active_) s += weights_[i] * beinf_density(y, {mus_[i], sigma_, 0.0, 0.0});
    return (1.0 - p_ - q_) * s;
}

double PredictiveMixture::cdf(double y) const {
    if (y < 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    if (y == 0.0) return p_;
    double s = 0.0;
    for (int i : active_) {
        const auto [a, b] = shapes_from_mean_sd(mus_[i], sigma_);
        s += weights_[i] * boost::math::ibeta(a, b, y);
    }
    return p_ + (1.0 - p_ - q_) * s;
}

double PredictiveMixture::quantile(double level) const {
    if (!(level > 0.0 && level <= 1.0)) throw DomainError("quantile level must lie in (0,1]");
    if (level <= p_) return 0.0;
    if (level > 1.0 - q_) return 1.0;
    // The continuous part is strictly increasing on (0,1).
    auto f = [&](double y) { return cdf(y) - level; };
    double lo = 0.0, hi = 1.0;
    if (f(std::nextafter(1.0, 0.0)) < 0.0) return 1.0;
    boost::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, p_ - level, 1.0 - q_ - level, boost::math::tools::eps_tolerance<double>(48), max_iter);
    return 0.5 * (a + b);
}

namespace {

std::vector<double> predictive_means(const ModelParams& params, const MatchSeries& match,
                                     const StateGrid& grid, int t_target) {
    const double offset = linear_offset(params, match, t_target);
    std::vector<double> mus(grid.m);
    for (int i = 0; i < grid.m; ++i) mus[i] = inv_logit(offset + grid.midpoints[i]);
    return mus;
}

Forecast make_forecast(const MatchSeries& match, const ModelParams& params, const StateGrid& grid,
                       const Eigen::VectorXd& filtered_row, TransitionKernel& kernel, int t,
                       const std::vector<double>& levels) {
    Forecast fc;
    fc.t_target = t + 1;
    kernel.set_shift(params.beta_at(t + 1) * match.vaepdiff[t - 1]);
    kernel.left_apply(filtered_row, fc.state_predictive);
    const double total = fc.state_predictive.sum();
    if (!(total > 0.0)) throw NumericalError("state predictive has no mass on the grid");
    fc.state_predictive /= total;
    const std::vector<double> mus = predictive_means(params, match, grid, t + 1);
    fc.predictive = PredictiveMixture(fc.state_predictive, Eigen::Map<const Eigen::VectorXd>(mus.data(), grid.m),
                                      params.sigma, params.p, params.q);
    fc.mean = fc.predictive.mean();
    for (double level : levels) fc.quantiles[level] = fc.predictive.quantile(level);
    return fc;
}

MatchSeries truncated(const MatchSeries& match, int t) {
    MatchSeries head = match;
    head.y.resize(t);
    head.vaepdiff.resize(t);
    head.scorediff.resize(t);
    head.winprobteam.resize(t);
    return head;
}

}  // namespace

std::vector<Forecast> forecast_series(const MatchSeries& match, const ModelParams& params,
                                      const StateGrid& grid, const std::vector<double>& quantile_levels) {
    if (match.T() < 2) return {};
    // The last forecast conditions on minutes 1..T-1 only.
    const ForwardResult fr = forward(truncated(match, match.T() - 1), params, grid);
    if (!std::isfinite(fr.log_likelihood)) throw NumericalError("forward filter failed for match " + match.match_id);
    TransitionKernel kernel(params, grid);
    std::vector<Forecast> out;
    for (int t = 1; t < match.T(); ++t)
        out.push_back(make_forecast(match, params, grid, fr.filtered.row(t - 1).transpose(), kernel, t,
                                    quantile_levels));
    return out;
}

Forecast one_step_ahead(const MatchSeries& match, const ModelParams& params, const StateGrid& grid, int t,
                        const std::vector<double>& quantile_levels) {
    if (t < 1 || t >= match.T()) throw DomainError("forecast origin must satisfy 1 <= t < T");
    const ForwardResult fr = forward(truncated(match, t), params, grid);
    if (!std::isfinite(fr.log_likelihood)) throw NumericalError("forward filter failed for match " + match.match_id);
    TransitionKernel kernel(params, grid);
    return make_forecast(match, params, grid, fr.filtered.row(t - 1).transpose(), kernel, t, quantile_levels);
}

std::vector<int> flag_outliers(const MatchSeries& match, const ModelParams& params, const StateGrid& grid,
                               double level, bool two_sided) {
    if (!(level > 0.0 && level <= 1.0)) throw DomainError("outlier quantile must lie in (0,1]");
    std::vector<int> flagged;
    const std::vector<Forecast> fcs = forecast_series(match, params, grid);
    for (const Forecast& fc : fcs) {
        const double y = match.y[fc.t_target - 1];
        if (is_missing(y)) continue;
        bool flag = y > fc.predictive.quantile(level);
        if (two_sided && !flag && level < 1.0) flag = y < fc.predictive.quantile(1.0 - level);
        if (flag) flagged.push_back(fc.t_target);
    }
    return flagged;
}

std::vector<double> predictive_sample(const Forecast& forecast, int n_draws, std::uint64_t seed) {
    if (n_draws < 1) throw DomainError("predictive_sample needs n_draws >= 1");
    const PredictiveMixture& mix = forecast.predictive;
    std::mt19937_64 rng(seed);
    std::discrete_distribution<int> cell(mix.weights().data(), mix.weights().data() + mix.weights().size());
    std::vector<double> out(n_draws);
    for (double& v : out) v = beinf_sample({mix.mus()[cell(rng)], mix.sigma(), mix.p(), mix.q()}, rng);
    return out;
}

}  // namespace betssm
