#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <vector>

#include "betssm/likelihood.hpp"
#include "betssm/model.hpp"

namespace betssm {

// Finite mixture of BEINF laws sharing (sigma, p, q); component i has beta
// mean mu[i] and weight weight[i].
class PredictiveMixture {
public:
    PredictiveMixture() = default;
    PredictiveMixture(Eigen::VectorXd weights, Eigen::VectorXd mus, double sigma, double p, double q);

    const Eigen::VectorXd& weights() const { return weights_; }
    const Eigen::VectorXd& mus() const { return mus_; }
    double sigma() const { return sigma_; }
    double p() const { return p_; }
    double q() const { return q_; }

    double mean() const;
    // Density of the continuous part (already scaled by 1 - p - q).
    double continuous_density(double y) const;
    double cdf(double y) const;
    // inf{y : cdf(y) >= level}; point masses at 0 and 1 are handled exactly.
    double quantile(double level) const;

private:
    Eigen::VectorXd weights_;
    Eigen::VectorXd mus_;
    double sigma_ = 0.3;
    double p_ = 0.0;
    double q_ = 0.0;
    std::vector<int> active_;  // components with non-negligible weight
};

struct Forecast {
    int t_target = 0;
    // P(g_{t+1} in C_i | y_1..y_t), normalised.
    Eigen::VectorXd state_predictive;
    PredictiveMixture predictive;
    double mean = 0.0;
    std::map<double, double> quantiles;
    // Filled on request by predictive_sample callers.
    std::vector<double> sample;
};

// One-step-ahead forecast of y_{t+1} from data through minute t, 1 <= t < T.
Forecast one_step_ahead(const MatchSeries& match, const ModelParams& params, const StateGrid& grid,
                        int t, const std::vector<double>& quantile_levels = {});

// Forecasts for minutes 2..T from a single forward pass (entry k targets
// minute k + 2).
std::vector<Forecast> forecast_series(const MatchSeries& match, const ModelParams& params,
                                      const StateGrid& grid, const std::vector<double>& quantile_levels = {});

// Minutes whose observed relative stake exceeds the one-step-ahead
// predictive quantile at `level`. With two_sided, minutes below the
// (1 - level) quantile are flagged too.
std::vector<int> flag_outliers(const MatchSeries& match, const ModelParams& params, const StateGrid& grid,
                               double level, bool two_sided = false);

// Draws a grid cell from the state predictive, then a BEINF variate at that
// cell's mean.
std::vector<double> predictive_sample(const Forecast& forecast, int n_draws, std::uint64_t seed);

}  // namespace betssm
