#include "betssm/beinf.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <string>

#include "betssm/error.hpp"

namespace betssm {

void BeinfParams::validate() const {
    if (!(mu > 0.0 && mu < 1.0))
        throw InvalidParameter("beinf: mu must lie in (0,1), got " + std::to_string(mu));
    if (!(sigma > 0.0 && sigma < 1.0))
        throw InvalidParameter("beinf: sigma must lie in (0,1), got " + std::to_string(sigma));
    if (!(p >= 0.0) || !(q >= 0.0) || !(p + q < 1.0))
        throw InvalidParameter("beinf: masses need p >= 0, q >= 0, p + q < 1");
}

double beta_precision(double sigma) {
    const double s2 = sigma * sigma;
    return (1.0 - s2) / s2;
}

BetaShapes shapes_from_mean_sd(double mu, double sigma) {
    if (!(mu > 0.0 && mu < 1.0))
        throw InvalidParameter("shapes_from_mean_sd: mu must lie in (0,1)");
    if (!(sigma > 0.0 && sigma < 1.0))
        throw InvalidParameter("shapes_from_mean_sd: sigma must lie in (0,1)");
    const double tau = beta_precision(sigma);
    return {mu * tau, (1.0 - mu) * tau};
}

double beinf_log_density(double y, const BeinfParams& params) {
    params.validate();
    if (!(y >= 0.0 && y <= 1.0))
        throw DomainError("beinf density: observation outside [0,1]");
    if (y == 0.0) return std::log(params.p);
    if (y == 1.0) return std::log(params.q);
    const auto [a, b] = shapes_from_mean_sd(params.mu, params.sigma);
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::log1p(-(params.p + params.q)) + (a - 1.0) * std::log(y) +
           (b - 1.0) * std::log1p(-y) - log_beta;
}

double beinf_density(double y, const BeinfParams& params) {
    return std::exp(beinf_log_density(y, params));
}

double beinf_cdf(double y, const BeinfParams& params) {
    params.validate();
    if (y < 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    if (y == 0.0) return params.p;
    const auto [a, b] = shapes_from_mean_sd(params.mu, params.sigma);
    return params.p + (1.0 - params.p - params.q) * boost::math::ibeta(a, b, y);
}

double beinf_mean(const BeinfParams& params) {
    return (1.0 - params.p - params.q) * params.mu + params.q;
}

double beinf_sample(const BeinfParams& params, std::mt19937_64& rng) {
    params.validate();
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    if (u < params.p) return 0.0;
    if (u < params.p + params.q) return 1.0;
    const auto [a, b] = shapes_from_mean_sd(params.mu, params.sigma);
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    const double x = ga(rng);
    const double z = gb(rng);
    if (!(x + z > 0.0))
        return unif(rng) < a / (a + b) ? std::nextafter(1.0, 0.0) : std::nextafter(0.0, 1.0);
    const double y = x / (x + z);
    // Interior draws that round onto the boundary would be read back as
    // point-mass observations.
    if (y <= 0.0) return std::nextafter(0.0, 1.0);
    if (y >= 1.0) return std::nextafter(1.0, 0.0);
    return y;
}

double beinf_sample(const BeinfParams& params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return beinf_sample(params, rng);
}

}  // namespace betssm
