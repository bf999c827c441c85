#pragma once

#include <random>

namespace betssm {

// Beta-inflated distribution on [0, 1]: point mass p at 0, point mass q at 1
// and a beta component with mean mu and scale sigma carrying the remaining
// 1 - p - q.
struct BeinfParams {
    double mu = 0.5;
    double sigma = 0.3;
    double p = 0.0;
    double q = 0.0;

    // Throws InvalidParameter unless 0 < mu < 1, 0 < sigma < 1, p, q >= 0
    // and p + q < 1.
    void validate() const;
};

struct BetaShapes {
    double a;
    double b;
};

// a = mu (1 - sigma^2) / sigma^2, b = (1 - mu) (1 - sigma^2) / sigma^2.
BetaShapes shapes_from_mean_sd(double mu, double sigma);

// Precision a + b = (1 - sigma^2) / sigma^2; independent of mu.
double beta_precision(double sigma);

double beinf_log_density(double y, const BeinfParams& params);
double beinf_density(double y, const BeinfParams& params);

// P(Y <= y). Right-continuous, with jumps p at 0 and q at 1.
double beinf_cdf(double y, const BeinfParams& params);

// E[Y] = (1 - p - q) mu + q.
double beinf_mean(const BeinfParams& params);

double beinf_sample(const BeinfParams& params, std::mt19937_64& rng);
double beinf_sample(const BeinfParams& params, std::uint64_t seed);

}  // namespace betssm
