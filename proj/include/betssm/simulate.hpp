#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "betssm/data.hpp"
#include "betssm/estimation.hpp"
#include "betssm/model.hpp"

namespace betssm {

// Covariate process for synthetic matches.
struct CovariateGenerator {
    // prewindiff ~ N(mean, sd) clipped to [-clip, clip]
    double prewindiff_mean = 0.139;
    double prewindiff_sd = 0.317;
    double prewindiff_clip = 0.95;
    // vaepdiff i.i.d. N(mean, sd)
    double vaepdiff_mean = 0.004;
    double vaepdiff_sd = 0.161;
    // Goals arrive with probability goals_per_match / minutes each minute.
    double goals_per_match = 2.8;
    // Match length in minutes; rows past minute 85 carry no stakes.
    int minutes = 90;
    // Bookmaker margin applied to all quoted odds.
    double margin = 0.05;
    // Total stake per minute is stake_scale * exp(N(0, 0.5^2)).
    double stake_scale = 1000.0;
};

struct SimConfig {
    int n_matches = 306;
    int T = 85;
    ModelParams params;
    CovariateGenerator covariates;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimulatedMatch {
    MatchRecords records;  // minute 0 (pre-game odds) through the last minute
    MatchSeries series;
    std::vector<double> true_state;  // g_1..g_T
};

// Home win probability curve used for in-game odds.
ImpliedProbabilities simulated_outcome_probabilities(int scorediff, double prewindiff, int minute,
                                                     int match_minutes);

// Independent of the other matches: match i uses its own seed derived from
// (seed, i).
SimulatedMatch simulate_match(const SimConfig& config, int match_index);
std::vector<SimulatedMatch> simulate_dataset(const SimConfig& config);

Dataset to_dataset(const std::vector<SimulatedMatch>& sims);

// Raw CSV followed by a '#'-commented truth section (parameters and state
// paths) that read_csv skips.
void write_simulated_csv(std::ostream& out, const std::vector<SimulatedMatch>& sims, const ModelParams& params);

struct SimulationTruth {
    ModelParams params;
    std::map<std::string, std::vector<double>> states;
};
// Parses the truth section from CSV comment lines, if present.
std::optional<SimulationTruth> parse_truth(const std::vector<std::string>& comments);

struct RecoveryRow {
    std::string name;
    double truth = 0.0;
    double mean_estimate = 0.0;
    double bias = 0.0;
    double empirical_se = 0.0;  // NaN with fewer than two successful fits
    double mean_se = 0.0;
    double coverage = 0.0;      // share of 95% intervals containing the truth
};

struct RecoveryFailure {
    int replication = 0;
    std::string message;
};

struct RecoveryReport {
    int n_replications = 0;
    int n_success = 0;
    std::vector<RecoveryRow> rows;
    std::vector<RecoveryFailure> failures;
    // estimates[r][k]: replication r (successful fits only), parameter k.
    std::vector<std::vector<ParameterEstimate>> estimates;
};

// Simulates n_replications datasets (replication r uses a seed derived from
// (config.seed, r)), fits each and summarises against the truth. Fit
// failures are recorded and skipped.
RecoveryReport recovery_study(const SimConfig& config, int n_replications, const FitOptions& options);

}  // namespace betssm
