#include "betssm/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "betssm/error.hpp"
#include "betssm/parallel.hpp"
#include "betssm/serialize.hpp"

namespace betssm {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint32_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), stream};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

double logistic(double x) { return inv_logit(x); }

constexpr double kProbFloor = 0.005;
constexpr double kMinOdds = 1.01;

double quoted_odds(double prob, double margin) { return std::max(kMinOdds, 1.0 / (prob * (1.0 + margin))); }

int record_minutes(const SimConfig& config) {
    return config.T >= kLastMinute ? std::max(config.covariates.minutes, config.T) : config.T;
}

constexpr const char* kTruthParams = "truth_params: ";
constexpr const char* kTruthState = "truth_state: ";

}  // namespace

void SimConfig::validate() const {
    if (n_matches < 1) throw ConfigError("simulation needs at least one match");
    if (T < 1 || T > kLastMinute) throw ConfigError("simulated series length must be within 1..85");
    params.validate();
    const CovariateGenerator& c = covariates;
    if (!(c.prewindiff_sd >= 0.0) || !(c.prewindiff_clip > 0.0 && c.prewindiff_clip < 1.0))
        throw ConfigError("prewindiff generator needs sd >= 0 and clip in (0,1)");
    if (!(c.vaepdiff_sd >= 0.0)) throw ConfigError("vaepdiff sd must be nonnegative");
    if (!(c.goals_per_match >= 0.0) || c.minutes < 1 || c.goals_per_match > c.minutes)
        throw ConfigError("goal rate must lie in [0, minutes]");
    if (!(c.margin >= 0.0) || !(c.stake_scale > 0.0)) throw ConfigError("margin and stake scale out of range");
}

ImpliedProbabilities simulated_outcome_probabilities(int scorediff, double prewindiff, int minute,
                                                     int match_minutes) {
    const double r = std::clamp(double(match_minutes - minute) / match_minutes, 0.0, 1.0);
    const double d0 = 0.27 * (1.0 - prewindiff * prewindiff);
    double draw;
    if (scorediff == 0)
        draw = d0 + (0.95 - d0) * (1.0 - r) * (1.0 - r);
    else
        draw = d0 * r * std::exp(1.0 - std::abs(scorediff));
    // At kickoff this reproduces home - away = prewindiff exactly.
    const double k = 2.0 * std::atanh(prewindiff / (1.0 - d0)) * std::sqrt(r) + 3.0 * scorediff / std::sqrt(r + 0.05);
    const double share = logistic(k);
    ImpliedProbabilities p{(1.0 - draw) * share, (1.0 - draw) * (1.0 - share), draw};
    if (minute > 0) {
        p.home = std::max(p.home, kProbFloor);
        p.away = std::max(p.away, kProbFloor);
        p.draw = std::max(p.draw, kProbFloor);
        const double s = p.home + p.away + p.draw;
        p.home /= s;
        p.away /= s;
        p.draw /= s;
    }
    return p;
}

SimulatedMatch simulate_match(const SimConfig& config, int match_index) {
    if (match_index < 0) throw DomainError("match index must be nonnegative");
    const CovariateGenerator& gen = config.covariates;
    const ModelParams& params = config.params;
    const int M = record_minutes(config);

    std::mt19937_64 cov_rng(derive_seed(config.seed, match_index, 0));
    std::mt19937_64 obs_rng(derive_seed(config.seed, match_index, 1));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    SimulatedMatch sim;
    sim.records.match_id = "sim" + std::to_string(match_index + 1);
    const double pw = std::clamp(gen.prewindiff_mean + gen.prewindiff_sd * normal(cov_rng), -gen.prewindiff_clip,
                                 gen.prewindiff_clip);
    const double goal_prob = gen.goals_per_match / gen.minutes;
    const double home_share = std::clamp(0.5 + 0.35 * pw, 0.05, 0.95);

    std::vector<double> totals(M + 1, 0.0);
    int score = 0;
    for (int t = 0; t <= M; ++t) {
        RawMinuteRecord r;
        r.match_id = sim.records.match_id;
        r.minute = t;
        if (t > 0) {
            if (unif(cov_rng) < goal_prob) score += unif(cov_rng) < home_share ? 1 : -1;
            r.vaepdiff = gen.vaepdiff_mean + gen.vaepdiff_sd * normal(cov_rng);
            totals[t] = gen.stake_scale * std::exp(0.5 * normal(cov_rng));
        }
        r.scorediff = score;
        const ImpliedProbabilities p = simulated_outcome_probabilities(score, pw, t, gen.minutes);
        r.odds_home = quoted_odds(p.home, gen.margin);
        r.odds_away = quoted_odds(p.away, gen.margin);
        r.odds_draw = quoted_odds(p.draw, gen.margin);
        if (t > 0) r.winprob_home = p.home;
        sim.records.rows.push_back(std::move(r));
    }

    // Covariates as the model sees them, through the ingest path.
    const MatchSeries covariates = build_match_series(sim.records);
    const int T = covariates.T();

    sim.true_state.resize(T);
    const double kappa = params.stationary_sd();
    sim.true_state[0] = kappa * normal(obs_rng);
    for (int t = 2; t <= T; ++t)
        sim.true_state[t - 1] = params.phi * sim.true_state[t - 2] +
                                params.beta_at(t) * covariates.vaepdiff[t - 2] + params.omega * normal(obs_rng);
    for (int t = 1; t <= T; ++t) {
        const double mu = inv_logit(linear_offset(params, covariates, t) + sim.true_state[t - 1]);
        const double y = beinf_sample(params.beinf(mu), obs_rng);
        RawMinuteRecord& r = sim.records.rows[t];
        r.stake_home = y * totals[t];
        r.stake_away = (1.0 - y) * totals[t];
    }
    sim.series = build_match_series(sim.records);
    return sim;
}

std::vector<SimulatedMatch> simulate_dataset(const SimConfig& config) {
    config.validate();
    std::vector<SimulatedMatch> out(config.n_matches);
    parallel_for(config.n_matches, [&](std::size_t i) { out[i] = simulate_match(config, static_cast<int>(i)); });
    return out;
}

Dataset to_dataset(const std::vector<SimulatedMatch>& sims) {
    Dataset d;
    for (const auto& s : sims) {
        d.matches.push_back(s.records);
        d.series.push_back(s.series);
    }
    return d;
}

void write_simulated_csv(std::ostream& out, const std::vector<SimulatedMatch>& sims, const ModelParams& params) {
    std::vector<RawMinuteRecord> rows;
    for (const auto& s : sims) rows.insert(rows.end(), s.records.rows.begin(), s.records.rows.end());
    write_raw_csv(out, rows);
    out << "# simulation truth (optional section)\n";
    out << "# " << kTruthParams << to_json(params).dump() << '\n';
    for (const auto& s : sims) {
        out << "# " << kTruthState << s.series.match_id;
        for (double g : s.true_state) out << ',' << format_number(g);
        out << '\n';
    }
}

std::optional<SimulationTruth> parse_truth(const std::vector<std::string>& comments) {
    std::optional<SimulationTruth> truth;
    for (const auto& line : comments) {
        if (line.rfind(kTruthParams, 0) == 0) {
            if (!truth) truth.emplace();
            try {
                truth->params = params_from_json(json::parse(line.substr(std::string(kTruthParams).size())));
            } catch (const json::exception& e) {
                throw DataError(std::string("malformed truth parameters: ") + e.what());
            }
        } else if (line.rfind(kTruthState, 0) == 0) {
            if (!truth) truth.emplace();
            std::stringstream ss(line.substr(std::string(kTruthState).size()));
            std::string id, field;
            std::getline(ss, id, ',');
            std::vector<double> g;
            while (std::getline(ss, field, ',')) g.push_back(std::stod(field));
            truth->states[id] = std::move(g);
        }
    }
    return truth;
}

RecoveryReport recovery_study(const SimConfig& config, int n_replications, const FitOptions& options) {
    if (n_replications < 1) throw ConfigError("recovery study needs at least one replication");
    config.validate();
    RecoveryReport report;
    report.n_replications = n_replications;
    for (int r = 0; r < n_replications; ++r) {
        SimConfig cfg = config;
        cfg.seed = derive_seed(config.seed, r, 2);
        try {
            const auto sims = simulate_dataset(cfg);
            std::vector<MatchSeries> series;
            for (const auto& s : sims) series.push_back(s.series);
            const FitResult f = fit(series, options);
            if (!f.convergence.converged())
                throw NumericalError("optimizer stopped with status " + to_string(f.convergence.status));
            if (!f.covariance_available) throw NumericalError("information matrix not invertible");
            report.estimates.push_back(f.estimates);
        } catch (const Error& e) {
            report.failures.push_back({r, e.what()});
        }
    }
    report.n_success = static_cast<int>(report.estimates.size());
    if (report.estimates.empty()) return report;

    const ParamLayout layout = ParamLayout::of(config.params);
    const auto names = layout.names();
    const Eigen::VectorXd truth = pack(config.params);
    const auto& first = report.estimates.front();
    for (std::size_t k = 0; k < first.size(); ++k) {
        RecoveryRow row;
        row.name = first[k].name;
        const auto it = std::find(names.begin(), names.end(), row.name);
        row.truth = it == names.end() ? std::nan("") : truth[it - names.begin()];
        double sum = 0.0, sum_se = 0.0;
        int covered = 0;
        for (const auto& est : report.estimates) {
            sum += est[k].estimate;
            sum_se += est[k].se;
            if (est[k].lower <= row.truth && row.truth <= est[k].upper) ++covered;
        }
        const double n = static_cast<double>(report.n_success);
        row.mean_estimate = sum / n;
        row.bias = row.mean_estimate - row.truth;
        row.mean_se = sum_se / n;
        row.coverage = covered / n;
        if (report.n_success > 1) {
            double ss = 0.0;
            for (const auto& est : report.estimates)
                ss += (est[k].estimate - row.mean_estimate) * (est[k].estimate - row.mean_estimate);
            row.empirical_se = std::sqrt(ss / (n - 1.0));
        } else {
            row.empirical_se = std::nan("");
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace betssm
