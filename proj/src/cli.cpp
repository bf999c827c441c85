#include "betssm/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "betssm/data.hpp"
#include "betssm/error.hpp"
#include "betssm/estimation.hpp"
#include "betssm/forecast.hpp"
#include "betssm/parallel.hpp"
#include "betssm/serialize.hpp"
#include "betssm/simulate.hpp"
#include "betssm/strategy.hpp"

namespace betssm {

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace {

struct RunConfig {
    std::string command;
    std::string input;
    std::string output;
    std::string params_path;
    std::string variant = "baseline";
    int K = 10;
    int m = 100;
    double span_sds = 5.0;
    std::string lambda_alpha;
    std::string lambda_beta;
    std::uint64_t seed = 1;
    double quantile = 0.99;
    unsigned threads = 0;
    int n_matches = 306;
    int T = 85;
    int max_lag = 20;
    int draws = 0;
    std::string levels = "0.005,0.5,0.995";
    std::vector<std::string> match_ids;
    bool two_sided = false;
    int replications = 1;
    std::string thresholds = "0.02,0.03,0.05";
    bool first_crossing = false;
    int max_iter = 500;
    bool m_given = false;
    bool span_given = false;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size() && item.find_first_not_of(' ', used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError(std::string("cannot parse ") + what + " list entry '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << content;
    if (!out) throw DataError("failed writing " + path);
}

std::string stem_of(const std::string& path) {
    const auto dot = path.rfind('.');
    const auto slash = path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

// Canonical text of everything that can change results; paths and thread
// count are excluded.
std::string canonical_config(const RunConfig& c) {
    std::ostringstream s;
    s << "command=" << c.command << "\nvariant=" << c.variant << "\nK=" << c.K << "\nm=" << c.m
      << "\nspan_sds=" << format_number(c.span_sds) << "\nlambda_alpha=" << c.lambda_alpha
      << "\nlambda_beta=" << c.lambda_beta << "\nseed=" << c.seed << "\nquantile=" << format_number(c.quantile)
      << "\nn_matches=" << c.n_matches << "\nT=" << c.T << "\nmax_lag=" << c.max_lag << "\ndraws=" << c.draws
      << "\nlevels=" << c.levels << "\ntwo_sided=" << c.two_sided << "\nreplications=" << c.replications
      << "\nthresholds=" << c.thresholds << "\nfirst_crossing=" << c.first_crossing << "\nmax_iter=" << c.max_iter
      << "\nmatches=";
    for (const auto& id : c.match_ids) s << id << ';';
    if (!c.params_path.empty()) s << "\nparams=" << fnv1a_hex(read_file(c.params_path));
    s << '\n';
    return s.str();
}

struct Provenance {
    std::string version = BETSSM_VERSION;
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;

    std::string csv_header() const {
        return "# betssm " + version + "\n# command: " + command + "\n# config_hash: " + config_hash +
               "\n# seed: " + std::to_string(seed) + "\n";
    }
    json to_json() const {
        return {{"version", version}, {"command", command}, {"config_hash", config_hash}, {"seed", seed}};
    }
};

void require_input(const RunConfig& c) {
    if (c.input.empty()) throw ConfigError("command " + c.command + " needs --input");
}
void require_output(const RunConfig& c) {
    if (c.output.empty()) throw ConfigError("command " + c.command + " needs --output");
}

FitOptions fit_options(const RunConfig& c) {
    FitOptions o;
    o.variant = variant_from_string(c.variant);
    o.K = c.K;
    o.grid.m = c.m;
    o.grid.span_sds = c.span_sds;
    o.optim.max_iterations = c.max_iter;
    if (c.m < 2) throw ConfigError("--m must be at least 2");
    if (!(c.span_sds > 0.0)) throw ConfigError("--span-sds must be positive");
    return o;
}

double single_lambda(const std::string& text, const char* what) {
    if (text.empty()) return 0.0;
    const auto v = parse_list(text, what);
    if (v.size() != 1) throw ConfigError(std::string("fit takes a single ") + what + "; use tune for grids");
    return v.front();
}

std::string estimates_csv(const FitResult& f, const Provenance& prov) {
    std::ostringstream s;
    s << prov.csv_header() << "parameter,estimate,se,lower,upper\n";
    for (const auto& e : f.estimates)
        s << e.name << ',' << format_number(e.estimate) << ',' << format_number(e.se) << ','
          << format_number(e.lower) << ',' << format_number(e.upper) << '\n';
    return s.str();
}

std::string effects_csv(const ModelParams& p, const Provenance& prov) {
    std::ostringstream s;
    s << prov.csv_header() << "minute,alpha,beta\n";
    for (int t = kFirstMinute; t <= kLastMinute; ++t)
        s << t << ',' << format_number(p.alpha_at(t)) << ',' << format_number(p.beta_at(t)) << '\n';
    return s.str();
}

json with_provenance(json body, const Provenance& prov) {
    json j;
    j["provenance"] = prov.to_json();
    for (auto& [k, v] : body.items()) j[k] = v;
    return j;
}

int cmd_ingest(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_input(c);
    require_output(c);
    const Dataset d = load_dataset(c.input);
    std::ostringstream processed, desc, cc;
    processed << prov.csv_header();
    write_processed_csv(processed, d);
    desc << prov.csv_header();
    write_descriptives_csv(desc, descriptives(d.series));
    const CrossCorrelation corr = cross_correlation(d.series, c.max_lag);
    cc << prov.csv_header();
    for (const auto& id : corr.skipped) cc << "# skipped (pre-goal stretch too short): " << id << '\n';
    write_cross_correlation_csv(cc, corr);
    write_file(c.output, processed.str());
    write_file(stem_of(c.output) + "_descriptives.csv", desc.str());
    write_file(stem_of(c.output) + "_crosscorr.csv", cc.str());
    long obs = 0;
    for (const auto& s : d.series) obs += s.T();
    out << "ingested " << d.series.size() << " matches, " << obs << " minutes\n";
    return kExitOk;
}

int cmd_fit(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_input(c);
    require_output(c);
    const Dataset d = load_dataset(c.input);
    FitOptions o = fit_options(c);
    o.lambda_alpha = single_lambda(c.lambda_alpha, "lambda-alpha");
    o.lambda_beta = single_lambda(c.lambda_beta, "lambda-beta");
    const FitResult f = fit(d.series, o);
    write_file(c.output, with_provenance(to_json(f), prov).dump(2) + "\n");
    write_file(stem_of(c.output) + "_estimates.csv", estimates_csv(f, prov));
    write_file(stem_of(c.output) + "_effects.csv", effects_csv(f.params, prov));
    out << "fit " << to_string(f.convergence.status) << ": loglik " << format_number(f.loglik) << ", AIC "
        << format_number(f.aic) << "\n";
    if (f.convergence.at_grid_limit)
        out << "warning: phi is at the largest value this state grid resolves; refit with a larger --m\n";
    if (!f.convergence.converged()) throw NumericalError("optimizer did not converge: " + to_string(f.convergence.status));
    return kExitOk;
}

int cmd_tune(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_input(c);
    require_output(c);
    const Dataset d = load_dataset(c.input);
    FitOptions o = fit_options(c);
    if (o.variant != Variant::Varying) throw ConfigError("tune needs --variant varying");
    const auto ga = c.lambda_alpha.empty() ? default_lambda_grid() : parse_list(c.lambda_alpha, "lambda-alpha");
    const auto gb = c.lambda_beta.empty() ? default_lambda_grid() : parse_list(c.lambda_beta, "lambda-beta");
    const TuneResult t = tune(d.series, o, ga, gb);
    write_file(c.output, with_provenance(to_json(t), prov).dump(2) + "\n");
    std::ostringstream table;
    table << prov.csv_header() << "lambda_alpha";
    for (double b : gb) table << ",aic_lambda_beta_" << format_number(b);
    table << '\n';
    for (std::size_t i = 0; i < ga.size(); ++i) {
        table << format_number(ga[i]);
        for (std::size_t j = 0; j < gb.size(); ++j) {
            const TuneCell& cell = t.cell(i, j);
            table << ',' << (cell.ok ? format_number(cell.aic) : "NA");
        }
        table << '\n';
    }
    const TuneCell& best = t.cells[t.best_index];
    table << "# selected: lambda_alpha=" << format_number(best.lambda_alpha)
          << " lambda_beta=" << format_number(best.lambda_beta) << '\n';
    write_file(stem_of(c.output) + "_aic.csv", table.str());
    write_file(stem_of(c.output) + "_estimates.csv", estimates_csv(t.best_fit, prov));
    write_file(stem_of(c.output) + "_effects.csv", effects_csv(t.best_fit.params, prov));
    out << "selected lambda_alpha=" << format_number(best.lambda_alpha)
        << " lambda_beta=" << format_number(best.lambda_beta) << " (AIC " << format_number(best.aic) << ")\n";
    if (t.best_fit.convergence.at_grid_limit)
        out << "warning: phi is at the largest value this state grid resolves; refit with a larger --m\n";
    return kExitOk;
}

std::uint64_t draw_seed(std::uint64_t seed, std::size_t match, int minute) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(match), static_cast<std::uint32_t>(minute), 3u};
    std::uint32_t v[2];
    seq.generate(v, v + 2);
    return (static_cast<std::uint64_t>(v[0]) << 32) | v[1];
}

int cmd_forecast(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_input(c);
    require_output(c);
    if (c.params_path.empty()) throw ConfigError("forecast needs --params (a fit or tune JSON file)");
    if (!(c.quantile > 0.0 && c.quantile <= 1.0)) throw ConfigError("--quantile must lie in (0,1]");
    if (c.draws < 0) throw ConfigError("--draws must be nonnegative");
    json doc;
    try {
        doc = json::parse(read_file(c.params_path));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("cannot parse parameter file: ") + e.what());
    }
    const ModelParams params = params_from_result(doc);
    GridConfig grid{c.m, c.span_sds};
    const json* opts = doc.contains("best_fit") ? &doc["best_fit"]["options"]
                                                : (doc.contains("options") ? &doc["options"] : nullptr);
    if (opts && !c.m_given && opts->contains("m")) grid.m = opts->at("m").get<int>();
    if (opts && !c.span_given && opts->contains("span_sds")) grid.span_sds = opts->at("span_sds").get<double>();
    const StateGrid sg = build_grid(params, grid.m, grid.span_sds);

    const auto levels = parse_list(c.levels, "levels");
    for (double l : levels)
        if (!(l > 0.0 && l <= 1.0)) throw ConfigError("quantile levels must lie in (0,1]");

    const Dataset d = load_dataset(c.input);
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < d.series.size(); ++i)
        if (c.match_ids.empty() ||
            std::find(c.match_ids.begin(), c.match_ids.end(), d.series[i].match_id) != c.match_ids.end())
            chosen.push_back(i);
    if (chosen.empty()) throw DataError("no matching matches in " + c.input);

    std::vector<std::string> rows(chosen.size()), draws(chosen.size());
    std::vector<long> flagged(chosen.size(), 0);
    parallel_for(chosen.size(), [&](std::size_t k) {
        const MatchSeries& s = d.series[chosen[k]];
        std::ostringstream r, dr;
        for (Forecast& fc : forecast_series(s, params, sg, levels)) {
            const double y = s.y[fc.t_target - 1];
            bool flag = false;
            if (!is_missing(y)) {
                flag = y > fc.predictive.quantile(c.quantile);
                if (c.two_sided && !flag && c.quantile < 1.0) flag = y < fc.predictive.quantile(1.0 - c.quantile);
            }
            flagged[k] += flag;
            r << s.match_id << ',' << fc.t_target << ',' << format_number(y) << ',' << format_number(fc.mean);
            for (double l : levels) r << ',' << format_number(fc.quantiles.at(l));
            r << ',' << (flag ? 1 : 0) << '\n';
            if (c.draws > 0) {
                fc.sample = predictive_sample(fc, c.draws, draw_seed(c.seed, chosen[k], fc.t_target));
                for (int i = 0; i < c.draws; ++i)
                    dr << s.match_id << ',' << fc.t_target << ',' << i + 1 << ',' << format_number(fc.sample[i])
                       << '\n';
            }
        }
        rows[k] = r.str();
        draws[k] = dr.str();
    });

    std::ostringstream csv;
    csv << prov.csv_header() << "match_id,minute,observed,predicted_mean";
    for (double l : levels) csv << ",q" << format_number(l);
    csv << ",flag\n";
    long total_flags = 0;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        csv << rows[k];
        total_flags += flagged[k];
    }
    write_file(c.output, csv.str());
    if (c.draws > 0) {
        std::ostringstream dcsv;
        dcsv << prov.csv_header() << "match_id,minute,draw,value\n";
        for (const auto& s : draws) dcsv << s;
        write_file(stem_of(c.output) + "_draws.csv", dcsv.str());
    }
    out << "forecast " << chosen.size() << " matches, " << total_flags << " flagged minutes\n";
    return kExitOk;
}

ModelParams simulation_params(const RunConfig& c) {
    if (!c.params_path.empty()) {
        try {
            return params_from_result(json::parse(read_file(c.params_path)));
        } catch (const json::exception& e) {
            throw ConfigError(std::string("cannot parse parameter file: ") + e.what());
        }
    }
    // Baseline-table values; the inflation masses are not reported there.
    const Variant v = variant_from_string(c.variant);
    if (v == Variant::Baseline) return ModelParams::baseline(0.968, 0.249, 0.300, 0.03, 0.03, -0.195, 2.395, 0.600);
    return ModelParams::varying(c.K, 0.968, 0.249, 0.300, 0.03, 0.03, -0.195, 2.395, 0.600);
}

SimConfig sim_config(const RunConfig& c) {
    SimConfig s;
    s.n_matches = c.n_matches;
    s.T = c.T;
    s.seed = c.seed;
    s.params = simulation_params(c);
    s.validate();
    return s;
}

int cmd_simulate(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_output(c);
    const SimConfig s = sim_config(c);
    const auto sims = simulate_dataset(s);
    std::ostringstream csv;
    csv << prov.csv_header();
    write_simulated_csv(csv, sims, s.params);
    write_file(c.output, csv.str());
    out << "simulated " << sims.size() << " matches\n";
    return kExitOk;
}

int cmd_backtest(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_input(c);
    require_output(c);
    StrategyConfig sc;
    sc.thresholds = parse_list(c.thresholds, "thresholds");
    sc.first_crossing_only = c.first_crossing;
    const auto matches = group_by_match(read_csv_file(c.input).records);
    const BacktestResult r = backtest(matches, sc);
    std::ostringstream csv;
    csv << prov.csv_header() << "# eligible_matches: " << r.eligible_matches << '\n';
    for (const auto& n : r.notices) csv << "# notice: " << n << '\n';
    write_backtest_csv(csv, r);
    write_file(c.output, csv.str());
    out << "backtest over " << r.eligible_matches << " eligible matches\n";
    return kExitOk;
}

int cmd_recovery(const RunConfig& c, const Provenance& prov, std::ostream& out) {
    require_output(c);
    const SimConfig s = sim_config(c);
    FitOptions o = fit_options(c);
    o.variant = s.params.variant;
    o.K = s.params.variant == Variant::Varying ? s.params.K() : c.K;
    o.lambda_alpha = single_lambda(c.lambda_alpha, "lambda-alpha");
    o.lambda_beta = single_lambda(c.lambda_beta, "lambda-beta");
    const RecoveryReport r = recovery_study(s, c.replications, o);
    std::ostringstream csv;
    csv << prov.csv_header() << "# replications: " << r.n_replications << "\n# successful: " << r.n_success << '\n';
    for (const auto& f : r.failures) csv << "# failure " << f.replication << ": " << f.message << '\n';
    csv << "parameter,truth,mean_estimate,bias,empirical_se,mean_se,coverage\n";
    for (const auto& row : r.rows)
        csv << row.name << ',' << format_number(row.truth) << ',' << format_number(row.mean_estimate) << ','
            << format_number(row.bias) << ',' << format_number(row.empirical_se) << ','
            << format_number(row.mean_se) << ',' << format_number(row.coverage) << '\n';
    write_file(c.output, csv.str());
    out << "recovery study: " << r.n_success << " of " << r.n_replications << " fits succeeded\n";
    return r.n_success > 0 ? kExitOk : kExitNumerical;
}

void report_error(std::ostream& err, const char* kind, const std::string& message, int code) {
    json j = {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
    err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Beta-inflated state-space model for in-game betting stakes", "betssm"};
    app.set_version_flag("--version", std::string(BETSSM_VERSION));
    app.set_config("--config", "", "Key-value configuration file; command-line flags win");
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();

    app.add_option("--input", c.input, "Input CSV (raw or processed)");
    app.add_option("--output", c.output, "Output file; companion files use its stem");
    app.add_option("--params", c.params_path, "Fit/tune JSON (forecast) or truth parameters (simulate)");
    app.add_option("--variant", c.variant, "Model variant")->check(CLI::IsMember({"baseline", "varying"}));
    app.add_option("--K", c.K, "Number of B-spline basis functions")->check(CLI::Range(4, 60));
    auto* m_opt = app.add_option("--m", c.m, "Number of grid intervals for the state");
    auto* span_opt = app.add_option("--span-sds", c.span_sds, "Grid half-width in stationary sds");
    app.add_option("--lambda-alpha", c.lambda_alpha, "Smoothing parameter(s), comma separated");
    app.add_option("--lambda-beta", c.lambda_beta, "Smoothing parameter(s), comma separated");
    app.add_option("--seed", c.seed, "Random seed");
    app.add_option("--quantile", c.quantile, "Predictive quantile for outlier flags");
    app.add_option("--threads", c.threads, "Worker threads (0 = all cores)");
    app.add_option("--n-matches", c.n_matches, "Matches to simulate")->check(CLI::PositiveNumber);
    app.add_option("--T", c.T, "Minutes per simulated match")->check(CLI::Range(1, 85));
    app.add_option("--max-lag", c.max_lag, "Cross-correlation lags")->check(CLI::PositiveNumber);
    app.add_option("--draws", c.draws, "Predictive draws per forecast minute");
    app.add_option("--levels", c.levels, "Predictive quantile levels written by forecast");
    app.add_option("--match", c.match_ids, "Restrict forecast to these match ids");
    app.add_flag("--two-sided", c.two_sided, "Flag both tails in forecast");
    app.add_option("--replications", c.replications, "Recovery-study replications")->check(CLI::PositiveNumber);
    app.add_option("--thresholds", c.thresholds, "Backtest vaepdiff thresholds");
    app.add_flag("--first-crossing", c.first_crossing, "One bet per match and window");
    app.add_option("--max-iter", c.max_iter, "Optimizer iteration limit")->check(CLI::PositiveNumber);

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ingest", "Raw CSV to processed dataset, descriptives and cross-correlations"},
        {"fit", "Penalised maximum-likelihood fit"},
        {"tune", "Smoothing-parameter grid search by AIC"},
        {"forecast", "One-step-ahead forecasts and outlier flags"},
        {"simulate", "Synthetic raw dataset with hidden truth"},
        {"backtest", "Threshold betting strategy returns"},
        {"recovery-study", "Repeated simulate-and-fit parameter recovery"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->fallthrough();
        sub->callback([&c, name = name] { c.command = name; });
    }

    std::vector<std::string> argv_store{"betssm"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << BETSSM_VERSION << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        report_error(err, "usage", e.what(), kExitUsage);
        return kExitUsage;
    }
    c.m_given = m_opt->count() > 0;
    c.span_given = span_opt->count() > 0;

    try {
        set_thread_count(c.threads);
        Provenance prov;
        prov.command = c.command;
        prov.config_hash = fnv1a_hex(canonical_config(c));
        prov.seed = c.seed;
        if (c.command == "ingest") return cmd_ingest(c, prov, out);
        if (c.command == "fit") return cmd_fit(c, prov, out);
        if (c.command == "tune") return cmd_tune(c, prov, out);
        if (c.command == "forecast") return cmd_forecast(c, prov, out);
        if (c.command == "simulate") return cmd_simulate(c, prov, out);
        if (c.command == "backtest") return cmd_backtest(c, prov, out);
        if (c.command == "recovery-study") return cmd_recovery(c, prov, out);
        report_error(err, "usage", "unknown command", kExitUsage);
        return kExitUsage;
    } catch (const DataError& e) {
        report_error(err, "data", e.what(), kExitData);
        return kExitData;
    } catch (const NumericalError& e) {
        report_error(err, "numerical", e.what(), kExitNumerical);
        return kExitNumerical;
    } catch (const Error& e) {
        report_error(err, "usage", e.what(), kExitUsage);
        return kExitUsage;
    } catch (const std::exception& e) {
        report_error(err, "numerical", e.what(), kExitNumerical);
        return kExitNumerical;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace betssm
