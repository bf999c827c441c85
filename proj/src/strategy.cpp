#include "betssm/strategy.hpp"

#include <algorithm>
#include <ostream>

#include "betssm/error.hpp"

namespace betssm {

std::string MinuteWindow::label() const {
    return std::to_string(begin) + "-" + (end < 0 ? std::string("end") : std::to_string(end));
}

void StrategyConfig::validate() const {
    if (thresholds.empty() || windows.empty()) throw ConfigError("strategy needs thresholds and windows");
    for (double t : thresholds)
        if (!(t > 0.0)) throw ConfigError("strategy thresholds must be positive");
    if (!(stake > 0.0)) throw ConfigError("strategy stake must be positive");
    for (std::size_t i = 0; i < windows.size(); ++i) {
        const auto& a = windows[i];
        if (a.end >= 0 && a.end <= a.begin) throw ConfigError("empty strategy window " + a.label());
        for (std::size_t j = 0; j < i; ++j) {
            const auto& b = windows[j];
            const bool disjoint = (a.end >= 0 && a.end <= b.begin) || (b.end >= 0 && b.end <= a.begin);
            if (!disjoint) throw ConfigError("strategy windows overlap: " + a.label() + " and " + b.label());
        }
    }
}

std::optional<double> StrategyCell::ret() const {
    if (bets == 0) return std::nullopt;
    return (payout - staked) / staked;
}

BacktestResult backtest(std::span<const MatchRecords> matches, const StrategyConfig& config) {
    config.validate();
    BacktestResult res;
    res.config = config;
    res.cells.assign(config.windows.size(), std::vector<StrategyCell>(config.thresholds.size()));
    for (const auto& m : matches) {
        if (m.rows.empty()) continue;
        // Score at the tied minute: the last record at or before it.
        std::optional<int> score_at_tie;
        int running = 0;
        for (const auto& r : m.rows) {
            if (r.minute > config.tied_minute) break;
            if (r.scorediff) running = *r.scorediff;
            score_at_tie = running;
        }
        if (!score_at_tie || *score_at_tie != 0) continue;
        int final_score = 0;
        for (const auto& r : m.rows)
            if (r.scorediff) final_score = *r.scorediff;
        const bool home_win = final_score > 0;
        ++res.eligible_matches;

        for (std::size_t w = 0; w < config.windows.size(); ++w) {
            for (std::size_t k = 0; k < config.thresholds.size(); ++k) {
                StrategyCell& cell = res.cells[w][k];
                for (const auto& r : m.rows) {
                    if (r.minute < 1 || !config.windows[w].contains(r.minute)) continue;
                    if (!r.vaepdiff || !(*r.vaepdiff > config.thresholds[k])) continue;
                    if (!r.odds_home) {
                        res.notices.push_back("match " + m.match_id + " minute " + std::to_string(r.minute) +
                                              ": no home odds, bet skipped");
                        continue;
                    }
                    ++cell.bets;
                    cell.staked += config.stake;
                    if (home_win) cell.payout += config.stake * *r.odds_home;
                    if (config.first_crossing_only) break;
                }
            }
        }
    }
    std::sort(res.notices.begin(), res.notices.end());
    res.notices.erase(std::unique(res.notices.begin(), res.notices.end()), res.notices.end());
    return res;
}

void write_backtest_csv(std::ostream& out, const BacktestResult& result) {
    out << "window";
    for (double t : result.config.thresholds) out << ",threshold_" << format_number(t);
    for (double t : result.config.thresholds) out << ",bets_" << format_number(t);
    out << '\n';
    for (std::size_t w = 0; w < result.cells.size(); ++w) {
        out << result.config.windows[w].label();
        for (const auto& c : result.cells[w]) {
            const auto r = c.ret();
            out << ',' << (r ? format_number(*r) : "NA");
        }
        for (const auto& c : result.cells[w]) out << ',' << c.bets;
        out << '\n';
    }
}

}  // namespace betssm
