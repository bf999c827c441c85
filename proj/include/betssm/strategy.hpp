#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betssm/data.hpp"

namespace betssm {

// Half-open minute interval [begin, end); end = -1 means "to the final
// minute".
struct MinuteWindow {
    int begin = 45;
    int end = 60;

    bool contains(int minute) const { return minute >= begin && (end < 0 || minute < end); }
    std::string label() const;
};

struct StrategyConfig {
    std::vector<double> thresholds{0.02, 0.03, 0.05};
    std::vector<MinuteWindow> windows{{45, 60}, {60, 75}, {75, -1}};
    double stake = 1.0;
    // Matches qualify when the score is level at this minute.
    int tied_minute = 45;
    // Only the first qualifying minute per match and window gets a bet.
    bool first_crossing_only = false;

    void validate() const;
};

struct StrategyCell {
    long bets = 0;
    double staked = 0.0;
    double payout = 0.0;
    // (payout - staked) / staked; empty when no bet was placed.
    std::optional<double> ret() const;
};

struct BacktestResult {
    StrategyConfig config;
    // cells[w][k]: window w, threshold k.
    std::vector<std::vector<StrategyCell>> cells;
    long eligible_matches = 0;
    std::vector<std::string> notices;

    const StrategyCell& cell(std::size_t w, std::size_t k) const { return cells[w][k]; }
};

// Home bets at the quoted home odds on every minute with vaepdiff above the
// threshold, in matches level at the tied minute. Bets settle on the final
// score (scorediff of the last record; draws lose).
BacktestResult backtest(std::span<const MatchRecords> matches, const StrategyConfig& config = {});

// Rows: windows; columns: thresholds; "NA" marks cells without bets.
void write_backtest_csv(std::ostream& out, const BacktestResult& result);

}  // namespace betssm
