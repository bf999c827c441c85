#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "betssm/model.hpp"

namespace betssm {

// Column order of the raw minute-level CSV.
inline constexpr const char* kRawColumns[] = {"match_id", "minute",   "stake_home", "stake_away",
                                              "odds_home", "odds_away", "odds_draw",  "vaepdiff",
                                              "scorediff", "winprob_home"};
// Extra columns written to processed files.
inline constexpr const char* kDerivedColumns[] = {"relativestake", "prewindiff", "winprobteam"};

// One CSV row. Minute 0 carries the pre-game odds. Blank fields are empty
// optionals; the derived fields are only present in processed files.
struct RawMinuteRecord {
    std::string match_id;
    int minute = 0;
    std::optional<double> stake_home;
    std::optional<double> stake_away;
    std::optional<double> odds_home;
    std::optional<double> odds_away;
    std::optional<double> odds_draw;
    std::optional<double> vaepdiff;
    std::optional<int> scorediff;
    std::optional<double> winprob_home;
    std::optional<double> relativestake;
    std::optional<double> prewindiff;
    std::optional<double> winprobteam;

    bool has_odds() const { return odds_home && odds_away && odds_draw; }
};

struct CsvTable {
    std::vector<RawMinuteRecord> records;
    // '#' lines with the leading "# " removed, in file order.
    std::vector<std::string> comments;
    bool has_derived = false;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);
// Raw columns only.
void write_raw_csv(std::ostream& out, std::span<const RawMinuteRecord> records);

// home / (home + away); empty when both are zero. Negative stakes throw
// DataError.
std::optional<double> relative_stakes(double stake_home, double stake_away);

struct ImpliedProbabilities {
    double home = 0.0;
    double away = 0.0;
    double draw = 0.0;
};
// Inverse odds normalised to sum to one. Odds <= 1 throw DataError.
ImpliedProbabilities implied_probability(double odds_home, double odds_away, double odds_draw);

struct MatchRecords {
    std::string match_id;
    std::vector<RawMinuteRecord> rows;  // sorted by minute
};

// Groups by match_id in order of first appearance and sorts each match by
// minute.
std::vector<MatchRecords> group_by_match(std::vector<RawMinuteRecord> records);

// Model-ready series for minutes 1..min(85, last minute). Minutes without a
// row, or with zero total stake, get a missing observation.
MatchSeries build_match_series(const MatchRecords& match);

struct Dataset {
    std::vector<MatchRecords> matches;
    std::vector<MatchSeries> series;
    std::vector<std::string> comments;
};

Dataset load_dataset(const std::string& path);
Dataset make_dataset(CsvTable table);

// Raw columns plus relativestake, prewindiff and winprobteam, one row per
// modelled minute. Reading this back reproduces the same series.
void write_processed_csv(std::ostream& out, const Dataset& data);

struct DescriptiveRow {
    std::string variable;
    long n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// relativestake (observed minutes), prewindiff (one value per match; n
// still counts minutes) and vaepdiff (all minutes).
std::vector<DescriptiveRow> descriptives(std::span<const MatchSeries> matches);

struct CrossCorrelation {
    int max_lag = 20;
    std::vector<std::string> match_ids;
    // per_match[k][lag] = corr(vaepdiff_t, relativestake_{t+lag}).
    std::vector<std::vector<double>> per_match;
    // Lag-wise mean over matches, ignoring undefined values.
    std::vector<double> mean;
    std::vector<std::string> skipped;
};

// Cross-correlations on the stretch before the first goal. Matches whose
// stretch is shorter than max_lag + 2 minutes are skipped.
CrossCorrelation cross_correlation(std::span<const MatchSeries> matches, int max_lag = 20);

void write_descriptives_csv(std::ostream& out, const std::vector<DescriptiveRow>& rows);
void write_cross_correlation_csv(std::ostream& out, const CrossCorrelation& cc);

// Shortest decimal form that reads back to the same double; "NA" for NaN.
std::string format_number(double v);

}  // namespace betssm
