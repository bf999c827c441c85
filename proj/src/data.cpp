#include "betssm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "betssm/error.hpp"

namespace betssm {

std::string format_number(double v) {
    if (std::isnan(v)) return "NA";
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    for (auto& s : out) {
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t i = 0;
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        s.erase(0, i);
    }
    return out;
}

bool blank(const std::string& s) { return s.empty() || s == "NA"; }

double parse_double(const std::string& s, long line_no, const char* column) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("line " + std::to_string(line_no) + ": cannot parse " + column + " value '" + s + "'");
    return v;
}

int parse_int(const std::string& s, long line_no, const char* column) {
    int v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw DataError("line " + std::to_string(line_no) + ": cannot parse " + column + " value '" + s + "'");
    return v;
}

std::optional<double> opt_double(const std::vector<std::string>& f, int idx, long line_no, const char* col) {
    if (idx < 0 || blank(f[idx])) return std::nullopt;
    return parse_double(f[idx], line_no, col);
}

void check_record(const RawMinuteRecord& r, long line_no) {
    auto where = [&] { return "line " + std::to_string(line_no) + " (match " + r.match_id + ")"; };
    if (r.match_id.empty()) throw DataError("line " + std::to_string(line_no) + ": empty match_id");
    if (r.minute < 0) throw DataError(where() + ": negative minute");
    for (const auto& s : {r.stake_home, r.stake_away})
        if (s && !(*s >= 0.0 && std::isfinite(*s))) throw DataError(where() + ": stakes must be nonnegative");
    for (const auto& o : {r.odds_home, r.odds_away, r.odds_draw})
        if (o && !(*o > 1.0 && std::isfinite(*o))) throw DataError(where() + ": odds must exceed 1");
    if (r.vaepdiff && !std::isfinite(*r.vaepdiff)) throw DataError(where() + ": non-finite vaepdiff");
    if (r.winprob_home && !(*r.winprob_home >= 0.0 && *r.winprob_home <= 1.0))
        throw DataError(where() + ": winprob_home outside [0,1]");
}

void write_opt(std::ostream& out, const std::optional<double>& v) {
    if (v) out << format_number(*v);
}

void write_raw_fields(std::ostream& out, const RawMinuteRecord& r) {
    out << r.match_id << ',' << r.minute << ',';
    write_opt(out, r.stake_home);
    out << ',';
    write_opt(out, r.stake_away);
    out << ',';
    write_opt(out, r.odds_home);
    out << ',';
    write_opt(out, r.odds_away);
    out << ',';
    write_opt(out, r.odds_draw);
    out << ',';
    write_opt(out, r.vaepdiff);
    out << ',';
    if (r.scorediff) out << *r.scorediff;
    out << ',';
    write_opt(out, r.winprob_home);
}

void write_header(std::ostream& out, bool derived) {
    bool first = true;
    for (const char* c : kRawColumns) {
        out << (first ? "" : ",") << c;
        first = false;
    }
    if (derived)
        for (const char* c : kDerivedColumns) out << ',' << c;
    out << '\n';
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    CsvTable table;
    std::string line;
    long line_no = 0;
    std::unordered_map<std::string, int> col;
    std::size_t n_fields = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t skip = line.size() > 1 && line[1] == ' ' ? 2 : 1;
            table.comments.push_back(line.substr(skip));
            continue;
        }
        std::vector<std::string> f = split(line);
        if (col.empty()) {
            for (std::size_t i = 0; i < f.size(); ++i) col[f[i]] = static_cast<int>(i);
            std::string missing;
            for (const char* c : kRawColumns)
                if (!col.count(c)) missing += (missing.empty() ? "" : ", ") + std::string(c);
            if (!missing.empty()) throw DataError("CSV header is missing column(s): " + missing);
            table.has_derived = col.count("relativestake") && col.count("prewindiff") && col.count("winprobteam");
            n_fields = f.size();
            continue;
        }
        if (f.size() != n_fields)
            throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(n_fields) +
                            " fields, found " + std::to_string(f.size()));
        auto idx = [&](const char* c) {
            auto it = col.find(c);
            return it == col.end() ? -1 : it->second;
        };
        RawMinuteRecord r;
        r.match_id = f[idx("match_id")];
        if (blank(f[idx("minute")])) throw DataError("line " + std::to_string(line_no) + ": blank minute");
        r.minute = parse_int(f[idx("minute")], line_no, "minute");
        r.stake_home = opt_double(f, idx("stake_home"), line_no, "stake_home");
        r.stake_away = opt_double(f, idx("stake_away"), line_no, "stake_away");
        r.odds_home = opt_double(f, idx("odds_home"), line_no, "odds_home");
        r.odds_away = opt_double(f, idx("odds_away"), line_no, "odds_away");
        r.odds_draw = opt_double(f, idx("odds_draw"), line_no, "odds_draw");
        r.vaepdiff = opt_double(f, idx("vaepdiff"), line_no, "vaepdiff");
        if (!blank(f[idx("scorediff")])) r.scorediff = parse_int(f[idx("scorediff")], line_no, "scorediff");
        r.winprob_home = opt_double(f, idx("winprob_home"), line_no, "winprob_home");
        r.relativestake = opt_double(f, idx("relativestake"), line_no, "relativestake");
        r.prewindiff = opt_double(f, idx("prewindiff"), line_no, "prewindiff");
        r.winprobteam = opt_double(f, idx("winprobteam"), line_no, "winprobteam");
        check_record(r, line_no);
        table.records.push_back(std::move(r));
    }
    if (col.empty()) throw DataError("CSV input has no header");
    return table;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_csv(in);
}

void write_raw_csv(std::ostream& out, std::span<const RawMinuteRecord> records) {
    write_header(out, false);
    for (const auto& r : records) {
        write_raw_fields(out, r);
        out << '\n';
    }
}

std::optional<double> relative_stakes(double stake_home, double stake_away) {
    if (!(stake_home >= 0.0) || !(stake_away >= 0.0)) throw DataError("stakes must be nonnegative");
    const double total = stake_home + stake_away;
    if (total == 0.0) return std::nullopt;
    return stake_home / total;
}

ImpliedProbabilities implied_probability(double odds_home, double odds_away, double odds_draw) {
    if (!(odds_home > 1.0) || !(odds_away > 1.0) || !(odds_draw > 1.0))
        throw DataError("decimal odds must exceed 1");
    const double ih = 1.0 / odds_home, ia = 1.0 / odds_away, id = 1.0 / odds_draw;
    const double s = ih + ia + id;
    ImpliedProbabilities out{ih / s, ia / s, 0.0};
    out.draw = 1.0 - out.home - out.away;
    return out;
}

std::vector<MatchRecords> group_by_match(std::vector<RawMinuteRecord> records) {
    std::vector<MatchRecords> out;
    std::unordered_map<std::string, std::size_t> where;
    for (auto& r : records) {
        auto [it, inserted] = where.try_emplace(r.match_id, out.size());
        if (inserted) out.push_back({r.match_id, {}});
        out[it->second].rows.push_back(std::move(r));
    }
    for (auto& m : out)
        std::stable_sort(m.rows.begin(), m.rows.end(),
                         [](const RawMinuteRecord& a, const RawMinuteRecord& b) { return a.minute < b.minute; });
    return out;
}

MatchSeries build_match_series(const MatchRecords& match) {
    const auto& rows = match.rows;
    if (rows.empty()) throw DataError("match " + match.match_id + ": no records");
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].minute == rows[i - 1].minute)
            throw DataError("match " + match.match_id + ": duplicate minute " + std::to_string(rows[i].minute));

    MatchSeries s;
    s.match_id = match.match_id;
    double pregame_home = 0.0;
    const RawMinuteRecord* pregame = rows.front().minute == 0 ? &rows.front() : nullptr;
    if (pregame && pregame->has_odds()) {
        const auto ip = implied_probability(*pregame->odds_home, *pregame->odds_away, *pregame->odds_draw);
        s.prewindiff = ip.home - ip.away;
        pregame_home = ip.home;
    } else {
        // Processed files carry prewindiff on every row instead of a pre-game row.
        auto it = std::find_if(rows.begin(), rows.end(), [](const RawMinuteRecord& r) { return r.prewindiff.has_value(); });
        if (it == rows.end()) throw DataError("match " + match.match_id + ": missing pre-game odds");
        s.prewindiff = *it->prewindiff;
        if (!(s.prewindiff >= -1.0 && s.prewindiff <= 1.0))
            throw DataError("match " + match.match_id + ": prewindiff outside [-1,1]");
        pregame_home = 0.5 * (1.0 + s.prewindiff);
    }

    const int T = std::min(kLastMinute, rows.back().minute);
    if (T < 1) throw DataError("match " + match.match_id + ": no in-game minutes");
    s.y.assign(T, kMissing);
    s.vaepdiff.assign(T, 0.0);
    s.scorediff.assign(T, 0);
    s.winprobteam.assign(T, 0.0);

    std::size_t k = pregame ? 1 : 0;
    int score = 0;
    double winprob = pregame_home;
    for (int t = 1; t <= T; ++t) {
        while (k < rows.size() && rows[k].minute < t) ++k;
        const RawMinuteRecord* r = (k < rows.size() && rows[k].minute == t) ? &rows[k] : nullptr;
        if (r) {
            if (r->stake_home && r->stake_away) {
                if (auto y = relative_stakes(*r->stake_home, *r->stake_away)) s.y[t - 1] = *y;
            } else if (r->relativestake) {
                s.y[t - 1] = *r->relativestake;
            }
            if (r->vaepdiff) s.vaepdiff[t - 1] = *r->vaepdiff;
            if (r->scorediff) score = *r->scorediff;
            if (r->has_odds())
                winprob = implied_probability(*r->odds_home, *r->odds_away, *r->odds_draw).home;
            else if (r->winprob_home)
                winprob = *r->winprob_home;
            else if (r->winprobteam)
                winprob = *r->winprobteam;
        }
        s.scorediff[t - 1] = score;
        s.winprobteam[t - 1] = winprob;
    }
    s.validate();
    return s;
}

Dataset make_dataset(CsvTable table) {
    Dataset d;
    d.comments = std::move(table.comments);
    d.matches = group_by_match(std::move(table.records));
    d.series.reserve(d.matches.size());
    for (const auto& m : d.matches) d.series.push_back(build_match_series(m));
    return d;
}

Dataset load_dataset(const std::string& path) { return make_dataset(read_csv_file(path)); }

void write_processed_csv(std::ostream& out, const Dataset& data) {
    write_header(out, true);
    for (std::size_t i = 0; i < data.matches.size(); ++i) {
        const MatchRecords& m = data.matches[i];
        const MatchSeries& s = data.series[i];
        std::size_t k = 0;
        for (int t = 1; t <= s.T(); ++t) {
            while (k < m.rows.size() && m.rows[k].minute < t) ++k;
            RawMinuteRecord r;
            if (k < m.rows.size() && m.rows[k].minute == t) r = m.rows[k];
            r.match_id = s.match_id;
            r.minute = t;
            r.vaepdiff = s.vaepdiff[t - 1];
            r.scorediff = s.scorediff[t - 1];
            write_raw_fields(out, r);
            out << ',';
            if (!is_missing(s.y[t - 1])) out << format_number(s.y[t - 1]);
            out << ',' << format_number(s.prewindiff) << ',' << format_number(s.winprobteam[t - 1]) << '\n';
        }
    }
}

namespace {

DescriptiveRow summarize(std::string name, const std::vector<double>& v, long n) {
    DescriptiveRow row;
    row.variable = std::move(name);
    row.n = n;
    if (v.empty()) {
        row.mean = row.sd = row.min = row.max = kMissing;
        return row;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    row.mean = sum / v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - row.mean) * (x - row.mean);
    row.sd = v.size() > 1 ? std::sqrt(ss / (v.size() - 1)) : 0.0;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    row.min = *lo;
    row.max = *hi;
    return row;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 3) return kMissing;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) return kMissing;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

std::vector<DescriptiveRow> descriptives(std::span<const MatchSeries> matches) {
    if (matches.empty()) throw DataError("descriptives need at least one match");
    std::vector<double> stakes, pre, vaep;
    long minutes = 0;
    for (const auto& m : matches) {
        for (double y : m.y)
            if (!is_missing(y)) stakes.push_back(y);
        pre.push_back(m.prewindiff);
        vaep.insert(vaep.end(), m.vaepdiff.begin(), m.vaepdiff.end());
        minutes += m.T();
    }
    return {summarize("relativestake", stakes, static_cast<long>(stakes.size())),
            summarize("prewindiff", pre, minutes), summarize("vaepdiff", vaep, minutes)};
}

CrossCorrelation cross_correlation(std::span<const MatchSeries> matches, int max_lag) {
    if (max_lag < 1) throw ConfigError("max_lag must be at least 1");
    CrossCorrelation cc;
    cc.max_lag = max_lag;
    std::vector<double> sum(max_lag + 1, 0.0);
    std::vector<long> count(max_lag + 1, 0);
    for (const auto& m : matches) {
        int n = 0;
        while (n < m.T() && m.scorediff[n] == 0) ++n;
        if (n < max_lag + 2) {
            cc.skipped.push_back(m.match_id);
            continue;
        }
        std::vector<double> row(max_lag + 1);
        for (int lag = 0; lag <= max_lag; ++lag) {
            std::vector<double> x, y;
            for (int t = 0; t + lag < n; ++t) {
                const double yy = m.y[t + lag];
                if (is_missing(yy)) continue;
                x.push_back(m.vaepdiff[t]);
                y.push_back(yy);
            }
            row[lag] = pearson(x, y);
            if (!std::isnan(row[lag])) {
                sum[lag] += row[lag];
                ++count[lag];
            }
        }
        cc.match_ids.push_back(m.match_id);
        cc.per_match.push_back(std::move(row));
    }
    cc.mean.resize(max_lag + 1);
    for (int lag = 0; lag <= max_lag; ++lag) cc.mean[lag] = count[lag] ? sum[lag] / count[lag] : kMissing;
    return cc;
}

void write_descriptives_csv(std::ostream& out, const std::vector<DescriptiveRow>& rows) {
    out << "variable,n,mean,sd,min,max\n";
    for (const auto& r : rows)
        out << r.variable << ',' << r.n << ',' << format_number(r.mean) << ',' << format_number(r.sd) << ','
            << format_number(r.min) << ',' << format_number(r.max) << '\n';
}

void write_cross_correlation_csv(std::ostream& out, const CrossCorrelation& cc) {
    out << "match_id,lag,value\n";
    for (std::size_t k = 0; k < cc.per_match.size(); ++k)
        for (int lag = 0; lag <= cc.max_lag; ++lag)
            out << cc.match_ids[k] << ',' << lag << ',' << format_number(cc.per_match[k][lag]) << '\n';
    for (int lag = 0; lag <= cc.max_lag; ++lag) out << "mean," << lag << ',' << format_number(cc.mean[lag]) << '\n';
}

}  // namespace betssm
