#include <doctest.h>

#include <cmath>
#include <sstream>

#include "betssm/data.hpp"
#include "betssm/error.hpp"

using namespace betssm;

namespace {

const char* kHeader =
    "match_id,minute,stake_home,stake_away,odds_home,odds_away,odds_draw,vaepdiff,scorediff,winprob_home\n";

std::string rows_for(const std::string& id, int last_minute, int skip = -1) {
    std::ostringstream s;
    s << id << ",0,,,2,3,3.6,,0,\n";
    for (int t = 1; t <= last_minute; ++t) {
        if (t == skip) continue;
        s << id << ',' << t << ',' << 10 + t << ',' << 20 << ",2.1,3.1,3.5," << (t % 7 - 3) * 0.01 << ','
          << (t > 50 ? 1 : 0) << ",\n";
    }
    return s.str();
}

Dataset parse(const std::string& text) {
    std::istringstream in(text);
    return make_dataset(read_csv(in));
}

}  // namespace

TEST_CASE("relative stakes") {
    CHECK(*relative_stakes(30, 70) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_FALSE(relative_stakes(0, 0).has_value());
    CHECK(*relative_stakes(5, 0) == 1.0);
    CHECK(*relative_stakes(0, 5) == 0.0);
    CHECK_THROWS_AS(relative_stakes(-1, 2), DataError);
}

TEST_CASE("implied probabilities") {
    const auto p = implied_probability(2.0, 3.0, 3.6);
    CHECK(p.home == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(p.away == doctest::Approx(0.30).epsilon(1e-14));
    CHECK(p.draw == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(p.home + p.away + p.draw == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(implied_probability(1.0, 3.0, 3.0), DataError);
}

TEST_CASE("series construction") {
    const Dataset d = parse(std::string(kHeader) + rows_for("a", 93, 12));
    REQUIRE(d.series.size() == 1u);
    const MatchSeries& s = d.series[0];
    CHECK(s.T() == 85);
    CHECK(s.prewindiff == doctest::Approx(0.15).epsilon(1e-14));
    CHECK(s.y[0] == doctest::Approx(11.0 / 31.0).epsilon(1e-15));
    CHECK(is_missing(s.y[11]));
    CHECK(s.vaepdiff[11] == 0.0);
    CHECK(s.scorediff[60] == 1);
    CHECK(s.winprobteam[0] == doctest::Approx(implied_probability(2.1, 3.1, 3.5).home).epsilon(1e-15));

    const Dataset shorter = parse(std::string(kHeader) + rows_for("b", 40));
    CHECK(shorter.series[0].T() == 40);
}

TEST_CASE("grouping keeps first-appearance order and sorts minutes") {
    std::string text = kHeader;
    text += "z,2,1,1,2,3,3,0,0,\nz,0,,,2,3,3,,0,\ny,0,,,2,3,3,,0,\ny,1,1,3,2,3,3,0,0,\nz,1,3,1,2,3,3,0,0,\n";
    const Dataset d = parse(text);
    REQUIRE(d.series.size() == 2u);
    CHECK(d.series[0].match_id == "z");
    CHECK(d.series[0].y[0] == 0.75);
    CHECK(d.series[1].match_id == "y");
}

TEST_CASE("malformed input") {
    CHECK_THROWS_AS(parse(std::string(kHeader) + "a,0,,,2,3,3,,0,\na,1,1,1,2,3,3,0,0,\na,1,1,1,2,3,3,0,0,\n"),
                    DataError);
    CHECK_THROWS_AS(parse(std::string(kHeader) + "a,1,1,1,2,3,3,0,0,\n"), DataError);
    try {
        parse("match_id,minute,stake_home\na,1,1\n");
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("stake_away") != std::string::npos);
    }
    CHECK_THROWS_AS(parse(std::string(kHeader) + "a,x,1,1,2,3,3,0,0,\n"), DataError);
}

TEST_CASE("processed output re-ingests identically") {
    const Dataset d = parse(std::string(kHeader) + rows_for("a", 88, 5) + rows_for("b", 70));
    std::ostringstream first;
    write_processed_csv(first, d);
    const Dataset back = parse(first.str());
    std::ostringstream second;
    write_processed_csv(second, back);
    CHECK(first.str() == second.str());
    CHECK(back.series[1].T() == 70);
    CHECK(back.series[0].prewindiff == d.series[0].prewindiff);
}

TEST_CASE("descriptives") {
    MatchSeries a, b;
    a.y = {0.2, kMissing, 0.4};
    a.vaepdiff = {1, 2, 3};
    a.prewindiff = 0.1;
    b.y = {0.6};
    b.vaepdiff = {6};
    b.prewindiff = 0.3;
    const std::vector<MatchSeries> ms{a, b};
    const auto rows = descriptives(ms);
    REQUIRE(rows.size() == 3u);
    CHECK(rows[0].variable == "relativestake");
    CHECK(rows[0].n == 3);
    CHECK(rows[0].mean == doctest::Approx(0.4));
    CHECK(rows[0].sd == doctest::Approx(0.2));
    CHECK(rows[1].n == 4);
    CHECK(rows[1].mean == doctest::Approx(0.2));
    CHECK(rows[1].sd == doctest::Approx(std::sqrt(0.02)));
    CHECK(rows[2].max == 6.0);
}

TEST_CASE("cross-correlation") {
    MatchSeries s;
    s.match_id = "c";
    s.prewindiff = 0.0;
    const int T = 40;
    for (int t = 0; t < T; ++t) {
        s.vaepdiff.push_back(std::sin(1.3 * t) + 0.1 * (t % 3));
        s.scorediff.push_back(0);
    }
    // y_{t+1} is an affine copy of vaepdiff_t
    s.y.assign(T, 0.5);
    for (int t = 0; t + 1 < T; ++t) s.y[t + 1] = 0.5 + 0.1 * s.vaepdiff[t];
    const std::vector<MatchSeries> ms{s};
    const auto cc = cross_correlation(ms, 5);
    REQUIRE(cc.per_match.size() == 1u);
    CHECK(cc.per_match[0][1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cc.mean[1] == doctest::Approx(1.0).epsilon(1e-12));

    MatchSeries early = s;
    early.match_id = "early";
    std::fill(early.scorediff.begin() + 3, early.scorediff.end(), 1);
    const std::vector<MatchSeries> both{s, early};
    const auto cc2 = cross_correlation(both, 5);
    CHECK(cc2.skipped == std::vector<std::string>{"early"});
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(std::nan("")) == "NA");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}
