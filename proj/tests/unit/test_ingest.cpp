#include <doctest.h>

#include <cmath>
#include <limits>

#include "factorforge/error.hpp"
#include "factorforge/ingest.hpp"

using namespace factorforge;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

ObservationRow obs(Permno p, Date d, double ret) {
  ObservationRow r;
  r.permno = p;
  r.date = d;
  r.prc = 10.0;
  r.ret = ret;
  r.vol = 100.0;
  r.shrout = 1000.0;
  return r;
}

}  // namespace

TEST_CASE("prices CSV loads well-formed rows") {
  auto p = parse_prices_csv(
      "permno,date,prc,ret,vol,shrout\n"
      "1,2020-01-31,10,0.1,100,1000\n"
      "1,2020-02-29,11,0.1,100,1000\n"
      "2,2020-01-31,-5,0.0,50,500\n");
  REQUIRE(p.rows.size() == 3);
  CHECK(p.rows[2].prc == -5.0);
  CHECK(p.rows[1].date == Date(2020, 2, 29));
}

TEST_CASE("columns are located by header name") {
  auto p = parse_prices_csv("date,shrout,permno,vol,ret,prc\n2020-01-31,1000,7,100,0.1,10\n");
  REQUIRE(p.rows.size() == 1);
  CHECK(p.rows[0].permno == 7);
  CHECK(p.rows[0].prc == 10.0);
  CHECK(p.rows[0].shrout == 1000.0);
}

TEST_CASE("empty prc cell loads as missing") {
  auto p = parse_prices_csv("permno,date,prc,ret,vol,shrout\n1,2020-01-31,,0.1,100,1000\n");
  REQUIRE(p.rows.size() == 1);
  CHECK(std::isnan(p.rows[0].prc));
}

TEST_CASE("schema errors name the column") {
  try {
    parse_prices_csv("date,prc,ret,vol,shrout\n2020-01-31,1,0,1,1\n", "x.csv");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("\"permno\"") != std::string::npos);
  }
  try {
    parse_prices_csv("permno,date,prc,ret,vol,shrout\n1,2020-13-01,1,0,1,1\n", "x.csv");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    std::string msg = e.what();
    CHECK(msg.find("row 2") != std::string::npos);
    CHECK(msg.find("\"date\"") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_prices_csv("permno,date,prc,ret,vol,shrout\n1,2020-01-31,1,0,1,1\n"
                                   "1,2020-01-31,1,0,1,1\n"),
                  SchemaError);
  CHECK_THROWS_AS(load_prices_csv("/nonexistent/prices.csv"), Error);
}

TEST_CASE("membership CSV supports open-ended rows") {
  auto m = parse_membership_csv("permno,start_date,end_date\n1,2020-01-01,2020-06-30\n2,2020-01-01,\n");
  REQUIRE(m.size() == 2);
  CHECK(m[0].end_date == Date(2020, 6, 30));
  CHECK_FALSE(m[1].end_date.has_value());
}

TEST_CASE("merge_and_filter keeps rows inside inclusive membership intervals") {
  Panel prices;
  prices.rows = {obs(1, Date(2020, 1, 31), 0.0), obs(1, Date(2020, 6, 30), 0.0),
                 obs(1, Date(2020, 7, 1), 0.0), obs(3, Date(2020, 1, 31), 0.0),
                 obs(2, Date(2021, 1, 31), 0.0), obs(2, Date(2019, 12, 31), 0.0)};
  std::vector<MembershipRow> members{{1, Date(2020, 1, 1), Date(2020, 6, 30)},
                                     {2, Date(2020, 1, 1), std::nullopt}};
  auto out = merge_and_filter(prices, members);
  REQUIRE(out.rows.size() == 3);
  // Inside [start, end], end inclusive; one day after the end is dropped; permno 3 has no entry.
  CHECK(out.rows[0].date == Date(2020, 1, 31));
  CHECK(out.rows[1].date == Date(2020, 6, 30));
  // Open-ended membership runs to the dataset's last date.
  CHECK(out.rows[2].permno == 2);
  CHECK(out.rows[2].date == Date(2021, 1, 31));
  for (const auto& r : out.rows) CHECK(r.permno != 3);

  CHECK(merge_and_filter(prices, {}).rows.empty());
}

TEST_CASE("clean forward-fills, zero-fills leading gaps and treats inf as missing") {
  Panel p;
  p.rows = {obs(1, Date(2020, 1, 31), 0.1), obs(1, Date(2020, 2, 29), kNaN),
            obs(1, Date(2020, 3, 31), 0.3), obs(2, Date(2020, 1, 31), kNaN),
            obs(2, Date(2020, 2, 29), 0.2), obs(3, Date(2020, 1, 31), kInf),
            obs(3, Date(2020, 2, 29), kNaN)};
  CHECK(count_missing(p) == 4);
  auto c = clean(p);
  CHECK(c.rows[1].ret == 0.1);
  CHECK(c.rows[2].ret == 0.3);
  CHECK(c.rows[3].ret == 0.0);
  CHECK(c.rows[4].ret == 0.2);
  CHECK(c.rows[5].ret == 0.0);
  CHECK(c.rows[6].ret == 0.0);
  CHECK(count_missing(c) == 0);
}

TEST_CASE("written CSVs parse back to the same rows") {
  Panel p;
  p.rows = {obs(1, Date(2020, 1, 31), 0.125), obs(2, Date(2020, 1, 31), -0.5)};
  auto back = parse_prices_csv(write_prices_csv(p));
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].ret == 0.125);
  CHECK(back.rows[1].ret == -0.5);
  std::vector<MembershipRow> m{{1, Date(2020, 1, 1), std::nullopt}, {2, Date(2020, 1, 1), Date(2020, 5, 1)}};
  auto mb = parse_membership_csv(write_membership_csv(m));
  REQUIRE(mb.size() == 2);
  CHECK_FALSE(mb[0].end_date.has_value());
  CHECK(mb[1].end_date == Date(2020, 5, 1));
}
