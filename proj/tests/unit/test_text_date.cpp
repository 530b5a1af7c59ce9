#include <doctest.h>

#include <cmath>
#include <limits>

#include "factorforge/date.hpp"
#include "factorforge/error.hpp"
#include "factorforge/text.hpp"

using namespace factorforge;

TEST_CASE("format_number round-trips and prints missing as empty") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 123456789.123, 0.0047045051}) {
    auto s = format_number(v);
    CHECK(parse_number(s) == v);
  }
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(std::numeric_limits<double>::quiet_NaN()).empty());
}

TEST_CASE("parse_number treats empty and junk cells as missing") {
  CHECK(std::isnan(parse_number("")));
  CHECK(std::isnan(parse_number("abc")));
  CHECK(parse_number("-3.25") == -3.25);
}

TEST_CASE("split_csv_line keeps empty trailing cells") {
  auto cells = split_csv_line("a,,b,");
  REQUIRE(cells.size() == 4);
  CHECK(cells[1].empty());
  CHECK(cells[3].empty());
}

TEST_CASE("fnv1a_hex matches the published test vector") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("Date parses strict ISO dates") {
  auto d = Date::parse("2020-02-29");
  REQUIRE(d.has_value());
  CHECK(d->iso() == "2020-02-29");
  CHECK(d->year() == 2020);
  CHECK(d->month() == 2u);
  CHECK_FALSE(Date::parse("2019-02-29").has_value());
  CHECK_FALSE(Date::parse("2020-2-01").has_value());
  CHECK_FALSE(Date::parse("2020-01-01x").has_value());
  CHECK(month_end(2021, 2) == Date(2021, 2, 28));
  CHECK(Date(2020, 1, 31).month_index() + 1 == Date(2020, 2, 1).month_index());
  CHECK_THROWS_AS(Date(2021, 13, 1), Error);
}
