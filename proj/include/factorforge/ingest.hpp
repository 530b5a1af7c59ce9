#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "factorforge/date.hpp"

namespace factorforge {

using Permno = std::int64_t;

/// One security-date record. Missing numeric cells are NaN until `clean` runs.
struct ObservationRow {
  Permno permno = 0;
  Date date;
  double prc = 0.0;
  double ret = 0.0;
  double vol = 0.0;
  double shrout = 0.0;
};

struct MembershipRow {
  Permno permno = 0;
  Date start_date;
  std::optional<Date> end_date;  // open-ended membership
};

/// Price observations. After `merge_and_filter` rows are sorted by (permno, date).
struct Panel {
  std::vector<ObservationRow> rows;
};

/// Half-open row range [begin, end) belonging to one permno in a sorted table.
struct GroupRange {
  Permno permno;
  std::size_t begin;
  std::size_t end;
};

/// Parses a prices CSV (`permno,date,prc,ret,vol,shrout`). `source` labels error messages.
Panel parse_prices_csv(std::string_view text, const std::string& source = "<memory>");
std::vector<MembershipRow> parse_membership_csv(std::string_view text,
                                                const std::string& source = "<memory>");

Panel load_prices_csv(const std::string& path);
std::vector<MembershipRow> load_membership_csv(const std::string& path);

/// Keeps rows whose date lies inside an inclusive membership interval of the same permno.
Panel merge_and_filter(const Panel& prices, const std::vector<MembershipRow>& membership);

/// inf -> missing, per-permno forward fill, leading gaps -> 0. Expects sorted input.
Panel clean(const Panel& panel);

/// Contiguous permno groups of a sorted panel.
std::vector<GroupRange> group_ranges(const Panel& panel);

/// Number of NaN or infinite numeric cells.
std::size_t count_missing(const Panel& panel);

std::string write_prices_csv(const Panel& panel);
std::string write_membership_csv(const std::vector<MembershipRow>& membership);

}  // namespace factorforge
