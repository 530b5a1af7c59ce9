#include "factorforge/ingest.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "factorforge/error.hpp"
#include "factorforge/text.hpp"

namespace factorforge {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Header lookup: maps each required column name to its position.
template <std::size_t N>
std::array<std::size_t, N> locate_columns(std::string_view header_line,
                                          const std::array<std::string_view, N>& required,
                                          const std::string& source) {
  auto header = split_csv_line(header_line);
  std::array<std::size_t, N> positions{};
  for (std::size_t k = 0; k < N; ++k) {
    auto it = std::find(header.begin(), header.end(), required[k]);
    if (it == header.end())
      throw SchemaError(source + ": missing required column \"" + std::string(required[k]) + "\"");
    positions[k] = static_cast<std::size_t>(it - header.begin());
  }
  return positions;
}

std::string where(const std::string& source, std::size_t line_no, std::string_view column) {
  return source + ": row " + std::to_string(line_no) + ", column \"" + std::string(column) + "\"";
}

Permno parse_permno(std::string_view cell, const std::string& source, std::size_t line_no) {
  Permno value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
    throw SchemaError(where(source, line_no, "permno") + ": malformed permno \"" +
                      std::string(cell) + "\"");
  return value;
}

Date parse_date(std::string_view cell, std::string_view column, const std::string& source,
                std::size_t line_no) {
  auto date = Date::parse(cell);
  if (!date)
    throw SchemaError(where(source, line_no, column) + ": malformed date \"" + std::string(cell) +
                      "\"");
  return *date;
}

/// Calls `fn(cells, line_no)` for every non-empty data line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line_no == 1) continue;
    if (line.empty() || line == "\r") continue;
    fn(split_csv_line(line), line_no);
  }
}

std::string_view first_line(std::string_view text, const std::string& source) {
  if (text.empty()) throw SchemaError(source + ": empty file, header row expected");
  return text.substr(0, text.find('\n'));
}

std::string_view cell_at(const std::vector<std::string_view>& cells, std::size_t index) {
  return index < cells.size() ? cells[index] : std::string_view{};
}

void forward_fill_then_zero(std::vector<ObservationRow>& rows, std::size_t begin, std::size_t end,
                            double ObservationRow::*field) {
  double last = kMissing;
  for (std::size_t i = begin; i < end; ++i) {
    double& v = rows[i].*field;
    if (!std::isfinite(v)) v = kMissing;
    if (std::isnan(v)) {
      v = last;
    } else {
      last = v;
    }
    if (std::isnan(v)) v = 0.0;
  }
}

}  // namespace

Panel parse_prices_csv(std::string_view text, const std::string& source) {
  static constexpr std::array<std::string_view, 6> kColumns{"permno", "date", "prc",
                                                            "ret",    "vol",  "shrout"};
  auto cols = locate_columns(first_line(text, source), kColumns, source);
  Panel panel;
  std::set<std::pair<Permno, Date>> seen;
  for_each_record(text, [&](const std::vector<std::string_view>& cells, std::size_t line_no) {
    ObservationRow row;
    row.permno = parse_permno(cell_at(cells, cols[0]), source, line_no);
    row.date = parse_date(cell_at(cells, cols[1]), "date", source, line_no);
    row.prc = parse_number(cell_at(cells, cols[2]));
    row.ret = parse_number(cell_at(cells, cols[3]));
    row.vol = parse_number(cell_at(cells, cols[4]));
    row.shrout = parse_number(cell_at(cells, cols[5]));
    if (!seen.emplace(row.permno, row.date).second)
      throw SchemaError(source + ": row " + std::to_string(line_no) + ": duplicate (permno, date) " +
                        std::to_string(row.permno) + " " + row.date.iso());
    panel.rows.push_back(row);
  });
  return panel;
}

std::vector<MembershipRow> parse_membership_csv(std::string_view text, const std::string& source) {
  static constexpr std::array<std::string_view, 3> kColumns{"permno", "start_date", "end_date"};
  auto cols = locate_columns(first_line(text, source), kColumns, source);
  std::vector<MembershipRow> out;
  for_each_record(text, [&](const std::vector<std::string_view>& cells, std::size_t line_no) {
    MembershipRow row;
    row.permno = parse_permno(cell_at(cells, cols[0]), source, line_no);
    row.start_date = parse_date(cell_at(cells, cols[1]), "start_date", source, line_no);
    auto end_cell = cell_at(cells, cols[2]);
    if (!end_cell.empty() && end_cell != "\r")
      row.end_date = parse_date(end_cell, "end_date", source, line_no);
    if (row.end_date && *row.end_date < row.start_date)
      throw SchemaError(where(source, line_no, "end_date") + ": end_date precedes start_date");
    out.push_back(row);
  });
  return out;
}

Panel load_prices_csv(const std::string& path) { return parse_prices_csv(read_file(path), path); }

std::vector<MembershipRow> load_membership_csv(const std::string& path) {
  return parse_membership_csv(read_file(path), path);
}

Panel merge_and_filter(const Panel& prices, const std::vector<MembershipRow>& membership) {
  Panel out;
  if (prices.rows.empty()) return out;
  Date max_date = prices.rows.front().date;
  for (const auto& r : prices.rows) max_date = std::max(max_date, r.date);

  std::map<Permno, std::vector<std::pair<Date, Date>>> intervals;
  for (const auto& m : membership)
    intervals[m.permno].emplace_back(m.start_date, m.end_date.value_or(max_date));

  for (const auto& r : prices.rows) {
    auto it = intervals.find(r.permno);
    if (it == intervals.end()) continue;
    bool inside = std::any_of(it->second.begin(), it->second.end(),
                              [&](const auto& iv) { return iv.first <= r.date && r.date <= iv.second; });
    if (inside) out.rows.push_back(r);
  }
  std::sort(out.rows.begin(), out.rows.end(), [](const ObservationRow& a, const ObservationRow& b) {
    return a.permno != b.permno ? a.permno < b.permno : a.date < b.date;
  });
  return out;
}

Panel clean(const Panel& panel) {
  Panel out = panel;
  for (const auto& g : group_ranges(out)) {
    for (auto field : {&ObservationRow::prc, &ObservationRow::ret, &ObservationRow::vol,
                       &ObservationRow::shrout})
      forward_fill_then_zero(out.rows, g.begin, g.end, field);
  }
  return out;
}

std::vector<GroupRange> group_ranges(const Panel& panel) {
  std::vector<GroupRange> groups;
  const auto& rows = panel.rows;
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= rows.size(); ++i) {
    if (i == rows.size() || rows[i].permno != rows[begin].permno) {
      groups.push_back({rows[begin].permno, begin, i});
      begin = i;
    }
  }
  if (rows.empty()) groups.clear();
  return groups;
}

std::size_t count_missing(const Panel& panel) {
  std::size_t n = 0;
  for (const auto& r : panel.rows)
    for (double v : {r.prc, r.ret, r.vol, r.shrout})
      if (!std::isfinite(v)) ++n;
  return n;
}

std::string write_prices_csv(const Panel& panel) {
  std::string out = "permno,date,prc,ret,vol,shrout\n";
  for (const auto& r : panel.rows) {
    out += std::to_string(r.permno);
    out += ',';
    out += r.date.iso();
    for (double v : {r.prc, r.ret, r.vol, r.shrout}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

std::string write_membership_csv(const std::vector<MembershipRow>& membership) {
  std::string out = "permno,start_date,end_date\n";
  for (const auto& m : membership) {
    out += std::to_string(m.permno) + ',' + m.start_date.iso() + ',';
    if (m.end_date) out += m.end_date->iso();
    out += '\n';
  }
  return out;
}

}  // namespace factorforge
