#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace factorforge {

/// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days days) : days_(days.time_since_epoch().count()) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses `YYYY-MM-DD`; returns nullopt for anything else, including invalid calendar days.
  static std::optional<Date> parse(std::string_view text);

  std::chrono::year_month_day ymd() const;
  int year() const;
  unsigned month() const;

  /// Months since year 0, so consecutive calendar months differ by exactly one.
  int month_index() const;

  std::int32_t days() const { return days_; }
  std::string iso() const;

  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::int32_t days_ = 0;
};

/// Last calendar day of the given month.
Date month_end(int year, unsigned month);

}  // namespace factorforge
