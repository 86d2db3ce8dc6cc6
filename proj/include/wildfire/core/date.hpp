#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

namespace wildfire {

// A proleptic Gregorian calendar day. Stored as days since 1970-01-01 so that
// day arithmetic and range iteration are integer operations.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days d) : serial_(d.time_since_epoch().count()) {}

  static constexpr Date from_serial(int serial) {
    Date d;
    d.serial_ = serial;
    return d;
  }

  // Returns nullopt for impossible calendar dates.
  static std::optional<Date> from_ymd(int y, unsigned m, unsigned d) {
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{std::chrono::sys_days{ymd}};
  }

  // Strict YYYY-MM-DD.
  static std::optional<Date> parse(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
      int v = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        v = v * 10 + (s[i] - '0');
      }
      return v;
    };
    const auto y = num(0, 4);
    const auto m = num(5, 2);
    const auto d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    return from_ymd(*y, static_cast<unsigned>(*m), static_cast<unsigned>(*d));
  }

  constexpr int serial() const { return serial_; }
  std::chrono::sys_days sys_days() const { return std::chrono::sys_days{std::chrono::days{serial_}}; }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{sys_days()}; }

  int year() const { return static_cast<int>(ymd().year()); }
  unsigned month() const { return static_cast<unsigned>(ymd().month()); }
  unsigned day() const { return static_cast<unsigned>(ymd().day()); }

  std::string iso() const {
    const auto v = ymd();
    char buf[16];
    const int y = static_cast<int>(v.year());
    const unsigned m = static_cast<unsigned>(v.month());
    const unsigned d = static_cast<unsigned>(v.day());
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return buf;
  }

  constexpr Date operator+(int days) const { return from_serial(serial_ + days); }
  constexpr Date operator-(int days) const { return from_serial(serial_ - days); }
  constexpr int operator-(Date other) const { return serial_ - other.serial_; }
  constexpr Date& operator++() {
    ++serial_;
    return *this;
  }

  constexpr auto operator<=>(const Date&) const = default;

 private:
  int serial_ = 0;
};

inline std::ostream& operator<<(std::ostream& os, Date d) { return os << d.iso(); }

// Inclusive calendar range.
struct DateRange {
  Date first;
  Date last;

  int days() const { return last - first + 1; }
  bool contains(Date d) const { return first <= d && d <= last; }
};

inline const DateRange kStudyRange{*Date::parse("1992-01-01"), *Date::parse("2015-12-31")};

// Parses "A..B" into an inclusive range.
inline std::optional<DateRange> parse_range(std::string_view s) {
  const auto sep = s.find("..");
  if (sep == std::string_view::npos) return std::nullopt;
  const auto a = Date::parse(s.substr(0, sep));
  const auto b = Date::parse(s.substr(sep + 2));
  if (!a || !b || *b < *a) return std::nullopt;
  return DateRange{*a, *b};
}

}  // namespace wildfire

template <>
struct std::hash<wildfire::Date> {
  std::size_t operator()(wildfire::Date d) const noexcept { return std::hash<int>{}(d.serial()); }
};
