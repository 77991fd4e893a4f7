#pragma once

#include <compare>
#include <string>

namespace lecsum {

// A non-negative media time in seconds.
class TimeCode {
 public:
  constexpr TimeCode() = default;
  explicit TimeCode(double seconds);

  constexpr double seconds() const noexcept { return seconds_; }

  friend constexpr auto operator<=>(const TimeCode&, const TimeCode&) = default;
  friend constexpr bool operator==(const TimeCode&, const TimeCode&) = default;

  // "HH:MM:SS.mmm"
  std::string to_string() const;

 private:
  double seconds_ = 0.0;
};

struct TimeRange {
  TimeCode start;
  TimeCode end;

  double length() const noexcept { return end.seconds() - start.seconds(); }
  friend bool operator==(const TimeRange&, const TimeRange&) = default;
};

}  // namespace lecsum
