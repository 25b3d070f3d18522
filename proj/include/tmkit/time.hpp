#pragma once

#include <compare>
#include <stdexcept>
#include <string>

#include "tmkit/decimal.hpp"

namespace tmkit {

/// Unanchored signed duration in seconds.
class Interval {
 public:
  constexpr Interval() = default;
  constexpr explicit Interval(Decimal seconds) : seconds_(seconds) {}

  constexpr Decimal seconds() const { return seconds_; }
  std::string to_string() const { return seconds_.to_string(); }

  constexpr Interval operator-() const { return Interval{-seconds_}; }
  friend constexpr Interval operator+(Interval a, Interval b) { return Interval{a.seconds_ + b.seconds_}; }

  friend constexpr auto operator<=>(Interval, Interval) = default;
  friend constexpr bool operator==(Interval, Interval) = default;

 private:
  Decimal seconds_;
};

/// Point on the simulated timeline; never negative.
class Instant {
 public:
  constexpr Instant() = default;
  constexpr explicit Instant(Decimal seconds) : seconds_(seconds) {
    if (seconds < Decimal{}) throw std::invalid_argument("instant must be non-negative");
  }

  constexpr Decimal seconds() const { return seconds_; }
  std::string to_string() const { return seconds_.to_string(); }

  /// Shifts by a duration; the result must stay non-negative.
  friend constexpr Instant operator+(Instant t, Interval d) { return Instant{t.seconds_ + d.seconds()}; }

  friend constexpr auto operator<=>(Instant, Instant) = default;
  friend constexpr bool operator==(Instant, Instant) = default;

 private:
  Decimal seconds_;
};

/// Anchored span with closed bounds, start <= end.
class Period {
 public:
  constexpr Period(Instant start, Instant end) : start_(start), end_(end) {
    if (end < start) throw std::invalid_argument("period end precedes start");
  }

  constexpr Instant start() const { return start_; }
  constexpr Instant end() const { return end_; }

  friend constexpr bool operator==(Period, Period) = default;

 private:
  Instant start_;
  Instant end_;
};

constexpr Interval subtract(Instant a, Instant b) { return Interval{a.seconds() - b.seconds()}; }

constexpr Interval duration(Period p) { return subtract(p.end(), p.start()); }

/// Closed bounds: touching endpoints overlap.
constexpr bool overlaps(Period p, Period q) { return p.start() <= q.end() && q.start() <= p.end(); }

constexpr bool contains(Period p, Instant t) { return p.start() <= t && t <= p.end(); }

}  // namespace tmkit
