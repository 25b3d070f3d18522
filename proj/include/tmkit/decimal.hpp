#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tmkit {

/// Exact fixed-point number with two fractional digits, stored as a count of
/// hundredths. All arithmetic is exact; overflow throws std::overflow_error.
class Decimal {
 public:
  static constexpr std::int64_t kScale = 100;

  constexpr Decimal() = default;

  static constexpr Decimal from_units(std::int64_t whole) {
    std::int64_t raw = 0;
    if (__builtin_mul_overflow(whole, kScale, &raw)) {
      throw std::overflow_error("decimal overflow");
    }
    return from_raw(raw);
  }

  static constexpr Decimal from_raw(std::int64_t hundredths) {
    Decimal d;
    d.raw_ = hundredths;
    return d;
  }

  /// Parses `[-]digits[.d[d]]`. Rejects more than two fractional digits,
  /// empty digit runs and out-of-range values.
  static std::optional<Decimal> parse(std::string_view text) {
    bool negative = false;
    if (!text.empty() && text.front() == '-') {
      negative = true;
      text.remove_prefix(1);
    }
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    if (whole.empty() || (dot != std::string_view::npos && frac.empty()) || frac.size() > 2) {
      return std::nullopt;
    }
    for (char c : whole) {
      if (c < '0' || c > '9') return std::nullopt;
    }
    for (char c : frac) {
      if (c < '0' || c > '9') return std::nullopt;
    }
    std::int64_t units = 0;
    auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), units);
    if (ec != std::errc{} || ptr != whole.data() + whole.size()) return std::nullopt;
    std::int64_t cents = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      cents = cents * 10 + (i < frac.size() ? frac[i] - '0' : 0);
    }
    std::int64_t raw = 0;
    if (__builtin_mul_overflow(units, kScale, &raw) || __builtin_add_overflow(raw, cents, &raw)) {
      return std::nullopt;
    }
    return from_raw(negative ? -raw : raw);
  }

  constexpr std::int64_t raw() const { return raw_; }

  /// Always two fractional digits: "100.00", "-0.30".
  std::string to_string() const {
    std::uint64_t mag = raw_ < 0 ? 0 - static_cast<std::uint64_t>(raw_) : static_cast<std::uint64_t>(raw_);
    std::string out = raw_ < 0 ? "-" : "";
    out += std::to_string(mag / kScale);
    out += '.';
    auto cents = mag % kScale;
    out += static_cast<char>('0' + cents / 10);
    out += static_cast<char>('0' + cents % 10);
    return out;
  }

  /// Shortest exact form: "120", "0.5", "-2.25".
  std::string to_compact_string() const {
    std::string s = to_string();
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
    return s;
  }

  constexpr Decimal operator-() const {
    if (raw_ == INT64_MIN) throw std::overflow_error("decimal overflow");
    return from_raw(-raw_);
  }

  friend constexpr Decimal operator+(Decimal a, Decimal b) {
    std::int64_t r = 0;
    if (__builtin_add_overflow(a.raw_, b.raw_, &r)) throw std::overflow_error("decimal overflow");
    return from_raw(r);
  }

  friend constexpr Decimal operator-(Decimal a, Decimal b) {
    std::int64_t r = 0;
    if (__builtin_sub_overflow(a.raw_, b.raw_, &r)) throw std::overflow_error("decimal overflow");
    return from_raw(r);
  }

  Decimal& operator+=(Decimal o) { return *this = *this + o; }
  Decimal& operator-=(Decimal o) { return *this = *this - o; }

  friend constexpr auto operator<=>(Decimal, Decimal) = default;
  friend constexpr bool operator==(Decimal, Decimal) = default;

 private:
  std::int64_t raw_ = 0;
};

}  // namespace tmkit
