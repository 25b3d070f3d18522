#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tmkit/core.hpp"
#include "tmkit/eval.hpp"

namespace tmkit::io {

// Line-record helpers. Records are single-line JSON objects whose numbers
// are always written with exactly two decimals.

inline std::string json_string(const std::string& s) { return nlohmann::ordered_json(s).dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::replace); }

inline std::string json_literal(const Literal& v) {
  if (auto* d = std::get_if<Decimal>(&v)) return d->to_string();
  return json_string(std::get<std::string>(v));
}

inline std::string json_fields(const FieldMap& fields) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : fields) {
    if (!first) out += ',';
    first = false;
    out += json_string(k) + ":" + json_literal(v);
  }
  return out + "}";
}

/// Doubles round-trip two-decimal values exactly below this magnitude.
inline constexpr double kExactDoubleLimit = 9.0e13;

inline Decimal decimal_from_json(const nlohmann::ordered_json& j) {
  if (j.is_number_integer()) return Decimal::from_units(j.get<std::int64_t>());
  if (!j.is_number_float()) throw std::runtime_error("expected a number");
  double d = j.get<double>();
  if (!(std::fabs(d) < kExactDoubleLimit)) throw std::runtime_error("number out of exact range");
  return Decimal::from_raw(std::llround(d * 100.0));
}

inline Literal literal_from_json(const nlohmann::ordered_json& j) {
  if (j.is_string()) return j.get<std::string>();
  return decimal_from_json(j);
}

inline FieldMap fields_from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object()) throw std::runtime_error("expected an object");
  FieldMap out;
  for (auto it = j.begin(); it != j.end(); ++it) out.emplace_back(it.key(), literal_from_json(it.value()));
  return out;
}

}  // namespace tmkit::io
