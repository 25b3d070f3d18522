#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "tmkit/dynamics.hpp"
#include "tmkit/io.hpp"
#include "tmkit/time.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Key templates: literal text with `{field}` placeholders, e.g. "{account}.balance".

struct TemplateField {
  std::string name;
  friend bool operator==(const TemplateField&, const TemplateField&) = default;
};

using TemplatePart = std::variant<std::string, TemplateField>;

/// nullopt when a brace is unbalanced or a placeholder is not an identifier.
inline std::optional<std::vector<TemplatePart>> parse_key_template(std::string_view text) {
  std::vector<TemplatePart> parts;
  std::string literal;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '}') return std::nullopt;
    if (c != '{') {
      literal += c;
      continue;
    }
    auto close = text.find('}', i + 1);
    if (close == std::string_view::npos) return std::nullopt;
    auto name = text.substr(i + 1, close - i - 1);
    if (!is_identifier(name)) return std::nullopt;
    if (!literal.empty()) parts.emplace_back(std::move(literal));
    literal.clear();
    parts.emplace_back(TemplateField{std::string(name)});
    i = close;
  }
  if (!literal.empty()) parts.emplace_back(std::move(literal));
  return parts;
}

inline std::vector<std::string> template_fields(const std::vector<TemplatePart>& parts) {
  std::vector<std::string> out;
  for (const auto& p : parts) {
    if (auto* f = std::get_if<TemplateField>(&p)) out.push_back(f->name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Monitor specifications

struct MonitorSelection {
  std::string key_template;
  std::vector<std::string> events;
  std::vector<std::string> captures;
  Origin origin;

  friend bool operator==(const MonitorSelection&, const MonitorSelection&) = default;
};

/// `all` records every occurrence; `selective` records only the listed events.
struct MonitorSpec {
  enum class Mode { all, selective };

  Mode mode = Mode::all;
  std::vector<MonitorSelection> selections;
  Origin origin;

  static MonitorSpec monitor_all() { return {}; }

  friend bool operator==(const MonitorSpec&, const MonitorSpec&) = default;
};

// ---------------------------------------------------------------------------
// Records and the store

/// Bitemporal record: valid time from the occurrence, transaction time as the
/// append position.
struct TemporalRecord {
  std::size_t txn_seq = 0;
  std::string key;
  std::string event;
  Instant valid_start;
  Instant valid_end;
  Interval duration;
  FieldMap payload;

  friend bool operator==(const TemporalRecord&, const TemporalRecord&) = default;
};

namespace detail {

/// Payload field, or the occurrence urgency under the name "urgency".
inline std::optional<Literal> monitor_field(const Occurrence& occ, const std::string& name) {
  if (const Literal* v = find_field(occ.payload, name)) return *v;
  if (name == "urgency" && occ.urgency) return Literal{*occ.urgency};
  return std::nullopt;
}

inline std::string literal_text(const Literal& v) {
  if (auto* d = std::get_if<Decimal>(&v)) return d->to_string();
  return std::get<std::string>(v);
}

}  // namespace detail

/// Meta-event: the records an occurrence generates under `spec`. Records carry
/// txn_seq 0 until appended. Throws RunError T200 when a key template or
/// capture names a field the occurrence lacks.
inline std::vector<TemporalRecord> meta_record(const Occurrence& occ, const MonitorSpec& spec) {
  auto base = [&occ] {
    TemporalRecord r;
    r.event = occ.event;
    r.valid_start = occ.valid_start;
    r.valid_end = occ.valid_end;
    r.duration = subtract(occ.valid_end, occ.valid_start);
    return r;
  };

  std::vector<TemporalRecord> out;
  if (spec.mode == MonitorSpec::Mode::all) {
    auto r = base();
    r.key = occ.event;
    r.payload = occ.payload;
    if (occ.urgency && !find_field(r.payload, "urgency")) r.payload.emplace_back("urgency", *occ.urgency);
    out.push_back(std::move(r));
    return out;
  }

  for (const auto& sel : spec.selections) {
    if (std::find(sel.events.begin(), sel.events.end(), occ.event) == sel.events.end()) continue;
    auto parts = parse_key_template(sel.key_template);
    if (!parts) throw RunError("T200", "malformed key template " + quote(sel.key_template), sel.origin.pos);
    auto r = base();
    for (const auto& p : *parts) {
      if (auto* text = std::get_if<std::string>(&p)) {
        r.key += *text;
        continue;
      }
      const auto& name = std::get<TemplateField>(p).name;
      auto v = detail::monitor_field(occ, name);
      if (!v) {
        throw RunError("T200", "key template field {" + name + "} missing from " + occ.event + " payload",
                       sel.origin.pos);
      }
      r.key += detail::literal_text(*v);
    }
    for (const auto& name : sel.captures) {
      auto v = detail::monitor_field(occ, name);
      if (!v) throw RunError("T200", "capture " + name + " missing from " + occ.event + " payload", sel.origin.pos);
      r.payload.emplace_back(name, *v);
    }
    out.push_back(std::move(r));
  }
  return out;
}

/// Append-only sequence of records; txn_seq equals the position.
class TemporalStore {
 public:
  /// Stamps the transaction sequence and appends.
  const TemporalRecord& append(TemporalRecord record) {
    record.txn_seq = records_.size();
    by_key_[record.key].push_back(records_.size());
    records_.push_back(std::move(record));
    return records_.back();
  }

  const std::vector<TemporalRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  /// Distinct keys in lexicographic order.
  std::vector<std::string> keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : by_key_) out.push_back(k);
    return out;
  }

  /// Latest record for `key` whose valid_start <= t. Among equal valid_starts
  /// the later append wins.
  std::optional<TemporalRecord> as_of(const std::string& key, Instant t) const {
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return std::nullopt;
    const TemporalRecord* best = nullptr;
    for (std::size_t i : it->second) {
      const auto& r = records_[i];
      if (r.valid_start <= t && (!best || best->valid_start <= r.valid_start)) best = &r;
    }
    if (!best) return std::nullopt;
    return *best;
  }

  std::vector<TemporalRecord> history(const std::string& key) const {
    std::vector<TemporalRecord> out;
    auto it = by_key_.find(key);
    if (it == by_key_.end()) return out;
    for (std::size_t i : it->second) out.push_back(records_[i]);
    return out;
  }

  /// Records for `key` appended at or before transaction `txn`.
  std::vector<TemporalRecord> as_known_at(const std::string& key, std::int64_t txn) const {
    std::vector<TemporalRecord> out;
    auto it = by_key_.find(key);
    if (it == by_key_.end() || txn < 0) return out;
    for (std::size_t i : it->second) {
      if (static_cast<std::int64_t>(i) > txn) break;
      out.push_back(records_[i]);
    }
    return out;
  }

  /// as_of over every distinct key, in key order.
  std::vector<TemporalRecord> snapshot(Instant t) const {
    std::vector<TemporalRecord> out;
    for (const auto& [k, _] : by_key_) {
      if (auto r = as_of(k, t)) out.push_back(std::move(*r));
    }
    return out;
  }

 private:
  std::vector<TemporalRecord> records_;
  std::map<std::string, std::vector<std::size_t>> by_key_;
};

inline std::optional<TemporalRecord> as_of(const TemporalStore& store, const std::string& key, Instant t) {
  return store.as_of(key, t);
}

inline std::vector<TemporalRecord> history(const TemporalStore& store, const std::string& key) {
  return store.history(key);
}

inline std::vector<TemporalRecord> as_known_at(const TemporalStore& store, const std::string& key,
                                               std::int64_t txn) {
  return store.as_known_at(key, txn);
}

// ---------------------------------------------------------------------------
// Record file: one JSON object per line, fields in fixed order
// (txn, key, event, valid_start, valid_end, duration, payload).

inline std::string format_record(const TemporalRecord& r) {
  std::string out = "{\"txn\":" + std::to_string(r.txn_seq);
  out += ",\"key\":" + io::json_string(r.key);
  out += ",\"event\":" + io::json_string(r.event);
  out += ",\"valid_start\":" + r.valid_start.to_string();
  out += ",\"valid_end\":" + r.valid_end.to_string();
  out += ",\"duration\":" + r.duration.to_string();
  out += ",\"payload\":" + io::json_fields(r.payload);
  return out + "}";
}

inline void write_records(std::ostream& os, const std::vector<TemporalRecord>& records) {
  for (const auto& r : records) os << format_record(r) << '\n';
}

inline void write_records(std::ostream& os, const TemporalStore& store) { write_records(os, store.records()); }

inline TemporalRecord parse_record(const std::string& line) {
  auto j = nlohmann::ordered_json::parse(line);
  TemporalRecord r;
  r.txn_seq = j.at("txn").get<std::size_t>();
  r.key = j.at("key").get<std::string>();
  r.event = j.at("event").get<std::string>();
  r.valid_start = Instant{io::decimal_from_json(j.at("valid_start"))};
  r.valid_end = Instant{io::decimal_from_json(j.at("valid_end"))};
  r.duration = Interval{io::decimal_from_json(j.at("duration"))};
  r.payload = io::fields_from_json(j.at("payload"));
  return r;
}

/// Throws std::runtime_error naming the line on malformed input or when
/// txn numbers are not 0..N-1 in order.
inline TemporalStore read_records(std::istream& is) {
  TemporalStore store;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    TemporalRecord r;
    try {
      r = parse_record(line);
    } catch (const std::exception& e) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": malformed record: " + e.what());
    }
    if (r.txn_seq != store.size()) {
      throw std::runtime_error("line " + std::to_string(lineno) + ": expected txn " + std::to_string(store.size()) +
                               ", found " + std::to_string(r.txn_seq));
    }
    store.append(std::move(r));
  }
  return store;
}

}  // namespace tmkit
