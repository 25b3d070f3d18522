#pragma once

// Shared helpers for the unit tests and the acceptance runner: corpus
// loading, a DOT well-formedness checker, and brute-force oracles.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmkit/tmkit.hpp"

namespace support {

inline std::string corpus_path(const std::string& rel) { return std::string(TMKIT_CORPUS_DIR) + "/" + rel; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename T>
T must(tmkit::Parsed<T> p, const std::string& what) {
  if (!p.ok()) {
    std::string msg = what + " failed to parse:";
    for (const auto& d : p.errors()) msg += "\n  " + tmkit::format_diagnostic(d);
    throw std::runtime_error(msg);
  }
  return std::move(p).value();
}

/// A model with its event layer and behavior graph, parsed from the corpus.
struct Bundle {
  tmkit::StaticModel model;
  tmkit::EventLayer layer;
  tmkit::BehaviorGraph graph;

  tmkit::Scenario scenario(const std::string& text, const std::string& file = "<scenario>") const {
    return must(tmkit::dsl::parse_scenario(text, model, file), file);
  }
  tmkit::Scenario scenario_file(const std::string& rel) const {
    return scenario(read_text(corpus_path(rel)), rel);
  }
  tmkit::MonitorSpec monitor_file(const std::string& rel) const {
    return must(tmkit::dsl::parse_monitor(read_text(corpus_path(rel)), layer, rel), rel);
  }
};

/// Loads corpus/<name>/<name>.{tm,tme,tmb}.
inline Bundle load_bundle(const std::string& name) {
  const auto base = name + "/" + name;
  Bundle b;
  b.model = must(tmkit::dsl::parse_model(read_text(corpus_path(base + ".tm")), base + ".tm"), base + ".tm");
  b.layer = must(tmkit::dsl::parse_events(read_text(corpus_path(base + ".tme")), b.model, base + ".tme"),
                 base + ".tme");
  b.graph = must(
      tmkit::dsl::parse_behavior(read_text(corpus_path(base + ".tmb")), b.layer, b.model, base + ".tmb"),
      base + ".tmb");
  return b;
}

inline std::vector<std::string> event_sequence(const tmkit::Trace& t) {
  std::vector<std::string> out;
  for (const auto& o : t.occurrences) out.push_back(o.event);
  return out;
}

inline tmkit::Decimal dec(const std::string& s) {
  auto d = tmkit::Decimal::parse(s);
  if (!d) throw std::invalid_argument("bad decimal " + s);
  return *d;
}

inline tmkit::Instant at(const std::string& s) { return tmkit::Instant{dec(s)}; }

/// Runs `cmd` through the shell and returns its exit status.
inline int shell(const std::string& cmd) {
  int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

// ---------------------------------------------------------------------------
// DOT checking

struct DotSummary {
  bool well_formed = false;
  std::string error;
  std::size_t nodes = 0;         // node statements
  std::size_t edges = 0;         // edge statements
  std::size_t dashed_edges = 0;
  std::size_t clusters = 0;
  std::size_t filled_nodes = 0;
  std::set<std::string> fill_colors;
  std::vector<std::string> node_ids;
  std::vector<std::string> filled_ids;
};

/// Tokenizes DOT: quoted strings (with escapes), punctuation, bare words.
inline std::optional<std::vector<std::string>> dot_tokens(const std::string& text, std::string& error) {
  std::vector<std::string> toks;
  for (std::size_t i = 0; i < text.size();) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '"') {
      std::string t = "\"";
      ++i;
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          t += text.substr(i, 2);
          i += 2;
        } else if (text[i] == '"') {
          ++i;
          closed = true;
          break;
        } else {
          t += text[i++];
        }
      }
      if (!closed) {
        error = "unterminated string";
        return std::nullopt;
      }
      toks.push_back(t + "\"");
    } else if (c == '-' && i + 1 < text.size() && text[i + 1] == '>') {
      toks.push_back("->");
      i += 2;
    } else if (std::string("{}[];=,").find(c) != std::string::npos) {
      toks.push_back(std::string(1, c));
      ++i;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '#') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                                 text[j] == '.' || text[j] == '#')) {
        ++j;
      }
      toks.push_back(text.substr(i, j - i));
      i = j;
    } else {
      error = std::string("unexpected character '") + c + "'";
      return std::nullopt;
    }
  }
  return toks;
}

/// Parses the statement subset the renderer emits and checks that braces
/// and brackets balance, every statement ends with ';', and every edge
/// endpoint is a declared node.
inline DotSummary summarize_dot(const std::string& text) {
  DotSummary s;
  auto toks = dot_tokens(text, s.error);
  if (!toks) return s;
  const auto& t = *toks;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) {
    s.error = msg + " at token " + std::to_string(i);
    return s;
  };
  auto is_id = [](const std::string& x) { return !x.empty() && std::string("{}[];=,").find(x[0]) == std::string::npos && x != "->"; };

  if (i >= t.size() || t[i] != "digraph") return fail("expected digraph");
  ++i;
  if (i < t.size() && is_id(t[i])) ++i;
  if (i >= t.size() || t[i] != "{") return fail("expected {");
  ++i;
  int depth = 1;
  std::set<std::string> declared;
  std::vector<std::pair<std::string, std::string>> edge_ends;

  auto attrs = [&](std::map<std::string, std::string>& out) -> bool {
    if (i >= t.size() || t[i] != "[") return true;
    ++i;
    while (i < t.size() && t[i] != "]") {
      if (!is_id(t[i])) return false;
      std::string k = t[i++];
      if (i >= t.size() || t[i] != "=") return false;
      ++i;
      if (i >= t.size() || !is_id(t[i])) return false;
      out[k] = t[i++];
      if (i < t.size() && t[i] == ",") ++i;
    }
    if (i >= t.size()) return false;
    ++i;
    return true;
  };

  while (i < t.size() && depth > 0) {
    const std::string& tok = t[i];
    if (tok == "}") {
      --depth;
      ++i;
      continue;
    }
    if (tok == "subgraph") {
      ++i;
      if (i >= t.size() || !is_id(t[i])) return fail("expected subgraph id");
      if (t[i].rfind("\"cluster_", 0) == 0) ++s.clusters;
      ++i;
      if (i >= t.size() || t[i] != "{") return fail("expected { after subgraph");
      ++i;
      ++depth;
      continue;
    }
    if (!is_id(tok)) return fail("expected statement");
    std::string first = tok;
    ++i;
    if (i < t.size() && t[i] == "=") {  // graph attribute
      i += 2;
    } else if (first == "node" || first == "edge" || first == "graph") {
      std::map<std::string, std::string> a;
      if (!attrs(a)) return fail("bad attribute list");
    } else if (i < t.size() && t[i] == "->") {
      ++i;
      if (i >= t.size() || !is_id(t[i])) return fail("expected edge target");
      std::string second = t[i++];
      std::map<std::string, std::string> a;
      if (!attrs(a)) return fail("bad attribute list");
      ++s.edges;
      if (a["style"] == "dashed") ++s.dashed_edges;
      edge_ends.emplace_back(first, second);
    } else {
      std::map<std::string, std::string> a;
      if (!attrs(a)) return fail("bad attribute list");
      ++s.nodes;
      declared.insert(first);
      s.node_ids.push_back(first);
      if (a.count("fillcolor")) {
        ++s.filled_nodes;
        s.fill_colors.insert(a["fillcolor"]);
        s.filled_ids.push_back(first);
      }
    }
    if (i >= t.size() || t[i] != ";") return fail("expected ;");
    ++i;
  }
  if (depth != 0) return fail("unbalanced braces");
  if (i != t.size()) return fail("trailing tokens");
  for (const auto& [a, b] : edge_ends) {
    if (!declared.count(a) || !declared.count(b)) {
      s.error = "edge endpoint not declared: " + a + " -> " + b;
      return s;
    }
  }
  s.well_formed = true;
  return s;
}

// ---------------------------------------------------------------------------
// Random bank scenarios

struct Transaction {
  std::string type;  // deposit | withdraw | transfer
  tmkit::Decimal amount;
  tmkit::Decimal time;
  std::string account;
};

/// Strictly increasing times; amounts in hundredths up to 10000.00.
inline std::vector<Transaction> random_transactions(std::mt19937& rng, std::size_t max_count) {
  static const char* kTypes[] = {"deposit", "withdraw", "transfer"};
  static const char* kAccounts[] = {"A1", "A2", "B7"};
  std::uniform_int_distribution<std::size_t> count(1, max_count);
  std::uniform_int_distribution<int> type(0, 2), account(0, 2);
  std::uniform_int_distribution<std::int64_t> amount(1, 1000000), gap(1, 5000);
  std::vector<Transaction> out;
  std::int64_t t = gap(rng) - 1;
  for (std::size_t n = count(rng); n > 0; --n) {
    out.push_back({kTypes[type(rng)], tmkit::Decimal::from_raw(amount(rng)), tmkit::Decimal::from_raw(t),
                   kAccounts[account(rng)]});
    t += gap(rng);
  }
  return out;
}

inline std::string scenario_text(const std::vector<Transaction>& txs) {
  std::string s = "scenario random for bank {\n";
  for (const auto& tx : txs) {
    s += "  at " + tx.time.to_string() + ": inject Bank.System.transaction_in { type = \"" + tx.type +
         "\", amount = " + tx.amount.to_string() + ", account = \"" + tx.account + "\" }\n";
  }
  return s + "}\n";
}

/// Independent balance oracle: a signed sum of the transaction amounts.
inline tmkit::Decimal signed_sum(const std::vector<Transaction>& txs) {
  std::int64_t total = 0;
  for (const auto& tx : txs) total += tx.type == "deposit" ? tx.amount.raw() : -tx.amount.raw();
  return tmkit::Decimal::from_raw(total);
}

// ---------------------------------------------------------------------------
// Temporal query oracles: linear scans over the full record sequence, written
// without the store's per-key index.

inline std::optional<tmkit::TemporalRecord> oracle_as_of(const std::vector<tmkit::TemporalRecord>& all,
                                                         const std::string& key, tmkit::Instant t) {
  std::vector<tmkit::TemporalRecord> valid;
  for (const auto& r : all) {
    if (r.key == key && r.valid_start <= t) valid.push_back(r);
  }
  if (valid.empty()) return std::nullopt;
  std::stable_sort(valid.begin(), valid.end(),
                   [](const auto& a, const auto& b) { return a.valid_start < b.valid_start; });
  return valid.back();
}

inline std::vector<tmkit::TemporalRecord> oracle_history(const std::vector<tmkit::TemporalRecord>& all,
                                                         const std::string& key) {
  std::vector<tmkit::TemporalRecord> out;
  std::copy_if(all.begin(), all.end(), std::back_inserter(out), [&](const auto& r) { return r.key == key; });
  return out;
}

inline std::vector<tmkit::TemporalRecord> oracle_as_known_at(const std::vector<tmkit::TemporalRecord>& all,
                                                             const std::string& key, std::int64_t txn) {
  std::vector<tmkit::TemporalRecord> out;
  for (const auto& r : all) {
    if (r.key == key && static_cast<std::int64_t>(r.txn_seq) <= txn) out.push_back(r);
  }
  return out;
}

/// Checks as_of, history and as_known_at against the oracles for every key
/// (plus one absent key) at every valid_start, midpoints and the extremes.
/// Returns a description of the first mismatch, or an empty string.
inline std::string compare_with_oracle(const tmkit::TemporalStore& store) {
  const auto& all = store.records();
  std::set<std::string> keys;
  std::set<std::int64_t> times = {0};
  for (const auto& r : all) {
    keys.insert(r.key);
    times.insert(r.valid_start.seconds().raw());
    times.insert(r.valid_start.seconds().raw() + 1);
    if (r.valid_start.seconds().raw() > 0) times.insert(r.valid_start.seconds().raw() - 1);
  }
  keys.insert("no-such-key");
  for (const auto& key : keys) {
    for (auto raw : times) {
      tmkit::Instant t{tmkit::Decimal::from_raw(raw)};
      if (store.as_of(key, t) != oracle_as_of(all, key, t)) {
        return "as_of(" + key + ", " + t.to_string() + ")";
      }
    }
    if (store.history(key) != oracle_history(all, key)) return "history(" + key + ")";
    for (std::int64_t txn = -1; txn <= static_cast<std::int64_t>(all.size()); ++txn) {
      if (store.as_known_at(key, txn) != oracle_as_known_at(all, key, txn)) {
        return "as_known_at(" + key + ", " + std::to_string(txn) + ")";
      }
    }
  }
  return {};
}

}  // namespace support
