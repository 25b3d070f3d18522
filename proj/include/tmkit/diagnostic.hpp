#pragma once

#include <algorithm>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

namespace tmkit {

struct SourcePos {
  std::string file;
  int line = 1;
  int column = 1;

  friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// Source location attached to parsed entities. Positions are metadata: two
/// origins always compare equal so structural equality ignores where a value
/// came from.
struct Origin {
  SourcePos pos;

  friend bool operator==(const Origin&, const Origin&) { return true; }
};

enum class Severity { error, warning };

/// Stable diagnostic codes.
///   E001 lexical error             E002 syntax error
///   E010 duplicate name            E011 unresolved reference
///   E012 assignment on a stage that is not create/process
///   E013 `into` target is not a store
///   E014 for-clause names a different model
///   E015 store initial value does not match its kind
///   E020 unknown event in refines  E021 region ref is not a model stage
///   E022 empty region              E023 negative `lasts` duration
///   E024 payload ref is not a store
///   E025 duplicate event id        E026 duplicate payload name
///   E030 unknown event             E031 non-positive timer
///   E032 no start declaration      E033 duplicate start binding
///   E034 start target is not a stage
///   E040 inject target is not a transfer stage
///   E041 negative stimulus time    E042 duplicate stimulus field
///   E050 illegal flow kinds        E051 intra-machine trigger
///   E052 illegal store write       E053 trigger endpoint is not a stage
///   W060 stage with no incident arcs
///   W061 event region not weakly connected
///   E062 refinement cycle
///   W070 stage not covered by any event region
///   E090 monitor names unknown event
///   E091 malformed key template    E092 monitor file has no monitors
///   E093 key/capture names a field the event does not capture
///   W080 no successor enabled      W081 stimulus target has no start binding
///   R100 occurrence limit exceeded R101 evaluation failure
///   T200 key template or capture references a missing payload field
struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  SourcePos pos;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline Diagnostic make_error(std::string code, std::string message, SourcePos pos) {
  return {Severity::error, std::move(code), std::move(message), std::move(pos)};
}

inline Diagnostic make_warning(std::string code, std::string message, SourcePos pos) {
  return {Severity::warning, std::move(code), std::move(message), std::move(pos)};
}

inline bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::error; });
}

/// Orders by file, line, column, then code and message so output is stable.
inline void sort_diagnostics(std::vector<Diagnostic>& diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return std::tie(a.pos.file, a.pos.line, a.pos.column, a.code, a.message) <
           std::tie(b.pos.file, b.pos.line, b.pos.column, b.code, b.message);
  });
}

/// "file:line:col: severity CODE message"
inline std::string format_diagnostic(const Diagnostic& d) {
  std::string out = d.pos.file + ":" + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": ";
  out += d.severity == Severity::error ? "error " : "warning ";
  out += d.code + " " + d.message;
  return out;
}

inline std::ostream& operator<<(std::ostream& os, const Diagnostic& d) { return os << format_diagnostic(d); }

/// Result of a parse: a value, or at least one error diagnostic. Never both.
template <typename T>
class Parsed {
 public:
  Parsed(T value) : value_(std::move(value)) {}
  Parsed(std::vector<Diagnostic> errors) : errors_(std::move(errors)) {
    if (errors_.empty()) throw std::logic_error("Parsed without value needs at least one diagnostic");
    sort_diagnostics(errors_);
  }

  bool ok() const { return value_.has_value(); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!value_) throw std::logic_error("Parsed has no value: " + format_diagnostic(errors_.front()));
    return *value_;
  }
  T&& value() && {
    if (!value_) throw std::logic_error("Parsed has no value: " + format_diagnostic(errors_.front()));
    return std::move(*value_);
  }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const std::vector<Diagnostic>& errors() const { return errors_; }

 private:
  std::optional<T> value_;
  std::vector<Diagnostic> errors_;
};

/// Runtime failure during simulation or monitoring (R1xx, T2xx).
class RunError : public std::runtime_error {
 public:
  RunError(std::string code, const std::string& message, std::optional<SourcePos> pos = std::nullopt)
      : std::runtime_error(message), code_(std::move(code)), pos_(std::move(pos)) {}

  const std::string& code() const { return code_; }
  const std::optional<SourcePos>& pos() const { return pos_; }

  std::string describe() const {
    std::string out;
    if (pos_) out = pos_->file + ":" + std::to_string(pos_->line) + ":" + std::to_string(pos_->column) + ": ";
    return out + "error " + code_ + " " + what();
  }

 private:
  std::string code_;
  std::optional<SourcePos> pos_;
};

}  // namespace tmkit
