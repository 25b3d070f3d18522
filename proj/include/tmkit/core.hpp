#pragma once

#include <array>
#include <cctype>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tmkit/decimal.hpp"
#include "tmkit/diagnostic.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Stage kinds

/// The five machine actions. `receive` is arrive and accept combined.
enum class StageKind { create, process, release, transfer, receive };

inline constexpr std::array<StageKind, 5> kAllStageKinds = {
    StageKind::create, StageKind::process, StageKind::release, StageKind::transfer, StageKind::receive};

inline std::string_view to_string(StageKind kind) {
  switch (kind) {
    case StageKind::create: return "create";
    case StageKind::process: return "process";
    case StageKind::release: return "release";
    case StageKind::transfer: return "transfer";
    case StageKind::receive: return "receive";
  }
  return "?";
}

inline std::optional<StageKind> parse_stage_kind(std::string_view word) {
  for (auto k : kAllStageKinds) {
    if (to_string(k) == word) return k;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// References

/// Letter, then letters, digits or underscores.
inline bool is_identifier(std::string_view s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s.front()))) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return true;
}

/// Dot-joined path from the model root, e.g. Bank.Deposit.create_new.
struct QualifiedRef {
  std::vector<std::string> segments;

  QualifiedRef() = default;
  QualifiedRef(std::vector<std::string> segs) : segments(std::move(segs)) {}
  QualifiedRef(std::initializer_list<std::string> segs) : segments(segs) {}

  /// Splits on '.'; nullopt unless every segment is an identifier.
  static std::optional<QualifiedRef> parse(std::string_view text) {
    QualifiedRef ref;
    std::size_t start = 0;
    while (true) {
      auto dot = text.find('.', start);
      auto seg = text.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
      if (!is_identifier(seg)) return std::nullopt;
      ref.segments.emplace_back(seg);
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return ref;
  }

  bool empty() const { return segments.empty(); }

  QualifiedRef parent() const {
    QualifiedRef p = *this;
    if (!p.segments.empty()) p.segments.pop_back();
    return p;
  }

  QualifiedRef child(std::string name) const {
    QualifiedRef c = *this;
    c.segments.push_back(std::move(name));
    return c;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& s : segments) {
      if (!out.empty()) out += '.';
      out += s;
    }
    return out;
  }

  friend auto operator<=>(const QualifiedRef&, const QualifiedRef&) = default;
  friend bool operator==(const QualifiedRef&, const QualifiedRef&) = default;
};

// ---------------------------------------------------------------------------
// Values and expressions

using Literal = std::variant<Decimal, std::string>;
using Value = std::variant<Decimal, std::string, bool>;

enum class ValueKind { number, text, boolean };

inline ValueKind kind_of(const Value& v) { return static_cast<ValueKind>(v.index()); }
inline ValueKind kind_of(const Literal& v) { return static_cast<ValueKind>(v.index()); }

inline std::string_view to_string(ValueKind k) {
  switch (k) {
    case ValueKind::number: return "number";
    case ValueKind::text: return "text";
    case ValueKind::boolean: return "boolean";
  }
  return "?";
}

inline Value to_value(const Literal& lit) {
  if (auto* d = std::get_if<Decimal>(&lit)) return *d;
  return std::get<std::string>(lit);
}

/// Quoted with backslash escapes for '"', '\\' and newlines.
inline std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

inline std::string to_display(const Value& v) {
  if (auto* d = std::get_if<Decimal>(&v)) return d->to_string();
  if (auto* s = std::get_if<std::string>(&v)) return quote(*s);
  return std::get<bool>(v) ? "true" : "false";
}

inline std::string to_display(const Literal& v) { return to_display(to_value(v)); }

enum class BinaryOp { add, sub, eq, ne, lt, le, gt, ge, logical_and, logical_or };

inline std::string_view to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::eq: return "==";
    case BinaryOp::ne: return "!=";
    case BinaryOp::lt: return "<";
    case BinaryOp::le: return "<=";
    case BinaryOp::gt: return ">";
    case BinaryOp::ge: return ">=";
    case BinaryOp::logical_and: return "and";
    case BinaryOp::logical_or: return "or";
  }
  return "?";
}

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression tree. Store references are fully qualified once a
/// model has been parsed; `$name` fields are looked up at evaluation time.
struct Expr {
  enum class Kind { literal, store_ref, field, binary };

  Kind kind = Kind::literal;
  Literal literal;
  QualifiedRef ref;
  std::string field;
  BinaryOp op = BinaryOp::add;
  ExprPtr lhs;
  ExprPtr rhs;
  Origin origin;

  static ExprPtr make_literal(Literal value, SourcePos pos = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::literal;
    e->literal = std::move(value);
    e->origin.pos = std::move(pos);
    return e;
  }
  static ExprPtr make_store_ref(QualifiedRef ref, SourcePos pos = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::store_ref;
    e->ref = std::move(ref);
    e->origin.pos = std::move(pos);
    return e;
  }
  static ExprPtr make_field(std::string name, SourcePos pos = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::field;
    e->field = std::move(name);
    e->origin.pos = std::move(pos);
    return e;
  }
  static ExprPtr make_binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourcePos pos = {}) {
    auto e = std::make_shared<Expr>();
    e->kind = Kind::binary;
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    e->origin.pos = std::move(pos);
    return e;
  }
};

inline bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::literal: return a->literal == b->literal;
    case Expr::Kind::store_ref: return a->ref == b->ref;
    case Expr::Kind::field: return a->field == b->field;
    case Expr::Kind::binary: return a->op == b->op && same_expr(a->lhs, b->lhs) && same_expr(a->rhs, b->rhs);
  }
  return false;
}

/// Canonical source text. Nested binary operands are parenthesised so the
/// text reparses to the same tree.
inline std::string to_source(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::literal:
      if (auto* d = std::get_if<Decimal>(&e.literal)) return d->to_compact_string();
      return quote(std::get<std::string>(e.literal));
    case Expr::Kind::store_ref: return e.ref.to_string();
    case Expr::Kind::field: return "$" + e.field;
    case Expr::Kind::binary: {
      auto side = [](const Expr& x) {
        return x.kind == Expr::Kind::binary ? "(" + to_source(x) + ")" : to_source(x);
      };
      return side(*e.lhs) + " " + std::string(to_string(e.op)) + " " + side(*e.rhs);
    }
  }
  return {};
}

/// Visits every store reference in the tree.
inline void for_each_store_ref(const Expr& e, const std::function<void(const Expr&)>& fn) {
  if (e.kind == Expr::Kind::store_ref) fn(e);
  if (e.lhs) for_each_store_ref(*e.lhs, fn);
  if (e.rhs) for_each_store_ref(*e.rhs, fn);
}

// ---------------------------------------------------------------------------
// Static model

/// Computation housed by a create or process stage. The assignment carries the
/// stage's name; `into` names the store that receives the result.
struct Assignment {
  ExprPtr expr;
  std::optional<QualifiedRef> into;
  Origin into_origin;

  friend bool operator==(const Assignment& a, const Assignment& b) {
    return same_expr(a.expr, b.expr) && a.into == b.into;
  }
};

struct Stage {
  std::string name;
  StageKind kind = StageKind::process;
  std::optional<Assignment> assignment;
  std::optional<std::string> label;
  Origin origin;

  friend bool operator==(const Stage&, const Stage&) = default;
};

enum class StoreKind { number, text };

inline std::string_view to_string(StoreKind k) { return k == StoreKind::number ? "number" : "text"; }

inline bool literal_matches(StoreKind k, const Literal& lit) {
  return (k == StoreKind::number) == std::holds_alternative<Decimal>(lit);
}

struct Store {
  std::string name;
  StoreKind value_kind = StoreKind::number;
  Literal initial = Decimal{};
  Origin origin;

  friend bool operator==(const Store&, const Store&) = default;
};

struct Thimac {
  std::string name;
  std::vector<Thimac> children;
  std::vector<Stage> stages;
  std::vector<Store> stores;
  Origin origin;

  friend bool operator==(const Thimac&, const Thimac&) = default;
};

struct Flow {
  QualifiedRef from;
  QualifiedRef to;
  Origin origin;

  friend bool operator==(const Flow&, const Flow&) = default;
};

/// Dashed-arrow activation between stages of different machines.
struct Trigger {
  QualifiedRef from;
  QualifiedRef to;
  Origin origin;

  friend bool operator==(const Trigger&, const Trigger&) = default;
};

struct StaticModel {
  std::string name;
  std::vector<Thimac> roots;
  std::vector<Flow> flows;
  std::vector<Trigger> triggers;
  Origin origin;

  friend bool operator==(const StaticModel&, const StaticModel&) = default;
};

// ---------------------------------------------------------------------------
// Resolution

enum class EntityKind { thimac, stage, store };

inline std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::thimac: return "thimac";
    case EntityKind::stage: return "stage";
    case EntityKind::store: return "store";
  }
  return "?";
}

/// Points into the model it was resolved against; valid while the model lives.
struct Resolution {
  EntityKind kind = EntityKind::thimac;
  QualifiedRef path;
  const Thimac* thimac = nullptr;  // the entity itself when kind == thimac
  const Stage* stage = nullptr;
  const Store* store = nullptr;
  const Thimac* owner = nullptr;  // enclosing thimac; null for roots
};

/// The unique entity at `ref`, or nullopt when nothing lives there.
inline std::optional<Resolution> resolve(const StaticModel& model, const QualifiedRef& ref) {
  if (ref.empty()) return std::nullopt;
  const Thimac* current = nullptr;
  for (const auto& r : model.roots) {
    if (r.name == ref.segments[0]) current = &r;
  }
  if (!current) return std::nullopt;
  const Thimac* owner = nullptr;
  for (std::size_t i = 1; i < ref.segments.size(); ++i) {
    const auto& seg = ref.segments[i];
    const bool last = i + 1 == ref.segments.size();
    if (last) {
      for (const auto& s : current->stages) {
        if (s.name == seg) return Resolution{EntityKind::stage, ref, nullptr, &s, nullptr, current};
      }
      for (const auto& s : current->stores) {
        if (s.name == seg) return Resolution{EntityKind::store, ref, nullptr, nullptr, &s, current};
      }
    }
    const Thimac* next = nullptr;
    for (const auto& c : current->children) {
      if (c.name == seg) next = &c;
    }
    if (!next) return std::nullopt;
    owner = current;
    current = next;
  }
  return Resolution{EntityKind::thimac, ref, current, nullptr, nullptr, owner};
}

/// Lexically scoped lookup: tries `scope + ref`, then each enclosing scope,
/// then `ref` from the root. Returns the first path that resolves.
inline std::optional<QualifiedRef> resolve_scoped(const StaticModel& model, const QualifiedRef& scope,
                                                  const QualifiedRef& ref) {
  QualifiedRef base = scope;
  while (true) {
    QualifiedRef candidate = base;
    candidate.segments.insert(candidate.segments.end(), ref.segments.begin(), ref.segments.end());
    if (resolve(model, candidate)) return candidate;
    if (base.empty()) return std::nullopt;
    base = base.parent();
  }
}

/// Every thimac, stage and store in walk order: a thimac, then its stages,
/// then its stores, then its children.
struct ModelEntity {
  EntityKind kind;
  QualifiedRef path;
  const Thimac* thimac = nullptr;
  const Stage* stage = nullptr;
  const Store* store = nullptr;
};

inline void walk_thimac(const Thimac& t, const QualifiedRef& path, std::vector<ModelEntity>& out) {
  out.push_back({EntityKind::thimac, path, &t, nullptr, nullptr});
  for (const auto& s : t.stages) out.push_back({EntityKind::stage, path.child(s.name), nullptr, &s, nullptr});
  for (const auto& s : t.stores) out.push_back({EntityKind::store, path.child(s.name), nullptr, nullptr, &s});
  for (const auto& c : t.children) walk_thimac(c, path.child(c.name), out);
}

inline std::vector<ModelEntity> walk(const StaticModel& model) {
  std::vector<ModelEntity> out;
  for (const auto& r : model.roots) walk_thimac(r, QualifiedRef{r.name}, out);
  return out;
}

inline std::vector<ModelEntity> stages_of(const StaticModel& model) {
  std::vector<ModelEntity> out;
  for (auto& e : walk(model)) {
    if (e.kind == EntityKind::stage) out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ModelEntity> stores_of(const StaticModel& model) {
  std::vector<ModelEntity> out;
  for (auto& e : walk(model)) {
    if (e.kind == EntityKind::store) out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stage graph

enum class ArcKind { flow, trigger };

struct StageArc {
  std::size_t from = 0;
  std::size_t to = 0;
  ArcKind kind = ArcKind::flow;

  friend bool operator==(const StageArc&, const StageArc&) = default;
};

struct StoreWrite {
  std::size_t from = 0;
  QualifiedRef store;

  friend bool operator==(const StoreWrite&, const StoreWrite&) = default;
};

/// Directed graph over stages (walk order). Flows into stores are kept apart
/// as store writes.
struct StageGraph {
  std::vector<QualifiedRef> nodes;
  std::vector<StageArc> arcs;
  std::vector<StoreWrite> store_writes;

  std::optional<std::size_t> index_of(const QualifiedRef& ref) const {
    auto it = index_.find(ref);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  friend bool operator==(const StageGraph& a, const StageGraph& b) {
    return a.nodes == b.nodes && a.arcs == b.arcs && a.store_writes == b.store_writes;
  }

 private:
  std::map<QualifiedRef, std::size_t> index_;
  friend StageGraph stage_graph(const StaticModel&);
};

inline StageGraph stage_graph(const StaticModel& model) {
  StageGraph g;
  for (const auto& e : stages_of(model)) {
    g.index_.emplace(e.path, g.nodes.size());
    g.nodes.push_back(e.path);
  }
  for (const auto& f : model.flows) {
    auto from = g.index_of(f.from);
    if (!from) continue;
    if (auto to = g.index_of(f.to)) {
      g.arcs.push_back({*from, *to, ArcKind::flow});
    } else if (auto r = resolve(model, f.to); r && r->kind == EntityKind::store) {
      g.store_writes.push_back({*from, f.to});
    }
  }
  for (const auto& t : model.triggers) {
    auto from = g.index_of(t.from);
    auto to = g.index_of(t.to);
    if (from && to) g.arcs.push_back({*from, *to, ArcKind::trigger});
  }
  return g;
}

}  // namespace tmkit
