#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tmkit/core.hpp"

namespace tmkit {

/// Ordered name -> literal map (declaration order is preserved).
using FieldMap = std::vector<std::pair<std::string, Literal>>;

inline const Literal* find_field(const FieldMap& fields, std::string_view name) {
  for (const auto& [k, v] : fields) {
    if (k == name) return &v;
  }
  return nullptr;
}

/// Current value of every store, keyed by qualified path.
using StoreState = std::map<QualifiedRef, Literal>;

inline StoreState initial_stores(const StaticModel& model) {
  StoreState state;
  for (const auto& e : stores_of(model)) state.emplace(e.path, e.store->initial);
  return state;
}

namespace detail {

[[noreturn]] inline void eval_fail(const Expr& at, const std::string& message) {
  throw RunError("R101", message, at.origin.pos);
}

inline Decimal as_number(const Expr& at, const Value& v, BinaryOp op) {
  if (auto* d = std::get_if<Decimal>(&v)) return *d;
  eval_fail(at, "operator '" + std::string(to_string(op)) + "' needs numbers, got " +
                    std::string(to_string(kind_of(v))));
}

inline bool as_bool(const Expr& at, const Value& v, BinaryOp op) {
  if (auto* b = std::get_if<bool>(&v)) return *b;
  eval_fail(at, "operator '" + std::string(to_string(op)) + "' needs booleans, got " +
                    std::string(to_string(kind_of(v))));
}

}  // namespace detail

/// Evaluates with exact fixed-point arithmetic; text equality is byte
/// equality. Throws RunError R101 on a missing field, an unknown store, a
/// kind mismatch or arithmetic overflow.
inline Value eval_expr(const Expr& expr, const FieldMap& fields, const StoreState& stores) {
  switch (expr.kind) {
    case Expr::Kind::literal: return to_value(expr.literal);
    case Expr::Kind::field: {
      if (const Literal* v = find_field(fields, expr.field)) return to_value(*v);
      detail::eval_fail(expr, "missing field $" + expr.field);
    }
    case Expr::Kind::store_ref: {
      auto it = stores.find(expr.ref);
      if (it == stores.end()) detail::eval_fail(expr, "unknown store " + expr.ref.to_string());
      return to_value(it->second);
    }
    case Expr::Kind::binary: break;
  }

  const BinaryOp op = expr.op;
  if (op == BinaryOp::logical_and || op == BinaryOp::logical_or) {
    bool lhs = detail::as_bool(expr, eval_expr(*expr.lhs, fields, stores), op);
    // Short-circuit.
    if (op == BinaryOp::logical_and && !lhs) return false;
    if (op == BinaryOp::logical_or && lhs) return true;
    return detail::as_bool(expr, eval_expr(*expr.rhs, fields, stores), op);
  }

  Value lhs = eval_expr(*expr.lhs, fields, stores);
  Value rhs = eval_expr(*expr.rhs, fields, stores);
  switch (op) {
    case BinaryOp::add:
    case BinaryOp::sub: {
      Decimal a = detail::as_number(expr, lhs, op);
      Decimal b = detail::as_number(expr, rhs, op);
      try {
        return op == BinaryOp::add ? a + b : a - b;
      } catch (const std::overflow_error&) {
        detail::eval_fail(expr, "arithmetic overflow");
      }
    }
    case BinaryOp::eq:
    case BinaryOp::ne:
      if (lhs.index() != rhs.index()) {
        detail::eval_fail(expr, "cannot compare " + std::string(to_string(kind_of(lhs))) + " with " +
                                    std::string(to_string(kind_of(rhs))));
      }
      return (lhs == rhs) == (op == BinaryOp::eq);
    case BinaryOp::lt:
    case BinaryOp::le:
    case BinaryOp::gt:
    case BinaryOp::ge: {
      Decimal a = detail::as_number(expr, lhs, op);
      Decimal b = detail::as_number(expr, rhs, op);
      if (op == BinaryOp::lt) return a < b;
      if (op == BinaryOp::le) return a <= b;
      if (op == BinaryOp::gt) return a > b;
      return a >= b;
    }
    default: break;
  }
  detail::eval_fail(expr, "unsupported operator");
}

}  // namespace tmkit
