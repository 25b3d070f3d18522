#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tmkit/core.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/engine.hpp"
#include "tmkit/lexer.hpp"
#include "tmkit/temporal.hpp"

// Parsers for the five source kinds: model (.tm), events (.tme), behavior
// (.tmb), scenario (.tms) and monitor (.tmm). Syntax errors stop at the first
// problem (E001/E002); semantic checks report every problem they find.

namespace tmkit::dsl {

namespace detail {

class Cursor {
 public:
  Cursor(std::string_view text, std::string file) : toks_(Lexer(text, std::move(file)).run()) {}

  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(i_ + ahead, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  bool at_word(std::string_view w) const { return peek().kind == Tok::ident && peek().text == w; }

  Token take() {
    Token t = peek();
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }

  bool accept(Tok k) {
    if (!at(k)) return false;
    take();
    return true;
  }

  bool accept_word(std::string_view w) {
    if (!at_word(w)) return false;
    take();
    return true;
  }

  Token expect(Tok k) {
    if (!at(k)) fail_expected(std::string(describe(k)));
    return take();
  }

  Token expect_word(std::string_view w) {
    if (!at_word(w)) fail_expected("'" + std::string(w) + "'");
    return take();
  }

  Token expect_ident(std::string_view what) {
    if (!at(Tok::ident)) fail_expected(std::string(what));
    return take();
  }

  [[noreturn]] void fail_expected(const std::string& expected) const {
    throw ParseFailure{make_error("E002", "expected " + expected + ", found " + found(peek()), peek().pos)};
  }

  QualifiedRef ref(SourcePos* pos = nullptr) {
    Token first = expect_ident("reference");
    if (pos) *pos = first.pos;
    QualifiedRef r{first.text};
    while (at(Tok::dot)) {
      take();
      r.segments.push_back(expect_ident("identifier after '.'").text);
    }
    return r;
  }

  /// ['-'] NUMBER
  Decimal number(SourcePos* pos = nullptr) {
    if (pos) *pos = peek().pos;
    bool negative = accept(Tok::minus);
    Token t = expect(Tok::number);
    auto d = Decimal::parse(t.text);
    if (!d) throw ParseFailure{make_error("E001", "number out of range: " + t.text, t.pos)};
    return negative ? -*d : *d;
  }

  Literal literal(SourcePos* pos = nullptr) {
    if (at(Tok::string)) {
      if (pos) *pos = peek().pos;
      return take().text;
    }
    if (at(Tok::number) || at(Tok::minus)) return number(pos);
    fail_expected("number or string literal");
  }

  ExprPtr expr() { return disjunction(); }

 private:
  static std::string found(const Token& t) {
    switch (t.kind) {
      case Tok::ident: return "identifier '" + t.text + "'";
      case Tok::number: return "number " + t.text;
      case Tok::string: return "string " + quote(t.text);
      case Tok::field: return "$" + t.text;
      default: return std::string(describe(t.kind));
    }
  }

  ExprPtr disjunction() {
    ExprPtr lhs = conjunction();
    while (at_word("or")) {
      SourcePos pos = take().pos;
      lhs = Expr::make_binary(BinaryOp::logical_or, lhs, conjunction(), pos);
    }
    return lhs;
  }

  ExprPtr conjunction() {
    ExprPtr lhs = comparison();
    while (at_word("and")) {
      SourcePos pos = take().pos;
      lhs = Expr::make_binary(BinaryOp::logical_and, lhs, comparison(), pos);
    }
    return lhs;
  }

  ExprPtr comparison() {
    ExprPtr lhs = additive();
    static const std::pair<Tok, BinaryOp> kOps[] = {{Tok::eq, BinaryOp::eq}, {Tok::ne, BinaryOp::ne},
                                                    {Tok::lt, BinaryOp::lt}, {Tok::le, BinaryOp::le},
                                                    {Tok::gt, BinaryOp::gt}, {Tok::ge, BinaryOp::ge}};
    for (auto [tok, op] : kOps) {
      if (at(tok)) {
        SourcePos pos = take().pos;
        return Expr::make_binary(op, lhs, additive(), pos);
      }
    }
    return lhs;
  }

  ExprPtr additive() {
    ExprPtr lhs = primary();
    while (at(Tok::plus) || at(Tok::minus)) {
      Token op = take();
      lhs = Expr::make_binary(op.kind == Tok::plus ? BinaryOp::add : BinaryOp::sub, lhs, primary(), op.pos);
    }
    return lhs;
  }

  ExprPtr primary() {
    SourcePos pos = peek().pos;
    if (at(Tok::number) || at(Tok::minus)) return Expr::make_literal(number(), pos);
    if (at(Tok::string)) return Expr::make_literal(take().text, pos);
    if (at(Tok::field)) return Expr::make_field(take().text, pos);
    if (at(Tok::ident)) return Expr::make_store_ref(ref(), pos);
    if (accept(Tok::lparen)) {
      ExprPtr inner = expr();
      expect(Tok::rparen);
      return inner;
    }
    fail_expected("expression");
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

/// Reports later declarations of an already-used name.
inline void check_unique(std::vector<std::pair<std::string, SourcePos>> names, std::string_view where,
                         std::vector<Diagnostic>& diags) {
  std::stable_sort(names.begin(), names.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.line, a.second.column) < std::tie(b.second.line, b.second.column);
  });
  std::set<std::string> seen;
  for (const auto& [name, pos] : names) {
    if (!seen.insert(name).second) {
      diags.push_back(make_error("E010", "duplicate name '" + name + "' in " + std::string(where), pos));
    }
  }
}

inline void check_thimac_names(const Thimac& t, const QualifiedRef& path, std::vector<Diagnostic>& diags) {
  std::vector<std::pair<std::string, SourcePos>> names;
  for (const auto& s : t.stages) names.emplace_back(s.name, s.origin.pos);
  for (const auto& s : t.stores) names.emplace_back(s.name, s.origin.pos);
  for (const auto& c : t.children) names.emplace_back(c.name, c.origin.pos);
  check_unique(std::move(names), "thimac " + path.to_string(), diags);
  for (const auto& c : t.children) check_thimac_names(c, path.child(c.name), diags);
}

/// Rewrites store references to absolute paths using scoped lookup.
inline ExprPtr resolve_expr(const ExprPtr& e, const QualifiedRef& scope, const StaticModel& model,
                            std::vector<Diagnostic>& diags) {
  switch (e->kind) {
    case Expr::Kind::store_ref: {
      auto abs = resolve_scoped(model, scope, e->ref);
      if (!abs) {
        diags.push_back(make_error("E011", "unresolved reference " + e->ref.to_string(), e->origin.pos));
        return e;
      }
      auto r = resolve(model, *abs);
      if (r->kind != EntityKind::store) {
        diags.push_back(make_error(
            "E013", abs->to_string() + " is a " + std::string(to_string(r->kind)) + ", not a store", e->origin.pos));
        return e;
      }
      return Expr::make_store_ref(*abs, e->origin.pos);
    }
    case Expr::Kind::binary:
      return Expr::make_binary(e->op, resolve_expr(e->lhs, scope, model, diags),
                               resolve_expr(e->rhs, scope, model, diags), e->origin.pos);
    default: return e;
  }
}

inline void resolve_assignments(Thimac& t, const QualifiedRef& path, const StaticModel& model,
                                std::vector<Diagnostic>& diags) {
  for (auto& s : t.stages) {
    if (!s.assignment) continue;
    if (s.kind != StageKind::create && s.kind != StageKind::process) {
      diags.push_back(make_error("E012",
                                 std::string(to_string(s.kind)) + " stage " + s.name +
                                     " cannot carry an assignment (only create and process can)",
                                 s.origin.pos));
    }
    Assignment& a = *s.assignment;
    a.expr = resolve_expr(a.expr, path, model, diags);
    if (a.into) {
      auto abs = resolve_scoped(model, path, *a.into);
      if (!abs) {
        diags.push_back(make_error("E011", "unresolved reference " + a.into->to_string(), a.into_origin.pos));
      } else if (auto r = resolve(model, *abs); r->kind != EntityKind::store) {
        diags.push_back(make_error("E013",
                                   abs->to_string() + " is a " + std::string(to_string(r->kind)) + ", not a store",
                                   a.into_origin.pos));
      } else {
        a.into = *abs;
      }
    }
  }
  for (auto& c : t.children) resolve_assignments(c, path.child(c.name), model, diags);
}

inline Thimac parse_thimac(Cursor& cur, std::vector<Diagnostic>& diags) {
  Thimac t;
  t.origin.pos = cur.expect_word("thimac").pos;
  t.name = cur.expect_ident("thimac name").text;
  cur.expect(Tok::lbrace);
  while (!cur.at(Tok::rbrace)) {
    if (cur.at_word("thimac")) {
      t.children.push_back(parse_thimac(cur, diags));
    } else if (cur.at_word("store")) {
      Store s;
      s.origin.pos = cur.take().pos;
      s.name = cur.expect_ident("store name").text;
      cur.expect(Tok::colon);
      if (cur.accept_word("number")) {
        s.value_kind = StoreKind::number;
      } else if (cur.accept_word("text")) {
        s.value_kind = StoreKind::text;
      } else {
        cur.fail_expected("'number' or 'text'");
      }
      cur.expect(Tok::assign);
      SourcePos lit_pos;
      s.initial = cur.literal(&lit_pos);
      if (!literal_matches(s.value_kind, s.initial)) {
        diags.push_back(make_error("E015",
                                   "initial value of " + std::string(to_string(s.value_kind)) + " store " + s.name +
                                       " is a " + std::string(to_string(kind_of(s.initial))),
                                   lit_pos));
      }
      t.stores.push_back(std::move(s));
    } else if (cur.at(Tok::ident) && parse_stage_kind(cur.peek().text)) {
      Stage s;
      Token kind = cur.take();
      s.kind = *parse_stage_kind(kind.text);
      s.origin.pos = kind.pos;
      s.name = cur.expect_ident("stage name").text;
      if (cur.accept(Tok::assign)) {
        Assignment a;
        a.expr = cur.expr();
        if (cur.accept_word("into")) a.into = cur.ref(&a.into_origin.pos);
        s.assignment = std::move(a);
      }
      if (cur.at(Tok::string)) s.label = cur.take().text;
      t.stages.push_back(std::move(s));
    } else {
      cur.fail_expected("stage kind, 'store', 'thimac' or '}'");
    }
  }
  cur.take();
  return t;
}

template <typename T, typename Fn>
Parsed<T> guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const ParseFailure& f) {
    return std::vector<Diagnostic>{f.diag};
  }
}

inline void check_for_clause(const std::string& named, const SourcePos& pos, const std::string& model,
                             std::vector<Diagnostic>& diags) {
  if (named != model) {
    diags.push_back(make_error("E014", "file is for model '" + named + "' but model is '" + model + "'", pos));
  }
}

/// Resolves an absolute reference that must name a store (E011/E013).
inline ExprPtr resolve_absolute_expr(const ExprPtr& e, const StaticModel& model, std::vector<Diagnostic>& diags) {
  return resolve_expr(e, QualifiedRef{}, model, diags);
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// model := "model" IDENT "{" thimacDecl* flowDecl* triggerDecl* "}"
inline Parsed<StaticModel> parse_model(std::string_view text, std::string file = "<model>") {
  return detail::guarded<StaticModel>([&]() -> Parsed<StaticModel> {
    detail::Cursor cur(text, file);
    std::vector<Diagnostic> diags;
    StaticModel m;
    m.origin.pos = cur.expect_word("model").pos;
    m.name = cur.expect_ident("model name").text;
    cur.expect(Tok::lbrace);
    while (cur.at_word("thimac")) m.roots.push_back(detail::parse_thimac(cur, diags));

    std::vector<std::pair<SourcePos, SourcePos>> flow_pos, trigger_pos;
    while (cur.at_word("flow")) {
      Flow f;
      f.origin.pos = cur.take().pos;
      SourcePos a, b;
      f.from = cur.ref(&a);
      cur.expect(Tok::arrow);
      f.to = cur.ref(&b);
      flow_pos.emplace_back(a, b);
      m.flows.push_back(std::move(f));
    }
    while (cur.at_word("trigger")) {
      Trigger t;
      t.origin.pos = cur.take().pos;
      SourcePos a, b;
      t.from = cur.ref(&a);
      cur.expect(Tok::squiggle);
      t.to = cur.ref(&b);
      trigger_pos.emplace_back(a, b);
      m.triggers.push_back(std::move(t));
    }
    if (!cur.at(Tok::rbrace)) {
      cur.fail_expected(m.triggers.empty() ? (m.flows.empty() ? "'thimac', 'flow', 'trigger' or '}'"
                                                              : "'flow', 'trigger' or '}'")
                                           : "'trigger' or '}'");
    }
    cur.take();
    cur.expect(Tok::end);

    std::vector<std::pair<std::string, SourcePos>> roots;
    for (const auto& r : m.roots) roots.emplace_back(r.name, r.origin.pos);
    detail::check_unique(std::move(roots), "model " + m.name, diags);
    for (const auto& r : m.roots) detail::check_thimac_names(r, QualifiedRef{r.name}, diags);

    const StaticModel& view = m;
    for (auto& r : m.roots) detail::resolve_assignments(r, QualifiedRef{r.name}, view, diags);

    auto check_ref = [&](const QualifiedRef& ref, const SourcePos& pos) {
      if (!resolve(m, ref)) diags.push_back(make_error("E011", "unresolved reference " + ref.to_string(), pos));
    };
    for (std::size_t i = 0; i < m.flows.size(); ++i) {
      check_ref(m.flows[i].from, flow_pos[i].first);
      check_ref(m.flows[i].to, flow_pos[i].second);
    }
    for (std::size_t i = 0; i < m.triggers.size(); ++i) {
      check_ref(m.triggers[i].from, trigger_pos[i].first);
      check_ref(m.triggers[i].to, trigger_pos[i].second);
    }
    if (has_errors(diags)) return diags;
    return m;
  });
}

/// events := "events" "for" IDENT "{" eventDecl* "}"
inline Parsed<EventLayer> parse_events(std::string_view text, const StaticModel& model,
                                       std::string file = "<events>") {
  return detail::guarded<EventLayer>([&]() -> Parsed<EventLayer> {
    detail::Cursor cur(text, file);
    std::vector<Diagnostic> diags;
    EventLayer layer;
    layer.origin.pos = cur.expect_word("events").pos;
    cur.expect_word("for");
    Token name = cur.expect_ident("model name");
    layer.model = name.text;
    detail::check_for_clause(name.text, name.pos, model.name, diags);
    cur.expect(Tok::lbrace);

    std::vector<SourcePos> refines_pos;
    while (cur.at_word("event")) {
      Event ev;
      ev.origin.pos = cur.take().pos;
      ev.id = cur.expect_ident("event id").text;
      SourcePos rpos = ev.origin.pos;
      if (cur.accept_word("refines")) {
        Token parent = cur.expect_ident("refined event id");
        rpos = parent.pos;
        ev.refines = parent.text;
      }
      refines_pos.push_back(rpos);
      cur.expect_word("over");
      cur.expect(Tok::lbrace);
      if (!cur.at(Tok::rbrace)) {
        do {
          SourcePos pos;
          QualifiedRef r = cur.ref(&pos);
          if (std::find(ev.region.begin(), ev.region.end(), r) == ev.region.end()) {
            ev.region.push_back(std::move(r));
            ev.region_pos.items.push_back(pos);
          }
        } while (cur.accept(Tok::comma));
      }
      cur.expect(Tok::rbrace);
      if (cur.accept_word("lasts")) {
        SourcePos pos;
        Decimal d = cur.number(&pos);
        if (d < Decimal{}) {
          diags.push_back(make_error("E023", "event " + ev.id + " has negative duration " + d.to_string(), pos));
        } else {
          ev.duration = Interval{d};
        }
      }
      if (cur.accept_word("payload")) {
        cur.expect(Tok::lbrace);
        while (!cur.at(Tok::rbrace)) {
          PayloadCapture cap;
          Token n = cur.expect_ident("payload name");
          cap.name = n.text;
          cap.origin.pos = n.pos;
          cur.expect(Tok::colon);
          if (cur.at(Tok::field)) {
            cap.source = PayloadSource::from_field(cur.take().text);
          } else {
            cap.source = PayloadSource::from_store(cur.ref());
          }
          ev.payload.push_back(std::move(cap));
          cur.accept(Tok::comma);
        }
        cur.take();
      }
      layer.events.push_back(std::move(ev));
    }
    if (!cur.at(Tok::rbrace)) cur.fail_expected("'event' or '}'");
    cur.take();
    cur.expect(Tok::end);

    std::set<std::string> ids;
    for (const auto& ev : layer.events) {
      if (!ids.insert(ev.id).second) {
        diags.push_back(make_error("E025", "duplicate event id " + ev.id, ev.origin.pos));
      }
    }
    for (std::size_t i = 0; i < layer.events.size(); ++i) {
      const Event& ev = layer.events[i];
      if (ev.refines && !ids.count(*ev.refines)) {
        diags.push_back(make_error("E020", "event " + ev.id + " refines unknown event " + *ev.refines, refines_pos[i]));
      }
      if (ev.region.empty()) {
        diags.push_back(make_error("E022", "event " + ev.id + " has an empty region", ev.origin.pos));
      }
      for (std::size_t k = 0; k < ev.region.size(); ++k) {
        auto r = resolve(model, ev.region[k]);
        if (!r) {
          diags.push_back(make_error("E021", "region ref " + ev.region[k].to_string() + " is not in the model",
                                     ev.region_pos_of(k)));
        } else if (r->kind != EntityKind::stage) {
          diags.push_back(make_error("E021",
                                     "region ref " + ev.region[k].to_string() + " is a " +
                                         std::string(to_string(r->kind)) + ", not a stage",
                                     ev.region_pos_of(k)));
        }
      }
      std::set<std::string> names;
      for (const auto& cap : ev.payload) {
        if (!names.insert(cap.name).second) {
          diags.push_back(make_error("E026", "duplicate payload name " + cap.name, cap.origin.pos));
        }
        if (cap.source.kind != PayloadSource::Kind::store) continue;
        auto r = resolve(model, cap.source.store);
        if (!r) {
          diags.push_back(make_error("E011", "unresolved reference " + cap.source.store.to_string(), cap.origin.pos));
        } else if (r->kind != EntityKind::store) {
          diags.push_back(make_error("E024", "payload " + cap.name + " reads " + cap.source.store.to_string() +
                                                 ", which is not a store",
                                     cap.origin.pos));
        }
      }
    }
    if (has_errors(diags)) return diags;
    return layer;
  });
}

/// behavior := "behavior" "for" IDENT "{" startDecl* edgeDecl* "}"
///
/// Start bindings name model stages, so the model is needed alongside the
/// event layer.
inline Parsed<BehaviorGraph> parse_behavior(std::string_view text, const EventLayer& layer, const StaticModel& model,
                                            std::string file = "<behavior>") {
  return detail::guarded<BehaviorGraph>([&]() -> Parsed<BehaviorGraph> {
    detail::Cursor cur(text, file);
    std::vector<Diagnostic> diags;
    BehaviorGraph g;
    g.origin.pos = cur.expect_word("behavior").pos;
    cur.expect_word("for");
    Token name = cur.expect_ident("model name");
    g.model = name.text;
    detail::check_for_clause(name.text, name.pos, layer.model, diags);
    cur.expect(Tok::lbrace);

    auto known = [&](const Token& t) {
      if (!layer.find(t.text)) diags.push_back(make_error("E030", "unknown event " + t.text, t.pos));
    };

    std::vector<SourcePos> start_ref_pos;
    while (cur.at_word("start") && cur.peek(1).kind == Tok::ident) {
      StartBinding s;
      s.origin.pos = cur.take().pos;
      Token ev = cur.expect_ident("event id");
      known(ev);
      s.event = ev.text;
      cur.expect_word("on");
      SourcePos rpos;
      s.stage = cur.ref(&rpos);
      start_ref_pos.push_back(rpos);
      g.starts.push_back(std::move(s));
    }
    while (cur.at(Tok::ident)) {
      BehaviorEdge e;
      Token from = cur.take();
      e.origin.pos = from.pos;
      known(from);
      e.from = from.text;
      cur.expect(Tok::arrow);
      Token to = cur.expect_ident("event id");
      known(to);
      e.to = to.text;
      if (cur.accept_word("when")) {
        e.mode = BehaviorEdge::Mode::guarded;
        e.guard = detail::resolve_absolute_expr(cur.expr(), model, diags);
      } else if (cur.accept_word("after")) {
        e.mode = BehaviorEdge::Mode::timed;
        SourcePos pos;
        Decimal d = cur.number(&pos);
        if (d <= Decimal{}) {
          diags.push_back(make_error("E031", "timer on " + e.from + " -> " + e.to + " must be positive, got " +
                                                 d.to_string(),
                                     pos));
        }
        e.delay = Interval{d};
      }
      g.edges.push_back(std::move(e));
    }
    if (!cur.at(Tok::rbrace)) cur.fail_expected("edge or '}'");
    cur.take();
    cur.expect(Tok::end);

    if (g.starts.empty()) {
      diags.push_back(make_error("E032", "behavior has no start declaration", g.origin.pos));
    }
    std::set<QualifiedRef> bound;
    for (std::size_t i = 0; i < g.starts.size(); ++i) {
      const auto& s = g.starts[i];
      auto r = resolve(model, s.stage);
      if (!r) {
        diags.push_back(make_error("E011", "unresolved reference " + s.stage.to_string(), start_ref_pos[i]));
      } else if (r->kind != EntityKind::stage) {
        diags.push_back(make_error("E034", s.stage.to_string() + " is a " + std::string(to_string(r->kind)) +
                                               ", not a stage",
                                   start_ref_pos[i]));
      }
      if (!bound.insert(s.stage).second) {
        diags.push_back(make_error("E033", "stage " + s.stage.to_string() + " already starts an event",
                                   start_ref_pos[i]));
      }
    }
    if (has_errors(diags)) return diags;
    return g;
  });
}

/// scenario := "scenario" IDENT "for" IDENT "{" stimulus* "}"
inline Parsed<Scenario> parse_scenario(std::string_view text, const StaticModel& model,
                                       std::string file = "<scenario>") {
  return detail::guarded<Scenario>([&]() -> Parsed<Scenario> {
    detail::Cursor cur(text, file);
    std::vector<Diagnostic> diags;
    Scenario sc;
    sc.origin.pos = cur.expect_word("scenario").pos;
    sc.name = cur.expect_ident("scenario name").text;
    cur.expect_word("for");
    Token name = cur.expect_ident("model name");
    sc.model = name.text;
    detail::check_for_clause(name.text, name.pos, model.name, diags);
    cur.expect(Tok::lbrace);

    while (cur.at_word("at")) {
      Stimulus st;
      st.origin.pos = cur.take().pos;
      SourcePos tpos;
      Decimal at = cur.number(&tpos);
      if (at < Decimal{}) {
        diags.push_back(make_error("E041", "stimulus time " + at.to_string() + " is negative", tpos));
      } else {
        st.at = Instant{at};
      }
      cur.expect(Tok::colon);
      cur.expect_word("inject");
      SourcePos rpos;
      st.target = cur.ref(&rpos);
      if (auto r = resolve(model, st.target); !r) {
        diags.push_back(make_error("E011", "unresolved reference " + st.target.to_string(), rpos));
      } else if (r->kind != EntityKind::stage || r->stage->kind != StageKind::transfer) {
        diags.push_back(make_error("E040", "inject target " + st.target.to_string() + " is not a transfer stage", rpos));
      }
      cur.expect(Tok::lbrace);
      std::set<std::string> names;
      while (!cur.at(Tok::rbrace)) {
        Token n = cur.expect_ident("field name");
        cur.expect(Tok::assign);
        Literal v = cur.literal();
        if (!names.insert(n.text).second) {
          diags.push_back(make_error("E042", "duplicate stimulus field " + n.text, n.pos));
        }
        st.fields.emplace_back(n.text, std::move(v));
        cur.accept(Tok::comma);
      }
      cur.take();
      if (cur.accept_word("urgency")) st.urgency = cur.expect(Tok::string).text;
      sc.stimuli.push_back(std::move(st));
    }
    if (!cur.at(Tok::rbrace)) cur.fail_expected("'at' or '}'");
    cur.take();
    cur.expect(Tok::end);
    if (has_errors(diags)) return diags;
    return sc;
  });
}

/// monitors := "monitor" "all"
///           | ( "monitor" STRING "on" "{" IDENT ("," IDENT)* "}" "capture" "{" [IDENT ("," IDENT)*] "}" )+
inline Parsed<MonitorSpec> parse_monitor(std::string_view text, const EventLayer& layer,
                                         std::string file = "<monitor>") {
  return detail::guarded<MonitorSpec>([&]() -> Parsed<MonitorSpec> {
    detail::Cursor cur(text, file);
    std::vector<Diagnostic> diags;
    MonitorSpec spec;
    spec.mode = MonitorSpec::Mode::selective;
    spec.origin.pos = cur.peek().pos;
    bool saw_all = false;
    std::vector<std::vector<SourcePos>> event_pos;
    std::vector<std::vector<SourcePos>> capture_pos;

    while (cur.at_word("monitor")) {
      SourcePos kw = cur.take().pos;
      if (cur.at_word("all")) {
        if (saw_all || !spec.selections.empty()) {
          throw ParseFailure{make_error("E002", "'monitor all' cannot be combined with other monitors", kw)};
        }
        cur.take();
        saw_all = true;
        spec.mode = MonitorSpec::Mode::all;
        continue;
      }
      if (saw_all) throw ParseFailure{make_error("E002", "'monitor all' cannot be combined with other monitors", kw)};
      MonitorSelection sel;
      sel.origin.pos = cur.peek().pos;
      sel.key_template = cur.expect(Tok::string).text;
      cur.expect_word("on");
      cur.expect(Tok::lbrace);
      std::vector<SourcePos> epos;
      do {
        Token ev = cur.expect_ident("event id");
        sel.events.push_back(ev.text);
        epos.push_back(ev.pos);
      } while (cur.accept(Tok::comma));
      cur.expect(Tok::rbrace);
      cur.expect_word("capture");
      cur.expect(Tok::lbrace);
      std::vector<SourcePos> cpos;
      if (!cur.at(Tok::rbrace)) {
        do {
          Token c = cur.expect_ident("payload name");
          sel.captures.push_back(c.text);
          cpos.push_back(c.pos);
        } while (cur.accept(Tok::comma));
      }
      cur.expect(Tok::rbrace);
      spec.selections.push_back(std::move(sel));
      event_pos.push_back(std::move(epos));
      capture_pos.push_back(std::move(cpos));
    }
    if (!cur.at(Tok::end)) cur.fail_expected("'monitor' or end of input");
    if (!saw_all && spec.selections.empty()) {
      diags.push_back(make_error("E092", "monitor file declares no monitors", spec.origin.pos));
    }

    for (std::size_t i = 0; i < spec.selections.size(); ++i) {
      const auto& sel = spec.selections[i];
      auto parts = parse_key_template(sel.key_template);
      if (!parts) {
        diags.push_back(make_error("E091", "malformed key template " + quote(sel.key_template), sel.origin.pos));
      }
      for (std::size_t k = 0; k < sel.events.size(); ++k) {
        const Event* ev = layer.find(sel.events[k]);
        if (!ev) {
          diags.push_back(make_error("E090", "monitor names unknown event " + sel.events[k], event_pos[i][k]));
          continue;
        }
        auto captured = [ev](const std::string& n) {
          return n == "urgency" || std::any_of(ev->payload.begin(), ev->payload.end(),
                                               [&](const PayloadCapture& c) { return c.name == n; });
        };
        if (parts) {
          for (const auto& f : template_fields(*parts)) {
            if (!captured(f)) {
              diags.push_back(make_error("E093", "key field {" + f + "} is not in the payload of " + ev->id,
                                         sel.origin.pos));
            }
          }
        }
        for (std::size_t c = 0; c < sel.captures.size(); ++c) {
          if (!captured(sel.captures[c])) {
            diags.push_back(make_error("E093", "capture " + sel.captures[c] + " is not in the payload of " + ev->id,
                                       capture_pos[i][c]));
          }
        }
      }
    }
    if (has_errors(diags)) return diags;
    return spec;
  });
}

}  // namespace tmkit::dsl
