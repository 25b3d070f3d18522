#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tmkit/core.hpp"
#include "tmkit/diagnostic.hpp"
#include "tmkit/dynamics.hpp"

namespace tmkit {

enum class FlowScope { intra_machine, inter_machine };

struct AdjacencyRule {
  StageKind from;
  StageKind to;
  FlowScope scope;
};

/// Closed table of legal stage-to-stage flows. Anything absent is illegal.
inline constexpr std::array<AdjacencyRule, 9> kAdjacencyRules = {{
    {StageKind::receive, StageKind::process, FlowScope::intra_machine},
    {StageKind::receive, StageKind::release, FlowScope::intra_machine},
    {StageKind::process, StageKind::release, FlowScope::intra_machine},
    {StageKind::process, StageKind::create, FlowScope::intra_machine},
    {StageKind::create, StageKind::process, FlowScope::intra_machine},
    {StageKind::create, StageKind::release, FlowScope::intra_machine},
    {StageKind::release, StageKind::transfer, FlowScope::intra_machine},
    {StageKind::transfer, StageKind::receive, FlowScope::inter_machine},
    {StageKind::transfer, StageKind::transfer, FlowScope::inter_machine},
}};

inline bool flow_allowed(StageKind from, StageKind to, FlowScope scope) {
  return std::any_of(kAdjacencyRules.begin(), kAdjacencyRules.end(), [&](const AdjacencyRule& r) {
    return r.from == from && r.to == to && r.scope == scope;
  });
}

/// Only create and process stages may write a store.
inline bool store_write_allowed(StageKind from) { return from == StageKind::create || from == StageKind::process; }

namespace detail {

inline void check_expr_refs(const Expr& e, const StaticModel& model, std::vector<Diagnostic>& diags) {
  for_each_store_ref(e, [&](const Expr& ref) {
    auto r = resolve(model, ref.ref);
    if (!r) {
      diags.push_back(make_error("E011", "unresolved reference " + ref.ref.to_string(), ref.origin.pos));
    } else if (r->kind != EntityKind::store) {
      diags.push_back(make_error("E013", ref.ref.to_string() + " is not a store", ref.origin.pos));
    }
  });
}

/// Weakly connected components over `n` nodes; returns the component count.
inline std::size_t component_count(std::size_t n, const std::vector<StageArc>& arcs) {
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = n;
  for (const auto& a : arcs) {
    auto x = find(a.from), y = find(a.to);
    if (x != y) {
      parent[x] = y;
      --components;
    }
  }
  return components;
}

}  // namespace detail

/// Structural legality of a static model: flow kinds against the adjacency
/// table (E050), triggers across machines (E051, E053), store writes from
/// create/process only (E052), assignment references (E011-E013), and W060
/// for stages with no incident arcs. Sorted by position.
inline std::vector<Diagnostic> validate_static(const StaticModel& model) {
  std::vector<Diagnostic> diags;

  for (const auto& f : model.flows) {
    const SourcePos& pos = f.origin.pos;
    auto from = resolve(model, f.from);
    auto to = resolve(model, f.to);
    if (!from || !to) {
      diags.push_back(make_error("E011", "unresolved reference " + (!from ? f.from : f.to).to_string(), pos));
      continue;
    }
    if (from->kind != EntityKind::stage) {
      diags.push_back(make_error("E050", "flow must start at a stage, but " + f.from.to_string() + " is a " +
                                             std::string(to_string(from->kind)),
                                 pos));
      continue;
    }
    const StageKind fk = from->stage->kind;
    if (to->kind == EntityKind::store) {
      if (!store_write_allowed(fk)) {
        diags.push_back(make_error("E052",
                                   std::string(to_string(fk)) + " stage " + f.from.to_string() +
                                       " cannot write store " + f.to.to_string(),
                                   pos));
      }
      continue;
    }
    if (to->kind != EntityKind::stage) {
      diags.push_back(make_error("E050", "flow cannot end at thimac " + f.to.to_string(), pos));
      continue;
    }
    const StageKind tk = to->stage->kind;
    const FlowScope scope = from->owner == to->owner ? FlowScope::intra_machine : FlowScope::inter_machine;
    if (!flow_allowed(fk, tk, scope)) {
      diags.push_back(make_error("E050",
                                 "illegal " +
                                     std::string(scope == FlowScope::intra_machine ? "intra" : "inter") +
                                     "-machine flow " + std::string(to_string(fk)) + " -> " +
                                     std::string(to_string(tk)) + " (" + f.from.to_string() + " -> " +
                                     f.to.to_string() + ")",
                                 pos));
    }
  }

  for (const auto& t : model.triggers) {
    const SourcePos& pos = t.origin.pos;
    auto from = resolve(model, t.from);
    auto to = resolve(model, t.to);
    if (!from || !to) {
      diags.push_back(make_error("E011", "unresolved reference " + (!from ? t.from : t.to).to_string(), pos));
      continue;
    }
    if (from->kind != EntityKind::stage || to->kind != EntityKind::stage) {
      diags.push_back(make_error("E053", "trigger endpoints must be stages (" + t.from.to_string() + " ~> " +
                                             t.to.to_string() + ")",
                                 pos));
      continue;
    }
    if (from->owner == to->owner) {
      diags.push_back(make_error("E051",
                                 "trigger " + t.from.to_string() + " ~> " + t.to.to_string() +
                                     " stays inside one machine",
                                 pos));
    }
  }

  for (const auto& e : stages_of(model)) {
    const Stage& s = *e.stage;
    if (!s.assignment) continue;
    if (s.kind != StageKind::create && s.kind != StageKind::process) {
      diags.push_back(make_error("E012", std::string(to_string(s.kind)) + " stage " + e.path.to_string() +
                                             " cannot carry an assignment",
                                 s.origin.pos));
    }
    if (s.assignment->expr) detail::check_expr_refs(*s.assignment->expr, model, diags);
    if (const auto& into = s.assignment->into) {
      auto r = resolve(model, *into);
      if (!r) {
        diags.push_back(make_error("E011", "unresolved reference " + into->to_string(), s.origin.pos));
      } else if (r->kind != EntityKind::store) {
        diags.push_back(make_error("E013", into->to_string() + " is not a store", s.origin.pos));
      }
    }
  }

  const StageGraph g = stage_graph(model);
  std::vector<bool> touched(g.nodes.size(), false);
  for (const auto& a : g.arcs) touched[a.from] = touched[a.to] = true;
  for (const auto& w : g.store_writes) touched[w.from] = true;
  const auto stages = stages_of(model);
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (!touched[i]) {
      diags.push_back(make_warning("W060", "stage " + stages[i].path.to_string() + " has no incident flows or triggers",
                                   stages[i].stage->origin.pos));
    }
  }

  sort_diagnostics(diags);
  return diags;
}

/// Event layer against its model: ids unique (E025), refinement parents
/// exist (E020) and form no cycle (E062), regions are nonempty (E022) and
/// name stages (E021), payload refs are stores (E011/E024). Warns W061 when a
/// region is not weakly connected in the stage graph.
inline std::vector<Diagnostic> validate_events(const EventLayer& layer, const StaticModel& model) {
  std::vector<Diagnostic> diags;
  const StageGraph g = stage_graph(model);

  std::map<std::string, const Event*> by_id;
  for (const auto& ev : layer.events) {
    if (!by_id.emplace(ev.id, &ev).second) {
      diags.push_back(make_error("E025", "duplicate event id " + ev.id, ev.origin.pos));
    }
  }

  for (const auto& ev : layer.events) {
    if (ev.refines && !by_id.count(*ev.refines)) {
      diags.push_back(make_error("E020", "event " + ev.id + " refines unknown event " + *ev.refines, ev.origin.pos));
    }
    if (ev.region.empty()) {
      diags.push_back(make_error("E022", "event " + ev.id + " has an empty region", ev.origin.pos));
    }
    bool all_stages = true;
    for (std::size_t k = 0; k < ev.region.size(); ++k) {
      auto r = resolve(model, ev.region[k]);
      if (!r || r->kind != EntityKind::stage) {
        all_stages = false;
        diags.push_back(make_error("E021", "region ref " + ev.region[k].to_string() + " is not a stage of the model",
                                   ev.region_pos_of(k)));
      }
    }
    for (const auto& cap : ev.payload) {
      if (cap.source.kind != PayloadSource::Kind::store) continue;
      auto r = resolve(model, cap.source.store);
      if (!r) {
        diags.push_back(make_error("E011", "unresolved reference " + cap.source.store.to_string(), cap.origin.pos));
      } else if (r->kind != EntityKind::store) {
        diags.push_back(make_error("E024", "payload " + cap.name + " does not read a store", cap.origin.pos));
      }
    }
    if (all_stages && ev.region.size() > 1) {
      auto sub = region_subgraph(ev, g);
      if (detail::component_count(sub.nodes.size(), sub.arcs) > 1) {
        diags.push_back(make_warning("W061", "region of " + ev.id + " is not connected in the stage graph",
                                     ev.origin.pos));
      }
    }
  }

  // A refinement chain that comes back to its start is a cycle.
  for (const auto& ev : layer.events) {
    const Event* cur = &ev;
    for (std::size_t steps = 0; steps <= layer.events.size() && cur && cur->refines; ++steps) {
      auto it = by_id.find(*cur->refines);
      cur = it == by_id.end() ? nullptr : it->second;
      if (cur == &ev) {
        diags.push_back(make_error("E062", "refinement of " + ev.id + " is cyclic", ev.origin.pos));
        break;
      }
    }
  }

  sort_diagnostics(diags);
  return diags;
}

/// One W070 per stage that no event region covers. Stores are exempt.
inline std::vector<Diagnostic> coverage_lint(const EventLayer& layer, const StaticModel& model) {
  std::set<QualifiedRef> covered;
  for (const auto& ev : layer.events) covered.insert(ev.region.begin(), ev.region.end());
  std::vector<Diagnostic> diags;
  for (const auto& e : stages_of(model)) {
    if (!covered.count(e.path)) {
      diags.push_back(make_warning("W070", "stage " + e.path.to_string() + " is not covered by any event",
                                   e.stage->origin.pos));
    }
  }
  sort_diagnostics(diags);
  return diags;
}

}  // namespace tmkit
