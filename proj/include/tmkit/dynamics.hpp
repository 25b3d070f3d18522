#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tmkit/core.hpp"
#include "tmkit/eval.hpp"
#include "tmkit/time.hpp"

namespace tmkit {

/// Where a payload value comes from: a store, or a field of the stimulus
/// that started the chain (`$name`).
struct PayloadSource {
  enum class Kind { store, field };

  Kind kind = Kind::field;
  QualifiedRef store;
  std::string field;

  static PayloadSource from_store(QualifiedRef ref) { return {Kind::store, std::move(ref), {}}; }
  static PayloadSource from_field(std::string name) { return {Kind::field, {}, std::move(name)}; }

  friend bool operator==(const PayloadSource&, const PayloadSource&) = default;
};

struct PayloadCapture {
  std::string name;
  PayloadSource source;
  Origin origin;

  friend bool operator==(const PayloadCapture&, const PayloadCapture&) = default;
};

/// Per-item positions that never take part in structural equality.
struct Positions {
  std::vector<SourcePos> items;

  friend bool operator==(const Positions&, const Positions&) { return true; }
};

/// A region of the static model knotted to time.
struct Event {
  std::string id;
  std::optional<std::string> refines;
  std::vector<QualifiedRef> region;  // stage refs, duplicates removed
  Interval duration;                 // >= 0, defaults to 0
  std::vector<PayloadCapture> payload;
  Origin origin;
  Positions region_pos;

  SourcePos region_pos_of(std::size_t i) const {
    return i < region_pos.items.size() ? region_pos.items[i] : origin.pos;
  }

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventLayer {
  std::string model;
  std::vector<Event> events;
  Origin origin;

  const Event* find(std::string_view id) const {
    for (const auto& e : events) {
      if (e.id == id) return &e;
    }
    return nullptr;
  }

  friend bool operator==(const EventLayer&, const EventLayer&) = default;
};

struct BehaviorEdge {
  enum class Mode { immediate, guarded, timed };

  std::string from;
  std::string to;
  Mode mode = Mode::immediate;
  ExprPtr guard;   // guarded only
  Interval delay;  // timed only, > 0
  Origin origin;

  friend bool operator==(const BehaviorEdge& a, const BehaviorEdge& b) {
    return a.from == b.from && a.to == b.to && a.mode == b.mode && same_expr(a.guard, b.guard) &&
           a.delay == b.delay;
  }
};

/// Binds a stage to the event that starts when a stimulus targets it.
struct StartBinding {
  QualifiedRef stage;
  std::string event;
  Origin origin;

  friend bool operator==(const StartBinding&, const StartBinding&) = default;
};

struct BehaviorGraph {
  std::string model;
  std::vector<StartBinding> starts;
  std::vector<BehaviorEdge> edges;
  Origin origin;

  const StartBinding* start_for(const QualifiedRef& stage) const {
    for (const auto& s : starts) {
      if (s.stage == stage) return &s;
    }
    return nullptr;
  }

  friend bool operator==(const BehaviorGraph&, const BehaviorGraph&) = default;
};

/// What led to an occurrence: a scenario stimulus, or an earlier occurrence.
struct Cause {
  enum class Kind { stimulus, occurrence };

  Kind kind = Kind::stimulus;
  std::size_t index = 0;

  friend bool operator==(const Cause&, const Cause&) = default;
};

/// One runtime firing of an event.
struct Occurrence {
  std::size_t seq = 0;
  std::string event;
  Instant valid_start;
  Instant valid_end;
  Interval duration;
  FieldMap payload;
  std::optional<std::string> urgency;
  Cause cause;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
};

/// Induced subgraph of the stage graph on an event's region. Nodes keep the
/// stage graph's walk order; arc endpoints index into `nodes`.
struct RegionSubgraph {
  std::vector<QualifiedRef> nodes;
  std::vector<StageArc> arcs;
};

inline RegionSubgraph region_subgraph(const Event& event, const StageGraph& graph) {
  std::set<std::size_t> members;
  for (const auto& ref : event.region) {
    if (auto i = graph.index_of(ref)) members.insert(*i);
  }
  RegionSubgraph sub;
  std::map<std::size_t, std::size_t> local;
  for (std::size_t i : members) {
    local.emplace(i, sub.nodes.size());
    sub.nodes.push_back(graph.nodes[i]);
  }
  for (const auto& arc : graph.arcs) {
    if (members.count(arc.from) && members.count(arc.to)) {
      sub.arcs.push_back({local.at(arc.from), local.at(arc.to), arc.kind});
    }
  }
  return sub;
}

inline RegionSubgraph region_subgraph(const Event& event, const StaticModel& model) {
  return region_subgraph(event, stage_graph(model));
}

struct Successor {
  std::string event;
  Instant at;
  std::size_t edge = 0;  // index into BehaviorGraph::edges

  friend bool operator==(const Successor&, const Successor&) = default;
};

/// Successors of `occ` in edge declaration order. Immediate edges fire at the
/// occurrence's valid_end when unguarded or when the guard holds; timed edges
/// fire unconditionally at valid_end + delay. Guard `$fields` read the
/// occurrence payload. Throws RunError R101 when a guard cannot be evaluated.
inline std::vector<Successor> enabled_successors(const BehaviorGraph& graph, const Occurrence& occ,
                                                 const StoreState& stores) {
  std::vector<Successor> out;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const auto& edge = graph.edges[i];
    if (edge.from != occ.event) continue;
    switch (edge.mode) {
      case BehaviorEdge::Mode::immediate: out.push_back({edge.to, occ.valid_end, i}); break;
      case BehaviorEdge::Mode::timed: out.push_back({edge.to, occ.valid_end + edge.delay, i}); break;
      case BehaviorEdge::Mode::guarded: {
        Value v = eval_expr(*edge.guard, occ.payload, stores);
        auto* b = std::get_if<bool>(&v);
        if (!b) {
          throw RunError("R101", "guard yields " + std::string(to_string(kind_of(v))) + ", not boolean",
                         edge.guard->origin.pos);
        }
        if (*b) out.push_back({edge.to, occ.valid_end, i});
        break;
      }
    }
  }
  return out;
}

}  // namespace tmkit
