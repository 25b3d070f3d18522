#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "tmkit/core.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/eval.hpp"
#include "tmkit/io.hpp"
#include "tmkit/temporal.hpp"

namespace tmkit {

/// External input: fields injected at a transfer stage at a given instant.
struct Stimulus {
  Instant at;
  QualifiedRef target;
  FieldMap fields;
  std::optional<std::string> urgency;
  Origin origin;

  friend bool operator==(const Stimulus&, const Stimulus&) = default;
};

struct Scenario {
  std::string name;
  std::string model;
  std::vector<Stimulus> stimuli;
  Origin origin;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Trace {
  std::vector<Occurrence> occurrences;
  StoreState final_stores;
  std::vector<Diagnostic> warnings;  // W080, W081
};

struct EngineOptions {
  std::size_t max_occurrences = 10000;
  std::optional<MonitorSpec> monitor;
};

struct RunResult {
  Trace trace;
  TemporalStore records;
};

/// Region stages in execution order: topological over the region subgraph,
/// ties (and cycles) broken by declaration order.
inline std::vector<QualifiedRef> execution_order(const RegionSubgraph& sub) {
  const std::size_t n = sub.nodes.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& a : sub.arcs) {
    if (a.from == a.to) continue;
    out[a.from].push_back(a.to);
    ++indegree[a.to];
  }
  std::vector<bool> done(n, false);
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  std::vector<QualifiedRef> order;
  while (order.size() < n) {
    std::size_t next;
    if (!ready.empty()) {
      next = *ready.begin();
      ready.erase(ready.begin());
    } else {
      // Cycle: take the earliest remaining stage.
      next = 0;
      while (done[next]) ++next;
    }
    done[next] = true;
    order.push_back(sub.nodes[next]);
    for (std::size_t m : out[next]) {
      if (!done[m] && indegree[m] > 0 && --indegree[m] == 0) ready.insert(m);
    }
  }
  return order;
}

/// Fires one event at `clock`: runs the region's assignments in execution
/// order, writing `into` stores immediately, then captures the payload.
/// Sequence number and cause are left for the caller.
inline Occurrence execute_event(const StaticModel& model, const StageGraph& graph, const Event& event,
                                const FieldMap& stimulus_fields, StoreState& stores, Instant clock) {
  for (const auto& ref : execution_order(region_subgraph(event, graph))) {
    auto r = resolve(model, ref);
    if (!r || r->kind != EntityKind::stage || !r->stage->assignment) continue;
    const Assignment& asg = *r->stage->assignment;
    Value v = eval_expr(*asg.expr, stimulus_fields, stores);
    if (!asg.into) continue;
    auto target = resolve(model, *asg.into);
    if (!target || target->kind != EntityKind::store) {
      throw RunError("R101", "assignment target " + asg.into->to_string() + " is not a store",
                     r->stage->origin.pos);
    }
    const Store& store = *target->store;
    if (std::holds_alternative<bool>(v) ||
        (store.value_kind == StoreKind::number) != std::holds_alternative<Decimal>(v)) {
      throw RunError("R101",
                     "cannot write " + std::string(to_string(kind_of(v))) + " into " +
                         std::string(to_string(store.value_kind)) + " store " + asg.into->to_string(),
                     asg.expr->origin.pos);
    }
    stores[*asg.into] = std::holds_alternative<Decimal>(v) ? Literal{std::get<Decimal>(v)}
                                                           : Literal{std::get<std::string>(v)};
  }

  Occurrence occ;
  occ.event = event.id;
  occ.valid_start = clock;
  occ.valid_end = clock + event.duration;
  occ.duration = event.duration;
  for (const auto& cap : event.payload) {
    if (cap.source.kind == PayloadSource::Kind::field) {
      const Literal* v = find_field(stimulus_fields, cap.source.field);
      if (!v) throw RunError("R101", "missing field $" + cap.source.field + " for payload " + cap.name, cap.origin.pos);
      occ.payload.emplace_back(cap.name, *v);
    } else {
      auto it = stores.find(cap.source.store);
      if (it == stores.end()) {
        throw RunError("R101", "unknown store " + cap.source.store.to_string(), cap.origin.pos);
      }
      occ.payload.emplace_back(cap.name, it->second);
    }
  }
  return occ;
}

/// Deterministic discrete-event executor. Pending items are ordered by
/// (time, insertion counter); stimuli are inserted first, in scenario order.
class Engine {
 public:
  Engine(const StaticModel& model, const EventLayer& layer, const BehaviorGraph& graph)
      : model_(model), layer_(layer), graph_(graph), stage_graph_(stage_graph(model)) {}

  RunResult run(const Scenario& scenario, const EngineOptions& options = {}) const {
    RunResult result;
    StoreState stores = initial_stores(model_);
    std::priority_queue<Item, std::vector<Item>, Later> pending;
    std::size_t counter = 0;

    for (std::size_t i = 0; i < scenario.stimuli.size(); ++i) {
      pending.push({scenario.stimuli[i].at, counter++, i, std::nullopt});
    }

    while (!pending.empty()) {
      Item item = pending.top();
      pending.pop();
      const Stimulus& root = scenario.stimuli[item.stimulus];

      std::string event_id;
      Cause cause;
      if (item.firing) {
        event_id = item.firing->event;
        cause = {Cause::Kind::occurrence, item.firing->predecessor};
      } else {
        const StartBinding* start = graph_.start_for(root.target);
        if (!start) {
          result.trace.warnings.push_back(make_warning(
              "W081", "stimulus targets " + root.target.to_string() + " which has no start binding",
              root.origin.pos));
          continue;
        }
        event_id = start->event;
        cause = {Cause::Kind::stimulus, item.stimulus};
      }

      if (result.trace.occurrences.size() >= options.max_occurrences) {
        throw RunError("R100", "more than " + std::to_string(options.max_occurrences) +
                                   " occurrences (possible behavior cycle)");
      }
      const Event* event = layer_.find(event_id);
      if (!event) throw RunError("R101", "unknown event " + event_id);

      Occurrence occ = execute_event(model_, stage_graph_, *event, root.fields, stores, item.time);
      occ.seq = result.trace.occurrences.size();
      occ.urgency = root.urgency;
      occ.cause = cause;

      if (options.monitor) {
        for (auto& rec : meta_record(occ, *options.monitor)) result.records.append(std::move(rec));
      }

      auto successors = enabled_successors(graph_, occ, stores);
      if (successors.empty()) {
        for (const auto& e : graph_.edges) {
          if (e.from == occ.event) {
            result.trace.warnings.push_back(make_warning(
                "W080", "no successor of " + occ.event + " enabled at occurrence " + std::to_string(occ.seq),
                e.origin.pos));
            break;
          }
        }
      }
      for (auto& s : successors) {
        pending.push({s.at, counter++, item.stimulus, Firing{std::move(s.event), occ.seq}});
      }
      result.trace.occurrences.push_back(std::move(occ));
    }
    result.trace.final_stores = std::move(stores);
    return result;
  }

 private:
  struct Firing {
    std::string event;
    std::size_t predecessor;
  };
  struct Item {
    Instant time;
    std::size_t counter;
    std::size_t stimulus;  // root stimulus of the chain
    std::optional<Firing> firing;
  };
  struct Later {
    bool operator()(const Item& a, const Item& b) const {
      return std::tie(a.time, a.counter) > std::tie(b.time, b.counter);
    }
  };

  const StaticModel& model_;
  const EventLayer& layer_;
  const BehaviorGraph& graph_;
  StageGraph stage_graph_;
};

/// Runs a scenario. Inputs are expected to have passed validation. Throws
/// RunError (R100, R101, T200).
inline RunResult run(const StaticModel& model, const EventLayer& layer, const BehaviorGraph& graph,
                     const Scenario& scenario, const EngineOptions& options = {}) {
  return Engine(model, layer, graph).run(scenario, options);
}

// ---------------------------------------------------------------------------
// Trace file: one JSON object per line with fields
// seq, event, valid_start, valid_end, duration, payload, urgency, cause.

inline std::string format_occurrence(const Occurrence& o) {
  std::string out = "{\"seq\":" + std::to_string(o.seq);
  out += ",\"event\":" + io::json_string(o.event);
  out += ",\"valid_start\":" + o.valid_start.to_string();
  out += ",\"valid_end\":" + o.valid_end.to_string();
  out += ",\"duration\":" + o.duration.to_string();
  out += ",\"payload\":" + io::json_fields(o.payload);
  out += ",\"urgency\":" + (o.urgency ? io::json_string(*o.urgency) : std::string("null"));
  out += ",\"cause\":{\"";
  out += o.cause.kind == Cause::Kind::stimulus ? "stimulus" : "occurrence";
  out += "\":" + std::to_string(o.cause.index) + "}}";
  return out;
}

inline void write_trace(std::ostream& os, const Trace& trace) {
  for (const auto& o : trace.occurrences) os << format_occurrence(o) << '\n';
}

}  // namespace tmkit
