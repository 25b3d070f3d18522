#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmkit/core.hpp"
#include "tmkit/dynamics.hpp"
#include "tmkit/engine.hpp"
#include "tmkit/temporal.hpp"

namespace tmkit {

// ---------------------------------------------------------------------------
// Graphviz DOT

enum class RenderView { static_model, events, behavior };

inline std::optional<RenderView> parse_render_view(std::string_view s) {
  if (s == "static") return RenderView::static_model;
  if (s == "events") return RenderView::events;
  if (s == "behavior") return RenderView::behavior;
  return std::nullopt;
}

/// Digit runs compare numerically: E2 < E3a < E10.
inline bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      auto na = a.substr(i, ie - i), nb = b.substr(j, je - j);
      na.erase(0, std::min(na.find_first_not_of('0'), na.size()));
      nb.erase(0, std::min(nb.find_first_not_of('0'), nb.size()));
      if (na.size() != nb.size()) return na.size() < nb.size();
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

/// Region fill colors, assigned by event id in natural order.
inline constexpr std::array<const char*, 12> kRegionPalette = {
    "#fbb4ae", "#b3cde3", "#ccebc5", "#decbe4", "#fed9a6", "#ffffcc",
    "#e5d8bd", "#fddaec", "#b3e2cd", "#fdcdac", "#cbd5e8", "#f4cae4"};

namespace detail {

inline std::string dot_id(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

inline void emit_cluster(std::ostream& os, const Thimac& t, const QualifiedRef& path,
                         const std::map<QualifiedRef, std::string>& fills, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  os << pad << "subgraph " << dot_id("cluster_" + path.to_string()) << " {\n";
  os << pad << "  label=" << dot_id(t.name) << ";\n";
  for (const auto& s : t.stages) {
    auto ref = path.child(s.name);
    os << pad << "  " << dot_id(ref.to_string()) << " [label=" << dot_id(std::string(to_string(s.kind)) + "\n" + s.name)
       << ", shape=box";
    if (auto it = fills.find(ref); it != fills.end()) {
      os << ", style=\"rounded,filled\", fillcolor=" << dot_id(it->second);
    } else {
      os << ", style=rounded";
    }
    os << "];\n";
  }
  for (const auto& s : t.stores) {
    os << pad << "  " << dot_id(path.child(s.name).to_string())
       << " [label=" << dot_id(s.name + ": " + std::string(to_string(s.value_kind))) << ", shape=cylinder];\n";
  }
  for (const auto& c : t.children) emit_cluster(os, c, path.child(c.name), fills, depth + 1);
  os << pad << "}\n";
}

inline std::string emit_model(const StaticModel& model, const std::map<QualifiedRef, std::string>& fills) {
  std::ostringstream os;
  os << "digraph " << dot_id(model.name) << " {\n";
  os << "  compound=true;\n";
  os << "  node [fontname=\"Helvetica\"];\n";
  for (const auto& r : model.roots) emit_cluster(os, r, QualifiedRef{r.name}, fills, 1);
  for (const auto& f : model.flows) {
    os << "  " << dot_id(f.from.to_string()) << " -> " << dot_id(f.to.to_string()) << ";\n";
  }
  for (const auto& t : model.triggers) {
    os << "  " << dot_id(t.from.to_string()) << " -> " << dot_id(t.to.to_string()) << " [style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace detail

/// One nested cluster per thimac, a box per stage (label: kind and name), a
/// cylinder per store, solid edges for flows and dashed edges for triggers.
inline std::string dot_static(const StaticModel& model) { return detail::emit_model(model, {}); }

/// dot_static with region stages filled. `event` selects one event; nullopt
/// selects all, in which case a stage takes the color of the first event (in
/// natural id order) that covers it. Throws std::invalid_argument for an
/// unknown event.
inline std::string dot_events(const StaticModel& model, const EventLayer& layer,
                              const std::optional<std::string>& event = std::nullopt) {
  std::vector<const Event*> ordered;
  for (const auto& e : layer.events) ordered.push_back(&e);
  std::sort(ordered.begin(), ordered.end(), [](const Event* a, const Event* b) { return natural_less(a->id, b->id); });

  std::map<QualifiedRef, std::string> fills;
  bool found = false;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (event && ordered[i]->id != *event) continue;
    found = true;
    for (const auto& ref : ordered[i]->region) fills.emplace(ref, kRegionPalette[i % kRegionPalette.size()]);
  }
  if (event && !found) throw std::invalid_argument("unknown event " + *event);
  return detail::emit_model(model, fills);
}

/// One node per event (start events drawn with a double border); edge labels
/// are "when <guard>" or "after <N>s".
inline std::string dot_behavior(const EventLayer& layer, const BehaviorGraph& graph) {
  std::ostringstream os;
  os << "digraph " << detail::dot_id(graph.model + "_behavior") << " {\n";
  os << "  node [fontname=\"Helvetica\", shape=ellipse];\n";
  for (const auto& e : layer.events) {
    bool start = std::any_of(graph.starts.begin(), graph.starts.end(),
                             [&](const StartBinding& s) { return s.event == e.id; });
    os << "  " << detail::dot_id(e.id) << " [label=" << detail::dot_id(e.id);
    if (start) os << ", peripheries=2";
    os << "];\n";
  }
  for (const auto& e : graph.edges) {
    os << "  " << detail::dot_id(e.from) << " -> " << detail::dot_id(e.to);
    if (e.mode == BehaviorEdge::Mode::guarded) {
      os << " [label=" << detail::dot_id("when " + to_source(*e.guard)) << "]";
    } else if (e.mode == BehaviorEdge::Mode::timed) {
      os << " [label=" << detail::dot_id("after " + e.delay.seconds().to_compact_string() + "s") << "]";
    }
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Canonical DSL text. References are printed fully qualified; reparsing the
// output yields a structurally equal value.

namespace detail {

inline std::string literal_source(const Literal& v) {
  if (auto* d = std::get_if<Decimal>(&v)) return d->to_compact_string();
  return quote(std::get<std::string>(v));
}

inline void thimac_source(std::ostream& os, const Thimac& t, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  os << pad << "thimac " << t.name << " {\n";
  for (const auto& s : t.stages) {
    os << pad << "  " << to_string(s.kind) << ' ' << s.name;
    if (s.assignment) {
      os << " = " << to_source(*s.assignment->expr);
      if (s.assignment->into) os << " into " << s.assignment->into->to_string();
    }
    if (s.label) os << ' ' << quote(*s.label);
    os << '\n';
  }
  for (const auto& s : t.stores) {
    os << pad << "  store " << s.name << " : " << to_string(s.value_kind) << " = " << literal_source(s.initial) << '\n';
  }
  for (const auto& c : t.children) thimac_source(os, c, depth + 1);
  os << pad << "}\n";
}

}  // namespace detail

inline std::string to_source(const StaticModel& m) {
  std::ostringstream os;
  os << "model " << m.name << " {\n";
  for (const auto& r : m.roots) detail::thimac_source(os, r, 1);
  for (const auto& f : m.flows) os << "  flow " << f.from.to_string() << " -> " << f.to.to_string() << '\n';
  for (const auto& t : m.triggers) os << "  trigger " << t.from.to_string() << " ~> " << t.to.to_string() << '\n';
  os << "}\n";
  return os.str();
}

inline std::string to_source(const EventLayer& layer) {
  std::ostringstream os;
  os << "events for " << layer.model << " {\n";
  for (const auto& e : layer.events) {
    os << "  event " << e.id;
    if (e.refines) os << " refines " << *e.refines;
    os << " over {";
    for (std::size_t i = 0; i < e.region.size(); ++i) os << (i ? ", " : " ") << e.region[i].to_string();
    os << " }";
    if (e.duration != Interval{}) os << " lasts " << e.duration.seconds().to_compact_string();
    if (!e.payload.empty()) {
      os << " payload {";
      for (std::size_t i = 0; i < e.payload.size(); ++i) {
        const auto& c = e.payload[i];
        os << (i ? ", " : " ") << c.name << ": "
           << (c.source.kind == PayloadSource::Kind::field ? "$" + c.source.field : c.source.store.to_string());
      }
      os << " }";
    }
    os << '\n';
  }
  os << "}\n";
  return os.str();
}

inline std::string to_source(const BehaviorGraph& g) {
  std::ostringstream os;
  os << "behavior for " << g.model << " {\n";
  for (const auto& s : g.starts) os << "  start " << s.event << " on " << s.stage.to_string() << '\n';
  for (const auto& e : g.edges) {
    os << "  " << e.from << " -> " << e.to;
    if (e.mode == BehaviorEdge::Mode::guarded) os << " when " << to_source(*e.guard);
    if (e.mode == BehaviorEdge::Mode::timed) os << " after " << e.delay.seconds().to_compact_string();
    os << '\n';
  }
  os << "}\n";
  return os.str();
}

inline std::string to_source(const Scenario& sc) {
  std::ostringstream os;
  os << "scenario " << sc.name << " for " << sc.model << " {\n";
  for (const auto& st : sc.stimuli) {
    os << "  at " << st.at.seconds().to_compact_string() << ": inject " << st.target.to_string() << " {";
    for (std::size_t i = 0; i < st.fields.size(); ++i) {
      os << (i ? ", " : " ") << st.fields[i].first << " = " << detail::literal_source(st.fields[i].second);
    }
    os << " }";
    if (st.urgency) os << " urgency " << quote(*st.urgency);
    os << '\n';
  }
  os << "}\n";
  return os.str();
}

inline std::string to_source(const MonitorSpec& spec) {
  if (spec.mode == MonitorSpec::Mode::all) return "monitor all\n";
  std::ostringstream os;
  for (const auto& sel : spec.selections) {
    os << "monitor " << quote(sel.key_template) << " on {";
    for (std::size_t i = 0; i < sel.events.size(); ++i) os << (i ? ", " : " ") << sel.events[i];
    os << " } capture {";
    for (std::size_t i = 0; i < sel.captures.size(); ++i) os << (i ? ", " : " ") << sel.captures[i];
    os << (sel.captures.empty() ? "}" : " }") << '\n';
  }
  return os.str();
}

}  // namespace tmkit
