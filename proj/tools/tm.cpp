// tm: check, render, simulate and query thinging-machine models.
//
// Exit codes: 0 ok, 1 diagnostics with errors, 2 usage, 3 runtime (R1xx/T2xx).

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tmkit/tmkit.hpp"

namespace {

enum Exit { kOk = 0, kDiagnostics = 1, kUsage = 2, kRuntime = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text) || !out.flush()) throw UsageError("cannot write " + path);
}

tmkit::Instant parse_instant(const std::string& text) {
  auto d = tmkit::Decimal::parse(text);
  if (!d || *d < tmkit::Decimal{}) throw UsageError("not a non-negative time: " + text);
  return tmkit::Instant{*d};
}

/// Everything parsed so far. Later stages are skipped once an earlier one
/// fails, since they depend on it.
struct Pipeline {
  std::optional<tmkit::StaticModel> model;
  std::optional<tmkit::EventLayer> layer;
  std::optional<tmkit::BehaviorGraph> graph;
  std::optional<tmkit::Scenario> scenario;
  std::optional<tmkit::MonitorSpec> monitor;
  std::vector<tmkit::Diagnostic> diags;

  template <typename T>
  std::optional<T> take(tmkit::Parsed<T> p) {
    if (!p.ok()) {
      diags.insert(diags.end(), p.errors().begin(), p.errors().end());
      return std::nullopt;
    }
    return std::move(p).value();
  }

  void add(const std::vector<tmkit::Diagnostic>& more) { diags.insert(diags.end(), more.begin(), more.end()); }

  bool failed() const { return tmkit::has_errors(diags); }

  void report() {
    tmkit::sort_diagnostics(diags);
    for (const auto& d : diags) std::cerr << tmkit::format_diagnostic(d) << '\n';
  }
};

struct Inputs {
  std::string model, events, behavior, scenario, monitor;
};

Pipeline load(const Inputs& in) {
  Pipeline p;
  p.model = p.take(tmkit::dsl::parse_model(read_file(in.model), in.model));
  if (!p.model) return p;
  p.add(tmkit::validate_static(*p.model));
  if (in.events.empty()) return p;

  p.layer = p.take(tmkit::dsl::parse_events(read_file(in.events), *p.model, in.events));
  if (!p.layer) return p;
  p.add(tmkit::validate_events(*p.layer, *p.model));
  p.add(tmkit::coverage_lint(*p.layer, *p.model));

  if (!in.behavior.empty()) {
    p.graph = p.take(tmkit::dsl::parse_behavior(read_file(in.behavior), *p.layer, *p.model, in.behavior));
  }
  if (!in.scenario.empty()) {
    p.scenario = p.take(tmkit::dsl::parse_scenario(read_file(in.scenario), *p.model, in.scenario));
  }
  if (!in.monitor.empty()) {
    p.monitor = p.take(tmkit::dsl::parse_monitor(read_file(in.monitor), *p.layer, in.monitor));
  }
  return p;
}

/// Sorts positional files into their roles by extension.
Inputs classify(const std::vector<std::string>& files) {
  Inputs in;
  for (const auto& f : files) {
    const auto ext = std::filesystem::path(f).extension().string();
    std::string* slot = ext == ".tm"    ? &in.model
                        : ext == ".tme" ? &in.events
                        : ext == ".tmb" ? &in.behavior
                        : ext == ".tms" ? &in.scenario
                        : ext == ".tmm" ? &in.monitor
                                        : nullptr;
    if (!slot) throw UsageError("unknown file kind: " + f + " (expected .tm, .tme, .tmb, .tms or .tmm)");
    if (!slot->empty()) throw UsageError("more than one " + ext + " file given");
    *slot = f;
  }
  if (in.model.empty()) throw UsageError("check needs a .tm model file");
  if (in.events.empty() && !(in.behavior.empty() && in.monitor.empty())) {
    throw UsageError("behavior and monitor files need a .tme event file");
  }
  return in;
}

int cmd_check(const std::vector<std::string>& files) {
  auto p = load(classify(files));
  p.report();
  return p.failed() ? kDiagnostics : kOk;
}

struct RenderArgs {
  std::string model, events, behavior, view, event, out;
};

int cmd_render(const RenderArgs& a) {
  auto view = tmkit::parse_render_view(a.view);
  if (!view) throw UsageError("unknown view " + a.view + " (expected static, events or behavior)");
  if (*view != tmkit::RenderView::static_model && a.events.empty()) throw UsageError("--events is required");
  if (*view == tmkit::RenderView::behavior && a.behavior.empty()) throw UsageError("--behavior is required");
  if (!a.event.empty() && *view != tmkit::RenderView::events) throw UsageError("--event applies to --view events");

  Inputs in{a.model, a.events, *view == tmkit::RenderView::behavior ? a.behavior : "", "", ""};
  auto p = load(in);
  p.report();
  if (p.failed()) return kDiagnostics;

  std::string dot;
  switch (*view) {
    case tmkit::RenderView::static_model:
      dot = tmkit::dot_static(*p.model);
      break;
    case tmkit::RenderView::events: {
      std::optional<std::string> sel;
      if (!a.event.empty()) {
        if (!p.layer->find(a.event)) throw UsageError("unknown event " + a.event);
        sel = a.event;
      }
      dot = tmkit::dot_events(*p.model, *p.layer, sel);
      break;
    }
    case tmkit::RenderView::behavior:
      dot = tmkit::dot_behavior(*p.layer, *p.graph);
      break;
  }
  write_file(a.out, dot);
  return kOk;
}

struct SimArgs {
  Inputs in;
  bool monitor_all = false;
  std::string out, trace;
  std::size_t max_occurrences = tmkit::EngineOptions{}.max_occurrences;
};

int cmd_sim(const SimArgs& a) {
  auto p = load(a.in);
  p.report();
  if (p.failed()) return kDiagnostics;

  tmkit::EngineOptions options;
  options.max_occurrences = a.max_occurrences;
  if (a.monitor_all) {
    options.monitor = tmkit::MonitorSpec::monitor_all();
  } else {
    options.monitor = p.monitor;
  }

  tmkit::RunResult result;
  try {
    result = tmkit::run(*p.model, *p.layer, *p.graph, *p.scenario, options);
  } catch (const tmkit::RunError& e) {
    std::cerr << e.describe() << '\n';
    return kRuntime;
  }
  for (const auto& w : result.trace.warnings) std::cerr << tmkit::format_diagnostic(w) << '\n';

  if (!a.trace.empty()) {
    std::ostringstream os;
    tmkit::write_trace(os, result.trace);
    write_file(a.trace, os.str());
  }
  if (!a.out.empty()) {
    std::ostringstream os;
    tmkit::write_records(os, result.records);
    write_file(a.out, os.str());
  }
  return kOk;
}

struct QueryArgs {
  std::string db, key, as_of, snapshot;
  bool history = false;
  std::optional<std::int64_t> as_known;
};

int cmd_query(const QueryArgs& a) {
  const int modes = !a.as_of.empty() + a.history + a.as_known.has_value() + !a.snapshot.empty();
  if (modes != 1) throw UsageError("give exactly one of --as-of, --history, --as-known, --snapshot");
  if (a.snapshot.empty() && a.key.empty()) throw UsageError("--key is required");

  tmkit::TemporalStore store;
  {
    std::ifstream in(a.db, std::ios::binary);
    if (!in) throw UsageError("cannot read " + a.db);
    try {
      store = tmkit::read_records(in);
    } catch (const std::runtime_error& e) {
      throw UsageError(a.db + ": " + e.what());
    }
  }

  std::vector<tmkit::TemporalRecord> out;
  if (!a.snapshot.empty()) {
    out = store.snapshot(parse_instant(a.snapshot));
  } else if (!a.as_of.empty()) {
    if (auto r = store.as_of(a.key, parse_instant(a.as_of))) out.push_back(*r);
  } else if (a.history) {
    out = store.history(a.key);
  } else {
    out = store.as_known_at(a.key, *a.as_known);
  }
  tmkit::write_records(std::cout, out);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thinging-machine toolkit: check, render, simulate and query models"};
  app.require_subcommand(1);

  std::vector<std::string> check_files;
  auto* check = app.add_subcommand("check", "Validate model files and print diagnostics");
  check->add_option("files", check_files, "Model (.tm), events (.tme), behavior (.tmb), scenario (.tms), monitor (.tmm)")
      ->required();

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Write Graphviz DOT for a model view");
  render->add_option("--model", ra.model, "Static model (.tm)")->required();
  render->add_option("--events", ra.events, "Event layer (.tme)");
  render->add_option("--behavior", ra.behavior, "Behavior graph (.tmb)");
  render->add_option("--view", ra.view, "static, events or behavior")->required();
  render->add_option("--event", ra.event, "Highlight one event (events view)");
  render->add_option("--out", ra.out, "Output DOT file")->required();

  SimArgs sa;
  auto* sim = app.add_subcommand("sim", "Run a scenario and write the trace and temporal records");
  sim->add_option("--model", sa.in.model, "Static model (.tm)")->required();
  sim->add_option("--events", sa.in.events, "Event layer (.tme)")->required();
  sim->add_option("--behavior", sa.in.behavior, "Behavior graph (.tmb)")->required();
  sim->add_option("--scenario", sa.in.scenario, "Scenario (.tms)")->required();
  auto* mon = sim->add_option("--monitor", sa.in.monitor, "Monitor spec (.tmm)");
  sim->add_flag("--monitor-all", sa.monitor_all, "Record every occurrence")->excludes(mon);
  sim->add_option("--out", sa.out, "Temporal record file");
  sim->add_option("--trace", sa.trace, "Occurrence trace file");
  sim->add_option("--max-occurrences", sa.max_occurrences, "Occurrence limit")->check(CLI::PositiveNumber);

  QueryArgs qa;
  std::int64_t as_known = 0;
  auto* query = app.add_subcommand("query", "Query a temporal record file");
  query->add_option("--db", qa.db, "Temporal record file")->required();
  query->add_option("--key", qa.key, "Record key");
  query->add_option("--as-of", qa.as_of, "Latest record valid at time T");
  query->add_flag("--history", qa.history, "Every record for the key");
  auto* known = query->add_option("--as-known", as_known, "Records appended up to transaction SEQ");
  query->add_option("--snapshot", qa.snapshot, "as-of T over every key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*check) return cmd_check(check_files);
    if (*render) return cmd_render(ra);
    if (*sim) return cmd_sim(sa);
    if (known->count() > 0) qa.as_known = as_known;
    return cmd_query(qa);
  } catch (const UsageError& e) {
    std::cerr << "tm: " << e.what() << '\n';
    return kUsage;
  }
}
