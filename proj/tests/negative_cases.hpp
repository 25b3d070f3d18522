#pragma once

// Malformed inputs, each expected to yield one diagnostic code at a known
// position. Shared by the unit tests and the acceptance runner.

#include <string>
#include <vector>

#include "tmkit/tmkit.hpp"

namespace support {

struct NegativeCase {
  std::string name;
  std::string model;
  std::string events;    // empty: not parsed
  std::string behavior;  // empty: not parsed
  std::string code;
  int line;
  int column;
};

/// Parses and validates whatever the case provides, in pipeline order, and
/// returns every diagnostic produced.
inline std::vector<tmkit::Diagnostic> run_pipeline(const NegativeCase& c) {
  std::vector<tmkit::Diagnostic> out;
  auto add = [&](const std::vector<tmkit::Diagnostic>& d) { out.insert(out.end(), d.begin(), d.end()); };
  auto model = tmkit::dsl::parse_model(c.model, "neg.tm");
  if (!model.ok()) {
    add(model.errors());
    return out;
  }
  add(tmkit::validate_static(*model));
  if (c.events.empty()) return out;
  auto layer = tmkit::dsl::parse_events(c.events, *model, "neg.tme");
  if (!layer.ok()) {
    add(layer.errors());
    return out;
  }
  add(tmkit::validate_events(*layer, *model));
  if (c.behavior.empty()) return out;
  auto graph = tmkit::dsl::parse_behavior(c.behavior, *layer, *model, "neg.tmb");
  if (!graph.ok()) add(graph.errors());
  return out;
}

/// True when a diagnostic with the case's code sits at its position.
inline bool reports_expected(const NegativeCase& c, const std::vector<tmkit::Diagnostic>& diags) {
  for (const auto& d : diags) {
    if (d.code == c.code && d.pos.line == c.line && d.pos.column == c.column) return true;
  }
  return false;
}

inline const std::string kNegBase = R"(model neg {
  thimac A {
    create make
    release out
    transfer send
    process work
  }
  thimac B {
    receive take
    process use
  }
  flow A.make -> A.out
  flow A.out -> A.send
  flow A.send -> B.take
  flow B.take -> B.use
  flow A.make -> A.work
)";

inline const std::string kNegEvents = R"(events for neg {
  event E1 over { A.make, A.out, A.send }
  event E2 over { B.take }
  event E3 over { B.use }
}
)";

inline std::vector<NegativeCase> negative_cases() {
  const std::string ok_model = kNegBase + "}\n";
  return {
      // line 17 is the first line after the base flows
      {"illegal flow receive -> create (intra)", kNegBase + "  flow B.take -> A.make\n}\n", "", "", "E050", 17, 3},
      {"illegal flow release -> receive (intra)", kNegBase + "  flow A.out -> A.make\n}\n", "", "", "E050", 17, 3},
      {"illegal flow process -> transfer (intra)", kNegBase + "  flow A.work -> A.send\n}\n", "", "", "E050", 17, 3},
      {"illegal flow release -> receive (inter)", kNegBase + "  flow A.out -> B.take\n}\n", "", "", "E050", 17, 3},
      {"illegal flow release -> release", kNegBase + "  flow A.out -> A.out\n}\n", "", "", "E050", 17, 3},
      {"intra-machine trigger", kNegBase + "  trigger A.make ~> A.work\n}\n", "", "", "E051", 17, 3},
      {"trigger onto a thimac", kNegBase + "  trigger A.make ~> B\n}\n", "", "", "E053", 17, 3},
      {"receive writes a store",
       "model neg {\n  thimac A {\n    receive r\n    store s : number = 0\n  }\n  flow A.r -> A.s\n}\n", "", "",
       "E052", 6, 3},
      {"unresolved flow endpoint", kNegBase + "  flow A.make -> A.ghost\n}\n", "", "", "E011", 17, 18},
      {"empty region", ok_model, "events for neg {\n  event E1 over { }\n}\n", "", "E022", 2, 3},
      {"refinement cycle", ok_model,
       "events for neg {\n  event E1 refines E2 over { A.make }\n  event E2 refines E1 over { A.out }\n}\n", "",
       "E062", 2, 3},
      {"refines unknown event", ok_model, "events for neg {\n  event E1 refines E9 over { A.make }\n}\n", "",
       "E020", 2, 20},
      {"region names a store",
       "model neg {\n  thimac A {\n    create c = 1 into s\n    store s : number = 0\n  }\n  flow A.c -> A.s\n}\n",
       "events for neg {\n  event E1 over { A.c, A.s }\n}\n", "", "E021", 2, 24},
      {"unknown behavior node", ok_model, kNegEvents, "behavior for neg {\n  start E1 on A.send\n  E1 -> E7\n}\n",
       "E030", 3, 9},
      {"zero timer", ok_model, kNegEvents, "behavior for neg {\n  start E1 on A.send\n  E1 -> E2 after 0\n}\n",
       "E031", 3, 18},
      {"negative timer", ok_model, kNegEvents,
       "behavior for neg {\n  start E1 on A.send\n  E1 -> E2 after -5\n}\n", "E031", 3, 18},
      {"behavior without start", ok_model, kNegEvents, "behavior for neg {\n  E1 -> E2\n}\n", "E032", 1, 1},
      {"syntax error", "model neg {\n  thimac A {\n    create\n  }\n}\n", "", "", "E002", 4, 3},
      {"lexical error", "model neg {\n  thimac A ? {\n  }\n}\n", "", "", "E001", 2, 12},
  };
}

}  // namespace support
