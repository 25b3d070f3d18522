#include <gtest/gtest.h>

#include "support.hpp"

using namespace tmkit;

namespace {

std::size_t thimac_count(const StaticModel& m) {
  std::size_t n = 0;
  for (const auto& e : walk(m)) n += e.kind == EntityKind::thimac;
  return n;
}

void expect_static_counts(const StaticModel& m, const support::DotSummary& s) {
  ASSERT_TRUE(s.well_formed) << s.error;
  EXPECT_EQ(s.nodes, stages_of(m).size() + stores_of(m).size());
  EXPECT_EQ(s.edges, m.flows.size() + m.triggers.size());
  EXPECT_EQ(s.dashed_edges, m.triggers.size());
  EXPECT_EQ(s.clusters, thimac_count(m));
}

}  // namespace

TEST(NaturalOrder, DigitRunsCompareNumerically) {
  EXPECT_TRUE(natural_less("E2", "E10"));
  EXPECT_TRUE(natural_less("E3", "E3a"));
  EXPECT_TRUE(natural_less("E3f", "E4"));
  EXPECT_FALSE(natural_less("E10", "E9"));
  EXPECT_FALSE(natural_less("E1", "E1"));
}

TEST(DotStatic, EmptyModel) {
  StaticModel m;
  m.name = "empty";
  auto s = support::summarize_dot(dot_static(m));
  ASSERT_TRUE(s.well_formed) << s.error;
  EXPECT_EQ(s.nodes, 0u);
  EXPECT_EQ(s.edges, 0u);
}

TEST(DotStatic, CorpusCountsMatchTheModel) {
  for (const char* name : {"bank", "flower"}) {
    auto b = support::load_bundle(name);
    expect_static_counts(b.model, support::summarize_dot(dot_static(b.model)));
  }
}

TEST(DotStatic, DepositClusterInFlowOrder) {
  auto b = support::load_bundle("bank");
  auto dot = dot_static(b.model);
  auto cluster = dot.find("subgraph \"cluster_Bank.Deposit\"");
  ASSERT_NE(cluster, std::string::npos);
  auto receive = dot.find("\"Bank.Deposit.account\" [label=\"receive\\naccount\"", cluster);
  auto process = dot.find("\"Bank.Deposit.mix\" [label=\"process\\nmix\"", cluster);
  auto create = dot.find("\"Bank.Deposit.create_new\" [label=\"create\\ncreate_new\"", cluster);
  ASSERT_NE(receive, std::string::npos);
  ASSERT_NE(process, std::string::npos);
  ASSERT_NE(create, std::string::npos);
  EXPECT_LT(receive, process);
  EXPECT_LT(process, create);
  EXPECT_NE(dot.find("\"Bank.Account.value\" [label=\"value: number\", shape=cylinder]"), std::string::npos);
}

TEST(DotEvents, SingleEventFillsExactlyItsRegion) {
  auto b = support::load_bundle("bank");
  auto s = support::summarize_dot(dot_events(b.model, b.layer, std::string("E14")));
  expect_static_counts(b.model, s);
  EXPECT_EQ(s.filled_nodes, 3u);
  EXPECT_EQ(s.fill_colors.size(), 1u);
  for (const auto& id : s.filled_ids) EXPECT_EQ(id.rfind("\"Bank.Deposit.", 0), 0u) << id;
}

TEST(DotEvents, AllEventsFillEveryCoveredStage) {
  for (const char* name : {"bank", "flower"}) {
    auto b = support::load_bundle(name);
    auto s = support::summarize_dot(dot_events(b.model, b.layer));
    expect_static_counts(b.model, s);
    // every stage is covered in both corpora
    EXPECT_EQ(s.filled_nodes, stages_of(b.model).size());
  }
}

TEST(DotEvents, UnknownEventThrows) {
  auto b = support::load_bundle("bank");
  EXPECT_THROW(dot_events(b.model, b.layer, std::string("E99")), std::invalid_argument);
}

TEST(DotBehavior, BankGraph) {
  auto b = support::load_bundle("bank");
  auto dot = dot_behavior(b.layer, b.graph);
  auto s = support::summarize_dot(dot);
  ASSERT_TRUE(s.well_formed) << s.error;
  EXPECT_EQ(s.nodes, 14u);
  EXPECT_EQ(s.edges, b.graph.edges.size());
  std::size_t guarded_from_e5 = 0;
  for (std::size_t pos = 0; (pos = dot.find("\"E5\" -> ", pos)) != std::string::npos; ++pos) {
    auto line_end = dot.find('\n', pos);
    guarded_from_e5 += dot.substr(pos, line_end - pos).find("label=\"when ") != std::string::npos;
  }
  EXPECT_EQ(guarded_from_e5, 3u);
  EXPECT_NE(dot.find("\"E5\" [label=\"E5\", peripheries=2]"), std::string::npos);
}

TEST(DotBehavior, FlowerTimedEdgeLabel) {
  auto b = support::load_bundle("flower");
  auto dot = dot_behavior(b.layer, b.graph);
  auto s = support::summarize_dot(dot);
  ASSERT_TRUE(s.well_formed) << s.error;
  EXPECT_EQ(s.nodes, b.layer.events.size());
  EXPECT_EQ(s.edges, b.graph.edges.size());
  EXPECT_NE(dot.find("\"E6\" -> \"E8\" [label=\"after 120s\"]"), std::string::npos);
  EXPECT_NE(dot.find("label=\"when $bids == 0\""), std::string::npos);
}

TEST(DotChecker, RejectsMalformedText) {
  EXPECT_FALSE(support::summarize_dot("digraph x { a; ").well_formed);
  EXPECT_FALSE(support::summarize_dot("digraph x { a -> b; }").well_formed);
  EXPECT_FALSE(support::summarize_dot("digraph x { \"a ; }").well_formed);
  EXPECT_TRUE(support::summarize_dot("digraph x { a; b; a -> b [style=dashed]; }").well_formed);
}
