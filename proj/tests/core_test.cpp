#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace tmkit;
using support::dec;

namespace {

const char* kSmall = R"(model small {
  thimac A {
    create make = B.total + 1 into B.total
    release out
    transfer send
    thimac Inner {
      receive take
      process work = Inner.count + $n into count
      store count : number = 0
    }
  }
  thimac B {
    transfer arrive
    receive take
    store total : number = 5
    store name : text = "b"
  }
  flow A.make -> A.out
  flow A.out -> A.send
  flow A.send -> B.arrive
  flow B.arrive -> B.take
  flow A.make -> B.total
  trigger B.take ~> A.Inner.take
}
)";

StaticModel small() { return support::must(dsl::parse_model(kSmall, "small.tm"), "small"); }

}  // namespace

TEST(StageKind, RoundTripsThroughText) {
  for (auto k : kAllStageKinds) EXPECT_EQ(parse_stage_kind(to_string(k)), k);
  EXPECT_FALSE(parse_stage_kind("accept").has_value());
}

TEST(QualifiedRef, ParseAndPrint) {
  auto r = QualifiedRef::parse("Bank.System.Validation");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->segments.size(), 3u);
  EXPECT_EQ(r->to_string(), "Bank.System.Validation");
  EXPECT_EQ(r->parent().to_string(), "Bank.System");
  EXPECT_FALSE(QualifiedRef::parse("Bank..System"));
  EXPECT_FALSE(QualifiedRef::parse("1Bank"));
  EXPECT_FALSE(QualifiedRef::parse(""));
}

TEST(Resolve, FindsStagesStoresAndThimacs) {
  auto m = small();
  auto stage = resolve(m, {"A", "Inner", "take"});
  ASSERT_TRUE(stage);
  EXPECT_EQ(stage->kind, EntityKind::stage);
  EXPECT_EQ(stage->stage->kind, StageKind::receive);
  EXPECT_EQ(stage->owner->name, "Inner");

  auto store = resolve(m, {"B", "total"});
  ASSERT_TRUE(store);
  EXPECT_EQ(store->kind, EntityKind::store);

  auto thimac = resolve(m, {"A", "Inner"});
  ASSERT_TRUE(thimac);
  EXPECT_EQ(thimac->kind, EntityKind::thimac);
  EXPECT_EQ(thimac->owner->name, "A");

  EXPECT_FALSE(resolve(m, {"A", "missing"}));
  EXPECT_FALSE(resolve(m, {"Nope"}));
}

TEST(Resolve, ScopedLookupPrefersInnermost) {
  auto m = small();
  EXPECT_EQ(resolve_scoped(m, {"A", "Inner"}, {"count"}), (QualifiedRef{"A", "Inner", "count"}));
  EXPECT_EQ(resolve_scoped(m, {"A", "Inner"}, {"Inner", "count"}), (QualifiedRef{"A", "Inner", "count"}));
  EXPECT_EQ(resolve_scoped(m, {"A"}, {"B", "total"}), (QualifiedRef{"B", "total"}));
  EXPECT_FALSE(resolve_scoped(m, {"A"}, {"count"}));
}

TEST(Parse, AssignmentsAreStoredAbsolute) {
  auto m = small();
  auto work = resolve(m, {"A", "Inner", "work"});
  ASSERT_TRUE(work && work->stage->assignment);
  EXPECT_EQ(to_source(*work->stage->assignment->expr), "A.Inner.count + $n");
  EXPECT_EQ(work->stage->assignment->into, (QualifiedRef{"A", "Inner", "count"}));
}

TEST(ResolveProperty, EveryWalkedEntityResolvesToItself) {
  for (const char* name : {"bank", "flower"}) {
    auto b = support::load_bundle(name);
    auto all = walk(b.model);
    ASSERT_FALSE(all.empty());
    for (const auto& e : all) {
      auto r = resolve(b.model, QualifiedRef::parse(e.path.to_string()).value());
      ASSERT_TRUE(r) << e.path.to_string();
      EXPECT_EQ(r->kind, e.kind) << e.path.to_string();
      EXPECT_EQ(r->path, e.path);
    }
  }
}

TEST(StageGraph, SplitsFlowsTriggersAndStoreWrites) {
  auto m = small();
  auto g = stage_graph(m);
  EXPECT_EQ(g.nodes.size(), 7u);
  std::size_t flows = 0, triggers = 0;
  for (const auto& a : g.arcs) (a.kind == ArcKind::flow ? flows : triggers)++;
  EXPECT_EQ(flows, 4u);
  EXPECT_EQ(triggers, 1u);
  ASSERT_EQ(g.store_writes.size(), 1u);
  EXPECT_EQ(g.nodes[g.store_writes[0].from], (QualifiedRef{"A", "make"}));
}

TEST(Eval, ArithmeticComparisonAndFields) {
  auto m = small();
  auto stores = initial_stores(m);
  FieldMap fields{{"n", dec("2.5")}, {"kind", std::string("x")}};
  auto total = Expr::make_store_ref({"B", "total"});
  auto n = Expr::make_field("n");
  auto sum = Expr::make_binary(BinaryOp::add, total, n);
  EXPECT_EQ(eval_expr(*sum, fields, stores), Value{dec("7.5")});
  auto cmp = Expr::make_binary(BinaryOp::gt, sum, Expr::make_literal(dec("7")));
  EXPECT_EQ(eval_expr(*cmp, fields, stores), Value{true});
  auto eq = Expr::make_binary(BinaryOp::eq, Expr::make_field("kind"), Expr::make_literal(std::string("x")));
  EXPECT_EQ(eval_expr(*eq, fields, stores), Value{true});
}

TEST(Eval, FailuresAreR101) {
  auto m = small();
  auto stores = initial_stores(m);
  auto expect_r101 = [&](const ExprPtr& e) {
    try {
      eval_expr(*e, {}, stores);
      ADD_FAILURE() << "no error for " << to_source(*e);
    } catch (const RunError& err) {
      EXPECT_EQ(err.code(), "R101");
    }
  };
  expect_r101(Expr::make_field("missing"));
  expect_r101(Expr::make_store_ref({"B", "nope"}));
  expect_r101(Expr::make_binary(BinaryOp::add, Expr::make_store_ref({"B", "name"}), Expr::make_literal(dec("1"))));
  expect_r101(Expr::make_binary(BinaryOp::lt, Expr::make_literal(std::string("a")),
                                Expr::make_literal(std::string("b"))));
}

TEST(Eval, ShortCircuitSkipsRightSide) {
  auto stores = initial_stores(small());
  auto f = Expr::make_binary(BinaryOp::eq, Expr::make_literal(dec("1")), Expr::make_literal(dec("2")));
  auto boom = Expr::make_field("missing");
  EXPECT_EQ(eval_expr(*Expr::make_binary(BinaryOp::logical_and, f, boom), {}, stores), Value{false});
}
