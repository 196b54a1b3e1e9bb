#include <gtest/gtest.h>

#include <random>

#include "memschema/memory.hpp"
#include "memschema/sequence.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace memschema {
namespace {

MemoryState fresh(std::initializer_list<const char*> ids) {
  std::set<std::string> known;
  for (auto id : ids) known.insert(id);
  return MemoryState(known);
}

InstanceEdge edge(const char* from, RelationLabel label, const char* to, bool test = false) {
  return {from, label, test, to, std::string(from) + "->" + to};
}

TEST(AssertTrue, Examples) {
  auto s = assert_true(fresh({"e1", "e2"}), "e1");
  EXPECT_EQ(s.truths(), (std::set<std::string>{"e1"}));
  EXPECT_EQ(assert_true(s, "e1"), s);
  EXPECT_THROW(assert_true(s, "e9"), UnknownEvent);
}

TEST(Query, ClosedWorld) {
  auto s = fresh({"e1"});
  EXPECT_FALSE(query(s, "e1"));
  EXPECT_TRUE(query(assert_true(s, "e1"), "e1"));
  EXPECT_THROW(query(s, "e2"), UnknownEvent);
}

TEST(RulePre, Examples) {
  Instance inst;
  inst.edges.push_back(edge("e1", RelationLabel::pre, "e2", true));
  auto s = fresh({"e1", "e2"});
  EXPECT_EQ(rule_pre_discharge(s, inst), s);
  auto t = rule_pre_discharge(assert_true(s, "e2"), inst);
  EXPECT_TRUE(t.has_edge("e1", RelationLabel::pre, "e2"));
  EXPECT_FALSE(query(t, "e1"));  // rule ① confirms the relation only

  Instance plain;
  plain.edges.push_back(edge("e1", RelationLabel::pre, "e2"));
  auto u = assert_true(s, "e2");
  EXPECT_EQ(rule_pre_discharge(u, plain), u);
}

TEST(RuleGoal, Examples) {
  Instance inst;
  inst.goals.push_back({{"a", "b"}, "g", "f", "goal"});
  auto base = fresh({"a", "b", "g", "f"});
  auto chain_true = assert_true(assert_true(base, "a"), "b");

  auto out = rule_goal_discharge(assert_true(chain_true, "f"), inst);
  EXPECT_TRUE(query(out, "g"));
  EXPECT_TRUE(out.has_edge("a", RelationLabel::goal, "g"));

  EXPECT_EQ(rule_goal_discharge(chain_true, inst), chain_true);
  auto partial = assert_true(assert_true(base, "a"), "f");
  EXPECT_EQ(rule_goal_discharge(partial, inst), partial);
}

TEST(RulePropagate, Examples) {
  Instance inst;
  inst.edges.push_back(edge("e1", RelationLabel::part, "e2"));
  auto s = fresh({"e1", "e2"});
  EXPECT_EQ(rule_propagate(s, inst), s);
  auto t = rule_propagate(assert_true(s, "e1"), inst);
  EXPECT_TRUE(query(t, "e2"));
  EXPECT_TRUE(t.has_edge("e1", RelationLabel::part, "e2"));

  Instance marked;
  marked.edges.push_back(edge("e1", RelationLabel::cons, "e2", true));
  auto u = assert_true(s, "e1");
  EXPECT_EQ(rule_propagate(u, marked), u);
}

TEST(RunFixpoint, TransitiveChain) {
  Instance inst;
  inst.edges.push_back(edge("e1", RelationLabel::sequel, "e2"));
  inst.edges.push_back(edge("e2", RelationLabel::sequel, "e3"));
  auto s = run_fixpoint(assert_true(fresh({"e1", "e2", "e3"}), "e1"), inst);
  EXPECT_EQ(s.truths(), (std::set<std::string>{"e1", "e2", "e3"}));
  EXPECT_EQ(s.edges().size(), 2u);
}

TEST(RunFixpoint, NoAssertionsNoChange) {
  Instance inst;
  inst.edges.push_back(edge("e1", RelationLabel::sequel, "e2"));
  auto s = fresh({"e1", "e2"});
  EXPECT_EQ(run_fixpoint(s, inst), s);
}

// The goal's chain becomes True only through rule ③; rule ② must still fire.
TEST(RunFixpoint, GoalAfterPropagation) {
  Instance inst;
  inst.edges.push_back(edge("a", RelationLabel::sequel, "b"));
  inst.edges.push_back(edge("b", RelationLabel::accompany, "f"));
  inst.edges.push_back(edge("a", RelationLabel::goal, "g", true));
  inst.edges.push_back(edge("g", RelationLabel::cons, "h"));
  inst.goals.push_back({{"a", "b"}, "g", "f", "goal"});
  auto start = assert_true(fresh({"a", "b", "f", "g", "h"}), "a");
  Trace trace;
  auto s = run_fixpoint(start, inst, &trace);
  EXPECT_EQ(s.truths(), (std::set<std::string>{"a", "b", "f", "g", "h"}));
  EXPECT_TRUE(s.has_edge("a", RelationLabel::goal, "g"));
  ASSERT_FALSE(trace.empty());
  EXPECT_EQ(trace.front(), "RULE③ a->b => b True, (a sequel b)");
  EXPECT_EQ(trace.size(), 4u);

  // Exhaustive orders on this instance: every permutation of single-edge moves agrees.
  std::mt19937 rng(1);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(testing::random_order_fixpoint(start, inst, rng), s);
}

TEST(RunFixpoint, RegistersImpliedEvents) {
  Instance inst;
  inst.edges.push_back(edge("e1", RelationLabel::cons, "mp.n4"));
  inst.implied_events.push_back("mp.n4");
  auto s = run_fixpoint(assert_true(fresh({"e1"}), "e1"), inst);
  EXPECT_TRUE(query(s, "mp.n4"));
}

// Instances taken from generated schemas, each node standing for its own event.
std::vector<std::pair<MemoryState, Instance>> generated_instances(std::uint32_t seed, int count) {
  testing::Rng rng(seed);
  testing::SchemaShape shape;
  shape.min_roots = 1;
  shape.pre_test = 0.5;
  shape.goal_test = 0.5;
  shape.extra_test = 0.15;
  std::vector<std::pair<MemoryState, Instance>> out;
  for (int i = 0; i < count; ++i) {
    auto g = testing::generate_schema(rng, shape);
    auto result = testing::full_match(g.schema);
    Instance inst = build_instance(g.schema, result);
    std::set<std::string> known;
    for (const auto& n : g.schema.nodes) known.insert("e_" + n.id());
    MemoryState s(known);
    for (const auto& id : known)
      if (rng.chance(0.3)) s = assert_true(s, id);
    out.emplace_back(s, inst);
  }
  return out;
}

TEST(RunFixpoint, MonotoneIdempotentConfluent) {
  std::mt19937 order(5);
  for (const auto& [s, inst] : generated_instances(21, 150)) {
    auto fix = run_fixpoint(s, inst);
    EXPECT_TRUE(testing::subset_of(s, fix));
    EXPECT_EQ(run_fixpoint(fix, inst), fix);
    for (int k = 0; k < 5; ++k) EXPECT_EQ(testing::random_order_fixpoint(s, inst, order), fix);
    // Each single-pass rule is monotone too.
    EXPECT_TRUE(testing::subset_of(s, rule_pre_discharge(s, inst)));
    EXPECT_TRUE(testing::subset_of(s, rule_goal_discharge(s, inst)));
    EXPECT_TRUE(testing::subset_of(s, rule_propagate(s, inst)));
  }
}

// With only "$" edges and no truths among their targets, nothing gets confirmed.
TEST(RunFixpoint, TestFactorOpacity) {
  testing::Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    Instance inst;
    std::set<std::string> known, targets;
    const int n = rng.uniform(2, 7);
    for (int k = 0; k < n; ++k) known.insert("e" + std::to_string(k));
    for (int k = 0; k < n; ++k) {
      std::string from = "e" + std::to_string(rng.uniform(0, n - 1));
      std::string to = "e" + std::to_string(rng.uniform(0, n - 1));
      auto label = rng.chance(0.5) ? RelationLabel::pre : RelationLabel::cons;
      inst.edges.push_back({from, label, true, to, "x"});
      targets.insert(to);
    }
    MemoryState s(known);
    for (const auto& id : known)
      if (!targets.count(id) && rng.chance(0.5)) s = assert_true(s, id);
    auto fix = run_fixpoint(s, inst);
    EXPECT_TRUE(fix.edges().empty());
    EXPECT_EQ(fix.truths(), s.truths());
  }
}

}  // namespace
}  // namespace memschema
