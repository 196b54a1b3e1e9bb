#include <gtest/gtest.h>

#include "memschema/schema.hpp"
#include "memschema/textio.hpp"
#include "support/dsl.hpp"
#include "support/generators.hpp"

namespace memschema {
namespace {

using testing::fixture;
using testing::slurp;

MemorySchema build(std::vector<std::string> roots, std::vector<std::string> ids, std::vector<SchemaEdge> edges,
                   std::vector<FsLink> fs = {}) {
  MemorySchema mp;
  mp.name = "m";
  mp.roots = std::move(roots);
  for (const auto& id : ids) mp.nodes.emplace_back(id, std::vector<Slot>{{CaseRelation::action, Word{id}}});
  mp.edges = std::move(edges);
  mp.fs_links = std::move(fs);
  return mp;
}

std::vector<std::string> messages(const MemorySchema& mp) {
  std::vector<std::string> out;
  for (const auto& d : validate_memory_schema(mp)) out.push_back(d.message);
  return out;
}

TEST(Validate, WellFormedTwoRootSchema) {
  auto doc = parse_schema_file(slurp(fixture("morning.mps")));
  EXPECT_TRUE(validate_memory_schema(doc.schemas[0]).empty());
}

TEST(Validate, MultipleParents) {
  auto mp = build({"s1", "s3"}, {"s1", "s2", "s3", "s4"},
                  {{"s1", RelationLabel::part, false, "s4"}, {"s3", RelationLabel::cons, false, "s4"},
                   {"s1", RelationLabel::part, false, "s2"}});
  EXPECT_EQ(messages(mp), (std::vector<std::string>{"node s4: multiple tree parents"}));
}

TEST(Validate, GoalWithoutSupport) {
  auto mp = build({"s1"}, {"s1", "s7"}, {{"s1", RelationLabel::goal, true, "s7"}});
  EXPECT_EQ(messages(mp), (std::vector<std::string>{"goal edge s1->s7: missing FS support"}));
  // A plain goal edge needs no support.
  mp.edges[0].test = false;
  EXPECT_TRUE(messages(mp).empty());
}

TEST(Validate, GoalSupportThroughRootChain) {
  auto mp = build({"s1", "s2"}, {"s1", "s2", "g", "f"},
                  {{"s1", RelationLabel::goal, true, "g"}, {"s2", RelationLabel::part, false, "f"}}, {{"s2", "f"}});
  EXPECT_TRUE(messages(mp).empty());
  auto support = resolve_goal_support(mp, mp.edges[0]);
  ASSERT_TRUE(support);
  EXPECT_EQ(support->chain, (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(support->final_state, "f");
  EXPECT_EQ(support->goal, "g");
  EXPECT_EQ(goal_supports(mp).size(), 1u);
}

TEST(Validate, CyclesOrphansAndDanglingReferences) {
  auto cyc = build({"r"}, {"r", "a", "b"}, {{"a", RelationLabel::part, false, "b"}, {"b", RelationLabel::part, false, "a"}});
  auto m = messages(cyc);
  EXPECT_NE(std::find(m.begin(), m.end(), "node a: cycle in tree edges"), m.end());

  auto orphan = build({"r"}, {"r", "a"}, {});
  EXPECT_EQ(messages(orphan), (std::vector<std::string>{"node a: not reachable from any root"}));

  auto dangling = build({"r"}, {"r"}, {{"r", RelationLabel::part, false, "x"}}, {{"r", "y"}});
  m = messages(dangling);
  EXPECT_NE(std::find(m.begin(), m.end(), "edge r->x: unresolved node x"), m.end());
  EXPECT_NE(std::find(m.begin(), m.end(), "fs r: unresolved node y"), m.end());

  auto into_root = build({"r", "s"}, {"r", "s"}, {{"r", RelationLabel::part, false, "s"}});
  EXPECT_EQ(messages(into_root), (std::vector<std::string>{"node s: root has a tree parent"}));
}

TEST(MemorySchema, RootChainIsImplicit) {
  auto mp = parse_schema_file(slurp(fixture("morning.mps"))).schemas[0];
  auto all = mp.all_edges();
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0], (SchemaEdge{"s1", RelationLabel::sequel, false, "s3"}));
  EXPECT_EQ(mp.tree_edges().size(), 2u);
  EXPECT_EQ(mp.tree(0), (std::vector<std::string>{"s1", "s2"}));
  EXPECT_EQ(mp.tree(1), (std::vector<std::string>{"s3", "s4"}));

  // Restating a root-chain link does not duplicate it.
  mp.edges.push_back({"s1", RelationLabel::sequel, false, "s3"});
  EXPECT_EQ(mp.all_edges().size(), 3u);
  EXPECT_TRUE(validate_memory_schema(mp).empty());
}

TEST(Validate, GeneratedSchemasAreValid) {
  testing::Rng rng(17);
  testing::SchemaShape shape;
  shape.min_roots = 1;
  shape.pre_test = 0.5;
  shape.goal_test = 0.7;
  shape.extra_test = 0.2;
  for (int i = 0; i < 300; ++i) {
    auto g = testing::generate_schema(rng, shape);
    EXPECT_TRUE(validate_memory_schema(g.schema).empty());
    std::size_t covered = 0;
    for (std::size_t r = 0; r < g.schema.roots.size(); ++r) covered += g.schema.tree(r).size();
    EXPECT_EQ(covered, g.schema.nodes.size());
  }
}

}  // namespace
}  // namespace memschema
