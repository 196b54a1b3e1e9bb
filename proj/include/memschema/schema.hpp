#ifndef MEMSCHEMA_SCHEMA_HPP
#define MEMSCHEMA_SCHEMA_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "memschema/core.hpp"
#include "memschema/errors.hpp"

namespace memschema {

/* A labeled relation between two schema nodes; `test` is the "$" factor. */
struct SchemaEdge {
  std::string from;
  RelationLabel label = RelationLabel::sequel;
  bool test = false;
  std::string to;

  friend bool operator==(const SchemaEdge&, const SchemaEdge&) = default;
};

inline std::string to_string(const SchemaEdge& e) {
  return e.from + "-" + std::string(to_string(e.label)) + (e.test ? "$" : "") + "->" + e.to;
}

struct FsLink {
  std::string from;
  std::string to;

  friend bool operator==(const FsLink&, const FsLink&) = default;
};

/*
 * Structure needed to discharge a goal edge carrying "$":
 *   source -goal$-> goal,  source -sequel-> ... -sequel-> chain.back(),
 *   FS(chain.back()) = final_state.
 * chain.front() is always the goal edge's source.
 */
struct GoalSupport {
  std::string source;
  std::string goal;
  std::vector<std::string> chain;
  std::string final_state;

  friend bool operator==(const GoalSupport&, const GoalSupport&) = default;
};

/*
 * A memory schema: a forest of event-schema trees whose roots form a
 * sequel chain in `roots` order. Nodes are event expressions whose id is
 * the node id. Declared edges are kept in source order; the root sequel
 * chain is implicit and only appears in all_edges().
 */
class MemorySchema {
public:
  std::string name;
  std::vector<EventExpression> nodes;
  std::vector<std::string> roots;
  std::vector<SchemaEdge> edges;
  std::vector<FsLink> fs_links;

  // Source positions keyed by "schema", "roots", "node:<id>", "edge:<index>",
  // "fs:<index>". Not part of equality.
  std::map<std::string, Location> locations;

  const EventExpression* node(const std::string& id) const {
    for (const auto& n : nodes)
      if (n.id() == id) return &n;
    return nullptr;
  }

  bool has_node(const std::string& id) const { return node(id) != nullptr; }

  bool is_root(const std::string& id) const { return std::find(roots.begin(), roots.end(), id) != roots.end(); }

  std::optional<std::size_t> root_index(const std::string& id) const {
    auto it = std::find(roots.begin(), roots.end(), id);
    if (it == roots.end()) return std::nullopt;
    return static_cast<std::size_t>(it - roots.begin());
  }

  std::optional<std::string> fs_of(const std::string& id) const {
    for (const auto& l : fs_links)
      if (l.from == id) return l.to;
    return std::nullopt;
  }

  std::vector<SchemaEdge> root_chain() const {
    std::vector<SchemaEdge> out;
    for (std::size_t i = 0; i + 1 < roots.size(); ++i)
      out.push_back({roots[i], RelationLabel::sequel, false, roots[i + 1]});
    return out;
  }

  bool is_root_chain_edge(const SchemaEdge& e) const {
    auto i = root_index(e.from);
    auto j = root_index(e.to);
    return i && j && *j == *i + 1 && e.label == RelationLabel::sequel && !e.test;
  }

  // Root sequel chain followed by declared edges; a declared edge that
  // restates a root-chain link is not repeated.
  std::vector<SchemaEdge> all_edges() const {
    std::vector<SchemaEdge> out = root_chain();
    for (const auto& e : edges)
      if (!is_root_chain_edge(e)) out.push_back(e);
    return out;
  }

  // Declared edges that build the trees (everything except root-chain links).
  std::vector<SchemaEdge> tree_edges() const {
    std::vector<SchemaEdge> out;
    for (const auto& e : edges)
      if (!is_root_chain_edge(e)) out.push_back(e);
    return out;
  }

  // Nodes of the tree rooted at roots[index], root first, then preorder in
  // edge declaration order.
  std::vector<std::string> tree(std::size_t index) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    const auto te = tree_edges();
    std::vector<std::string> stack{roots.at(index)};
    while (!stack.empty()) {
      std::string n = stack.back();
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      out.push_back(n);
      std::vector<std::string> children;
      for (const auto& e : te)
        if (e.from == n && !is_root(e.to)) children.push_back(e.to);
      for (auto it = children.rbegin(); it != children.rend(); ++it) stack.push_back(*it);
    }
    return out;
  }

  Location location_of(const std::string& key) const {
    auto it = locations.find(key);
    return it == locations.end() ? Location{} : it->second;
  }

  friend bool operator==(const MemorySchema& a, const MemorySchema& b) {
    if (a.name != b.name || a.roots != b.roots || a.edges != b.edges || a.fs_links != b.fs_links) return false;
    if (a.nodes.size() != b.nodes.size()) return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i)
      if (!identical(a.nodes[i], b.nodes[i])) return false;
    return true;
  }
};

/*
 * Finds the support of a goal edge: a simple sequel path from the edge
 * source (first found in edge order, depth first) ending at a node with an
 * fs link.
 */
inline std::optional<GoalSupport> resolve_goal_support(const MemorySchema& mp, const SchemaEdge& goal_edge) {
  const auto all = mp.all_edges();
  std::vector<std::string> path{goal_edge.from};
  std::optional<GoalSupport> found;

  auto dfs = [&](auto&& self, const std::string& at) -> bool {
    if (auto fs = mp.fs_of(at); fs && mp.has_node(*fs)) {
      found = GoalSupport{goal_edge.from, goal_edge.to, path, *fs};
      return true;
    }
    for (const auto& e : all) {
      if (e.from != at || e.label != RelationLabel::sequel) continue;
      if (std::find(path.begin(), path.end(), e.to) != path.end()) continue;
      path.push_back(e.to);
      if (self(self, e.to)) return true;
      path.pop_back();
    }
    return false;
  };
  if (!mp.has_node(goal_edge.from)) return std::nullopt;
  dfs(dfs, goal_edge.from);
  return found;
}

inline std::vector<GoalSupport> goal_supports(const MemorySchema& mp) {
  std::vector<GoalSupport> out;
  for (const auto& e : mp.all_edges())
    if (e.label == RelationLabel::goal && e.test)
      if (auto s = resolve_goal_support(mp, e)) out.push_back(*s);
  return out;
}

/*
 * Checks the structural invariants of a memory schema. Returns one
 * diagnostic per violation; empty means valid.
 */
inline std::vector<Diagnostic> validate_memory_schema(const MemorySchema& mp) {
  std::vector<Diagnostic> out;
  auto report = [&](const std::string& key, std::string msg) { out.push_back({mp.location_of(key), std::move(msg)}); };

  if (!is_identifier(mp.name)) report("schema", "schema name '" + mp.name + "' is not an identifier");

  std::set<std::string> ids;
  for (const auto& n : mp.nodes) {
    if (!is_identifier(n.id())) report("node:" + n.id(), "node id '" + n.id() + "' is not an identifier");
    if (!ids.insert(n.id()).second) report("node:" + n.id(), "node " + n.id() + ": duplicate node id");
  }

  if (mp.roots.empty()) report("roots", "schema " + mp.name + ": no roots");
  std::set<std::string> root_set;
  for (const auto& r : mp.roots) {
    if (!ids.count(r)) report("roots", "roots: unresolved node " + r);
    if (!root_set.insert(r).second) report("roots", "roots: node " + r + " listed twice");
  }

  std::map<std::string, int> parents;
  std::vector<SchemaEdge> usable;
  for (std::size_t i = 0; i < mp.edges.size(); ++i) {
    const auto& e = mp.edges[i];
    const std::string key = "edge:" + std::to_string(i);
    bool ok = true;
    for (const auto* end : {&e.from, &e.to}) {
      if (!ids.count(*end)) {
        report(key, "edge " + e.from + "->" + e.to + ": unresolved node " + *end);
        ok = false;
      }
    }
    if (!ok) continue;
    if (mp.is_root_chain_edge(e)) continue;
    if (root_set.count(e.to)) {
      report(key, "node " + e.to + ": root has a tree parent");
      continue;
    }
    if (e.from == e.to) {
      report(key, "edge " + e.from + "->" + e.to + ": self loop");
      continue;
    }
    usable.push_back(e);
    if (++parents[e.to] == 2) report(key, "node " + e.to + ": multiple tree parents");
  }

  // Reachability from roots over tree edges; whatever is left is either
  // orphaned or sits on a cycle.
  std::set<std::string> reached;
  std::vector<std::string> stack;
  for (const auto& r : mp.roots)
    if (ids.count(r)) stack.push_back(r);
  while (!stack.empty()) {
    std::string n = stack.back();
    stack.pop_back();
    if (!reached.insert(n).second) continue;
    for (const auto& e : usable)
      if (e.from == n) stack.push_back(e.to);
  }
  for (const auto& n : mp.nodes) {
    if (reached.count(n.id()) || root_set.count(n.id())) continue;
    // Walk up the unique-parent chain looking for a return to n.
    bool cyclic = false;
    std::string at = n.id();
    for (std::size_t steps = 0; steps <= mp.nodes.size(); ++steps) {
      auto it = std::find_if(usable.begin(), usable.end(), [&](const SchemaEdge& e) { return e.to == at; });
      if (it == usable.end()) break;
      at = it->from;
      if (at == n.id()) {
        cyclic = true;
        break;
      }
    }
    report("node:" + n.id(), "node " + n.id() + (cyclic ? ": cycle in tree edges" : ": not reachable from any root"));
  }

  std::set<std::string> fs_sources;
  for (std::size_t i = 0; i < mp.fs_links.size(); ++i) {
    const auto& l = mp.fs_links[i];
    const std::string key = "fs:" + std::to_string(i);
    if (!ids.count(l.from)) report(key, "fs " + l.from + ": unresolved node " + l.from);
    if (!ids.count(l.to)) report(key, "fs " + l.from + ": unresolved node " + l.to);
    if (!fs_sources.insert(l.from).second) report(key, "fs " + l.from + ": declared twice");
  }

  for (std::size_t i = 0; i < mp.edges.size(); ++i) {
    const auto& e = mp.edges[i];
    if (e.label != RelationLabel::goal || !e.test) continue;
    if (!ids.count(e.from) || !ids.count(e.to)) continue;
    if (!resolve_goal_support(mp, e))
      report("edge:" + std::to_string(i), "goal edge " + e.from + "->" + e.to + ": missing FS support");
  }
  return out;
}

}  // namespace memschema

#endif
