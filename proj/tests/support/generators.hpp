#ifndef MEMSCHEMA_TESTS_GENERATORS_HPP
#define MEMSCHEMA_TESTS_GENERATORS_HPP

// Random memory schemas and corpora for property tests. Everything is
// driven by an explicit std::mt19937 so failures reproduce from the seed.

#include <algorithm>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "memschema/core.hpp"
#include "memschema/document.hpp"
#include "memschema/schema.hpp"
#include "memschema/sequence.hpp"

namespace memschema::testing {

class Rng {
public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  bool chance(double p) { return std::bernoulli_distribution(p)(gen_); }

  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), gen_);
  }

  std::mt19937& engine() { return gen_; }

private:
  std::mt19937 gen_;
};

inline SlotValue w(const std::string& s) { return Word{s}; }
inline SlotValue var(const std::string& s) { return Var{s}; }

struct SchemaShape {
  int min_roots = 2;
  int max_roots = 3;
  int max_nodes = 8;
  int actions = 6;           // action vocabulary size; small values make nodes ambiguous
  double pre_test = 0.0;     // chance of one pre-$ edge
  double goal_test = 0.0;    // chance of one goal-$ edge with FS support
  double extra_test = 0.0;   // chance of a $ on any other tree edge (never discharged)
};

struct GeneratedSchema {
  MemorySchema schema;
  std::map<std::string, std::string> parent;  // non-root node -> tree parent
  std::string pre_target;                     // target of the pre-$ edge, if any
};

inline std::set<std::string> subtree(const GeneratedSchema& g, const std::string& top) {
  std::set<std::string> out{top};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& [child, par] : g.parent)
      if (out.count(par) && out.insert(child).second) grew = true;
  }
  return out;
}

/*
 * A valid memory schema. Every node is {actor: ?P, action: <word>} plus an
 * optional obj slot (a word, ?O, or a nested clause with ?S).
 */
inline GeneratedSchema generate_schema(Rng& rng, const SchemaShape& shape, const std::string& name = "mp") {
  static const std::vector<RelationLabel> labels = {
      RelationLabel::inherit, RelationLabel::accompany, RelationLabel::part, RelationLabel::pre,
      RelationLabel::goal,    RelationLabel::cause,     RelationLabel::cons, RelationLabel::sequel};
  GeneratedSchema g;
  MemorySchema& mp = g.schema;
  mp.name = name;
  const int k = rng.uniform(shape.min_roots, shape.max_roots);
  const int total = rng.uniform(k, std::max(k, shape.max_nodes));

  auto make_node = [&](const std::string& id) {
    std::vector<Slot> slots{{CaseRelation::actor, var("P")},
                            {CaseRelation::action, w("act" + std::to_string(rng.uniform(1, shape.actions)))}};
    switch (rng.uniform(0, 4)) {
      case 0: slots.push_back({CaseRelation::obj, w(rng.chance(0.5) ? "book" : "bread")}); break;
      case 1: slots.push_back({CaseRelation::obj, var("O")}); break;
      case 2:
        slots.push_back({CaseRelation::obj, SlotValue(EventExpression("", {{CaseRelation::actor, var("S")},
                                                                           {CaseRelation::action, w("come")}}))});
        break;
      default: break;
    }
    return EventExpression(id, std::move(slots));
  };

  for (int i = 0; i < k; ++i) {
    mp.roots.push_back("r" + std::to_string(i));
    mp.nodes.push_back(make_node(mp.roots.back()));
  }
  std::vector<std::string> placed = mp.roots;
  for (int i = 0; i < total - k; ++i) {
    std::string id = "t" + std::to_string(i);
    std::string par = rng.pick(placed);
    mp.nodes.push_back(make_node(id));
    mp.edges.push_back({par, rng.pick(labels), false, id});
    g.parent[id] = par;
    placed.push_back(id);
  }

  std::vector<std::size_t> free_edges(mp.edges.size());
  for (std::size_t i = 0; i < free_edges.size(); ++i) free_edges[i] = i;
  rng.shuffle(free_edges);

  if (!free_edges.empty() && rng.chance(shape.pre_test)) {
    auto& e = mp.edges[free_edges.back()];
    free_edges.pop_back();
    e.label = RelationLabel::pre;
    e.test = true;
    g.pre_target = e.to;
  }
  if (!free_edges.empty() && rng.chance(shape.goal_test)) {
    auto& e = mp.edges[free_edges.back()];
    const auto banned = subtree(g, e.to);
    std::vector<std::string> finals;
    for (const auto& n : mp.nodes)
      if (!banned.count(n.id())) finals.push_back(n.id());
    if (!finals.empty()) {
      free_edges.pop_back();
      e.label = RelationLabel::goal;
      e.test = true;
      mp.fs_links.push_back({e.from, rng.pick(finals)});
    }
  }
  for (std::size_t i : free_edges)
    if (mp.edges[i].label != RelationLabel::goal && rng.chance(shape.extra_test)) mp.edges[i].test = true;
  return g;
}

struct GeneratedCase {
  GeneratedSchema generated;
  CorpusDocument corpus;
  std::vector<std::string> assertions;  // first root's event plus pre-$ evidence
  std::map<std::string, std::string> event_of;  // schema node -> corpus event
};

/*
 * A corpus instantiated from the schema: each root's event followed by its
 * tree's events in random order. Some non-root nodes (never a $ target) are
 * left out and must be confirmed; a whole non-first tree may be left out.
 */
inline GeneratedCase generate_case(Rng& rng, const SchemaShape& shape, double omit_node = 0.15, double omit_tree = 0.1) {
  GeneratedCase c;
  c.generated = generate_schema(rng, shape);
  const MemorySchema& mp = c.generated.schema;

  Substitution s;
  s.bind("P", w(rng.chance(0.5) ? "kim" : "pak"));
  s.bind("O", w(rng.chance(0.5) ? "book" : "letter"));
  s.bind("S", w(rng.chance(0.5) ? "seller" : "friend"));

  std::set<std::string> protected_nodes;
  if (!c.generated.pre_target.empty()) protected_nodes = subtree(c.generated, c.generated.pre_target);
  for (const auto& e : mp.edges)
    if (e.test) protected_nodes.insert(e.to);

  int next_id = 1;
  for (std::size_t i = 0; i < mp.roots.size(); ++i) {
    auto tree = mp.tree(i);
    bool tree_protected = std::any_of(tree.begin(), tree.end(), [&](const std::string& n) { return protected_nodes.count(n); });
    if (i > 0 && !tree_protected && rng.chance(omit_tree)) continue;
    std::vector<std::string> rest(tree.begin() + 1, tree.end());
    rng.shuffle(rest);
    std::vector<std::string> order{tree.front()};
    for (const auto& n : rest)
      if (protected_nodes.count(n) || !rng.chance(omit_node)) order.push_back(n);
    for (const auto& n : order) {
      std::string id = "e" + std::to_string(next_id++);
      c.corpus.events.push_back(apply_substitution(*mp.node(n), s).with_id(id));
      c.event_of[n] = id;
    }
  }
  c.assertions.push_back(c.event_of.at(mp.roots.front()));
  if (!c.generated.pre_target.empty()) c.assertions.push_back(c.event_of.at(c.generated.pre_target));
  return c;
}

/* Maps every node to its own synthetic event, for exercising the rules on a whole schema. */
inline MatchResult full_match(const MemorySchema& mp) {
  MatchResult r;
  r.schema = mp.name;
  for (std::size_t i = 0; i < mp.roots.size(); ++i) r.anchors.push_back({mp.roots[i], i, "e_" + mp.roots[i]});
  for (const auto& n : mp.nodes)
    if (!mp.is_root(n.id())) r.node_map[n.id()] = "e_" + n.id();
  r.goal_supports = goal_supports(mp);
  return r;
}

/* Random edits of a corpus: drops, duplicates, swaps and unrelated events; at most `max_len` events. */
inline CorpusDocument perturb(Rng& rng, CorpusDocument c, std::size_t max_len) {
  int edits = rng.uniform(0, 3);
  for (int i = 0; i < edits && !c.events.empty(); ++i) {
    auto at = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(c.events.size()) - 1));
    switch (rng.uniform(0, 3)) {
      case 0: c.events.erase(c.events.begin() + static_cast<std::ptrdiff_t>(at)); break;
      case 1: c.events.insert(c.events.begin() + static_cast<std::ptrdiff_t>(at), c.events[at]); break;
      case 2: {
        auto other = static_cast<std::size_t>(rng.uniform(0, static_cast<int>(c.events.size()) - 1));
        std::swap(c.events[at], c.events[other]);
        break;
      }
      default:
        c.events.insert(c.events.begin() + static_cast<std::ptrdiff_t>(at),
                        EventExpression("", {{CaseRelation::actor, w("lee")}, {CaseRelation::action, w("sleep")}}));
    }
  }
  if (c.events.size() > max_len) c.events.resize(max_len);
  for (std::size_t i = 0; i < c.events.size(); ++i) c.events[i] = c.events[i].with_id("e" + std::to_string(i + 1));
  return c;
}

/*
 * Every (schema, event) pair over the relations actor/action/obj with words
 * {a, b, c, d}, variables {X, Y}, and obj optionally a nested clause
 * {actor: ...}. Calls f(schema, event) for each pair.
 */
template <class F>
void for_each_small_pair(F&& f) {
  const std::vector<std::string> words = {"a", "b", "c", "d"};
  const std::vector<std::string> vars = {"X", "Y"};

  std::vector<std::optional<SlotValue>> flat_schema{std::nullopt}, flat_event{std::nullopt};
  for (const auto& x : words) {
    flat_schema.push_back(w(x));
    flat_event.push_back(w(x));
  }
  for (const auto& v : vars) flat_schema.push_back(var(v));

  auto nested = [](const SlotValue& v) { return SlotValue(EventExpression("", {{CaseRelation::actor, v}})); };
  std::vector<std::optional<SlotValue>> obj_schema = flat_schema, obj_event = flat_event;
  for (const auto& x : words) {
    obj_schema.push_back(nested(w(x)));
    obj_event.push_back(nested(w(x)));
  }
  for (const auto& v : vars) obj_schema.push_back(nested(var(v)));

  auto build = [](const std::string& id, const std::optional<SlotValue>& a, const std::optional<SlotValue>& b,
                  const std::optional<SlotValue>& c) {
    std::vector<Slot> slots;
    if (a) slots.push_back({CaseRelation::actor, *a});
    if (b) slots.push_back({CaseRelation::action, *b});
    if (c) slots.push_back({CaseRelation::obj, *c});
    return EventExpression(id, std::move(slots));
  };

  std::vector<EventExpression> schemas, events;
  for (const auto& a : flat_schema)
    for (const auto& b : flat_schema)
      for (const auto& c : obj_schema) schemas.push_back(build("s", a, b, c));
  for (const auto& a : flat_event)
    for (const auto& b : flat_event)
      for (const auto& c : obj_event) events.push_back(build("e", a, b, c));

  for (const auto& s : schemas)
    for (const auto& e : events) f(s, e);
}

}  // namespace memschema::testing

#endif
