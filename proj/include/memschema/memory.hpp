#ifndef MEMSCHEMA_MEMORY_HPP
#define MEMSCHEMA_MEMORY_HPP

#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "memschema/core.hpp"
#include "memschema/errors.hpp"

namespace memschema {

struct ConfirmedEdge {
  std::string from;
  RelationLabel label = RelationLabel::sequel;
  std::string to;

  friend bool operator==(const ConfirmedEdge&, const ConfirmedEdge&) = default;
  friend auto operator<=>(const ConfirmedEdge&, const ConfirmedEdge&) = default;
};

/*
 * The Memory mapping of one understanding session: which events are known
 * True (closed world, everything else is False) and which event-level
 * relations have been confirmed. Both sets only grow.
 *
 * `known` holds the ids a session may talk about: corpus events plus the
 * implied events instantiated from confirmed schema nodes.
 */
class MemoryState {
public:
  MemoryState() = default;
  explicit MemoryState(std::set<std::string> known) : known_(std::move(known)) {}

  const std::set<std::string>& known() const { return known_; }
  const std::set<std::string>& truths() const { return truths_; }
  const std::set<ConfirmedEdge>& edges() const { return edges_; }

  bool knows(const std::string& id) const { return known_.count(id) != 0; }

  void register_event(const std::string& id) { known_.insert(id); }

  // Unchecked mutators used by the rules; callers validate ids.
  bool add_truth(const std::string& id) { return truths_.insert(id).second; }
  bool add_edge(const ConfirmedEdge& e) { return edges_.insert(e).second; }

  bool has_edge(const std::string& from, RelationLabel label, const std::string& to) const {
    return edges_.count(ConfirmedEdge{from, label, to}) != 0;
  }

  friend bool operator==(const MemoryState&, const MemoryState&) = default;

private:
  std::set<std::string> known_;
  std::set<std::string> truths_;
  std::set<ConfirmedEdge> edges_;
};

inline MemoryState assert_true(MemoryState state, const std::string& id) {
  if (!state.knows(id)) throw UnknownEvent(id);
  state.add_truth(id);
  return state;
}

inline bool query(const MemoryState& state, const std::string& id) {
  if (!state.knows(id)) throw UnknownEvent(id);
  return state.truths().count(id) != 0;
}

/* A schema edge projected onto the events its endpoints were instantiated with. */
struct InstanceEdge {
  std::string from;
  RelationLabel label = RelationLabel::sequel;
  bool test = false;
  std::string to;
  std::string origin;  // schema-level edge, for traces
};

/* Goal support projected onto events: chain[0] -goal$-> goal, FS(chain.back()) = final_state. */
struct InstanceGoal {
  std::vector<std::string> chain;
  std::string goal;
  std::string final_state;
  std::string origin;
};

/*
 * A matched schema as seen by the rules: every edge and goal support with
 * endpoints replaced by event ids. Several instances can be concatenated.
 */
struct Instance {
  std::vector<InstanceEdge> edges;
  std::vector<InstanceGoal> goals;
  std::vector<std::string> implied_events;

  void append(const Instance& other) {
    edges.insert(edges.end(), other.edges.begin(), other.edges.end());
    goals.insert(goals.end(), other.goals.begin(), other.goals.end());
    implied_events.insert(implied_events.end(), other.implied_events.begin(), other.implied_events.end());
  }
};

using Trace = std::vector<std::string>;

namespace detail {

inline std::string edge_effect(const std::string& from, RelationLabel label, const std::string& to) {
  return "(" + from + " " + std::string(to_string(label)) + " " + to + ")";
}

inline void note(Trace* trace, const char* rule, const std::string& origin, const std::string& effect) {
  if (trace) trace->push_back(std::string("RULE") + rule + " " + origin + " => " + effect);
}

inline void register_implied(MemoryState& state, const Instance& instance) {
  for (const auto& id : instance.implied_events) state.register_event(id);
}

// Rule 1 on a single edge. Returns true if the state changed.
inline bool fire_pre(MemoryState& s, const InstanceEdge& e, Trace* trace) {
  if (!e.test || e.label != RelationLabel::pre) return false;
  if (!s.truths().count(e.to)) return false;
  if (!s.add_edge({e.from, RelationLabel::pre, e.to})) return false;
  note(trace, "①", e.origin, edge_effect(e.from, RelationLabel::pre, e.to));
  return true;
}

// Rule 2 on a single goal support.
inline bool fire_goal(MemoryState& s, const InstanceGoal& g, Trace* trace) {
  for (const auto& c : g.chain)
    if (!s.truths().count(c)) return false;
  if (!s.truths().count(g.final_state)) return false;
  bool t = s.add_truth(g.goal);
  bool e = s.add_edge({g.chain.front(), RelationLabel::goal, g.goal});
  if (!t && !e) return false;
  std::string effect = t ? g.goal + " True" : std::string();
  if (e) effect += (effect.empty() ? "" : ", ") + edge_effect(g.chain.front(), RelationLabel::goal, g.goal);
  note(trace, "②", g.origin, effect);
  return true;
}

// Rule 3 on a single edge.
inline bool fire_propagate(MemoryState& s, const InstanceEdge& e, Trace* trace) {
  if (e.test) return false;
  if (!s.truths().count(e.from)) return false;
  bool t = s.add_truth(e.to);
  bool c = s.add_edge({e.from, e.label, e.to});
  if (!t && !c) return false;
  std::string effect = t ? e.to + " True" : std::string();
  if (c) effect += (effect.empty() ? "" : ", ") + edge_effect(e.from, e.label, e.to);
  note(trace, "③", e.origin, effect);
  return true;
}

}  // namespace detail

/*
 * Single passes of the three rules, each over every edge (or goal
 * support) of the instance once, in instance order.
 */
inline MemoryState rule_pre_discharge(MemoryState state, const Instance& instance, Trace* trace = nullptr) {
  detail::register_implied(state, instance);
  for (const auto& e : instance.edges) detail::fire_pre(state, e, trace);
  return state;
}

inline MemoryState rule_goal_discharge(MemoryState state, const Instance& instance, Trace* trace = nullptr) {
  detail::register_implied(state, instance);
  for (const auto& g : instance.goals) detail::fire_goal(state, g, trace);
  return state;
}

inline MemoryState rule_propagate(MemoryState state, const Instance& instance, Trace* trace = nullptr) {
  detail::register_implied(state, instance);
  for (const auto& e : instance.edges) detail::fire_propagate(state, e, trace);
  return state;
}

/*
 * Least fixpoint of the three rules, driven by a worklist of events that
 * became True. Initial truths are visited in id order, later ones in the
 * order they were derived.
 */
inline MemoryState run_fixpoint(MemoryState state, const Instance& instance, Trace* trace = nullptr) {
  detail::register_implied(state, instance);

  std::map<std::string, std::vector<std::size_t>> outgoing;  // plain edges by source
  std::map<std::string, std::vector<std::size_t>> pre_into;  // $pre edges by target
  std::map<std::string, std::vector<std::size_t>> goal_uses; // goals by participant
  for (std::size_t i = 0; i < instance.edges.size(); ++i) {
    const auto& e = instance.edges[i];
    if (!e.test)
      outgoing[e.from].push_back(i);
    else if (e.label == RelationLabel::pre)
      pre_into[e.to].push_back(i);
  }
  for (std::size_t i = 0; i < instance.goals.size(); ++i) {
    std::set<std::string> parts(instance.goals[i].chain.begin(), instance.goals[i].chain.end());
    parts.insert(instance.goals[i].final_state);
    for (const auto& p : parts) goal_uses[p].push_back(i);
  }

  const std::size_t bound = instance.edges.size() + instance.goals.size();
  std::size_t firings = 0;
  auto fired = [&](bool changed) {
    if (changed && ++firings > bound) throw std::logic_error("run_fixpoint: firing bound exceeded");
  };

  std::deque<std::string> work(state.truths().begin(), state.truths().end());
  while (!work.empty()) {
    const std::string at = work.front();
    work.pop_front();
    if (auto it = outgoing.find(at); it != outgoing.end()) {
      for (std::size_t i : it->second) {
        const auto& e = instance.edges[i];
        bool was_true = state.truths().count(e.to) != 0;
        fired(detail::fire_propagate(state, e, trace));
        if (!was_true && state.truths().count(e.to)) work.push_back(e.to);
      }
    }
    if (auto it = pre_into.find(at); it != pre_into.end())
      for (std::size_t i : it->second) fired(detail::fire_pre(state, instance.edges[i], trace));
    if (auto it = goal_uses.find(at); it != goal_uses.end()) {
      for (std::size_t i : it->second) {
        const auto& g = instance.goals[i];
        bool was_true = state.truths().count(g.goal) != 0;
        fired(detail::fire_goal(state, g, trace));
        if (!was_true && state.truths().count(g.goal)) work.push_back(g.goal);
      }
    }
  }
  return state;
}

}  // namespace memschema

#endif
