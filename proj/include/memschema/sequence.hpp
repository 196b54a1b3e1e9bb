#ifndef MEMSCHEMA_SEQUENCE_HPP
#define MEMSCHEMA_SEQUENCE_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "memschema/core.hpp"
#include "memschema/document.hpp"
#include "memschema/matcher.hpp"
#include "memschema/memory.hpp"
#include "memschema/schema.hpp"

namespace memschema {

/*
 * Partition of corpus positions [0, n) into one block per anchor. Every
 * event between anchor i and anchor i+1 belongs to block i; events before
 * the first anchor belong to the first block.
 */
struct BlockPartition {
  std::vector<std::size_t> anchors;
  std::vector<std::vector<std::size_t>> blocks;

  friend bool operator==(const BlockPartition&, const BlockPartition&) = default;
};

inline BlockPartition partition_blocks(std::size_t corpus_length, std::span<const std::size_t> anchors) {
  if (anchors.empty()) throw PreconditionError("partition_blocks: no anchors");
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    if (anchors[i] >= corpus_length) throw PreconditionError("partition_blocks: anchor out of range");
    if (i > 0 && anchors[i] <= anchors[i - 1]) throw PreconditionError("partition_blocks: anchors not increasing");
  }
  BlockPartition out;
  out.anchors.assign(anchors.begin(), anchors.end());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    std::size_t first = i == 0 ? 0 : anchors[i];
    std::size_t last = i + 1 < anchors.size() ? anchors[i + 1] : corpus_length;
    std::vector<std::size_t> block;
    for (std::size_t p = first; p < last; ++p) block.push_back(p);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

struct AnchorMatch {
  std::string root;
  std::size_t position = 0;  // in the corpus handed to match_sequence
  std::string event;

  friend bool operator==(const AnchorMatch&, const AnchorMatch&) = default;
};

/*
 * One admissible way a memory schema matches an event sequence: the chosen
 * roots with their anchor events (in corpus order), the tree nodes matched
 * by the remaining events, the nodes left to confirmation, and the global
 * substitution.
 */
struct MatchResult {
  std::string schema;
  std::vector<AnchorMatch> anchors;
  std::map<std::string, std::string> node_map;
  std::set<std::string> unmatched;
  Substitution substitution;
  std::vector<GoalSupport> goal_supports;

  std::size_t length() const { return anchors.size(); }

  std::vector<std::size_t> anchor_positions() const {
    std::vector<std::size_t> out;
    for (const auto& a : anchors) out.push_back(a.position);
    return out;
  }

  // Event a node was replaced by, if any.
  std::optional<std::string> event_of(const std::string& node) const {
    for (const auto& a : anchors)
      if (a.root == node) return a.event;
    if (auto it = node_map.find(node); it != node_map.end()) return it->second;
    return std::nullopt;
  }

  friend bool operator==(const MatchResult& a, const MatchResult& b) {
    return a.schema == b.schema && a.anchors == b.anchors && a.node_map == b.node_map &&
           a.unmatched == b.unmatched && a.substitution == b.substitution;
  }
};

/* Id under which an unmatched, confirmed schema node takes part in Memory. */
inline std::string implied_event_id(const std::string& schema, const std::string& node) {
  return schema + "." + node;
}

inline std::string instance_event(const MatchResult& r, const std::string& node) {
  if (auto e = r.event_of(node)) return *e;
  return implied_event_id(r.schema, node);
}

/*
 * Projects a matched schema onto events: matched nodes become their corpus
 * events, confirmed nodes become implied events.
 */
inline Instance build_instance(const MemorySchema& mp, const MatchResult& r) {
  Instance inst;
  for (const auto& n : r.unmatched) inst.implied_events.push_back(implied_event_id(r.schema, n));
  for (const auto& e : mp.all_edges())
    inst.edges.push_back({instance_event(r, e.from), e.label, e.test, instance_event(r, e.to), mp.name + ":" + to_string(e)});
  for (const auto& g : r.goal_supports) {
    InstanceGoal ig;
    for (const auto& c : g.chain) ig.chain.push_back(instance_event(r, c));
    ig.goal = instance_event(r, g.goal);
    ig.final_state = instance_event(r, g.final_state);
    ig.origin = mp.name + ":" + g.source + "-goal$->" + g.goal;
    inst.goals.push_back(std::move(ig));
  }
  return inst;
}

/* A sequel link arriving at a root of the schema being matched from an event already placed. */
struct IncomingLink {
  std::string source_event;
  std::string target_root;
  std::string origin;
};

inline std::vector<InstanceEdge> link_edges(const MatchResult& r, std::span<const IncomingLink> incoming) {
  std::vector<InstanceEdge> out;
  for (const auto& l : incoming)
    out.push_back({l.source_event, RelationLabel::sequel, false, instance_event(r, l.target_root), l.origin});
  return out;
}

using ClosureFn = std::function<MemoryState(const MemoryState&, const Instance&)>;

namespace detail {

inline MemoryState worklist_closure(const MemoryState& s, const Instance& inst) { return run_fixpoint(s, inst); }

// Chaotic iteration of the single-pass rules until nothing changes.
inline MemoryState naive_closure(const MemoryState& s, const Instance& inst) {
  MemoryState cur = s;
  for (;;) {
    MemoryState next = rule_propagate(rule_goal_discharge(rule_pre_discharge(cur, inst), inst), inst);
    if (next == cur) return cur;
    cur = std::move(next);
  }
}

// The Memory-dependent checks (first root True, "$" evidence), judged on the closure of `state`
// extended with the candidate's own instance and incoming links.
inline bool memory_conditions_hold(const MemorySchema& mp, const MatchResult& r, const MemoryState& state,
                                   std::span<const IncomingLink> incoming, const ClosureFn& closure) {
  Instance inst = build_instance(mp, r);
  for (auto& e : link_edges(r, incoming)) inst.edges.push_back(std::move(e));
  const MemoryState closed = closure(state, inst);
  auto holds = [&](const std::string& ev) { return closed.truths().count(ev) != 0; };

  if (!r.anchors.empty() && r.anchors.front().root == mp.roots.front() && !holds(r.anchors.front().event))
    return false;
  for (const auto& e : mp.tree_edges()) {
    if (!e.test) continue;
    if (e.label == RelationLabel::pre && !holds(instance_event(r, e.to))) return false;
    if (e.label == RelationLabel::goal && !resolve_goal_support(mp, e)) return false;
  }
  return true;
}

// Calls f on every r-subset of {0..n-1} in lexicographic order until f returns true.
inline bool for_each_combination(std::size_t n, std::size_t r, const std::function<bool(const std::vector<std::size_t>&)>& f) {
  if (r > n) return false;
  std::vector<std::size_t> idx(r);
  for (std::size_t i = 0; i < r; ++i) idx[i] = i;
  for (;;) {
    if (f(idx)) return true;
    std::size_t i = r;
    while (i > 0 && idx[i - 1] == n - r + i - 1) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < r; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::set<std::string> unmatched_nodes(const MemorySchema& mp, const MatchResult& r) {
  std::set<std::string> out;
  for (const auto& n : mp.nodes)
    if (!r.event_of(n.id())) out.insert(n.id());
  return out;
}

inline bool all_confirmable(const MemorySchema& mp, const MatchResult& r) {
  for (const auto& n : r.unmatched)
    if (!is_confirmable(*mp.node(n), r.substitution)) return false;
  return true;
}

}  // namespace detail

/*
 * Sequence matching. Among the admissible matches of `mp` against the
 * events of `corpus` the one with the most anchors is returned; ties go
 * to the lexicographically smallest anchor positions, then the smallest
 * root indices, then the first node assignment found in declaration
 * order. Memory-dependent conditions are judged on the closure of `state`
 * with the candidate's own instance (plus `incoming` links).
 */
inline std::optional<MatchResult> match_sequence(const MemorySchema& mp, const CorpusDocument& corpus,
                                                 const MemoryState& state,
                                                 std::span<const IncomingLink> incoming = {}) {
  const std::size_t k = mp.roots.size();
  const std::size_t n = corpus.events.size();
  if (k == 0 || n == 0) return std::nullopt;

  std::vector<std::vector<std::string>> trees(k);
  for (std::size_t i = 0; i < k; ++i) {
    trees[i] = mp.tree(i);
    trees[i].erase(trees[i].begin());
  }
  const auto supports = goal_supports(mp);
  const ClosureFn closure = detail::worklist_closure;

  std::optional<MatchResult> found;
  for (std::size_t l = std::min(k, n); l >= 1 && !found; --l) {
    detail::for_each_combination(n, l, [&](const std::vector<std::size_t>& anchors) {
      const BlockPartition part = partition_blocks(n, anchors);
      return detail::for_each_combination(k, l, [&](const std::vector<std::size_t>& roots) {
        Substitution subst;
        MatchResult r;
        r.schema = mp.name;
        r.goal_supports = supports;
        for (std::size_t j = 0; j < l; ++j) {
          const auto& root = mp.roots[roots[j]];
          auto o = match_event(*mp.node(root), corpus.events[anchors[j]], subst);
          if (!o) return false;
          subst = o.substitution();
          r.anchors.push_back({root, anchors[j], corpus.events[anchors[j]].id()});
        }

        std::vector<std::pair<std::size_t, std::size_t>> todo;  // (block, position)
        for (std::size_t j = 0; j < l; ++j)
          for (std::size_t p : part.blocks[j])
            if (p != anchors[j]) todo.emplace_back(j, p);

        std::set<std::string> used;
        auto assign = [&](auto&& self, std::size_t at, const Substitution& s) -> bool {
          if (at == todo.size()) {
            r.substitution = s;
            r.unmatched = detail::unmatched_nodes(mp, r);
            if (!detail::all_confirmable(mp, r)) return false;
            if (!detail::memory_conditions_hold(mp, r, state, incoming, closure)) return false;
            found = r;
            return true;
          }
          const auto [block, pos] = todo[at];
          for (const auto& node : trees[roots[block]]) {
            if (used.count(node)) continue;
            auto o = match_event(*mp.node(node), corpus.events[pos], s);
            if (!o) continue;
            used.insert(node);
            r.node_map[node] = corpus.events[pos].id();
            if (self(self, at + 1, o.substitution())) return true;
            r.node_map.erase(node);
            used.erase(node);
          }
          return false;
        };
        return assign(assign, 0, subst);
      });
    });
  }
  return found;
}

/*
 * Exhaustive enumeration of every admissible match, checking the matching
 * conditions one by one without search pruning beyond tree membership and
 * injectivity. Test oracle for match_sequence; desk scale only.
 */
inline std::vector<MatchResult> oracle_match_sequence(const MemorySchema& mp, const CorpusDocument& corpus,
                                                      const MemoryState& state,
                                                      std::span<const IncomingLink> incoming = {}) {
  const std::size_t n = corpus.events.size();
  const std::size_t k = mp.roots.size();
  if (n > 8 || mp.nodes.size() > 8) throw PreconditionError("oracle_match_sequence: instance too large");

  std::map<std::string, std::size_t> tree_of;
  for (std::size_t i = 0; i < k; ++i)
    for (const auto& node : mp.tree(i)) tree_of[node] = i;
  std::vector<std::string> candidates;
  for (const auto& node : mp.nodes)
    if (!mp.is_root(node.id())) candidates.push_back(node.id());
  const auto supports = goal_supports(mp);

  std::vector<MatchResult> out;
  for (std::size_t l = 1; l <= std::min(k, n); ++l) {
    detail::for_each_combination(n, l, [&](const std::vector<std::size_t>& anchors) {
      detail::for_each_combination(k, l, [&](const std::vector<std::size_t>& roots) {
        // Block of a position: the last anchor at or before it, or the first.
        auto block_of = [&](std::size_t p) {
          std::size_t b = 0;
          for (std::size_t j = 0; j < l; ++j)
            if (anchors[j] <= p) b = j;
          return b;
        };
        std::vector<std::size_t> free;
        for (std::size_t p = 0; p < n; ++p)
          if (std::find(anchors.begin(), anchors.end(), p) == anchors.end()) free.push_back(p);

        std::vector<std::string> choice(free.size());
        auto leaf = [&]() {
          MatchResult r;
          r.schema = mp.name;
          r.goal_supports = supports;
          Substitution subst;
          for (std::size_t j = 0; j < l; ++j) {
            const auto& root = mp.roots[roots[j]];
            auto o = match_event(*mp.node(root), corpus.events[anchors[j]]);
            if (!o) return;
            auto m = merge(subst, o.substitution());
            if (!m) return;
            subst = m.substitution();
            r.anchors.push_back({root, anchors[j], corpus.events[anchors[j]].id()});
          }
          for (std::size_t i = 0; i < free.size(); ++i) {
            auto o = match_event(*mp.node(choice[i]), corpus.events[free[i]]);
            if (!o) return;
            auto m = merge(subst, o.substitution());
            if (!m) return;
            subst = m.substitution();
            r.node_map[choice[i]] = corpus.events[free[i]].id();
          }
          r.substitution = subst;
          r.unmatched = detail::unmatched_nodes(mp, r);
          if (!detail::all_confirmable(mp, r)) return;
          if (!detail::memory_conditions_hold(mp, r, state, incoming, detail::naive_closure)) return;
          out.push_back(std::move(r));
        };
        auto pick = [&](auto&& self, std::size_t i) -> void {
          if (i == free.size()) return leaf();
          for (const auto& c : candidates) {
            if (tree_of.count(c) == 0 || tree_of[c] != roots[block_of(free[i])]) continue;
            if (std::find(choice.begin(), choice.begin() + static_cast<std::ptrdiff_t>(i), c) !=
                choice.begin() + static_cast<std::ptrdiff_t>(i))
              continue;
            choice[i] = c;
            self(self, i + 1);
          }
        };
        pick(pick, 0);
        return false;
      });
      return false;
    });
  }
  return out;
}

enum class Verdict { understandable, not_understandable };

inline std::string_view to_string(Verdict v) {
  return v == Verdict::understandable ? "understandable" : "not-understandable";
}

/* Contiguous corpus positions [first, last] matched by one schema. */
struct Segment {
  std::string schema;
  std::size_t first = 0;
  std::size_t last = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct UnderstandingReport {
  Verdict verdict = Verdict::not_understandable;
  std::vector<MatchResult> results;
  std::vector<Segment> segments;
  MemoryState state;
  std::vector<std::string> chain;         // longest confirmed sequel chain
  std::vector<std::string> anchor_chain;  // all anchor events, corpus order
  bool anchor_chain_confirmed = false;
  std::vector<std::string> diagnostics;
  Trace trace;

  std::size_t chain_length() const { return chain.size(); }
};

namespace detail {

// Corpus events reachable from `from` over confirmed sequel edges whose
// intermediate nodes are implied (non-corpus) events.
inline std::set<std::string> sequel_reach(const MemoryState& state, const std::set<std::string>& corpus_ids,
                                          const std::string& from) {
  std::set<std::string> out, seen{from};
  std::vector<std::string> stack{from};
  while (!stack.empty()) {
    std::string at = stack.back();
    stack.pop_back();
    for (const auto& e : state.edges()) {
      if (e.from != at || e.label != RelationLabel::sequel || !seen.insert(e.to).second) continue;
      if (corpus_ids.count(e.to))
        out.insert(e.to);
      else
        stack.push_back(e.to);
    }
  }
  return out;
}

}  // namespace detail

/*
 * Understandability of the whole corpus: every event True, every pair of
 * consecutive anchors joined by a confirmed sequel link, and a confirmed
 * sequel chain over corpus events of length at least 2 (the longest such
 * chain is reported).
 */
inline UnderstandingReport check_understandable(const MemoryState& state, const CorpusDocument& corpus,
                                                std::span<const MatchResult> results) {
  UnderstandingReport rep;
  rep.state = state;
  rep.results.assign(results.begin(), results.end());
  const auto ids = corpus.ids();

  bool all_true = !corpus.events.empty();
  for (const auto& e : corpus.events) {
    if (!state.truths().count(e.id())) {
      all_true = false;
      rep.diagnostics.push_back("event " + e.id() + ": Memory is False");
    }
  }

  std::vector<std::pair<std::size_t, std::string>> anchors;
  for (const auto& r : results)
    for (const auto& a : r.anchors)
      if (auto p = corpus.position(a.event)) anchors.emplace_back(*p, a.event);
  std::sort(anchors.begin(), anchors.end());
  for (const auto& [p, id] : anchors) rep.anchor_chain.push_back(id);

  std::map<std::string, std::set<std::string>> reach;
  for (const auto& e : corpus.events) reach[e.id()] = detail::sequel_reach(state, ids, e.id());

  rep.anchor_chain_confirmed = !anchors.empty();
  for (std::size_t i = 0; i + 1 < rep.anchor_chain.size(); ++i) {
    if (!reach[rep.anchor_chain[i]].count(rep.anchor_chain[i + 1])) {
      rep.anchor_chain_confirmed = false;
      rep.diagnostics.push_back("anchors " + rep.anchor_chain[i] + ", " + rep.anchor_chain[i + 1] +
                                ": sequel not confirmed");
    }
  }

  // Longest chain over corpus order; ties prefer the earliest predecessor.
  const std::size_t n = corpus.events.size();
  std::vector<std::size_t> best(n, 1), prev(n, n);
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t u = 0; u < v; ++u)
      if (reach[corpus.events[u].id()].count(corpus.events[v].id()) && best[u] + 1 > best[v]) {
        best[v] = best[u] + 1;
        prev[v] = u;
      }
  if (n > 0) {
    std::size_t end = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (best[v] > best[end]) end = v;
    for (std::size_t at = end; at != n; at = prev[at]) rep.chain.push_back(corpus.events[at].id());
    std::reverse(rep.chain.begin(), rep.chain.end());
  }
  if (rep.chain.size() < 2) rep.diagnostics.push_back("no confirmed sequel chain of length > 1");

  rep.verdict = all_true && rep.anchor_chain_confirmed && rep.chain.size() >= 2 ? Verdict::understandable
                                                                                 : Verdict::not_understandable;
  return rep;
}

/* No assignment of cut points lets every schema match its segment. */
class SegmentationFailure : public Error {
public:
  SegmentationFailure(const std::string& what, UnderstandingReport partial)
      : Error(what), partial_(std::move(partial)) {}
  const UnderstandingReport& partial() const { return partial_; }

private:
  UnderstandingReport partial_;
};

/*
 * Full pipeline: seed Memory with the assertions, cut the corpus into one
 * contiguous segment per schema (smallest cut positions first) such that
 * each schema matches its segment, connect consecutive schemas through
 * their declared root-to-root sequel links, run the rules to fixpoint over
 * everything, and judge understandability.
 */
inline UnderstandingReport understand(std::span<const MemorySchema> mps, std::span<const CrossLink> links,
                                      const CorpusDocument& corpus, std::span<const std::string> assertions,
                                      bool with_trace = false) {
  MemoryState seeded(corpus.ids());
  for (const auto& a : assertions) seeded = assert_true(seeded, a);

  const std::size_t m = mps.size();
  const std::size_t n = corpus.events.size();
  if (m == 0) throw PreconditionError("understand: no memory schemas");
  {
    std::set<std::string> names;
    for (const auto& mp : mps)
      if (!names.insert(mp.name).second) throw PreconditionError("understand: schema " + mp.name + " given twice");
  }

  std::vector<std::string> link_notes;
  for (std::size_t i = 0; i + 1 < m; ++i) {
    bool any = std::any_of(links.begin(), links.end(), [&](const CrossLink& l) {
      return l.from_schema == mps[i].name && l.to_schema == mps[i + 1].name;
    });
    if (!any) link_notes.push_back("no sequel link declared from " + mps[i].name + " to " + mps[i + 1].name);
  }

  struct Attempt {
    std::vector<MatchResult> results;
    std::vector<Segment> segments;
    Instance instance;
  };
  std::optional<Attempt> success;
  Attempt best_partial;

  // cuts[i] is the first position of segment i + 1.
  std::vector<std::size_t> cuts;
  auto try_cuts = [&]() -> bool {
    Attempt at;
    MemoryState state = seeded;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t first = i == 0 ? 0 : cuts[i - 1];
      const std::size_t last = i + 1 < m ? cuts[i] : n;
      std::vector<IncomingLink> incoming;
      if (i > 0) {
        for (const auto& l : links) {
          if (l.from_schema != mps[i - 1].name || l.to_schema != mps[i].name) continue;
          incoming.push_back({instance_event(at.results.back(), l.from_node), l.to_node, "link:" + to_string(l)});
        }
      }
      auto r = match_sequence(mps[i], corpus.slice(first, last), state, incoming);
      if (!r) break;
      for (auto& a : r->anchors) a.position += first;
      Instance inst = build_instance(mps[i], *r);
      for (auto& e : link_edges(*r, incoming)) inst.edges.push_back(std::move(e));
      state = run_fixpoint(state, inst);
      at.instance.append(inst);
      at.results.push_back(std::move(*r));
      at.segments.push_back({mps[i].name, first, last - 1});
    }
    if (at.results.size() > best_partial.results.size()) best_partial = at;
    if (at.results.size() == m) {
      success = std::move(at);
      return true;
    }
    return false;
  };

  if (n >= m) {
    if (m == 1) {
      try_cuts();
    } else {
      detail::for_each_combination(n - 1, m - 1, [&](const std::vector<std::size_t>& c) {
        cuts.clear();
        for (std::size_t x : c) cuts.push_back(x + 1);
        return try_cuts();
      });
    }
  }

  if (!success) {
    UnderstandingReport partial = check_understandable(seeded, corpus, best_partial.results);
    partial.segments = best_partial.segments;
    partial.verdict = Verdict::not_understandable;
    std::string what = "segmentation failure: best partial coverage " + std::to_string(best_partial.results.size()) +
                       " of " + std::to_string(m) + " schemas";
    partial.diagnostics.insert(partial.diagnostics.begin(), link_notes.begin(), link_notes.end());
    partial.diagnostics.insert(partial.diagnostics.begin(), what);
    throw SegmentationFailure(what, std::move(partial));
  }

  Trace trace;
  MemoryState final_state = run_fixpoint(seeded, success->instance, with_trace ? &trace : nullptr);
  UnderstandingReport rep = check_understandable(final_state, corpus, success->results);
  rep.segments = success->segments;
  rep.trace = std::move(trace);
  if (!link_notes.empty()) {
    rep.verdict = Verdict::not_understandable;
    rep.diagnostics.insert(rep.diagnostics.begin(), link_notes.begin(), link_notes.end());
  }
  return rep;
}

inline UnderstandingReport understand(const SchemaDocument& doc, const CorpusDocument& corpus,
                                      std::span<const std::string> assertions, bool with_trace = false) {
  return understand(doc.schemas, doc.links, corpus, assertions, with_trace);
}

}  // namespace memschema

#endif
