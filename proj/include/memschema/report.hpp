#ifndef MEMSCHEMA_REPORT_HPP
#define MEMSCHEMA_REPORT_HPP

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "memschema/core.hpp"
#include "memschema/document.hpp"
#include "memschema/memory.hpp"
#include "memschema/sequence.hpp"
#include "memschema/story.hpp"

// JSON forms of the engine's values. Every object carries a "kind"
// discriminator; see docs/report-format.md.

namespace memschema::json {

using nlohmann::json;

inline json to_json(const EventExpression& e);

inline json to_json(const SlotValue& v) {
  if (v.is_word()) return {{"kind", "word"}, {"text", v.word().text}};
  if (v.is_var()) return {{"kind", "var"}, {"name", v.var().name}};
  return to_json(v.nested());
}

inline json to_json(const EventExpression& e) {
  json slots = json::array();
  for (const auto& s : e.slots()) slots.push_back({{"relation", std::string(to_string(s.relation))}, {"value", to_json(s.value)}});
  json out = {{"kind", "event"}, {"slots", slots}};
  if (!e.id().empty()) out["id"] = e.id();
  return out;
}

inline json to_json(const Substitution& s) {
  json out = json::object();
  for (const auto& [k, v] : s.bindings()) out[k] = to_json(v);
  return out;
}

inline json to_json(const Diagnostic& d, const std::string& severity = "error") {
  json out = {{"kind", "diagnostic"}, {"severity", severity}, {"message", d.message}};
  if (d.location.known()) {
    out["line"] = d.location.line;
    out["column"] = d.location.column;
  }
  return out;
}

inline json to_json(const MemoryState& s) {
  json edges = json::array();
  for (const auto& e : s.edges()) edges.push_back({{"from", e.from}, {"label", std::string(to_string(e.label))}, {"to", e.to}});
  return {{"kind", "memory_state"}, {"truths", s.truths()}, {"confirmed_edges", edges}};
}

inline json to_json(const GoalSupport& g) {
  return {{"kind", "goal_support"}, {"source", g.source}, {"goal", g.goal}, {"chain", g.chain}, {"final_state", g.final_state}};
}

inline json to_json(const MatchResult& r) {
  json anchors = json::array();
  for (const auto& a : r.anchors) anchors.push_back({{"root", a.root}, {"position", a.position}, {"event", a.event}});
  json goals = json::array();
  for (const auto& g : r.goal_supports) goals.push_back(to_json(g));
  return {{"kind", "match_result"},
          {"schema", r.schema},
          {"length", r.length()},
          {"anchors", anchors},
          {"node_map", r.node_map},
          {"unmatched", r.unmatched},
          {"substitution", to_json(r.substitution)},
          {"goal_supports", goals}};
}

inline json to_json(const Segment& s, const CorpusDocument& corpus) {
  std::vector<std::string> events;
  for (std::size_t p = s.first; p <= s.last && p < corpus.events.size(); ++p) events.push_back(corpus.events[p].id());
  return {{"kind", "segment"}, {"schema", s.schema}, {"first", s.first}, {"last", s.last}, {"events", events}};
}

inline json to_json(const UnderstandingReport& rep, const CorpusDocument& corpus, bool with_trace) {
  json results = json::array();
  for (const auto& r : rep.results) results.push_back(to_json(r));
  json segments = json::array();
  for (const auto& s : rep.segments) segments.push_back(to_json(s, corpus));
  json out = {{"kind", "understanding_report"},
              {"verdict", std::string(to_string(rep.verdict))},
              {"chain_length", rep.chain_length()},
              {"chain", rep.chain},
              {"anchor_chain", rep.anchor_chain},
              {"anchor_chain_confirmed", rep.anchor_chain_confirmed},
              {"segments", segments},
              {"results", results},
              {"memory", to_json(rep.state)},
              {"diagnostics", rep.diagnostics}};
  if (with_trace) out["trace"] = rep.trace;
  return out;
}

inline json to_json(const Story& s) {
  json nodes = json::array();
  for (const auto& n : s.nodes) {
    json node = {{"node", n.node}, {"instantiation", std::string(to_string(n.kind))}, {"expr", to_json(n.expr)}};
    node["event"] = n.event ? json(*n.event) : json(nullptr);
    nodes.push_back(node);
  }
  json edges = json::array();
  for (const auto& e : s.edges) edges.push_back({{"from", e.from}, {"label", std::string(to_string(e.label))}, {"to", e.to}});
  return {{"kind", "story"}, {"origin", s.origin}, {"roots", s.roots}, {"nodes", nodes}, {"edges", edges}};
}

inline json to_json(const UnderstandingDiagram& d) {
  json stories = json::array();
  for (const auto& s : d.stories) stories.push_back(to_json(s));
  json links = json::array();
  for (const auto& l : d.links)
    links.push_back({{"from_story", l.from_story}, {"from_node", l.from_node}, {"to_story", l.to_story}, {"to_node", l.to_node}});
  return {{"kind", "understanding_diagram"}, {"stories", stories}, {"links", links}};
}

}  // namespace memschema::json

#endif
