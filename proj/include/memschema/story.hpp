#ifndef MEMSCHEMA_STORY_HPP
#define MEMSCHEMA_STORY_HPP

#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "memschema/core.hpp"
#include "memschema/document.hpp"
#include "memschema/schema.hpp"
#include "memschema/sequence.hpp"
#include "memschema/textio.hpp"

namespace memschema {

enum class Instantiation {
  replaced,   // a corpus event matched the node
  confirmed,  // variables bound through the substitution
  kept        // ground and unmatched, left as written
};

inline std::string_view to_string(Instantiation k) {
  switch (k) {
    case Instantiation::replaced: return "replaced";
    case Instantiation::confirmed: return "confirmed";
    case Instantiation::kept: return "kept";
  }
  return "";
}

struct StoryNode {
  std::string node;                  // schema node id
  std::optional<std::string> event;  // corpus event id when replaced
  Instantiation kind = Instantiation::kept;
  EventExpression expr;
};

struct StoryEdge {
  std::string from;
  RelationLabel label = RelationLabel::sequel;
  std::string to;

  friend bool operator==(const StoryEdge&, const StoryEdge&) = default;
};

/* An instantiated memory schema: ground nodes, no test factors. */
struct Story {
  std::string origin;
  std::vector<std::string> roots;
  std::vector<StoryNode> nodes;
  std::vector<StoryEdge> edges;

  const StoryNode* find(const std::string& node) const {
    for (const auto& n : nodes)
      if (n.node == node) return &n;
    return nullptr;
  }
};

struct DiagramLink {
  std::string from_story;
  std::string from_node;
  std::string to_story;
  std::string to_node;

  friend bool operator==(const DiagramLink&, const DiagramLink&) = default;
};

/* The stories of a text in segment order, joined by sequel links. */
struct UnderstandingDiagram {
  std::vector<Story> stories;
  std::vector<DiagramLink> links;
};

inline Story build_story(const MemorySchema& mp, const MatchResult& result, const CorpusDocument& corpus) {
  if (result.schema != mp.name) throw PreconditionError("build_story: result is for schema " + result.schema);
  Story story;
  story.origin = mp.name;
  story.roots = mp.roots;
  for (const auto& node : mp.nodes) {
    StoryNode sn;
    sn.node = node.id();
    if (auto ev = result.event_of(node.id())) {
      const EventExpression* e = corpus.find(*ev);
      if (e == nullptr) throw PreconditionError("build_story: event " + *ev + " not in corpus");
      sn.event = *ev;
      sn.kind = Instantiation::replaced;
      sn.expr = *e;
    } else if (is_ground(node)) {
      sn.kind = Instantiation::kept;
      sn.expr = node;
    } else if (is_confirmable(node, result.substitution)) {
      sn.kind = Instantiation::confirmed;
      sn.expr = apply_substitution(node, result.substitution);
    } else {
      throw PreconditionError("build_story: node " + node.id() + " is neither matched nor confirmable");
    }
    story.nodes.push_back(std::move(sn));
  }
  for (const auto& e : mp.all_edges()) story.edges.push_back({e.from, e.label, e.to});
  return story;
}

inline UnderstandingDiagram build_understanding_diagram(std::vector<Story> stories, std::span<const CrossLink> links) {
  UnderstandingDiagram d;
  d.stories = std::move(stories);
  auto instantiated = [&](const std::string& story, const std::string& node) {
    for (const auto& s : d.stories)
      if (s.origin == story) return s.find(node) != nullptr;
    return false;
  };
  for (const auto& l : links) {
    if (!instantiated(l.from_schema, l.from_node))
      throw PreconditionError("link " + to_string(l) + ": endpoint " + l.from_schema + "." + l.from_node +
                              " not instantiated");
    if (!instantiated(l.to_schema, l.to_node))
      throw PreconditionError("link " + to_string(l) + ": endpoint " + l.to_schema + "." + l.to_node +
                              " not instantiated");
    d.links.push_back({l.from_schema, l.from_node, l.to_schema, l.to_node});
  }
  return d;
}

/* Builds U(P) from a successful report: one story per matched schema, declared links between them. */
inline UnderstandingDiagram build_understanding_diagram(const SchemaDocument& doc, const CorpusDocument& corpus,
                                                        const UnderstandingReport& report) {
  std::vector<Story> stories;
  std::set<std::string> used;
  for (const auto& r : report.results) {
    const MemorySchema* mp = doc.find(r.schema);
    if (mp == nullptr) throw PreconditionError("unknown schema " + r.schema);
    stories.push_back(build_story(*mp, r, corpus));
    used.insert(r.schema);
  }
  std::vector<CrossLink> links;
  for (const auto& l : doc.links)
    if (used.count(l.from_schema) && used.count(l.to_schema)) links.push_back(l);
  return build_understanding_diagram(std::move(stories), links);
}

namespace detail {

inline std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out += c;
  }
  return out + "\"";
}

inline std::string dot_node_label(const StoryNode& n) {
  std::string label = n.node;
  if (n.event) label += " = " + *n.event;
  for (const auto& s : n.expr.slots()) label += "\n" + std::string(to_string(s.relation)) + ": " + to_string(s.value);
  return label;
}

}  // namespace detail

/* Graphviz digraph with one cluster per story. Output depends only on the diagram. */
inline std::string export_dot(const UnderstandingDiagram& d) {
  std::ostringstream os;
  os << "digraph U {\n";
  os << "  rankdir=TB;\n";
  os << "  node [shape=box];\n";
  for (std::size_t i = 0; i < d.stories.size(); ++i) {
    const Story& s = d.stories[i];
    os << "  subgraph cluster_" << i << " {\n";
    os << "    label=" << detail::dot_quote(s.origin) << ";\n";
    for (const auto& n : s.nodes)
      os << "    " << detail::dot_quote(s.origin + "." + n.node) << " [label=" << detail::dot_quote(detail::dot_node_label(n))
         << "];\n";
    for (const auto& e : s.edges)
      os << "    " << detail::dot_quote(s.origin + "." + e.from) << " -> " << detail::dot_quote(s.origin + "." + e.to)
         << " [label=" << detail::dot_quote(std::string(to_string(e.label))) << "];\n";
    os << "  }\n";
  }
  for (const auto& l : d.links)
    os << "  " << detail::dot_quote(l.from_story + "." + l.from_node) << " -> "
       << detail::dot_quote(l.to_story + "." + l.to_node) << " [label=\"sequel\"];\n";
  os << "}\n";
  return os.str();
}

/*
 * Text form of U(P) in the schema-file dialect: one memory_schema block per
 * story with ground nodes, links as root-to-root edges. Replaced nodes are
 * annotated with their event id in a comment.
 */
inline std::string render(const UnderstandingDiagram& d) {
  std::string out;
  for (std::size_t i = 0; i < d.stories.size(); ++i) {
    const Story& s = d.stories[i];
    if (i > 0) out += "\n";
    out += "memory_schema " + s.origin + " {\n";
    out += "  roots: [";
    for (std::size_t r = 0; r < s.roots.size(); ++r) out += (r ? ", " : "") + s.roots[r];
    out += "]\n";
    for (const auto& n : s.nodes) {
      out += "  node " + n.node + " = schema " + textio_detail::render_inline(n.expr);
      out += n.event ? "  # " + *n.event + "\n" : "  # " + std::string(to_string(n.kind)) + "\n";
    }
    for (std::size_t e = 0; e < s.edges.size(); ++e) {
      // The root chain is implicit in the roots list.
      if (e + 1 < s.roots.size()) continue;
      const auto& edge = s.edges[e];
      out += "  " + edge.from + " -" + std::string(to_string(edge.label)) + "-> " + edge.to + "\n";
    }
    for (const auto& l : d.links)
      if (l.from_story == s.origin) out += "  " + l.from_node + " -sequel-> " + l.to_node + "\n";
    out += "}\n";
  }
  return out;
}

}  // namespace memschema

#endif
