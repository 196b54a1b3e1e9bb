#ifndef MEMSCHEMA_DOCUMENT_HPP
#define MEMSCHEMA_DOCUMENT_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "memschema/core.hpp"
#include "memschema/schema.hpp"

namespace memschema {

/* The ordered, ground events of one text. */
struct CorpusDocument {
  std::string source_name;
  std::vector<EventExpression> events;

  std::optional<std::size_t> position(const std::string& id) const {
    for (std::size_t i = 0; i < events.size(); ++i)
      if (events[i].id() == id) return i;
    return std::nullopt;
  }

  const EventExpression* find(const std::string& id) const {
    auto p = position(id);
    return p ? &events[*p] : nullptr;
  }

  std::set<std::string> ids() const {
    std::set<std::string> out;
    for (const auto& e : events) out.insert(e.id());
    return out;
  }

  // Events at positions [first, last).
  CorpusDocument slice(std::size_t first, std::size_t last) const {
    CorpusDocument out{source_name, {}};
    out.events.assign(events.begin() + static_cast<std::ptrdiff_t>(first),
                      events.begin() + static_cast<std::ptrdiff_t>(last));
    return out;
  }

  // source_name is not compared.
  friend bool operator==(const CorpusDocument& a, const CorpusDocument& b) {
    if (a.events.size() != b.events.size()) return false;
    for (std::size_t i = 0; i < a.events.size(); ++i)
      if (!identical(a.events[i], b.events[i])) return false;
    return true;
  }
};

/* Declared sequel link from a root of one schema to a root of another. */
struct CrossLink {
  std::string from_schema;
  std::string from_node;
  std::string to_schema;
  std::string to_node;

  friend bool operator==(const CrossLink&, const CrossLink&) = default;
};

inline std::string to_string(const CrossLink& l) {
  return l.from_schema + "." + l.from_node + "-sequel->" + l.to_schema + "." + l.to_node;
}

struct SchemaDocument {
  std::vector<MemorySchema> schemas;
  std::vector<CrossLink> links;

  const MemorySchema* find(const std::string& name) const {
    for (const auto& s : schemas)
      if (s.name == name) return &s;
    return nullptr;
  }

  friend bool operator==(const SchemaDocument&, const SchemaDocument&) = default;
};

}  // namespace memschema

#endif
