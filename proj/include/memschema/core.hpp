#ifndef MEMSCHEMA_CORE_HPP
#define MEMSCHEMA_CORE_HPP

#include <algorithm>
#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "memschema/errors.hpp"

namespace memschema {

/*
 * The fourteen slot labels an event expression may carry.
 */
enum class CaseRelation {
  actor, action, verb2, isa, time, loc, way, obj, source, to, det, mod, number, no
};

inline constexpr std::array<std::string_view, 14> kCaseRelationNames = {
    "actor", "action", "verb2", "isa", "time", "loc", "way",
    "obj",   "source", "to",    "det", "mod",  "number", "no"};

inline std::string_view to_string(CaseRelation r) {
  return kCaseRelationNames[static_cast<std::size_t>(r)];
}

inline std::optional<CaseRelation> parse_case_relation(std::string_view s) {
  for (std::size_t i = 0; i < kCaseRelationNames.size(); ++i)
    if (kCaseRelationNames[i] == s) return static_cast<CaseRelation>(i);
  return std::nullopt;
}

/*
 * Labels of relations between events. cause and cons are the two
 * directions of the causal relation.
 */
enum class RelationLabel { inherit, accompany, part, pre, goal, cause, cons, sequel };

inline constexpr std::array<std::string_view, 8> kRelationLabelNames = {
    "inherit", "accompany", "part", "pre", "goal", "cause", "cons", "sequel"};

inline std::string_view to_string(RelationLabel r) {
  return kRelationLabelNames[static_cast<std::size_t>(r)];
}

inline std::optional<RelationLabel> parse_relation_label(std::string_view s) {
  for (std::size_t i = 0; i < kRelationLabelNames.size(); ++i)
    if (kRelationLabelNames[i] == s) return static_cast<RelationLabel>(i);
  return std::nullopt;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto tail = [&](char c) { return head(c) || (c >= '0' && c <= '9'); };
  if (!head(s.front())) return false;
  return std::all_of(s.begin() + 1, s.end(), tail);
}

class EventExpression;

struct Word {
  std::string text;
  friend bool operator==(const Word&, const Word&) = default;
  friend auto operator<=>(const Word&, const Word&) = default;
};

struct Var {
  std::string name;
  friend bool operator==(const Var&, const Var&) = default;
  friend auto operator<=>(const Var&, const Var&) = default;
};

/* Subordinate clause: an event expression used as a slot value. */
struct Nested {
  std::shared_ptr<const EventExpression> expr;
};

class SlotValue {
public:
  SlotValue(Word w) : v_(std::move(w)) {}
  SlotValue(Var v) : v_(std::move(v)) {}
  SlotValue(Nested n) : v_(std::move(n)) {}
  SlotValue(EventExpression e);

  bool is_word() const { return std::holds_alternative<Word>(v_); }
  bool is_var() const { return std::holds_alternative<Var>(v_); }
  bool is_nested() const { return std::holds_alternative<Nested>(v_); }

  const Word& word() const { return std::get<Word>(v_); }
  const Var& var() const { return std::get<Var>(v_); }
  const EventExpression& nested() const { return *std::get<Nested>(v_).expr; }

  const std::variant<Word, Var, Nested>& variant() const { return v_; }

private:
  std::variant<Word, Var, Nested> v_;
};

struct Slot {
  CaseRelation relation;
  SlotValue value;
};

/*
 * The meaning of one sentence: an id plus a list of (case-relation, value)
 * slots. A relation appears at most once. Slot order is kept for rendering;
 * equality ignores both order and id.
 */
class EventExpression {
public:
  EventExpression() = default;

  // Throws ValidationError on a repeated case-relation.
  EventExpression(std::string id, std::vector<Slot> slots) : id_(std::move(id)), slots_(std::move(slots)) {
    for (std::size_t i = 0; i < slots_.size(); ++i)
      for (std::size_t j = i + 1; j < slots_.size(); ++j)
        if (slots_[i].relation == slots_[j].relation)
          throw ValidationError("duplicate case-relation " + std::string(to_string(slots_[i].relation)));
  }

  const std::string& id() const { return id_; }
  const std::vector<Slot>& slots() const { return slots_; }
  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }

  const SlotValue* find(CaseRelation r) const {
    for (const auto& s : slots_)
      if (s.relation == r) return &s.value;
    return nullptr;
  }

  EventExpression with_id(std::string id) const {
    EventExpression copy = *this;
    copy.id_ = std::move(id);
    return copy;
  }

private:
  std::string id_;
  std::vector<Slot> slots_;
};

inline SlotValue::SlotValue(EventExpression e) : v_(Nested{std::make_shared<const EventExpression>(std::move(e))}) {}

inline bool operator==(const EventExpression& a, const EventExpression& b);

inline bool operator==(const SlotValue& a, const SlotValue& b) {
  if (a.variant().index() != b.variant().index()) return false;
  if (a.is_word()) return a.word() == b.word();
  if (a.is_var()) return a.var() == b.var();
  return a.nested() == b.nested();
}

inline bool operator==(const EventExpression& a, const EventExpression& b) {
  if (a.size() != b.size()) return false;
  for (const auto& s : a.slots()) {
    const SlotValue* other = b.find(s.relation);
    if (other == nullptr || !(s.value == *other)) return false;
  }
  return true;
}

/* Exact comparison: equal as values and same id and same slot order. */
inline bool identical(const EventExpression& a, const EventExpression& b);

inline bool identical(const SlotValue& a, const SlotValue& b) {
  if (a.variant().index() != b.variant().index()) return false;
  if (a.is_word()) return a.word() == b.word();
  if (a.is_var()) return a.var() == b.var();
  return identical(a.nested(), b.nested());
}

inline bool identical(const EventExpression& a, const EventExpression& b) {
  if (a.id() != b.id() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.slots()[i].relation != b.slots()[i].relation) return false;
    if (!identical(a.slots()[i].value, b.slots()[i].value)) return false;
  }
  return true;
}

namespace detail {
inline void collect_variables(const EventExpression& e, std::set<std::string>& out) {
  for (const auto& s : e.slots()) {
    if (s.value.is_var())
      out.insert(s.value.var().name);
    else if (s.value.is_nested())
      collect_variables(s.value.nested(), out);
  }
}
}  // namespace detail

inline std::set<std::string> variables_of(const EventExpression& e) {
  std::set<std::string> out;
  detail::collect_variables(e, out);
  return out;
}

inline bool is_ground(const EventExpression& e) {
  for (const auto& s : e.slots()) {
    if (s.value.is_var()) return false;
    if (s.value.is_nested() && !is_ground(s.value.nested())) return false;
  }
  return true;
}

inline bool is_ground(const SlotValue& v) {
  if (v.is_var()) return false;
  if (v.is_nested()) return is_ground(v.nested());
  return true;
}

/*
 * Variable name -> ground value. A name is bound at most once.
 */
class Substitution {
public:
  using Map = std::map<std::string, SlotValue>;

  Substitution() = default;

  // Returns false (and leaves the substitution unchanged) when `name` is
  // already bound to a different value. Throws PreconditionError for a
  // non-ground value.
  bool bind(const std::string& name, const SlotValue& value) {
    if (!is_ground(value)) throw PreconditionError("substitution value for ?" + name + " is not ground");
    auto it = bindings_.find(name);
    if (it != bindings_.end()) return it->second == value;
    bindings_.emplace(name, value);
    return true;
  }

  const SlotValue* lookup(const std::string& name) const {
    auto it = bindings_.find(name);
    return it == bindings_.end() ? nullptr : &it->second;
  }

  bool contains(const std::string& name) const { return bindings_.count(name) != 0; }
  std::size_t size() const { return bindings_.size(); }
  bool empty() const { return bindings_.empty(); }
  const Map& bindings() const { return bindings_; }

  std::set<std::string> domain() const {
    std::set<std::string> out;
    for (const auto& [k, v] : bindings_) out.insert(k);
    return out;
  }

  friend bool operator==(const Substitution& a, const Substitution& b) {
    if (a.size() != b.size()) return false;
    for (const auto& [k, v] : a.bindings_) {
      const SlotValue* w = b.lookup(k);
      if (w == nullptr || !(v == *w)) return false;
    }
    return true;
  }

private:
  Map bindings_;
};

inline SlotValue apply_substitution(const SlotValue& v, const Substitution& subst);

inline EventExpression apply_substitution(const EventExpression& e, const Substitution& subst) {
  std::vector<Slot> slots;
  slots.reserve(e.size());
  for (const auto& s : e.slots()) slots.push_back({s.relation, apply_substitution(s.value, subst)});
  return EventExpression(e.id(), std::move(slots));
}

inline SlotValue apply_substitution(const SlotValue& v, const Substitution& subst) {
  if (v.is_var()) {
    if (const SlotValue* bound = subst.lookup(v.var().name)) return *bound;
    return v;
  }
  if (v.is_nested()) return SlotValue(apply_substitution(v.nested(), subst));
  return v;
}

/* Compact single-line form, e.g. {actor: kim, obj: {actor: ?Y}}. */
inline std::string to_string(const EventExpression& e);

inline std::string to_string(const SlotValue& v) {
  if (v.is_word()) return v.word().text;
  if (v.is_var()) return "?" + v.var().name;
  return to_string(v.nested());
}

inline std::string to_string(const EventExpression& e) {
  std::string out = "{";
  bool first = true;
  for (const auto& s : e.slots()) {
    if (!first) out += ", ";
    first = false;
    out += to_string(s.relation);
    out += ": ";
    out += to_string(s.value);
  }
  return out + "}";
}

}  // namespace memschema

#endif
