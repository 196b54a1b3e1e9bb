#ifndef MEMSCHEMA_MATCHER_HPP
#define MEMSCHEMA_MATCHER_HPP

#include <optional>
#include <span>
#include <utility>

#include "memschema/core.hpp"

namespace memschema {

/* Result of matching or merging: a substitution on success, nothing on failure. */
class MatchOutcome {
public:
  MatchOutcome() = default;
  explicit MatchOutcome(Substitution s) : subst_(std::move(s)) {}

  static MatchOutcome failure() { return MatchOutcome(); }

  bool success() const { return subst_.has_value(); }
  explicit operator bool() const { return success(); }

  // Only meaningful on success.
  const Substitution& substitution() const { return *subst_; }

private:
  std::optional<Substitution> subst_;
};

namespace detail {

inline bool match_into(const EventExpression& schema, const EventExpression& event, Substitution& subst);

inline bool match_value(const SlotValue& pattern, const SlotValue& value, Substitution& subst) {
  if (pattern.is_var()) return subst.bind(pattern.var().name, value);
  if (pattern.is_word()) return value.is_word() && pattern.word() == value.word();
  return value.is_nested() && match_into(pattern.nested(), value.nested(), subst);
}

// Every schema slot must be satisfied by the event; extra event slots are ignored.
inline bool match_into(const EventExpression& schema, const EventExpression& event, Substitution& subst) {
  for (const auto& slot : schema.slots()) {
    const SlotValue* value = event.find(slot.relation);
    if (value == nullptr || !match_value(slot.value, *value, subst)) return false;
  }
  return true;
}

}  // namespace detail

/*
 * Matches an event schema against a ground event, extending `base`.
 * Succeeds iff every slot of the schema is present in the event with an
 * equal value, where schema variables bind consistently (including with
 * the bindings already in `base`).
 */
inline MatchOutcome match_event(const EventExpression& schema, const EventExpression& event,
                                const Substitution& base) {
  if (!is_ground(event)) throw PreconditionError("match_event: event " + event.id() + " is not ground");
  Substitution subst = base;
  if (!detail::match_into(schema, event, subst)) return MatchOutcome::failure();
  return MatchOutcome(std::move(subst));
}

inline MatchOutcome match_event(const EventExpression& schema, const EventExpression& event) {
  return match_event(schema, event, Substitution{});
}

/* Union of two substitutions; fails if a variable is bound to two different values. */
inline MatchOutcome merge(const Substitution& a, const Substitution& b) {
  Substitution out = a;
  for (const auto& [name, value] : b.bindings())
    if (!out.bind(name, value)) return MatchOutcome::failure();
  return MatchOutcome(std::move(out));
}

/* True iff `node` is ground or all of its variables are bound by `subst`. */
inline bool is_confirmable(const EventExpression& node, const Substitution& subst) {
  for (const auto& v : variables_of(node))
    if (!subst.contains(v)) return false;
  return true;
}

/*
 * Confirmation of schema nodes no event matched: each must be ground or
 * have every variable bound by the accumulated substitution. The outcome
 * carries `subst` unchanged.
 */
inline MatchOutcome confirm_unmatched(std::span<const EventExpression> nodes, const Substitution& subst) {
  for (const auto& node : nodes)
    if (!is_confirmable(node, subst)) return MatchOutcome::failure();
  return MatchOutcome(subst);
}

}  // namespace memschema

#endif
