#ifndef MEMSCHEMA_ERRORS_HPP
#define MEMSCHEMA_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace memschema {

/* 1-based line/column into a UTF-8 document; column counts code points. */
struct Location {
  std::size_t line = 0;
  std::size_t column = 0;

  bool known() const { return line != 0; }
  friend bool operator==(const Location&, const Location&) = default;
};

inline std::string to_string(const Location& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

struct Diagnostic {
  Location location;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

inline std::string to_string(const Diagnostic& d) {
  if (!d.location.known()) return d.message;
  return to_string(d.location) + ": " + d.message;
}

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
public:
  SyntaxError(Location loc, const std::string& message)
      : Error(to_string(Diagnostic{loc, message})), location_(loc), message_(message) {}

  const Location& location() const { return location_; }
  const std::string& message() const { return message_; }

private:
  Location location_;
  std::string message_;
};

/* A semantic constraint was violated; carries one diagnostic per violation. */
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics)
      : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  ValidationError(Location loc, const std::string& message)
      : ValidationError(std::vector<Diagnostic>{{loc, message}}) {}
  explicit ValidationError(const std::string& message)
      : ValidationError(Location{}, message) {}

  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
  static std::string join(const std::vector<Diagnostic>& ds) {
    std::string out;
    for (const auto& d : ds) {
      if (!out.empty()) out += "\n";
      out += to_string(d);
    }
    return out;
  }

  std::vector<Diagnostic> diagnostics_;
};

class PreconditionError : public Error {
public:
  using Error::Error;
};

class UnknownEvent : public Error {
public:
  explicit UnknownEvent(const std::string& id) : Error("unknown event " + id), id_(id) {}
  const std::string& id() const { return id_; }

private:
  std::string id_;
};

}  // namespace memschema

#endif
