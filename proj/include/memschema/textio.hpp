#ifndef MEMSCHEMA_TEXTIO_HPP
#define MEMSCHEMA_TEXTIO_HPP

#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "memschema/core.hpp"
#include "memschema/document.hpp"
#include "memschema/errors.hpp"
#include "memschema/schema.hpp"

/*
 * Text formats.
 *
 *   corpus      := event_def*
 *   event_def   := "event" IDENT "{" slot* "}"
 *   slot        := CASE ":" value
 *   value       := WORD | VAR | "event" "{" slot* "}"
 *   VAR         := "?" IDENT
 *   WORD        := bare token | double-quoted text
 *
 *   schema_file := mp_def*
 *   mp_def      := "memory_schema" IDENT "{" "roots" ":" "[" IDENT ("," IDENT)* "]"
 *                  (node_def | edge_def | fs_def)* "}"
 *   node_def    := "node" IDENT "=" "schema" "{" slot* "}"
 *   edge_def    := IDENT "-" REL ["$"] "->" IDENT
 *   fs_def      := "fs" IDENT "=" IDENT
 *
 * "#" starts a comment running to end of line. Input must be UTF-8 and is
 * NFC-normalized before tokenizing.
 */

namespace memschema {

namespace textio_detail {

// Returns the location of the first malformed sequence, if any.
inline std::optional<Location> find_invalid_utf8(std::string_view s) {
  Location loc{1, 1};
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return loc;
    }
    if (i + len > s.size()) return loc;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return loc;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
    if (cp < kMin[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return loc;
    if (c == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
    i += len;
  }
  return std::nullopt;
}

inline std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("unicode normalizer unavailable");
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  if (norm->isNormalized(in, status) && U_SUCCESS(status)) return std::string(utf8);
  status = U_ZERO_ERROR;
  icu::UnicodeString out = norm->normalize(in, status);
  if (U_FAILURE(status)) throw Error("unicode normalization failed");
  std::string result;
  out.toUTF8String(result);
  return result;
}

enum class Tok { bare, quoted, var, lbrace, rbrace, lbracket, rbracket, colon, comma, equals, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  Location loc;
};

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline bool is_punct(char c) {
  return c == '{' || c == '}' || c == '[' || c == ']' || c == ':' || c == ',' || c == '=' || c == '"' || c == '#';
}

class Lexer {
public:
  explicit Lexer(std::string_view text) : s_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip();
      Token t;
      t.loc = loc_;
      if (i_ >= s_.size()) {
        out.push_back(t);
        return out;
      }
      const char c = s_[i_];
      switch (c) {
        case '{': t.kind = Tok::lbrace; break;
        case '}': t.kind = Tok::rbrace; break;
        case '[': t.kind = Tok::lbracket; break;
        case ']': t.kind = Tok::rbracket; break;
        case ':': t.kind = Tok::colon; break;
        case ',': t.kind = Tok::comma; break;
        case '=': t.kind = Tok::equals; break;
        default: break;
      }
      if (t.kind != Tok::end) {
        t.text = std::string(1, c);
        advance();
        out.push_back(std::move(t));
        continue;
      }
      if (c == '"') {
        t.kind = Tok::quoted;
        t.text = quoted();
        out.push_back(std::move(t));
        continue;
      }
      const std::size_t from = i_;
      while (i_ < s_.size() && !is_space(s_[i_]) && !is_punct(s_[i_])) advance();
      std::string bare(s_.substr(from, i_ - from));
      if (bare.front() == '?') {
        std::string name = bare.substr(1);
        if (!is_identifier(name)) throw SyntaxError(t.loc, "malformed variable '" + bare + "'");
        t.kind = Tok::var;
        t.text = std::move(name);
      } else {
        t.kind = Tok::bare;
        t.text = std::move(bare);
      }
      out.push_back(std::move(t));
    }
  }

private:
  void advance() {
    const auto c = static_cast<unsigned char>(s_[i_]);
    if (c == '\n') {
      ++loc_.line;
      loc_.column = 1;
    } else if ((c & 0xC0) != 0x80) {
      ++loc_.column;
    }
    ++i_;
    // Continuation bytes share the column of their lead byte.
    while (i_ < s_.size() && (static_cast<unsigned char>(s_[i_]) & 0xC0) == 0x80) ++i_;
  }

  void skip() {
    while (i_ < s_.size()) {
      if (is_space(s_[i_])) {
        advance();
      } else if (s_[i_] == '#') {
        while (i_ < s_.size() && s_[i_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string quoted() {
    const Location start = loc_;
    advance();
    std::string out;
    for (;;) {
      if (i_ >= s_.size() || s_[i_] == '\n') throw SyntaxError(start, "unterminated string");
      const char c = s_[i_];
      if (c == '"') {
        advance();
        break;
      }
      if (c == '\\') {
        const Location esc = loc_;
        advance();
        if (i_ >= s_.size()) throw SyntaxError(start, "unterminated string");
        switch (s_[i_]) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 'r': out += '\r'; break;
          case 't': out += '\t'; break;
          default: throw SyntaxError(esc, "unknown escape sequence");
        }
        advance();
        continue;
      }
      // Copy the whole code point.
      std::size_t from = i_;
      advance();
      out.append(s_.substr(from, i_ - from));
    }
    if (out.empty()) throw SyntaxError(start, "empty word");
    return out;
  }

  std::string_view s_;
  std::size_t i_ = 0;
  Location loc_{1, 1};
};

inline std::vector<Token> tokenize(std::string_view text, std::string& storage) {
  if (auto bad = find_invalid_utf8(text)) throw SyntaxError(*bad, "invalid UTF-8");
  storage = nfc(text);
  return Lexer(storage).run();
}

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  bool at_end() const { return peek().kind == Tok::end; }
  const Token& peek(std::size_t ahead = 0) const { return t_[std::min(p_ + ahead, t_.size() - 1)]; }

  const Token& next() {
    const Token& t = t_[p_];
    if (p_ + 1 < t_.size()) ++p_;
    return t;
  }

  [[noreturn]] void fail(const Token& t, const std::string& expected) const {
    std::string got = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw SyntaxError(t.loc, "expected " + expected + ", found " + got);
  }

  const Token& expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(peek(), what);
    return next();
  }

  void keyword(const std::string& kw) {
    if (peek().kind != Tok::bare || peek().text != kw) fail(peek(), "'" + kw + "'");
    next();
  }

  bool is_keyword(const std::string& kw, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::bare && peek(ahead).text == kw;
  }

  const Token& ident(const std::string& what) {
    const Token& t = peek();
    if (t.kind != Tok::bare || !is_identifier(t.text)) fail(t, what);
    return next();
  }

  // "{" slot* "}" -- the opening brace is consumed here.
  EventExpression slots(const std::string& id) {
    expect(Tok::lbrace, "'{'");
    std::vector<Slot> out;
    std::set<CaseRelation> seen;
    while (peek().kind != Tok::rbrace) {
      const Token& key = peek();
      if (key.kind != Tok::bare) fail(key, "case-relation or '}'");
      next();
      auto rel = parse_case_relation(key.text);
      expect(Tok::colon, "':'");
      SlotValue v = value();
      if (!rel) throw ValidationError(key.loc, "unknown case-relation " + key.text);
      if (!seen.insert(*rel).second) throw ValidationError(key.loc, "duplicate case-relation " + key.text);
      out.push_back({*rel, std::move(v)});
    }
    next();
    return EventExpression(id, std::move(out));
  }

  SlotValue value() {
    const Token& t = peek();
    switch (t.kind) {
      case Tok::var: next(); return Var{t.text};
      case Tok::quoted: next(); return Word{t.text};
      case Tok::bare:
        if (t.text == "event" && peek(1).kind == Tok::lbrace) {
          if (++depth_ > kMaxNesting) throw SyntaxError(t.loc, "event clauses nested too deeply");
          next();
          SlotValue nested(slots(""));
          --depth_;
          return nested;
        }
        next();
        return Word{t.text};
      default: fail(t, "value");
    }
  }

private:
  static constexpr int kMaxNesting = 64;

  std::vector<Token> t_;
  std::size_t p_ = 0;
  int depth_ = 0;
};

inline bool needs_quotes(const std::string& w) {
  if (w.empty() || w == "event" || w.front() == '?') return true;
  for (char c : w)
    if (is_space(c) || is_punct(c) || c == '\\') return true;
  return false;
}

inline std::string render_word(const std::string& w) {
  if (!needs_quotes(w)) return w;
  std::string out = "\"";
  for (char c : w) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

inline std::string render_value(const SlotValue& v);

inline std::string render_inline(const EventExpression& e) {
  std::string out = "{";
  for (const auto& s : e.slots()) out += " " + std::string(to_string(s.relation)) + ": " + render_value(s.value);
  return out + " }";
}

inline std::string render_value(const SlotValue& v) {
  if (v.is_word()) return render_word(v.word().text);
  if (v.is_var()) return "?" + v.var().name;
  return "event " + render_inline(v.nested());
}

}  // namespace textio_detail

inline CorpusDocument parse_corpus(std::string_view text, std::string source_name = {}) {
  using namespace textio_detail;
  std::string storage;
  Parser p(tokenize(text, storage));
  CorpusDocument doc;
  doc.source_name = std::move(source_name);
  std::set<std::string> ids;
  while (!p.at_end()) {
    const Location at = p.peek().loc;
    p.keyword("event");
    const Token& id = p.ident("event id");
    const Location id_loc = id.loc;
    std::string name = id.text;
    EventExpression e = p.slots(name);
    if (!ids.insert(name).second) throw ValidationError(id_loc, "duplicate event id " + name);
    if (!is_ground(e)) throw ValidationError(at, "corpus events must be ground (event " + name + ")");
    doc.events.push_back(std::move(e));
  }
  return doc;
}

/*
 * Parses and validates a schema file. Edges whose target is a root of
 * another schema in the same file are declared cross-schema sequel links.
 */
inline SchemaDocument parse_schema_file(std::string_view text) {
  using namespace textio_detail;
  std::string storage;
  Parser p(tokenize(text, storage));

  struct RawSchema {
    MemorySchema mp;
    std::vector<Location> edge_locs;
    std::vector<Location> fs_locs;
  };
  std::vector<RawSchema> raw;
  static const std::regex edge_re(R"(^([A-Za-z_][A-Za-z0-9_]*)-([A-Za-z0-9_]+)(\$?)->([A-Za-z_][A-Za-z0-9_]*)$)");

  while (!p.at_end()) {
    RawSchema rs;
    MemorySchema& mp = rs.mp;
    const Location at = p.peek().loc;
    p.keyword("memory_schema");
    mp.name = p.ident("schema name").text;
    mp.locations["schema"] = at;
    p.expect(Tok::lbrace, "'{'");
    mp.locations["roots"] = p.peek().loc;
    p.keyword("roots");
    p.expect(Tok::colon, "':'");
    p.expect(Tok::lbracket, "'['");
    mp.roots.push_back(p.ident("root node id").text);
    while (p.peek().kind == Tok::comma) {
      p.next();
      mp.roots.push_back(p.ident("root node id").text);
    }
    p.expect(Tok::rbracket, "']'");

    while (p.peek().kind != Tok::rbrace) {
      const Token& head = p.peek();
      const Location loc = head.loc;
      if (p.is_keyword("node") && p.peek(1).kind == Tok::bare && p.peek(2).kind == Tok::equals) {
        p.next();
        std::string id = p.ident("node id").text;
        p.expect(Tok::equals, "'='");
        p.keyword("schema");
        mp.locations.emplace("node:" + id, loc);
        mp.nodes.push_back(p.slots(id));
      } else if (p.is_keyword("fs") && p.peek(1).kind == Tok::bare && p.peek(2).kind == Tok::equals) {
        p.next();
        std::string from = p.ident("node id").text;
        p.expect(Tok::equals, "'='");
        std::string to = p.ident("node id").text;
        mp.fs_links.push_back({from, to});
        rs.fs_locs.push_back(loc);
      } else if (head.kind == Tok::bare) {
        // An edge may be split over up to three tokens: a -rel-> b, a-rel-> b, ...
        std::string joined;
        std::smatch m;
        bool matched = false;
        for (int k = 0; k < 3 && p.peek().kind == Tok::bare; ++k) {
          joined += p.next().text;
          if (std::regex_match(joined, m, edge_re)) {
            matched = true;
            break;
          }
        }
        if (!matched) throw SyntaxError(loc, "malformed edge '" + joined + "'");
        auto label = parse_relation_label(m[2].str());
        if (!label) throw ValidationError(loc, "unknown relation label " + m[2].str());
        mp.edges.push_back({m[1].str(), *label, m[3].length() > 0, m[4].str()});
        rs.edge_locs.push_back(loc);
      } else {
        p.fail(head, "node, edge, fs or '}'");
      }
    }
    p.next();
    raw.push_back(std::move(rs));
  }

  SchemaDocument doc;
  std::vector<Diagnostic> diags;
  std::set<std::string> names;
  for (const auto& rs : raw)
    if (!names.insert(rs.mp.name).second)
      diags.push_back({rs.mp.location_of("schema"), "duplicate schema name " + rs.mp.name});

  for (auto& rs : raw) {
    MemorySchema& mp = rs.mp;
    std::vector<SchemaEdge> local;
    std::size_t kept = 0;
    for (std::size_t i = 0; i < mp.edges.size(); ++i) {
      const SchemaEdge& e = mp.edges[i];
      const MemorySchema* owner = nullptr;
      if (!mp.has_node(e.to)) {
        for (const auto& other : raw)
          if (&other != &rs && other.mp.has_node(e.to)) {
            if (owner != nullptr) {
              diags.push_back({rs.edge_locs[i], "edge " + e.from + "->" + e.to + ": ambiguous target " + e.to});
              break;
            }
            owner = &other.mp;
          }
      }
      if (owner == nullptr) {
        mp.locations["edge:" + std::to_string(kept++)] = rs.edge_locs[i];
        local.push_back(e);
        continue;
      }
      if (e.label != RelationLabel::sequel || e.test || !mp.is_root(e.from) || !owner->is_root(e.to)) {
        diags.push_back({rs.edge_locs[i], "edge " + e.from + "->" + e.to +
                                              ": cross-schema link must be a plain sequel edge between roots"});
        continue;
      }
      doc.links.push_back({mp.name, e.from, owner->name, e.to});
    }
    mp.edges = std::move(local);
    for (std::size_t i = 0; i < rs.fs_locs.size(); ++i) mp.locations["fs:" + std::to_string(i)] = rs.fs_locs[i];
    for (auto& d : validate_memory_schema(mp)) diags.push_back(std::move(d));
    doc.schemas.push_back(std::move(mp));
  }
  if (!diags.empty()) throw ValidationError(std::move(diags));
  return doc;
}

inline std::string render(const CorpusDocument& doc) {
  using namespace textio_detail;
  std::string out;
  for (std::size_t i = 0; i < doc.events.size(); ++i) {
    const auto& e = doc.events[i];
    if (i > 0) out += "\n";
    out += "event " + e.id() + " {\n";
    for (const auto& s : e.slots()) out += "  " + std::string(to_string(s.relation)) + ": " + render_value(s.value) + "\n";
    out += "}\n";
  }
  return out;
}

inline std::string render(const SchemaDocument& doc) {
  using namespace textio_detail;
  std::string out;
  for (std::size_t i = 0; i < doc.schemas.size(); ++i) {
    const auto& mp = doc.schemas[i];
    if (i > 0) out += "\n";
    out += "memory_schema " + mp.name + " {\n";
    out += "  roots: [";
    for (std::size_t r = 0; r < mp.roots.size(); ++r) out += (r ? ", " : "") + mp.roots[r];
    out += "]\n";
    for (const auto& n : mp.nodes) out += "  node " + n.id() + " = schema " + render_inline(n) + "\n";
    for (const auto& e : mp.edges) out += "  " + e.from + " -" + std::string(to_string(e.label)) + (e.test ? "$" : "") + "-> " + e.to + "\n";
    for (const auto& l : doc.links)
      if (l.from_schema == mp.name) out += "  " + l.from_node + " -sequel-> " + l.to_node + "\n";
    for (const auto& f : mp.fs_links) out += "  fs " + f.from + " = " + f.to + "\n";
    out += "}\n";
  }
  return out;
}

}  // namespace memschema

#endif
