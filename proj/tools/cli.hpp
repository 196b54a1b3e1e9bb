#ifndef MEMSCHEMA_TOOLS_CLI_HPP
#define MEMSCHEMA_TOOLS_CLI_HPP

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"

#include "memschema/core.hpp"
#include "memschema/document.hpp"
#include "memschema/memory.hpp"
#include "memschema/report.hpp"
#include "memschema/sequence.hpp"
#include "memschema/story.hpp"
#include "memschema/textio.hpp"

namespace memschema::cli {

enum ExitCode : int {
  kSuccess = 0,
  kNotUnderstood = 1,
  kSyntaxError = 2,
  kValidationError = 3,
  kUsageError = 4,
};

struct RunConfig {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::string> assertions;
  std::string format = "text";
  std::string dot_path;
  bool trace = false;
};

class UsageError : public Error {
public:
  using Error::Error;
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

class Session {
public:
  Session(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool color)
      : cfg_(cfg), out_(out), err_(err), color_(color) {}

  int run() {
    try {
      if (cfg_.subcommand == "check") return check();
      if (cfg_.subcommand == "match") return match();
      if (cfg_.subcommand == "understand") return understand_cmd();
      if (cfg_.subcommand == "story") return story();
      throw UsageError("unknown subcommand " + cfg_.subcommand);
    } catch (const SyntaxError& e) {
      report_errors("syntax", {Diagnostic{e.location(), e.message()}});
      return kSyntaxError;
    } catch (const ValidationError& e) {
      report_errors("validation", e.diagnostics());
      return kValidationError;
    } catch (const UnknownEvent& e) {
      report_errors("usage", {Diagnostic{{}, std::string("--assert: ") + e.what()}});
      return kUsageError;
    } catch (const UsageError& e) {
      report_errors("usage", {Diagnostic{{}, e.what()}});
      return kUsageError;
    }
  }

private:
  bool json_mode() const { return cfg_.format == "json"; }

  void emit(const nlohmann::json& j) { out_ << j.dump(2) << "\n"; }

  void report_errors(const std::string& phase, const std::vector<Diagnostic>& ds) {
    for (const auto& d : ds) {
      err_ << (current_.empty() ? "" : current_ + ":");
      if (d.location.known()) err_ << to_string(d.location) << ":";
      err_ << (current_.empty() && !d.location.known() ? "" : " ") << "error: " << d.message << "\n";
    }
    if (json_mode()) {
      nlohmann::json diags = nlohmann::json::array();
      for (const auto& d : ds) diags.push_back(json::to_json(d));
      emit({{"kind", "error_report"}, {"subcommand", cfg_.subcommand}, {"phase", phase}, {"file", current_},
            {"diagnostics", diags}});
    }
  }

  CorpusDocument load_corpus(const std::string& path) {
    current_ = path;
    auto doc = parse_corpus(read_file(path), path);
    current_.clear();
    return doc;
  }

  SchemaDocument load_schemas(const std::string& path) {
    current_ = path;
    auto doc = parse_schema_file(read_file(path));
    current_.clear();
    return doc;
  }

  std::string paint(const std::string& s, const char* code) const {
    return color_ ? std::string("\033[") + code + "m" + s + "\033[0m" : s;
  }

  int check() {
    const std::string& path = cfg_.inputs.at(0);
    if (ends_with(path, ".events")) {
      auto doc = load_corpus(path);
      if (json_mode())
        emit({{"kind", "check_report"}, {"file", path}, {"file_kind", "corpus"}, {"ok", true},
              {"events", doc.events.size()}, {"diagnostics", nlohmann::json::array()}});
      else
        out_ << "ok: " << path << ": " << doc.events.size() << " events\n";
      return kSuccess;
    }
    if (ends_with(path, ".mps")) {
      auto doc = load_schemas(path);
      if (json_mode())
        emit({{"kind", "check_report"}, {"file", path}, {"file_kind", "schema"}, {"ok", true},
              {"schemas", doc.schemas.size()}, {"links", doc.links.size()}, {"diagnostics", nlohmann::json::array()}});
      else
        out_ << "ok: " << path << ": " << doc.schemas.size() << " schemas, " << doc.links.size() << " links\n";
      return kSuccess;
    }
    throw UsageError("check: unrecognized file extension (expected .events or .mps): " + path);
  }

  struct Inputs {
    SchemaDocument schemas;
    CorpusDocument corpus;
  };

  Inputs load_pair() {
    Inputs in;
    in.schemas = load_schemas(cfg_.inputs.at(0));
    in.corpus = load_corpus(cfg_.inputs.at(1));
    return in;
  }

  MemoryState seeded(const CorpusDocument& corpus) const {
    MemoryState s(corpus.ids());
    for (const auto& a : cfg_.assertions) s = assert_true(s, a);
    return s;
  }

  int match() {
    auto in = load_pair();
    const MemoryState state = seeded(in.corpus);
    bool all = true;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& mp : in.schemas.schemas) {
      auto r = match_sequence(mp, in.corpus, state);
      all = all && r.has_value();
      if (json_mode()) {
        results.push_back({{"kind", "schema_match"}, {"schema", mp.name}, {"matched", r.has_value()},
                           {"result", r ? json::to_json(*r) : nlohmann::json(nullptr)}});
        continue;
      }
      if (!r) {
        out_ << "schema " << mp.name << ": no match\n";
        continue;
      }
      out_ << "schema " << mp.name << ": match, l = " << r->length() << "\n";
      for (const auto& a : r->anchors)
        out_ << "  anchor " << a.root << " -> " << a.event << " (position " << a.position << ")\n";
      for (const auto& [node, ev] : r->node_map) out_ << "  node " << node << " -> " << ev << "\n";
      for (const auto& node : r->unmatched) out_ << "  confirmed " << node << "\n";
      out_ << "  substitution:";
      if (r->substitution.empty()) out_ << " (empty)";
      for (const auto& [k, v] : r->substitution.bindings()) out_ << " " << k << " = " << to_string(v);
      out_ << "\n";
    }
    if (json_mode()) emit({{"kind", "match_report"}, {"results", results}});
    return all ? kSuccess : kNotUnderstood;
  }

  void print_report(const UnderstandingReport& rep, const CorpusDocument& corpus, const std::string* dot) {
    if (json_mode()) {
      auto j = json::to_json(rep, corpus, cfg_.trace);
      if (dot) j["dot"] = *dot;
      emit(j);
      return;
    }
    const bool ok = rep.verdict == Verdict::understandable;
    out_ << "verdict: " << paint(std::string(to_string(rep.verdict)), ok ? "32" : "31") << "\n";
    out_ << "chain length: " << rep.chain_length() << "\n";
    out_ << "chain:";
    for (std::size_t i = 0; i < rep.chain.size(); ++i) out_ << (i ? " -> " : " ") << rep.chain[i];
    out_ << "\n";
    out_ << "anchor chain:";
    for (const auto& a : rep.anchor_chain) out_ << " " << a;
    out_ << (rep.anchor_chain_confirmed ? " (confirmed)" : " (not confirmed)") << "\n";
    for (const auto& s : rep.segments) {
      out_ << "segment " << s.schema << ":";
      for (std::size_t p = s.first; p <= s.last && p < corpus.events.size(); ++p) out_ << " " << corpus.events[p].id();
      out_ << "\n";
    }
    out_ << "memory:";
    for (const auto& t : rep.state.truths()) out_ << " " << t;
    out_ << "\n";
    for (const auto& e : rep.state.edges())
      out_ << "confirmed: (" << e.from << " " << to_string(e.label) << " " << e.to << ")\n";
    for (const auto& d : rep.diagnostics) out_ << "note: " << d << "\n";
    if (cfg_.trace)
      for (const auto& t : rep.trace) out_ << t << "\n";
  }

  void write_dot(const std::string& dot) {
    std::ofstream f(cfg_.dot_path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + cfg_.dot_path);
    f << dot;
  }

  int understand_cmd() {
    auto in = load_pair();
    UnderstandingReport rep;
    try {
      rep = understand(in.schemas, in.corpus, cfg_.assertions, cfg_.trace);
    } catch (const SegmentationFailure& f) {
      print_report(f.partial(), in.corpus, nullptr);
      return kNotUnderstood;
    }
    std::string dot;
    const bool ok = rep.verdict == Verdict::understandable;
    if (ok && !cfg_.dot_path.empty()) {
      dot = export_dot(build_understanding_diagram(in.schemas, in.corpus, rep));
      write_dot(dot);
    }
    print_report(rep, in.corpus, dot.empty() ? nullptr : &dot);
    return ok ? kSuccess : kNotUnderstood;
  }

  int story() {
    auto in = load_pair();
    UnderstandingReport rep;
    try {
      rep = understand(in.schemas, in.corpus, cfg_.assertions);
    } catch (const SegmentationFailure& f) {
      rep = f.partial();
    }
    if (rep.verdict != Verdict::understandable) {
      for (const auto& d : rep.diagnostics) err_ << "note: " << d << "\n";
      err_ << "error: text is not understandable; no understanding diagram\n";
      if (json_mode())
        emit({{"kind", "story_report"}, {"verdict", std::string(to_string(rep.verdict))}, {"diagram", nullptr},
              {"diagnostics", rep.diagnostics}});
      return kNotUnderstood;
    }
    const auto diagram = build_understanding_diagram(in.schemas, in.corpus, rep);
    const std::string dot = export_dot(diagram);
    if (!cfg_.dot_path.empty()) write_dot(dot);
    if (json_mode()) {
      emit({{"kind", "story_report"}, {"verdict", std::string(to_string(rep.verdict))}, {"diagram", json::to_json(diagram)},
            {"dot", dot}, {"diagnostics", rep.diagnostics}});
    } else if (cfg_.dot_path.empty()) {
      out_ << dot;
    } else {
      out_ << render(diagram);
    }
    return kSuccess;
  }

  const RunConfig& cfg_;
  std::ostream& out_;
  std::ostream& err_;
  bool color_;
  std::string current_;
};

}  // namespace detail

/* Parses argv and runs one subcommand. Returns the process exit code. */
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Schema-based text understanding over event expressions", "memschema"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  };
  auto add_pair = [&](CLI::App* sub) {
    sub->add_option("schemas", cfg.inputs, "file.mps then file.events")->required()->expected(2)->check(CLI::ExistingFile);
    sub->add_option("--assert", cfg.assertions, "Event id known True (repeatable)")->allow_extra_args(false);
    add_common(sub);
  };

  auto* check = app.add_subcommand("check", "Parse and validate a .events or .mps file");
  check->add_option("file", cfg.inputs, "Input file")->required()->expected(1)->check(CLI::ExistingFile);
  add_common(check);

  auto* match = app.add_subcommand("match", "Match every schema against the corpus");
  add_pair(match);

  auto* understand = app.add_subcommand("understand", "Run the full understanding pipeline");
  add_pair(understand);
  understand->add_flag("--trace", cfg.trace, "Print every rule firing");
  understand->add_option("--dot", cfg.dot_path, "Also write the understanding diagram as DOT");

  auto* story = app.add_subcommand("story", "Build the understanding diagram and export DOT");
  add_pair(story);
  story->add_option("--dot", cfg.dot_path, "Write DOT to this path instead of standard output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();

  const bool color = std::getenv("NO_COLOR") == nullptr && &out == &std::cout && ::isatty(STDOUT_FILENO);
  return detail::Session(cfg, out, err, color).run();
}

}  // namespace memschema::cli

#endif
