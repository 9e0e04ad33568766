/*
 * Copyright 2026 The lpts-agar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lpts/refine.hpp"
#include "lpts/tree.hpp"

namespace lpts {

// ---------------------------------------------------------------------------
// Model files
// ---------------------------------------------------------------------------

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

struct NamedLpts {
  std::string name;
  Lpts lpts;

  friend bool operator==(const NamedLpts&, const NamedLpts&) = default;
};

struct ModelFile {
  std::vector<NamedLpts> lpts_defs;
  std::vector<std::string> system;  // component names, in order
  std::string spec;
  std::map<std::string, std::string> options;  // no syntax yet; always empty when parsed

  const Lpts& get(const std::string& name) const {
    for (const auto& d : lpts_defs)
      if (d.name == name) return d.lpts;
    throw Error("no lpts named '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& d : lpts_defs)
      if (d.name == name) return true;
    return false;
  }

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

namespace detail {

enum class Tok { name, integer, lbrace, rbrace, semi, comma, colon, slash, dash, arrow, bar2, equals, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

inline bool name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; }

inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t k) {
    for (std::size_t j = 0; j < k; ++j, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    const std::size_t l = line, k = col;
    if (name_start(c)) {
      std::size_t j = i;
      while (j < text.size() && name_char(text[j])) ++j;
      out.push_back({Tok::name, std::string(text.substr(i, j - i)), l, k});
      advance(j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j < text.size() && (text[j] == '.' || text[j] == 'e' || text[j] == 'E'))
        throw ParseError(l, k, "decimal probabilities are not supported; write p/q");
      out.push_back({Tok::integer, std::string(text.substr(i, j - i)), l, k});
      advance(j - i);
      continue;
    }
    Tok kind;
    std::size_t len = 1;
    switch (c) {
      case '{': kind = Tok::lbrace; break;
      case '}': kind = Tok::rbrace; break;
      case ';': kind = Tok::semi; break;
      case ',': kind = Tok::comma; break;
      case ':': kind = Tok::colon; break;
      case '/': kind = Tok::slash; break;
      case '=': kind = Tok::equals; break;
      case '-':
        if (i + 1 < text.size() && text[i + 1] == '>') {
          kind = Tok::arrow;
          len = 2;
        } else {
          kind = Tok::dash;
        }
        break;
      case '|':
        if (i + 1 < text.size() && text[i + 1] == '|') {
          kind = Tok::bar2;
          len = 2;
          break;
        }
        [[fallthrough]];
      default:
        throw ParseError(l, k, std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, std::string(text.substr(i, len)), l, k});
    advance(len);
  }
  out.push_back({Tok::end, "", line, col});
  return out;
}

inline const char* describe(Tok t) {
  switch (t) {
    case Tok::name: return "a name";
    case Tok::integer: return "an integer";
    case Tok::lbrace: return "'{'";
    case Tok::rbrace: return "'}'";
    case Tok::semi: return "';'";
    case Tok::comma: return "','";
    case Tok::colon: return "':'";
    case Tok::slash: return "'/'";
    case Tok::dash: return "'-'";
    case Tok::arrow: return "'->'";
    case Tok::bar2: return "'||'";
    case Tok::equals: return "'='";
    case Tok::end: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(lex(text)) {}

  ModelFile parse() {
    ModelFile m;
    std::map<std::string, Token> defined;
    while (is_keyword("lpts")) {
      const Token kw = next();
      const Token name = expect(Tok::name);
      if (defined.count(name.text))
        throw ParseError(name.line, name.column, "lpts '" + name.text + "' is defined twice");
      defined.emplace(name.text, kw);
      m.lpts_defs.push_back({name.text, block()});
    }
    if (m.lpts_defs.empty()) fail("expected 'lpts'");
    keyword("system");
    expect(Tok::equals);
    std::set<std::string> seen;
    do {
      const Token c = expect(Tok::name);
      if (!defined.count(c.text)) throw ParseError(c.line, c.column, "unknown lpts '" + c.text + "'");
      if (!seen.insert(c.text).second)
        throw ParseError(c.line, c.column, "component '" + c.text + "' appears twice in the system");
      m.system.push_back(c.text);
    } while (accept(Tok::bar2));
    expect(Tok::semi);
    keyword("spec");
    expect(Tok::equals);
    const Token s = expect(Tok::name);
    if (!defined.count(s.text)) throw ParseError(s.line, s.column, "unknown lpts '" + s.text + "'");
    m.spec = s.text;
    expect(Tok::semi);
    expect(Tok::end);
    return m;
  }

 private:
  struct RawTransition {
    std::string source;
    std::string action;
    std::vector<std::pair<Rat, std::string>> target;
    Token at;
  };

  Lpts block() {
    expect(Tok::lbrace);
    keyword("alphabet");
    std::vector<std::string> alphabet;
    std::map<std::string, Token> declared;
    if (peek().kind == Tok::name) {
      do {
        const Token a = expect(Tok::name);
        if (declared.count(a.text))
          throw ParseError(a.line, a.column, "action '" + a.text + "' is declared twice");
        declared.emplace(a.text, a);
        alphabet.push_back(a.text);
      } while (accept(Tok::comma));
    }
    expect(Tok::semi);
    keyword("init");
    const Token init = expect(Tok::name);
    expect(Tok::semi);

    std::vector<RawTransition> raw;
    while (!accept(Tok::rbrace)) {
      RawTransition t;
      t.at = expect(Tok::name);
      t.source = t.at.text;
      expect(Tok::dash);
      const Token a = expect(Tok::name);
      if (!declared.count(a.text))
        throw ParseError(a.line, a.column, "action '" + a.text + "' is not in the alphabet");
      t.action = a.text;
      expect(Tok::arrow);
      expect(Tok::lbrace);
      std::set<std::string> targets;
      Rat sum = 0;
      do {
        const Token p0 = peek();
        Rat p = prob();
        if (p == 0) throw ParseError(p0.line, p0.column, "probability must be positive");
        expect(Tok::colon);
        const Token s = expect(Tok::name);
        if (!targets.insert(s.text).second)
          throw ParseError(s.line, s.column, "state '" + s.text + "' appears twice in one distribution");
        sum += p;
        t.target.emplace_back(p, s.text);
      } while (accept(Tok::comma));
      const Token close = expect(Tok::rbrace);
      if (sum != 1)
        throw ParseError(close.line, close.column, "distribution sums to " + to_string(sum));
      expect(Tok::semi);
      raw.push_back(std::move(t));
    }

    // Start state first, the rest by name.
    std::set<std::string> names;
    for (const auto& t : raw) {
      names.insert(t.source);
      for (const auto& e : t.target) names.insert(e.second);
    }
    names.erase(init.text);
    std::vector<std::string> order{init.text};
    order.insert(order.end(), names.begin(), names.end());
    LptsBuilder b(alphabet);
    for (const auto& n : order) b.state(n);
    b.init(init.text);
    for (const auto& t : raw) b.add(t.source, t.action, t.target);
    return b.build();
  }

  Rat prob() {
    const Token num = expect(Tok::integer);
    if (!accept(Tok::slash)) return Rat(mpz_class(num.text));
    const Token den = expect(Tok::integer);
    if (mpz_class(den.text) == 0) throw ParseError(den.line, den.column, "zero denominator");
    Rat r{mpz_class(num.text), mpz_class(den.text)};
    r.canonicalize();
    return r;
  }

  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    next();
    return true;
  }
  bool is_keyword(const char* kw) const { return peek().kind == Tok::name && peek().text == kw; }
  void keyword(const char* kw) {
    if (!is_keyword(kw)) fail(std::string("expected '") + kw + "'");
    next();
  }
  Token expect(Tok k) {
    if (peek().kind != k) fail(std::string("expected ") + describe(k));
    return next();
  }
  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    const std::string found = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.line, t.column, what + ", found " + found);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a model file. Syntax and semantic errors throw ParseError with a
/// 1-based line and column.
inline ModelFile parse_model(std::string_view text) { return detail::Parser(text).parse(); }

/// One `lpts` block in canonical form.
inline std::string print_lpts(const std::string& name, const Lpts& l) {
  std::ostringstream os;
  os << "lpts " << name << " {\n  alphabet ";
  for (std::size_t a = 0; a < l.alphabet().size(); ++a) os << (a ? ", " : "") << l.alphabet()[a];
  os << ";\n  init " << l.state_name(l.start()) << ";\n";
  for (const auto& t : l.transitions()) {
    os << "  " << l.state_name(t.source) << " -" << l.action_name(t.action) << "-> { ";
    bool first = true;
    for (const auto& [s, w] : t.target.entries()) {
      os << (first ? "" : ", ") << to_string(w) << ": " << l.state_name(s);
      first = false;
    }
    os << " };\n";
  }
  os << "}\n";
  return os.str();
}

/// Canonical text; parse_model(print_model(m)) == m for parsed models.
inline std::string print_model(const ModelFile& m) {
  std::string out;
  for (const auto& d : m.lpts_defs) out += print_lpts(d.name, d.lpts) + "\n";
  out += "system = ";
  for (std::size_t i = 0; i < m.system.size(); ++i) out += (i ? " || " : "") + m.system[i];
  out += ";\nspec = " + m.spec + ";\n";
  return out;
}

// ---------------------------------------------------------------------------
// Counterexample documents
// ---------------------------------------------------------------------------

using Json = nlohmann::ordered_json;

struct CexDocument {
  Lpts tree;                          // alphabet restricted to the actions used
  std::vector<std::string> maps_to;   // per tree state, the system state's name
  Json meta = Json::object();

  friend bool operator==(const CexDocument& a, const CexDocument& b) {
    return a.tree == b.tree && a.maps_to == b.maps_to && a.meta == b.meta;
  }
};

inline CexDocument make_cex_document(const StochasticTree& c, const Lpts& system, Json meta = Json::object()) {
  std::set<std::string> used;
  for (const auto& t : c.tree.transitions()) used.insert(c.tree.action_name(t.action));
  CexDocument doc;
  doc.tree = with_alphabet(c.tree, {used.begin(), used.end()});
  for (StateId m : c.exec_map) doc.maps_to.push_back(system.state_name(m));
  doc.meta = std::move(meta);
  return doc;
}

inline Json cex_to_json(const CexDocument& doc) {
  const Lpts& t = doc.tree;
  Json states = Json::array();
  for (std::size_t s = 0; s < t.num_states(); ++s)
    states.push_back({{"id", t.state_name(static_cast<StateId>(s))}, {"maps_to", doc.maps_to.at(s)}});
  Json transitions = Json::array();
  for (const auto& tr : t.transitions()) {
    Json support = Json::array();
    for (const auto& [s, w] : tr.target.entries())
      support.push_back({{"prob", to_string(w)}, {"to", t.state_name(s)}});
    transitions.push_back(
        {{"from", t.state_name(tr.source)}, {"action", t.action_name(tr.action)}, {"support", support}});
  }
  return Json{{"states", states},
              {"transitions", transitions},
              {"root", t.state_name(t.start())},
              {"meta", doc.meta}};
}

inline std::string emit_cex_json(const CexDocument& doc) { return cex_to_json(doc).dump(2) + "\n"; }

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

inline std::string emit_cex_dot(const CexDocument& doc) {
  const Lpts& t = doc.tree;
  std::ostringstream os;
  os << "digraph counterexample {\n  node [shape=box];\n";
  for (std::size_t s = 0; s < t.num_states(); ++s)
    os << "  \"" << dot_escape(t.state_name(static_cast<StateId>(s))) << "\" [label=\""
       << dot_escape(t.state_name(static_cast<StateId>(s))) << "\\n(" << dot_escape(doc.maps_to[s]) << ")\"];\n";
  for (std::size_t k = 0; k < t.num_transitions(); ++k) {
    const auto& tr = t.transition(k);
    const std::string hub = "t" + std::to_string(k);
    os << "  \"" << hub << "\" [shape=point];\n";
    os << "  \"" << dot_escape(t.state_name(tr.source)) << "\" -> \"" << hub << "\" [label=\""
       << dot_escape(t.action_name(tr.action)) << "\"];\n";
    for (const auto& [s, w] : tr.target.entries())
      os << "  \"" << hub << "\" -> \"" << dot_escape(t.state_name(s)) << "\" [label=\"" << to_string(w)
         << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

/// Inverse of emit_cex_json. Throws Error on malformed documents.
inline CexDocument parse_cex_json(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("counterexample JSON: ") + e.what());
  }
  try {
    CexDocument doc;
    std::map<std::string, StateId> id;
    std::vector<std::string> names;
    for (const auto& s : j.at("states")) {
      const auto name = s.at("id").get<std::string>();
      if (!id.emplace(name, static_cast<StateId>(names.size())).second)
        throw Error("counterexample JSON: duplicate state '" + name + "'");
      names.push_back(name);
      doc.maps_to.push_back(s.at("maps_to").get<std::string>());
    }
    std::set<std::string> actions;
    for (const auto& t : j.at("transitions")) actions.insert(t.at("action").get<std::string>());
    const std::vector<std::string> alphabet(actions.begin(), actions.end());
    auto state = [&](const Json& v) {
      auto it = id.find(v.get<std::string>());
      if (it == id.end()) throw Error("counterexample JSON: unknown state '" + v.get<std::string>() + "'");
      return it->second;
    };
    std::vector<Transition> ts;
    for (const auto& t : j.at("transitions")) {
      std::vector<Dist::Entry> entries;
      for (const auto& e : t.at("support")) entries.emplace_back(state(e.at("to")), rat(e.at("prob").get<std::string>()));
      const auto a = std::lower_bound(alphabet.begin(), alphabet.end(), t.at("action").get<std::string>());
      ts.push_back({state(t.at("from")), static_cast<ActionId>(a - alphabet.begin()), Dist(std::move(entries))});
    }
    doc.tree = Lpts(std::move(names), state(j.at("root")), alphabet, std::move(ts));
    doc.meta = j.at("meta");
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("counterexample JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Run logs (JSON lines)
// ---------------------------------------------------------------------------

inline const char* to_string(SplitCause c) { return c == SplitCause::no_match ? "no_match" : "lost_start"; }

inline Json to_json(const SplitRecord& s) {
  return Json{{"cause", to_string(s.cause)}, {"class", s.klass}, {"part", s.part}};
}

inline Json to_json(const IterationRecord& r) {
  Json splits = Json::array();
  for (const auto& s : r.splits) splits.push_back(to_json(s));
  return Json{{"iteration", r.iteration},
              {"level", r.level},
              {"assumption_states", r.abstraction_states},
              {"composed_states", r.composed_states},
              {"abstracted_states", r.abstracted_states},
              {"premise_holds", r.premise_holds},
              {"outcome", r.outcome},
              {"classes_before", r.classes_before},
              {"classes_after", r.classes_after},
              {"epoch_refinements", r.epoch_refinements},
              {"splits", splits}};
}

inline std::string to_json_lines(const std::vector<IterationRecord>& log) {
  std::string out;
  for (const auto& r : log) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace lpts
