#include "effsec/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace effsec {

namespace {

struct Token {
  enum class Kind { ident, obs_class, lbrace, rbrace, colon, equals, dot, arrow, end };
  Kind kind = Kind::end;
  std::string text;
  int line = 1;
  int column = 1;
};

const char* kind_name(Token::Kind kind) {
  switch (kind) {
    case Token::Kind::ident: return "identifier";
    case Token::Kind::obs_class: return "observation class";
    case Token::Kind::lbrace: return "'{'";
    case Token::Kind::rbrace: return "'}'";
    case Token::Kind::colon: return "':'";
    case Token::Kind::equals: return "'='";
    case Token::Kind::dot: return "'.'";
    case Token::Kind::arrow: return "'->'";
    case Token::Kind::end: return "end of input";
  }
  return "token";
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

struct Lexer {
  const std::string& text;
  std::size_t pos = 0;
  int line = 1;
  int column = 1;
  std::optional<ParseError> error;

  explicit Lexer(const std::string& t) : text(t) {}

  void advance() {
    if (text[pos] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
    ++pos;
  }

  void skip_blank() {
    while (pos < text.size()) {
      char c = text[pos];
      if (c == '#') {
        while (pos < text.size() && text[pos] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_blank();
      if (pos >= text.size()) break;
      Token token;
      token.line = line;
      token.column = column;
      char c = text[pos];
      if (ident_char(c)) {
        std::string word;
        while (pos < text.size() && ident_char(text[pos])) {
          word += text[pos];
          advance();
        }
        token.kind = Token::Kind::ident;
        token.text = word;
      } else if (c == '{') {
        // A brace glued to a '+'-joined member list is a single observation
        // class token; anything else is a block brace.
        std::size_t scan = pos + 1;
        int depth = 1;
        bool plus = false, closed = false;
        while (scan < text.size()) {
          char d = text[scan];
          if (std::isspace(static_cast<unsigned char>(d)) || d == '#') break;
          if (d == '{') ++depth;
          if (d == '+') plus = true;
          if (d == '}') {
            if (--depth == 0) {
              closed = true;
              ++scan;
              break;
            }
          }
          ++scan;
        }
        if (closed && plus) {
          token.kind = Token::Kind::obs_class;
          token.text = text.substr(pos, scan - pos);
          while (pos < scan) advance();
        } else {
          token.kind = Token::Kind::lbrace;
          token.text = "{";
          advance();
        }
      } else if (c == '}') {
        token.kind = Token::Kind::rbrace;
        token.text = "}";
        advance();
      } else if (c == ':') {
        token.kind = Token::Kind::colon;
        token.text = ":";
        advance();
      } else if (c == '=') {
        token.kind = Token::Kind::equals;
        token.text = "=";
        advance();
      } else if (c == '.') {
        token.kind = Token::Kind::dot;
        token.text = ".";
        advance();
      } else if (c == '-' && pos + 1 < text.size() && text[pos + 1] == '>') {
        token.kind = Token::Kind::arrow;
        token.text = "->";
        advance();
        advance();
      } else {
        error = ParseError{line, column, std::string("unexpected character '") + c + "'", {}};
        return tokens;
      }
      tokens.push_back(std::move(token));
    }
    Token eof;
    eof.kind = Token::Kind::end;
    eof.line = line;
    eof.column = column;
    tokens.push_back(eof);
    return tokens;
  }
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) {
    tokens_ = lexer_.run();
    if (lexer_.error) error_ = lexer_.error;
  }

  ParseResult run() {
    ParseResult result;
    if (!error_) parse_document();
    if (error_) {
      result.error = error_;
      return result;
    }
    doc_.warnings = validate_network(doc_.network);
    result.document = std::move(doc_);
    return result;
  }

 private:
  const Token& peek() const { return tokens_[index_]; }
  const Token& take() { return tokens_[index_++]; }

  void fail(const Token& at, std::string message, std::vector<std::string> expected = {}) {
    if (!error_) error_ = ParseError{at.line, at.column, std::move(message), std::move(expected)};
  }

  bool expect_keyword(const std::string& word) {
    const Token& token = peek();
    if (token.kind == Token::Kind::ident && token.text == word) {
      take();
      return true;
    }
    fail(token, "expected '" + word + "'", {word});
    return false;
  }

  std::optional<std::string> expect_ident(const std::string& what) {
    const Token& token = peek();
    if (token.kind == Token::Kind::ident) return take().text;
    fail(token, "expected " + what + ", got " + kind_name(token.kind), {"identifier"});
    return std::nullopt;
  }

  std::optional<std::string> expect_obs_token(const std::string& what) {
    const Token& token = peek();
    if (token.kind == Token::Kind::ident || token.kind == Token::Kind::obs_class)
      return take().text;
    fail(token, "expected " + what + ", got " + kind_name(token.kind),
         {"identifier", "observation class"});
    return std::nullopt;
  }

  bool expect(Token::Kind kind) {
    const Token& token = peek();
    if (token.kind == kind) {
      take();
      return true;
    }
    fail(token, std::string("expected ") + kind_name(kind) + ", got " + kind_name(token.kind),
         {kind_name(kind)});
    return false;
  }

  bool at_keyword(const std::string& word) const {
    return peek().kind == Token::Kind::ident && peek().text == word;
  }

  void parse_document() {
    if (!expect_keyword("network")) return;
    auto name = expect_ident("network name");
    if (!name) return;
    doc_.network.name = *name;

    parse_agents();
    if (error_) return;
    parse_names("actions", doc_.network.actions);
    if (error_) return;
    parse_observation_decls();
    if (error_) return;

    if (!at_keyword("state")) {
      fail(peek(), "expected 'state'", {"state"});
      return;
    }
    while (!error_ && at_keyword("state")) parse_state();
    if (error_) return;

    if (!expect_keyword("init")) return;
    auto initial = expect_ident("initial state");
    if (!initial) return;
    if (!declared_states_.count(*initial)) {
      fail(tokens_[index_ - 1], "undeclared state " + *initial);
      return;
    }
    doc_.network.initial = *initial;

    while (!error_ && peek().kind == Token::Kind::ident && !at_keyword("goal")) {
      parse_transition();
    }
    while (!error_ && at_keyword("goal")) parse_goal();
    if (error_) return;
    if (peek().kind != Token::Kind::end)
      fail(peek(), std::string("expected transition, 'goal' or end of input, got ") +
                       kind_name(peek().kind),
           {"identifier", "goal"});
  }

  void parse_agents() {
    if (!expect_keyword("agents")) return;
    if (!expect(Token::Kind::lbrace)) return;
    while (!error_ && peek().kind == Token::Kind::ident) {
      std::string name = take().text;
      if (!expect(Token::Kind::colon)) return;
      const Token& role_token = peek();
      auto role = expect_ident("agent role");
      if (!role) return;
      if (*role != "high" && *role != "low") {
        fail(role_token, "expected 'high' or 'low', got '" + *role + "'", {"high", "low"});
        return;
      }
      if (declared_agents_.count(name)) {
        fail(role_token, "agent declared more than once: " + name);
        return;
      }
      declared_agents_.insert(name);
      doc_.network.agents.push_back({name, *role == "high" ? Role::high : Role::low});
    }
    if (doc_.network.agents.empty()) {
      fail(peek(), "expected at least one agent declaration", {"identifier"});
      return;
    }
    expect(Token::Kind::rbrace);
  }

  void parse_names(const std::string& keyword, std::vector<std::string>& out) {
    if (!expect_keyword(keyword)) return;
    if (!expect(Token::Kind::lbrace)) return;
    std::set<std::string> seen;
    while (!error_ && peek().kind == Token::Kind::ident) {
      std::string name = take().text;
      if (!seen.insert(name).second) {
        fail(tokens_[index_ - 1], keyword + " entry declared more than once: " + name);
        return;
      }
      out.push_back(name);
    }
    if (out.empty()) {
      fail(peek(), "expected at least one name in '" + keyword + "'", {"identifier"});
      return;
    }
    expect(Token::Kind::rbrace);
  }

  void parse_observation_decls() {
    if (!expect_keyword("observations")) return;
    if (!expect(Token::Kind::lbrace)) return;
    std::set<std::string> seen;
    while (!error_ &&
           (peek().kind == Token::Kind::ident || peek().kind == Token::Kind::obs_class)) {
      std::string name = take().text;
      if (!seen.insert(name).second) {
        fail(tokens_[index_ - 1], "observations entry declared more than once: " + name);
        return;
      }
      doc_.network.observations.push_back(name);
    }
    if (doc_.network.observations.empty()) {
      fail(peek(), "expected at least one name in 'observations'",
           {"identifier", "observation class"});
      return;
    }
    expect(Token::Kind::rbrace);
  }

  void parse_state() {
    take();  // 'state'
    const Token& name_token = peek();
    auto name = expect_ident("state name");
    if (!name) return;
    if (!declared_states_.insert(*name).second) {
      fail(name_token, "state declared more than once: " + *name);
      return;
    }
    doc_.network.states.push_back(*name);
    if (!expect(Token::Kind::lbrace)) return;
    std::set<std::string> covered;
    while (!error_ && peek().kind == Token::Kind::ident) {
      const Token& agent_token = peek();
      std::string agent = take().text;
      if (!declared_agents_.count(agent)) {
        fail(agent_token, "undeclared agent " + agent);
        return;
      }
      if (!covered.insert(agent).second) {
        fail(agent_token, "duplicate observation entry for agent " + agent + " in state " + *name);
        return;
      }
      if (!expect(Token::Kind::equals)) return;
      const Token& obs_token = peek();
      auto obs = expect_obs_token("observation label");
      if (!obs) return;
      if (std::find(doc_.network.observations.begin(), doc_.network.observations.end(), *obs) ==
          doc_.network.observations.end()) {
        fail(obs_token, "undeclared observation " + *obs);
        return;
      }
      doc_.network.obs[{*name, agent}] = *obs;
    }
    if (error_) return;
    if (covered.size() != declared_agents_.size()) {
      for (const std::string& agent : declared_agents_)
        if (!covered.count(agent)) {
          fail(peek(), "state " + *name + " is missing an observation for agent " + agent,
               {"identifier"});
          return;
        }
    }
    expect(Token::Kind::rbrace);
  }

  void parse_transition() {
    const Token& src_token = peek();
    std::string src = take().text;
    if (!declared_states_.count(src)) {
      fail(src_token, "undeclared state " + src);
      return;
    }
    if (!expect(Token::Kind::arrow)) return;
    const Token& dst_token = peek();
    auto dst = expect_ident("target state");
    if (!dst) return;
    if (!declared_states_.count(*dst)) {
      fail(dst_token, "undeclared state " + *dst);
      return;
    }
    if (!expect_keyword("on")) return;
    const Token& agent_token = peek();
    auto agent = expect_ident("agent");
    if (!agent) return;
    if (!declared_agents_.count(*agent)) {
      fail(agent_token, "undeclared agent " + *agent);
      return;
    }
    if (!expect(Token::Kind::dot)) return;
    const Token& action_token = peek();
    auto action = expect_ident("action");
    if (!action) return;
    if (std::find(doc_.network.actions.begin(), doc_.network.actions.end(), *action) ==
        doc_.network.actions.end()) {
      fail(action_token, "undeclared action " + *action);
      return;
    }
    auto key = std::make_tuple(src, *agent, *action);
    if (doc_.network.transitions.count(key)) {
      fail(src_token,
           "duplicate transition (" + src + "," + *agent + "," + *action + ")");
      return;
    }
    doc_.network.transitions.emplace(key, *dst);
  }

  void parse_goal() {
    take();  // 'goal'
    const Token& name_token = peek();
    auto name = expect_ident("goal name");
    if (!name) return;
    if (doc_.goals.count(*name)) {
      fail(name_token, "goal declared more than once: " + *name);
      return;
    }
    GoalSpec goal;
    if (at_keyword("safety")) {
      take();
      goal.kind = GoalKind::safety;
      if (!expect_keyword("avoid")) return;
    } else if (at_keyword("reachability")) {
      take();
      goal.kind = GoalKind::reachability;
      if (!expect_keyword("reach")) return;
    } else {
      fail(peek(), "expected 'safety' or 'reachability'", {"safety", "reachability"});
      return;
    }
    if (!expect(Token::Kind::lbrace)) return;
    while (!error_ && peek().kind == Token::Kind::ident) {
      const Token& state_token = peek();
      std::string state = take().text;
      if (!declared_states_.count(state)) {
        fail(state_token, "undeclared state " + state);
        return;
      }
      goal.states.insert(state);
    }
    if (error_) return;
    if (goal.kind == GoalKind::reachability && goal.states.empty()) {
      fail(peek(), "reachability goal " + *name + " must name at least one state",
           {"identifier"});
      return;
    }
    if (!expect(Token::Kind::rbrace)) return;
    doc_.goals.emplace(*name, std::move(goal));
  }

  Lexer lexer_;
  std::vector<Token> tokens_;
  std::size_t index_ = 0;
  std::optional<ParseError> error_;
  ModelDocument doc_;
  std::set<std::string> declared_agents_;
  std::set<std::string> declared_states_;
};

}  // namespace

bool structurally_equal(const ModelDocument& a, const ModelDocument& b) {
  return structurally_equal(a.network, b.network) && a.goals == b.goals;
}

ParseResult parse_model(const std::string& text) { return Parser(text).run(); }

std::string serialize_model(const ModelDocument& doc) {
  const TransitionNetwork& net = doc.network;
  std::ostringstream out;
  out << "network " << net.name << "\n\n";

  std::vector<AgentDecl> agents = net.agents;
  std::sort(agents.begin(), agents.end(),
            [](const AgentDecl& a, const AgentDecl& b) { return a.name < b.name; });
  out << "agents {\n";
  for (const AgentDecl& u : agents)
    out << "  " << u.name << " : " << (u.role == Role::high ? "high" : "low") << "\n";
  out << "}\n\n";

  auto sorted = [](std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  out << "actions {\n";
  for (const std::string& a : sorted(net.actions)) out << "  " << a << "\n";
  out << "}\n\n";
  out << "observations {\n";
  for (const std::string& o : sorted(net.observations)) out << "  " << o << "\n";
  out << "}\n\n";

  for (const std::string& s : sorted(net.states)) {
    out << "state " << s << " {\n";
    for (const AgentDecl& u : agents) {
      auto it = net.obs.find({s, u.name});
      if (it != net.obs.end()) out << "  " << u.name << " = " << it->second << "\n";
    }
    out << "}\n";
  }
  out << "\ninit " << net.initial << "\n\n";

  for (const auto& [key, target] : net.transitions) {
    const auto& [src, agent, action] = key;
    out << src << " -> " << target << " on " << agent << "." << action << "\n";
  }

  if (!doc.goals.empty()) out << "\n";
  for (const auto& [name, goal] : doc.goals) {
    out << "goal " << name << " "
        << (goal.kind == GoalKind::safety ? "safety avoid" : "reachability reach") << " {";
    for (const std::string& s : goal.states) out << " " << s;
    out << " }\n";
  }
  return out.str();
}

}  // namespace effsec
