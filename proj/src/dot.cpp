#include "mrkit/dot.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>
#include <vector>

namespace mrkit {

DotParseError::DotParseError(std::size_t line, std::size_t column, const std::string &what,
                             const std::string &source)
    : std::runtime_error((source.empty() ? "" : source + ":") + std::to_string(line) + ":" +
                         std::to_string(column) + ": " + what),
      line_(line), column_(column), detail_(what) {}

namespace {

enum class Tok { Id, LBrace, RBrace, LBracket, RBracket, Equals, Semi, Comma, Arrow, UndirectedEdge, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  bool quoted = false;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = col_;
    if (at_end()) {
      t.kind = Tok::End;
      return t;
    }
    char c = peek();
    switch (c) {
    case '{': advance(); t.kind = Tok::LBrace; return t;
    case '}': advance(); t.kind = Tok::RBrace; return t;
    case '[': advance(); t.kind = Tok::LBracket; return t;
    case ']': advance(); t.kind = Tok::RBracket; return t;
    case '=': advance(); t.kind = Tok::Equals; return t;
    case ';': advance(); t.kind = Tok::Semi; return t;
    case ',': advance(); t.kind = Tok::Comma; return t;
    case '"': t.kind = Tok::Id; t.quoted = true; t.text = quoted(); return t;
    default: break;
    }
    if (c == '-' && pos_ + 1 < src_.size() && (src_[pos_ + 1] == '>' || src_[pos_ + 1] == '-')) {
      t.kind = src_[pos_ + 1] == '>' ? Tok::Arrow : Tok::UndirectedEdge;
      advance();
      advance();
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || static_cast<unsigned char>(c) >= 0x80) {
      t.kind = Tok::Id;
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                           static_cast<unsigned char>(peek()) >= 0x80))
        t.text += advance();
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.') {
      t.kind = Tok::Id;
      if (c == '-')
        t.text += advance();
      while (!at_end() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.'))
        t.text += advance();
      if (t.text == "-")
        throw DotParseError(t.line, t.column, "stray '-'");
      return t;
    }
    throw DotParseError(t.line, t.column, std::string("unexpected character '") + c + "'");
  }

private:
  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return src_[pos_]; }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (!at_end() && peek() != '\n')
          advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '*') {
        std::size_t l = line_, k = col_;
        advance();
        advance();
        while (!at_end() && !(peek() == '*' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/'))
          advance();
        if (at_end())
          throw DotParseError(l, k, "unterminated comment");
        advance();
        advance();
      } else {
        break;
      }
    }
  }

  std::string quoted() {
    std::size_t l = line_, k = col_;
    advance();
    std::string out;
    while (true) {
      if (at_end())
        throw DotParseError(l, k, "unterminated string");
      char c = advance();
      if (c == '"')
        return out;
      if (c == '\\' && !at_end()) {
        char e = advance();
        if (e != '"' && e != '\\')
          out += '\\';
        out += e;
      } else {
        out += c;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

struct PendingEdge {
  std::string from, to;
  std::size_t line, column;
};

class Parser {
public:
  explicit Parser(std::string_view src) : lex_(src) { shift(); }

  AnnotatedCfg run() {
    if (is_keyword("strict"))
      shift();
    if (is_keyword("graph"))
      fail("undirected graphs are not supported");
    if (!is_keyword("digraph"))
      fail("expected 'digraph'");
    shift();
    if (cur_.kind == Tok::Id) {
      cfg_.name = cur_.text;
      shift();
    }
    expect(Tok::LBrace, "'{'");
    while (cur_.kind != Tok::RBrace) {
      if (cur_.kind == Tok::End)
        fail("unexpected end of input, expected '}'");
      statement();
      while (cur_.kind == Tok::Semi || cur_.kind == Tok::Comma)
        shift();
    }
    shift();
    if (cur_.kind != Tok::End)
      fail("trailing content after graph");

    std::set<CfgEdge> seen;
    for (const auto &e : edges_) {
      auto f = ids_.find(e.from);
      auto t = ids_.find(e.to);
      if (f == ids_.end() || t == ids_.end())
        throw DotParseError(e.line, e.column,
                            "edge references undeclared node '" + (f == ids_.end() ? e.from : e.to) + "'");
      CfgEdge edge{f->second, t->second};
      if (!seen.insert(edge).second)
        throw DotParseError(e.line, e.column, "duplicate edge " + e.from + " -> " + e.to);
      cfg_.edges.push_back(edge);
    }
    return std::move(cfg_);
  }

private:
  [[noreturn]] void fail(const std::string &msg) const { throw DotParseError(cur_.line, cur_.column, msg); }

  bool is_keyword(std::string_view kw) const {
    if (cur_.kind != Tok::Id || cur_.quoted || cur_.text.size() != kw.size())
      return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(cur_.text[i])) != kw[i])
        return false;
    return true;
  }

  void shift() { cur_ = lex_.next(); }

  void expect(Tok kind, const char *what) {
    if (cur_.kind != kind)
      fail(std::string("expected ") + what);
    shift();
  }

  // Parses `[k=v, k=v]` lists (possibly several in a row) and returns the label, if any.
  std::optional<std::string> attributes() {
    std::optional<std::string> label;
    while (cur_.kind == Tok::LBracket) {
      shift();
      while (cur_.kind != Tok::RBracket) {
        if (cur_.kind != Tok::Id)
          fail("expected attribute name");
        std::string key = cur_.text;
        shift();
        expect(Tok::Equals, "'=' in attribute");
        if (cur_.kind != Tok::Id)
          fail("expected attribute value");
        if (key == "label")
          label = cur_.text;
        shift();
        while (cur_.kind == Tok::Comma || cur_.kind == Tok::Semi)
          shift();
      }
      shift();
    }
    return label;
  }

  void statement() {
    if (is_keyword("subgraph") || cur_.kind == Tok::LBrace)
      fail("subgraphs are not supported");
    if (is_keyword("graph") || is_keyword("node") || is_keyword("edge")) {
      shift();
      attributes();
      return;
    }
    if (cur_.kind != Tok::Id)
      fail("expected node or edge statement");
    Token first = cur_;
    shift();
    if (cur_.kind == Tok::Equals) {
      shift();
      if (cur_.kind != Tok::Id)
        fail("expected value after '='");
      shift();
      return;
    }
    if (cur_.kind == Tok::UndirectedEdge)
      fail("undirected edge '--' in a digraph");
    if (cur_.kind == Tok::Arrow) {
      std::string prev = first.text;
      while (cur_.kind == Tok::Arrow) {
        Token arrow = cur_;
        shift();
        if (cur_.kind != Tok::Id)
          fail("expected node id after '->'");
        edges_.push_back({prev, cur_.text, arrow.line, arrow.column});
        prev = cur_.text;
        shift();
      }
      attributes();
      return;
    }
    auto label = attributes();
    if (ids_.count(first.text))
      throw DotParseError(first.line, first.column, "duplicate node id '" + first.text + "'");
    if (!label)
      throw DotParseError(first.line, first.column, "node '" + first.text + "' has no label");
    NodeOp op;
    try {
      op = parse_node_op(*label);
    } catch (const UnknownLabelError &) {
      throw DotParseError(first.line, first.column, "unknown node label '" + *label + "'");
    }
    int id = static_cast<int>(cfg_.nodes.size());
    ids_.emplace(first.text, id);
    cfg_.nodes.push_back({id, op});
  }

  Lexer lex_;
  Token cur_;
  AnnotatedCfg cfg_;
  std::unordered_map<std::string, int> ids_;
  std::vector<PendingEdge> edges_;
};

std::string quote(const std::string &s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\')
      out += '\\';
    out += c;
  }
  return out + "\"";
}

} // namespace

AnnotatedCfg parse_dot(std::string_view text) { return Parser(text).run(); }

std::string emit_dot(const AnnotatedCfg &cfg) {
  std::ostringstream os;
  os << "digraph " << quote(cfg.name) << " {\n";
  for (const auto &n : cfg.nodes)
    os << "  n" << n.id << " [label=\"" << to_string(n.op) << "\"];\n";
  for (const auto &e : cfg.edges)
    os << "  n" << e.from << " -> n" << e.to << ";\n";
  os << "}\n";
  return os.str();
}

AnnotatedCfg read_dot_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_dot(buf.str());
  } catch (const DotParseError &e) {
    throw DotParseError(e.line(), e.column(), e.detail(), path);
  }
}

} // namespace mrkit
