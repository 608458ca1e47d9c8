#include "mrkit/mir.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mrkit::mir {

ParseError::ParseError(SourcePos pos, const std::string &what)
    : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + what),
      pos_(pos) {}

const Function *Program::find(std::string_view name) const {
  for (const auto &f : functions)
    if (f.name == name)
      return &f;
  return nullptr;
}

bool is_comparison(BinOp op) {
  switch (op) {
  case BinOp::Eq: case BinOp::Ne: case BinOp::Lt: case BinOp::Le: case BinOp::Gt: case BinOp::Ge:
    return true;
  default:
    return false;
  }
}

std::string_view to_string(BinOp op) {
  switch (op) {
  case BinOp::Add: return "+";
  case BinOp::Sub: return "-";
  case BinOp::Mul: return "*";
  case BinOp::Div: return "/";
  case BinOp::Rem: return "%";
  case BinOp::Eq: return "==";
  case BinOp::Ne: return "!=";
  case BinOp::Lt: return "<";
  case BinOp::Le: return "<=";
  case BinOp::Gt: return ">";
  case BinOp::Ge: return ">=";
  case BinOp::And: return "and";
  case BinOp::Or: return "or";
  }
  return "?";
}

std::string_view to_string(Builtin fn) {
  switch (fn) {
  case Builtin::Sqrt: return "sqrt";
  case Builtin::Log: return "log";
  case Builtin::Exp: return "exp";
  case Builtin::Abs: return "abs";
  case Builtin::Floor: return "floor";
  case Builtin::Ceil: return "ceil";
  case Builtin::Pow: return "pow";
  case Builtin::Min: return "min";
  case Builtin::Max: return "max";
  }
  return "?";
}

namespace {

const std::map<std::string_view, std::pair<Builtin, std::size_t>> &builtins() {
  static const std::map<std::string_view, std::pair<Builtin, std::size_t>> table = {
      {"sqrt", {Builtin::Sqrt, 1}}, {"log", {Builtin::Log, 1}},     {"exp", {Builtin::Exp, 1}},
      {"abs", {Builtin::Abs, 1}},   {"floor", {Builtin::Floor, 1}}, {"ceil", {Builtin::Ceil, 1}},
      {"pow", {Builtin::Pow, 2}},   {"min", {Builtin::Min, 2}},     {"max", {Builtin::Max, 2}},
  };
  return table;
}

const std::set<std::string_view> &keywords() {
  static const std::set<std::string_view> kw = {"fn", "if", "goto", "return", "for", "len", "and", "or"};
  return kw;
}

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0.0;
  SourcePos pos;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0, line = 1, col = 1;
  auto bump = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      bump(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n')
        bump(1);
      continue;
    }
    Token t;
    t.pos = {line, col};
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      t.kind = Tok::Ident;
      t.text = std::string(src.substr(i, j - i));
      bump(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t j = i;
      while (j < src.size() && (std::isdigit(static_cast<unsigned char>(src[j])) || src[j] == '.'))
        ++j;
      if (j < src.size() && (src[j] == 'e' || src[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < src.size() && (src[k] == '+' || src[k] == '-'))
          ++k;
        if (k < src.size() && std::isdigit(static_cast<unsigned char>(src[k]))) {
          j = k;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j])))
            ++j;
        }
      }
      t.kind = Tok::Number;
      t.text = std::string(src.substr(i, j - i));
      auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (ec != std::errc() || p != t.text.data() + t.text.size())
        throw ParseError(t.pos, "malformed number '" + t.text + "'");
      bump(j - i);
    } else {
      static const char *two[] = {"==", "!=", "<=", ">="};
      t.kind = Tok::Punct;
      for (const char *op : two)
        if (src.substr(i, 2) == op)
          t.text = op;
      if (t.text.empty()) {
        if (std::string_view("{}()[],;:=<>+-*/%").find(c) == std::string_view::npos)
          throw ParseError(t.pos, std::string("unexpected character '") + c + "'");
        t.text = std::string(1, c);
      }
      bump(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

// Source-level statements, before label resolution and flattening.
struct SrcAtom {
  bool is_var = false;
  std::string name;
  double value = 0.0;
  SourcePos pos;
};

struct SrcRhs {
  enum class Kind { Atom, Load, Length, Binary, Call } kind = Kind::Atom;
  BinOp op = BinOp::Add;
  Builtin fn = Builtin::Sqrt;
  std::vector<SrcAtom> args;
};

struct SrcStmt {
  enum class Kind { Assign, Store, If, Goto, Return, For } kind = Kind::Assign;
  std::vector<std::string> labels;
  SourcePos pos;
  std::string target;       // Assign: variable; If/Goto: label
  SrcRhs rhs;               // Assign, Return, For bound
  SrcAtom a, b;             // Store: index, value; If/For: comparison lhs (a), If rhs (b)
  BinOp cmp = BinOp::Lt;    // If, For
  std::unique_ptr<SrcStmt> init, step;
  std::vector<SrcStmt> body;
};

struct SrcFunction {
  std::string name, param;
  SourcePos pos;
  std::vector<SrcStmt> body;
};

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  std::vector<SrcFunction> program() {
    std::vector<SrcFunction> fns;
    while (cur().kind != Tok::End)
      fns.push_back(function());
    return fns;
  }

private:
  const Token &cur() const { return toks_[pos_]; }
  const Token &peek(std::size_t k = 1) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  [[noreturn]] void fail(const std::string &msg) const { throw ParseError(cur().pos, msg); }

  bool is_punct(std::string_view p, std::size_t k = 0) const {
    const auto &t = peek(k);
    return t.kind == Tok::Punct && t.text == p;
  }
  bool is_word(std::string_view w, std::size_t k = 0) const {
    const auto &t = peek(k);
    return t.kind == Tok::Ident && t.text == w;
  }
  void expect_punct(std::string_view p) {
    if (!is_punct(p))
      fail("expected '" + std::string(p) + "'");
    ++pos_;
  }
  void expect_word(std::string_view w) {
    if (!is_word(w))
      fail("expected '" + std::string(w) + "'");
    ++pos_;
  }
  std::string identifier(const char *what) {
    if (cur().kind != Tok::Ident || keywords().count(cur().text))
      fail(std::string("expected ") + what);
    return toks_[pos_++].text;
  }

  SrcFunction function() {
    SrcFunction fn;
    fn.pos = cur().pos;
    expect_word("fn");
    fn.name = identifier("function name");
    expect_punct("(");
    fn.param = identifier("array parameter name");
    expect_punct(")");
    expect_punct("{");
    fn.body = block();
    expect_punct("}");
    return fn;
  }

  std::vector<SrcStmt> block() {
    std::vector<SrcStmt> out;
    std::vector<std::string> labels;
    while (!is_punct("}")) {
      if (cur().kind == Tok::End)
        fail("unexpected end of input, expected '}'");
      if (is_punct(";")) {
        ++pos_;
        continue;
      }
      if (cur().kind == Tok::Ident && is_punct(":", 1) && !keywords().count(cur().text)) {
        labels.push_back(cur().text);
        pos_ += 2;
        continue;
      }
      SrcStmt s = statement();
      s.labels = std::move(labels);
      labels.clear();
      out.push_back(std::move(s));
    }
    if (!labels.empty())
      fail("label '" + labels.front() + "' does not precede a statement");
    return out;
  }

  SrcAtom atom() {
    SrcAtom a;
    a.pos = cur().pos;
    if (is_punct("-") && peek().kind == Tok::Number) {
      ++pos_;
      a.value = -cur().number;
      ++pos_;
      return a;
    }
    if (cur().kind == Tok::Number) {
      a.value = cur().number;
      ++pos_;
      return a;
    }
    a.is_var = true;
    a.name = identifier("variable or number");
    if (builtins().count(a.name))
      throw ParseError(a.pos, "'" + a.name + "' is a built-in function");
    return a;
  }

  std::optional<BinOp> binop() const {
    static const std::map<std::string_view, BinOp> ops = {
        {"+", BinOp::Add}, {"-", BinOp::Sub}, {"*", BinOp::Mul}, {"/", BinOp::Div},
        {"%", BinOp::Rem}, {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<", BinOp::Lt},
        {"<=", BinOp::Le}, {">", BinOp::Gt},  {">=", BinOp::Ge},
    };
    if (cur().kind == Tok::Punct) {
      auto it = ops.find(cur().text);
      if (it != ops.end())
        return it->second;
    }
    if (is_word("and"))
      return BinOp::And;
    if (is_word("or"))
      return BinOp::Or;
    return std::nullopt;
  }

  BinOp comparison() {
    auto op = binop();
    if (!op || !is_comparison(*op))
      fail("expected comparison operator");
    ++pos_;
    return *op;
  }

  SrcRhs rhs() {
    SrcRhs r;
    if (is_word("len")) {
      ++pos_;
      expect_punct("(");
      r.kind = SrcRhs::Kind::Length;
      SrcAtom arr;
      arr.pos = cur().pos;
      arr.name = identifier("array name");
      r.args.push_back(arr);
      expect_punct(")");
      return r;
    }
    if (cur().kind == Tok::Ident && is_punct("(", 1)) {
      auto it = builtins().find(cur().text);
      if (it == builtins().end())
        fail("unknown function '" + cur().text + "'");
      SourcePos at = cur().pos;
      pos_ += 2;
      r.kind = SrcRhs::Kind::Call;
      r.fn = it->second.first;
      if (!is_punct(")")) {
        r.args.push_back(atom());
        while (is_punct(",")) {
          ++pos_;
          r.args.push_back(atom());
        }
      }
      expect_punct(")");
      if (r.args.size() != it->second.second)
        throw ParseError(at, "'" + std::string(it->first) + "' takes " + std::to_string(it->second.second) +
                                 " argument(s)");
      return r;
    }
    if (cur().kind == Tok::Ident && is_punct("[", 1)) {
      SrcAtom arr;
      arr.pos = cur().pos;
      arr.name = identifier("array name");
      ++pos_;
      r.kind = SrcRhs::Kind::Load;
      r.args.push_back(arr);
      r.args.push_back(atom());
      expect_punct("]");
      return r;
    }
    r.args.push_back(atom());
    if (auto op = binop()) {
      ++pos_;
      r.kind = SrcRhs::Kind::Binary;
      r.op = *op;
      r.args.push_back(atom());
    }
    return r;
  }

  SrcStmt assignment() {
    SrcStmt s;
    s.pos = cur().pos;
    std::string name = identifier("assignment target");
    if (is_punct("[")) {
      ++pos_;
      s.kind = SrcStmt::Kind::Store;
      s.target = name;
      s.a = atom();
      expect_punct("]");
      expect_punct("=");
      s.b = atom();
      return s;
    }
    expect_punct("=");
    s.kind = SrcStmt::Kind::Assign;
    s.target = name;
    s.rhs = rhs();
    return s;
  }

  SrcStmt statement() {
    SrcStmt s;
    s.pos = cur().pos;
    if (is_word("if")) {
      ++pos_;
      s.kind = SrcStmt::Kind::If;
      s.a = atom();
      s.cmp = comparison();
      s.b = atom();
      expect_word("goto");
      s.target = identifier("label");
      return s;
    }
    if (is_word("goto")) {
      ++pos_;
      s.kind = SrcStmt::Kind::Goto;
      s.target = identifier("label");
      return s;
    }
    if (is_word("return")) {
      ++pos_;
      s.kind = SrcStmt::Kind::Return;
      s.rhs = rhs();
      return s;
    }
    if (is_word("for")) {
      ++pos_;
      s.kind = SrcStmt::Kind::For;
      s.init = std::make_unique<SrcStmt>(assignment());
      expect_punct(";");
      s.a = atom();
      s.cmp = comparison();
      s.rhs = rhs();
      expect_punct(";");
      s.step = std::make_unique<SrcStmt>(assignment());
      expect_punct("{");
      s.body = block();
      expect_punct("}");
      return s;
    }
    return assignment();
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// Flattens source statements into the resolved instruction list.
class Flattener {
public:
  explicit Flattener(const SrcFunction &src) : src_(src) {}

  Function run() {
    fn_.name = src_.name;
    fn_.param = src_.param;
    fn_.pos = src_.pos;
    collect_assigned(src_.body);
    emit_block(src_.body);

    for (const auto &[idx, label] : pending_jumps_) {
      auto it = labels_.find(label.first);
      if (it == labels_.end())
        throw ParseError(label.second, "undefined label '" + label.first + "'");
      auto &op = fn_.body[idx].op;
      if (auto *b = std::get_if<BranchInstr>(&op))
        b->on_true = it->second;
      else
        std::get<JumpInstr>(op).target = it->second;
    }

    const std::size_t end = fn_.body.size();
    if (end == 0)
      throw ParseError(src_.pos, "function '" + fn_.name + "' has an empty body");
    for (const auto &ins : fn_.body) {
      bool falls_off = false;
      if (std::holds_alternative<AssignInstr>(ins.op) || std::holds_alternative<StoreInstr>(ins.op))
        falls_off = ins.next == end;
      else if (auto *b = std::get_if<BranchInstr>(&ins.op))
        falls_off = b->on_false == end || b->on_true == end;
      else if (auto *j = std::get_if<JumpInstr>(&ins.op))
        falls_off = j->target == end;
      if (falls_off)
        throw ParseError(ins.pos, "control reaches the end of '" + fn_.name + "' without a return");
      if (auto *b = std::get_if<BranchInstr>(&ins.op); b && b->on_true == b->on_false)
        throw ParseError(ins.pos, "conditional jump whose target is its own fall-through");
    }
    return std::move(fn_);
  }

private:
  void collect_assigned(const std::vector<SrcStmt> &stmts) {
    for (const auto &s : stmts) {
      if (s.kind == SrcStmt::Kind::Assign)
        assigned_.insert(s.target);
      if (s.kind == SrcStmt::Kind::For) {
        collect_assigned_one(*s.init);
        collect_assigned_one(*s.step);
        collect_assigned(s.body);
      }
    }
  }
  void collect_assigned_one(const SrcStmt &s) {
    if (s.kind == SrcStmt::Kind::Assign)
      assigned_.insert(s.target);
  }

  std::size_t slot(const std::string &name) {
    auto it = slot_of_.find(name);
    if (it != slot_of_.end())
      return it->second;
    std::size_t s = fn_.slots.size();
    fn_.slots.push_back(name);
    slot_of_.emplace(name, s);
    return s;
  }

  Operand operand(const SrcAtom &a) {
    if (!a.is_var)
      return Operand::constant(a.value);
    if (a.name == fn_.param)
      throw ParseError(a.pos, "array parameter '" + a.name + "' used as a scalar");
    if (!assigned_.count(a.name))
      throw ParseError(a.pos, "undefined variable '" + a.name + "'");
    return Operand::var(slot(a.name));
  }

  void check_array(const SrcAtom &a) {
    if (a.name != fn_.param)
      throw ParseError(a.pos, "'" + a.name + "' is not the array parameter");
  }

  Expr expr(const SrcRhs &r) {
    switch (r.kind) {
    case SrcRhs::Kind::Atom:
      return AtomExpr{operand(r.args[0])};
    case SrcRhs::Kind::Load:
      check_array(r.args[0]);
      return LoadExpr{operand(r.args[1])};
    case SrcRhs::Kind::Length:
      check_array(r.args[0]);
      return LengthExpr{};
    case SrcRhs::Kind::Binary:
      return BinaryExpr{r.op, operand(r.args[0]), operand(r.args[1])};
    case SrcRhs::Kind::Call: {
      CallExpr c{r.fn, {}};
      for (const auto &a : r.args)
        c.args.push_back(operand(a));
      return c;
    }
    }
    return AtomExpr{};
  }

  void bind_labels(const std::vector<std::string> &labels, const SourcePos &pos) {
    for (const auto &l : labels)
      if (!labels_.emplace(l, fn_.body.size()).second)
        throw ParseError(pos, "duplicate label '" + l + "'");
  }

  std::size_t push(Instr ins) {
    fn_.body.push_back(std::move(ins));
    return fn_.body.size() - 1;
  }

  void emit_simple(const SrcStmt &s) {
    Instr ins;
    ins.pos = s.pos;
    switch (s.kind) {
    case SrcStmt::Kind::Assign: {
      if (s.target == fn_.param)
        throw ParseError(s.pos, "cannot assign to the array parameter");
      Expr e = expr(s.rhs);
      ins.op = AssignInstr{slot(s.target), std::move(e)};
      ins.next = fn_.body.size() + 1;
      break;
    }
    case SrcStmt::Kind::Store: {
      SrcAtom arr;
      arr.name = s.target;
      arr.pos = s.pos;
      check_array(arr);
      ins.op = StoreInstr{operand(s.a), operand(s.b)};
      ins.next = fn_.body.size() + 1;
      break;
    }
    case SrcStmt::Kind::If: {
      BranchInstr b{s.cmp, operand(s.a), operand(s.b), kNoSuccessor, fn_.body.size() + 1};
      ins.op = b;
      pending_jumps_.push_back({fn_.body.size(), {s.target, s.pos}});
      break;
    }
    case SrcStmt::Kind::Goto:
      ins.op = JumpInstr{};
      pending_jumps_.push_back({fn_.body.size(), {s.target, s.pos}});
      break;
    case SrcStmt::Kind::Return:
      ins.op = ReturnInstr{expr(s.rhs)};
      break;
    case SrcStmt::Kind::For:
      break;
    }
    push(std::move(ins));
  }

  // init; goto B; B: $bound = rhs; T: if a cmp $bound (true -> body, false -> after);
  // body...; step (falls back to T)
  void emit_for(const SrcStmt &s) {
    bind_labels(s.labels, s.pos);
    emit_simple(*s.init);

    Instr jump;
    jump.pos = s.pos;
    jump.op = JumpInstr{fn_.body.size() + 1};
    push(std::move(jump));

    std::string bound_name = "$bound" + std::to_string(bound_count_++);
    assigned_.insert(bound_name);
    Instr bound;
    bound.pos = s.pos;
    bound.op = AssignInstr{slot(bound_name), expr(s.rhs)};
    bound.next = fn_.body.size() + 1;
    push(std::move(bound));

    std::size_t test = fn_.body.size();
    Instr branch;
    branch.pos = s.pos;
    SrcAtom bound_atom;
    bound_atom.is_var = true;
    bound_atom.name = bound_name;
    branch.op = BranchInstr{s.cmp, operand(s.a), operand(bound_atom), test + 1, kNoSuccessor};
    push(std::move(branch));

    emit_block(s.body);
    std::size_t step = fn_.body.size();
    emit_simple(*s.step);
    fn_.body[step].next = test;
    std::get<BranchInstr>(fn_.body[test].op).on_false = fn_.body.size();
  }

  void emit_block(const std::vector<SrcStmt> &stmts) {
    for (const auto &s : stmts) {
      if (s.kind == SrcStmt::Kind::For) {
        emit_for(s);
        continue;
      }
      bind_labels(s.labels, s.pos);
      emit_simple(s);
    }
  }

  const SrcFunction &src_;
  Function fn_;
  std::set<std::string> assigned_;
  std::unordered_map<std::string, std::size_t> slot_of_;
  std::map<std::string, std::size_t> labels_;
  std::vector<std::pair<std::size_t, std::pair<std::string, SourcePos>>> pending_jumps_;
  int bound_count_ = 0;
};

void check_lowered(const Function &fn) {
  auto diags = validate(lower_to_cfg(fn));
  if (diags.empty())
    return;
  const auto &d = diags.front();
  SourcePos at = fn.pos;
  if (d.node && *d.node >= 1 && static_cast<std::size_t>(*d.node) <= fn.body.size())
    at = fn.body[static_cast<std::size_t>(*d.node) - 1].pos;
  std::string what = d.message;
  if (d.code == DiagCode::UnreachableFromStart)
    what = "unreachable statement";
  else if (d.code == DiagCode::CannotReachExit)
    what = "statement cannot reach a return (infinite loop)";
  throw ParseError(at, "in '" + fn.name + "': " + what);
}

} // namespace

Program parse_program(std::string_view text) {
  Parser parser(tokenize(text));
  auto src = parser.program();
  Program prog;
  std::set<std::string> names;
  for (const auto &f : src) {
    if (!names.insert(f.name).second)
      throw ParseError(f.pos, "duplicate function name '" + f.name + "'");
    prog.functions.push_back(Flattener(f).run());
    check_lowered(prog.functions.back());
  }
  return prog;
}

Program read_program_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_program(buf.str());
  } catch (const ParseError &e) {
    throw std::runtime_error(path + ":" + e.what());
  }
}

} // namespace mrkit::mir
