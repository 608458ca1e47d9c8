// Mini-IR: a three-address language for numeric methods over one array
// parameter. See docs/formats.md for the grammar.
//
// A Function is a flat instruction list with resolved control flow: every
// instruction names its successors by index, so `for` loops (whose step
// statement falls back to the loop test) need no synthetic jump.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mrkit/cfg.hpp"

namespace mrkit::mir {

struct SourcePos {
  std::size_t line = 1;
  std::size_t column = 1;
};

class ParseError : public std::runtime_error {
public:
  ParseError(SourcePos pos, const std::string &what);
  SourcePos pos() const { return pos_; }

private:
  SourcePos pos_;
};

/// A scalar variable slot or a numeric literal.
struct Operand {
  enum class Kind { Var, Const };
  Kind kind = Kind::Const;
  std::size_t slot = 0;
  double value = 0.0;

  static Operand var(std::size_t s) { return {Kind::Var, s, 0.0}; }
  static Operand constant(double v) { return {Kind::Const, 0, v}; }
};

enum class BinOp { Add, Sub, Mul, Div, Rem, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

enum class Builtin { Sqrt, Log, Exp, Abs, Floor, Ceil, Pow, Min, Max };

bool is_comparison(BinOp op);
std::string_view to_string(BinOp op);
std::string_view to_string(Builtin fn);

struct AtomExpr {
  Operand value;
};
struct LoadExpr {
  Operand index;
};
struct LengthExpr {};
struct BinaryExpr {
  BinOp op;
  Operand lhs, rhs;
};
struct CallExpr {
  Builtin fn;
  std::vector<Operand> args;
};

using Expr = std::variant<AtomExpr, LoadExpr, LengthExpr, BinaryExpr, CallExpr>;

inline constexpr std::size_t kNoSuccessor = static_cast<std::size_t>(-1);

struct AssignInstr {
  std::size_t target;
  Expr value;
};
/// param[index] = value
struct StoreInstr {
  Operand index, value;
};
/// if lhs <op> rhs goto on_true else on_false
struct BranchInstr {
  BinOp op;
  Operand lhs, rhs;
  std::size_t on_true = kNoSuccessor;
  std::size_t on_false = kNoSuccessor;
};
struct JumpInstr {
  std::size_t target = kNoSuccessor;
};
struct ReturnInstr {
  Expr value;
};

struct Instr {
  std::variant<AssignInstr, StoreInstr, BranchInstr, JumpInstr, ReturnInstr> op;
  /// Fall-through successor for assignments and stores.
  std::size_t next = kNoSuccessor;
  SourcePos pos;
};

struct Function {
  std::string name;
  std::string param;
  std::vector<std::string> slots;
  std::vector<Instr> body;
  SourcePos pos;
};

struct Program {
  std::vector<Function> functions;

  const Function *find(std::string_view name) const;
};

/// Parses a .mir source text. Every function is lowered and validated as
/// part of parsing, so a returned Program only holds functions whose CFG
/// satisfies all structural invariants.
Program parse_program(std::string_view text);

Program read_program_file(const std::string &path);

/// Annotation label for one instruction.
NodeOp node_op(const Instr &instr);

/// One CFG node per instruction, plus a start node (id 0) and an exit node
/// (id body.size() + 1). Instruction i becomes node i + 1.
AnnotatedCfg lower_to_cfg(const Function &fn);

enum class TrapKind {
  DivisionByZero,
  EmptyInput,
  IndexOutOfRange,
  NonIntegerIndex,
  NonFinite,
  UnassignedVariable,
  StepBudgetExceeded,
};

std::string_view to_string(TrapKind kind);

class Trap : public std::runtime_error {
public:
  Trap(TrapKind kind, std::size_t instr, const std::string &what);
  TrapKind kind() const { return kind_; }
  std::size_t instr() const { return instr_; }

private:
  TrapKind kind_;
  std::size_t instr_;
};

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000;

/// Runs fn on a private copy of the input. Throws Trap.
double interpret(const Function &fn, std::span<const double> input,
                 std::uint64_t step_budget = kDefaultStepBudget);

} // namespace mrkit::mir
