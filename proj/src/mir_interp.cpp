#include "mrkit/mir.hpp"

#include <cmath>
#include <vector>

namespace mrkit::mir {

std::string_view to_string(TrapKind kind) {
  switch (kind) {
  case TrapKind::DivisionByZero: return "division-by-zero";
  case TrapKind::EmptyInput: return "empty-input";
  case TrapKind::IndexOutOfRange: return "index-out-of-range";
  case TrapKind::NonIntegerIndex: return "non-integer-index";
  case TrapKind::NonFinite: return "non-finite";
  case TrapKind::UnassignedVariable: return "unassigned-variable";
  case TrapKind::StepBudgetExceeded: return "step-budget-exceeded";
  }
  return "?";
}

Trap::Trap(TrapKind kind, std::size_t instr, const std::string &what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), instr_(instr) {}

namespace {

class Machine {
public:
  Machine(const Function &fn, std::span<const double> input)
      : fn_(fn), array_(input.begin(), input.end()), slots_(fn.slots.size(), 0.0),
        assigned_(fn.slots.size(), false) {}

  double run(std::uint64_t budget) {
    std::size_t pc = 0;
    std::uint64_t steps = 0;
    while (true) {
      if (++steps > budget)
        throw Trap(TrapKind::StepBudgetExceeded, pc,
                   "'" + fn_.name + "' exceeded " + std::to_string(budget) + " steps");
      pc_ = pc;
      const Instr &ins = fn_.body[pc];
      if (auto *a = std::get_if<AssignInstr>(&ins.op)) {
        slots_[a->target] = eval(a->value);
        assigned_[a->target] = true;
        pc = ins.next;
      } else if (auto *s = std::get_if<StoreInstr>(&ins.op)) {
        array_[index(read(s->index))] = read(s->value);
        pc = ins.next;
      } else if (auto *b = std::get_if<BranchInstr>(&ins.op)) {
        pc = binary(b->op, read(b->lhs), read(b->rhs)) != 0.0 ? b->on_true : b->on_false;
      } else if (auto *j = std::get_if<JumpInstr>(&ins.op)) {
        pc = j->target;
      } else {
        return eval(std::get<ReturnInstr>(ins.op).value);
      }
    }
  }

private:
  [[noreturn]] void trap(TrapKind kind, const std::string &what) const {
    throw Trap(kind, pc_, what + " in '" + fn_.name + "' at line " + std::to_string(fn_.body[pc_].pos.line));
  }

  double read(const Operand &o) const {
    if (o.kind == Operand::Kind::Const)
      return o.value;
    if (!assigned_[o.slot])
      trap(TrapKind::UnassignedVariable, "read of unassigned '" + fn_.slots[o.slot] + "'");
    return slots_[o.slot];
  }

  std::size_t index(double v) const {
    if (std::floor(v) != v)
      trap(TrapKind::NonIntegerIndex, "index " + std::to_string(v));
    if (array_.empty())
      trap(TrapKind::EmptyInput, "indexing an empty array");
    if (v < 0 || v >= static_cast<double>(array_.size()))
      trap(TrapKind::IndexOutOfRange, "index " + std::to_string(static_cast<long long>(v)) +
                                          " outside [0, " + std::to_string(array_.size()) + ")");
    return static_cast<std::size_t>(v);
  }

  double finite(double v) const {
    if (!std::isfinite(v))
      trap(TrapKind::NonFinite, "non-finite result");
    return v;
  }

  double binary(BinOp op, double x, double y) const {
    switch (op) {
    case BinOp::Add: return finite(x + y);
    case BinOp::Sub: return finite(x - y);
    case BinOp::Mul: return finite(x * y);
    case BinOp::Div:
      if (y == 0.0)
        trap(TrapKind::DivisionByZero, "division by zero");
      return finite(x / y);
    case BinOp::Rem:
      if (y == 0.0)
        trap(TrapKind::DivisionByZero, "remainder by zero");
      return finite(std::fmod(x, y));
    case BinOp::Eq: return x == y ? 1.0 : 0.0;
    case BinOp::Ne: return x != y ? 1.0 : 0.0;
    case BinOp::Lt: return x < y ? 1.0 : 0.0;
    case BinOp::Le: return x <= y ? 1.0 : 0.0;
    case BinOp::Gt: return x > y ? 1.0 : 0.0;
    case BinOp::Ge: return x >= y ? 1.0 : 0.0;
    case BinOp::And: return (x != 0.0 && y != 0.0) ? 1.0 : 0.0;
    case BinOp::Or: return (x != 0.0 || y != 0.0) ? 1.0 : 0.0;
    }
    return 0.0;
  }

  double call(const CallExpr &c) const {
    double a = read(c.args[0]);
    switch (c.fn) {
    case Builtin::Sqrt: return finite(std::sqrt(a));
    case Builtin::Log: return finite(std::log(a));
    case Builtin::Exp: return finite(std::exp(a));
    case Builtin::Abs: return std::fabs(a);
    case Builtin::Floor: return std::floor(a);
    case Builtin::Ceil: return std::ceil(a);
    case Builtin::Pow: return finite(std::pow(a, read(c.args[1])));
    case Builtin::Min: return std::fmin(a, read(c.args[1]));
    case Builtin::Max: return std::fmax(a, read(c.args[1]));
    }
    return 0.0;
  }

  double eval(const Expr &e) const {
    if (auto *a = std::get_if<AtomExpr>(&e))
      return read(a->value);
    if (auto *l = std::get_if<LoadExpr>(&e))
      return array_[index(read(l->index))];
    if (std::holds_alternative<LengthExpr>(e))
      return static_cast<double>(array_.size());
    if (auto *b = std::get_if<BinaryExpr>(&e))
      return binary(b->op, read(b->lhs), read(b->rhs));
    return call(std::get<CallExpr>(e));
  }

  const Function &fn_;
  std::vector<double> array_;
  std::vector<double> slots_;
  std::vector<bool> assigned_;
  std::size_t pc_ = 0;
};

} // namespace

double interpret(const Function &fn, std::span<const double> input, std::uint64_t step_budget) {
  return Machine(fn, input).run(step_budget);
}

} // namespace mrkit::mir
