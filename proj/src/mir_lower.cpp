#include "mrkit/mir.hpp"

namespace mrkit::mir {

namespace {

NodeOp binop_label(BinOp op) {
  switch (op) {
  case BinOp::Add: return NodeOp::Add;
  case BinOp::Sub: return NodeOp::Sub;
  case BinOp::Mul: return NodeOp::Mul;
  case BinOp::Div: return NodeOp::Div;
  case BinOp::Rem: return NodeOp::Rem;
  case BinOp::Eq: return NodeOp::Eql;
  case BinOp::Ne: return NodeOp::Neql;
  case BinOp::Lt: return NodeOp::Lt;
  case BinOp::Le: return NodeOp::Leql;
  case BinOp::Gt: return NodeOp::Gt;
  case BinOp::Ge: return NodeOp::Geql;
  case BinOp::And: return NodeOp::And;
  case BinOp::Or: return NodeOp::Or;
  }
  return NodeOp::Assi;
}

// Label of the operation an expression performs, or `fallback` for plain
// data movement (copies, loads, length reads).
NodeOp expr_label(const Expr &e, NodeOp fallback) {
  if (auto *b = std::get_if<BinaryExpr>(&e))
    return binop_label(b->op);
  if (std::holds_alternative<CallExpr>(e))
    return NodeOp::Fcall;
  return fallback;
}

} // namespace

NodeOp node_op(const Instr &instr) {
  struct Visitor {
    NodeOp operator()(const AssignInstr &a) const { return expr_label(a.value, NodeOp::Assi); }
    NodeOp operator()(const StoreInstr &) const { return NodeOp::Assi; }
    NodeOp operator()(const BranchInstr &) const { return NodeOp::If; }
    NodeOp operator()(const JumpInstr &) const { return NodeOp::Goto; }
    NodeOp operator()(const ReturnInstr &r) const { return expr_label(r.value, NodeOp::Return); }
  };
  return std::visit(Visitor{}, instr.op);
}

AnnotatedCfg lower_to_cfg(const Function &fn) {
  AnnotatedCfg cfg;
  cfg.name = fn.name;
  const int n = static_cast<int>(fn.body.size());
  const int exit_id = n + 1;
  cfg.nodes.push_back({0, NodeOp::Start});
  for (int i = 0; i < n; ++i)
    cfg.nodes.push_back({i + 1, node_op(fn.body[static_cast<std::size_t>(i)])});
  cfg.nodes.push_back({exit_id, NodeOp::Exit});

  if (n > 0)
    cfg.edges.push_back({0, 1});
  auto node = [](std::size_t idx) { return static_cast<int>(idx) + 1; };
  for (int i = 0; i < n; ++i) {
    const auto &ins = fn.body[static_cast<std::size_t>(i)];
    const int from = i + 1;
    if (auto *b = std::get_if<BranchInstr>(&ins.op)) {
      cfg.edges.push_back({from, node(b->on_false)});
      cfg.edges.push_back({from, node(b->on_true)});
    } else if (auto *j = std::get_if<JumpInstr>(&ins.op)) {
      cfg.edges.push_back({from, node(j->target)});
    } else if (std::holds_alternative<ReturnInstr>(ins.op)) {
      cfg.edges.push_back({from, exit_id});
    } else {
      cfg.edges.push_back({from, node(ins.next)});
    }
  }
  return cfg;
}

} // namespace mrkit::mir
