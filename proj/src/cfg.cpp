#include "mrkit/cfg.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mrkit {

namespace {

constexpr std::array<std::string_view, kNodeOpCount> kLabels = {
    "add", "sub", "mul", "div", "or", "and", "if", "assi", "eql", "geql",
    "gt", "leql", "lt", "neql", "start", "rem", "fcall", "return", "exit", "goto",
};

// Operation tokens of the annotation table, plus the keyword spellings of
// the logical operators and the Unicode minus that appears in typeset copies.
const std::map<std::string_view, NodeOp> &token_table() {
  static const std::map<std::string_view, NodeOp> table = {
      {"+", NodeOp::Add},        {"-", NodeOp::Sub},     {"\xE2\x88\x92", NodeOp::Sub},
      {"*", NodeOp::Mul},        {"/", NodeOp::Div},     {"||", NodeOp::Or},
      {"or", NodeOp::Or},        {"&", NodeOp::And},     {"and", NodeOp::And},
      {"if", NodeOp::If},        {"=", NodeOp::Assi},    {"==", NodeOp::Eql},
      {">=", NodeOp::Geql},      {">", NodeOp::Gt},      {"<=", NodeOp::Leql},
      {"<", NodeOp::Lt},         {"!=", NodeOp::Neql},   {":=", NodeOp::Start},
      {"%", NodeOp::Rem},        {"invoke", NodeOp::Fcall}, {"return", NodeOp::Return},
      {"exit", NodeOp::Exit},    {"goto", NodeOp::Goto},
  };
  return table;
}

std::string node_ref(int id) { return "node " + std::to_string(id); }

} // namespace

UnknownLabelError::UnknownLabelError(std::string token)
    : std::runtime_error("unknown node label '" + token + "'"), token_(std::move(token)) {}

std::string_view to_string(NodeOp op) { return kLabels[static_cast<std::size_t>(op)]; }

NodeOp parse_node_op(std::string_view label) {
  for (std::size_t i = 0; i < kLabels.size(); ++i)
    if (kLabels[i] == label)
      return static_cast<NodeOp>(i);
  throw UnknownLabelError(std::string(label));
}

NodeOp classify_statement(std::string_view token) {
  const auto &table = token_table();
  auto it = table.find(token);
  if (it == table.end())
    throw UnknownLabelError(std::string(token));
  return it->second;
}

CfgIndex::CfgIndex(const AnnotatedCfg &cfg) {
  std::unordered_map<int, std::size_t> pos;
  for (const auto &n : cfg.nodes) {
    if (pos.count(n.id))
      continue;
    pos.emplace(n.id, ops_.size());
    ops_.push_back(n.op);
    ids_.push_back(n.id);
  }
  succ_.resize(ops_.size());
  pred_.resize(ops_.size());
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto &e : cfg.edges) {
    auto f = pos.find(e.from);
    auto t = pos.find(e.to);
    if (f == pos.end() || t == pos.end())
      continue;
    if (!seen.emplace(f->second, t->second).second)
      continue;
    succ_[f->second].push_back(t->second);
    pred_[t->second].push_back(f->second);
  }
  auto by_id = [this](std::size_t a, std::size_t b) { return ids_[a] < ids_[b]; };
  for (auto &s : succ_)
    std::sort(s.begin(), s.end(), by_id);
  for (auto &p : pred_)
    std::sort(p.begin(), p.end(), by_id);

  std::vector<std::size_t> starts, exits;
  for (std::size_t i = 0; i < ops_.size(); ++i) {
    if (ops_[i] == NodeOp::Start)
      starts.push_back(i);
    if (ops_[i] == NodeOp::Exit)
      exits.push_back(i);
  }
  if (starts.size() == 1)
    start_ = starts.front();
  if (exits.size() == 1)
    exit_ = exits.front();
}

Diagnostics validate(const AnnotatedCfg &cfg) {
  Diagnostics out;
  auto error = [&out](DiagCode code, std::string msg, std::optional<int> node = std::nullopt) {
    out.push_back({Severity::Error, code, std::move(msg), node});
  };

  std::set<int> ids;
  for (const auto &n : cfg.nodes)
    if (!ids.insert(n.id).second)
      error(DiagCode::DuplicateNodeId, "duplicate " + node_ref(n.id), n.id);

  std::set<CfgEdge> edges;
  for (const auto &e : cfg.edges) {
    if (!ids.count(e.from) || !ids.count(e.to)) {
      error(DiagCode::DanglingEdge,
            "edge " + std::to_string(e.from) + " -> " + std::to_string(e.to) +
                " references an undeclared node");
      continue;
    }
    if (!edges.insert(e).second)
      error(DiagCode::DuplicateEdge,
            "duplicate edge " + std::to_string(e.from) + " -> " + std::to_string(e.to), e.from);
  }

  CfgIndex index(cfg);
  std::size_t n_start = 0, n_exit = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index.op(i) == NodeOp::Start) {
      ++n_start;
      if (index.in_degree(i) != 0)
        error(DiagCode::StartHasPredecessor, "start " + node_ref(index.id(i)) + " has incoming edges",
              index.id(i));
    }
    if (index.op(i) == NodeOp::Exit) {
      ++n_exit;
      if (index.out_degree(i) != 0)
        error(DiagCode::ExitHasSuccessor, "exit " + node_ref(index.id(i)) + " has outgoing edges",
              index.id(i));
    }
  }
  if (n_start != 1)
    error(DiagCode::StartCount, "expected exactly one start node, found " + std::to_string(n_start));
  if (n_exit != 1)
    error(DiagCode::ExitCount, "expected exactly one exit node, found " + std::to_string(n_exit));

  auto sweep = [&index](std::size_t root, bool forward) {
    std::vector<bool> seen(index.size(), false);
    std::vector<std::size_t> stack{root};
    seen[root] = true;
    while (!stack.empty()) {
      auto v = stack.back();
      stack.pop_back();
      for (auto w : forward ? index.successors(v) : index.predecessors(v))
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
    }
    return seen;
  };

  if (auto s = index.start()) {
    auto reach = sweep(*s, true);
    for (std::size_t i = 0; i < index.size(); ++i)
      if (!reach[i])
        error(DiagCode::UnreachableFromStart, node_ref(index.id(i)) + " is unreachable from start",
              index.id(i));
  }
  if (auto x = index.exit()) {
    auto reach = sweep(*x, false);
    for (std::size_t i = 0; i < index.size(); ++i)
      if (!reach[i])
        error(DiagCode::CannotReachExit, node_ref(index.id(i)) + " cannot reach exit", index.id(i));
  }
  return out;
}

std::string format_diagnostics(const Diagnostics &diags) {
  std::ostringstream os;
  for (const auto &d : diags)
    os << (d.severity == Severity::Error ? "error: " : "warning: ") << d.message << '\n';
  return os.str();
}

} // namespace mrkit
