// Annotated control-flow graphs: node operation labels, the graph value
// type, and structural validation.
#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mrkit {

/// Operation label attached to a CFG node. The set is closed.
enum class NodeOp {
  Add, Sub, Mul, Div, Or, And, If, Assi, Eql, Geql, Gt, Leql, Lt, Neql,
  Start, Rem, Fcall, Return, Exit, Goto,
};

inline constexpr std::size_t kNodeOpCount = 20;

/// Annotation label as written in DOT files and feature keys ("add", "assi", ...).
std::string_view to_string(NodeOp op);

/// Inverse of to_string; throws UnknownLabelError for anything else.
NodeOp parse_node_op(std::string_view label);

/// Maps a source-level operation token ("+", "==", "invoke", ":=") to its
/// annotation label.
NodeOp classify_statement(std::string_view token);

class UnknownLabelError : public std::runtime_error {
public:
  explicit UnknownLabelError(std::string token);
  const std::string &token() const { return token_; }

private:
  std::string token_;
};

struct CfgNode {
  int id = 0;
  NodeOp op = NodeOp::Assi;

  friend bool operator==(const CfgNode &, const CfgNode &) = default;
};

struct CfgEdge {
  int from = 0;
  int to = 0;

  friend bool operator==(const CfgEdge &, const CfgEdge &) = default;
  friend auto operator<=>(const CfgEdge &, const CfgEdge &) = default;
};

/// Directed graph of operation-labelled nodes for one method.
///
/// Plain value type: it can hold graphs that violate the structural
/// invariants, which is what validate() reports on. Everything downstream
/// of validation assumes a valid graph.
struct AnnotatedCfg {
  std::string name;
  std::vector<CfgNode> nodes;
  std::vector<CfgEdge> edges;

  friend bool operator==(const AnnotatedCfg &, const AnnotatedCfg &) = default;
};

/// Dense adjacency view over a cfg. Positions follow node declaration
/// order; neighbour lists are sorted by ascending node id.
class CfgIndex {
public:
  explicit CfgIndex(const AnnotatedCfg &cfg);

  std::size_t size() const { return ops_.size(); }
  NodeOp op(std::size_t pos) const { return ops_[pos]; }
  int id(std::size_t pos) const { return ids_[pos]; }
  const std::vector<std::size_t> &successors(std::size_t pos) const { return succ_[pos]; }
  const std::vector<std::size_t> &predecessors(std::size_t pos) const { return pred_[pos]; }
  std::size_t in_degree(std::size_t pos) const { return pred_[pos].size(); }
  std::size_t out_degree(std::size_t pos) const { return succ_[pos].size(); }

  /// Position of the unique start/exit node; nullopt unless exactly one exists.
  std::optional<std::size_t> start() const { return start_; }
  std::optional<std::size_t> exit() const { return exit_; }

private:
  std::vector<NodeOp> ops_;
  std::vector<int> ids_;
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<std::vector<std::size_t>> pred_;
  std::optional<std::size_t> start_;
  std::optional<std::size_t> exit_;
};

enum class Severity { Warning, Error };

enum class DiagCode {
  DuplicateNodeId,
  DanglingEdge,
  DuplicateEdge,
  StartCount,
  StartHasPredecessor,
  ExitCount,
  ExitHasSuccessor,
  UnreachableFromStart,
  CannotReachExit,
};

struct Diagnostic {
  Severity severity = Severity::Error;
  DiagCode code = DiagCode::DuplicateNodeId;
  std::string message;
  std::optional<int> node;
};

using Diagnostics = std::vector<Diagnostic>;

/// Reports every violated structural invariant. Empty iff the graph has
/// exactly one start (in-degree 0) and one exit (out-degree 0), every node
/// is reachable from start and reaches exit, ids are unique, and there are
/// no duplicate or dangling edges.
Diagnostics validate(const AnnotatedCfg &cfg);

std::string format_diagnostics(const Diagnostics &diags);

} // namespace mrkit
