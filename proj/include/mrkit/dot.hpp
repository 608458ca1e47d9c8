// Reading and writing annotated CFGs in a small DOT dialect:
//
//   digraph "name" {
//     n0 [label="start"];
//     n0 -> n1;
//   }
//
// Node ids in files are opaque; they map to dense integers in declaration
// order. Attributes other than `label`, and graph/node/edge default
// statements, are accepted and ignored.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mrkit/cfg.hpp"

namespace mrkit {

class DotParseError : public std::runtime_error {
public:
  /// Message is `[source:]line:column: what`.
  DotParseError(std::size_t line, std::size_t column, const std::string &what, const std::string &source = {});
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string &detail() const { return detail_; }

private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Errors: DotParseError for syntax problems, duplicate node ids, duplicate
/// edges and edges to undeclared nodes; UnknownLabelError (wrapped in a
/// DotParseError carrying the position) for labels outside NodeOp.
AnnotatedCfg parse_dot(std::string_view text);

/// Byte-stable DOT text; node ids are written as `n<id>`.
std::string emit_dot(const AnnotatedCfg &cfg);

AnnotatedCfg read_dot_file(const std::string &path);

} // namespace mrkit
