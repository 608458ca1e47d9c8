// Fixtures and small helpers shared by the unit tests.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mrkit/cfg.hpp"

namespace fixtures {

// The 14-node annotated CFG of the `average` method.
inline constexpr const char *kAverageDot = R"(digraph "average" {
  n0 [label="start"];
  n1 [label="assi"];
  n2 [label="assi"];
  n3 [label="goto"];
  n4 [label="assi"];
  n5 [label="if"];
  n6 [label="assi"];
  n7 [label="assi"];
  n8 [label="add"];
  n9 [label="add"];
  n10 [label="assi"];
  n11 [label="assi"];
  n12 [label="div"];
  n13 [label="exit"];
  n0 -> n1;
  n1 -> n2;
  n2 -> n3;
  n3 -> n4;
  n4 -> n5;
  n5 -> n10;
  n5 -> n6;
  n6 -> n7;
  n7 -> n8;
  n8 -> n9;
  n9 -> n5;
  n10 -> n11;
  n11 -> n12;
  n12 -> n13;
}
)";

inline constexpr const char *kAverageMir = R"(fn average(input) {
  sum = 0
  for i = 0; i < len(input); i = i + 1 {
    t = input[i]
    x = t
    sum = sum + x
  }
  n = len(input)
  d = n
  return sum / d
}
)";

// Graph with ids 0..n-1 in declaration order.
inline mrkit::AnnotatedCfg make_graph(const std::vector<mrkit::NodeOp> &ops,
                                      const std::vector<std::pair<int, int>> &edges,
                                      std::string name = "g") {
  mrkit::AnnotatedCfg g;
  g.name = std::move(name);
  for (std::size_t i = 0; i < ops.size(); ++i)
    g.nodes.push_back({static_cast<int>(i), ops[i]});
  for (auto [a, b] : edges)
    g.edges.push_back({a, b});
  return g;
}

// start -> body... -> exit
inline mrkit::AnnotatedCfg chain(const std::vector<mrkit::NodeOp> &body, std::string name = "chain") {
  std::vector<mrkit::NodeOp> ops{mrkit::NodeOp::Start};
  ops.insert(ops.end(), body.begin(), body.end());
  ops.push_back(mrkit::NodeOp::Exit);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < static_cast<int>(ops.size()); ++i)
    edges.emplace_back(i, i + 1);
  return make_graph(ops, edges, std::move(name));
}

} // namespace fixtures
