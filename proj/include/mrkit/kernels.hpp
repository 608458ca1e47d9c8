// Graph kernels over annotated CFGs and Gram-matrix assembly.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mrkit/cfg.hpp"

namespace mrkit {

struct RwkParams {
  int max_walk_length = 10;
  double decay = 0.5;
  bool normalize = true;
};

enum class GraphletMode { Exhaustive, Sampled };

struct GkParams {
  int k = 3;
  GraphletMode mode = GraphletMode::Exhaustive;
  int sample_count = 5000;
  std::uint64_t seed = 42;
  bool normalize = true;
};

using KernelSpec = std::variant<RwkParams, GkParams>;

/// Throws std::invalid_argument when parameters are out of range.
void check_params(const RwkParams &p);
void check_params(const GkParams &p);

/// sum_{l=1..L} decay^l * (number of label-matched walk pairs with l edges),
/// computed on the direct product graph; optionally cosine-normalized.
double random_walk_kernel(const AnnotatedCfg &g1, const AnnotatedCfg &g2, const RwkParams &p);

/// Relative frequencies of weakly connected induced k-node subgraphs, keyed
/// by a canonical directed-isomorphism code. Labels and self-loops are
/// ignored. Empty when the graph has fewer than k nodes or no connected
/// k-subset (or no connected sample was drawn).
using GraphletDistribution = std::map<std::uint32_t, double>;
GraphletDistribution graphlet_distribution(const AnnotatedCfg &g, const GkParams &p);

/// Canonical code of the directed graph on k <= 4 vertices given as an
/// adjacency bitmask (bit i*k + j set for an edge i -> j).
std::uint32_t canonical_graphlet_code(std::uint32_t adjacency, int k);

double graphlet_kernel(const AnnotatedCfg &g1, const AnnotatedCfg &g2, const GkParams &p);

struct KernelMatrix {
  std::vector<std::string> method_ids;
  std::vector<std::vector<double>> values;
  double min_eigenvalue = 0.0;
  std::vector<std::string> diagnostics;
};

inline constexpr double kPsdTolerance = -1e-8;

/// values[i][j] = kernel(g_i, g_j), each unordered pair computed once.
/// Violations of symmetry, unit diagonal (normalized kernels) or
/// positive semidefiniteness are recorded as diagnostics, never repaired.
/// Throws std::invalid_argument for fewer than two graphs.
KernelMatrix gram_matrix(const std::vector<std::string> &ids, const std::vector<AnnotatedCfg> &graphs,
                         const KernelSpec &kernel);

/// kernel(query, g_i) for every i; used to score unseen methods.
std::vector<double> kernel_column(const AnnotatedCfg &query, const std::vector<AnnotatedCfg> &graphs,
                                  const KernelSpec &kernel);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const std::vector<std::vector<double>> &m);

std::string gram_csv(const KernelMatrix &m);

} // namespace mrkit
