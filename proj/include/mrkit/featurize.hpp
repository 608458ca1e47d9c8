// Node features (NF), path features (PF) and corpus design matrices.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mrkit/cfg.hpp"

namespace mrkit {

enum class FeatureKind { NF, PF, NFPF };

std::string_view to_string(FeatureKind kind);

/// Sparse feature-key -> count mapping. Stored counts are always >= 1.
struct FeatureVector {
  FeatureKind kind = FeatureKind::NF;
  std::map<std::string, std::int64_t> entries;

  std::int64_t total() const;
  friend bool operator==(const FeatureVector &, const FeatureVector &) = default;
};

struct NodeFeatureOptions {
  /// Drop the `exit-*` entry, reproducing the published NF table verbatim.
  bool omit_exit = false;
};

/// Tally of `<op>-<din>-<dout>` over all nodes.
FeatureVector node_features(const AnnotatedCfg &cfg, NodeFeatureOptions opts = {});

/// Label sequences of one canonical shortest start->v path and one canonical
/// shortest v->exit path per node v, tallied by signature.
///
/// Canonical paths come from BFS (forward from start, backward from exit)
/// that expands neighbours in ascending node-id order; the first discovered
/// parent wins. The start->exit path is found from both directions; when
/// both searches pick the same node sequence it is one path and is counted
/// once, so the total is 2|V| - 1 in that case and 2|V| otherwise.
/// Requires a valid cfg.
FeatureVector path_features(const AnnotatedCfg &cfg);

/// Canonical node sequences used by path_features, exposed for replay checks.
struct CanonicalPaths {
  std::vector<std::vector<int>> forward;   // forward[i]: start .. node i (ids)
  std::vector<std::vector<int>> backward;  // backward[i]: node i .. exit (ids)
};
CanonicalPaths canonical_paths(const AnnotatedCfg &cfg);

/// Disjoint union of an NF and a PF vector. Throws std::invalid_argument on
/// any other kind pairing.
FeatureVector combine(const FeatureVector &nf, const FeatureVector &pf);

/// Rows aligned to a lexicographically sorted feature index.
struct DesignMatrix {
  FeatureKind kind = FeatureKind::NF;
  std::vector<std::string> feature_index;
  std::vector<std::string> method_ids;
  std::vector<std::vector<double>> rows;
  bool l2_normalized = false;
};

/// Throws std::invalid_argument on duplicate method ids or mixed kinds.
DesignMatrix build_design_matrix(const std::vector<std::pair<std::string, FeatureVector>> &features,
                                 bool l2_normalize = false);

/// Projects a feature vector onto an existing index; keys missing from the
/// index are reported through `unknown` and otherwise ignored.
std::vector<double> project(const FeatureVector &fv, const std::vector<std::string> &feature_index,
                            bool l2_normalize, std::vector<std::string> *unknown = nullptr);

/// `method_id,kind,feature_key,count` rows (no header).
std::string feature_csv_rows(const std::string &method_id, const FeatureVector &fv);

/// Header `method_id,<feature keys...>` followed by one row per method.
std::string design_matrix_csv(const DesignMatrix &m);

} // namespace mrkit
