#include "mrkit/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mrkit {

std::string_view to_string(FeatureKind kind) {
  switch (kind) {
  case FeatureKind::NF: return "NF";
  case FeatureKind::PF: return "PF";
  case FeatureKind::NFPF: return "NF-PF";
  }
  return "?";
}

std::int64_t FeatureVector::total() const {
  std::int64_t t = 0;
  for (const auto &[k, v] : entries)
    t += v;
  return t;
}

FeatureVector node_features(const AnnotatedCfg &cfg, NodeFeatureOptions opts) {
  CfgIndex index(cfg);
  FeatureVector fv{FeatureKind::NF, {}};
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (opts.omit_exit && index.op(i) == NodeOp::Exit)
      continue;
    std::string key = std::string(to_string(index.op(i))) + "-" + std::to_string(index.in_degree(i)) + "-" +
                      std::to_string(index.out_degree(i));
    ++fv.entries[key];
  }
  return fv;
}

namespace {

// BFS tree from root; neighbour lists are already sorted by ascending id.
std::vector<std::size_t> bfs_parents(const CfgIndex &index, std::size_t root, bool forward) {
  constexpr std::size_t none = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(index.size(), none);
  std::vector<bool> seen(index.size(), false);
  std::deque<std::size_t> queue{root};
  seen[root] = true;
  while (!queue.empty()) {
    auto v = queue.front();
    queue.pop_front();
    for (auto w : forward ? index.successors(v) : index.predecessors(v)) {
      if (seen[w])
        continue;
      seen[w] = true;
      parent[w] = v;
      queue.push_back(w);
    }
  }
  return parent;
}

std::vector<std::size_t> chain(const std::vector<std::size_t> &parent, std::size_t root, std::size_t v) {
  std::vector<std::size_t> out{v};
  while (v != root) {
    v = parent[v];
    if (v == static_cast<std::size_t>(-1))
      throw std::invalid_argument("path features require every node to be connected to start and exit");
    out.push_back(v);
  }
  return out;
}

} // namespace

CanonicalPaths canonical_paths(const AnnotatedCfg &cfg) {
  CfgIndex index(cfg);
  if (!index.start() || !index.exit())
    throw std::invalid_argument("path features require exactly one start and one exit node");
  const auto s = *index.start();
  const auto x = *index.exit();
  auto fwd = bfs_parents(index, s, true);
  auto bwd = bfs_parents(index, x, false);

  CanonicalPaths paths;
  for (std::size_t v = 0; v < index.size(); ++v) {
    auto f = chain(fwd, s, v);  // v .. start
    std::vector<int> fids;
    for (auto it = f.rbegin(); it != f.rend(); ++it)
      fids.push_back(index.id(*it));
    paths.forward.push_back(std::move(fids));

    auto b = chain(bwd, x, v);  // v .. exit
    std::vector<int> bids;
    for (auto p : b)
      bids.push_back(index.id(p));
    paths.backward.push_back(std::move(bids));
  }
  return paths;
}

FeatureVector path_features(const AnnotatedCfg &cfg) {
  CfgIndex index(cfg);
  auto paths = canonical_paths(cfg);
  std::map<int, NodeOp> op_of;
  for (std::size_t i = 0; i < index.size(); ++i)
    op_of[index.id(i)] = index.op(i);

  auto signature = [&op_of](const std::vector<int> &ids) {
    std::string s;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i)
        s += '-';
      s += to_string(op_of.at(ids[i]));
    }
    return s;
  };

  FeatureVector fv{FeatureKind::PF, {}};
  std::set<std::vector<int>> counted;
  for (const auto *set : {&paths.forward, &paths.backward})
    for (const auto &p : *set)
      if (counted.insert(p).second)
        ++fv.entries[signature(p)];
  return fv;
}

FeatureVector combine(const FeatureVector &nf, const FeatureVector &pf) {
  if (nf.kind != FeatureKind::NF || pf.kind != FeatureKind::PF)
    throw std::invalid_argument("combine expects an NF vector and a PF vector, got " +
                                std::string(to_string(nf.kind)) + " and " + std::string(to_string(pf.kind)));
  FeatureVector out{FeatureKind::NFPF, nf.entries};
  for (const auto &[k, v] : pf.entries)
    if (!out.entries.emplace(k, v).second)
      throw std::logic_error("NF and PF key spaces collided on '" + k + "'");
  return out;
}

std::vector<double> project(const FeatureVector &fv, const std::vector<std::string> &feature_index,
                            bool l2_normalize, std::vector<std::string> *unknown) {
  std::vector<double> row(feature_index.size(), 0.0);
  for (const auto &[k, v] : fv.entries) {
    auto it = std::lower_bound(feature_index.begin(), feature_index.end(), k);
    if (it == feature_index.end() || *it != k) {
      if (unknown)
        unknown->push_back(k);
      continue;
    }
    row[static_cast<std::size_t>(it - feature_index.begin())] = static_cast<double>(v);
  }
  if (l2_normalize) {
    double norm = 0.0;
    for (double x : row)
      norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0)
      for (double &x : row)
        x /= norm;
  }
  return row;
}

DesignMatrix build_design_matrix(const std::vector<std::pair<std::string, FeatureVector>> &features,
                                 bool l2_normalize) {
  DesignMatrix m;
  m.l2_normalized = l2_normalize;
  std::set<std::string> keys, ids;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto &[id, fv] = features[i];
    if (i == 0)
      m.kind = fv.kind;
    else if (fv.kind != m.kind)
      throw std::invalid_argument("design matrix rows must share one feature kind");
    if (!ids.insert(id).second)
      throw std::invalid_argument("duplicate method id '" + id + "'");
    for (const auto &[k, v] : fv.entries)
      keys.insert(k);
  }
  m.feature_index.assign(keys.begin(), keys.end());
  for (const auto &[id, fv] : features) {
    m.method_ids.push_back(id);
    m.rows.push_back(project(fv, m.feature_index, l2_normalize));
  }
  return m;
}

std::string feature_csv_rows(const std::string &method_id, const FeatureVector &fv) {
  std::ostringstream os;
  for (const auto &[k, v] : fv.entries)
    os << method_id << ',' << to_string(fv.kind) << ',' << k << ',' << v << '\n';
  return os.str();
}

std::string design_matrix_csv(const DesignMatrix &m) {
  std::ostringstream os;
  os.precision(17);
  os << "method_id";
  for (const auto &k : m.feature_index)
    os << ',' << k;
  os << '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    os << m.method_ids[r];
    for (double x : m.rows[r])
      os << ',' << x;
    os << '\n';
  }
  return os.str();
}

} // namespace mrkit
