#include "mrkit/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "mrkit/seed.hpp"

namespace mrkit {

void check_params(const RwkParams &p) {
  if (p.max_walk_length < 1)
    throw std::invalid_argument("random-walk kernel: walk length must be >= 1");
  if (!(p.decay > 0.0 && p.decay < 1.0))
    throw std::invalid_argument("random-walk kernel: decay must lie in (0, 1)");
}

void check_params(const GkParams &p) {
  if (p.k != 3 && p.k != 4)
    throw std::invalid_argument("graphlet kernel: k must be 3 or 4");
  if (p.mode == GraphletMode::Sampled && p.sample_count < 1)
    throw std::invalid_argument("graphlet kernel: sample count must be >= 1");
}

namespace {

double rwk_raw(const AnnotatedCfg &g1, const AnnotatedCfg &g2, const RwkParams &p) {
  CfgIndex a(g1), b(g2);
  // Product nodes: label-matched pairs.
  std::vector<std::vector<std::size_t>> pair_id(a.size(), std::vector<std::size_t>(b.size(), SIZE_MAX));
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < a.size(); ++u)
    for (std::size_t v = 0; v < b.size(); ++v)
      if (a.op(u) == b.op(v)) {
        pair_id[u][v] = pairs.size();
        pairs.emplace_back(u, v);
      }
  if (pairs.empty())
    return 0.0;

  std::vector<std::vector<std::size_t>> succ(pairs.size());
  for (std::size_t p_i = 0; p_i < pairs.size(); ++p_i) {
    auto [u, v] = pairs[p_i];
    for (auto u2 : a.successors(u))
      for (auto v2 : b.successors(v))
        if (pair_id[u2][v2] != SIZE_MAX)
          succ[p_i].push_back(pair_id[u2][v2]);
  }

  // walks[p] = number of product walks of the current length starting at p.
  std::vector<double> walks(pairs.size(), 1.0), next(pairs.size());
  double value = 0.0, weight = 1.0;
  for (int l = 1; l <= p.max_walk_length; ++l) {
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      double s = 0.0;
      for (auto j : succ[i])
        s += walks[j];
      next[i] = s;
    }
    walks.swap(next);
    weight *= p.decay;
    value += weight * std::accumulate(walks.begin(), walks.end(), 0.0);
  }
  return value;
}

double cosine(double cross, double self1, double self2) {
  if (self1 <= 0.0 || self2 <= 0.0)
    return 0.0;
  return cross / std::sqrt(self1 * self2);
}

double dot(const GraphletDistribution &f1, const GraphletDistribution &f2) {
  double s = 0.0;
  for (const auto &[code, w] : f1) {
    auto it = f2.find(code);
    if (it != f2.end())
      s += w * it->second;
  }
  return s;
}

// Induced adjacency of the chosen vertices (self-loops dropped).
std::uint32_t induced(const std::vector<std::vector<bool>> &adj, const std::array<std::size_t, 4> &verts, int k) {
  std::uint32_t bits = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j && adj[verts[i]][verts[j]])
        bits |= 1u << (i * k + j);
  return bits;
}

bool weakly_connected(std::uint32_t bits, int k) {
  std::uint32_t reached = 1, frontier = 1;
  while (frontier) {
    std::uint32_t grow = 0;
    for (int i = 0; i < k; ++i) {
      if (!(frontier & (1u << i)))
        continue;
      for (int j = 0; j < k; ++j)
        if ((bits & (1u << (i * k + j))) || (bits & (1u << (j * k + i))))
          grow |= 1u << j;
    }
    frontier = grow & ~reached;
    reached |= grow;
  }
  return reached == (1u << k) - 1;
}

struct KernelContext {
  // Per-graph precomputation: graphlet distributions or RWK self-similarity.
  std::vector<GraphletDistribution> graphlets;
  std::vector<double> self;
};

} // namespace

double random_walk_kernel(const AnnotatedCfg &g1, const AnnotatedCfg &g2, const RwkParams &p) {
  check_params(p);
  double cross = rwk_raw(g1, g2, p);
  if (!p.normalize)
    return cross;
  return cosine(cross, rwk_raw(g1, g1, p), rwk_raw(g2, g2, p));
}

std::uint32_t canonical_graphlet_code(std::uint32_t adjacency, int k) {
  std::array<int, 4> perm{0, 1, 2, 3};
  std::uint32_t best = UINT32_MAX;
  do {
    std::uint32_t code = 0;
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (i != j && (adjacency & (1u << (i * k + j))))
          code |= 1u << (perm[i] * k + perm[j]);
    best = std::min(best, code);
  } while (std::next_permutation(perm.begin(), perm.begin() + k));
  return best;
}

GraphletDistribution graphlet_distribution(const AnnotatedCfg &g, const GkParams &p) {
  check_params(p);
  CfgIndex index(g);
  const std::size_t n = index.size();
  const int k = p.k;
  GraphletDistribution counts;
  if (n < static_cast<std::size_t>(k))
    return counts;
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (std::size_t u = 0; u < n; ++u)
    for (auto v : index.successors(u))
      adj[u][v] = true;

  double total = 0.0;
  auto tally = [&](const std::array<std::size_t, 4> &verts) {
    auto bits = induced(adj, verts, k);
    if (!weakly_connected(bits, k))
      return;
    counts[canonical_graphlet_code(bits, k)] += 1.0;
    total += 1.0;
  };

  if (p.mode == GraphletMode::Exhaustive) {
    std::array<std::size_t, 4> verts{};
    // Lexicographic enumeration of k-subsets.
    std::vector<std::size_t> c(static_cast<std::size_t>(k));
    std::iota(c.begin(), c.end(), 0);
    while (true) {
      std::copy(c.begin(), c.end(), verts.begin());
      tally(verts);
      int i = k - 1;
      while (i >= 0 && c[static_cast<std::size_t>(i)] == n - static_cast<std::size_t>(k - i))
        --i;
      if (i < 0)
        break;
      ++c[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < k; ++j)
        c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
    }
  } else {
    Rng rng(derive_seed(p.seed, "graphlet-sampling"));
    std::vector<std::size_t> pool(n);
    for (int s = 0; s < p.sample_count; ++s) {
      std::iota(pool.begin(), pool.end(), 0);
      std::array<std::size_t, 4> verts{};
      for (int i = 0; i < k; ++i) {
        auto j = static_cast<std::size_t>(rng.uniform_int(i, static_cast<std::int64_t>(n) - 1));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        verts[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
      }
      tally(verts);
    }
  }
  if (total > 0.0)
    for (auto &[code, c] : counts)
      c /= total;
  return counts;
}

double graphlet_kernel(const AnnotatedCfg &g1, const AnnotatedCfg &g2, const GkParams &p) {
  auto f1 = graphlet_distribution(g1, p);
  auto f2 = graphlet_distribution(g2, p);
  double cross = dot(f1, f2);
  if (!p.normalize)
    return cross;
  return cosine(cross, dot(f1, f1), dot(f2, f2));
}

namespace {

KernelContext prepare(const std::vector<AnnotatedCfg> &graphs, const KernelSpec &kernel) {
  KernelContext ctx;
  if (auto *gk = std::get_if<GkParams>(&kernel)) {
    for (const auto &g : graphs) {
      ctx.graphlets.push_back(graphlet_distribution(g, *gk));
      ctx.self.push_back(dot(ctx.graphlets.back(), ctx.graphlets.back()));
    }
  } else {
    const auto &rw = std::get<RwkParams>(kernel);
    check_params(rw);
    for (const auto &g : graphs)
      ctx.self.push_back(rwk_raw(g, g, rw));
  }
  return ctx;
}

} // namespace

KernelMatrix gram_matrix(const std::vector<std::string> &ids, const std::vector<AnnotatedCfg> &graphs,
                         const KernelSpec &kernel) {
  if (graphs.size() < 2)
    throw std::invalid_argument("a Gram matrix needs at least two graphs");
  if (ids.size() != graphs.size())
    throw std::invalid_argument("Gram matrix: id/graph count mismatch");
  const std::size_t n = graphs.size();
  KernelMatrix m;
  m.method_ids = ids;
  m.values.assign(n, std::vector<double>(n, 0.0));
  auto ctx = prepare(graphs, kernel);
  const bool normalize = std::visit([](const auto &p) { return p.normalize; }, kernel);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double cross;
      if (i == j)
        cross = ctx.self[i];
      else if (auto *gk = std::get_if<GkParams>(&kernel); gk)
        cross = dot(ctx.graphlets[i], ctx.graphlets[j]);
      else
        cross = rwk_raw(graphs[i], graphs[j], std::get<RwkParams>(kernel));
      double v = normalize ? cosine(cross, ctx.self[i], ctx.self[j]) : cross;
      if (normalize && i == j && ctx.self[i] > 0.0)
        v = 1.0;
      m.values[i][j] = m.values[j][i] = v;
    }
  }

  if (normalize)
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(m.values[i][i] - 1.0) > 1e-12)
        m.diagnostics.push_back("diagonal entry for '" + ids[i] + "' is " + std::to_string(m.values[i][i]) +
                                " (graph has no walks/graphlets)");
  m.min_eigenvalue = min_eigenvalue(m.values);
  if (m.min_eigenvalue < kPsdTolerance)
    m.diagnostics.push_back("matrix is not positive semidefinite: min eigenvalue " +
                            std::to_string(m.min_eigenvalue));
  return m;
}

std::vector<double> kernel_column(const AnnotatedCfg &query, const std::vector<AnnotatedCfg> &graphs,
                                  const KernelSpec &kernel) {
  std::vector<double> out;
  out.reserve(graphs.size());
  if (auto *gk = std::get_if<GkParams>(&kernel)) {
    auto fq = graphlet_distribution(query, *gk);
    double sq = dot(fq, fq);
    for (const auto &g : graphs) {
      auto fg = graphlet_distribution(g, *gk);
      double cross = dot(fq, fg);
      out.push_back(gk->normalize ? cosine(cross, sq, dot(fg, fg)) : cross);
    }
  } else {
    const auto &rw = std::get<RwkParams>(kernel);
    for (const auto &g : graphs)
      out.push_back(random_walk_kernel(query, g, rw));
  }
  return out;
}

double min_eigenvalue(const std::vector<std::vector<double>> &m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  if (n == 0)
    return 0.0;
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      a(i, j) = m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

std::string gram_csv(const KernelMatrix &m) {
  std::ostringstream os;
  os.precision(17);
  os << "method_id";
  for (const auto &id : m.method_ids)
    os << ',' << id;
  os << '\n';
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    os << m.method_ids[i];
    for (double v : m.values[i])
      os << ',' << v;
    os << '\n';
  }
  return os.str();
}

} // namespace mrkit
