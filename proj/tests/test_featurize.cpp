#include <doctest.h>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "mrkit/dot.hpp"
#include "mrkit/featurize.hpp"
#include "mrkit/mir.hpp"
#include "support.hpp"

using namespace mrkit;

namespace {

using Counts = std::map<std::string, std::int64_t>;

// Independent path tally: BFS over an id-keyed adjacency map with sorted
// neighbour sets, then one forward and one backward path per node.
Counts replay_paths(const AnnotatedCfg &g) {
  std::map<int, std::set<int>> out, in;
  std::map<int, std::string> label;
  int start = -1, exit = -1;
  for (const auto &n : g.nodes) {
    label[n.id] = std::string(to_string(n.op));
    out[n.id];
    in[n.id];
    if (n.op == NodeOp::Start)
      start = n.id;
    if (n.op == NodeOp::Exit)
      exit = n.id;
  }
  for (const auto &e : g.edges) {
    out[e.from].insert(e.to);
    in[e.to].insert(e.from);
  }
  auto bfs = [](int root, std::map<int, std::set<int>> &adj) {
    std::map<int, int> parent{{root, root}};
    std::deque<int> q{root};
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int w : adj[v])
        if (!parent.count(w)) {
          parent[w] = v;
          q.push_back(w);
        }
    }
    return parent;
  };
  auto pf = bfs(start, out);
  auto pb = bfs(exit, in);
  std::set<std::vector<int>> paths;
  Counts c;
  auto add = [&](std::vector<int> p) {
    if (!paths.insert(p).second)
      return;
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i)
      s += (i ? "-" : "") + label[p[i]];
    ++c[s];
  };
  for (const auto &n : g.nodes) {
    std::vector<int> f{n.id};
    while (f.back() != start)
      f.push_back(pf.at(f.back()));
    std::reverse(f.begin(), f.end());
    add(f);
    std::vector<int> b{n.id};
    while (b.back() != exit)
      b.push_back(pb.at(b.back()));
    add(b);
  }
  return c;
}

bool is_walk(const AnnotatedCfg &g, const std::vector<int> &ids) {
  std::set<std::pair<int, int>> edges;
  for (const auto &e : g.edges)
    edges.insert({e.from, e.to});
  for (std::size_t i = 0; i + 1 < ids.size(); ++i)
    if (!edges.count({ids[i], ids[i + 1]}))
      return false;
  return true;
}

AnnotatedCfg average() { return parse_dot(fixtures::kAverageDot); }

} // namespace

TEST_CASE("node features of average") {
  auto nf = node_features(average(), {true});
  CHECK(nf.entries == Counts{{"start-0-1", 1}, {"assi-1-1", 7}, {"goto-1-1", 1},
                             {"if-2-2", 1},    {"add-1-1", 2},  {"div-1-1", 1}});
  auto with_exit = node_features(average());
  CHECK(with_exit.entries.size() == 7);
  CHECK(with_exit.entries.at("exit-1-0") == 1);
  CHECK(with_exit.total() == 14);
}

TEST_CASE("node features of the trivial graph") {
  auto nf = node_features(fixtures::chain({}));
  CHECK(nf.entries == Counts{{"start-0-1", 1}, {"exit-1-0", 1}});
}

TEST_CASE("path features of average") {
  auto pf = path_features(average());
  CHECK(pf.entries.size() == 25);
  CHECK(pf.entries.at("start-assi-assi-goto-assi-if-assi") == 2);
  CHECK(pf.entries.at("div-exit") == 1);
  CHECK(pf.entries.at("exit") == 1);
  CHECK(pf.entries.at("start") == 1);
  CHECK(pf.total() == 2 * 14 - 1);
  CHECK(pf.entries == replay_paths(average()));
}

TEST_CASE("path features of a straight-line graph") {
  auto g = fixtures::chain({NodeOp::Assi});
  auto pf = path_features(g);
  CHECK(pf.entries == Counts{{"start", 1}, {"start-assi", 1}, {"start-assi-exit", 1}, {"assi-exit", 1}, {"exit", 1}});
}

TEST_CASE("canonical paths are walks between the terminals") {
  auto g = average();
  auto paths = canonical_paths(g);
  REQUIRE(paths.forward.size() == g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    CHECK(paths.forward[i].front() == 0);
    CHECK(paths.forward[i].back() == g.nodes[i].id);
    CHECK(paths.backward[i].front() == g.nodes[i].id);
    CHECK(paths.backward[i].back() == 13);
    CHECK(is_walk(g, paths.forward[i]));
    CHECK(is_walk(g, paths.backward[i]));
  }
}

TEST_CASE("path and node features agree with replay on the bundled corpus") {
  for (const auto &entry : std::filesystem::directory_iterator(MRKIT_DATA_DIR "/corpus")) {
    if (entry.path().extension() != ".mir")
      continue;
    for (const auto &fn : mir::read_program_file(entry.path().string()).functions) {
      auto g = mir::lower_to_cfg(fn);
      auto pf = path_features(g);
      CHECK_MESSAGE(pf.entries == replay_paths(g), fn.name);
      auto n = static_cast<std::int64_t>(g.nodes.size());
      CHECK((pf.total() == 2 * n - 1 || pf.total() == 2 * n));
      CHECK(node_features(g).total() == n);
    }
  }
}

TEST_CASE("relabelling a node changes node features") {
  auto g = average();
  auto base = node_features(g);
  for (std::size_t i = 1; i + 1 < g.nodes.size(); ++i) {
    auto h = g;
    h.nodes[i].op = h.nodes[i].op == NodeOp::Mul ? NodeOp::Sub : NodeOp::Mul;
    CHECK(node_features(h) != base);
  }
}

TEST_CASE("combine and design matrices") {
  auto g = average();
  auto nf = node_features(g, {true});
  auto pf = path_features(g);
  auto both = combine(nf, pf);
  CHECK(both.entries.size() == 6 + 25);
  CHECK(combine(nf, FeatureVector{FeatureKind::PF, {}}).entries == nf.entries);
  CHECK_THROWS_AS(combine(pf, nf), std::invalid_argument);

  auto m = build_design_matrix({{"average", node_features(g)}});
  REQUIRE(m.rows.size() == 1);
  CHECK(std::is_sorted(m.feature_index.begin(), m.feature_index.end()));
  double sum = 0;
  for (double v : m.rows[0])
    sum += v;
  CHECK(sum == 14.0);

  FeatureVector a{FeatureKind::NF, {{"add-1-1", 2}}}, b{FeatureKind::NF, {{"mul-1-1", 3}}};
  auto ab = build_design_matrix({{"a", a}, {"b", b}});
  double d = 0;
  for (std::size_t i = 0; i < ab.feature_index.size(); ++i)
    d += ab.rows[0][i] * ab.rows[1][i];
  CHECK(d == 0.0);
  CHECK_THROWS_AS(build_design_matrix({{"a", a}, {"a", b}}), std::invalid_argument);

  auto normed = build_design_matrix({{"a", a}, {"b", b}}, true);
  for (const auto &row : normed.rows) {
    double s = 0;
    for (double v : row)
      s += v * v;
    CHECK(s == doctest::Approx(1.0));
  }
  std::vector<std::string> unknown;
  auto row = project(FeatureVector{FeatureKind::NF, {{"add-1-1", 1}, {"rem-1-1", 4}}}, ab.feature_index, false,
                     &unknown);
  CHECK(unknown == std::vector<std::string>{"rem-1-1"});
  CHECK(row.size() == 2);
  CHECK(design_matrix_csv(ab).rfind("method_id,add-1-1,mul-1-1\n", 0) == 0);
}
