// Acceptance harness: one PASS/FAIL line per criterion, non-zero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "mrkit/corpus.hpp"
#include "mrkit/evaluation.hpp"
#include "mrkit/featurize.hpp"
#include "mrkit/kernels.hpp"
#include "mrkit/oracle.hpp"
#include "mrkit/pipeline.hpp"
#include "mrkit/svm.hpp"
#include "oracles.hpp"

using namespace mrkit;
namespace fs = std::filesystem;

namespace {

const std::string kData = MRKIT_DATA_DIR;
int failures = 0;

void report(int n, const char *title, bool ok, const std::string &detail) {
  std::printf("criterion %d %-28s %s  %s\n", n, title, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Dataset dataset() { return load_manifest(kData + "/manifest.csv", kData + "/labels.csv"); }

void worked_example() {
  auto t0 = std::chrono::steady_clock::now();
  auto ds = dataset();
  const DatasetEntry *avg = nullptr;
  for (const auto &e : ds.entries)
    if (e.name == "average")
      avg = &e;
  auto cfg = load_cfg(*avg);
  auto nf = node_features(cfg, {true});
  auto pf = path_features(cfg);
  std::map<std::string, std::int64_t> expected{{"start-0-1", 1}, {"assi-1-1", 7}, {"goto-1-1", 1},
                                               {"if-2-2", 1},    {"add-1-1", 2},  {"div-1-1", 1}};
  auto it = pf.entries.find("start-assi-assi-goto-assi-if-assi");
  bool ok = nf.entries == expected && pf.entries.size() == 25 && it != pf.entries.end() && it->second == 2;
  double t = seconds_since(t0);
  report(1, "worked-example fidelity", ok && t < 1.0,
         "NF keys=" + std::to_string(nf.entries.size()) + " PF keys=" + std::to_string(pf.entries.size()) +
             fmt(" time=%.3fs", t));
}

void dataset_statistics() {
  auto s = corpus_stats(load_labels_csv(kData + "/labels.csv"));
  bool ok = s.matches == std::array<int, 6>{56, 66, 33, 34, 32, 63} &&
            s.histogram == std::array<int, 7>{20, 8, 7, 23, 26, 7, 9};
  std::ostringstream d;
  d << "matches";
  for (int m : s.matches)
    d << ' ' << m;
  d << " histogram";
  for (int h : s.histogram)
    d << ' ' << h;
  report(2, "dataset statistics", ok, d.str());
}

void dynamic_labels() {
  auto t0 = std::chrono::steady_clock::now();
  auto ds = dataset();
  auto anomalies = load_anomalies(kData + "/anomalies.csv");
  int compared = 0, equal = 0;
  std::string mismatched;
  for (const auto &e : ds.entries) {
    if (e.kind != SourceKind::Mir || !e.labels || is_anomalous(anomalies, e.id))
      continue;
    ++compared;
    if (label_method(load_function(e), OracleParams{}).labels() == *e.labels)
      ++equal;
    else
      mismatched += " " + e.name;
  }
  double t = seconds_since(t0);
  report(3, "dynamic-label replication", compared >= 50 && equal == compared && t < 60.0,
         std::to_string(equal) + "/" + std::to_string(compared) + " methods equal" + fmt(" time=%.2fs", t) +
             (mismatched.empty() ? "" : " mismatched:" + mismatched));
}

void metric_correctness() {
  auto m = metrics(ConfusionMatrix{3, 4, 1, 2});
  auto near = [](const Metric &x, double v) { return x.value && std::abs(*x.value - v) <= 1e-12; };
  bool ok = near(m.accuracy, 0.7) && near(m.precision, 0.75) && near(m.recall, 0.6) &&
            near(m.f_measure, 2.0 / 3.0) && near(m.bsr, 0.7);
  std::mt19937 gen(2024);
  double worst = 0;
  for (int t = 0; t < 1000; ++t) {
    std::size_t n = 2 + gen() % 60;
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = t % 2 ? static_cast<double>(gen() % 7) : std::ldexp(static_cast<double>(gen()), -32);
      y[i] = static_cast<int>(gen() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    worst = std::max(worst, std::abs(auc(s, y) - oracles::pairwise_auc(s, y)));
  }
  report(4, "metric correctness", ok && worst <= 1e-12, fmt("max AUC deviation=%.1e over 1000 instances", worst));
}

void kernel_properties() {
  auto ds = dataset();
  std::vector<std::string> ids;
  std::vector<AnnotatedCfg> cfgs;
  for (const auto &e : ds.entries)
    if (e.kind != SourceKind::None) {
      ids.push_back(e.id);
      cfgs.push_back(load_cfg(e));
    }
  bool ok = true;
  std::string detail;
  for (auto [name, spec] : {std::pair{"RWK", KernelSpec{RwkParams{}}}, std::pair{"GK", KernelSpec{GkParams{}}}}) {
    auto g = gram_matrix(ids, cfgs, spec);
    double asym = 0, diag = 0;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      diag = std::max(diag, std::abs(g.values[i][i] - 1.0));
      for (std::size_t j = 0; j < g.values.size(); ++j)
        asym = std::max(asym, std::abs(g.values[i][j] - g.values[j][i]));
    }
    ok &= asym <= 1e-12 && diag <= 1e-12 && g.min_eigenvalue >= kPsdTolerance;
    detail += std::string(name) + fmt(": min eig=%.2e", g.min_eigenvalue) + fmt(" |diag-1|=%.1e; ", diag);
  }

  // Small graphs: random ones plus every corpus graph with at most six nodes.
  std::mt19937 gen(99);
  std::vector<AnnotatedCfg> small;
  for (const auto &c : cfgs)
    if (c.nodes.size() <= 6)
      small.push_back(c);
  const NodeOp pool[] = {NodeOp::Assi, NodeOp::If, NodeOp::Add, NodeOp::Mul};
  while (small.size() < 40) {
    int n = 2 + static_cast<int>(gen() % 5);
    AnnotatedCfg g;
    for (int i = 0; i < n; ++i)
      g.nodes.push_back({i, i == 0 ? NodeOp::Start : i == n - 1 ? NodeOp::Exit : pool[gen() % 4]});
    for (int i = 0; i + 1 < n; ++i)
      g.edges.push_back({i, i + 1});
    for (int i = 1; i + 1 < n; ++i)
      for (int j = 1; j + 1 < n; ++j)
        if (j != i + 1 && gen() % 3 == 0)
          g.edges.push_back({i, j});
    small.push_back(g);
  }
  int exact = 0, pairs = 0;
  for (std::size_t a = 0; a < small.size(); ++a)
    for (std::size_t b = a; b < small.size(); ++b) {
      RwkParams p{10, 0.5, false};
      ++pairs;
      exact += random_walk_kernel(small[a], small[b], p) == oracles::brute_rwk(small[a], small[b], 10, 0.5);
    }
  ok &= exact == pairs;
  detail += "RWK brute force exact on " + std::to_string(exact) + "/" + std::to_string(pairs) + " pairs";
  report(5, "kernel properties", ok, detail);
}

void learner_sanity() {
  oracles::Rows x{{0, 0}, {0, 1}, {3, 3}, {3, 4}};
  std::vector<int> y{-1, -1, 1, 1};
  auto m = train_svm(x, y, {});
  int correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    correct += predict(m, x[i]) == y[i];
  double kkt = kkt_violation(m, x, y);

  oracles::Rows x3{{0, 0}, {2, 0}, {0, 2}};
  std::vector<int> y3{-1, 1, 1};
  SvmParams p;
  p.C = 10;
  auto m3 = train_svm(x3, y3, p);
  auto sol = oracles::brute_force_dual(x3, y3, p.C);
  double worst = sol ? 0.0 : 1e9;
  if (sol)
    for (const auto &q : oracles::Rows{{0, 0}, {2, 0}, {0, 2}, {1, 1}, {-1, 3}})
      worst = std::max(worst, std::abs(decision_value(m3, q) - oracles::oracle_decision(*sol, x3, y3, q)));
  report(6, "learner sanity", correct == 4 && kkt <= 1e-3 && worst <= 1e-4,
         "accuracy=" + std::to_string(correct) + "/4" + fmt(" kkt=%.1e", kkt) + fmt(" 3-point max dev=%.1e", worst));
}

void end_to_end() {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig c;
  c.propagate_seed();
  auto out = evaluate_samples(labelled_samples(dataset()), c);
  double sum = 0;
  int n = 0;
  std::string per;
  for (const auto &r : out.report["results"]) {
    const auto &a = r["aggregate"]["auc"];
    if (a.is_number()) {
      sum += a.get<double>();
      ++n;
      per += " " + r["mr"].get<std::string>() + fmt("=%.3f", a.get<double>());
    }
  }
  double mean = n ? sum / n : 0.0;
  double t = seconds_since(t0);
  report(7, "end-to-end replication", n == 6 && mean >= 0.75 && t < 300.0,
         fmt("mean AUC=%.4f", mean) + per + fmt(" time=%.2fs", t));
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void determinism() {
  auto base = fs::temp_directory_path() / ("mrkit_accept_" + std::to_string(::getpid()));
  std::string out[2];
  bool ran = true;
  for (int i = 0; i < 2; ++i) {
    auto dir = base / std::to_string(i);
    fs::create_directories(dir);
    std::string cmd = std::string("\"") + MRKIT_CLI + "\" evaluate --manifest \"" + kData + "/manifest.csv\" --labels \"" +
                      kData + "/labels.csv\" --seed 42 --out \"" + dir.string() + "\" > /dev/null 2>&1";
    ran &= std::system(cmd.c_str()) == 0;
    out[i] = slurp(dir / "report.json") + slurp(dir / "results.csv");
  }
  fs::remove_all(base);
  report(8, "determinism", ran && !out[0].empty() && out[0] == out[1],
         std::to_string(out[0].size()) + " report bytes compared");
}

} // namespace

int main() {
  worked_example();
  dataset_statistics();
  dynamic_labels();
  metric_correctness();
  kernel_properties();
  learner_sanity();
  end_to_end();
  determinism();
  std::printf("%d of 8 criteria failed\n", failures);
  return failures ? 1 : 0;
}
