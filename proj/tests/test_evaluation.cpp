#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mrkit/evaluation.hpp"
#include "oracles.hpp"

using namespace mrkit;
using namespace oracles;

TEST_CASE("confusion matrix from predictions") {
  auto cm = confusion({1, 1, 1, 0, 1, 0, 0, 0, 0, 0}, {1, 1, 1, 1, 0, 0, 0, 0, 0, 1});
  CHECK(cm == ConfusionMatrix{3, 4, 1, 2});
  CHECK_THROWS_AS(confusion({1}, {1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(confusion({2}, {1}), std::invalid_argument);
}

TEST_CASE("metrics on the hand case") {
  ConfusionMatrix cm{3, 4, 1, 2};
  auto m = metrics(cm);
  double acc = 7.0 / 10.0, prec = 3.0 / 4.0, rec = 3.0 / 5.0;
  double f = 2 * prec * rec / (prec + rec);
  double bsr = (rec + 4.0 / 5.0) / 2.0;
  CHECK(std::abs(*m.accuracy.value - acc) <= 1e-12);
  CHECK(std::abs(*m.precision.value - prec) <= 1e-12);
  CHECK(std::abs(*m.recall.value - rec) <= 1e-12);
  CHECK(std::abs(*m.f_measure.value - f) <= 1e-12);
  CHECK(std::abs(*m.f_measure.value - 2.0 / 3.0) <= 1e-12);
  CHECK(std::abs(*m.bsr.value - bsr) <= 1e-12);
  CHECK(!m.auc.value);
}

TEST_CASE("undefined metrics carry a cause") {
  auto m = metrics(ConfusionMatrix{0, 5, 0, 0});
  CHECK(!m.precision.value);
  CHECK(!m.precision.cause.empty());
  CHECK(!m.recall.value);
  CHECK(*m.accuracy.value == 1.0);
  CHECK_THROWS_AS(metrics(ConfusionMatrix{}), std::invalid_argument);
}

TEST_CASE("auc hand case") { CHECK(auc({0.9, 0.4, 0.6, 0.1}, {1, 1, 0, 0}) == 0.75); }

TEST_CASE("auc matches pairwise counting on random instances") {
  std::mt19937 gen(41);
  for (int t = 0; t < 1000; ++t) {
    std::size_t n = 2 + gen() % 40;
    std::vector<double> s(n);
    std::vector<int> y(n);
    bool ties = gen() % 2;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = ties ? static_cast<double>(gen() % 5) : std::ldexp(static_cast<double>(gen()), -32);
      y[i] = static_cast<int>(gen() % 2);
    }
    y[0] = 1;
    y[1] = 0;
    CHECK(std::abs(auc(s, y) - pairwise_auc(s, y)) <= 1e-12);
  }
  CHECK_THROWS(auc({1, 2}, {1, 1}));
}

TEST_CASE("auc is invariant under monotone transforms") {
  std::mt19937 gen(43);
  std::normal_distribution<double> d;
  std::vector<double> s(50), lin(50), cube(50);
  std::vector<int> y(50);
  for (std::size_t i = 0; i < 50; ++i) {
    s[i] = d(gen);
    lin[i] = 2 * s[i] + 1;
    cube[i] = s[i] * s[i] * s[i];
    y[i] = i % 3 == 0;
  }
  CHECK(auc(s, y) == auc(lin, y));
  CHECK(auc(s, y) == auc(cube, y));
}

TEST_CASE("stratified folds") {
  std::vector<int> labels(100, 0);
  std::fill(labels.begin(), labels.begin() + 56, 1);
  auto plan = stratified_kfold(labels, 10, 42);
  std::vector<int> pos(10), size(10);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ++size[static_cast<std::size_t>(plan.assignments[i])];
    pos[static_cast<std::size_t>(plan.assignments[i])] += labels[i];
  }
  for (int f = 0; f < 10; ++f) {
    CHECK((pos[f] == 5 || pos[f] == 6));
    CHECK(size[f] == 10);
  }
  CHECK(stratified_kfold(labels, 10, 42).assignments == plan.assignments);
  CHECK(stratified_kfold(labels, 10, 43).assignments != plan.assignments);
  CHECK_THROWS_AS(stratified_kfold(labels, 1, 42), std::invalid_argument);
  CHECK_THROWS_AS(stratified_kfold({1, 0}, 3, 42), std::invalid_argument);
  auto scarce = stratified_kfold({1, 1, 0, 0, 0, 0, 0, 0}, 4, 1);
  CHECK(!scarce.warnings.empty());
}

TEST_CASE("cross validation on a learnable and a shuffled problem") {
  std::mt19937 gen(47);
  std::normal_distribution<double> d;
  ExperimentData exp{"synthetic", SvmKernel::Linear, {}};
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    int y = i % 3 == 0;
    exp.data.push_back({y ? 2.0 + 0.3 * d(gen) : 0.3 * d(gen), d(gen)});
    labels.push_back(y);
  }
  auto plan = stratified_kfold(labels, 10, 42);
  auto good = cross_validate(exp, labels, "ADD", {}, plan);
  CHECK(good.folds.size() == 10);
  CHECK(*good.aggregate.accuracy.value >= 0.95);
  CHECK(*good.aggregate.auc.value >= 0.95);

  auto shuffled = labels;
  std::shuffle(shuffled.begin(), shuffled.end(), gen);
  double mean = 0;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    auto r = cross_validate(exp, shuffled, "ADD", {}, stratified_kfold(shuffled, 10, s));
    mean += *r.aggregate.auc.value / 5.0;
  }
  CHECK(mean >= 0.3);
  CHECK(mean <= 0.7);

  auto csv = results_csv({good});
  CHECK(csv.rfind("MR,featurization,accuracy,precision,recall,f-measure,auc,bsr\nADD,synthetic,", 0) == 0);
  CHECK(to_json(good).dump() == to_json(cross_validate(exp, labels, "ADD", {}, plan)).dump());
}

TEST_CASE("precomputed cross validation uses gram submatrices") {
  std::vector<std::vector<double>> x;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    int y = i % 2;
    x.push_back({static_cast<double>(y * 3) + 0.01 * i, 1.0});
    labels.push_back(y);
  }
  std::vector<std::vector<double>> K(30, std::vector<double>(30));
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j)
      K[i][j] = x[i][0] * x[j][0] + x[i][1] * x[j][1];
  auto plan = stratified_kfold(labels, 5, 42);
  SvmParams pre;
  pre.kernel = SvmKernel::Precomputed;
  auto a = cross_validate({"lin", SvmKernel::Linear, x}, labels, "MUL", {}, plan);
  auto b = cross_validate({"pre", SvmKernel::Precomputed, K}, labels, "MUL", pre, plan);
  for (std::size_t f = 0; f < a.folds.size(); ++f)
    CHECK(a.folds[f].cm == b.folds[f].cm);
}
