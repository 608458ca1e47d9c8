#include "mrkit/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "mrkit/seed.hpp"

namespace mrkit {

namespace {

void check_binary(const std::vector<int> &v, const char *what) {
  for (int x : v)
    if (x != 0 && x != 1)
      throw std::invalid_argument(std::string(what) + " must contain only 0 and 1");
}

Metric ratio(double num, double den, const char *cause) {
  if (den == 0.0)
    return {std::nullopt, cause};
  return {num / den, {}};
}

} // namespace

FoldPlan stratified_kfold(const std::vector<int> &labels, int k, std::uint64_t seed) {
  check_binary(labels, "labels");
  if (k < 2)
    throw std::invalid_argument("k must be at least 2");
  if (static_cast<std::size_t>(k) > labels.size())
    throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the sample count " +
                                std::to_string(labels.size()));
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.assignments.assign(labels.size(), -1);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i)
    (labels[i] ? pos : neg).push_back(i);
  Rng rng(derive_seed(seed, "stratified-folds"));
  rng.shuffle(pos);
  rng.shuffle(neg);
  if (pos.size() < static_cast<std::size_t>(k))
    plan.warnings.push_back("positive class has " + std::to_string(pos.size()) + " members, fewer than k");
  if (neg.size() < static_cast<std::size_t>(k))
    plan.warnings.push_back("negative class has " + std::to_string(neg.size()) + " members, fewer than k");
  std::size_t slot = 0;
  for (const auto *cls : {&pos, &neg})
    for (auto i : *cls)
      plan.assignments[i] = static_cast<int>(slot++ % static_cast<std::size_t>(k));
  return plan;
}

ConfusionMatrix confusion(const std::vector<int> &predicted, const std::vector<int> &truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                                std::to_string(truth.size()) + " labels");
  check_binary(predicted, "predictions");
  check_binary(truth, "labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i])
      (predicted[i] ? cm.tp : cm.fn)++;
    else
      (predicted[i] ? cm.fp : cm.tn)++;
  }
  return cm;
}

EvalMetrics metrics(const ConfusionMatrix &cm) {
  if (cm.total() <= 0)
    throw std::invalid_argument("metrics of an empty confusion matrix");
  const auto tp = static_cast<double>(cm.tp), tn = static_cast<double>(cm.tn);
  const auto fp = static_cast<double>(cm.fp), fn = static_cast<double>(cm.fn);
  EvalMetrics m;
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn, "empty");
  m.precision = ratio(tp, tp + fp, "no positive predictions");
  m.recall = ratio(tp, tp + fn, "no positive samples");
  if (m.precision.value && m.recall.value) {
    double p = *m.precision.value, r = *m.recall.value;
    m.f_measure = ratio(2.0 * p * r, p + r, "precision and recall are both zero");
  } else {
    m.f_measure = {std::nullopt, "precision or recall undefined"};
  }
  auto neg_recall = ratio(tn, tn + fp, "no negative samples");
  if (m.recall.value && neg_recall.value)
    m.bsr = {(*m.recall.value + *neg_recall.value) / 2.0, {}};
  else
    m.bsr = {std::nullopt, m.recall.value ? neg_recall.cause : m.recall.cause};
  m.auc = {std::nullopt, "not computed from a confusion matrix"};
  return m;
}

double auc(const std::vector<double> &scores, const std::vector<int> &truth) {
  if (scores.size() != truth.size())
    throw std::invalid_argument("auc: score/label length mismatch");
  check_binary(truth, "labels");
  // Rank-sum form: sort once, average ranks across ties.
  std::vector<std::size_t> idx(scores.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t npos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]])
      ++j;
    double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (truth[idx[t]]) {
        rank_sum += avg_rank;
        ++npos;
      }
    i = j;
  }
  const std::size_t nneg = truth.size() - npos;
  if (npos == 0 || nneg == 0)
    throw std::invalid_argument("auc needs both classes");
  const double p = static_cast<double>(npos), n = static_cast<double>(nneg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

EvalReport cross_validate(const ExperimentData &exp, const std::vector<int> &labels, const std::string &mr,
                          const SvmParams &svm, const FoldPlan &plan) {
  const std::size_t n = labels.size();
  if (exp.data.size() != n || plan.assignments.size() != n)
    throw std::invalid_argument("cross_validate: data, labels and fold plan sizes differ");
  EvalReport report;
  report.mr = mr;
  report.featurization = exp.featurization;
  report.svm = svm;
  report.svm.kernel = exp.kernel;
  report.k = plan.k;
  report.seed = plan.seed;

  for (int f = 0; f < plan.k; ++f) {
    FoldResult fr;
    fr.fold = f;
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i)
      (plan.assignments[i] == f ? test : train).push_back(i);
    fr.train_size = train.size();
    fr.test_size = test.size();

    std::vector<std::vector<double>> x_train;
    std::vector<int> y_train;
    for (auto i : train) {
      if (exp.kernel == SvmKernel::Precomputed) {
        std::vector<double> row;
        for (auto j : train)
          row.push_back(exp.data[i][j]);
        x_train.push_back(std::move(row));
      } else {
        x_train.push_back(exp.data[i]);
      }
      y_train.push_back(labels[i] ? 1 : -1);
    }

    SvmModel model;
    try {
      if (test.empty())
        throw std::invalid_argument("empty test fold");
      model = train_svm(x_train, y_train, report.svm);
    } catch (const std::invalid_argument &e) {
      fr.diagnostic = std::string("fold skipped: ") + e.what();
      report.folds.push_back(std::move(fr));
      continue;
    }

    std::vector<double> scores;
    std::vector<int> predicted, truth;
    for (auto i : test) {
      std::vector<double> sample;
      if (exp.kernel == SvmKernel::Precomputed)
        for (auto j : train)
          sample.push_back(exp.data[i][j]);
      else
        sample = exp.data[i];
      double s = decision_value(model, sample);
      scores.push_back(s);
      predicted.push_back(s >= 0.0 ? 1 : 0);
      truth.push_back(labels[i]);
    }
    fr.cm = confusion(predicted, truth);
    fr.metrics = metrics(fr.cm);
    if (std::count(truth.begin(), truth.end(), 1) == 0 || std::count(truth.begin(), truth.end(), 0) == 0)
      fr.metrics.auc = {std::nullopt, "single-class test fold"};
    else
      fr.metrics.auc = {auc(scores, truth), {}};
    report.folds.push_back(std::move(fr));
  }

  auto mean_of = [&](Metric EvalMetrics::*field) {
    double sum = 0.0;
    int count = 0;
    for (const auto &fr : report.folds)
      if (fr.diagnostic.empty() && (fr.metrics.*field).value) {
        sum += *(fr.metrics.*field).value;
        ++count;
      }
    if (count == 0)
      return Metric{std::nullopt, "undefined in every fold"};
    return Metric{sum / count, {}};
  };
  report.aggregate.accuracy = mean_of(&EvalMetrics::accuracy);
  report.aggregate.precision = mean_of(&EvalMetrics::precision);
  report.aggregate.recall = mean_of(&EvalMetrics::recall);
  report.aggregate.f_measure = mean_of(&EvalMetrics::f_measure);
  report.aggregate.auc = mean_of(&EvalMetrics::auc);
  report.aggregate.bsr = mean_of(&EvalMetrics::bsr);
  return report;
}

namespace {

nlohmann::json metric_json(const Metric &m) {
  if (m.value)
    return *m.value;
  return nlohmann::json{{"absent", m.cause}};
}

} // namespace

nlohmann::json to_json(const EvalMetrics &m) {
  return {{"accuracy", metric_json(m.accuracy)}, {"precision", metric_json(m.precision)},
          {"recall", metric_json(m.recall)},     {"f-measure", metric_json(m.f_measure)},
          {"auc", metric_json(m.auc)},           {"bsr", metric_json(m.bsr)}};
}

nlohmann::json to_json(const EvalReport &r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto &f : r.folds) {
    nlohmann::json j{{"fold", f.fold}, {"train_size", f.train_size}, {"test_size", f.test_size}};
    if (!f.diagnostic.empty()) {
      j["diagnostic"] = f.diagnostic;
    } else {
      j["confusion"] = {{"tp", f.cm.tp}, {"tn", f.cm.tn}, {"fp", f.cm.fp}, {"fn", f.cm.fn}};
      j["metrics"] = to_json(f.metrics);
    }
    folds.push_back(std::move(j));
  }
  return {{"mr", r.mr},
          {"featurization", r.featurization},
          {"svm",
           {{"C", r.svm.C},
            {"tolerance", r.svm.tolerance},
            {"max_passes", r.svm.max_passes},
            {"kernel", std::string(to_string(r.svm.kernel))},
            {"seed", r.svm.seed}}},
          {"k", r.k},
          {"seed", r.seed},
          {"folds", std::move(folds)},
          {"aggregate", to_json(r.aggregate)}};
}

std::string results_csv(const std::vector<EvalReport> &reports) {
  std::ostringstream os;
  os << "MR,featurization,accuracy,precision,recall,f-measure,auc,bsr\n";
  auto cell = [](const Metric &m) {
    if (!m.value)
      return std::string("NA");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *m.value);
    return std::string(buf);
  };
  for (const auto &r : reports) {
    const auto &a = r.aggregate;
    os << r.mr << ',' << r.featurization << ',' << cell(a.accuracy) << ',' << cell(a.precision) << ','
       << cell(a.recall) << ',' << cell(a.f_measure) << ',' << cell(a.auc) << ',' << cell(a.bsr) << '\n';
  }
  return os.str();
}

} // namespace mrkit
