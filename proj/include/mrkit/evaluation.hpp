// Stratified k-fold cross-validation and binary classification metrics.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrkit/svm.hpp"

namespace mrkit {

struct ConfusionMatrix {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
  std::int64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionMatrix &) const = default;
};

/// A ratio that may be undefined; `cause` explains an absent value.
struct Metric {
  std::optional<double> value;
  std::string cause;
};

struct EvalMetrics {
  Metric accuracy, precision, recall, f_measure, auc, bsr;
};

struct FoldPlan {
  int k = 10;
  std::uint64_t seed = 42;
  std::vector<int> assignments;  // sample index -> fold
  std::vector<std::string> warnings;
};

/// Each class is shuffled with the seed, the classes are concatenated
/// (positives first) and samples are dealt to folds round-robin.
/// Throws std::invalid_argument when k < 2 or k > sample count.
FoldPlan stratified_kfold(const std::vector<int> &labels, int k, std::uint64_t seed);

/// Throws std::invalid_argument on a length mismatch or non-binary entry.
ConfusionMatrix confusion(const std::vector<int> &predicted, const std::vector<int> &truth);

/// accuracy, precision, recall, f-measure and bsr; auc is left absent.
/// Throws std::invalid_argument on an empty matrix.
EvalMetrics metrics(const ConfusionMatrix &cm);

/// Mann-Whitney AUC, ties count one half. Throws when a class is missing.
double auc(const std::vector<double> &scores, const std::vector<int> &truth);

/// Inputs to one cross-validated experiment: either feature rows (linear
/// kernel) or a full precomputed Gram matrix over all samples.
struct ExperimentData {
  std::string featurization;
  SvmKernel kernel = SvmKernel::Linear;
  std::vector<std::vector<double>> data;
};

struct FoldResult {
  int fold = 0;
  std::size_t train_size = 0, test_size = 0;
  ConfusionMatrix cm;
  EvalMetrics metrics;
  std::string diagnostic;  // non-empty when the fold was skipped
};

struct EvalReport {
  std::string mr;
  std::string featurization;
  SvmParams svm;
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  EvalMetrics aggregate;  // mean over folds where each metric is defined
};

EvalReport cross_validate(const ExperimentData &exp, const std::vector<int> &labels, const std::string &mr,
                          const SvmParams &svm, const FoldPlan &plan);

nlohmann::json to_json(const EvalMetrics &m);
nlohmann::json to_json(const EvalReport &r);

/// Header: MR,featurization,accuracy,precision,recall,f-measure,auc,bsr.
/// Absent aggregates print as NA.
std::string results_csv(const std::vector<EvalReport> &reports);

} // namespace mrkit
