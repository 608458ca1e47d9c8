// End-to-end commands shared by the CLI and the acceptance harness.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mrkit/corpus.hpp"
#include "mrkit/evaluation.hpp"
#include "mrkit/featurize.hpp"
#include "mrkit/kernels.hpp"
#include "mrkit/oracle.hpp"
#include "mrkit/svm.hpp"

namespace mrkit {

enum class Featurization { NFPF, GK, RWK };

std::string_view to_string(Featurization f);
std::optional<Featurization> parse_featurization(std::string_view s);

/// Every stochastic stage receives `seed` and derives its own stream from it
/// with a stage tag (see seed.hpp).
struct RunConfig {
  Featurization features = Featurization::RWK;
  RwkParams rwk;
  GkParams gk;
  bool omit_exit_nf = false;
  SvmParams svm;
  OracleParams oracle;
  int k = 10;
  std::uint64_t seed = 42;
  std::vector<MrId> mrs{kAllMrs.begin(), kAllMrs.end()};

  /// Copies the root seed into the per-stage parameter blocks.
  void propagate_seed();
};

nlohmann::json to_json(const RunConfig &c);
/// Hash of the featurization and learner settings (not of k, MRs or oracle).
std::string model_params_hash(const RunConfig &c);

struct Sample {
  std::string id;
  AnnotatedCfg cfg;
  MrLabelSet labels;
};

/// Entries that have both a CFG source and reference labels, in manifest
/// order.
std::vector<Sample> labelled_samples(const Dataset &ds);

FeatureVector nfpf_features(const AnnotatedCfg &cfg, bool omit_exit);

/// Design matrix (NF-PF, linear kernel) or Gram matrix (GK/RWK, precomputed).
ExperimentData build_experiment(const std::vector<AnnotatedCfg> &cfgs, const RunConfig &c,
                                std::vector<std::string> *diagnostics = nullptr);

struct EvaluationOutput {
  nlohmann::json report;
  std::string results_csv;
  std::vector<std::string> diagnostics;
};

/// Cross-validates one model per requested MR. MRs with a single class are
/// skipped with a diagnostic.
EvaluationOutput evaluate_samples(const std::vector<Sample> &samples, const RunConfig &c);

/// A trained per-MR model with everything needed to score new methods.
struct TrainedModel {
  MrId mr = MrId::ADD;
  nlohmann::json config;
  std::string params_hash;
  SvmModel svm;
  std::vector<std::string> feature_index;  // NF-PF only
  std::vector<std::string> training_ids;
  std::vector<AnnotatedCfg> support_graphs;  // GK/RWK only, aligned with svm.support_indices
};

TrainedModel train_model(const std::vector<Sample> &samples, MrId mr, const RunConfig &c);
nlohmann::json to_json(const TrainedModel &m);
/// Throws std::invalid_argument when the embedded hash does not match the
/// embedded configuration.
TrainedModel trained_model_from_json(const nlohmann::json &j);
/// Reconstructs the RunConfig stored in a model.
RunConfig config_from_json(const nlohmann::json &j);

struct Prediction {
  int label = 0;
  double decision = 0.0;
  std::vector<std::string> unknown_features;
};

Prediction predict_method(const TrainedModel &m, const AnnotatedCfg &cfg);

} // namespace mrkit
