#include "mrkit/pipeline.hpp"

#include <cstdio>
#include <stdexcept>

#include "mrkit/dot.hpp"
#include "mrkit/seed.hpp"

namespace mrkit {

std::string_view to_string(Featurization f) {
  switch (f) {
  case Featurization::NFPF: return "NF-PF";
  case Featurization::GK: return "GK";
  case Featurization::RWK: return "RWK";
  }
  return "?";
}

std::optional<Featurization> parse_featurization(std::string_view s) {
  if (s == "nf-pf" || s == "NF-PF")
    return Featurization::NFPF;
  if (s == "gk" || s == "GK")
    return Featurization::GK;
  if (s == "rwk" || s == "RWK")
    return Featurization::RWK;
  return std::nullopt;
}

void RunConfig::propagate_seed() {
  gk.seed = seed;
  svm.seed = seed;
  oracle.seed = seed;
}

namespace {

nlohmann::json learner_json(const RunConfig &c) {
  nlohmann::json j{{"features", std::string(to_string(c.features))},
                   {"svm", {{"C", c.svm.C}, {"tolerance", c.svm.tolerance}, {"max_passes", c.svm.max_passes}}},
                   {"seed", c.seed}};
  switch (c.features) {
  case Featurization::NFPF: j["omit_exit_nf"] = c.omit_exit_nf; break;
  case Featurization::RWK:
    j["rwk"] = {{"walk_len", c.rwk.max_walk_length}, {"lambda", c.rwk.decay}, {"normalize", c.rwk.normalize}};
    break;
  case Featurization::GK:
    j["gk"] = {{"k", c.gk.k},
               {"mode", c.gk.mode == GraphletMode::Exhaustive ? "exhaustive" : "sampled"},
               {"samples", c.gk.sample_count},
               {"normalize", c.gk.normalize}};
    break;
  }
  return j;
}

std::string hex_hash(const std::string &s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(s)));
  return buf;
}

SvmKernel kernel_of(Featurization f) {
  return f == Featurization::NFPF ? SvmKernel::Linear : SvmKernel::Precomputed;
}

} // namespace

nlohmann::json to_json(const RunConfig &c) {
  auto j = learner_json(c);
  nlohmann::json mrs = nlohmann::json::array();
  for (auto mr : c.mrs)
    mrs.push_back(std::string(to_string(mr)));
  j["mrs"] = mrs;
  j["k"] = c.k;
  j["oracle"] = {{"trials", c.oracle.trials},
                 {"length", {c.oracle.min_length, c.oracle.max_length}},
                 {"values", {c.oracle.value_min, c.oracle.value_max}},
                 {"inv_value_min", c.oracle.inv_value_min},
                 {"constants", {c.oracle.constant_min, c.oracle.constant_max}},
                 {"tolerance", c.oracle.tolerance}};
  return j;
}

std::string model_params_hash(const RunConfig &c) { return hex_hash(learner_json(c).dump()); }

RunConfig config_from_json(const nlohmann::json &j) {
  RunConfig c;
  auto f = parse_featurization(j.at("features").get<std::string>());
  if (!f)
    throw std::invalid_argument("unknown featurization in model configuration");
  c.features = *f;
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto &s = j.at("svm");
  c.svm.C = s.at("C").get<double>();
  c.svm.tolerance = s.at("tolerance").get<double>();
  c.svm.max_passes = s.at("max_passes").get<int>();
  if (j.contains("omit_exit_nf"))
    c.omit_exit_nf = j["omit_exit_nf"].get<bool>();
  if (j.contains("rwk")) {
    c.rwk.max_walk_length = j["rwk"].at("walk_len").get<int>();
    c.rwk.decay = j["rwk"].at("lambda").get<double>();
    c.rwk.normalize = j["rwk"].at("normalize").get<bool>();
  }
  if (j.contains("gk")) {
    c.gk.k = j["gk"].at("k").get<int>();
    c.gk.mode = j["gk"].at("mode").get<std::string>() == "sampled" ? GraphletMode::Sampled : GraphletMode::Exhaustive;
    c.gk.sample_count = j["gk"].at("samples").get<int>();
    c.gk.normalize = j["gk"].at("normalize").get<bool>();
  }
  c.svm.kernel = kernel_of(c.features);
  c.propagate_seed();
  return c;
}

std::vector<Sample> labelled_samples(const Dataset &ds) {
  std::vector<Sample> out;
  for (const auto &e : ds.entries)
    if (e.kind != SourceKind::None && e.labels)
      out.push_back({e.id, load_cfg(e), *e.labels});
  return out;
}

FeatureVector nfpf_features(const AnnotatedCfg &cfg, bool omit_exit) {
  return combine(node_features(cfg, {omit_exit}), path_features(cfg));
}

ExperimentData build_experiment(const std::vector<AnnotatedCfg> &cfgs, const RunConfig &c,
                                std::vector<std::string> *diagnostics) {
  ExperimentData exp;
  exp.featurization = std::string(to_string(c.features));
  exp.kernel = kernel_of(c.features);
  if (c.features == Featurization::NFPF) {
    std::vector<std::pair<std::string, FeatureVector>> rows;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
      rows.emplace_back(std::to_string(i), nfpf_features(cfgs[i], c.omit_exit_nf));
    exp.data = build_design_matrix(rows, false).rows;
    return exp;
  }
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < cfgs.size(); ++i)
    ids.push_back(cfgs[i].name.empty() ? std::to_string(i) : cfgs[i].name);
  KernelSpec spec = c.features == Featurization::RWK ? KernelSpec{c.rwk} : KernelSpec{c.gk};
  auto gram = gram_matrix(ids, cfgs, spec);
  if (diagnostics)
    diagnostics->insert(diagnostics->end(), gram.diagnostics.begin(), gram.diagnostics.end());
  exp.data = std::move(gram.values);
  return exp;
}

EvaluationOutput evaluate_samples(const std::vector<Sample> &samples, const RunConfig &c) {
  EvaluationOutput out;
  std::vector<AnnotatedCfg> cfgs;
  for (const auto &s : samples)
    cfgs.push_back(s.cfg);
  auto exp = build_experiment(cfgs, c, &out.diagnostics);
  SvmParams svm = c.svm;
  svm.kernel = exp.kernel;
  svm.seed = c.seed;

  std::vector<EvalReport> reports;
  nlohmann::json report_json = nlohmann::json::array();
  for (auto mr : c.mrs) {
    std::vector<int> labels;
    int positives = 0;
    for (const auto &s : samples) {
      labels.push_back(s.labels[mr] ? 1 : 0);
      positives += labels.back();
    }
    if (positives == 0 || positives == static_cast<int>(labels.size())) {
      out.diagnostics.push_back(std::string(to_string(mr)) + " skipped: corpus contains a single class");
      continue;
    }
    auto plan = stratified_kfold(labels, c.k, c.seed);
    for (const auto &w : plan.warnings)
      out.diagnostics.push_back(std::string(to_string(mr)) + ": " + w);
    reports.push_back(cross_validate(exp, labels, std::string(to_string(mr)), svm, plan));
    for (const auto &f : reports.back().folds)
      if (!f.diagnostic.empty())
        out.diagnostics.push_back(std::string(to_string(mr)) + " fold " + std::to_string(f.fold) + ": " +
                                  f.diagnostic);
    report_json.push_back(to_json(reports.back()));
  }
  nlohmann::json ids = nlohmann::json::array();
  for (const auto &s : samples)
    ids.push_back(s.id);
  out.report = {{"config", to_json(c)},
                {"params_hash", model_params_hash(c)},
                {"methods", ids},
                {"results", report_json},
                {"diagnostics", out.diagnostics}};
  out.results_csv = results_csv(reports);
  return out;
}

TrainedModel train_model(const std::vector<Sample> &samples, MrId mr, const RunConfig &c) {
  TrainedModel m;
  m.mr = mr;
  m.config = learner_json(c);
  m.params_hash = model_params_hash(c);
  std::vector<AnnotatedCfg> cfgs;
  std::vector<int> y;
  for (const auto &s : samples) {
    cfgs.push_back(s.cfg);
    m.training_ids.push_back(s.id);
    y.push_back(s.labels[mr] ? 1 : -1);
  }
  auto exp = build_experiment(cfgs, c);
  SvmParams svm = c.svm;
  svm.kernel = exp.kernel;
  svm.seed = c.seed;
  m.svm = train_svm(exp.data, y, svm);
  if (c.features == Featurization::NFPF) {
    std::vector<std::pair<std::string, FeatureVector>> rows;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
      rows.emplace_back(std::to_string(i), nfpf_features(cfgs[i], c.omit_exit_nf));
    m.feature_index = build_design_matrix(rows, false).feature_index;
  } else {
    for (auto i : m.svm.support_indices)
      m.support_graphs.push_back(cfgs[i]);
  }
  return m;
}

nlohmann::json to_json(const TrainedModel &m) {
  nlohmann::json graphs = nlohmann::json::array();
  for (const auto &g : m.support_graphs)
    graphs.push_back(emit_dot(g));
  return {{"mr", std::string(to_string(m.mr))},
          {"config", m.config},
          {"params_hash", m.params_hash},
          {"svm", to_json(m.svm)},
          {"feature_index", m.feature_index},
          {"training_ids", m.training_ids},
          {"support_graphs", graphs}};
}

TrainedModel trained_model_from_json(const nlohmann::json &j) {
  TrainedModel m;
  auto mr = parse_mr(j.at("mr").get<std::string>());
  if (!mr)
    throw std::invalid_argument("model names an unknown MR");
  m.mr = *mr;
  m.config = j.at("config");
  m.params_hash = j.at("params_hash").get<std::string>();
  if (model_params_hash(config_from_json(m.config)) != m.params_hash)
    throw std::invalid_argument("model params hash does not match its configuration");
  m.svm = svm_model_from_json(j.at("svm"));
  m.feature_index = j.at("feature_index").get<std::vector<std::string>>();
  m.training_ids = j.at("training_ids").get<std::vector<std::string>>();
  for (const auto &d : j.at("support_graphs"))
    m.support_graphs.push_back(parse_dot(d.get<std::string>()));
  if (m.svm.kernel == SvmKernel::Precomputed && m.support_graphs.size() != m.svm.support_indices.size())
    throw std::invalid_argument("model support graphs do not match its support vectors");
  return m;
}

Prediction predict_method(const TrainedModel &m, const AnnotatedCfg &cfg) {
  auto c = config_from_json(m.config);
  Prediction p;
  std::vector<double> sample;
  if (c.features == Featurization::NFPF) {
    sample = project(nfpf_features(cfg, c.omit_exit_nf), m.feature_index, false, &p.unknown_features);
  } else {
    KernelSpec spec = c.features == Featurization::RWK ? KernelSpec{c.rwk} : KernelSpec{c.gk};
    auto col = kernel_column(cfg, m.support_graphs, spec);
    sample.assign(m.svm.training_size, 0.0);
    for (std::size_t s = 0; s < col.size(); ++s)
      sample[m.svm.support_indices[s]] = col[s];
  }
  p.decision = decision_value(m.svm, sample);
  p.label = p.decision >= 0.0 ? 1 : 0;
  return p;
}

} // namespace mrkit
