#include <doctest.h>

#include "mrkit/dot.hpp"
#include "mrkit/pipeline.hpp"

using namespace mrkit;

namespace {

std::vector<Sample> corpus_samples() {
  static auto samples = labelled_samples(
      load_manifest(std::string(MRKIT_DATA_DIR) + "/manifest.csv", std::string(MRKIT_DATA_DIR) + "/labels.csv"));
  return samples;
}

} // namespace

TEST_CASE("featurization names") {
  for (auto f : {Featurization::NFPF, Featurization::GK, Featurization::RWK})
    CHECK(parse_featurization(to_string(f)) == f);
  CHECK(parse_featurization("rwk") == Featurization::RWK);
  CHECK(!parse_featurization("bogus"));
}

TEST_CASE("seed propagation") {
  RunConfig c;
  c.seed = 7;
  c.propagate_seed();
  CHECK(c.gk.seed == 7);
  CHECK(c.svm.seed == 7);
  CHECK(c.oracle.seed == 7);
}

TEST_CASE("params hash tracks learner settings only") {
  RunConfig a, b;
  CHECK(model_params_hash(a) == model_params_hash(b));
  b.k = 5;
  b.mrs = {MrId::ADD};
  CHECK(model_params_hash(a) == model_params_hash(b));
  b.rwk.decay = 0.25;
  CHECK(model_params_hash(a) != model_params_hash(b));
  auto back = config_from_json(to_json(b));
  CHECK(model_params_hash(back) == model_params_hash(b));
}

TEST_CASE("evaluation reports are byte identical across runs") {
  auto samples = corpus_samples();
  for (auto f : {Featurization::NFPF, Featurization::RWK}) {
    RunConfig c;
    c.features = f;
    c.propagate_seed();
    auto a = evaluate_samples(samples, c), b = evaluate_samples(samples, c);
    CHECK(a.report.dump() == b.report.dump());
    CHECK(a.results_csv == b.results_csv);
    CHECK(a.report["results"].size() == 6);
  }
}

TEST_CASE("trained models round trip and predict") {
  auto samples = corpus_samples();
  for (auto f : {Featurization::NFPF, Featurization::RWK, Featurization::GK}) {
    RunConfig c;
    c.features = f;
    c.propagate_seed();
    auto m = train_model(samples, MrId::ADD, c);
    auto back = trained_model_from_json(nlohmann::json::parse(to_json(m).dump()));
    for (std::size_t i = 0; i < samples.size(); i += 7) {
      auto p = predict_method(m, samples[i].cfg);
      auto q = predict_method(back, samples[i].cfg);
      CHECK(p.label == q.label);
      CHECK(p.decision == doctest::Approx(q.decision).epsilon(1e-12));
    }
    auto j = to_json(m);
    j["config"]["svm"]["C"] = 5.0;
    CHECK_THROWS_AS(trained_model_from_json(j), std::invalid_argument);
  }
}

TEST_CASE("precomputed prediction reproduces the training decision values") {
  auto samples = corpus_samples();
  RunConfig c;
  c.propagate_seed();
  auto m = train_model(samples, MrId::PER, c);
  std::vector<AnnotatedCfg> cfgs;
  for (const auto &s : samples)
    cfgs.push_back(s.cfg);
  auto exp = build_experiment(cfgs, c);
  for (std::size_t i = 0; i < samples.size(); i += 5)
    CHECK(predict_method(m, samples[i].cfg).decision ==
          doctest::Approx(decision_value(m.svm, exp.data[i])).epsilon(1e-9));
}

TEST_CASE("single-class MRs are skipped with a diagnostic") {
  auto samples = corpus_samples();
  samples.resize(12);
  for (auto &s : samples)
    s.labels[MrId::ADD] = true;
  RunConfig c;
  c.k = 3;
  c.mrs = {MrId::ADD};
  auto out = evaluate_samples(samples, c);
  CHECK(out.report["results"].empty());
  REQUIRE(!out.diagnostics.empty());
  CHECK(out.diagnostics[0].find("single class") != std::string::npos);
}
