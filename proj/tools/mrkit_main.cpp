// mrkit: predict metamorphic relations from control-flow graphs.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mrkit/corpus.hpp"
#include "mrkit/dot.hpp"
#include "mrkit/mir.hpp"
#include "mrkit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mrkit;

namespace {

constexpr int kOk = 0, kPartial = 1, kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char *env = std::getenv("MRKIT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception &) {
      throw UsageError(std::string("MRKIT_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return 42;
}

void write_file(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

std::string features_csv(const std::string &id, const AnnotatedCfg &cfg, bool omit_exit) {
  return "method_id,kind,feature_key,count\n" + feature_csv_rows(id, node_features(cfg, {omit_exit})) +
         feature_csv_rows(id, path_features(cfg));
}

// Named CFGs from a .mir (every function) or .dot file.
std::vector<AnnotatedCfg> load_any(const std::string &path) {
  auto ext = fs::path(path).extension().string();
  if (ext == ".mir") {
    std::vector<AnnotatedCfg> out;
    for (const auto &fn : mir::read_program_file(path).functions)
      out.push_back(mir::lower_to_cfg(fn));
    return out;
  }
  if (ext == ".dot") {
    auto g = read_dot_file(path);
    if (g.name.empty())
      g.name = fs::path(path).stem().string();
    return {g};
  }
  throw std::runtime_error("unsupported input '" + path + "' (expected .mir or .dot)");
}

std::vector<MrId> parse_mrs(const std::string &s) {
  if (s == "all")
    return {kAllMrs.begin(), kAllMrs.end()};
  auto mr = parse_mr(s);
  if (!mr)
    throw UsageError("unknown MR '" + s + "'");
  return {*mr};
}

// Options shared by the learning commands.
struct Common {
  std::string manifest, labels, features = "rwk", mr = "all", out;
  int k = 10, walk_len = 10, graphlet_k = 3, trials = 200;
  double C = 1.0, lambda = 0.5;
  bool omit_exit = false;
  std::uint64_t seed = 42;

  RunConfig config() const {
    RunConfig c;
    auto f = parse_featurization(features);
    if (!f)
      throw UsageError("unknown featurization '" + features + "' (expected nf-pf, gk or rwk)");
    c.features = *f;
    c.rwk.max_walk_length = walk_len;
    c.rwk.decay = lambda;
    c.gk.k = graphlet_k;
    c.omit_exit_nf = omit_exit;
    c.svm.C = C;
    c.oracle.trials = trials;
    c.k = k;
    c.seed = seed;
    c.mrs = parse_mrs(mr);
    c.propagate_seed();
    try {
      check_params(c.rwk);
      check_params(c.gk);
      check_params(c.oracle);
    } catch (const std::invalid_argument &e) {
      throw UsageError(e.what());
    }
    if (!(C > 0))
      throw UsageError("--C must be positive");
    if (k < 2)
      throw UsageError("--k must be at least 2");
    return c;
  }
};

void add_common(CLI::App *cmd, Common &o, bool learning) {
  cmd->add_option("--manifest", o.manifest, "Dataset manifest CSV")->required()->check(CLI::ExistingFile);
  cmd->add_option("--labels", o.labels, "Reference labels CSV")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Root seed (default 42 or MRKIT_SEED)");
  cmd->add_option("--out", o.out, "Output path");
  if (!learning)
    return;
  cmd->add_option("--features", o.features, "nf-pf, gk or rwk")->capture_default_str();
  cmd->add_option("--mr", o.mr, "add, mul, per, inc, exc, inv or all")->capture_default_str();
  cmd->add_option("--C", o.C, "SVM box constraint")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Random-walk decay")->capture_default_str();
  cmd->add_option("--walk-len", o.walk_len, "Random-walk length")->capture_default_str();
  cmd->add_option("--graphlet-k", o.graphlet_k, "Graphlet size (3 or 4)")->capture_default_str();
  cmd->add_flag("--omit-exit-nf", o.omit_exit, "Drop the exit node from node features");
}

Dataset load_dataset(const Common &o) { return load_manifest(o.manifest, o.labels); }

int cmd_extract(const std::vector<std::string> &inputs, const std::string &out_dir, bool omit_exit) {
  if (inputs.empty()) {
    std::cerr << "warning: no inputs given\n";
    return kOk;
  }
  int failed = 0, written = 0;
  for (const auto &path : inputs) {
    try {
      for (const auto &g : load_any(path)) {
        write_file(fs::path(out_dir) / (g.name + ".dot"), emit_dot(g));
        write_file(fs::path(out_dir) / (g.name + ".features.csv"), features_csv(g.name, g, omit_exit));
        ++written;
      }
    } catch (const std::exception &e) {
      std::cerr << path << ": " << e.what() << '\n';
      ++failed;
    }
  }
  std::cerr << written << " method(s) extracted, " << failed << " file(s) failed\n";
  return failed ? kPartial : kOk;
}

int cmd_featurize(const Common &o) {
  auto c = o.config();
  auto ds = load_dataset(o);
  std::vector<AnnotatedCfg> cfgs;
  std::vector<std::string> ids;
  for (const auto &e : ds.entries)
    if (e.kind != SourceKind::None) {
      cfgs.push_back(load_cfg(e));
      ids.push_back(e.id);
    }
  std::string text;
  if (c.features == Featurization::NFPF) {
    std::vector<std::pair<std::string, FeatureVector>> rows;
    for (std::size_t i = 0; i < cfgs.size(); ++i)
      rows.emplace_back(ids[i], nfpf_features(cfgs[i], c.omit_exit_nf));
    text = design_matrix_csv(build_design_matrix(rows, false));
  } else {
    KernelSpec spec = c.features == Featurization::RWK ? KernelSpec{c.rwk} : KernelSpec{c.gk};
    auto gram = gram_matrix(ids, cfgs, spec);
    for (const auto &d : gram.diagnostics)
      std::cerr << "diagnostic: " << d << '\n';
    text = gram_csv(gram);
  }
  if (o.out.empty())
    std::cout << text;
  else
    write_file(o.out, text);
  return kOk;
}

nlohmann::json witness_json(const Witness &w) {
  nlohmann::json j{{"trial", w.trial}, {"source", w.source}, {"followup", w.followup}, {"cause", w.cause}};
  if (w.out_source)
    j["output_source"] = *w.out_source;
  if (w.out_followup)
    j["output_followup"] = *w.out_followup;
  return j;
}

int cmd_label(const Common &o, const std::string &report_path) {
  auto c = o.config();
  auto ds = load_dataset(o);
  auto table = make_label_table();
  std::vector<std::pair<std::string, LabelResult>> dynamic;
  int failed = 0, attempted = 0;
  for (const auto &e : ds.entries) {
    if (e.kind != SourceKind::Mir)
      continue;
    ++attempted;
    try {
      auto result = label_method(load_function(e), c.oracle);
      table.emplace(e.id, result.labels());
      for (auto mr : kAllMrs) {
        const auto &l = result.per_mr[static_cast<std::size_t>(mr)];
        if (l.witness && l.witness->cause.find("trapped") != std::string::npos)
          std::cerr << e.id << " " << e.name << " " << to_string(mr) << ": " << l.witness->cause << '\n';
      }
      dynamic.emplace_back(e.id, std::move(result));
    } catch (const std::exception &ex) {
      std::cerr << e.id << " " << e.name << ": " << ex.what() << '\n';
      ++failed;
    }
  }
  if (o.out.empty())
    std::cout << emit_labels_csv(table);
  else
    write_file(o.out, emit_labels_csv(table));

  bool with_reference = !o.labels.empty();
  if (with_reference) {
    std::map<std::string, MrLabelSet> ref;
    for (const auto &e : ds.entries)
      if (e.labels)
        ref.emplace(e.id, *e.labels);
    auto audit = audit_labels(dynamic, ref);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto &d : audit.discrepancies) {
      const auto *entry = ds.find(d.method_id);
      std::cerr << "discrepancy: " << d.method_id << " " << (entry ? entry->name : "") << " " << to_string(d.mr)
                << " reference=" << d.reference << " dynamic=" << d.dynamic << " (" << d.kind << ")\n";
      nlohmann::json j{{"method_id", d.method_id},
                       {"name", entry ? entry->name : ""},
                       {"mr", std::string(to_string(d.mr))},
                       {"reference", d.reference},
                       {"dynamic", d.dynamic},
                       {"kind", d.kind}};
      if (d.witness)
        j["witness"] = witness_json(*d.witness);
      rows.push_back(std::move(j));
    }
    if (!report_path.empty())
      write_file(report_path, nlohmann::json{{"trials", c.oracle.trials},
                                             {"seed", c.oracle.seed},
                                             {"discrepancies", rows},
                                             {"unmatched", audit.unmatched}}
                                      .dump(2) +
                                  "\n");
  }
  if (attempted > 0 && failed == attempted)
    return kPartial;
  return failed ? kPartial : kOk;
}

int cmd_train(const Common &o) {
  auto c = o.config();
  if (o.out.empty())
    throw UsageError("train needs --out <directory>");
  auto samples = labelled_samples(load_dataset(o));
  if (samples.empty())
    throw UsageError("no labelled methods with a CFG source in the manifest");
  int skipped = 0;
  for (auto mr : c.mrs) {
    try {
      auto model = train_model(samples, mr, c);
      write_file(fs::path(o.out) / ("model_" + std::string(to_string(mr)) + ".json"), to_json(model).dump(2) + "\n");
    } catch (const std::invalid_argument &e) {
      std::cerr << to_string(mr) << " skipped: " << e.what() << '\n';
      ++skipped;
    }
  }
  return skipped ? kPartial : kOk;
}

int cmd_evaluate(const Common &o) {
  auto c = o.config();
  auto samples = labelled_samples(load_dataset(o));
  if (samples.size() < static_cast<std::size_t>(c.k))
    throw UsageError("k = " + std::to_string(c.k) + " exceeds the " + std::to_string(samples.size()) +
                     " labelled methods");
  auto out = evaluate_samples(samples, c);
  for (const auto &d : out.diagnostics)
    std::cerr << "diagnostic: " << d << '\n';
  if (o.out.empty()) {
    std::cout << out.results_csv;
  } else {
    write_file(fs::path(o.out) / "report.json", out.report.dump(2) + "\n");
    write_file(fs::path(o.out) / "results.csv", out.results_csv);
  }
  return out.diagnostics.empty() ? kOk : kPartial;
}

int cmd_predict(const std::vector<std::string> &model_paths, const std::string &input, const std::string &function,
                const std::string &features) {
  std::vector<TrainedModel> models;
  for (const auto &p : model_paths) {
    std::ifstream in(p);
    if (!in)
      throw UsageError("cannot open model '" + p + "'");
    try {
      models.push_back(trained_model_from_json(nlohmann::json::parse(in)));
    } catch (const std::exception &e) {
      throw UsageError(p + ": " + e.what());
    }
  }
  for (const auto &m : models) {
    if (m.params_hash != models.front().params_hash)
      throw UsageError("models were trained with different settings (params hash " + m.params_hash + " vs " +
                       models.front().params_hash + ")");
    if (!features.empty()) {
      auto f = parse_featurization(features);
      if (!f)
        throw UsageError("unknown featurization '" + features + "'");
      if (config_from_json(m.config).features != *f)
        throw UsageError("model for " + std::string(to_string(m.mr)) + " uses " +
                         m.config.at("features").get<std::string>() + " features, not " + features);
    }
  }
  auto cfgs = load_any(input);
  const AnnotatedCfg *cfg = nullptr;
  for (const auto &g : cfgs)
    if (function.empty() || g.name == function) {
      cfg = &g;
      break;
    }
  if (!cfg)
    throw UsageError("no function '" + function + "' in '" + input + "'");

  std::map<MrId, Prediction> preds;
  for (const auto &m : models) {
    auto p = predict_method(m, *cfg);
    for (const auto &k : p.unknown_features)
      std::cerr << "warning: feature '" << k << "' unseen in training, treated as zero\n";
    preds[m.mr] = p;
  }
  std::ostringstream labels, decisions;
  labels << cfg->name;
  decisions << "decision";
  decisions.precision(17);
  for (auto mr : kAllMrs) {
    auto it = preds.find(mr);
    if (it == preds.end()) {
      labels << ",NA";
      decisions << ",NA";
    } else {
      labels << ',' << it->second.label;
      decisions << ',' << it->second.decision;
    }
  }
  std::cout << "method,ADD,MUL,PER,INC,EXC,INV\n" << labels.str() << '\n' << decisions.str() << '\n';
  return kOk;
}

int cmd_stats(const std::string &labels_path) {
  auto s = corpus_stats(load_labels_csv(labels_path));
  std::cout << "MR,match,no_match\n";
  for (auto mr : kAllMrs) {
    auto i = static_cast<std::size_t>(mr);
    std::cout << to_string(mr) << ',' << s.matches[i] << ',' << s.non_matches[i] << '\n';
  }
  std::cout << "matching_mrs,methods\n";
  for (std::size_t n = 0; n < s.histogram.size(); ++n)
    std::cout << n << ',' << s.histogram[n] << '\n';
  return kOk;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Predict metamorphic relations of numeric methods from their control-flow graphs"};
  app.require_subcommand(1);

  Common common;
  try {
    common.seed = default_seed();
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }

  std::vector<std::string> extract_inputs;
  std::string extract_out = ".";
  bool extract_omit = false;
  auto *extract = app.add_subcommand("extract", "Write .dot and feature CSVs for .mir/.dot inputs");
  extract->add_option("inputs", extract_inputs, "Input files");
  extract->add_option("--out", extract_out, "Output directory")->capture_default_str();
  extract->add_flag("--omit-exit-nf", extract_omit, "Drop the exit node from node features");

  auto *featurize = app.add_subcommand("featurize", "Design matrix (nf-pf) or Gram matrix (gk, rwk)");
  add_common(featurize, common, true);

  std::string report_path;
  auto *label = app.add_subcommand("label", "Label mini-IR methods by executing the six MRs");
  add_common(label, common, false);
  label->add_option("--trials", common.trials, "Trials per MR")->capture_default_str();
  label->add_option("--report", report_path, "Discrepancy report JSON");

  auto *train = app.add_subcommand("train", "Train one model per MR");
  add_common(train, common, true);

  auto *evaluate = app.add_subcommand("evaluate", "Stratified k-fold cross-validation");
  add_common(evaluate, common, true);
  evaluate->add_option("--k", common.k, "Folds")->capture_default_str();

  std::vector<std::string> model_paths;
  std::string predict_input, predict_function, predict_features;
  auto *predict_cmd = app.add_subcommand("predict", "Predict the MRs of a new method");
  predict_cmd->add_option("--model", model_paths, "Model JSON files")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("input", predict_input, ".mir or .dot file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--function", predict_function, "Function name inside a .mir file");
  predict_cmd->add_option("--features", predict_features, "Expected featurization");

  std::string stats_labels;
  auto *stats = app.add_subcommand("stats", "Per-MR counts and the matching-MR histogram");
  stats->add_option("--labels", stats_labels, "Labels CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*extract)
      return cmd_extract(extract_inputs, extract_out, extract_omit);
    if (*featurize)
      return cmd_featurize(common);
    if (*label)
      return cmd_label(common, report_path);
    if (*train)
      return cmd_train(common);
    if (*evaluate)
      return cmd_evaluate(common);
    if (*predict_cmd)
      return cmd_predict(model_paths, predict_input, predict_function, predict_features);
    if (*stats)
      return cmd_stats(stats_labels);
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kPartial;
  }
  return kUsage;
}
