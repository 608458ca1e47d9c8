// Dataset manifest, reference labels, anomaly register and corpus statistics.
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrkit/cfg.hpp"
#include "mrkit/mir.hpp"
#include "mrkit/oracle.hpp"

namespace mrkit {

enum class SourceKind { Mir, Dot, None };

std::string_view to_string(SourceKind k);

struct DatasetEntry {
  std::string id;
  std::string name;
  SourceKind kind = SourceKind::None;
  std::string source_path;  // resolved against the manifest directory
  std::optional<MrLabelSet> labels;
};

struct Dataset {
  std::vector<DatasetEntry> entries;
  const DatasetEntry *find(const std::string &id) const;
};

class CorpusError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Orders ids numerically when both are digit strings, else lexically;
/// numeric ids sort first.
bool id_less(const std::string &a, const std::string &b);

using LabelTable = std::map<std::string, MrLabelSet, decltype(&id_less)>;
LabelTable make_label_table();

/// Header `method_id,ADD,MUL,PER,INC,EXC,INV`, 0/1 cells.
LabelTable parse_labels_csv(std::string_view text);
LabelTable load_labels_csv(const std::string &path);
std::string emit_labels_csv(const LabelTable &labels);

/// Manifest header `id,name,source_kind,source_path`; source_kind is one of
/// mir, dot, none. Labels are joined by id when labels_path is non-empty.
Dataset load_manifest(const std::string &path, const std::string &labels_path = {});

/// Function named entry.name from a mir entry (the file's only function when
/// no name matches).
mir::Function load_function(const DatasetEntry &entry);
AnnotatedCfg load_cfg(const DatasetEntry &entry);

struct CorpusStats {
  std::size_t total = 0;
  std::array<int, 6> matches{}, non_matches{};
  std::array<int, 7> histogram{};  // methods by number of matching MRs
};

/// Throws CorpusError naming the first unlabelled entry.
CorpusStats corpus_stats(const Dataset &ds);
CorpusStats corpus_stats(const LabelTable &labels);

struct Anomaly {
  std::string method_id;
  MrId mr = MrId::ADD;
  std::string reason;
};

/// Header `method_id,mr,reason`; the reason may contain commas.
std::vector<Anomaly> load_anomalies(const std::string &path);
bool is_anomalous(const std::vector<Anomaly> &register_, const std::string &method_id);

} // namespace mrkit
