#include "mrkit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mrkit/dot.hpp"

namespace fs = std::filesystem;

namespace mrkit {

std::string_view to_string(SourceKind k) {
  switch (k) {
  case SourceKind::Mir: return "mir";
  case SourceKind::Dot: return "dot";
  case SourceKind::None: return "none";
  }
  return "?";
}

const DatasetEntry *Dataset::find(const std::string &id) const {
  for (const auto &e : entries)
    if (e.id == id)
      return &e;
  return nullptr;
}

namespace {

bool all_digits(const std::string &s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::string read_text(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CorpusError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string &line, std::size_t max_fields = 0) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    if (max_fields && out.size() + 1 == max_fields) {
      out.push_back(line.substr(start));
      break;
    }
    auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

// Non-empty lines with CR stripped, paired with 1-based line numbers.
std::vector<std::pair<int, std::string>> lines_of(std::string_view text) {
  std::vector<std::pair<int, std::string>> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (!line.empty())
      out.emplace_back(no, line);
  }
  return out;
}

} // namespace

bool id_less(const std::string &a, const std::string &b) {
  bool na = all_digits(a), nb = all_digits(b);
  if (na != nb)
    return na;
  if (na) {
    auto ta = a.substr(std::min(a.find_first_not_of('0'), a.size() - 1));
    auto tb = b.substr(std::min(b.find_first_not_of('0'), b.size() - 1));
    if (ta.size() != tb.size())
      return ta.size() < tb.size();
    if (ta != tb)
      return ta < tb;
  }
  return a < b;
}

LabelTable make_label_table() { return LabelTable(&id_less); }

LabelTable parse_labels_csv(std::string_view text) {
  auto lines = lines_of(text);
  if (lines.empty() || lines.front().second != "method_id,ADD,MUL,PER,INC,EXC,INV")
    throw CorpusError("labels CSV must start with header 'method_id,ADD,MUL,PER,INC,EXC,INV'");
  auto table = make_label_table();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto &[no, line] = lines[i];
    auto cells = split(line);
    auto where = "labels CSV line " + std::to_string(no) + ": ";
    if (cells.size() != 7)
      throw CorpusError(where + "expected 7 cells, found " + std::to_string(cells.size()));
    if (cells[0].empty())
      throw CorpusError(where + "empty method id");
    MrLabelSet s;
    for (std::size_t k = 0; k < 6; ++k) {
      if (cells[k + 1] != "0" && cells[k + 1] != "1")
        throw CorpusError(where + "cell '" + cells[k + 1] + "' is not 0 or 1");
      s.bits[k] = cells[k + 1] == "1";
    }
    if (!table.emplace(cells[0], s).second)
      throw CorpusError(where + "duplicate method id '" + cells[0] + "'");
  }
  return table;
}

LabelTable load_labels_csv(const std::string &path) {
  try {
    return parse_labels_csv(read_text(path));
  } catch (const CorpusError &e) {
    throw CorpusError(path + ": " + e.what());
  }
}

std::string emit_labels_csv(const LabelTable &labels) {
  std::string out = "method_id,ADD,MUL,PER,INC,EXC,INV\n";
  for (const auto &[id, s] : labels) {
    out += id;
    for (bool b : s.bits)
      out += b ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

Dataset load_manifest(const std::string &path, const std::string &labels_path) {
  auto lines = lines_of(read_text(path));
  if (lines.empty() || lines.front().second != "id,name,source_kind,source_path")
    throw CorpusError(path + ": manifest must start with header 'id,name,source_kind,source_path'");
  const fs::path base = fs::path(path).parent_path();
  std::optional<LabelTable> labels;
  if (!labels_path.empty())
    labels = load_labels_csv(labels_path);

  Dataset ds;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto &[no, line] = lines[i];
    auto where = path + ":" + std::to_string(no) + ": ";
    auto cells = split(line);
    if (cells.size() != 4)
      throw CorpusError(where + "expected 4 cells, found " + std::to_string(cells.size()));
    DatasetEntry e;
    e.id = cells[0];
    e.name = cells[1];
    if (e.id.empty())
      throw CorpusError(where + "empty id");
    if (!seen.insert(e.id).second)
      throw CorpusError(where + "duplicate id '" + e.id + "'");
    if (cells[2] == "mir")
      e.kind = SourceKind::Mir;
    else if (cells[2] == "dot")
      e.kind = SourceKind::Dot;
    else if (cells[2] == "none")
      e.kind = SourceKind::None;
    else
      throw CorpusError(where + "unknown source_kind '" + cells[2] + "'");
    if (e.kind != SourceKind::None) {
      if (cells[3].empty())
        throw CorpusError(where + "missing source path");
      auto p = base / cells[3];
      if (!fs::exists(p))
        throw CorpusError(where + "source file '" + p.string() + "' does not exist");
      e.source_path = p.string();
    }
    if (labels) {
      auto it = labels->find(e.id);
      if (it != labels->end())
        e.labels = it->second;
    }
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

mir::Function load_function(const DatasetEntry &entry) {
  if (entry.kind != SourceKind::Mir)
    throw CorpusError("method '" + entry.id + "' has no mini-IR source");
  auto prog = mir::read_program_file(entry.source_path);
  if (const auto *fn = prog.find(entry.name))
    return *fn;
  if (prog.functions.size() == 1)
    return prog.functions.front();
  throw CorpusError(entry.source_path + ": no function named '" + entry.name + "'");
}

AnnotatedCfg load_cfg(const DatasetEntry &entry) {
  switch (entry.kind) {
  case SourceKind::Mir: return mir::lower_to_cfg(load_function(entry));
  case SourceKind::Dot: return read_dot_file(entry.source_path);
  case SourceKind::None: break;
  }
  throw CorpusError("method '" + entry.id + "' is labels-only");
}

namespace {

void tally(CorpusStats &s, const MrLabelSet &l) {
  ++s.total;
  for (std::size_t k = 0; k < 6; ++k)
    (l.bits[k] ? s.matches[k] : s.non_matches[k])++;
  ++s.histogram[static_cast<std::size_t>(l.count())];
}

} // namespace

CorpusStats corpus_stats(const Dataset &ds) {
  CorpusStats s;
  for (const auto &e : ds.entries) {
    if (!e.labels)
      throw CorpusError("method '" + e.id + "' has no labels");
    tally(s, *e.labels);
  }
  return s;
}

CorpusStats corpus_stats(const LabelTable &labels) {
  CorpusStats s;
  for (const auto &[id, l] : labels)
    tally(s, l);
  return s;
}

std::vector<Anomaly> load_anomalies(const std::string &path) {
  auto lines = lines_of(read_text(path));
  if (lines.empty() || lines.front().second != "method_id,mr,reason")
    throw CorpusError(path + ": anomaly register must start with header 'method_id,mr,reason'");
  std::vector<Anomaly> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto &[no, line] = lines[i];
    auto cells = split(line, 3);
    auto where = path + ":" + std::to_string(no) + ": ";
    if (cells.size() != 3)
      throw CorpusError(where + "expected method_id,mr,reason");
    auto mr = parse_mr(cells[1]);
    if (!mr)
      throw CorpusError(where + "unknown MR '" + cells[1] + "'");
    out.push_back({cells[0], *mr, cells[2]});
  }
  return out;
}

bool is_anomalous(const std::vector<Anomaly> &register_, const std::string &method_id) {
  return std::any_of(register_.begin(), register_.end(),
                     [&](const Anomaly &a) { return a.method_id == method_id; });
}

} // namespace mrkit
