#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "mrkit/corpus.hpp"

using namespace mrkit;
namespace fs = std::filesystem;

namespace {

const std::string kData = MRKIT_DATA_DIR;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("mrkit_test_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string write(const std::string &name, const std::string &text) const {
    std::ofstream(path / name) << text;
    return (path / name).string();
  }
};

} // namespace

TEST_CASE("id ordering") {
  CHECK(id_less("2", "10"));
  CHECK(!id_less("10", "2"));
  CHECK(id_less("99", "abc"));
  CHECK(id_less("abc", "abd"));
  CHECK(!id_less("7", "07"));
  CHECK(id_less("07", "7"));
}

TEST_CASE("labels CSV parsing") {
  auto t = parse_labels_csv("method_id,ADD,MUL,PER,INC,EXC,INV\n10,0,0,0,0,0,1\n2,1,1,1,1,1,1\n");
  REQUIRE(t.size() == 2);
  CHECK(t.begin()->first == "2");
  CHECK(t.at("10")[MrId::INV]);
  CHECK(emit_labels_csv(t) == "method_id,ADD,MUL,PER,INC,EXC,INV\n2,1,1,1,1,1,1\n10,0,0,0,0,0,1\n");
  CHECK_THROWS_AS(parse_labels_csv("id,ADD\n"), CorpusError);
  CHECK_THROWS_AS(parse_labels_csv("method_id,ADD,MUL,PER,INC,EXC,INV\n1,1,1,1,1,1\n"), CorpusError);
  CHECK_THROWS_AS(parse_labels_csv("method_id,ADD,MUL,PER,INC,EXC,INV\n1,1,1,1,1,1,2\n"), CorpusError);
  CHECK_THROWS_AS(parse_labels_csv("method_id,ADD,MUL,PER,INC,EXC,INV\n1,1,1,1,1,1,1\n1,0,0,0,0,0,0\n"),
                  CorpusError);
  try {
    parse_labels_csv("method_id,ADD,MUL,PER,INC,EXC,INV\n1,1,1,1,1,1,x\n");
  } catch (const CorpusError &e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("bundled labels reproduce the dataset statistics") {
  auto labels = load_labels_csv(kData + "/labels.csv");
  CHECK(labels.size() == 100);
  auto s = corpus_stats(labels);
  CHECK(s.matches == std::array<int, 6>{56, 66, 33, 34, 32, 63});
  CHECK(s.non_matches == std::array<int, 6>{44, 34, 67, 66, 68, 37});
  CHECK(s.histogram == std::array<int, 7>{20, 8, 7, 23, 26, 7, 9});
  CHECK(labels.at("90") == MrLabelSet{{1, 1, 1, 1, 1, 1}});
  CHECK(labels.at("5") == MrLabelSet{{1, 1, 1, 0, 0, 1}});
}

TEST_CASE("bundled manifest") {
  auto ds = load_manifest(kData + "/manifest.csv", kData + "/labels.csv");
  CHECK(ds.entries.size() == 100);
  const auto *avg = ds.find("5");
  REQUIRE(avg != nullptr);
  CHECK(avg->name == "average");
  CHECK(avg->kind == SourceKind::Mir);
  CHECK(avg->labels.has_value());
  CHECK(load_cfg(*avg).nodes.size() == 14);
  auto s = corpus_stats(ds);
  CHECK(s.histogram == std::array<int, 7>{20, 8, 7, 23, 26, 7, 9});
  int with_source = 0;
  for (const auto &e : ds.entries)
    with_source += e.kind != SourceKind::None;
  CHECK(with_source >= 50);
  CHECK_THROWS_AS(corpus_stats(load_manifest(kData + "/manifest.csv")), CorpusError);
}

TEST_CASE("manifest errors") {
  TempDir dir;
  dir.write("a.mir", "fn a(x) {\n  return 0\n}\n");
  dir.write("b.dot", "digraph b { s [label=\"start\"]; e [label=\"exit\"]; s -> e; }");
  auto ok = dir.write("ok.csv", "id,name,source_kind,source_path\n1,a,mir,a.mir\n2,b,dot,b.dot\n3,c,none,\n");
  auto ds = load_manifest(ok);
  REQUIRE(ds.entries.size() == 3);
  CHECK(load_cfg(ds.entries[0]).nodes.size() == 3);
  CHECK(load_cfg(ds.entries[1]).nodes.size() == 2);
  CHECK_THROWS_AS(load_cfg(ds.entries[2]), CorpusError);
  CHECK_THROWS_AS(load_function(ds.entries[1]), CorpusError);

  CHECK_THROWS_AS(load_manifest(dir.write("h.csv", "id,name,kind\n")), CorpusError);
  CHECK_THROWS_AS(load_manifest(dir.write("m.csv", "id,name,source_kind,source_path\n1,a,mir,missing.mir\n")),
                  CorpusError);
  CHECK_THROWS_AS(load_manifest(dir.write("d.csv", "id,name,source_kind,source_path\n1,a,mir,a.mir\n1,a,mir,a.mir\n")),
                  CorpusError);
  CHECK_THROWS_AS(load_manifest(dir.write("k.csv", "id,name,source_kind,source_path\n1,a,java,a.mir\n")),
                  CorpusError);
  try {
    load_manifest(dir.write("k2.csv", "id,name,source_kind,source_path\n1,a,mir,a.mir\n2,b,java,b.dot\n"));
  } catch (const CorpusError &e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
}

TEST_CASE("anomaly register") {
  TempDir dir;
  auto path = dir.write("an.csv", "method_id,mr,reason\n17,MUL,zero count, scaled\n");
  auto an = load_anomalies(path);
  REQUIRE(an.size() == 1);
  CHECK(an[0].mr == MrId::MUL);
  CHECK(an[0].reason == "zero count, scaled");
  CHECK(is_anomalous(an, "17"));
  CHECK(!is_anomalous(an, "18"));
  CHECK_THROWS_AS(load_anomalies(dir.write("bad.csv", "method_id,mr,reason\n1,FOO,x\n")), CorpusError);

  auto bundled = load_anomalies(kData + "/anomalies.csv");
  CHECK(!bundled.empty());
}
