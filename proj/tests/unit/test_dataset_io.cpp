#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "featprop/dataset_io.hpp"

using namespace featprop;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "featprop_io_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("content-cites loading") {
  const auto dir = scratch("cc");
  write(dir / "toy.content",
        "p10\t1\t0\t1\tNeural\n"
        "p7\t0\t0\t1\tTheory\n"
        "p3\t1\t1\t0\tNeural\n"
        "p4\t0\t1\t0\tRules\n");
  write(dir / "toy.cites", "p10\tp7\np7\tp10\np3\tp10\np4\tp3\np4\tp3\n");

  SUBCASE("prefix, file or directory all resolve") {
    for (const auto& path : {dir / "toy", dir / "toy.content", dir / "toy.cites", dir}) {
      const Dataset ds = load_dataset(path, DatasetFormat::content_cites, {false});
      CHECK(ds.name == "toy");
      CHECK(ds.num_nodes() == 4);
    }
  }

  const Dataset ds = load_dataset(dir / "toy", DatasetFormat::content_cites, {false});
  CHECK(ds.graph.num_edges() == 3);
  CHECK(ds.graph.has_edge(0, 1));
  CHECK(ds.graph.has_edge(2, 0));
  CHECK(ds.graph.has_edge(3, 2));
  CHECK(ds.labels.values() == std::vector<int>{0, 1, 0, 2});
  CHECK(ds.labels.n_classes() == 3);
  CHECK(ds.class_names == std::vector<std::string>{"Neural", "Theory", "Rules"});
  CHECK(ds.features.cols() == 3);
  CHECK(ds.features.values()(0, 2) == 1.0);

  SUBCASE("row normalization by default") {
    const Dataset norm = load_dataset(dir / "toy", DatasetFormat::content_cites);
    CHECK(norm.features.values()(0, 0) == doctest::Approx(0.5));
    CHECK(norm.features.values()(1, 2) == 1.0);
  }
}

TEST_CASE("content-cites errors") {
  const auto dir = scratch("cc_err");
  SUBCASE("edge to an undeclared node") {
    write(dir / "a.content", "a\t1\tX\n");
    write(dir / "a.cites", "a\tb\n");
    CHECK_THROWS_AS(load_dataset(dir / "a", DatasetFormat::content_cites), IntegrityError);
    LoadOptions lenient;
    lenient.drop_unknown_edges = true;
    const Dataset ds = load_dataset(dir / "a", DatasetFormat::content_cites, lenient);
    CHECK(ds.graph.num_edges() == 0);
  }
  SUBCASE("duplicate node id") {
    write(dir / "a.content", "a\t1\tX\na\t0\tY\n");
    write(dir / "a.cites", "");
    CHECK_THROWS_AS(load_dataset(dir / "a", DatasetFormat::content_cites), IntegrityError);
  }
  SUBCASE("malformed line reports its line number") {
    write(dir / "a.content", "a\t1\t0\tX\nb\t1\tzz\tY\n");
    write(dir / "a.cites", "");
    try {
      load_dataset(dir / "a", DatasetFormat::content_cites);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }
  SUBCASE("ragged feature width") {
    write(dir / "a.content", "a\t1\t0\tX\nb\t1\tY\n");
    write(dir / "a.cites", "");
    CHECK_THROWS_AS(load_dataset(dir / "a", DatasetFormat::content_cites), ParseError);
  }
  SUBCASE("cites line with three fields") {
    write(dir / "a.content", "a\t1\tX\nb\t1\tY\n");
    write(dir / "a.cites", "a\tb\n\na\tb\tc\n");
    try {
      load_dataset(dir / "a", DatasetFormat::content_cites);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
}

TEST_CASE("json loading") {
  const auto dir = scratch("json");
  SUBCASE("single node, no edges") {
    write(dir / "one.json", R"({"edges": [], "features": [[0.5, 0.5]], "labels": [3]})");
    const Dataset ds = load_dataset(dir / "one.json", DatasetFormat::json);
    CHECK(ds.num_nodes() == 1);
    CHECK(ds.graph.num_edges() == 0);
    CHECK(ds.graph.row_offsets().back() == 0);
    CHECK(ds.labels.values() == std::vector<int>{0});
  }
  SUBCASE("undeclared node index") {
    write(dir / "bad.json", R"({"edges": [[0, 2]], "features": [[1], [1]], "labels": [0, 1]})");
    CHECK_THROWS_AS(load_dataset(dir / "bad.json", DatasetFormat::json), IntegrityError);
  }
  SUBCASE("syntax error carries a line number") {
    write(dir / "syntax.json", "{\n\"edges\": [],\n\"features\": [[1]],,\n\"labels\": [0]}\n");
    try {
      load_dataset(dir / "syntax.json", DatasetFormat::json);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }
  SUBCASE("missing key") {
    write(dir / "nokey.json", R"({"edges": [], "features": [[1]]})");
    CHECK_THROWS_AS(load_dataset(dir / "nokey.json", DatasetFormat::json), ParseError);
  }
}

TEST_CASE("load, save as json, reload is idempotent") {
  const auto dir = scratch("roundtrip");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Dataset original = generate_sbm({{7, 9, 5}, 0.4, 0.1, 0.7, seed});
    save_json(original, dir / "a.json");
    const Dataset first = load_dataset(dir / "a.json", DatasetFormat::json);
    save_json(first, dir / "b.json");
    const Dataset second = load_dataset(dir / "b.json", DatasetFormat::json);
    CHECK(first == second);
    CHECK(first.graph == original.graph);
    CHECK(first.labels == original.labels);

    const Dataset raw = load_dataset(dir / "a.json", DatasetFormat::json, {false});
    CHECK(raw == original);
  }
}

TEST_CASE("format names") {
  CHECK(parse_dataset_format("content-cites") == DatasetFormat::content_cites);
  CHECK(parse_dataset_format("json") == DatasetFormat::json);
  CHECK_FALSE(parse_dataset_format("csv").has_value());
}
