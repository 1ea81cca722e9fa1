#include "doctest.h"

#include "sheafq/dataset.hpp"
#include "sheafq/harmonic.hpp"
#include "sheafq/random.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace sheafq;
namespace fs = std::filesystem;

namespace {

const fs::path kTexas = fs::path(SHEAFQ_FIXTURES) / "texas_like";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sheafq_test_dataset_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& file, const std::string& text) { std::ofstream(file) << text; }

// Three nodes on a path, two classes, one split.
fs::path tiny_dataset(const std::string& name) {
  const fs::path dir = scratch(name);
  write(dir / "edges.tsv", "0\t1\n1\t2\n");
  write(dir / "features.csv", "1,0\n0,1\n1,1\n");
  write(dir / "labels.csv", "0\n1\n0\n");
  write(dir / "splits.json", R"({"splits": [{"train": [0], "val": [1], "test": [2]}]})");
  return dir;
}

std::string parse_message(const fs::path& dir) {
  try {
    load_dataset(dir);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("load_dataset on a tiny directory") {
  const auto data = load_dataset(tiny_dataset("ok"));
  CHECK(data.num_nodes() == 3);
  CHECK(data.graph.num_edges() == 2);
  CHECK(data.features.cols() == 2);
  CHECK(data.num_classes == 2);
  REQUIRE(data.splits.size() == 1);
  CHECK(data.splits[0].test == std::vector<Index>{2});
  CHECK(edge_homophily(data.graph, data.labels) == 0.0);
}

TEST_CASE("parse errors name file and line") {
  SUBCASE("malformed feature value") {
    const auto dir = tiny_dataset("badfeat");
    write(dir / "features.csv", "1,0\n0,1\n1,x\n");
    CHECK(parse_message(dir).find("features.csv:3") != std::string::npos);
  }
  SUBCASE("ragged feature row") {
    const auto dir = tiny_dataset("ragged");
    write(dir / "features.csv", "1,0\n0\n1,1\n");
    CHECK(parse_message(dir).find("features.csv:2") != std::string::npos);
  }
  SUBCASE("dangling edge endpoint") {
    const auto dir = tiny_dataset("dangling");
    write(dir / "edges.tsv", "0\t1\n1\t7\n");
    const auto msg = parse_message(dir);
    CHECK(msg.find("edges.tsv:2") != std::string::npos);
    CHECK(msg.find("'7'") != std::string::npos);
  }
  SUBCASE("self-loop") {
    const auto dir = tiny_dataset("loop");
    write(dir / "edges.tsv", "0\t1\n2\t2\n");
    CHECK(parse_message(dir).find("edges.tsv:2") != std::string::npos);
  }
  SUBCASE("non-integer label") {
    const auto dir = tiny_dataset("badlabel");
    write(dir / "labels.csv", "0\nb\n0\n");
    CHECK(parse_message(dir).find("labels.csv:2") != std::string::npos);
  }
  SUBCASE("label out of range for the declared class count") {
    const auto dir = tiny_dataset("range");
    write(dir / "labels.csv", "0\n1\n4\n");
    write(dir / "meta.json", R"({"num_classes": 3})");
    CHECK(parse_message(dir).find("labels.csv:3") != std::string::npos);
  }
  SUBCASE("wrong label count") {
    const auto dir = tiny_dataset("count");
    write(dir / "labels.csv", "0\n1\n");
    CHECK(parse_message(dir).find("labels.csv") != std::string::npos);
  }
  SUBCASE("overlapping masks") {
    const auto dir = tiny_dataset("overlap");
    write(dir / "splits.json", R"({"splits": [{"train": [0, 1], "val": [1], "test": [2]}]})");
    CHECK(parse_message(dir).find("more than one mask") != std::string::npos);
  }
  SUBCASE("missing graph") {
    const auto dir = tiny_dataset("nograph");
    fs::remove(dir / "edges.tsv");
    CHECK(!parse_message(dir).empty());
  }
}

TEST_CASE("Texas-like fixture has the published counts") {
  const auto data = load_dataset(kTexas);
  CHECK(data.num_nodes() == 183);
  CHECK(data.graph.num_edges() == 325);
  CHECK(data.features.cols() == 1703);
  CHECK(data.num_classes == 5);
  CHECK(data.splits.size() == 10);

  // Homophily against a brute-force count over the raw edge file.
  std::vector<Index> labels;
  {
    std::ifstream in(kTexas / "labels.csv");
    for (Index y; in >> y;) labels.push_back(y);
  }
  std::ifstream in(kTexas / "edges.tsv");
  Index same = 0, total = 0;
  for (Index u, v; in >> u >> v; ++total) same += labels[static_cast<std::size_t>(u)] == labels[static_cast<std::size_t>(v)];
  CHECK(total == 325);
  CHECK(summarize(data).homophily == doctest::Approx(double(same) / double(total)).epsilon(1e-15));
  CHECK(summarize(data).homophily < 0.15);
}

TEST_CASE("homophily matches brute force on random labelings") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = random_connected_graph(12, 0.3, rng);
    std::vector<Index> labels;
    std::uniform_int_distribution<Index> pick(0, 2);
    for (Index v = 0; v < 12; ++v) labels.push_back(pick(rng));
    Index same = 0, total = 0;
    for (Index a = 0; a < 12; ++a)
      for (Index b = a + 1; b < 12; ++b)
        if (g.find_edge(a, b)) {
          ++total;
          same += labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(b)];
        }
    CHECK(edge_homophily(g, labels) == doctest::Approx(double(same) / double(total)));
  }
}

TEST_CASE("write then load reproduces the bundle") {
  auto synth = generate_two_block(6, 0.5, 0.5, 9, {.num_splits = 2});
  const fs::path dir = scratch("roundtrip");
  write_dataset(synth.bundle, dir);
  const auto back = load_dataset(dir);
  CHECK(back.graph == synth.bundle.graph);
  CHECK(back.features == synth.bundle.features);
  CHECK(back.labels == synth.bundle.labels);
  CHECK(back.num_classes == 2);
  REQUIRE(back.splits.size() == 2);
  CHECK(back.splits[1].val == synth.bundle.splits[1].val);
}

TEST_CASE("random splits are 48/32/20 within one node") {
  for (Index n : {10, 37, 60, 183, 251}) {
    const auto splits = random_splits(n, 4, 5);
    REQUIRE(splits.size() == 4);
    for (const auto& sp : splits) {
      CHECK(std::abs(double(sp.train.size()) - 0.48 * n) <= 1.0);
      CHECK(std::abs(double(sp.val.size()) - 0.32 * n) <= 1.0);
      CHECK(std::abs(double(sp.test.size()) - 0.20 * n) <= 1.0);
      std::set<Index> all(sp.train.begin(), sp.train.end());
      all.insert(sp.val.begin(), sp.val.end());
      all.insert(sp.test.begin(), sp.test.end());
      CHECK(all.size() == static_cast<std::size_t>(n));
    }
    CHECK(splits[0].train != splits[1].train);
  }
  CHECK(random_splits(50, 2, 1)[1].test == random_splits(50, 2, 1)[1].test);
  CHECK_THROWS_AS(random_splits(2, 1, 0), StructuralError);
}

TEST_CASE("two-block generator") {
  SUBCASE("manifest agrees with the bundle and with a loaded copy") {
    const auto synth = generate_two_block(30, 0.1, 0.3, 0);
    const auto& m = synth.manifest;
    CHECK(m.nodes == 60);
    CHECK(m.intra_edges + m.inter_edges == m.edges);
    CHECK(m.homophily == doctest::Approx(double(m.intra_edges) / double(m.edges)));
    CHECK(m.homophily < 0.5);
    CHECK(m.feature_noise == 0.5);
    CHECK(synth.bundle.graph.is_connected());
    const fs::path dir = scratch("manifest");
    write_dataset(synth.bundle, dir);
    const auto s = summarize(load_dataset(dir));
    CHECK(s.nodes == m.nodes);
    CHECK(s.edges == m.edges);
    CHECK(s.features == m.features);
    CHECK(s.classes == m.classes);
  }
  SUBCASE("class indicator columns and distractors") {
    const auto synth = generate_two_block(10, 0.5, 0.5, 1, {.distractors = 3, .feature_noise = 0.0});
    const auto& b = synth.bundle;
    CHECK(b.features.cols() == 5);
    for (Index v = 0; v < 20; ++v) {
      CHECK(b.features(v, b.labels[static_cast<std::size_t>(v)]) == 1.0);
      CHECK(b.features(v, 1 - b.labels[static_cast<std::size_t>(v)]) == 0.0);
    }
  }
  SUBCASE("deterministic in the seed") {
    const auto a = generate_two_block(8, 0.4, 0.4, 17), b = generate_two_block(8, 0.4, 0.4, 17);
    CHECK(a.bundle.graph == b.bundle.graph);
    CHECK(a.bundle.features == b.bundle.features);
  }
  SUBCASE("p_inter = 0 gives two components and h = 2 for the planted sheaf") {
    const auto synth = generate_two_block(10, 0.6, 0.0, 4, {.require_connected = false});
    const auto& g = synth.bundle.graph;
    CHECK(synth.manifest.inter_edges == 0);
    if (g.num_components() == 2) CHECK(kernel_basis(planted_signed_sheaf(g, synth.bundle.labels)).dimension() == 2);
    // The component count decides h for any sample.
    CHECK(kernel_basis(planted_signed_sheaf(g, synth.bundle.labels)).dimension() == g.num_components());
  }
  SUBCASE("planted signed sheaf carries the community indicator") {
    const auto synth = generate_two_block(30, 0.1, 0.3, 2);
    const auto& b = synth.bundle;
    const auto s = planted_signed_sheaf(b.graph, b.labels);
    VectorXd x(60);
    for (Index v = 0; v < 60; ++v) x(v) = b.labels[static_cast<std::size_t>(v)] == 0 ? 1.0 : -1.0;
    CHECK(apply_laplacian(s, x).norm() <= 1e-8);
    const auto h = kernel_basis(s);
    CHECK(h.dimension() == 1);
    CHECK(max_principal_angle(h.basis, MatrixXd(x.normalized())) <= 1e-8);
  }
  SUBCASE("unreachable connectivity is an error") {
    CHECK_THROWS_AS(generate_two_block(10, 0.0, 0.0, 0), NumericError);
    CHECK_THROWS_AS(generate_two_block(3, 0.5, 0.5, 0), StructuralError);
    CHECK_THROWS_AS(generate_two_block(10, 1.5, 0.5, 0), StructuralError);
  }
}

TEST_CASE("bundle validation") {
  auto b = generate_two_block(5, 0.8, 0.8, 0).bundle;
  b.labels[0] = 7;
  CHECK_THROWS_AS(b.validate(), StructuralError);
  b = generate_two_block(5, 0.8, 0.8, 0).bundle;
  b.splits[0].val.push_back(b.splits[0].train.front());
  CHECK_THROWS_AS(b.validate(), StructuralError);
  b = generate_two_block(5, 0.8, 0.8, 0).bundle;
  b.features.conservativeResize(9, Eigen::NoChange);
  CHECK_THROWS_AS(b.validate(), StructuralError);
}
