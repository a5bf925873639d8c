#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "satkgc/kg.hpp"
#include "support/synth.hpp"

using namespace satkgc;
namespace ts = satkgc::testsupport;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "satkgc_kg_test";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
  const auto path = temp_dir() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("ingest counts entities, relations, and triples") {
  const auto path = write_file("tiny.tsv", "a\tr\tb\nb\tr\tc\na\ts\tc\n");
  const KnowledgeGraph kg = KnowledgeGraph::ingest(path);
  CHECK(kg.num_entities() == 3);
  CHECK(kg.num_forward_relations() == 2);
  CHECK(kg.num_total_relations() == 4);
  CHECK(kg.num_triples() == 3);
}

TEST_CASE("malformed lines and duplicates are rejected with line numbers") {
  const auto bad = write_file("bad.tsv", "a\tr\tb\nnot-a-triple\n");
  CHECK_THROWS_WITH_AS(KnowledgeGraph::ingest(bad),
                       doctest::Contains("line 2"), DataError);

  const auto dup = write_file("dup.tsv", "a\tr\tb\nb\tr\tc\na\tr\tb\n");
  CHECK_THROWS_WITH_AS(KnowledgeGraph::ingest(dup),
                       doctest::Contains("line 3"), DataError);
}

TEST_CASE("neighbors are sorted, duplicate-free, undirected") {
  const KnowledgeGraph path = ts::path_graph(3);
  const EntityId b = path.find_entity("e1");
  const auto nbrs = path.neighbors(b);
  REQUIRE(nbrs.size() == 2);
  CHECK(path.entity_name(nbrs[0]) == "e0");
  CHECK(path.entity_name(nbrs[1]) == "e2");

  const KnowledgeGraph star = ts::star_graph(5);
  CHECK(star.neighbors(star.find_entity("e0")).size() == 5);
  CHECK(star.degree(star.find_entity("e3")) == 1);

  CHECK_THROWS_AS(path.neighbors(99), DataError);
}

TEST_CASE("entities from the metadata file may be isolated") {
  const auto triples = write_file("meta_triples.tsv", "a\tr\tb\n");
  const auto meta = write_file("meta_entities.tsv",
                               "ghost\tGhost\tnever appears in triples\n"
                               "a\tA\tfirst\n");
  const KnowledgeGraph kg = KnowledgeGraph::ingest(triples, meta);
  const EntityId ghost = kg.find_entity("ghost");
  REQUIRE(ghost >= 0);
  CHECK(kg.neighbors(ghost).empty());
  CHECK(kg.num_isolated_entities() == 1);
  CHECK(kg.entity_description(ghost) == "never appears in triples");
  // Metadata order comes first in the id assignment.
  CHECK(ghost == 0);
}

TEST_CASE("frequency weight is ln(degree + 1)") {
  const KnowledgeGraph path = ts::path_graph(2);  // both endpoints degree 1
  CHECK(path.frequency_weight(0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const auto triples = write_file("fw.tsv", "a\tr\tb\n");
  const auto meta = write_file("fw_meta.tsv", "z\tZ\t\n");
  const KnowledgeGraph with_isolated = KnowledgeGraph::ingest(triples, meta);
  CHECK(with_isolated.frequency_weight(with_isolated.find_entity("z")) == 0.0);

  const KnowledgeGraph star = ts::star_graph(7);
  CHECK(star.frequency_weight(star.find_entity("e0")) ==
        doctest::Approx(std::log(8.0)).epsilon(1e-12));
}

TEST_CASE("degree sum equals twice the undirected edge count") {
  const KnowledgeGraph kg = ts::random_connected_graph(40, 60, 4, 7);
  std::int64_t degree_sum = 0;
  for (EntityId v = 0; v < kg.num_entities(); ++v) degree_sum += kg.degree(v);
  CHECK(degree_sum == 2 * kg.num_undirected_edges());
  CHECK(kg.average_degree() ==
        doctest::Approx(static_cast<double>(degree_sum) /
                        static_cast<double>(kg.num_entities())));
}

TEST_CASE("frequency weight is nondecreasing in degree") {
  const KnowledgeGraph kg = ts::random_connected_graph(30, 40, 3, 3);
  for (EntityId a = 0; a < kg.num_entities(); ++a) {
    for (EntityId b = 0; b < kg.num_entities(); ++b) {
      if (kg.degree(a) <= kg.degree(b)) {
        CHECK(kg.frequency_weight(a) <= kg.frequency_weight(b) + 1e-15);
      }
    }
  }
}

TEST_CASE("export then re-ingest reproduces the id assignment") {
  const KnowledgeGraph kg = ts::random_connected_graph(25, 30, 3, 11);
  const auto dir = (temp_dir() / "roundtrip").string();
  kg.export_to(dir);
  const KnowledgeGraph again =
      KnowledgeGraph::ingest(dir + "/triples.tsv", dir + "/entities.tsv");
  REQUIRE(again.num_entities() == kg.num_entities());
  REQUIRE(again.num_triples() == kg.num_triples());
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    CHECK(again.entity_name(e) == kg.entity_name(e));
  }
  for (TripleId t = 0; t < kg.num_triples(); ++t) {
    CHECK(again.triple(t) == kg.triple(t));
  }
  // Exporting the re-ingested graph yields identical bytes.
  const auto dir2 = (temp_dir() / "roundtrip2").string();
  again.export_to(dir2);
  for (const char* name : {"/triples.tsv", "/entities.tsv", "/relations.tsv"}) {
    std::ifstream a(dir + name, std::ios::binary);
    std::ifstream b(dir2 + name, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), {});
    const std::string sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
  }
}

TEST_CASE("triple index answers both directions") {
  const KnowledgeGraph kg = ts::graph_from({{"a", "r", "b"}, {"b", "s", "c"}});
  const TripleIndex index(kg);
  const EntityId a = kg.find_entity("a");
  const EntityId b = kg.find_entity("b");
  const EntityId c = kg.find_entity("c");
  const RelationId r = kg.find_relation("r");
  const RelationId s = kg.find_relation("s");
  CHECK(index.contains(a, r, b));
  CHECK(index.contains(b, kg.inverse(r), a));
  CHECK_FALSE(index.contains(a, r, c));
  CHECK_FALSE(index.contains(b, r, a));
  CHECK(index.tails(b, s).size() == 1);
  CHECK(index.tails(c, kg.inverse(s)).size() == 1);
}

// Corpus statistics from the standard splits, exercised only when a dataset
// directory is supplied via the environment.
TEST_CASE("standard benchmark statistics" *
          doctest::skip(std::getenv("SATKGC_WN18RR_DIR") == nullptr &&
                        std::getenv("SATKGC_FB15K237_DIR") == nullptr)) {
  if (const char* dir = std::getenv("SATKGC_WN18RR_DIR")) {
    const KnowledgeGraph kg =
        KnowledgeGraph::ingest(std::string(dir) + "/train.txt");
    CHECK(kg.num_entities() == 40943);
    CHECK(kg.num_forward_relations() == 11);
    CHECK(kg.num_triples() == 86835);
  }
  if (const char* dir = std::getenv("SATKGC_FB15K237_DIR")) {
    const KnowledgeGraph kg =
        KnowledgeGraph::ingest(std::string(dir) + "/train.txt");
    CHECK(kg.num_entities() == 14541);
    CHECK(kg.num_forward_relations() == 237);
    CHECK(kg.num_triples() == 272115);
  }
}
