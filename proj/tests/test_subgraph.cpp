#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "satkgc/graph_algos.hpp"
#include "satkgc/subgraph.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace satkgc;
namespace ts = satkgc::testsupport;

namespace {

TripleId find_triple(const KnowledgeGraph& kg, const std::string& h,
                     const std::string& r, const std::string& t) {
  for (TripleId i = 0; i < kg.num_triples(); ++i) {
    const Triple& tr = kg.triple(i);
    if (kg.entity_name(tr.head) == h && kg.relation_name(tr.rel) == r &&
        kg.entity_name(tr.tail) == t) {
      return i;
    }
  }
  REQUIRE(false);
  return -1;
}

}  // namespace

TEST_CASE("start entity follows the inverse degree distribution") {
  // h = hub with 3 neighbors, t = leaf with 1.
  const KnowledgeGraph kg = ts::star_graph(3);
  const Triple center = kg.triple(0);  // (e0, r0, e1)
  REQUIRE(kg.degree(center.head) == 3);
  REQUIRE(kg.degree(center.tail) == 1);

  Rng rng(42);
  int tail_starts = 0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    if (select_start_entity(kg, center, rng) == center.tail) ++tail_starts;
  }
  const double p_tail = static_cast<double>(tail_starts) / draws;
  CHECK(p_tail == doctest::Approx(0.75).epsilon(0.015));

  // Equal degrees split evenly.
  const KnowledgeGraph path = ts::path_graph(4);
  const TripleId mid = find_triple(path, "e1", "r0", "e2");
  Rng rng2(7);
  int head_starts = 0;
  for (int i = 0; i < draws; ++i) {
    if (select_start_entity(path, path.triple(mid), rng2) ==
        path.triple(mid).head) {
      ++head_starts;
    }
  }
  CHECK(static_cast<double>(head_starts) / draws ==
        doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("neighbor distribution across modes") {
  // u adjacent to v1 (degree 1) and v2 (degree 2).
  const KnowledgeGraph kg =
      ts::graph_from({{"u", "r", "v1"}, {"u", "r", "v2"}, {"v2", "r", "w"}});
  const EntityId u = kg.find_entity("u");
  const auto nbrs = kg.neighbors(u);
  REQUIRE(nbrs.size() == 2);

  const auto inv = neighbor_distribution(kg, u, NeighborMode::kInverseDegree);
  const std::size_t v1_pos = kg.entity_name(nbrs[0]) == "v1" ? 0 : 1;
  CHECK(inv[v1_pos] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(inv[1 - v1_pos] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const KnowledgeGraph star = ts::star_graph(4);
  const auto uni =
      neighbor_distribution(star, star.find_entity("e0"), NeighborMode::kUniform);
  for (const double p : uni) CHECK(p == doctest::Approx(0.25).epsilon(1e-12));

  // Degrees {1, 3} proportional -> {0.25, 0.75}.
  const KnowledgeGraph kg2 = ts::graph_from(
      {{"u", "r", "v1"}, {"u", "r", "v2"}, {"v2", "r", "a"}, {"v2", "r", "b"}});
  const auto prop = neighbor_distribution(kg2, kg2.find_entity("u"),
                                          NeighborMode::kDegreeProportional);
  const auto nbrs2 = kg2.neighbors(kg2.find_entity("u"));
  const std::size_t v1b = kg2.entity_name(nbrs2[0]) == "v1" ? 0 : 1;
  CHECK(prop[v1b] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(prop[1 - v1b] == doctest::Approx(0.75).epsilon(1e-12));

  double total = 0.0;
  for (const double p : inv) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sampled neighbor frequencies match the distribution (chi-square)") {
  // Neighbors of u with distinct degrees 1, 2, 3, 4.
  const KnowledgeGraph kg = ts::graph_from({
      {"u", "r", "a"},
      {"u", "r", "b"}, {"b", "r", "b1"},
      {"u", "r", "c"}, {"c", "r", "c1"}, {"c", "r", "c2"},
      {"u", "r", "d"}, {"d", "r", "d1"}, {"d", "r", "d2"}, {"d", "r", "d3"},
  });
  const EntityId u = kg.find_entity("u");
  const auto nbrs = kg.neighbors(u);
  REQUIRE(nbrs.size() == 4);

  for (const NeighborMode mode :
       {NeighborMode::kInverseDegree, NeighborMode::kUniform,
        NeighborMode::kDegreeProportional}) {
    const NeighborSampler sampler(kg, mode);
    const auto expected = neighbor_distribution(kg, u, mode);
    std::map<EntityId, int> counts;
    Rng rng(1234 + static_cast<int>(mode));
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) ++counts[sampler.sample(u, rng)];
    double chi2 = 0.0;
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      const double exp_count = expected[j] * draws;
      const double diff = counts[nbrs[j]] - exp_count;
      chi2 += diff * diff / exp_count;
    }
    CHECK(chi2 < ts::chi2_critical_99(static_cast<int>(nbrs.size()) - 1));
  }
}

TEST_CASE("subgraph sampling on a path exhausts the component") {
  const KnowledgeGraph kg = ts::path_graph(3);
  const TripleId center = find_triple(kg, "e0", "r0", "e1");
  SamplerConfig cfg;
  cfg.restart_prob = 0.0;
  cfg.max_triples = 2;
  Rng rng(5);
  const Subgraph sub = sample_subgraph(kg, center, cfg, rng);
  REQUIRE(sub.triples.size() == 2);
  CHECK(std::set<TripleId>(sub.triples.begin(), sub.triples.end()).size() == 2);
  CHECK(sub.triples.front() == center);
}

TEST_CASE("max triples of one returns only the center") {
  const KnowledgeGraph kg = ts::random_connected_graph(20, 20, 2, 3);
  SamplerConfig cfg;
  cfg.max_triples = 1;
  for (TripleId c = 0; c < 5; ++c) {
    Rng rng(c);
    const Subgraph sub = sample_subgraph(kg, c, cfg, rng);
    CHECK(sub.triples == std::vector<TripleId>{c});
  }
}

namespace {

// Exact inclusion probabilities for the star walk by sweeping the full
// distribution over (current node, collected triples) until the chain is
// absorbed at |collected| == max_triples.
std::vector<double> star_inclusion_exact(int leaves, double restart_prob,
                                         int max_triples) {
  // Node 0 is the hub; spokes are numbered by leaf (1-based leaf i uses
  // triple i - 1). Center triple is spoke 0 (hub - leaf 1).
  const int num_triples = leaves;
  std::vector<double> inclusion(static_cast<std::size_t>(num_triples), 0.0);
  const auto solve_from = [&](int start_node, double weight) {
    using Key = std::pair<int, unsigned>;  // (node, collected mask)
    std::map<Key, double> dist;
    dist[{start_node, 1u}] = 1.0;  // center spoke pre-collected
    for (int iter = 0; iter < 20000 && !dist.empty(); ++iter) {
      std::map<Key, double> next;
      for (const auto& [key, p] : dist) {
        const auto [node, mask] = key;
        next[{start_node, mask}] += p * restart_prob;
        const double move = p * (1.0 - restart_prob);
        if (node == 0) {
          for (int leaf = 1; leaf <= leaves; ++leaf) {
            const unsigned bit = 1u << (leaf - 1);
            const unsigned m2 = mask | bit;
            const double q = move / leaves;
            if (static_cast<int>(std::popcount(m2)) >= max_triples) {
              for (int s = 0; s < num_triples; ++s) {
                if (m2 & (1u << s)) inclusion[static_cast<std::size_t>(s)] += weight * q;
              }
            } else {
              next[{leaf, m2}] += q;
            }
          }
        } else {
          const unsigned bit = 1u << (node - 1);
          const unsigned m2 = mask | bit;
          if (static_cast<int>(std::popcount(m2)) >= max_triples) {
            for (int s = 0; s < num_triples; ++s) {
              if (m2 & (1u << s)) inclusion[static_cast<std::size_t>(s)] += weight * move;
            }
          } else {
            next[{0, m2}] += move;
          }
        }
      }
      double remaining = 0.0;
      for (const auto& [key, p] : next) remaining += p;
      dist = std::move(next);
      if (remaining < 1e-14) break;
    }
    return;
  };
  // Start entity: leaf 1 with probability (1/1)/(1/1 + 1/leaves), else hub.
  const double p_leaf =
      1.0 / (1.0 + 1.0 / static_cast<double>(leaves));
  solve_from(1, p_leaf);
  solve_from(0, 1.0 - p_leaf);
  return inclusion;
}

}  // namespace

TEST_CASE("star walk matches exact chain enumeration") {
  const KnowledgeGraph kg = ts::star_graph(4);
  const TripleId center = 0;  // (e0, r0, e1): hub to leaf 1
  REQUIRE(kg.degree(kg.triple(center).head) == 4);

  SamplerConfig cfg;
  cfg.restart_prob = 1.0 / 25.0;

  SUBCASE("full supply: every run returns all four distinct triples") {
    cfg.max_triples = 4;
    for (int run = 0; run < 1000; ++run) {
      Rng rng(Rng::mix(99, static_cast<std::uint64_t>(run)));
      const Subgraph sub = sample_subgraph(kg, center, cfg, rng);
      REQUIRE(sub.triples.size() == 4);
      CHECK(std::set<TripleId>(sub.triples.begin(), sub.triples.end()).size() == 4);
    }
  }

  SUBCASE("partial supply: inclusion frequencies match the exact chain") {
    cfg.max_triples = 2;
    const int runs = 1000;
    std::vector<int> counts(4, 0);
    for (int run = 0; run < runs; ++run) {
      Rng rng(Rng::mix(4242, static_cast<std::uint64_t>(run)));
      const Subgraph sub = sample_subgraph(kg, center, cfg, rng);
      REQUIRE(sub.triples.size() == 2);
      for (const TripleId t : sub.triples) ++counts[static_cast<std::size_t>(t)];
    }
    const auto exact = star_inclusion_exact(4, cfg.restart_prob, 2);
    CHECK(exact[0] == doctest::Approx(1.0).epsilon(1e-9));
    for (std::size_t s = 0; s < 4; ++s) {
      const double empirical = static_cast<double>(counts[s]) / runs;
      CHECK(std::abs(empirical - exact[s]) < 0.02);
    }
  }
}

TEST_CASE("center distances are full-graph BFS distances") {
  const KnowledgeGraph kg = ts::path_graph(4);
  Subgraph sub;
  sub.center = find_triple(kg, "e0", "r0", "e1");
  sub.triples = {0, 1, 2};
  compute_center_distances(kg, sub);
  CHECK(sub.distance_of(kg.find_entity("e0")) == 0);
  CHECK(sub.distance_of(kg.find_entity("e1")) == 1);
  CHECK(sub.distance_of(kg.find_entity("e2")) == 2);
  CHECK(sub.distance_of(kg.find_entity("e3")) == 3);
}

TEST_CASE("bfs distances match the all-pairs oracle on random graphs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const int n = 20 + static_cast<int>(seed % 5) * 20;
    const KnowledgeGraph kg =
        ts::random_connected_graph(n, n / 2, 3, 1000 + seed);
    const auto oracle = ts::floyd_warshall(kg);
    const EntityId source = static_cast<EntityId>(seed % n);
    const auto dist = bfs_distances(kg, source);
    for (EntityId v = 0; v < kg.num_entities(); ++v) {
      CHECK(dist[static_cast<std::size_t>(v)] ==
            oracle[static_cast<std::size_t>(source)][static_cast<std::size_t>(v)]);
    }
  }
}

TEST_CASE("adjacent entities differ by at most one in BFS distance") {
  const KnowledgeGraph kg = ts::random_connected_graph(60, 80, 4, 77);
  const auto dist = bfs_distances(kg, 0);
  for (EntityId u = 0; u < kg.num_entities(); ++u) {
    for (const EntityId v : kg.neighbors(u)) {
      const auto du = dist[static_cast<std::size_t>(u)];
      const auto dv = dist[static_cast<std::size_t>(v)];
      if (du != kUnreachable && dv != kUnreachable) {
        CHECK(std::abs(du - dv) <= 1);
      }
    }
  }
}

TEST_CASE("approximate distance multiplies the two center distances") {
  Subgraph sub;
  sub.dist_from_center_head = {{0, 0}, {1, 2}, {2, 3}, {3, 4}, {4, kUnreachable}};
  CHECK(approx_distance(sub, 1, 2) == 6);
  CHECK(approx_distance(sub, 0, 3) == 4);  // zero promoted to one
  CHECK(approx_distance(sub, 0, 0) == 1);
  CHECK(approx_distance(sub, 1, 4) == kUnreachable);
  CHECK(approx_distance(sub, 4, 1) == kUnreachable);
  CHECK_THROWS_AS(approx_distance(sub, 1, 99), ContractViolation);
}

TEST_CASE("walk occupancy of a hub is lower under inverse-degree stepping") {
  // s adjacent to a leaf and a hub; the hub fans out to three more leaves.
  const KnowledgeGraph kg = ts::graph_from({
      {"s", "r", "a"},
      {"s", "r", "H"},
      {"H", "r", "b"},
      {"H", "r", "c"},
      {"H", "r", "d"},
  });
  const EntityId s = kg.find_entity("s");
  const EntityId hub = kg.find_entity("H");
  const int n = static_cast<int>(kg.num_entities());
  const double p_r = 0.1;

  const auto occupancy = [&](NeighborMode mode) {
    Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(n, n);
    for (EntityId u = 0; u < n; ++u) {
      transition(u, s) += p_r;
      const auto nbrs = kg.neighbors(u);
      const auto probs = neighbor_distribution(kg, u, mode);
      for (std::size_t j = 0; j < nbrs.size(); ++j) {
        transition(u, nbrs[j]) += (1.0 - p_r) * probs[j];
      }
    }
    Eigen::RowVectorXd state = Eigen::RowVectorXd::Zero(n);
    state(s) = 1.0;
    double visits = 0.0;
    for (int step = 0; step < 50; ++step) {
      state = state * transition;
      visits += state(hub);
    }
    return visits;
  };

  CHECK(occupancy(NeighborMode::kInverseDegree) <
        occupancy(NeighborMode::kUniform));
  CHECK(occupancy(NeighborMode::kUniform) <
        occupancy(NeighborMode::kDegreeProportional));
}

TEST_CASE("precompute covers every triple deterministically") {
  const KnowledgeGraph kg = ts::graph_from({{"a", "r", "b"},
                                            {"b", "r", "c"},
                                            {"a", "s", "c"}});
  SamplerConfig cfg;
  cfg.max_triples = 3;
  cfg.seed = 9;
  const SubgraphStore store = precompute_all(kg, cfg);
  REQUIRE(store.size() == 3);

  const SubgraphStore again = precompute_all(kg, cfg);
  const SubgraphStore parallel = precompute_all(kg, cfg, 4);
  for (std::size_t i = 0; i < store.size(); ++i) {
    CHECK(store.at(i).triples == again.at(i).triples);
    CHECK(store.at(i).triples == parallel.at(i).triples);
    CHECK(store.at(i).dist_from_center_head == parallel.at(i).dist_from_center_head);
  }
}

TEST_CASE("subgraph invariants hold on random graphs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const KnowledgeGraph kg = ts::random_connected_graph(40, 50, 4, 500 + seed);
    SamplerConfig cfg;
    cfg.max_triples = 12;
    cfg.seed = seed;
    const SubgraphStore store = precompute_all(kg, cfg, 2);
    REQUIRE(store.size() == static_cast<std::size_t>(kg.num_triples()));
    for (std::size_t i = 0; i < store.size(); ++i) {
      const Subgraph& sub = store.at(i);
      const std::set<TripleId> uniq(sub.triples.begin(), sub.triples.end());
      CHECK(uniq.size() == sub.triples.size());
      CHECK(uniq.count(sub.center) == 1);
      CHECK(sub.distance_of(kg.triple(sub.center).head) == 0);
      for (const TripleId t : sub.triples) {
        CHECK(sub.dist_from_center_head.count(kg.triple(t).head) == 1);
        CHECK(sub.dist_from_center_head.count(kg.triple(t).tail) == 1);
      }
    }
  }
}

TEST_CASE("store files reload bit-exactly") {
  const KnowledgeGraph kg = ts::random_connected_graph(30, 40, 3, 21);
  SamplerConfig cfg;
  cfg.max_triples = 8;
  cfg.seed = 3;
  const SubgraphStore store = precompute_all(kg, cfg);

  const auto dir = std::filesystem::temp_directory_path() / "satkgc_store_test";
  std::filesystem::create_directories(dir);
  const std::string first = (dir / "a.txt").string();
  const std::string second = (dir / "b.txt").string();
  store.save(first);
  const SubgraphStore loaded = SubgraphStore::load(first);
  REQUIRE(loaded.size() == store.size());
  loaded.save(second);

  std::ifstream fa(first, std::ios::binary);
  std::ifstream fb(second, std::ios::binary);
  const std::string sa((std::istreambuf_iterator<char>(fa)), {});
  const std::string sb((std::istreambuf_iterator<char>(fb)), {});
  CHECK(sa == sb);
  CHECK(!sa.empty());
}
