#pragma once

// Synthetic graph builders shared by the test suites. Everything is seeded
// and deterministic.

#include <array>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "satkgc/kg.hpp"
#include "satkgc/rng.hpp"

namespace satkgc::testsupport {

using RawTriples = std::vector<std::array<std::string, 3>>;

inline std::string ent(std::int64_t i) { return "e" + std::to_string(i); }
inline std::string rel(std::int64_t i) { return "r" + std::to_string(i); }

inline KnowledgeGraph graph_from(const RawTriples& rows) {
  return KnowledgeGraph::build(rows);
}

// e0 - e1 - ... - e(n-1)
inline KnowledgeGraph path_graph(int n, const std::string& relation = "r0") {
  RawTriples rows;
  for (int i = 0; i + 1 < n; ++i) rows.push_back({ent(i), relation, ent(i + 1)});
  return graph_from(rows);
}

// e0 in the middle, spokes e1..en.
inline KnowledgeGraph star_graph(int leaves, const std::string& relation = "r0") {
  RawTriples rows;
  for (int i = 1; i <= leaves; ++i) rows.push_back({ent(0), relation, ent(i)});
  return graph_from(rows);
}

// Connected random graph: a random spanning tree plus extra random edges.
inline KnowledgeGraph random_connected_graph(int entities, int extra_edges,
                                             int relations, std::uint64_t seed) {
  Rng rng(seed);
  RawTriples rows;
  std::set<std::pair<int, int>> used;
  for (int v = 1; v < entities; ++v) {
    const int u = static_cast<int>(rng.uniform_int(v));
    rows.push_back({ent(u), rel(rng.uniform_int(relations)), ent(v)});
    used.insert({std::min(u, v), std::max(u, v)});
  }
  int added = 0;
  int attempts = 0;
  while (added < extra_edges && attempts < extra_edges * 50) {
    ++attempts;
    const int u = static_cast<int>(rng.uniform_int(entities));
    const int v = static_cast<int>(rng.uniform_int(entities));
    if (u == v) continue;
    if (!used.insert({std::min(u, v), std::max(u, v)}).second) continue;
    rows.push_back({ent(u), rel(rng.uniform_int(relations)), ent(v)});
    ++added;
  }
  return graph_from(rows);
}

// Preferential attachment: each new node attaches m edges to targets drawn
// proportionally to degree (new edges deduplicated).
inline KnowledgeGraph preferential_attachment_graph(int entities, int m,
                                                    int relations,
                                                    std::uint64_t seed) {
  Rng rng(seed);
  RawTriples rows;
  std::vector<int> endpoint_pool;  // one entry per edge endpoint
  for (int v = 0; v <= m; ++v) {
    for (int u = 0; u < v; ++u) {
      rows.push_back({ent(v), rel(rng.uniform_int(relations)), ent(u)});
      endpoint_pool.push_back(u);
      endpoint_pool.push_back(v);
    }
  }
  for (int v = m + 1; v < entities; ++v) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      const int u = endpoint_pool[static_cast<std::size_t>(
          rng.uniform_int(static_cast<std::int64_t>(endpoint_pool.size())))];
      if (u != v) targets.insert(u);
    }
    for (const int u : targets) {
      rows.push_back({ent(v), rel(rng.uniform_int(relations)), ent(u)});
      endpoint_pool.push_back(u);
      endpoint_pool.push_back(v);
    }
  }
  return graph_from(rows);
}

struct ClusteredKg {
  RawTriples train;
  RawTriples test;
};

// Entities split into clusters arranged in a chain; most triples connect
// entities within a cluster, a few bridge adjacent clusters. A slice of the
// intra-cluster triples is held out as the test split.
inline ClusteredKg clustered_kg(int entities, int relations, int train_triples,
                                int test_triples, int clusters,
                                std::uint64_t seed) {
  Rng rng(seed);
  const int per_cluster = entities / clusters;
  ClusteredKg out;
  std::set<std::array<std::string, 3>> used;

  const auto entity_in = [&](int cluster) {
    return ent(cluster * per_cluster +
               static_cast<int>(rng.uniform_int(per_cluster)));
  };
  const auto add_unique = [&](RawTriples& dst, int needed, auto make) {
    int guard = 0;
    while (static_cast<int>(dst.size()) < needed && guard < needed * 200) {
      ++guard;
      std::array<std::string, 3> row = make();
      if (row[0] == row[2]) continue;
      if (!used.insert(row).second) continue;
      dst.push_back(std::move(row));
    }
  };

  // A ring inside each cluster keeps everything connected; bridges chain the
  // clusters together.
  for (int c = 0; c < clusters; ++c) {
    for (int i = 0; i < per_cluster; ++i) {
      const int a = c * per_cluster + i;
      const int b = c * per_cluster + (i + 1) % per_cluster;
      std::array<std::string, 3> row{
          ent(a), rel(rng.uniform_int(relations)), ent(b)};
      if (used.insert(row).second) out.train.push_back(std::move(row));
    }
  }
  for (int c = 0; c + 1 < clusters; ++c) {
    for (int b = 0; b < 2; ++b) {
      const int lhs = c;
      const int rhs = c + 1;
      add_unique(out.train, static_cast<int>(out.train.size()) + 1, [&] {
        return std::array<std::string, 3>{
            entity_in(lhs), rel(rng.uniform_int(relations)), entity_in(rhs)};
      });
    }
  }
  add_unique(out.train, train_triples, [&] {
    const int c = static_cast<int>(rng.uniform_int(clusters));
    return std::array<std::string, 3>{
        entity_in(c), rel(rng.uniform_int(relations)), entity_in(c)};
  });
  add_unique(out.test, test_triples, [&] {
    const int c = static_cast<int>(rng.uniform_int(clusters));
    return std::array<std::string, 3>{
        entity_in(c), rel(rng.uniform_int(relations)), entity_in(c)};
  });
  return out;
}

inline void write_tsv(const RawTriples& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& row : rows) {
    out << row[0] << '\t' << row[1] << '\t' << row[2] << '\n';
  }
}

}  // namespace satkgc::testsupport
