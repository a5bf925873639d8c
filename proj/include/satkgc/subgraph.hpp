#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "satkgc/kg.hpp"
#include "satkgc/rng.hpp"
#include "satkgc/types.hpp"

namespace satkgc {

enum class NeighborMode { kInverseDegree, kUniform, kDegreeProportional };

const char* neighbor_mode_name(NeighborMode mode);
NeighborMode parse_neighbor_mode(const std::string& name);

struct SamplerConfig {
  double restart_prob = 1.0 / 25.0;
  std::int64_t max_triples = 10000;
  NeighborMode mode = NeighborMode::kInverseDegree;
  std::uint64_t seed = 0;

  void validate() const;
};

// One sampled subgraph: the center triple, a duplicate-free forward triple
// set containing it, and shortest-path distances from the center head for
// every entity touched by the listed triples.
struct Subgraph {
  TripleId center = 0;
  std::vector<TripleId> triples;
  std::unordered_map<EntityId, std::int32_t> dist_from_center_head;
  std::string sampler = "brwr";

  // kUnreachable when no distance is recorded or no path exists.
  std::int32_t distance_of(EntityId e) const;
};

class SubgraphStore {
 public:
  void add(Subgraph sub);
  std::size_t size() const { return subgraphs_.size(); }
  bool empty() const { return subgraphs_.empty(); }
  const Subgraph& at(std::size_t pos) const { return subgraphs_[pos]; }
  const Subgraph* by_center(TripleId center) const;

  void save(const std::string& path) const;
  static SubgraphStore load(const std::string& path);

 private:
  std::vector<Subgraph> subgraphs_;
  std::unordered_map<TripleId, std::size_t> by_center_;
};

// Picks the walk's start entity from the center endpoints with probability
// proportional to the inverse degree of each.
EntityId select_start_entity(const KnowledgeGraph& kg, const Triple& center, Rng& rng);

// Probability of stepping to each element of neighbors(u), in order.
std::vector<double> neighbor_distribution(const KnowledgeGraph& kg, EntityId u,
                                          NeighborMode mode);

// Cached per-entity cumulative weights so walks sample neighbors in O(log deg).
class NeighborSampler {
 public:
  NeighborSampler(const KnowledgeGraph& kg, NeighborMode mode);
  EntityId sample(EntityId u, Rng& rng) const;

 private:
  const KnowledgeGraph& kg_;
  std::vector<std::int64_t> offsets_;
  std::vector<double> cdf_;
};

// Random walk with restart from the start entity; every traversed edge
// contributes its forward triples until max_triples distinct ones are
// collected. A step cap of 50 * max_triples bounds walks that cannot reach
// the target size (small components, restart_prob near 1).
Subgraph sample_subgraph(const KnowledgeGraph& kg, TripleId center,
                         const SamplerConfig& cfg, Rng& rng,
                         const NeighborSampler& sampler);
Subgraph sample_subgraph(const KnowledgeGraph& kg, TripleId center,
                         const SamplerConfig& cfg, Rng& rng);

// Fills dist_from_center_head by BFS over the full graph, stopping once all
// subgraph entities are settled.
void compute_center_distances(const KnowledgeGraph& kg, Subgraph& sub);

// d1 * d2 with zero factors promoted to 1; kUnreachable if either side is.
// Requires both entities to have distance entries.
std::int64_t approx_distance(const Subgraph& sub, EntityId h, EntityId t);

// One subgraph per training triple, deterministic in (cfg.seed, triple id)
// regardless of worker count.
SubgraphStore precompute_all(const KnowledgeGraph& kg, const SamplerConfig& cfg,
                             int workers = 1);

}  // namespace satkgc
