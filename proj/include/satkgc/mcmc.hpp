#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "satkgc/encoder.hpp"
#include "satkgc/kg.hpp"
#include "satkgc/rng.hpp"
#include "satkgc/subgraph.hpp"

namespace satkgc {

struct McmcConfig {
  double alpha = 0.5;      // negative distribution exponent, in (0, 1)
  int k = 16;              // negatives per triple / nearest-neighbor pool size
  int dfs_depth = 16;      // triples per DFS path
  int burn_in = 100;
  std::uint64_t seed = 0;

  void validate(std::int64_t num_entities) const;
};

struct Proposal {
  EntityId entity = 0;
  double forward_density = 0.0;  // q(y | x)
  double reverse_density = 0.0;  // q(x | y)
};

// Mixture proposal: with probability 0.5 uniform over all entities, otherwise
// uniform over the k entities whose tail embeddings are closest (by cosine)
// to the current state's, ties broken by id and the state itself excluded.
Proposal propose(const EncoderParams<double>& params, EntityId x, int k, Rng& rng);

// Density q(y | x) of the mixture proposal without drawing.
double proposal_density(const EncoderParams<double>& params, EntityId x,
                        EntityId y, int k);

// One Metropolis-Hastings transition targeting cos(x_hr, x_t)^alpha with
// cosines clamped to a positive floor before exponentiation.
EntityId mh_step(const EncoderParams<double>& params, EntityId hr_entity,
                 RelationId hr_rel, EntityId state, double alpha, int k, Rng& rng);

// Sampled rows in batch order: DFS-path triples, negative-anchored triples,
// then the inverses of both (second is the inverse flag).
struct McmcSubgraph {
  Subgraph base;
  std::vector<std::pair<TripleId, bool>> rows;
};

// Depth-first traversal from `start` collecting dfs_depth triples; the
// negative chain runs alongside, spending one M-H step per triple until
// burn_in is exhausted and then drawing k proposal entities per triple. Each
// drawn entity anchors a random triple headed by it.
McmcSubgraph sample_mcmc_subgraph(const KnowledgeGraph& kg,
                                  const EncoderParams<double>& params,
                                  EntityId start, const McmcConfig& cfg, Rng& rng);

}  // namespace satkgc
