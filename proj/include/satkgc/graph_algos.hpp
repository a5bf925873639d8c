#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "satkgc/kg.hpp"
#include "satkgc/types.hpp"

namespace satkgc {

// Unweighted single-source shortest paths over the undirected forward view.
// Entry is kUnreachable where no path exists. When `targets_remaining` is
// positive, the search stops early once that many distinct target entities
// (marked in `is_target`) have been settled.
std::vector<std::int32_t> bfs_distances(const KnowledgeGraph& kg, EntityId source);
std::vector<std::int32_t> bfs_distances(const KnowledgeGraph& kg, EntityId source,
                                        const std::vector<std::uint8_t>& is_target,
                                        std::int64_t targets_remaining);

// Exact betweenness centrality, normalized to [0, 1] by (n-1)(n-2) over the
// ordered-pair accumulation. Refuses graphs larger than `node_cap`.
std::vector<double> brandes_betweenness(const KnowledgeGraph& kg,
                                        std::int64_t node_cap = 5000);

// Population Gini coefficient of a nonnegative count vector; 0 for uniform
// (or empty/all-zero) input.
double gini(std::span<const double> counts);
double gini_counts(std::span<const std::uint64_t> counts);

// Number of unordered entity pairs at each exact distance d >= 1, indexed by
// d (index 0 unused). Runs one BFS per entity.
std::vector<std::int64_t> pairs_by_distance(const KnowledgeGraph& kg,
                                            std::int32_t max_distance,
                                            int workers = 1);

// Runs fn(i) for i in [0, n) across `workers` threads. Exceptions from tasks
// are rethrown on the calling thread. fn must write only to per-index slots.
void parallel_for(std::int64_t n, int workers,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace satkgc
