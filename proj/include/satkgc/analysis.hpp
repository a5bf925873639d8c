#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "satkgc/encoder.hpp"
#include "satkgc/eval.hpp"
#include "satkgc/kg.hpp"
#include "satkgc/loss.hpp"
#include "satkgc/scheduler.hpp"
#include "satkgc/subgraph.hpp"

namespace satkgc {

// Named (label, value) tables, written as CSV plus a two-column gnuplot data
// file per table.
struct StructReport {
  std::map<std::string, std::vector<std::pair<std::string, double>>> tables;

  void save(const std::string& dir) const;
};

struct DistanceRatio {
  std::int32_t distance = 0;
  std::int64_t fp_count = 0;
  std::int64_t pair_count = 0;
  double ratio = 0.0;
};

// False-positive ratio per head-to-tail shortest-path distance: FPs at each
// distance divided by the number of unordered entity pairs at that distance.
// `max_distance` 0 means "up to the largest FP distance observed".
std::vector<DistanceRatio> fp_ratio_by_distance(const KnowledgeGraph& kg,
                                                const RankDump& dump,
                                                std::int32_t max_distance = 0,
                                                int workers = 1);

struct DegreeGroupRatio {
  std::int64_t min_degree = 0;
  std::int64_t max_degree = 0;
  double fp_count = 0.0;
  std::int64_t entity_count = 0;
  double ratio = 0.0;
};

// FP ratio per degree quintile. The sorted distinct degrees are split into
// five groups of equal size (remainder to the last groups). By default the
// numerator is the total FP count in the group; `per_distinct_degree_average`
// divides it by the group's number of distinct degrees first.
std::vector<DegreeGroupRatio> fp_ratio_by_degree_group(
    const KnowledgeGraph& kg, const RankDump& dump,
    bool per_distinct_degree_average = false);

// Per-entity visit counts derived from per-triple batch membership counts.
std::vector<std::uint64_t> entity_visit_counts(
    const KnowledgeGraph& kg, std::span<const std::uint64_t> triple_visits);

// Frequency curves and Gini coefficients: entity visit ratios ordered by
// ascending graph degree, and triple/entity counts ordered by descending
// frequency.
StructReport distribution_reports(const KnowledgeGraph& kg,
                                  std::span<const std::uint64_t> triple_visits);

// Fraction of in-batch negative cosine scores per bin. Edges must be strictly
// increasing and cover [-1, 1].
std::vector<double> negative_score_histogram(const EncoderParams<double>& params,
                                             std::span<const MiniBatch> batches,
                                             std::span<const double> bin_edges);

struct DistanceSimilarity {
  std::int32_t distance = 0;
  std::int64_t pair_count = 0;            // pairs that entered the mean
  std::optional<double> mean_cosine;      // absent when no pairs exist
};

// Mean tail-embedding cosine between entity pairs at each exact distance in
// 1..max_distance, over all pairs when their count fits the budget and over a
// seeded uniform sample otherwise.
std::vector<DistanceSimilarity> distance_similarity_table(
    const EncoderParams<double>& params, const KnowledgeGraph& kg,
    std::int32_t max_distance, std::int64_t sample_budget, std::uint64_t seed = 0);

enum class RelationKind { kOneToOne, kOneToMany, kManyToOne, kManyToMany };

struct RelationClassStats {
  RelationKind kind = RelationKind::kOneToOne;
  double triple_share = 0.0;
  double hits1 = 0.0;
  std::int64_t num_queries = 0;
};

// Classifies relations by mean tails-per-head and heads-per-tail with the
// conventional 1.5 threshold, and reports each class's triple share and
// Hits@1 over the dump.
std::vector<RelationClassStats> relation_type_breakdown(const KnowledgeGraph& kg,
                                                        const RankDump& dump);

const char* relation_kind_name(RelationKind kind);

struct CentralityStats {
  double mean_degree = 0.0;
  double mean_betweenness = 0.0;
  std::int64_t num_entities = 0;
};

// Mean degree and exact normalized betweenness over the entities touched by
// each triple set. Refuses graphs above node_cap.
std::vector<CentralityStats> centrality_stats(
    const KnowledgeGraph& kg, std::span<const std::vector<TripleId>> triple_sets,
    std::int64_t node_cap = 5000);

// A triple to score inside a reconstructed batch: `center` names the stored
// subgraph giving the batch context; the triple itself may be outside the
// training set (a false positive).
struct LossProbeItem {
  TripleId center = 0;
  Triple triple;
};

struct LossComparison {
  double mean_weighted = 0.0;  // psi(t) * L
  double mean_plain = 0.0;     // L
  std::int64_t count = 0;
};

// Average loss with and without the frequency weight for each item list,
// computed by rebuilding a deterministic batch around each item's center and
// substituting the item into the first row.
std::vector<LossComparison> fp_loss_comparison(
    const EncoderParams<double>& params, const KnowledgeGraph& kg,
    const SubgraphStore& store, int batch_size, const LossConfig& loss_cfg,
    std::uint64_t seed, std::span<const std::span<const LossProbeItem>> item_sets);

}  // namespace satkgc
