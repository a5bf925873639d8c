#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satkgc/encoder.hpp"
#include "satkgc/kg.hpp"

namespace satkgc {

struct DirectionMetrics {
  double mrr = 0.0;
  double hits1 = 0.0;
  double hits3 = 0.0;
  double hits10 = 0.0;
  std::int64_t num_queries = 0;
};

struct Metrics {
  DirectionMetrics overall;
  DirectionMetrics forward;
  DirectionMetrics backward;

  void save_csv(const std::string& path) const;
  std::string aligned_text() const;
};

// One evaluated query plus the candidates that outranked the gold.
struct RankDumpRow {
  EntityId head = 0;       // query head (original triple's head or tail)
  RelationId rel = 0;      // relation id, possibly inverse
  EntityId gold = 0;
  bool backward = false;
  std::int64_t rank = 0;
  std::vector<EntityId> false_positives;  // surviving candidates above gold
};

struct RankDump {
  std::vector<RankDumpRow> rows;

  void save_csv(const KnowledgeGraph& kg, const std::string& path) const;
  static RankDump load_csv(const KnowledgeGraph& kg, const std::string& path);
};

// All tail embeddings, encoded once; scoring a query is a single matvec.
EncoderParams<double>::Mat encode_all_tails(const EncoderParams<double>& params);

// Rank of `gold` among all entities by cos(x_hr, x_t), excluding entities in
// `filter` (other than gold) and counting ties against the gold. `filter`
// must be sorted. Fills `false_positives` when non-null.
std::int64_t rank_tail(const EncoderParams<double>::Mat& tail_table,
                       const Eigen::VectorXd& x_hr, EntityId gold,
                       std::span<const EntityId> filter,
                       std::vector<EntityId>* false_positives = nullptr);

// Convenience form matching the one-query contract.
std::int64_t rank_tail(const EncoderParams<double>& params,
                       const KnowledgeGraph& kg, EntityId head, RelationId rel,
                       EntityId gold, std::span<const EntityId> filter);

struct EvalOptions {
  bool filtered = true;
  int workers = 1;
  bool collect_false_positives = true;
};

// Ranks every test triple in both directions (backward queries use inverse
// relations) against all entities. In the filtered setting other known-true
// answers from `known` are removed before ranking; `known` should cover
// train, valid, and test triples. Test triples naming unseen entities are
// rejected.
Metrics evaluate(const EncoderParams<double>& params, const KnowledgeGraph& kg,
                 const TripleIndex& known, std::span<const Triple> test,
                 const EvalOptions& opts = {}, RankDump* dump = nullptr);

// Parses a held-out split against an existing vocabulary; unseen entities or
// relations raise DataError (transductive evaluation only).
std::vector<Triple> load_split(const KnowledgeGraph& kg, const std::string& path);

}  // namespace satkgc
