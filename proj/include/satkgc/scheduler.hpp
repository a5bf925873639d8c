#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "satkgc/kg.hpp"
#include "satkgc/rng.hpp"
#include "satkgc/subgraph.hpp"
#include "satkgc/types.hpp"

namespace satkgc {

enum class SchedulerMode { kSaam, kRandom, kMixed };

const char* scheduler_mode_name(SchedulerMode mode);
SchedulerMode parse_scheduler_mode(const std::string& name);

// Two tallies, kept separate: how often each forward triple appeared in a
// batch, and how often each store entry was selected as the batch center.
struct VisitCounter {
  std::vector<std::uint64_t> triple_visits;
  std::vector<std::uint64_t> center_selections;

  void save_triple_visits(const std::string& path) const;
  static std::vector<std::uint64_t> load_counts(const std::string& path);
};

struct BatchRow {
  TripleId triple = 0;
  bool inverse = false;
  bool topup = false;
  EntityId hr_entity = 0;
  RelationId hr_rel = 0;
  EntityId tail_entity = 0;
  std::int32_t head_dist = kUnreachable;  // center-head distance of hr_entity
  std::int32_t tail_dist = kUnreachable;  // center-head distance of tail_entity
  double psi = 0.0;                       // frequency weight of tail_entity
};

// Rows [0, B/2) are forward picks; row i + B/2 is the inverse of row i.
// excluded is a B*B row-major mask: tail j is excluded from row i's negative
// set when (h_i, r_i, t_j) is a known triple (this covers j == i).
struct MiniBatch {
  TripleId center = -1;
  std::vector<BatchRow> rows;
  std::vector<std::uint8_t> excluded;

  std::size_t size() const { return rows.size(); }
  bool is_excluded(std::size_t i, std::size_t j) const {
    return excluded[i * rows.size() + j] != 0;
  }
};

// Index of the least-selected center; ties go to the smallest store position.
std::size_t next_center(const SubgraphStore& store, const VisitCounter& counter);

// Builds one batch row for a (possibly virtual) triple, reading center
// distances from `sub` when provided. `id` may be -1 for triples outside the
// training set.
BatchRow make_batch_row(const KnowledgeGraph& kg, const Subgraph* sub,
                        const Triple& t, TripleId id, bool inverse, bool topup);

// Recomputes the false-negative exclusion mask over the batch's rows.
void rebuild_exclusion_mask(const TripleIndex& index, MiniBatch& batch);

// Draws batch_size/2 distinct forward triples uniformly from the subgraph
// (topped up from the full triple set when the subgraph is smaller) and
// appends their inverses.
MiniBatch assemble_saam_batch(const KnowledgeGraph& kg, const TripleIndex& index,
                              const Subgraph& sub, int batch_size, Rng& rng);

// Increments triple_visits once per forward row.
void record_visits(VisitCounter& counter, const MiniBatch& batch);

// Drives an epoch: center selection, batch assembly, and visit accounting.
// In random mode forward triples are drawn without replacement from a
// shuffled permutation that is refilled when exhausted, so a full pass
// touches every triple exactly once. Mixed mode replaces half of each SaaM
// batch's forward picks with random triples.
class BatchScheduler {
 public:
  BatchScheduler(const KnowledgeGraph& kg, const SubgraphStore& store,
                 SchedulerMode mode, std::uint64_t seed);

  MiniBatch next_batch(int batch_size);

  const VisitCounter& counter() const { return counter_; }
  SchedulerMode mode() const { return mode_; }

 private:
  const KnowledgeGraph& kg_;
  const SubgraphStore& store_;
  SchedulerMode mode_;
  TripleIndex index_;
  VisitCounter counter_;
  Rng rng_;
  std::vector<TripleId> permutation_;
  std::size_t cursor_ = 0;

  TripleId draw_from_permutation();
};

}  // namespace satkgc
