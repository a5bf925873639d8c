#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "satkgc/types.hpp"

namespace satkgc {

// Immutable knowledge graph: entity/relation vocabularies, the forward triple
// list, and an undirected adjacency index over distinct neighbor pairs.
//
// Conventions:
//  * Forward relations get ids [0, K); the inverse of r is r + K.
//  * degree(v) == |N(v)| counts distinct undirected neighbors over forward
//    triples; parallel relations between the same pair count once and
//    self-loops never enter the adjacency.
//  * Construction is the only mutation; afterwards any number of threads may
//    read concurrently.
class KnowledgeGraph {
 public:
  // Builds a graph from parsed triples (by vocabulary string). Entities from
  // `entity_meta` (id, name, description) are registered first, in file
  // order, so metadata files pin the id assignment.
  static KnowledgeGraph build(
      const std::vector<std::array<std::string, 3>>& triples,
      const std::vector<std::array<std::string, 3>>& entity_meta = {});

  // Reads `head<TAB>relation<TAB>tail` lines (UTF-8, LF). A malformed line or
  // a duplicate triple raises DataError naming the offending line number.
  static KnowledgeGraph ingest(const std::string& triples_path,
                               const std::string& entities_path = "");

  // Writes canonical triples.tsv / entities.tsv / relations.tsv into `dir`.
  // Re-ingesting the exported files reproduces the exact id assignment.
  void export_to(const std::string& dir) const;

  std::int64_t num_entities() const { return static_cast<std::int64_t>(entity_names_.size()); }
  std::int64_t num_forward_relations() const { return num_forward_relations_; }
  std::int64_t num_total_relations() const { return 2 * num_forward_relations_; }
  std::int64_t num_triples() const { return static_cast<std::int64_t>(triples_.size()); }

  const Triple& triple(TripleId id) const { return triples_[static_cast<std::size_t>(id)]; }
  std::span<const Triple> triples() const { return triples_; }

  RelationId inverse(RelationId r) const {
    const RelationId k = static_cast<RelationId>(num_forward_relations_);
    return r < k ? r + k : r - k;
  }
  bool is_inverse(RelationId r) const { return r >= num_forward_relations_; }
  RelationId forward_form(RelationId r) const { return is_inverse(r) ? inverse(r) : r; }

  const std::string& entity_name(EntityId e) const { return entity_names_[static_cast<std::size_t>(e)]; }
  const std::string& entity_display(EntityId e) const { return entity_display_[static_cast<std::size_t>(e)]; }
  const std::string& entity_description(EntityId e) const { return entity_descriptions_[static_cast<std::size_t>(e)]; }
  // Forward relation name; inverse ids are reported as "<name>^-1".
  std::string relation_name(RelationId r) const;

  // Dense id lookup; returns -1 when absent.
  EntityId find_entity(const std::string& name) const;
  RelationId find_relation(const std::string& name) const;

  // Sorted, duplicate-free neighbors of v over the undirected forward view.
  std::span<const EntityId> neighbors(EntityId v) const;
  std::int64_t degree(EntityId v) const;

  // Forward triple ids whose endpoints are exactly {u, v}.
  std::span<const TripleId> edge_triples(EntityId u, EntityId v) const;

  // Forward triple ids with head h.
  std::span<const TripleId> triples_by_head(EntityId h) const;

  // Frequency weight psi(t) = ln(|N(t)| + 1). Degree-0 entities yield 0.
  double frequency_weight(EntityId t) const;

  std::int64_t num_isolated_entities() const { return num_isolated_; }
  // Number of distinct undirected edges (parallel relations deduplicated).
  std::int64_t num_undirected_edges() const { return num_undirected_edges_; }
  double average_degree() const;

  void check_entity(EntityId v) const;

 private:
  std::vector<std::string> entity_names_;
  std::vector<std::string> entity_display_;
  std::vector<std::string> entity_descriptions_;
  std::vector<std::string> relation_names_;  // forward only
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::int64_t num_forward_relations_ = 0;

  std::vector<Triple> triples_;

  // CSR adjacency over distinct undirected neighbors, plus a parallel CSR of
  // the forward triples realizing each (v, neighbor) slot.
  std::vector<std::int64_t> adj_offsets_;
  std::vector<EntityId> adj_neighbors_;
  std::vector<std::int64_t> slot_triple_offsets_;
  std::vector<TripleId> slot_triples_;

  // CSR of forward triples grouped by head.
  std::vector<std::int64_t> head_offsets_;
  std::vector<TripleId> head_triples_;

  std::int64_t num_isolated_ = 0;
  std::int64_t num_undirected_edges_ = 0;

  void build_indexes();
};

// Membership index over a triple list, keyed by (head, relation-with-
// direction). `contains` and `tails` accept inverse relation ids and answer
// for the mirrored forward triple.
class TripleIndex {
 public:
  TripleIndex() = default;
  TripleIndex(const KnowledgeGraph& kg, std::span<const Triple> extra = {});

  void add(const KnowledgeGraph& kg, const Triple& t);
  void finalize();

  bool contains(EntityId h, RelationId r, EntityId t) const;
  // Sorted tails reachable from (h, r); r may be an inverse id.
  std::span<const EntityId> tails(EntityId h, RelationId r) const;

 private:
  std::unordered_map<std::uint64_t, std::vector<EntityId>> map_;
  bool finalized_ = false;

  static std::uint64_t key(EntityId h, RelationId r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 32) |
           static_cast<std::uint32_t>(h);
  }
};

}  // namespace satkgc
