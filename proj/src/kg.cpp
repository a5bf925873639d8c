#include "satkgc/kg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace satkgc {

namespace {

std::vector<std::array<std::string, 3>> read_tsv3(const std::string& path,
                                                  const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(std::string("cannot open ") + what + " file: " + path);
  std::vector<std::array<std::string, 3>> rows;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto p1 = line.find('\t');
    const auto p2 = p1 == std::string::npos ? std::string::npos : line.find('\t', p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos) {
      throw DataError(std::string("malformed ") + what + " line " +
                      std::to_string(lineno) + " in " + path + ": " + line);
    }
    rows.push_back({line.substr(0, p1), line.substr(p1 + 1, p2 - p1 - 1),
                    line.substr(p2 + 1)});
    if (rows.back()[0].empty() || rows.back()[1].empty()) {
      throw DataError(std::string("malformed ") + what + " line " +
                      std::to_string(lineno) + " in " + path + ": empty field");
    }
  }
  return rows;
}

}  // namespace

KnowledgeGraph KnowledgeGraph::build(
    const std::vector<std::array<std::string, 3>>& triples,
    const std::vector<std::array<std::string, 3>>& entity_meta) {
  KnowledgeGraph kg;
  const auto intern_entity = [&kg](const std::string& name) -> EntityId {
    auto [it, inserted] = kg.entity_ids_.try_emplace(
        name, static_cast<EntityId>(kg.entity_names_.size()));
    if (inserted) {
      kg.entity_names_.push_back(name);
      kg.entity_display_.emplace_back();
      kg.entity_descriptions_.emplace_back();
    }
    return it->second;
  };

  // Rows are (entity_id, name, description); the id column is the vocabulary
  // token, name and description are stored verbatim and never encoded.
  for (const auto& row : entity_meta) {
    const EntityId e = intern_entity(row[0]);
    kg.entity_display_[static_cast<std::size_t>(e)] = row[1];
    kg.entity_descriptions_[static_cast<std::size_t>(e)] = row[2];
  }

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(triples.size() * 2);
  kg.triples_.reserve(triples.size());
  std::int64_t lineno = 0;
  for (const auto& row : triples) {
    ++lineno;
    const EntityId h = intern_entity(row[0]);
    auto [rit, rinserted] = kg.relation_ids_.try_emplace(
        row[1], static_cast<RelationId>(kg.relation_names_.size()));
    if (rinserted) kg.relation_names_.push_back(row[1]);
    const RelationId r = rit->second;
    const EntityId t = intern_entity(row[2]);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(h)) << 40) ^
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(r)) << 20) ^
        static_cast<std::uint32_t>(t);
    // Cheap prefilter; exact duplicate check below only on hash collision.
    if (!seen.insert(key).second) {
      for (std::size_t i = 0; i < kg.triples_.size(); ++i) {
        const Triple& prev = kg.triples_[i];
        if (prev.head == h && prev.rel == r && prev.tail == t) {
          throw DataError("duplicate triple at line " + std::to_string(lineno) +
                          ": " + row[0] + "\t" + row[1] + "\t" + row[2]);
        }
      }
    }
    kg.triples_.push_back(Triple{h, r, t});
  }
  kg.num_forward_relations_ = static_cast<std::int64_t>(kg.relation_names_.size());
  kg.build_indexes();
  if (kg.num_isolated_ > 0) {
    std::cerr << "warning: " << kg.num_isolated_
              << " entities have degree 0; their frequency weight is 0\n";
  }
  return kg;
}

KnowledgeGraph KnowledgeGraph::ingest(const std::string& triples_path,
                                      const std::string& entities_path) {
  std::vector<std::array<std::string, 3>> meta;
  if (!entities_path.empty()) meta = read_tsv3(entities_path, "entity metadata");
  return build(read_tsv3(triples_path, "triple"), meta);
}

void KnowledgeGraph::build_indexes() {
  const std::size_t n = entity_names_.size();
  std::vector<std::vector<std::pair<EntityId, TripleId>>> nbr(n);
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    const Triple& t = triples_[i];
    if (t.head == t.tail) continue;  // self-loops carry no undirected edge
    nbr[static_cast<std::size_t>(t.head)].emplace_back(t.tail, static_cast<TripleId>(i));
    nbr[static_cast<std::size_t>(t.tail)].emplace_back(t.head, static_cast<TripleId>(i));
  }

  adj_offsets_.assign(n + 1, 0);
  slot_triple_offsets_.clear();
  slot_triple_offsets_.push_back(0);
  for (std::size_t v = 0; v < n; ++v) {
    auto& lst = nbr[v];
    std::sort(lst.begin(), lst.end());
    adj_offsets_[v + 1] = adj_offsets_[v];
    std::size_t i = 0;
    while (i < lst.size()) {
      const EntityId u = lst[i].first;
      adj_neighbors_.push_back(u);
      ++adj_offsets_[v + 1];
      while (i < lst.size() && lst[i].first == u) {
        slot_triples_.push_back(lst[i].second);
        ++i;
      }
      slot_triple_offsets_.push_back(static_cast<std::int64_t>(slot_triples_.size()));
    }
  }

  head_offsets_.assign(n + 1, 0);
  for (const Triple& t : triples_) ++head_offsets_[static_cast<std::size_t>(t.head) + 1];
  std::partial_sum(head_offsets_.begin(), head_offsets_.end(), head_offsets_.begin());
  head_triples_.resize(triples_.size());
  std::vector<std::int64_t> cursor(head_offsets_.begin(), head_offsets_.end() - 1);
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    head_triples_[static_cast<std::size_t>(
        cursor[static_cast<std::size_t>(triples_[i].head)]++)] =
        static_cast<TripleId>(i);
  }

  num_isolated_ = 0;
  for (std::size_t v = 0; v < n; ++v) {
    if (adj_offsets_[v + 1] == adj_offsets_[v]) ++num_isolated_;
  }
  num_undirected_edges_ = static_cast<std::int64_t>(adj_neighbors_.size()) / 2;
}

void KnowledgeGraph::export_to(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/entities.tsv", std::ios::binary);
    for (std::size_t e = 0; e < entity_names_.size(); ++e) {
      out << entity_names_[e] << '\t' << entity_display_[e] << '\t'
          << entity_descriptions_[e] << '\n';
    }
  }
  {
    std::ofstream out(dir + "/relations.tsv", std::ios::binary);
    for (const auto& r : relation_names_) out << r << '\n';
  }
  {
    std::ofstream out(dir + "/triples.tsv", std::ios::binary);
    for (const Triple& t : triples_) {
      out << entity_names_[static_cast<std::size_t>(t.head)] << '\t'
          << relation_names_[static_cast<std::size_t>(t.rel)] << '\t'
          << entity_names_[static_cast<std::size_t>(t.tail)] << '\n';
    }
  }
}

std::string KnowledgeGraph::relation_name(RelationId r) const {
  if (is_inverse(r)) {
    return relation_names_[static_cast<std::size_t>(inverse(r))] + "^-1";
  }
  return relation_names_[static_cast<std::size_t>(r)];
}

EntityId KnowledgeGraph::find_entity(const std::string& name) const {
  const auto it = entity_ids_.find(name);
  return it == entity_ids_.end() ? EntityId{-1} : it->second;
}

RelationId KnowledgeGraph::find_relation(const std::string& name) const {
  const auto it = relation_ids_.find(name);
  return it == relation_ids_.end() ? RelationId{-1} : it->second;
}

void KnowledgeGraph::check_entity(EntityId v) const {
  if (v < 0 || v >= num_entities()) {
    throw DataError("invalid entity id " + std::to_string(v));
  }
}

std::span<const EntityId> KnowledgeGraph::neighbors(EntityId v) const {
  check_entity(v);
  const auto b = adj_offsets_[static_cast<std::size_t>(v)];
  const auto e = adj_offsets_[static_cast<std::size_t>(v) + 1];
  return {adj_neighbors_.data() + b, static_cast<std::size_t>(e - b)};
}

std::int64_t KnowledgeGraph::degree(EntityId v) const {
  check_entity(v);
  return adj_offsets_[static_cast<std::size_t>(v) + 1] -
         adj_offsets_[static_cast<std::size_t>(v)];
}

std::span<const TripleId> KnowledgeGraph::edge_triples(EntityId u, EntityId v) const {
  const auto nb = neighbors(u);
  const auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return {};
  const std::size_t slot = static_cast<std::size_t>(
      adj_offsets_[static_cast<std::size_t>(u)] + (it - nb.begin()));
  const auto b = slot_triple_offsets_[slot];
  const auto e = slot_triple_offsets_[slot + 1];
  return {slot_triples_.data() + b, static_cast<std::size_t>(e - b)};
}

std::span<const TripleId> KnowledgeGraph::triples_by_head(EntityId h) const {
  check_entity(h);
  const auto b = head_offsets_[static_cast<std::size_t>(h)];
  const auto e = head_offsets_[static_cast<std::size_t>(h) + 1];
  return {head_triples_.data() + b, static_cast<std::size_t>(e - b)};
}

double KnowledgeGraph::frequency_weight(EntityId t) const {
  return std::log(static_cast<double>(degree(t)) + 1.0);
}

double KnowledgeGraph::average_degree() const {
  if (num_entities() == 0) return 0.0;
  return 2.0 * static_cast<double>(num_undirected_edges_) /
         static_cast<double>(num_entities());
}

TripleIndex::TripleIndex(const KnowledgeGraph& kg, std::span<const Triple> extra) {
  map_.reserve((kg.triples().size() + extra.size()) * 2);
  for (const Triple& t : kg.triples()) add(kg, t);
  for (const Triple& t : extra) add(kg, t);
  finalize();
}

void TripleIndex::add(const KnowledgeGraph& kg, const Triple& t) {
  finalized_ = false;
  map_[key(t.head, t.rel)].push_back(t.tail);
  map_[key(t.tail, kg.inverse(t.rel))].push_back(t.head);
}

void TripleIndex::finalize() {
  for (auto& [k, v] : map_) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  finalized_ = true;
}

bool TripleIndex::contains(EntityId h, RelationId r, EntityId t) const {
  const auto it = map_.find(key(h, r));
  if (it == map_.end()) return false;
  if (finalized_) {
    return std::binary_search(it->second.begin(), it->second.end(), t);
  }
  return std::find(it->second.begin(), it->second.end(), t) != it->second.end();
}

std::span<const EntityId> TripleIndex::tails(EntityId h, RelationId r) const {
  const auto it = map_.find(key(h, r));
  if (it == map_.end()) return {};
  return it->second;
}

}  // namespace satkgc
