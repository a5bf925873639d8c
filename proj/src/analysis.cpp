#include "satkgc/analysis.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "satkgc/graph_algos.hpp"

namespace satkgc {

void StructReport::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [name, rows] : tables) {
    {
      std::ofstream csv(dir + "/" + name + ".csv", std::ios::binary);
      if (!csv) throw DataError("cannot write report table: " + name);
      csv << "label,value\n";
      char buf[128];
      for (const auto& [label, value] : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g", value);
        csv << label << ',' << buf << '\n';
      }
    }
    {
      std::ofstream dat(dir + "/" + name + ".dat", std::ios::binary);
      char buf[128];
      for (std::size_t i = 0; i < rows.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu %.17g", i, rows[i].second);
        dat << buf << '\n';
      }
    }
  }
}

std::vector<DistanceRatio> fp_ratio_by_distance(const KnowledgeGraph& kg,
                                                const RankDump& dump,
                                                std::int32_t max_distance,
                                                int workers) {
  if (dump.rows.empty()) throw DataError("empty rank dump");

  // Distances from each distinct query head, one BFS per head.
  std::vector<EntityId> heads;
  {
    std::unordered_set<EntityId> seen;
    for (const RankDumpRow& row : dump.rows) {
      if (!row.false_positives.empty() && seen.insert(row.head).second) {
        heads.push_back(row.head);
      }
    }
  }
  std::vector<std::vector<std::int32_t>> head_dist(heads.size());
  parallel_for(static_cast<std::int64_t>(heads.size()), workers,
               [&](std::int64_t i) {
                 head_dist[static_cast<std::size_t>(i)] =
                     bfs_distances(kg, heads[static_cast<std::size_t>(i)]);
               });
  std::unordered_map<EntityId, std::size_t> head_pos;
  for (std::size_t i = 0; i < heads.size(); ++i) head_pos[heads[i]] = i;

  std::unordered_map<std::int32_t, std::int64_t> fp_at;
  std::int32_t observed_max = 0;
  for (const RankDumpRow& row : dump.rows) {
    if (row.false_positives.empty()) continue;
    const auto& dist = head_dist[head_pos.at(row.head)];
    for (const EntityId fp : row.false_positives) {
      const std::int32_t d = dist[static_cast<std::size_t>(fp)];
      if (d < 1) continue;  // unreachable or the head itself
      ++fp_at[d];
      observed_max = std::max(observed_max, d);
    }
  }
  const std::int32_t limit = max_distance > 0 ? max_distance
                             : observed_max > 0 ? observed_max
                                                : 1;
  const auto pairs = pairs_by_distance(kg, limit, workers);

  std::vector<DistanceRatio> out;
  for (std::int32_t d = 1; d <= limit; ++d) {
    DistanceRatio row;
    row.distance = d;
    const auto it = fp_at.find(d);
    row.fp_count = it == fp_at.end() ? 0 : it->second;
    row.pair_count = pairs[static_cast<std::size_t>(d)];
    row.ratio = row.pair_count > 0
                    ? static_cast<double>(row.fp_count) /
                          static_cast<double>(row.pair_count)
                    : 0.0;
    out.push_back(row);
  }
  return out;
}

std::vector<DegreeGroupRatio> fp_ratio_by_degree_group(
    const KnowledgeGraph& kg, const RankDump& dump,
    bool per_distinct_degree_average) {
  std::vector<std::int64_t> distinct;
  {
    std::unordered_set<std::int64_t> seen;
    for (EntityId e = 0; e < kg.num_entities(); ++e) seen.insert(kg.degree(e));
    distinct.assign(seen.begin(), seen.end());
    std::sort(distinct.begin(), distinct.end());
  }
  if (distinct.size() < 5) {
    throw DataError("degree grouping needs at least 5 distinct degrees, found " +
                    std::to_string(distinct.size()));
  }

  constexpr std::size_t kGroups = 5;
  const std::size_t base = distinct.size() / kGroups;
  const std::size_t remainder = distinct.size() % kGroups;
  std::vector<DegreeGroupRatio> groups(kGroups);
  std::vector<std::size_t> group_sizes(kGroups, base);
  for (std::size_t g = kGroups - remainder; g < kGroups; ++g) ++group_sizes[g];

  std::unordered_map<std::int64_t, std::size_t> degree_group;
  std::size_t cursor = 0;
  for (std::size_t g = 0; g < kGroups; ++g) {
    groups[g].min_degree = distinct[cursor];
    for (std::size_t i = 0; i < group_sizes[g]; ++i) {
      degree_group[distinct[cursor]] = g;
      groups[g].max_degree = distinct[cursor];
      ++cursor;
    }
  }

  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    ++groups[degree_group.at(kg.degree(e))].entity_count;
  }
  for (const RankDumpRow& row : dump.rows) {
    for (const EntityId fp : row.false_positives) {
      groups[degree_group.at(kg.degree(fp))].fp_count += 1.0;
    }
  }
  for (std::size_t g = 0; g < kGroups; ++g) {
    if (per_distinct_degree_average) {
      groups[g].fp_count /= static_cast<double>(group_sizes[g]);
    }
    groups[g].ratio = groups[g].entity_count > 0
                          ? groups[g].fp_count /
                                static_cast<double>(groups[g].entity_count)
                          : 0.0;
  }
  return groups;
}

std::vector<std::uint64_t> entity_visit_counts(
    const KnowledgeGraph& kg, std::span<const std::uint64_t> triple_visits) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(kg.num_entities()), 0);
  for (std::size_t t = 0; t < triple_visits.size(); ++t) {
    const Triple& tr = kg.triple(static_cast<TripleId>(t));
    counts[static_cast<std::size_t>(tr.head)] += triple_visits[t];
    counts[static_cast<std::size_t>(tr.tail)] += triple_visits[t];
  }
  return counts;
}

StructReport distribution_reports(const KnowledgeGraph& kg,
                                  std::span<const std::uint64_t> triple_visits) {
  StructReport report;
  const auto entity_counts = entity_visit_counts(kg, triple_visits);
  const double entity_total = std::max<double>(
      1.0, static_cast<double>(
               std::accumulate(entity_counts.begin(), entity_counts.end(),
                               std::uint64_t{0})));

  // Entity frequency ratios ordered by ascending degree.
  std::vector<EntityId> by_degree(static_cast<std::size_t>(kg.num_entities()));
  std::iota(by_degree.begin(), by_degree.end(), EntityId{0});
  std::stable_sort(by_degree.begin(), by_degree.end(),
                   [&](EntityId a, EntityId b) { return kg.degree(a) < kg.degree(b); });
  auto& freq = report.tables["entity_frequency_by_degree"];
  for (const EntityId e : by_degree) {
    freq.emplace_back(kg.entity_name(e),
                      static_cast<double>(entity_counts[static_cast<std::size_t>(e)]) /
                          entity_total);
  }

  // Occurrence curves, most-visited first.
  std::vector<std::uint64_t> triples_sorted(triple_visits.begin(), triple_visits.end());
  std::sort(triples_sorted.begin(), triples_sorted.end(), std::greater<>());
  auto& tcurve = report.tables["triple_visits_desc"];
  for (std::size_t i = 0; i < triples_sorted.size(); ++i) {
    tcurve.emplace_back(std::to_string(i), static_cast<double>(triples_sorted[i]));
  }
  std::vector<std::uint64_t> entities_sorted(entity_counts);
  std::sort(entities_sorted.begin(), entities_sorted.end(), std::greater<>());
  auto& ecurve = report.tables["entity_visits_desc"];
  for (std::size_t i = 0; i < entities_sorted.size(); ++i) {
    ecurve.emplace_back(std::to_string(i), static_cast<double>(entities_sorted[i]));
  }

  auto& gini_table = report.tables["gini"];
  gini_table.emplace_back("triple_visits", gini_counts(triple_visits));
  gini_table.emplace_back("entity_visits", gini_counts(entity_counts));
  return report;
}

std::vector<double> negative_score_histogram(const EncoderParams<double>& params,
                                             std::span<const MiniBatch> batches,
                                             std::span<const double> bin_edges) {
  if (bin_edges.size() < 2) throw ConfigError("need at least two bin edges");
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw ConfigError("bin edges must be strictly increasing");
    }
  }
  if (bin_edges.front() > -1.0 || bin_edges.back() < 1.0) {
    throw ConfigError("bin edges must cover [-1, 1]");
  }
  std::vector<std::int64_t> counts(bin_edges.size() - 1, 0);
  std::int64_t total = 0;
  for (const MiniBatch& batch : batches) {
    for (const double c : in_batch_negative_cosines(params, batch)) {
      auto it = std::upper_bound(bin_edges.begin(), bin_edges.end(), c);
      std::size_t bin = static_cast<std::size_t>(
          std::max<std::ptrdiff_t>(0, it - bin_edges.begin() - 1));
      bin = std::min(bin, counts.size() - 1);
      ++counts[bin];
      ++total;
    }
  }
  std::vector<double> fractions(counts.size(), 0.0);
  if (total > 0) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      fractions[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
  }
  return fractions;
}

std::vector<DistanceSimilarity> distance_similarity_table(
    const EncoderParams<double>& params, const KnowledgeGraph& kg,
    std::int32_t max_distance, std::int64_t sample_budget, std::uint64_t seed) {
  if (max_distance < 1) throw ConfigError("max distance must be >= 1");
  if (sample_budget < 1) throw ConfigError("sample budget must be >= 1");

  // Reservoir-sample unordered pairs per distance while streaming all BFS
  // rows, so the exhaustive case (count <= budget) keeps every pair.
  std::vector<std::vector<std::pair<EntityId, EntityId>>> reservoir(
      static_cast<std::size_t>(max_distance) + 1);
  std::vector<std::int64_t> seen(static_cast<std::size_t>(max_distance) + 1, 0);
  Rng rng(Rng::mix(seed, 0xd157));
  for (EntityId u = 0; u < kg.num_entities(); ++u) {
    const auto dist = bfs_distances(kg, u);
    for (EntityId v = u + 1; v < kg.num_entities(); ++v) {
      const std::int32_t d = dist[static_cast<std::size_t>(v)];
      if (d < 1 || d > max_distance) continue;
      auto& bucket = reservoir[static_cast<std::size_t>(d)];
      ++seen[static_cast<std::size_t>(d)];
      if (static_cast<std::int64_t>(bucket.size()) < sample_budget) {
        bucket.emplace_back(u, v);
      } else {
        const std::int64_t j = rng.uniform_int(seen[static_cast<std::size_t>(d)]);
        if (j < sample_budget) bucket[static_cast<std::size_t>(j)] = {u, v};
      }
    }
  }

  const auto tails = encode_all_tails(params);
  std::vector<DistanceSimilarity> out;
  for (std::int32_t d = 1; d <= max_distance; ++d) {
    DistanceSimilarity row;
    row.distance = d;
    const auto& bucket = reservoir[static_cast<std::size_t>(d)];
    row.pair_count = static_cast<std::int64_t>(bucket.size());
    if (!bucket.empty()) {
      double sum = 0.0;
      for (const auto& [u, v] : bucket) sum += tails.row(u).dot(tails.row(v));
      row.mean_cosine = sum / static_cast<double>(bucket.size());
    }
    out.push_back(row);
  }
  return out;
}

const char* relation_kind_name(RelationKind kind) {
  switch (kind) {
    case RelationKind::kOneToOne: return "1-1";
    case RelationKind::kOneToMany: return "1-N";
    case RelationKind::kManyToOne: return "N-1";
    case RelationKind::kManyToMany: return "N-N";
  }
  return "1-1";
}

std::vector<RelationClassStats> relation_type_breakdown(const KnowledgeGraph& kg,
                                                        const RankDump& dump) {
  if (dump.rows.empty()) throw DataError("empty rank dump");
  constexpr double kThreshold = 1.5;
  const std::size_t num_rel = static_cast<std::size_t>(kg.num_forward_relations());
  std::vector<std::int64_t> triple_count(num_rel, 0);
  std::vector<std::unordered_set<EntityId>> heads(num_rel), tails(num_rel);
  for (const Triple& t : kg.triples()) {
    const std::size_t r = static_cast<std::size_t>(t.rel);
    ++triple_count[r];
    heads[r].insert(t.head);
    tails[r].insert(t.tail);
  }
  std::vector<RelationKind> kind(num_rel);
  for (std::size_t r = 0; r < num_rel; ++r) {
    if (triple_count[r] == 0) {
      kind[r] = RelationKind::kOneToOne;
      continue;
    }
    const double tails_per_head =
        static_cast<double>(triple_count[r]) / static_cast<double>(heads[r].size());
    const double heads_per_tail =
        static_cast<double>(triple_count[r]) / static_cast<double>(tails[r].size());
    if (tails_per_head > kThreshold) {
      kind[r] = heads_per_tail > kThreshold ? RelationKind::kManyToMany
                                            : RelationKind::kOneToMany;
    } else {
      kind[r] = heads_per_tail > kThreshold ? RelationKind::kManyToOne
                                            : RelationKind::kOneToOne;
    }
  }

  std::vector<RelationClassStats> stats(4);
  for (std::size_t c = 0; c < 4; ++c) stats[c].kind = static_cast<RelationKind>(c);
  for (std::size_t r = 0; r < num_rel; ++r) {
    stats[static_cast<std::size_t>(kind[r])].triple_share +=
        static_cast<double>(triple_count[r]);
  }
  const double total = static_cast<double>(kg.num_triples());
  for (auto& s : stats) s.triple_share = total > 0 ? s.triple_share / total : 0.0;

  std::vector<std::int64_t> hit(4, 0);
  std::vector<std::int64_t> n(4, 0);
  for (const RankDumpRow& row : dump.rows) {
    const std::size_t c = static_cast<std::size_t>(
        kind[static_cast<std::size_t>(kg.forward_form(row.rel))]);
    ++n[c];
    if (row.rank == 1) ++hit[c];
  }
  for (std::size_t c = 0; c < 4; ++c) {
    stats[c].num_queries = n[c];
    stats[c].hits1 =
        n[c] > 0 ? static_cast<double>(hit[c]) / static_cast<double>(n[c]) : 0.0;
  }
  return stats;
}

std::vector<CentralityStats> centrality_stats(
    const KnowledgeGraph& kg, std::span<const std::vector<TripleId>> triple_sets,
    std::int64_t node_cap) {
  for (const auto& set : triple_sets) {
    if (set.empty()) throw DataError("centrality stats on an empty triple set");
  }
  const auto betweenness = brandes_betweenness(kg, node_cap);
  std::vector<CentralityStats> out;
  for (const auto& set : triple_sets) {
    std::unordered_set<EntityId> entities;
    for (const TripleId t : set) {
      entities.insert(kg.triple(t).head);
      entities.insert(kg.triple(t).tail);
    }
    CentralityStats stats;
    stats.num_entities = static_cast<std::int64_t>(entities.size());
    for (const EntityId e : entities) {
      stats.mean_degree += static_cast<double>(kg.degree(e));
      stats.mean_betweenness += betweenness[static_cast<std::size_t>(e)];
    }
    stats.mean_degree /= static_cast<double>(entities.size());
    stats.mean_betweenness /= static_cast<double>(entities.size());
    out.push_back(stats);
  }
  return out;
}

std::vector<LossComparison> fp_loss_comparison(
    const EncoderParams<double>& params, const KnowledgeGraph& kg,
    const SubgraphStore& store, int batch_size, const LossConfig& loss_cfg,
    std::uint64_t seed, std::span<const std::span<const LossProbeItem>> item_sets) {
  const TripleIndex index(kg);
  std::vector<LossComparison> out;
  for (const auto& items : item_sets) {
    LossComparison cmp;
    for (const LossProbeItem& item : items) {
      const Subgraph* sub = store.by_center(item.center);
      if (sub == nullptr) {
        throw DataError("no stored subgraph for center triple " +
                        std::to_string(item.center));
      }
      Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(item.center)));
      MiniBatch batch = assemble_saam_batch(kg, index, *sub, batch_size, rng);
      const std::size_t half = batch.size() / 2;
      batch.rows[0] = make_batch_row(kg, sub, item.triple, TripleId{-1}, false, false);
      batch.rows[half] = make_batch_row(kg, sub, item.triple, TripleId{-1}, true, false);
      rebuild_exclusion_mask(index, batch);
      const auto loss = batch_loss(params, batch, loss_cfg);
      cmp.mean_plain += loss.per_row[0];
      cmp.mean_weighted += batch.rows[0].psi * loss.per_row[0];
      ++cmp.count;
    }
    if (cmp.count > 0) {
      cmp.mean_plain /= static_cast<double>(cmp.count);
      cmp.mean_weighted /= static_cast<double>(cmp.count);
    }
    out.push_back(cmp);
  }
  return out;
}

}  // namespace satkgc
