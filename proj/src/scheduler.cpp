#include "satkgc/scheduler.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace satkgc {

const char* scheduler_mode_name(SchedulerMode mode) {
  switch (mode) {
    case SchedulerMode::kSaam: return "saam";
    case SchedulerMode::kRandom: return "random";
    case SchedulerMode::kMixed: return "mixed";
  }
  return "saam";
}

SchedulerMode parse_scheduler_mode(const std::string& name) {
  if (name == "saam") return SchedulerMode::kSaam;
  if (name == "random") return SchedulerMode::kRandom;
  if (name == "mixed") return SchedulerMode::kMixed;
  throw ConfigError("unknown scheduler mode: " + name);
}

void VisitCounter::save_triple_visits(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write counter file: " + path);
  for (std::size_t i = 0; i < triple_visits.size(); ++i) {
    out << i << '\t' << triple_visits[i] << '\n';
  }
}

std::vector<std::uint64_t> VisitCounter::load_counts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open counter file: " + path);
  std::vector<std::uint64_t> counts;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("counter file " + path + " line " + std::to_string(lineno) +
                      ": expected id<TAB>count");
    }
    const std::size_t id = static_cast<std::size_t>(std::stoull(line.substr(0, tab)));
    if (counts.size() <= id) counts.resize(id + 1, 0);
    counts[id] = std::stoull(line.substr(tab + 1));
  }
  return counts;
}

std::size_t next_center(const SubgraphStore& store, const VisitCounter& counter) {
  if (store.empty()) throw DataError("subgraph store is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < store.size(); ++i) {
    if (counter.center_selections[i] < counter.center_selections[best]) best = i;
  }
  return best;
}

BatchRow make_batch_row(const KnowledgeGraph& kg, const Subgraph* sub,
                        const Triple& t, TripleId id, bool inverse, bool topup) {
  BatchRow row;
  row.triple = id;
  row.inverse = inverse;
  row.topup = topup;
  if (!inverse) {
    row.hr_entity = t.head;
    row.hr_rel = t.rel;
    row.tail_entity = t.tail;
  } else {
    row.hr_entity = t.tail;
    row.hr_rel = kg.inverse(t.rel);
    row.tail_entity = t.head;
  }
  if (sub != nullptr) {
    row.head_dist = sub->distance_of(row.hr_entity);
    row.tail_dist = sub->distance_of(row.tail_entity);
  }
  row.psi = kg.frequency_weight(row.tail_entity);
  return row;
}

void rebuild_exclusion_mask(const TripleIndex& index, MiniBatch& batch) {
  const std::size_t b = batch.rows.size();
  batch.excluded.assign(b * b, 0);
  for (std::size_t i = 0; i < b; ++i) {
    const BatchRow& ri = batch.rows[i];
    for (std::size_t j = 0; j < b; ++j) {
      if (index.contains(ri.hr_entity, ri.hr_rel, batch.rows[j].tail_entity)) {
        batch.excluded[i * b + j] = 1;
      }
    }
  }
}

namespace {

// n distinct uniform picks from the id list (partial Fisher-Yates).
std::vector<TripleId> pick_distinct(std::span<const TripleId> ids, std::size_t n,
                                    Rng& rng) {
  std::vector<TripleId> pool(ids.begin(), ids.end());
  n = std::min(n, pool.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j =
        i + static_cast<std::size_t>(rng.uniform_int(
                static_cast<std::int64_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(n);
  return pool;
}

void top_up_from_corpus(const KnowledgeGraph& kg, std::vector<TripleId>& picks,
                        std::vector<std::uint8_t>& topup_flags, std::size_t want,
                        Rng& rng) {
  std::unordered_set<TripleId> taken(picks.begin(), picks.end());
  while (picks.size() < want &&
         taken.size() < static_cast<std::size_t>(kg.num_triples())) {
    const TripleId t = static_cast<TripleId>(rng.uniform_int(kg.num_triples()));
    if (taken.insert(t).second) {
      picks.push_back(t);
      topup_flags.push_back(1);
    }
  }
}

MiniBatch finish_batch(const KnowledgeGraph& kg, const TripleIndex& index,
                       const Subgraph* sub, std::vector<TripleId> picks,
                       std::vector<std::uint8_t> topup_flags) {
  MiniBatch batch;
  batch.center = sub != nullptr ? sub->center : TripleId{-1};
  const std::size_t half = picks.size();
  batch.rows.reserve(half * 2);
  for (std::size_t i = 0; i < half; ++i) {
    batch.rows.push_back(make_batch_row(kg, sub, kg.triple(picks[i]), picks[i],
                                        false, topup_flags[i] != 0));
  }
  for (std::size_t i = 0; i < half; ++i) {
    batch.rows.push_back(make_batch_row(kg, sub, kg.triple(picks[i]), picks[i],
                                        true, topup_flags[i] != 0));
  }
  rebuild_exclusion_mask(index, batch);
  return batch;
}

void check_batch_size(int batch_size) {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("batch size must be even and >= 2, got " +
                      std::to_string(batch_size));
  }
}

}  // namespace

MiniBatch assemble_saam_batch(const KnowledgeGraph& kg, const TripleIndex& index,
                              const Subgraph& sub, int batch_size, Rng& rng) {
  check_batch_size(batch_size);
  const std::size_t want = static_cast<std::size_t>(batch_size) / 2;
  std::vector<TripleId> picks = pick_distinct(sub.triples, want, rng);
  std::vector<std::uint8_t> topup_flags(picks.size(), 0);
  top_up_from_corpus(kg, picks, topup_flags, want, rng);
  return finish_batch(kg, index, &sub, std::move(picks), std::move(topup_flags));
}

void record_visits(VisitCounter& counter, const MiniBatch& batch) {
  for (const BatchRow& row : batch.rows) {
    if (row.inverse) continue;
    const std::size_t id = static_cast<std::size_t>(row.triple);
    if (id >= counter.triple_visits.size()) {
      throw ContractViolation("record_visits: unknown triple id " +
                              std::to_string(row.triple));
    }
    ++counter.triple_visits[id];
  }
}

BatchScheduler::BatchScheduler(const KnowledgeGraph& kg, const SubgraphStore& store,
                               SchedulerMode mode, std::uint64_t seed)
    : kg_(kg),
      store_(store),
      mode_(mode),
      index_(kg),
      rng_(Rng::mix(seed, 0x5cedULL)) {
  counter_.triple_visits.assign(static_cast<std::size_t>(kg.num_triples()), 0);
  counter_.center_selections.assign(store.size(), 0);
}

TripleId BatchScheduler::draw_from_permutation() {
  if (cursor_ >= permutation_.size()) {
    permutation_.resize(static_cast<std::size_t>(kg_.num_triples()));
    std::iota(permutation_.begin(), permutation_.end(), TripleId{0});
    rng_.shuffle(permutation_.begin(), permutation_.end());
    cursor_ = 0;
  }
  return permutation_[cursor_++];
}

MiniBatch BatchScheduler::next_batch(int batch_size) {
  check_batch_size(batch_size);
  const std::size_t want = static_cast<std::size_t>(batch_size) / 2;

  if (mode_ == SchedulerMode::kRandom) {
    std::vector<TripleId> picks;
    std::unordered_set<TripleId> in_batch;
    while (picks.size() < want &&
           in_batch.size() < static_cast<std::size_t>(kg_.num_triples())) {
      const TripleId t = draw_from_permutation();
      if (in_batch.insert(t).second) picks.push_back(t);
    }
    // Proximity data comes from the first pick's subgraph when one exists;
    // random batches have no center of their own.
    const Subgraph* sub =
        picks.empty() ? nullptr : store_.by_center(picks.front());
    std::vector<std::uint8_t> flags(picks.size(), 0);
    MiniBatch batch =
        finish_batch(kg_, index_, sub, std::move(picks), std::move(flags));
    record_visits(counter_, batch);
    return batch;
  }

  const std::size_t pos = next_center(store_, counter_);
  ++counter_.center_selections[pos];
  const Subgraph& sub = store_.at(pos);

  std::vector<TripleId> picks;
  std::vector<std::uint8_t> topup_flags;
  if (mode_ == SchedulerMode::kSaam) {
    picks = pick_distinct(sub.triples, want, rng_);
    topup_flags.assign(picks.size(), 0);
    top_up_from_corpus(kg_, picks, topup_flags, want, rng_);
  } else {  // mixed: half SaaM picks, half random triples
    const std::size_t n_random = want / 2;
    const std::size_t n_sub = want - n_random;
    picks = pick_distinct(sub.triples, n_sub, rng_);
    topup_flags.assign(picks.size(), 0);
    std::unordered_set<TripleId> taken(picks.begin(), picks.end());
    while (picks.size() < want &&
           taken.size() < static_cast<std::size_t>(kg_.num_triples())) {
      const TripleId t = static_cast<TripleId>(rng_.uniform_int(kg_.num_triples()));
      if (taken.insert(t).second) {
        picks.push_back(t);
        topup_flags.push_back(0);
      }
    }
  }
  MiniBatch batch =
      finish_batch(kg_, index_, &sub, std::move(picks), std::move(topup_flags));
  record_visits(counter_, batch);
  return batch;
}

}  // namespace satkgc
