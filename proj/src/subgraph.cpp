#include "satkgc/subgraph.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <unordered_set>

#include "satkgc/graph_algos.hpp"

namespace satkgc {

const char* neighbor_mode_name(NeighborMode mode) {
  switch (mode) {
    case NeighborMode::kInverseDegree: return "brwr";
    case NeighborMode::kUniform: return "rwr";
    case NeighborMode::kDegreeProportional: return "brwr_p";
  }
  return "brwr";
}

NeighborMode parse_neighbor_mode(const std::string& name) {
  if (name == "brwr") return NeighborMode::kInverseDegree;
  if (name == "rwr") return NeighborMode::kUniform;
  if (name == "brwr_p") return NeighborMode::kDegreeProportional;
  throw ConfigError("unknown sampler mode: " + name);
}

void SamplerConfig::validate() const {
  if (!(restart_prob >= 0.0 && restart_prob <= 1.0)) {
    throw ConfigError("restart probability must be in [0, 1]");
  }
  if (max_triples < 1) throw ConfigError("max triples per subgraph must be >= 1");
}

std::int32_t Subgraph::distance_of(EntityId e) const {
  const auto it = dist_from_center_head.find(e);
  return it == dist_from_center_head.end() ? kUnreachable : it->second;
}

void SubgraphStore::add(Subgraph sub) {
  by_center_.emplace(sub.center, subgraphs_.size());
  subgraphs_.push_back(std::move(sub));
}

const Subgraph* SubgraphStore::by_center(TripleId center) const {
  const auto it = by_center_.find(center);
  return it == by_center_.end() ? nullptr : &subgraphs_[it->second];
}

void SubgraphStore::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write subgraph store: " + path);
  for (const Subgraph& sub : subgraphs_) {
    out << "C " << sub.center << '\n';
    if (sub.sampler != "brwr") out << "S " << sub.sampler << '\n';
    for (const TripleId t : sub.triples) out << "T " << t << '\n';
    std::vector<std::pair<EntityId, std::int32_t>> dist(
        sub.dist_from_center_head.begin(), sub.dist_from_center_head.end());
    std::sort(dist.begin(), dist.end());
    for (const auto& [e, d] : dist) {
      out << "D " << e << ' ';
      if (d == kUnreachable) {
        out << "INF";
      } else {
        out << d;
      }
      out << '\n';
    }
    out << '\n';
  }
}

SubgraphStore SubgraphStore::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open subgraph store: " + path);
  SubgraphStore store;
  Subgraph cur;
  bool open_record = false;
  std::string line;
  std::int64_t lineno = 0;
  const auto flush = [&] {
    if (open_record) {
      store.add(std::move(cur));
      cur = Subgraph{};
      open_record = false;
    }
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    const auto fail = [&](const char* why) {
      throw DataError("subgraph store " + path + " line " +
                      std::to_string(lineno) + ": " + why);
    };
    if (line.size() < 3 || line[1] != ' ') fail("expected '<tag> <payload>'");
    const std::string payload = line.substr(2);
    switch (line[0]) {
      case 'C':
        flush();
        cur.center = static_cast<TripleId>(std::stoll(payload));
        open_record = true;
        break;
      case 'S':
        if (!open_record) fail("S line before C");
        cur.sampler = payload;
        break;
      case 'T':
        if (!open_record) fail("T line before C");
        cur.triples.push_back(static_cast<TripleId>(std::stoll(payload)));
        break;
      case 'D': {
        if (!open_record) fail("D line before C");
        const auto sp = payload.find(' ');
        if (sp == std::string::npos) fail("malformed D line");
        const EntityId e = static_cast<EntityId>(std::stoll(payload.substr(0, sp)));
        const std::string d = payload.substr(sp + 1);
        cur.dist_from_center_head[e] =
            d == "INF" ? kUnreachable : static_cast<std::int32_t>(std::stoll(d));
        break;
      }
      default:
        fail("unknown record tag");
    }
  }
  flush();
  return store;
}

EntityId select_start_entity(const KnowledgeGraph& kg, const Triple& center, Rng& rng) {
  const double dh = static_cast<double>(kg.degree(center.head));
  const double dt = static_cast<double>(kg.degree(center.tail));
  assert(dh > 0.0 || dt > 0.0);
  if (dh <= 0.0) return center.tail;
  if (dt <= 0.0) return center.head;
  const double p_head = (1.0 / dh) / (1.0 / dh + 1.0 / dt);
  return rng.uniform01() < p_head ? center.head : center.tail;
}

namespace {

double neighbor_weight(const KnowledgeGraph& kg, EntityId v, NeighborMode mode) {
  const double d = static_cast<double>(kg.degree(v));
  switch (mode) {
    case NeighborMode::kInverseDegree: return 1.0 / d;
    case NeighborMode::kUniform: return 1.0;
    case NeighborMode::kDegreeProportional: return d;
  }
  return 1.0;
}

}  // namespace

std::vector<double> neighbor_distribution(const KnowledgeGraph& kg, EntityId u,
                                          NeighborMode mode) {
  const auto nbrs = kg.neighbors(u);
  if (nbrs.empty()) throw DataError("entity " + std::to_string(u) + " is isolated");
  std::vector<double> p(nbrs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    p[i] = neighbor_weight(kg, nbrs[i], mode);
    total += p[i];
  }
  for (double& w : p) w /= total;
  return p;
}

NeighborSampler::NeighborSampler(const KnowledgeGraph& kg, NeighborMode mode)
    : kg_(kg) {
  const std::int64_t n = kg.num_entities();
  offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  for (EntityId v = 0; v < n; ++v) {
    offsets_[static_cast<std::size_t>(v) + 1] =
        offsets_[static_cast<std::size_t>(v)] + kg.degree(v);
  }
  cdf_.resize(static_cast<std::size_t>(offsets_.back()));
  for (EntityId v = 0; v < n; ++v) {
    double acc = 0.0;
    std::int64_t pos = offsets_[static_cast<std::size_t>(v)];
    for (const EntityId u : kg.neighbors(v)) {
      acc += neighbor_weight(kg, u, mode);
      cdf_[static_cast<std::size_t>(pos++)] = acc;
    }
  }
}

EntityId NeighborSampler::sample(EntityId u, Rng& rng) const {
  const auto b = offsets_[static_cast<std::size_t>(u)];
  const auto e = offsets_[static_cast<std::size_t>(u) + 1];
  if (b == e) throw DataError("entity " + std::to_string(u) + " is isolated");
  const std::span<const double> seg(cdf_.data() + b, static_cast<std::size_t>(e - b));
  return kg_.neighbors(u)[rng.sample_cdf(seg)];
}

Subgraph sample_subgraph(const KnowledgeGraph& kg, TripleId center,
                         const SamplerConfig& cfg, Rng& rng,
                         const NeighborSampler& sampler) {
  cfg.validate();
  const Triple& ct = kg.triple(center);
  Subgraph sub;
  sub.center = center;
  sub.sampler = neighbor_mode_name(cfg.mode);
  sub.triples.push_back(center);
  if (cfg.max_triples <= 1) return sub;

  std::unordered_set<TripleId> collected{center};
  const EntityId start = select_start_entity(kg, ct, rng);
  EntityId cur = start;
  const std::int64_t step_cap = 50 * cfg.max_triples;
  for (std::int64_t step = 0;
       step < step_cap &&
       static_cast<std::int64_t>(sub.triples.size()) < cfg.max_triples;
       ++step) {
    if (rng.uniform01() < cfg.restart_prob) {
      cur = start;
      continue;
    }
    if (kg.degree(cur) == 0) {
      cur = start;
      continue;
    }
    const EntityId nxt = sampler.sample(cur, rng);
    for (const TripleId t : kg.edge_triples(cur, nxt)) {
      if (static_cast<std::int64_t>(sub.triples.size()) >= cfg.max_triples) break;
      if (collected.insert(t).second) sub.triples.push_back(t);
    }
    cur = nxt;
  }
  return sub;
}

Subgraph sample_subgraph(const KnowledgeGraph& kg, TripleId center,
                         const SamplerConfig& cfg, Rng& rng) {
  const NeighborSampler sampler(kg, cfg.mode);
  return sample_subgraph(kg, center, cfg, rng, sampler);
}

void compute_center_distances(const KnowledgeGraph& kg, Subgraph& sub) {
  std::vector<std::uint8_t> is_target(static_cast<std::size_t>(kg.num_entities()), 0);
  std::int64_t remaining = 0;
  const auto mark = [&](EntityId e) {
    if (!is_target[static_cast<std::size_t>(e)]) {
      is_target[static_cast<std::size_t>(e)] = 1;
      ++remaining;
    }
  };
  for (const TripleId t : sub.triples) {
    mark(kg.triple(t).head);
    mark(kg.triple(t).tail);
  }
  const EntityId source = kg.triple(sub.center).head;
  const auto dist = bfs_distances(kg, source, is_target, remaining);
  sub.dist_from_center_head.clear();
  sub.dist_from_center_head.reserve(static_cast<std::size_t>(remaining));
  for (EntityId e = 0; e < kg.num_entities(); ++e) {
    if (is_target[static_cast<std::size_t>(e)]) {
      sub.dist_from_center_head[e] = dist[static_cast<std::size_t>(e)];
    }
  }
}

std::int64_t approx_distance(const Subgraph& sub, EntityId h, EntityId t) {
  const auto hit = sub.dist_from_center_head.find(h);
  const auto tit = sub.dist_from_center_head.find(t);
  if (hit == sub.dist_from_center_head.end() ||
      tit == sub.dist_from_center_head.end()) {
    throw ContractViolation("approx_distance: entity without a distance entry");
  }
  if (hit->second == kUnreachable || tit->second == kUnreachable) {
    return kUnreachable;
  }
  const std::int64_t d1 = std::max<std::int64_t>(hit->second, 1);
  const std::int64_t d2 = std::max<std::int64_t>(tit->second, 1);
  return d1 * d2;
}

SubgraphStore precompute_all(const KnowledgeGraph& kg, const SamplerConfig& cfg,
                             int workers) {
  cfg.validate();
  const NeighborSampler sampler(kg, cfg.mode);
  std::vector<Subgraph> subs(static_cast<std::size_t>(kg.num_triples()));
  parallel_for(kg.num_triples(), workers, [&](std::int64_t i) {
    Rng rng(Rng::mix(cfg.seed, static_cast<std::uint64_t>(i)));
    try {
      Subgraph sub =
          sample_subgraph(kg, static_cast<TripleId>(i), cfg, rng, sampler);
      compute_center_distances(kg, sub);
      subs[static_cast<std::size_t>(i)] = std::move(sub);
    } catch (const std::exception& e) {
      throw DataError("subgraph for center " + std::to_string(i) + ": " + e.what());
    }
  });
  SubgraphStore store;
  for (auto& sub : subs) store.add(std::move(sub));
  return store;
}

}  // namespace satkgc
