#include "satkgc/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_set>

namespace satkgc {

void McmcConfig::validate(std::int64_t num_entities) const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
  if (k < 1) throw ConfigError("k must be positive");
  if (k >= num_entities) {
    throw ConfigError("k must be smaller than the number of entities");
  }
  if (dfs_depth < 1) throw ConfigError("dfs depth must be positive");
  if (burn_in < 0) throw ConfigError("burn-in must be nonnegative");
}

namespace {

constexpr double kCosineFloor = 1e-6;

// The k nearest entities to x by tail-embedding cosine, excluding x itself;
// exact scan, ties by smaller id.
std::vector<EntityId> nearest_k(const EncoderParams<double>& params, EntityId x,
                                int k) {
  const Eigen::Index n = params.num_entities();
  const auto xt = encode_tail(params, x);
  std::vector<std::pair<double, EntityId>> scored;
  scored.reserve(static_cast<std::size_t>(n) - 1);
  for (EntityId e = 0; e < n; ++e) {
    if (e == x) continue;
    scored.emplace_back(encode_tail(params, e).dot(xt), e);
  }
  const auto cmp = [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), cmp);
  std::vector<EntityId> out(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out[static_cast<std::size_t>(i)] = scored[static_cast<std::size_t>(i)].second;
  return out;
}

double mixture_density(const EncoderParams<double>& params, EntityId x,
                       EntityId y, int k, const std::vector<EntityId>& topk) {
  const double uniform = 0.5 / static_cast<double>(params.num_entities());
  const bool in_pool = std::find(topk.begin(), topk.end(), y) != topk.end();
  return uniform + (in_pool ? 0.5 / static_cast<double>(k) : 0.0);
}

double clamped_cos(const EncoderParams<double>& params,
                   const Eigen::VectorXd& x_hr, EntityId e) {
  return std::max(encode_tail(params, e).dot(x_hr), kCosineFloor);
}

}  // namespace

double proposal_density(const EncoderParams<double>& params, EntityId x,
                        EntityId y, int k) {
  return mixture_density(params, x, y, k, nearest_k(params, x, k));
}

Proposal propose(const EncoderParams<double>& params, EntityId x, int k, Rng& rng) {
  if (k >= params.num_entities()) {
    throw ConfigError("proposal pool k must be smaller than the entity count");
  }
  const auto topk = nearest_k(params, x, k);
  Proposal p;
  if (rng.uniform01() < 0.5) {
    p.entity = static_cast<EntityId>(rng.uniform_int(params.num_entities()));
  } else {
    p.entity = topk[static_cast<std::size_t>(rng.uniform_int(k))];
  }
  p.forward_density = mixture_density(params, x, p.entity, k, topk);
  p.reverse_density = mixture_density(params, p.entity, x, k,
                                      nearest_k(params, p.entity, k));
  return p;
}

EntityId mh_step(const EncoderParams<double>& params, EntityId hr_entity,
                 RelationId hr_rel, EntityId state, double alpha, int k,
                 Rng& rng) {
  const Proposal prop = propose(params, state, k, rng);
  const auto x_hr = encode_head_rel(params, hr_entity, hr_rel);
  const double target_new = std::pow(clamped_cos(params, x_hr, prop.entity), alpha);
  const double target_cur = std::pow(clamped_cos(params, x_hr, state), alpha);
  const double ratio =
      target_new / target_cur * prop.reverse_density / prop.forward_density;
  return rng.uniform01() <= std::min(1.0, ratio) ? prop.entity : state;
}

McmcSubgraph sample_mcmc_subgraph(const KnowledgeGraph& kg,
                                  const EncoderParams<double>& params,
                                  EntityId start, const McmcConfig& cfg,
                                  Rng& rng) {
  cfg.validate(kg.num_entities());
  kg.check_entity(start);

  // Depth-first traversal over outgoing forward triples, recording each
  // newly visited triple in preorder until dfs_depth are collected.
  std::vector<TripleId> path;
  {
    std::unordered_set<EntityId> seen{start};
    std::unordered_set<TripleId> taken;
    std::vector<std::pair<EntityId, std::size_t>> stack{{start, 0}};
    while (!stack.empty() && static_cast<int>(path.size()) < cfg.dfs_depth) {
      auto& [v, cursor] = stack.back();
      const auto out_triples = kg.triples_by_head(v);
      if (cursor >= out_triples.size()) {
        stack.pop_back();
        continue;
      }
      const TripleId t = out_triples[cursor++];
      if (!taken.insert(t).second) continue;
      path.push_back(t);
      const EntityId next = kg.triple(t).tail;
      if (seen.insert(next).second) stack.emplace_back(next, 0);
    }
  }
  if (path.empty()) {
    throw DataError("entity " + std::to_string(start) +
                    " has no outgoing triples to seed a DFS path");
  }

  EntityId state = static_cast<EntityId>(rng.uniform_int(kg.num_entities()));
  std::vector<TripleId> anchored;
  int burn_counter = 0;
  for (const TripleId tid : path) {
    const Triple& t = kg.triple(tid);
    if (burn_counter < cfg.burn_in) {
      ++burn_counter;
      state = mh_step(params, t.head, t.rel, state, cfg.alpha, cfg.k, rng);
      continue;
    }
    for (int j = 0; j < cfg.k; ++j) {
      const Proposal prop = propose(params, state, cfg.k, rng);
      state = prop.entity;
      // Anchor a random triple headed by the sampled entity; entities without
      // outgoing triples are redrawn a few times, then skipped.
      TripleId anchor = -1;
      EntityId candidate = state;
      for (int attempt = 0; attempt < 8; ++attempt) {
        const auto heads = kg.triples_by_head(candidate);
        if (!heads.empty()) {
          anchor = heads[static_cast<std::size_t>(
              rng.uniform_int(static_cast<std::int64_t>(heads.size())))];
          break;
        }
        candidate = propose(params, state, cfg.k, rng).entity;
      }
      if (anchor >= 0) {
        anchored.push_back(anchor);
      } else {
        std::cerr << "warning: mcmc chain found no outgoing triples near entity "
                  << state << "; skipping one negative\n";
      }
    }
  }

  McmcSubgraph out;
  out.base.center = path.front();
  out.base.sampler = "mcmc";
  {
    std::unordered_set<TripleId> uniq;
    for (const TripleId t : path) {
      if (uniq.insert(t).second) out.base.triples.push_back(t);
    }
    for (const TripleId t : anchored) {
      if (uniq.insert(t).second) out.base.triples.push_back(t);
    }
  }
  compute_center_distances(kg, out.base);

  out.rows.reserve((path.size() + anchored.size()) * 2);
  for (const TripleId t : path) out.rows.emplace_back(t, false);
  for (const TripleId t : anchored) out.rows.emplace_back(t, false);
  const std::size_t half = out.rows.size();
  for (std::size_t i = 0; i < half; ++i) {
    out.rows.emplace_back(out.rows[i].first, true);
  }
  return out;
}

}  // namespace satkgc
