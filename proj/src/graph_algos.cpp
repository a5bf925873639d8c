#include "satkgc/graph_algos.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <exception>
#include <mutex>
#include <thread>

namespace satkgc {

std::vector<std::int32_t> bfs_distances(const KnowledgeGraph& kg, EntityId source) {
  return bfs_distances(kg, source, {}, -1);
}

std::vector<std::int32_t> bfs_distances(const KnowledgeGraph& kg, EntityId source,
                                        const std::vector<std::uint8_t>& is_target,
                                        std::int64_t targets_remaining) {
  kg.check_entity(source);
  const std::size_t n = static_cast<std::size_t>(kg.num_entities());
  std::vector<std::int32_t> dist(n, kUnreachable);
  std::deque<EntityId> queue;
  dist[static_cast<std::size_t>(source)] = 0;
  queue.push_back(source);
  const bool early = !is_target.empty() && targets_remaining >= 0;
  if (early && is_target[static_cast<std::size_t>(source)]) --targets_remaining;
  while (!queue.empty()) {
    if (early && targets_remaining <= 0) break;
    const EntityId v = queue.front();
    queue.pop_front();
    const std::int32_t dv = dist[static_cast<std::size_t>(v)];
    for (const EntityId u : kg.neighbors(v)) {
      if (dist[static_cast<std::size_t>(u)] != kUnreachable) continue;
      dist[static_cast<std::size_t>(u)] = dv + 1;
      if (early && is_target[static_cast<std::size_t>(u)]) --targets_remaining;
      queue.push_back(u);
    }
  }
  return dist;
}

std::vector<double> brandes_betweenness(const KnowledgeGraph& kg,
                                        std::int64_t node_cap) {
  const std::int64_t n = kg.num_entities();
  if (n > node_cap) {
    throw DataError("betweenness: graph has " + std::to_string(n) +
                    " entities, above the exact-computation cap of " +
                    std::to_string(node_cap));
  }
  std::vector<double> bc(static_cast<std::size_t>(n), 0.0);
  if (n < 3) return bc;

  std::vector<std::int32_t> dist;
  std::vector<double> sigma;
  std::vector<double> delta;
  std::vector<EntityId> order;
  for (EntityId s = 0; s < n; ++s) {
    dist.assign(static_cast<std::size_t>(n), kUnreachable);
    sigma.assign(static_cast<std::size_t>(n), 0.0);
    delta.assign(static_cast<std::size_t>(n), 0.0);
    order.clear();
    dist[static_cast<std::size_t>(s)] = 0;
    sigma[static_cast<std::size_t>(s)] = 1.0;
    std::deque<EntityId> queue{s};
    while (!queue.empty()) {
      const EntityId v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (const EntityId w : kg.neighbors(v)) {
        if (dist[static_cast<std::size_t>(w)] == kUnreachable) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
        if (dist[static_cast<std::size_t>(w)] == dist[static_cast<std::size_t>(v)] + 1) {
          sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const EntityId w = *it;
      for (const EntityId v : kg.neighbors(w)) {
        if (dist[static_cast<std::size_t>(v)] + 1 == dist[static_cast<std::size_t>(w)]) {
          delta[static_cast<std::size_t>(v)] +=
              sigma[static_cast<std::size_t>(v)] / sigma[static_cast<std::size_t>(w)] *
              (1.0 + delta[static_cast<std::size_t>(w)]);
        }
      }
      if (w != s) bc[static_cast<std::size_t>(w)] += delta[static_cast<std::size_t>(w)];
    }
  }
  const double norm = static_cast<double>(n - 1) * static_cast<double>(n - 2);
  for (double& v : bc) v /= norm;
  return bc;
}

double gini(std::span<const double> counts) {
  const std::size_t n = counts.size();
  if (n == 0) return 0.0;
  std::vector<double> sorted(counts.begin(), counts.end());
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += sorted[i];
    weighted += static_cast<double>(i + 1) * sorted[i];
  }
  if (total <= 0.0) return 0.0;
  const double dn = static_cast<double>(n);
  return 2.0 * weighted / (dn * total) - (dn + 1.0) / dn;
}

double gini_counts(std::span<const std::uint64_t> counts) {
  std::vector<double> d(counts.begin(), counts.end());
  return gini(d);
}

std::vector<std::int64_t> pairs_by_distance(const KnowledgeGraph& kg,
                                            std::int32_t max_distance,
                                            int workers) {
  const std::int64_t n = kg.num_entities();
  std::vector<std::vector<std::int64_t>> per_source(
      static_cast<std::size_t>(n),
      std::vector<std::int64_t>(static_cast<std::size_t>(max_distance) + 1, 0));
  parallel_for(n, workers, [&](std::int64_t s) {
    const auto dist = bfs_distances(kg, static_cast<EntityId>(s));
    auto& counts = per_source[static_cast<std::size_t>(s)];
    for (std::int64_t v = s + 1; v < n; ++v) {
      const std::int32_t d = dist[static_cast<std::size_t>(v)];
      if (d >= 1 && d <= max_distance) ++counts[static_cast<std::size_t>(d)];
    }
  });
  std::vector<std::int64_t> out(static_cast<std::size_t>(max_distance) + 1, 0);
  for (const auto& counts : per_source) {
    for (std::size_t d = 1; d < counts.size(); ++d) out[d] += counts[d];
  }
  return out;
}

void parallel_for(std::int64_t n, int workers,
                  const std::function<void(std::int64_t)>& fn) {
  if (n <= 0) return;
  if (workers <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nthreads = static_cast<int>(std::min<std::int64_t>(workers, n));
  std::atomic<std::int64_t> cursor{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t) {
    threads.emplace_back([&] {
      for (;;) {
        const std::int64_t i = cursor.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          cursor.store(n);
          return;
        }
      }
    });
  }
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace satkgc
