#include "satkgc/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "satkgc/graph_algos.hpp"

namespace satkgc {

namespace {

void append_metric_row(std::string& out, const char* name, double overall,
                       double fwd, double bwd) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", name, overall, fwd, bwd);
  out += buf;
}

DirectionMetrics reduce(const std::vector<std::int64_t>& ranks) {
  DirectionMetrics m;
  m.num_queries = static_cast<std::int64_t>(ranks.size());
  if (ranks.empty()) return m;
  double mrr = 0.0;
  std::int64_t h1 = 0, h3 = 0, h10 = 0;
  for (const std::int64_t r : ranks) {
    mrr += 1.0 / static_cast<double>(r);
    h1 += r <= 1;
    h3 += r <= 3;
    h10 += r <= 10;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr = mrr / n;
  m.hits1 = static_cast<double>(h1) / n;
  m.hits3 = static_cast<double>(h3) / n;
  m.hits10 = static_cast<double>(h10) / n;
  return m;
}

}  // namespace

void Metrics::save_csv(const std::string& path) const {
  std::string out = "metric,overall,forward,backward\n";
  append_metric_row(out, "mrr", overall.mrr, forward.mrr, backward.mrr);
  append_metric_row(out, "hits1", overall.hits1, forward.hits1, backward.hits1);
  append_metric_row(out, "hits3", overall.hits3, forward.hits3, backward.hits3);
  append_metric_row(out, "hits10", overall.hits10, forward.hits10, backward.hits10);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "queries,%lld,%lld,%lld\n",
                static_cast<long long>(overall.num_queries),
                static_cast<long long>(forward.num_queries),
                static_cast<long long>(backward.num_queries));
  out += buf;
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write metrics: " + path);
  f << out;
}

std::string Metrics::aligned_text() const {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "%-8s %10s %10s %10s\n"
                "%-8s %10.4f %10.4f %10.4f\n"
                "%-8s %10.4f %10.4f %10.4f\n"
                "%-8s %10.4f %10.4f %10.4f\n"
                "%-8s %10.4f %10.4f %10.4f\n"
                "%-8s %10lld %10lld %10lld\n",
                "metric", "overall", "forward", "backward",
                "mrr", overall.mrr, forward.mrr, backward.mrr,
                "hits@1", overall.hits1, forward.hits1, backward.hits1,
                "hits@3", overall.hits3, forward.hits3, backward.hits3,
                "hits@10", overall.hits10, forward.hits10, backward.hits10,
                "queries", static_cast<long long>(overall.num_queries),
                static_cast<long long>(forward.num_queries),
                static_cast<long long>(backward.num_queries));
  return buf;
}

void RankDump::save_csv(const KnowledgeGraph& kg, const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write rank dump: " + path);
  out << "h,r,t,direction,rank,fps\n";
  for (const RankDumpRow& row : rows) {
    out << kg.entity_name(row.head) << ',' << kg.relation_name(row.rel) << ','
        << kg.entity_name(row.gold) << ','
        << (row.backward ? "backward" : "forward") << ',' << row.rank << ',';
    for (std::size_t i = 0; i < row.false_positives.size(); ++i) {
      if (i > 0) out << ';';
      out << kg.entity_name(row.false_positives[i]);
    }
    out << '\n';
  }
}

RankDump RankDump::load_csv(const KnowledgeGraph& kg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open rank dump: " + path);
  RankDump dump;
  std::string line;
  std::int64_t lineno = 0;
  const auto entity = [&](const std::string& name) {
    const EntityId e = kg.find_entity(name);
    if (e < 0) {
      throw DataError("rank dump " + path + " line " + std::to_string(lineno) +
                      ": unknown entity " + name);
    }
    return e;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1 || line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t pos = 0;
    for (int c = 0; c < 5; ++c) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) {
        throw DataError("rank dump " + path + " line " + std::to_string(lineno) +
                        ": expected 6 columns");
      }
      cols.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    cols.push_back(line.substr(pos));
    RankDumpRow row;
    row.head = entity(cols[0]);
    const bool inverse_name = cols[1].size() > 3 &&
                              cols[1].compare(cols[1].size() - 4, 4, "^-1") == 0;
    const std::string rel_name =
        inverse_name ? cols[1].substr(0, cols[1].size() - 4) : cols[1];
    const RelationId fwd = kg.find_relation(rel_name);
    if (fwd < 0) {
      throw DataError("rank dump " + path + " line " + std::to_string(lineno) +
                      ": unknown relation " + cols[1]);
    }
    row.rel = inverse_name ? kg.inverse(fwd) : fwd;
    row.gold = entity(cols[2]);
    row.backward = cols[3] == "backward";
    row.rank = std::stoll(cols[4]);
    if (!cols[5].empty()) {
      std::stringstream ss(cols[5]);
      std::string token;
      while (std::getline(ss, token, ';')) row.false_positives.push_back(entity(token));
    }
    dump.rows.push_back(std::move(row));
  }
  return dump;
}

EncoderParams<double>::Mat encode_all_tails(const EncoderParams<double>& params) {
  EncoderParams<double>::Mat table(params.num_entities(), params.dim());
  for (EntityId e = 0; e < params.num_entities(); ++e) {
    table.row(e) = encode_tail(params, e).transpose();
  }
  return table;
}

std::int64_t rank_tail(const EncoderParams<double>::Mat& tail_table,
                       const Eigen::VectorXd& x_hr, EntityId gold,
                       std::span<const EntityId> filter,
                       std::vector<EntityId>* false_positives) {
  const Eigen::VectorXd scores = tail_table * x_hr;
  const double gold_score = scores[gold];
  std::int64_t rank = 1;
  if (false_positives != nullptr) false_positives->clear();
  for (EntityId e = 0; e < scores.size(); ++e) {
    if (e == gold) continue;
    if (std::binary_search(filter.begin(), filter.end(), e)) continue;
    if (scores[e] >= gold_score) {  // ties count against the gold
      ++rank;
      if (false_positives != nullptr) false_positives->push_back(e);
    }
  }
  return rank;
}

std::int64_t rank_tail(const EncoderParams<double>& params,
                       const KnowledgeGraph& kg, EntityId head, RelationId rel,
                       EntityId gold, std::span<const EntityId> filter) {
  kg.check_entity(head);
  kg.check_entity(gold);
  const auto table = encode_all_tails(params);
  return rank_tail(table, encode_head_rel(params, head, rel), gold, filter);
}

Metrics evaluate(const EncoderParams<double>& params, const KnowledgeGraph& kg,
                 const TripleIndex& known, std::span<const Triple> test,
                 const EvalOptions& opts, RankDump* dump) {
  if (test.empty()) throw DataError("empty test set");
  for (const Triple& t : test) {
    kg.check_entity(t.head);
    kg.check_entity(t.tail);
    if (t.rel < 0 || t.rel >= kg.num_total_relations()) {
      throw DataError("test triple references unknown relation id " +
                      std::to_string(t.rel));
    }
  }

  const auto tail_table = encode_all_tails(params);
  const std::int64_t n = static_cast<std::int64_t>(test.size());
  std::vector<std::int64_t> forward_ranks(test.size());
  std::vector<std::int64_t> backward_ranks(test.size());
  std::vector<RankDumpRow> fwd_rows(dump != nullptr ? test.size() : 0);
  std::vector<RankDumpRow> bwd_rows(dump != nullptr ? test.size() : 0);
  const std::span<const EntityId> no_filter;

  parallel_for(n, opts.workers, [&](std::int64_t i) {
    const Triple& t = test[static_cast<std::size_t>(i)];
    const auto run = [&](EntityId head, RelationId rel, EntityId gold,
                         bool backward, std::int64_t& rank_out,
                         RankDumpRow* row_out) {
      const auto filter = opts.filtered ? known.tails(head, rel) : no_filter;
      std::vector<EntityId> fps;
      const std::int64_t rank =
          rank_tail(tail_table, encode_head_rel(params, head, rel), gold, filter,
                    dump != nullptr && opts.collect_false_positives ? &fps : nullptr);
      rank_out = rank;
      if (row_out != nullptr) {
        row_out->head = head;
        row_out->rel = rel;
        row_out->gold = gold;
        row_out->backward = backward;
        row_out->rank = rank;
        row_out->false_positives = std::move(fps);
      }
    };
    run(t.head, t.rel, t.tail, false, forward_ranks[static_cast<std::size_t>(i)],
        dump != nullptr ? &fwd_rows[static_cast<std::size_t>(i)] : nullptr);
    run(t.tail, kg.inverse(t.rel), t.head, true,
        backward_ranks[static_cast<std::size_t>(i)],
        dump != nullptr ? &bwd_rows[static_cast<std::size_t>(i)] : nullptr);
  });

  Metrics m;
  m.forward = reduce(forward_ranks);
  m.backward = reduce(backward_ranks);
  std::vector<std::int64_t> all(forward_ranks);
  all.insert(all.end(), backward_ranks.begin(), backward_ranks.end());
  m.overall = reduce(all);
  if (dump != nullptr) {
    dump->rows.clear();
    dump->rows.reserve(test.size() * 2);
    for (auto& row : fwd_rows) dump->rows.push_back(std::move(row));
    for (auto& row : bwd_rows) dump->rows.push_back(std::move(row));
  }
  return m;
}

std::vector<Triple> load_split(const KnowledgeGraph& kg, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open split file: " + path);
  std::vector<Triple> out;
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto p1 = line.find('\t');
    const auto p2 = p1 == std::string::npos ? std::string::npos : line.find('\t', p1 + 1);
    if (p1 == std::string::npos || p2 == std::string::npos) {
      throw DataError("malformed split line " + std::to_string(lineno) + " in " +
                      path);
    }
    Triple t;
    t.head = kg.find_entity(line.substr(0, p1));
    const RelationId rel = kg.find_relation(line.substr(p1 + 1, p2 - p1 - 1));
    t.tail = kg.find_entity(line.substr(p2 + 1));
    if (t.head < 0 || t.tail < 0) {
      throw DataError("split line " + std::to_string(lineno) + " in " + path +
                      " references an entity unseen in training "
                      "(inductive evaluation is unsupported)");
    }
    if (rel < 0) {
      throw DataError("split line " + std::to_string(lineno) + " in " + path +
                      " references an unseen relation");
    }
    t.rel = rel;
    out.push_back(t);
  }
  return out;
}

}  // namespace satkgc
