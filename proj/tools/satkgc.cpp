#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "satkgc/analysis.hpp"
#include "satkgc/checkpoint.hpp"
#include "satkgc/eval.hpp"
#include "satkgc/graph_algos.hpp"
#include "satkgc/kg.hpp"
#include "satkgc/loss.hpp"
#include "satkgc/mcmc.hpp"
#include "satkgc/scheduler.hpp"
#include "satkgc/subgraph.hpp"
#include "satkgc/train.hpp"

namespace {

using namespace satkgc;

int default_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void write_resolved_config(CLI::App* sub, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/run_config.txt", std::ios::binary);
  out << sub->config_to_str(true, false);
}

std::string csv_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct DataPaths {
  std::string train;
  std::string entities;
  std::string valid;
  std::string test;
};

void add_data_options(CLI::App* sub, DataPaths& paths, bool need_test = false) {
  sub->add_option("--train", paths.train, "training triples (head<TAB>rel<TAB>tail)")
      ->required();
  sub->add_option("--entities", paths.entities,
                  "optional entity metadata (id<TAB>name<TAB>description)");
  sub->add_option("--valid", paths.valid, "validation triples");
  auto* test = sub->add_option("--test", paths.test, "test triples");
  if (need_test) test->required();
}

KnowledgeGraph load_graph(const DataPaths& paths) {
  return KnowledgeGraph::ingest(paths.train, paths.entities);
}

// ---------------------------------------------------------------- ingest --

struct IngestArgs {
  DataPaths data;
  std::string out;
};

void run_ingest(CLI::App* sub, const IngestArgs& args) {
  const KnowledgeGraph kg = load_graph(args.data);
  std::filesystem::create_directories(args.out);
  kg.export_to(args.out + "/graph");
  std::int64_t valid_count = 0;
  std::int64_t test_count = 0;
  if (!args.data.valid.empty()) {
    valid_count = static_cast<std::int64_t>(load_split(kg, args.data.valid).size());
  }
  if (!args.data.test.empty()) {
    test_count = static_cast<std::int64_t>(load_split(kg, args.data.test).size());
  }
  {
    std::ofstream summary(args.out + "/summary.txt", std::ios::binary);
    summary << "entities\t" << kg.num_entities() << '\n'
            << "forward_relations\t" << kg.num_forward_relations() << '\n'
            << "total_relations\t" << kg.num_total_relations() << '\n'
            << "triples\t" << kg.num_triples() << '\n'
            << "undirected_edges\t" << kg.num_undirected_edges() << '\n'
            << "isolated_entities\t" << kg.num_isolated_entities() << '\n'
            << "average_degree\t" << csv_double(kg.average_degree()) << '\n'
            << "valid_triples\t" << valid_count << '\n'
            << "test_triples\t" << test_count << '\n';
  }
  write_resolved_config(sub, args.out);
  std::cout << "ingested " << kg.num_triples() << " triples over "
            << kg.num_entities() << " entities and "
            << kg.num_forward_relations() << " relations\n";
}

// ---------------------------------------------------------------- sample --

struct SampleArgs {
  DataPaths data;
  std::string out;
  std::string sampler = "brwr";
  double restart_prob = 1.0 / 25.0;
  std::int64_t max_triples = 10000;
  std::uint64_t seed = 0;
  int workers = default_workers();
  // mcmc only
  std::string checkpoint;
  double alpha = 0.5;
  int neighbors_k = 16;
  int batch_size = 32;
  int dfs_depth = 0;  // 0 = batch_size / 2
  int burn_in = 100;
  int dim = 32;
};

void run_sample(CLI::App* sub, const SampleArgs& args) {
  const KnowledgeGraph kg = load_graph(args.data);
  std::filesystem::create_directories(args.out);
  SubgraphStore store;
  if (args.sampler == "mcmc") {
    EncoderParams<double> params =
        args.checkpoint.empty()
            ? EncoderParams<double>::random_init(kg.num_entities(),
                                                 kg.num_total_relations(),
                                                 args.dim, args.seed)
            : load_checkpoint(args.checkpoint);
    McmcConfig cfg;
    cfg.alpha = args.alpha;
    cfg.k = args.neighbors_k;
    cfg.dfs_depth = args.dfs_depth > 0 ? args.dfs_depth : args.batch_size / 2;
    cfg.burn_in = args.burn_in;
    cfg.seed = args.seed;
    std::int64_t skipped = 0;
    for (EntityId e = 0; e < kg.num_entities(); ++e) {
      if (kg.triples_by_head(e).empty()) {
        ++skipped;
        continue;
      }
      Rng rng(Rng::mix(args.seed, static_cast<std::uint64_t>(e)));
      McmcSubgraph sampled = sample_mcmc_subgraph(kg, params, e, cfg, rng);
      if (store.by_center(sampled.base.center) == nullptr) {
        store.add(std::move(sampled.base));
      }
    }
    if (skipped > 0) {
      std::cerr << "note: " << skipped
                << " entities without outgoing triples were skipped as chain "
                   "starts\n";
    }
  } else {
    SamplerConfig cfg;
    cfg.restart_prob = args.restart_prob;
    cfg.max_triples = args.max_triples;
    cfg.mode = parse_neighbor_mode(args.sampler);
    cfg.seed = args.seed;
    store = precompute_all(kg, cfg, args.workers);
  }
  store.save(args.out + "/subgraphs.txt");
  write_resolved_config(sub, args.out);
  std::cout << "sampled " << store.size() << " subgraphs\n";
}

// ----------------------------------------------------------------- train --

struct TrainArgs {
  DataPaths data;
  std::string store;
  std::string out;
  std::string scheduler = "saam";
  int batch_size = 64;
  int dim = 32;
  int epochs = 1;
  double learning_rate = 1e-3;
  double gamma = 0.02;
  std::uint64_t seed = 0;
  std::vector<std::string> ablate;
};

void run_train(CLI::App* sub, const TrainArgs& args) {
  const KnowledgeGraph kg = load_graph(args.data);
  const SubgraphStore store = SubgraphStore::load(args.store);
  if (store.empty()) throw DataError("subgraph store is empty: " + args.store);

  TrainConfig cfg;
  cfg.batch_size = args.batch_size;
  cfg.dim = args.dim;
  cfg.epochs = args.epochs;
  cfg.optim.learning_rate = args.learning_rate;
  cfg.loss.margin = args.gamma;
  cfg.seed = args.seed;
  cfg.scheduler = parse_scheduler_mode(args.scheduler);
  for (const std::string& a : args.ablate) {
    if (a == "pcl") {
      cfg.loss.use_hardness = false;
    } else if (a == "fmt") {
      cfg.loss.use_freq_weight = false;
    } else if (a == "saam") {
      cfg.scheduler = SchedulerMode::kRandom;
    } else if (a == "infonce") {
      cfg.loss.use_hardness = false;
      cfg.loss.use_freq_weight = false;
      cfg.loss.margin = 0.0;
      cfg.train_tau = false;
      cfg.train_beta = false;
    } else {
      throw ConfigError("unknown ablation: " + a +
                        " (expected pcl, fmt, saam, or infonce)");
    }
  }

  std::filesystem::create_directories(args.out);
  const TrainResult result = train(kg, store, cfg);
  save_checkpoint(result.params, args.out + "/checkpoint.satk");
  write_training_log(result.log, args.out + "/train_log.csv");
  result.counter.save_triple_visits(args.out + "/counters.tsv");
  write_resolved_config(sub, args.out);
  if (!result.log.empty()) {
    std::cout << "trained " << result.log.size() << " iterations; first loss "
              << result.log.front().loss << ", last loss "
              << result.log.back().loss << '\n';
  } else {
    std::cout << "trained 0 iterations\n";
  }
}

// ------------------------------------------------------------------ eval --

struct EvalArgs {
  DataPaths data;
  std::string checkpoint;
  std::string out;
  bool unfiltered = false;
  int workers = default_workers();
};

void run_eval(CLI::App* sub, const EvalArgs& args) {
  const KnowledgeGraph kg = load_graph(args.data);
  const EncoderParams<double> params = load_checkpoint(args.checkpoint);
  if (params.num_entities() != kg.num_entities() ||
      params.num_relations() != kg.num_total_relations()) {
    throw DataError("checkpoint shape does not match the graph vocabulary");
  }
  const std::vector<Triple> test = load_split(kg, args.data.test);
  std::vector<Triple> extra = test;
  if (!args.data.valid.empty()) {
    const auto valid = load_split(kg, args.data.valid);
    extra.insert(extra.end(), valid.begin(), valid.end());
  }
  const TripleIndex known(kg, extra);

  EvalOptions opts;
  opts.filtered = !args.unfiltered;
  opts.workers = args.workers;
  RankDump dump;
  const Metrics metrics = evaluate(params, kg, known, test, opts, &dump);

  std::filesystem::create_directories(args.out);
  metrics.save_csv(args.out + "/metrics.csv");
  {
    std::ofstream txt(args.out + "/metrics.txt", std::ios::binary);
    txt << metrics.aligned_text();
  }
  dump.save_csv(kg, args.out + "/ranks.csv");
  write_resolved_config(sub, args.out);
  std::cout << metrics.aligned_text();
}

// --------------------------------------------------------------- analyze --

struct AnalyzeArgs {
  DataPaths data;
  std::string out;
  std::string ranks;
  std::string counters;
  std::string checkpoint;
  std::string store;
  std::int32_t max_distance = 8;
  std::int64_t pair_budget = 10000;
  int bins = 10;
  int hist_batches = 0;
  int batch_size = 64;
  std::uint64_t seed = 0;
  std::int64_t node_cap = 5000;
  std::int64_t top_triples = 1000;
  int workers = default_workers();
  bool fp_per_degree_average = false;
};

void run_analyze(CLI::App* sub, const AnalyzeArgs& args) {
  const KnowledgeGraph kg = load_graph(args.data);
  std::filesystem::create_directories(args.out);
  StructReport report;

  if (!args.ranks.empty()) {
    const RankDump dump = RankDump::load_csv(kg, args.ranks);
    auto& by_distance = report.tables["fp_ratio_by_distance"];
    for (const DistanceRatio& row :
         fp_ratio_by_distance(kg, dump, args.max_distance, args.workers)) {
      by_distance.emplace_back(std::to_string(row.distance), row.ratio);
    }
    auto& by_degree = report.tables["fp_ratio_by_degree_group"];
    for (const DegreeGroupRatio& row :
         fp_ratio_by_degree_group(kg, dump, args.fp_per_degree_average)) {
      by_degree.emplace_back(std::to_string(row.min_degree) + "-" +
                                 std::to_string(row.max_degree),
                             row.ratio);
    }
    auto& rel_share = report.tables["relation_type_share"];
    auto& rel_hits = report.tables["relation_type_hits1"];
    for (const RelationClassStats& row : relation_type_breakdown(kg, dump)) {
      rel_share.emplace_back(relation_kind_name(row.kind), row.triple_share);
      rel_hits.emplace_back(relation_kind_name(row.kind), row.hits1);
    }
  }

  if (!args.counters.empty()) {
    std::vector<std::uint64_t> visits = VisitCounter::load_counts(args.counters);
    visits.resize(static_cast<std::size_t>(kg.num_triples()), 0);
    StructReport dist = distribution_reports(kg, visits);
    for (auto& [name, rows] : dist.tables) report.tables[name] = std::move(rows);

    // Most- and least-visited triples, ordered by count with id tiebreak.
    std::vector<TripleId> by_count(static_cast<std::size_t>(kg.num_triples()));
    for (std::size_t i = 0; i < by_count.size(); ++i) {
      by_count[i] = static_cast<TripleId>(i);
    }
    std::stable_sort(by_count.begin(), by_count.end(), [&](TripleId a, TripleId b) {
      return visits[static_cast<std::size_t>(a)] > visits[static_cast<std::size_t>(b)];
    });
    const std::size_t take = static_cast<std::size_t>(
        std::min<std::int64_t>(args.top_triples, kg.num_triples()));
    const std::vector<TripleId> most(by_count.begin(), by_count.begin() + take);
    const std::vector<TripleId> least(by_count.end() - take, by_count.end());
    const std::vector<std::vector<TripleId>> sets{most, least};
    const auto stats = centrality_stats(kg, sets, args.node_cap);
    auto& central = report.tables["centrality"];
    central.emplace_back("most_visited_mean_degree", stats[0].mean_degree);
    central.emplace_back("most_visited_mean_betweenness", stats[0].mean_betweenness);
    central.emplace_back("least_visited_mean_degree", stats[1].mean_degree);
    central.emplace_back("least_visited_mean_betweenness", stats[1].mean_betweenness);
  }

  if (!args.checkpoint.empty()) {
    const EncoderParams<double> params = load_checkpoint(args.checkpoint);
    if (params.num_entities() != kg.num_entities()) {
      throw DataError("checkpoint shape does not match the graph vocabulary");
    }
    auto& sim = report.tables["distance_similarity"];
    for (const DistanceSimilarity& row : distance_similarity_table(
             params, kg, args.max_distance, args.pair_budget, args.seed)) {
      if (row.mean_cosine.has_value()) {
        sim.emplace_back(std::to_string(row.distance), *row.mean_cosine);
      }
    }

    if (!args.store.empty() && args.hist_batches > 0) {
      const SubgraphStore store = SubgraphStore::load(args.store);
      BatchScheduler scheduler(kg, store, SchedulerMode::kSaam, args.seed);
      std::vector<MiniBatch> batches;
      batches.reserve(static_cast<std::size_t>(args.hist_batches));
      for (int i = 0; i < args.hist_batches; ++i) {
        batches.push_back(scheduler.next_batch(args.batch_size));
      }
      std::vector<double> edges(static_cast<std::size_t>(args.bins) + 1);
      for (std::size_t i = 0; i < edges.size(); ++i) {
        edges[i] = -1.0 + 2.0 * static_cast<double>(i) /
                              static_cast<double>(args.bins);
      }
      const auto hist = negative_score_histogram(params, batches, edges);
      auto& table = report.tables["negative_score_histogram"];
      for (std::size_t i = 0; i < hist.size(); ++i) {
        table.emplace_back(csv_double(edges[i]) + ".." + csv_double(edges[i + 1]),
                           hist[i]);
      }
    }

    if (!args.store.empty() && !args.ranks.empty()) {
      const SubgraphStore store = SubgraphStore::load(args.store);
      const RankDump dump = RankDump::load_csv(kg, args.ranks);
      // False positives are scored inside their query triple's batch, so only
      // queries that are themselves training triples contribute.
      std::vector<LossProbeItem> fp_items;
      for (const RankDumpRow& row : dump.rows) {
        Triple query;
        if (row.backward) {
          query = Triple{row.gold, kg.forward_form(row.rel), row.head};
        } else {
          query = Triple{row.head, row.rel, row.gold};
        }
        TripleId center = -1;
        for (const TripleId t : kg.edge_triples(query.head, query.tail)) {
          if (kg.triple(t) == query) {
            center = t;
            break;
          }
        }
        if (center < 0 || store.by_center(center) == nullptr) continue;
        for (const EntityId fp : row.false_positives) {
          Triple t = row.backward ? Triple{fp, query.rel, query.tail}
                                  : Triple{query.head, query.rel, fp};
          fp_items.push_back(LossProbeItem{center, t});
        }
      }
      Rng rng(Rng::mix(args.seed, 0xf9));
      std::vector<LossProbeItem> sample_items;
      const std::int64_t sample_size =
          std::min<std::int64_t>(kg.num_triples(),
                                 std::max<std::int64_t>(
                                     1, static_cast<std::int64_t>(fp_items.size())));
      for (std::int64_t i = 0; i < sample_size; ++i) {
        const TripleId t = static_cast<TripleId>(rng.uniform_int(kg.num_triples()));
        if (store.by_center(t) == nullptr) continue;
        sample_items.push_back(LossProbeItem{t, kg.triple(t)});
      }
      if (!fp_items.empty() && !sample_items.empty()) {
        const std::vector<std::span<const LossProbeItem>> sets{fp_items,
                                                               sample_items};
        const auto cmp = fp_loss_comparison(params, kg, store, args.batch_size,
                                            LossConfig{}, args.seed, sets);
        auto& table = report.tables["fp_loss_comparison"];
        table.emplace_back("false_positive_weighted", cmp[0].mean_weighted);
        table.emplace_back("false_positive_plain", cmp[0].mean_plain);
        table.emplace_back("sample_weighted", cmp[1].mean_weighted);
        table.emplace_back("sample_plain", cmp[1].mean_plain);
      }
    }
  }

  if (report.tables.empty()) {
    throw ConfigError(
        "analyze needs at least one of --ranks, --counters, or --checkpoint");
  }
  report.save(args.out);
  write_resolved_config(sub, args.out);
  std::cout << "wrote " << report.tables.size() << " report tables to "
            << args.out << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-graph-completion training engine"};
  app.require_subcommand(1);

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "index a triple corpus");
  add_data_options(ingest, ingest_args.data);
  ingest->add_option("--out", ingest_args.out, "output directory")->required();
  ingest->set_config("--config", "", "flat key = value config file");
  ingest->callback([&] { run_ingest(ingest, ingest_args); });

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "precompute per-triple subgraphs");
  add_data_options(sample, sample_args.data);
  sample->add_option("--out", sample_args.out, "output directory")->required();
  sample->add_option("--sampler", sample_args.sampler,
                     "brwr | rwr | brwr_p | mcmc");
  sample->add_option("--restart-prob", sample_args.restart_prob,
                     "walk restart probability");
  sample->add_option("--max-triples", sample_args.max_triples,
                     "triples per subgraph");
  sample->add_option("--seed", sample_args.seed, "random seed");
  sample->add_option("--workers", sample_args.workers, "parallel workers");
  sample->add_option("--checkpoint", sample_args.checkpoint,
                     "embeddings for the mcmc chain (random init if absent)");
  sample->add_option("--alpha", sample_args.alpha, "mcmc target exponent");
  sample->add_option("--neighbors-k", sample_args.neighbors_k,
                     "mcmc proposal pool size");
  sample->add_option("--batch-size", sample_args.batch_size,
                     "batch size the store will feed");
  sample->add_option("--dfs-depth", sample_args.dfs_depth,
                     "mcmc path length (0 = batch-size / 2)");
  sample->add_option("--burn-in", sample_args.burn_in, "mcmc burn-in steps");
  sample->add_option("--dim", sample_args.dim,
                     "embedding dimension for random-init mcmc params");
  sample->set_config("--config", "", "flat key = value config file");
  sample->callback([&] { run_sample(sample, sample_args); });

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train the bi-encoder");
  add_data_options(train_cmd, train_args.data);
  train_cmd->add_option("--store", train_args.store, "subgraph store file")
      ->required();
  train_cmd->add_option("--out", train_args.out, "output directory")->required();
  train_cmd->add_option("--scheduler", train_args.scheduler,
                        "saam | random | mixed");
  train_cmd->add_option("--batch-size", train_args.batch_size, "batch size |B|");
  train_cmd->add_option("--dim", train_args.dim, "embedding dimension");
  train_cmd->add_option("--epochs", train_args.epochs, "training epochs");
  train_cmd->add_option("--lr", train_args.learning_rate, "learning rate");
  train_cmd->add_option("--gamma", train_args.gamma, "additive margin");
  train_cmd->add_option("--seed", train_args.seed, "random seed");
  train_cmd->add_option("--ablate", train_args.ablate,
                        "disable components: pcl, fmt, saam, infonce");
  train_cmd->set_config("--config", "", "flat key = value config file");
  train_cmd->callback([&] { run_train(train_cmd, train_args); });

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "rank test triples");
  add_data_options(eval_cmd, eval_args.data, /*need_test=*/true);
  eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "trained checkpoint")
      ->required();
  eval_cmd->add_option("--out", eval_args.out, "output directory")->required();
  eval_cmd->add_flag("--unfiltered", eval_args.unfiltered,
                     "rank against all candidates without filtering");
  eval_cmd->add_option("--workers", eval_args.workers, "parallel workers");
  eval_cmd->set_config("--config", "", "flat key = value config file");
  eval_cmd->callback([&] { run_eval(eval_cmd, eval_args); });

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "structural diagnostics");
  add_data_options(analyze, analyze_args.data);
  analyze->add_option("--out", analyze_args.out, "output directory")->required();
  analyze->add_option("--ranks", analyze_args.ranks, "rank dump csv");
  analyze->add_option("--counters", analyze_args.counters, "triple visit counts");
  analyze->add_option("--checkpoint", analyze_args.checkpoint, "trained checkpoint");
  analyze->add_option("--store", analyze_args.store, "subgraph store file");
  analyze->add_option("--max-distance", analyze_args.max_distance,
                      "largest distance bucket");
  analyze->add_option("--pair-budget", analyze_args.pair_budget,
                      "sampled pairs per distance");
  analyze->add_option("--bins", analyze_args.bins, "histogram bins over [-1, 1]");
  analyze->add_option("--hist-batches", analyze_args.hist_batches,
                      "batches to draw for the score histogram");
  analyze->add_option("--batch-size", analyze_args.batch_size, "batch size |B|");
  analyze->add_option("--seed", analyze_args.seed, "random seed");
  analyze->add_option("--node-cap", analyze_args.node_cap,
                      "refuse exact betweenness beyond this entity count");
  analyze->add_option("--top-triples", analyze_args.top_triples,
                      "triples per most/least visited set");
  analyze->add_option("--workers", analyze_args.workers, "parallel workers");
  analyze->add_flag("--fp-per-degree-average", analyze_args.fp_per_degree_average,
                    "average the FP numerator per distinct degree");
  analyze->set_config("--config", "", "flat key = value config file");
  analyze->callback([&] { run_analyze(analyze, analyze_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: config: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: data: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: numeric: " << e.what() << '\n';
    return 4;
  } catch (const ContractViolation& e) {
    std::cerr << "error: internal: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
