#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "satkgc/encoder.hpp"
#include "satkgc/kg.hpp"
#include "satkgc/loss.hpp"
#include "satkgc/scheduler.hpp"
#include "satkgc/subgraph.hpp"

namespace satkgc {

struct OptimConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int batch_size = 64;
  int epochs = 1;
  int dim = 32;
  SchedulerMode scheduler = SchedulerMode::kSaam;
  LossConfig loss;
  OptimConfig optim;
  std::uint64_t seed = 0;
  // Off for the plain-InfoNCE ablation, which pins tau to 1.
  bool train_tau = true;
  bool train_beta = true;
  double initial_tau = 0.05;

  void validate() const;
};

struct IterationLog {
  std::int64_t iteration = 0;
  double loss = 0.0;
  double beta = 0.0;
  double tau = 0.0;
};

struct TrainResult {
  EncoderParams<double> params;
  std::vector<IterationLog> log;
  VisitCounter counter;
};

// Adaptive moment estimation with bias correction over all parameter tables
// plus beta and log_inv_temperature.
class AdamOptimizer {
 public:
  AdamOptimizer(const EncoderParams<double>& params, OptimConfig cfg);
  void step(EncoderParams<double>& params, const ParamGrads<double>& grads,
            bool update_beta, bool update_theta);

 private:
  OptimConfig cfg_;
  ParamGrads<double> m_;
  ParamGrads<double> v_;
  std::int64_t t_ = 0;
};

// Runs ceil(|T| / batch_size) iterations per epoch: select center, assemble
// batch, compute loss and gradients, apply the optimizer. Deterministic in
// cfg.seed. A non-finite loss aborts with NumericError naming the iteration.
TrainResult train(const KnowledgeGraph& kg, const SubgraphStore& store,
                  const TrainConfig& cfg,
                  const std::function<void(const IterationLog&)>& on_iteration = {});

void write_training_log(const std::vector<IterationLog>& log,
                        const std::string& path);

}  // namespace satkgc
