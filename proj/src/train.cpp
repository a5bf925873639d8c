#include "satkgc/train.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace satkgc {

void TrainConfig::validate() const {
  if (batch_size < 2 || batch_size % 2 != 0) {
    throw ConfigError("batch size must be even and >= 2");
  }
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (dim < 2) throw ConfigError("embedding dimension must be >= 2");
  if (optim.learning_rate <= 0.0) throw ConfigError("learning rate must be positive");
  if (initial_tau < EncoderParams<double>::kTauMin ||
      initial_tau > EncoderParams<double>::kTauMax) {
    throw ConfigError("initial tau must lie in the clamp interval");
  }
  loss.validate();
}

AdamOptimizer::AdamOptimizer(const EncoderParams<double>& params, OptimConfig cfg)
    : cfg_(cfg),
      m_(ParamGrads<double>::zeros_like(params)),
      v_(ParamGrads<double>::zeros_like(params)) {}

namespace {

void adam_update(EncoderParams<double>::Mat& param,
                 const EncoderParams<double>::Mat& grad,
                 EncoderParams<double>::Mat& m, EncoderParams<double>::Mat& v,
                 const OptimConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v.array().matrix() + (1.0 - cfg.beta2) * grad.array().square().matrix();
  param.array() -= cfg.learning_rate * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + cfg.epsilon);
}

void adam_update_scalar(double& param, double grad, double& m, double& v,
                        const OptimConfig& cfg, double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad * grad;
  param -= cfg.learning_rate * (m / bc1) / (std::sqrt(v / bc2) + cfg.epsilon);
}

}  // namespace

void AdamOptimizer::step(EncoderParams<double>& params,
                         const ParamGrads<double>& grads, bool update_beta,
                         bool update_theta) {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  adam_update(params.entity_head, grads.entity_head, m_.entity_head,
              v_.entity_head, cfg_, bc1, bc2);
  adam_update(params.relation, grads.relation, m_.relation, v_.relation, cfg_,
              bc1, bc2);
  adam_update(params.entity_tail, grads.entity_tail, m_.entity_tail,
              v_.entity_tail, cfg_, bc1, bc2);
  if (update_beta) {
    adam_update_scalar(params.beta, grads.beta, m_.beta, v_.beta, cfg_, bc1, bc2);
  }
  if (update_theta) {
    adam_update_scalar(params.log_inv_temperature, grads.log_inv_temperature,
                       m_.log_inv_temperature, v_.log_inv_temperature, cfg_, bc1,
                       bc2);
  }
}

TrainResult train(const KnowledgeGraph& kg, const SubgraphStore& store,
                  const TrainConfig& cfg,
                  const std::function<void(const IterationLog&)>& on_iteration) {
  cfg.validate();
  if (kg.num_triples() == 0) throw DataError("cannot train on an empty graph");

  TrainResult result;
  result.params = EncoderParams<double>::random_init(
      kg.num_entities(), kg.num_total_relations(), cfg.dim, cfg.seed);
  result.params.log_inv_temperature = -std::log(cfg.initial_tau);
  if (!cfg.train_tau) result.params.log_inv_temperature = 0.0;  // tau = 1

  BatchScheduler scheduler(kg, store, cfg.scheduler, cfg.seed);
  AdamOptimizer optimizer(result.params, cfg.optim);

  const std::int64_t iters_per_epoch =
      (kg.num_triples() + cfg.batch_size - 1) / cfg.batch_size;
  std::int64_t iteration = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::int64_t it = 0; it < iters_per_epoch; ++it, ++iteration) {
      const MiniBatch batch = scheduler.next_batch(cfg.batch_size);
      const auto loss = batch_loss(result.params, batch, cfg.loss);
      if (!std::isfinite(loss.total)) {
        throw NumericError("training diverged at iteration " +
                           std::to_string(iteration));
      }
      const auto grads = gradients(result.params, batch, cfg.loss);
      optimizer.step(result.params, grads,
                     cfg.train_beta && cfg.loss.use_hardness, cfg.train_tau);
      IterationLog entry{iteration, loss.total, result.params.beta,
                         result.params.tau()};
      result.log.push_back(entry);
      if (on_iteration) on_iteration(entry);
    }
  }
  result.counter = scheduler.counter();
  return result;
}

void write_training_log(const std::vector<IterationLog>& log,
                        const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write training log: " + path);
  out << "iter,loss,beta,tau\n";
  char buf[160];
  for (const IterationLog& e : log) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(e.iteration), e.loss, e.beta, e.tau);
    out << buf;
  }
}

}  // namespace satkgc
