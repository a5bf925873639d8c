#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "satkgc/encoder.hpp"
#include "satkgc/scheduler.hpp"
#include "satkgc/types.hpp"

namespace satkgc {

// Ablation switches: use_hardness is the proximity term (beta * omega),
// use_freq_weight the per-row psi(t) weighting. With margin 0, both switches
// off, and tau fixed at 1 the loss reduces to plain InfoNCE.
struct LossConfig {
  double margin = 0.02;
  bool use_hardness = true;
  bool use_freq_weight = true;

  void validate() const {
    if (margin < 0.0) throw ConfigError("margin must be nonnegative");
  }
};

template <typename Scalar>
struct BatchLossResult {
  Scalar total = Scalar(0);
  // Unweighted per-row losses; total == sum of psi-weighted rows when
  // frequency weighting is on.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> per_row;
};

template <typename Scalar>
struct ParamGrads {
  using Mat = typename EncoderParams<Scalar>::Mat;
  Mat entity_head;
  Mat relation;
  Mat entity_tail;
  Scalar beta = Scalar(0);
  Scalar log_inv_temperature = Scalar(0);

  static ParamGrads zeros_like(const EncoderParams<Scalar>& p) {
    ParamGrads g;
    g.entity_head = Mat::Zero(p.entity_head.rows(), p.entity_head.cols());
    g.relation = Mat::Zero(p.relation.rows(), p.relation.cols());
    g.entity_tail = Mat::Zero(p.entity_tail.rows(), p.entity_tail.cols());
    return g;
  }
};

// Softmax loss for one row given its score vector: the positive logit gets
// (phi - margin)/tau, the others phi/tau, and excluded candidates drop out of
// the denominator entirely.
template <typename Scalar>
Scalar masked_softmax_margin_loss(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& phi, Eigen::Index positive,
    std::span<const std::uint8_t> excluded, Scalar margin, Scalar tau) {
  const Eigen::Index n = phi.size();
  Scalar max_z = -std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> z;
  z.reserve(static_cast<std::size_t>(n));
  Scalar z_pos = Scalar(0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const bool is_pos = j == positive;
    if (!is_pos && excluded[static_cast<std::size_t>(j)]) continue;
    const Scalar zj = (phi[j] - (is_pos ? margin : Scalar(0))) / tau;
    if (is_pos) z_pos = zj;
    z.push_back(zj);
    max_z = std::max(max_z, zj);
  }
  Scalar sum = Scalar(0);
  for (const Scalar zj : z) sum += std::exp(zj - max_z);
  return max_z + std::log(sum) - z_pos;
}

namespace detail {

template <typename Scalar>
struct EncodedBatch {
  using Mat = typename EncoderParams<Scalar>::Mat;
  using Vec = typename EncoderParams<Scalar>::Vec;
  Mat x;        // B x d unit head-relation vectors
  Mat y;        // B x d unit tail vectors
  Vec x_norm;   // pre-normalization norms
  Vec y_norm;
};

template <typename Scalar>
EncodedBatch<Scalar> encode_batch(const EncoderParams<Scalar>& params,
                                  const MiniBatch& batch) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index d = params.dim();
  EncodedBatch<Scalar> enc;
  enc.x.resize(b, d);
  enc.y.resize(b, d);
  enc.x_norm.resize(b);
  enc.y_norm.resize(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const BatchRow& row = batch.rows[static_cast<std::size_t>(i)];
    const auto u = head_rel_sum(params, row.hr_entity, row.hr_rel);
    const auto v = tail_sum(params, row.tail_entity);
    enc.x_norm[i] = u.norm();
    enc.y_norm[i] = v.norm();
    enc.x.row(i) = u.transpose() / enc.x_norm[i];
    enc.y.row(i) = v.transpose() / enc.y_norm[i];
  }
  return enc;
}

// B x B hardness factors: the positive diagonal is pinned to 1 (an existing
// edge has distance 1), off-diagonal entries use the precomputed approximate
// distance product of row i's head and row j's tail.
template <typename Scalar>
typename EncoderParams<Scalar>::Mat hardness_matrix(const MiniBatch& batch) {
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  typename EncoderParams<Scalar>::Mat omega(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const BatchRow& ri = batch.rows[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < b; ++j) {
      if (i == j) {
        omega(i, j) = Scalar(1);
        continue;
      }
      const BatchRow& rj = batch.rows[static_cast<std::size_t>(j)];
      if (ri.head_dist == kUnreachable || rj.tail_dist == kUnreachable) {
        omega(i, j) = Scalar(0);
      } else {
        const std::int64_t d1 = std::max<std::int64_t>(ri.head_dist, 1);
        const std::int64_t d2 = std::max<std::int64_t>(rj.tail_dist, 1);
        omega(i, j) = Scalar(1) / static_cast<Scalar>(d1 * d2);
      }
    }
  }
  return omega;
}

}  // namespace detail

template <typename Scalar>
BatchLossResult<Scalar> batch_loss(const EncoderParams<Scalar>& params,
                                   const MiniBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  params.check_finite();
  using Mat = typename EncoderParams<Scalar>::Mat;
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const auto enc = detail::encode_batch(params, batch);

  Mat phi = enc.x * enc.y.transpose();
  if (cfg.use_hardness) {
    phi += params.beta * detail::hardness_matrix<Scalar>(batch);
  }

  const Scalar tau = params.tau();
  BatchLossResult<Scalar> result;
  result.per_row.resize(b);
  result.total = Scalar(0);
  for (Eigen::Index i = 0; i < b; ++i) {
    const std::span<const std::uint8_t> mask(
        batch.excluded.data() + static_cast<std::size_t>(i) * batch.size(),
        batch.size());
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> row = phi.row(i).transpose();
    for (Eigen::Index j = 0; j < b; ++j) {
      if (j != i && mask[static_cast<std::size_t>(j)]) continue;
      if (!std::isfinite(row[j] / tau)) {
        throw NumericError("non-finite exponent in batch row " + std::to_string(i));
      }
    }
    const Scalar li = masked_softmax_margin_loss<Scalar>(
        row, i, mask, static_cast<Scalar>(cfg.margin), tau);
    result.per_row[i] = li;
    const Scalar w = cfg.use_freq_weight
                         ? static_cast<Scalar>(batch.rows[static_cast<std::size_t>(i)].psi)
                         : Scalar(1);
    result.total += w * li;
  }
  return result;
}

// Analytic gradients of batch_loss with respect to every touched embedding
// row, beta, and log_inv_temperature. When tau sits at a clamp boundary its
// gradient is zero; when hardness is off, beta's gradient is zero.
template <typename Scalar>
ParamGrads<Scalar> gradients(const EncoderParams<Scalar>& params,
                             const MiniBatch& batch, const LossConfig& cfg) {
  cfg.validate();
  params.check_finite();
  using Mat = typename EncoderParams<Scalar>::Mat;
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  const auto enc = detail::encode_batch(params, batch);

  Mat omega;
  Mat phi = enc.x * enc.y.transpose();
  if (cfg.use_hardness) {
    omega = detail::hardness_matrix<Scalar>(batch);
    phi += params.beta * omega;
  }

  const Scalar tau = params.tau();
  const Scalar margin = static_cast<Scalar>(cfg.margin);

  // G(i, j) = w_i * (p_ij - [i == j]) over each row's candidate set.
  Mat g = Mat::Zero(b, b);
  Mat z = Mat::Zero(b, b);
  for (Eigen::Index i = 0; i < b; ++i) {
    Scalar max_z = -std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index j = 0; j < b; ++j) {
      const bool in_set = j == i || !batch.is_excluded(static_cast<std::size_t>(i),
                                                       static_cast<std::size_t>(j));
      if (!in_set) continue;
      z(i, j) = (phi(i, j) - (j == i ? margin : Scalar(0))) / tau;
      if (!std::isfinite(z(i, j))) {
        throw NumericError("non-finite exponent in batch row " + std::to_string(i));
      }
      max_z = std::max(max_z, z(i, j));
    }
    Scalar denom = Scalar(0);
    for (Eigen::Index j = 0; j < b; ++j) {
      const bool in_set = j == i || !batch.is_excluded(static_cast<std::size_t>(i),
                                                       static_cast<std::size_t>(j));
      if (in_set) denom += std::exp(z(i, j) - max_z);
    }
    const Scalar w = cfg.use_freq_weight
                         ? static_cast<Scalar>(batch.rows[static_cast<std::size_t>(i)].psi)
                         : Scalar(1);
    for (Eigen::Index j = 0; j < b; ++j) {
      const bool in_set = j == i || !batch.is_excluded(static_cast<std::size_t>(i),
                                                       static_cast<std::size_t>(j));
      if (!in_set) continue;
      const Scalar p = std::exp(z(i, j) - max_z) / denom;
      g(i, j) = w * (p - (j == i ? Scalar(1) : Scalar(0)));
    }
  }

  ParamGrads<Scalar> grads = ParamGrads<Scalar>::zeros_like(params);

  // d z / d theta = z when tau is inside the clamp interval.
  if (!params.tau_clamped()) {
    grads.log_inv_temperature = (g.array() * z.array()).sum();
  }
  if (cfg.use_hardness) {
    grads.beta = (g.array() * omega.array()).sum() / tau;
  }

  const Mat gx = (g * enc.y) / tau;             // B x d, dL/dx_i
  const Mat gy = (g.transpose() * enc.x) / tau; // B x d, dL/dy_j
  for (Eigen::Index i = 0; i < b; ++i) {
    const BatchRow& row = batch.rows[static_cast<std::size_t>(i)];
    // Through the normalization: gu = (gx - (x . gx) x) / ||u||.
    const auto xi = enc.x.row(i);
    const Scalar xdot = xi.dot(gx.row(i));
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> gu =
        (gx.row(i) - xdot * xi) / enc.x_norm[i];
    grads.entity_head.row(row.hr_entity) += gu;
    grads.relation.row(row.hr_rel) += gu;

    const auto yi = enc.y.row(i);
    const Scalar ydot = yi.dot(gy.row(i));
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> gv =
        (gy.row(i) - ydot * yi) / enc.y_norm[i];
    grads.entity_tail.row(row.tail_entity) += gv;
  }
  return grads;
}

// Cosine scores of the in-batch negatives (unmasked off-diagonal pairs).
template <typename Scalar>
std::vector<Scalar> in_batch_negative_cosines(const EncoderParams<Scalar>& params,
                                              const MiniBatch& batch) {
  const auto enc = detail::encode_batch(params, batch);
  const auto cos = (enc.x * enc.y.transpose()).eval();
  std::vector<Scalar> out;
  const Eigen::Index b = static_cast<Eigen::Index>(batch.size());
  out.reserve(static_cast<std::size_t>(b * (b - 1)));
  for (Eigen::Index i = 0; i < b; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      if (i == j || batch.is_excluded(static_cast<std::size_t>(i),
                                      static_cast<std::size_t>(j))) {
        continue;
      }
      out.push_back(cos(i, j));
    }
  }
  return out;
}

}  // namespace satkgc
