#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

#include "satkgc/rng.hpp"
#include "satkgc/types.hpp"

namespace satkgc {

// Trainable bi-encoder stand-in: additive entity+relation lookup tables with
// L2 normalization. x_hr = normalize(E_h[h] + R[r]), x_t = normalize(E_t[t]).
template <typename Scalar>
struct EncoderParams {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Mat entity_head;  // |E| x d
  Mat relation;     // |R_total| x d, inverse relations in the upper half
  Mat entity_tail;  // |E| x d
  Scalar beta = Scalar(0);
  // theta with tau = exp(-theta); tau is clamped to [kTauMin, kTauMax].
  Scalar log_inv_temperature = Scalar(0);

  static constexpr Scalar kTauMin = Scalar(0.01);
  static constexpr Scalar kTauMax = Scalar(1.0);

  Eigen::Index dim() const { return entity_head.cols(); }
  Eigen::Index num_entities() const { return entity_head.rows(); }
  Eigen::Index num_relations() const { return relation.rows(); }

  Scalar tau() const {
    const Scalar t = std::exp(-log_inv_temperature);
    return std::min(kTauMax, std::max(kTauMin, t));
  }
  bool tau_clamped() const {
    const Scalar t = std::exp(-log_inv_temperature);
    return t <= kTauMin || t >= kTauMax;
  }

  void check_finite() const {
    if (!entity_head.allFinite() || !relation.allFinite() ||
        !entity_tail.allFinite() || !std::isfinite(beta) ||
        !std::isfinite(log_inv_temperature)) {
      throw NumericError("encoder parameters contain non-finite values");
    }
  }

  // Embeddings i.i.d. uniform in [-1/sqrt(d), 1/sqrt(d)]; tau starts at 0.05,
  // beta at 0.
  static EncoderParams random_init(Eigen::Index entities, Eigen::Index relations,
                                   Eigen::Index dim, std::uint64_t seed) {
    EncoderParams p;
    p.entity_head.resize(entities, dim);
    p.relation.resize(relations, dim);
    p.entity_tail.resize(entities, dim);
    const Scalar bound = Scalar(1) / std::sqrt(static_cast<Scalar>(dim));
    Rng rng(Rng::mix(seed, 0x9a7a));
    const auto fill = [&](Mat& m) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
          m(i, j) = static_cast<Scalar>((2.0 * rng.uniform01() - 1.0)) * bound;
        }
      }
    };
    fill(p.entity_head);
    fill(p.relation);
    fill(p.entity_tail);
    p.beta = Scalar(0);
    p.log_inv_temperature = -std::log(Scalar(0.05));
    return p;
  }
};

namespace detail {

// Degenerate zero vectors get a deterministic nudge keyed by the id so the
// normalized output is well defined.
template <typename Scalar>
void perturb_if_zero(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v, std::int64_t id) {
  if (v.squaredNorm() < Scalar(1e-24)) {
    v[static_cast<Eigen::Index>(id % v.size())] += Scalar(1e-6);
  }
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> head_rel_sum(
    const EncoderParams<Scalar>& params, EntityId h, RelationId r) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v =
      params.entity_head.row(h).transpose() + params.relation.row(r).transpose();
  perturb_if_zero(v, static_cast<std::int64_t>(h) + r);
  return v;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tail_sum(
    const EncoderParams<Scalar>& params, EntityId t) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v = params.entity_tail.row(t).transpose();
  perturb_if_zero(v, t);
  return v;
}

}  // namespace detail

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> encode_head_rel(
    const EncoderParams<Scalar>& params, EntityId h, RelationId r) {
  const auto v = detail::head_rel_sum(params, h, r);
  return v / v.norm();
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> encode_tail(
    const EncoderParams<Scalar>& params, EntityId t) {
  const auto v = detail::tail_sum(params, t);
  return v / v.norm();
}

// Structural hardness: omega = 1/distance, zero when unreachable. The
// upstream zero-to-one promotion guarantees distance >= 1.
inline double hardness(std::int64_t distance) {
  if (distance == kUnreachable) return 0.0;
  if (distance < 1) {
    throw ContractViolation("hardness: distance must be >= 1 or unreachable");
  }
  return 1.0 / static_cast<double>(distance);
}

// phi_G = cos(x_hr, x_t) + beta * omega for unit vectors.
template <typename Scalar>
Scalar score(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_hr,
             const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x_t, Scalar omega,
             Scalar beta) {
  return x_hr.dot(x_t) + beta * omega;
}

}  // namespace satkgc
