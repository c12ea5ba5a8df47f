#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <variant>

#include "rsvgd/errors.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/particles.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// x ← x + εv on R^d, y ← Exp_y(εv) on spheres.
struct VanillaStep {
  double step;
};

/// AdaGrad with momentum: ρ ← ρ + v², μ ← βμ + v/(√ρ + δ), x ← x + εμ.
/// Euclidean only.
struct AdagradMomentum {
  double step;
  double momentum = 0.9;
  double fuzz = 1e-6;
};

using OptimizerKind = std::variant<VanillaStep, AdagradMomentum>;

/// Largest geodesic length of a single sphere step; longer steps are clipped.
inline constexpr double kMaxSphereStep = std::numbers::pi / 2.0;

/// Optimizer configuration plus its per-particle buffers and step statistics.
class OptimizerState {
 public:
  explicit OptimizerState(OptimizerKind kind) : kind_(kind) {
    std::visit(
        [](const auto& k) {
          if (!(k.step > 0.0)) throw precondition_error("optimizer: step size must be positive");
          if constexpr (std::is_same_v<std::decay_t<decltype(k)>, AdagradMomentum>) {
            if (!(k.momentum >= 0.0 && k.momentum < 1.0)) throw precondition_error("optimizer: momentum in [0, 1)");
            if (!(k.fuzz > 0.0)) throw precondition_error("optimizer: fuzz must be positive");
          }
        },
        kind_);
  }

  const OptimizerKind& kind() const noexcept { return kind_; }
  bool is_adagrad() const noexcept { return std::holds_alternative<AdagradMomentum>(kind_); }

  /// Mean Euclidean/geodesic length of the displacements applied in the last step.
  double last_mean_step_norm() const noexcept { return last_mean_step_norm_; }

  /// Total number of sphere steps clipped to kMaxSphereStep so far.
  std::size_t clip_events() const noexcept { return clip_events_; }

  const PointMatrix& accumulator() const noexcept { return accum_; }
  const PointMatrix& velocity() const noexcept { return velocity_; }

 private:
  friend ParticleCloud apply_update(const ParticleCloud&, const UpdateField&, OptimizerState&);

  OptimizerKind kind_;
  PointMatrix accum_;
  PointMatrix velocity_;
  double last_mean_step_norm_ = 0.0;
  std::size_t clip_events_ = 0;
};

/// Moves every particle along its update vector and returns the new cloud.
inline ParticleCloud apply_update(const ParticleCloud& cloud, const UpdateField& field, OptimizerState& opt) {
  const PointMatrix& x = cloud.points();
  if (field.vectors.rows() != x.rows() || field.vectors.cols() != x.cols()) {
    throw dimension_error("apply_update: field shape does not match the particle cloud");
  }
  const auto& manifold = cloud.manifold();
  PointMatrix next = x;
  double total = 0.0;

  if (const auto* ada = std::get_if<AdagradMomentum>(&opt.kind_)) {
    if (manifold.kind() != ManifoldKind::euclidean) {
      throw precondition_error("apply_update: AdaGrad with momentum is only defined on Euclidean clouds");
    }
    if (opt.accum_.rows() != x.rows() || opt.accum_.cols() != x.cols()) {
      opt.accum_ = PointMatrix::Zero(x.rows(), x.cols());
      opt.velocity_ = PointMatrix::Zero(x.rows(), x.cols());
    }
    opt.accum_.array() += field.vectors.array().square();
    opt.velocity_.array() =
        ada->momentum * opt.velocity_.array() + field.vectors.array() / (opt.accum_.array().sqrt() + ada->fuzz);
    const PointMatrix delta = ada->step * opt.velocity_;
    next += delta;
    total = delta.rowwise().norm().sum();
  } else {
    const double eps = std::get<VanillaStep>(opt.kind_).step;
    if (manifold.kind() == ManifoldKind::euclidean) {
      const PointMatrix delta = eps * field.vectors;
      next += delta;
      total = delta.rowwise().norm().sum();
    } else {
      const auto n = static_cast<Eigen::Index>(manifold.block_dim());
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < manifold.block_count(); ++k) {
          const auto off = static_cast<Eigen::Index>(k) * n;
          const Vector y = x.row(i).segment(off, n).transpose();
          Vector delta = eps * field.vectors.row(i).segment(off, n).transpose();
          const double len = delta.norm();
          if (len > kMaxSphereStep) {
            delta *= kMaxSphereStep / len;
            ++opt.clip_events_;
          }
          sq += delta.squaredNorm();
          next.row(i).segment(off, n) = exp_map_sphere(y, delta).transpose();
        }
        total += std::sqrt(sq);
      }
    }
  }
  opt.last_mean_step_norm_ = total / static_cast<double>(x.rows());
  return ParticleCloud(std::move(next), manifold);
}

}  // namespace rsvgd
