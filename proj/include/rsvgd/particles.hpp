#pragma once

#include <cstddef>
#include <string>

#include "rsvgd/errors.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// N points on a manifold, one per row.
class ParticleCloud {
 public:
  ParticleCloud(PointMatrix points, ManifoldSpec manifold) : points_(std::move(points)), manifold_(manifold) {
    if (points_.rows() < 1) throw precondition_error("ParticleCloud: need at least one particle");
    if (static_cast<std::size_t>(points_.cols()) != manifold_.ambient_dim()) {
      throw dimension_error("ParticleCloud: point width " + std::to_string(points_.cols()) +
                            " does not match " + manifold_.name());
    }
    for (Eigen::Index i = 0; i < points_.rows(); ++i) {
      if (!manifold_.is_valid_point(points_.row(i).transpose())) {
        throw precondition_error("ParticleCloud: particle " + std::to_string(i) + " is not on " + manifold_.name());
      }
    }
  }

  const PointMatrix& points() const noexcept { return points_; }
  const ManifoldSpec& manifold() const noexcept { return manifold_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  Eigen::Index dim() const noexcept { return points_.cols(); }
  Vector point(Eigen::Index i) const { return points_.row(i).transpose(); }

 private:
  PointMatrix points_;
  ManifoldSpec manifold_;
};

/// One update vector per particle, same shape as the cloud.
struct UpdateField {
  PointMatrix vectors;

  Vector at(Eigen::Index i) const { return vectors.row(i).transpose(); }
};

}  // namespace rsvgd
