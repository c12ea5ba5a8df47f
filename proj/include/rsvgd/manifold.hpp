#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "rsvgd/errors.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// Tolerance on |‖y‖ − 1| for a point to count as lying on a unit sphere.
inline constexpr double kUnitTolerance = 1e-9;

/// Tangent vectors shorter than this are treated as zero by the exponential map.
inline constexpr double kZeroStep = 1e-14;

enum class ManifoldKind { euclidean, sphere, product_sphere };

/// Geometry descriptor: R^d, S^{n-1} embedded in R^n, or (S^{n-1})^P embedded in R^{P n}.
///
/// Points are always stored in ambient coordinates. A product point is the
/// concatenation of P contiguous blocks of length n.
class ManifoldSpec {
 public:
  static ManifoldSpec euclidean(std::size_t d) {
    if (d < 1) throw precondition_error("euclidean manifold needs d >= 1");
    return ManifoldSpec(ManifoldKind::euclidean, 1, d);
  }

  static ManifoldSpec sphere(std::size_t n) {
    if (n < 2) throw precondition_error("sphere needs ambient dimension n >= 2");
    return ManifoldSpec(ManifoldKind::sphere, 1, n);
  }

  static ManifoldSpec product_sphere(std::size_t blocks, std::size_t n) {
    if (blocks < 1) throw precondition_error("product sphere needs P >= 1");
    if (n < 2) throw precondition_error("product sphere needs block dimension n >= 2");
    return ManifoldSpec(ManifoldKind::product_sphere, blocks, n);
  }

  ManifoldKind kind() const noexcept { return kind_; }
  std::size_t block_count() const noexcept { return blocks_; }
  std::size_t block_dim() const noexcept { return block_dim_; }
  std::size_t ambient_dim() const noexcept { return blocks_ * block_dim_; }
  bool is_spherical() const noexcept { return kind_ != ManifoldKind::euclidean; }

  bool is_valid_point(const VectorRef& y) const {
    if (static_cast<std::size_t>(y.size()) != ambient_dim()) return false;
    if (!y.allFinite()) return false;
    if (kind_ == ManifoldKind::euclidean) return true;
    for (std::size_t k = 0; k < blocks_; ++k) {
      const double norm = y.segment(k * block_dim_, block_dim_).norm();
      if (std::abs(norm - 1.0) > kUnitTolerance) return false;
    }
    return true;
  }

  std::string name() const {
    switch (kind_) {
      case ManifoldKind::euclidean:
        return "euclidean(" + std::to_string(block_dim_) + ")";
      case ManifoldKind::sphere:
        return "sphere(" + std::to_string(block_dim_) + ")";
      case ManifoldKind::product_sphere:
        return "product_sphere(" + std::to_string(blocks_) + "," + std::to_string(block_dim_) + ")";
    }
    return "unknown";
  }

  friend bool operator==(const ManifoldSpec&, const ManifoldSpec&) = default;

 private:
  ManifoldSpec(ManifoldKind kind, std::size_t blocks, std::size_t block_dim)
      : kind_(kind), blocks_(blocks), block_dim_(block_dim) {}

  ManifoldKind kind_;
  std::size_t blocks_;
  std::size_t block_dim_;
};

namespace detail {

inline void require_unit(const VectorRef& y, const char* who) {
  if (std::abs(y.norm() - 1.0) > kUnitTolerance) {
    throw precondition_error(std::string(who) + ": point is not unit norm");
  }
}

inline void require_same_size(const VectorRef& a, const VectorRef& b, const char* who) {
  if (a.size() != b.size()) {
    throw dimension_error(std::string(who) + ": size mismatch (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
}

}  // namespace detail

/// Orthogonal projection (I − y yᵀ) u onto the tangent space of the sphere at y.
inline Vector project_tangent_sphere(const VectorRef& y, const VectorRef& u) {
  detail::require_same_size(y, u, "project_tangent_sphere");
  detail::require_unit(y, "project_tangent_sphere");
  return u - y * y.dot(u);
}

/// Great-circle exponential map Exp_y(v) = y cos‖v‖ + (v/‖v‖) sin‖v‖.
///
/// v is projected onto the tangent space at y before use and the result is
/// renormalized. The geodesic distance from y equals ‖v‖ only for ‖v‖ < π.
inline Vector exp_map_sphere(const VectorRef& y, const VectorRef& v) {
  detail::require_same_size(y, v, "exp_map_sphere");
  detail::require_unit(y, "exp_map_sphere");
  const Vector tangent = v - y * y.dot(v);
  const double len = tangent.norm();
  if (len < kZeroStep) return y;
  Vector out = y * std::cos(len) + tangent * (std::sin(len) / len);
  out /= out.norm();
  return out;
}

/// Blockwise exponential map on (S^{n-1})^P.
inline Vector exp_map_product(const VectorRef& y, const VectorRef& v, std::size_t blocks, std::size_t n) {
  if (static_cast<std::size_t>(y.size()) != blocks * n || static_cast<std::size_t>(v.size()) != blocks * n) {
    throw dimension_error("exp_map_product: expected " + std::to_string(blocks) + " blocks of " +
                          std::to_string(n));
  }
  Vector out(y.size());
  for (std::size_t k = 0; k < blocks; ++k) {
    const auto off = static_cast<Eigen::Index>(k * n);
    const auto len = static_cast<Eigen::Index>(n);
    out.segment(off, len) = exp_map_sphere(y.segment(off, len), v.segment(off, len));
  }
  return out;
}

/// Rescales every block of a spherical point back to unit norm.
inline void renormalize(const ManifoldSpec& manifold, Eigen::Ref<Vector> y) {
  if (!manifold.is_spherical()) return;
  const auto n = static_cast<Eigen::Index>(manifold.block_dim());
  for (std::size_t k = 0; k < manifold.block_count(); ++k) {
    auto block = y.segment(static_cast<Eigen::Index>(k) * n, n);
    block /= block.norm();
  }
}

// ---------------------------------------------------------------------------
// Upper-hemisphere chart of S^{n-1}: y ↦ (y_1, …, y_{n-1}), valid for y_n > 0.
// ---------------------------------------------------------------------------

/// Chart quantities at chart coordinate x.
struct ChartQuantities {
  Matrix M;     ///< n × (n−1) Jacobian ∂y/∂x of the embedding.
  Matrix G;     ///< (n−1) × (n−1) metric, equal to MᵀM.
  Matrix Ginv;  ///< Inverse metric.
  double detG;  ///< det G = 1 / (1 − xᵀx).
};

inline ChartQuantities hemisphere_chart(const VectorRef& x) {
  const double r2 = x.squaredNorm();
  if (!(r2 < 1.0)) throw domain_error("hemisphere_chart: requires xᵀx < 1");
  const auto m = x.size();
  const double z = std::sqrt(1.0 - r2);

  ChartQuantities q;
  q.M.resize(m + 1, m);
  q.M.topRows(m).setIdentity();
  q.M.row(m) = -x.transpose() / z;
  q.G = Matrix::Identity(m, m) + x * x.transpose() / (1.0 - r2);
  q.Ginv = Matrix::Identity(m, m) - x * x.transpose();
  q.detG = 1.0 / (1.0 - r2);
  return q;
}

inline Vector chart_forward(const VectorRef& y) {
  if (y.size() < 2) throw dimension_error("chart_forward: need n >= 2");
  if (!(y(y.size() - 1) > 0.0)) throw domain_error("chart_forward: point outside the upper hemisphere");
  return y.head(y.size() - 1);
}

inline Vector chart_inverse(const VectorRef& x) {
  const double r2 = x.squaredNorm();
  if (!(r2 < 1.0)) throw domain_error("chart_inverse: requires xᵀx < 1");
  Vector y(x.size() + 1);
  y.head(x.size()) = x;
  y(x.size()) = std::sqrt(1.0 - r2);
  return y;
}

}  // namespace rsvgd
