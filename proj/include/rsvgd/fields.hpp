#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <string>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/kernel.hpp"
#include "rsvgd/parallel.hpp"
#include "rsvgd/particles.hpp"
#include "rsvgd/target.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// A kernel on a coordinate space exposing the derivatives needed by the
/// gradient-field update rules.
template <typename K>
concept CoordinateKernel = requires(const K& k, const Vector& a, const Vector& b, const Vector& u, const Matrix& W) {
  { k.cross_hessian_transpose_times(a, b, u) } -> std::convertible_to<Vector>;
  { k.grad2_weighted_laplacian(a, b, W) } -> std::convertible_to<Vector>;
};

namespace detail {

template <GradLogTarget Target>
std::vector<Vector> grad_logs(const ParticleCloud& cloud, const Target& target, std::size_t threads) {
  std::vector<Vector> out(cloud.size());
  parallel_for(cloud.size(), threads, [&](std::size_t j) {
    out[j] = target.grad_log(cloud.point(static_cast<Eigen::Index>(j)));
    if (out[j].size() != cloud.dim()) throw dimension_error("target gradient has the wrong dimension");
  });
  return out;
}

inline void require_euclidean(const ParticleCloud& cloud, const char* who) {
  if (cloud.manifold().kind() != ManifoldKind::euclidean) {
    throw precondition_error(std::string(who) + ": requires a Euclidean particle cloud");
  }
}

inline const VmfProductKernel& require_vmf(const KernelSpec& kernel, std::size_t blocks, std::size_t n,
                                           const char* who) {
  if (!kernel.is_vmf()) throw precondition_error(std::string(who) + ": requires a vMF product kernel");
  const auto& k = kernel.vmf();
  if (k.blocks != blocks || k.n != n) {
    throw dimension_error(std::string(who) + ": kernel block structure does not match the manifold");
  }
  return k;
}

}  // namespace detail

/// Plain SVGD direction v(B) = (1/N) Σ_A [K(A, B) ∇log p(A) + ∇_A K(A, B)].
template <GradLogTarget Target>
UpdateField svgd_field(const ParticleCloud& cloud, const Target& target, const KernelSpec& kernel,
                       std::size_t threads = 1) {
  detail::require_euclidean(cloud, "svgd_field");
  const auto grads = detail::grad_logs(cloud, target, threads);
  const auto n = cloud.size();
  std::vector<Vector> points(n);
  for (std::size_t j = 0; j < n; ++j) points[j] = cloud.point(static_cast<Eigen::Index>(j));
  UpdateField field{PointMatrix::Zero(cloud.points().rows(), cloud.dim())};
  parallel_for(n, threads, [&](std::size_t i) {
    const Vector& b = points[i];
    Vector acc = Vector::Zero(cloud.dim());
    for (std::size_t j = 0; j < n; ++j) {
      const auto [k, grad_a] = kernel.value_and_grad1(points[j], b);
      acc += grads[j] * k + grad_a;
    }
    field.vectors.row(static_cast<Eigen::Index>(i)) = acc.transpose() / static_cast<double>(n);
  });
  return field;
}

/// Riemannian SVGD in a global coordinate system:
///
///   X^i(A') = g'^{ij} ∂'_j E_A[(g^{ab}∂_a log(p√|G|) + ∂_a g^{ab}) ∂_b K + g^{ab} ∂_a∂_b K].
///
/// The inverse metric at A' multiplies from outside the derivative; ∂'_j acts
/// on the kernel only.
template <MetricTarget Target, CoordinateKernel Kernel>
UpdateField rsvgd_euclidean_field(const ParticleCloud& cloud, const Target& target, const Kernel& kernel,
                                  std::size_t threads = 1) {
  detail::require_euclidean(cloud, "rsvgd_euclidean_field");
  const auto n = cloud.size();
  const auto d = cloud.dim();

  // Per-particle drift u = G⁻¹∇log p + ½ G⁻¹∇log|G| + div(G⁻¹) and inverse metric.
  std::vector<Vector> points(n);
  std::vector<Vector> drift(n);
  std::vector<Matrix> ginv(n);
  parallel_for(n, threads, [&](std::size_t j) {
    points[j] = cloud.point(static_cast<Eigen::Index>(j));
    const Vector& a = points[j];
    const MetricQuantities q = target.metric(a);
    if (q.Ginv.rows() != d || q.grad_logdet.size() != d || q.div_ginv_rows.size() != d) {
      throw dimension_error("rsvgd_euclidean_field: metric has the wrong dimension");
    }
    const Vector g = target.grad_log(a);
    drift[j] = q.Ginv * g + 0.5 * (q.Ginv * q.grad_logdet) + q.div_ginv_rows;
    ginv[j] = q.Ginv;
  });

  UpdateField field{PointMatrix::Zero(cloud.points().rows(), d)};
  parallel_for(n, threads, [&](std::size_t i) {
    const Vector& b = points[i];
    Vector acc = Vector::Zero(d);
    for (std::size_t j = 0; j < n; ++j) {
      const Vector& a = points[j];
      acc += kernel.cross_hessian_transpose_times(a, b, drift[j]);
      acc += kernel.grad2_weighted_laplacian(a, b, ginv[j]);
    }
    acc /= static_cast<double>(n);
    field.vectors.row(static_cast<Eigen::Index>(i)) = (ginv[i] * acc).transpose();
  });
  return field;
}

/// Riemannian SVGD on S^{n-1} with the vMF kernel K = exp(κ yᵀy'):
///
///   X(y') = (I − y'y'ᵀ) ∇' E_y[(∇log p)ᵀ∇K + ∇ᵀ∇K − yᵀ(∇∇ᵀK)y − (yᵀ∇log p + n − 1) yᵀ∇K].
///
/// Each bracket term is written through ∇log K = κ y', so the bracket is K
/// times a scalar and its y'-gradient is closed form.
template <GradLogTarget Target>
UpdateField rsvgd_sphere_field(const ParticleCloud& cloud, const Target& target, const KernelSpec& kernel,
                               std::size_t threads = 1) {
  if (cloud.manifold().kind() != ManifoldKind::sphere) {
    throw precondition_error("rsvgd_sphere_field: requires a sphere particle cloud");
  }
  const std::size_t dim = cloud.manifold().block_dim();
  const double kappa = detail::require_vmf(kernel, 1, dim, "rsvgd_sphere_field").kappa;
  const double nm1 = static_cast<double>(dim) - 1.0;
  const auto count = cloud.size();

  std::vector<Vector> ys(count);
  std::vector<Vector> gs(count);
  std::vector<double> ss(count);
  parallel_for(count, threads, [&](std::size_t j) {
    ys[j] = cloud.point(static_cast<Eigen::Index>(j));
    gs[j] = target.grad_log(ys[j]);
    if (gs[j].size() != ys[j].size()) throw dimension_error("rsvgd_sphere_field: gradient dimension mismatch");
    ss[j] = ys[j].dot(gs[j]);
  });

  UpdateField field{PointMatrix::Zero(cloud.points().rows(), cloud.dim())};
  parallel_for(count, threads, [&](std::size_t i) {
    const Vector& yp = ys[i];
    const Vector lk = kappa * yp;  // ∇_y log K(y, y')
    Vector acc = Vector::Zero(cloud.dim());
    for (std::size_t j = 0; j < count; ++j) {
      const Vector& y = ys[j];
      const Vector& g = gs[j];
      const double s = ss[j];
      const double K = std::exp(kappa * y.dot(yp));
      const double gl = g.dot(lk);
      const double sq = lk.dot(lk);
      const double yl = y.dot(lk);
      const double bracket = gl + sq - yl * yl - (s + nm1) * yl;
      acc += K * (kappa * bracket * y + kappa * g + 2.0 * kappa * lk - 2.0 * kappa * yl * y - (s + nm1) * kappa * y);
    }
    acc /= static_cast<double>(count);
    field.vectors.row(static_cast<Eigen::Index>(i)) = (acc - yp * yp.dot(acc)).transpose();
  });
  return field;
}

/// Riemannian SVGD on (S^{n-1})^P with K = ∏_k exp(κ y_(k)ᵀ y'_(k)):
///
///   f(y') = E_y[K Σ_k (∇_k log p)ᵀ∇_k log K_k + Δ_k log K_k − y_kᵀ(∇_k∇_kᵀ log K_k)y_k
///                 + ‖∇_k log K_k‖² − (y_kᵀ∇_k log K_k)² − (y_kᵀ∇_k log p + n − 1) y_kᵀ∇_k log K_k],
///   X_(ℓ)(y') = (I − y'_(ℓ)y'_(ℓ)ᵀ) ∇'_(ℓ) f.
///
/// The third term uses log K_k. With P = 1 this is term-for-term the sphere rule.
template <GradLogTarget Target>
UpdateField rsvgd_product_field(const ParticleCloud& cloud, const Target& target, const KernelSpec& kernel,
                                std::size_t threads = 1) {
  const auto& manifold = cloud.manifold();
  if (!manifold.is_spherical()) throw precondition_error("rsvgd_product_field: requires a spherical particle cloud");
  const std::size_t blocks = manifold.block_count();
  const std::size_t dim = manifold.block_dim();
  const double kappa = detail::require_vmf(kernel, blocks, dim, "rsvgd_product_field").kappa;
  const double nm1 = static_cast<double>(dim) - 1.0;
  const auto count = cloud.size();
  const auto n = static_cast<Eigen::Index>(dim);

  // Split every particle and its gradient into owned per-block vectors.
  std::vector<std::vector<Vector>> ys(count, std::vector<Vector>(blocks));
  std::vector<std::vector<Vector>> gs(count, std::vector<Vector>(blocks));
  std::vector<std::vector<double>> ss(count, std::vector<double>(blocks));
  parallel_for(count, threads, [&](std::size_t j) {
    const Vector point = cloud.point(static_cast<Eigen::Index>(j));
    const Vector grad = target.grad_log(point);
    if (grad.size() != point.size()) throw dimension_error("rsvgd_product_field: gradient dimension mismatch");
    for (std::size_t k = 0; k < blocks; ++k) {
      const auto off = static_cast<Eigen::Index>(k) * n;
      ys[j][k] = point.segment(off, n);
      gs[j][k] = grad.segment(off, n);
      ss[j][k] = ys[j][k].dot(gs[j][k]);
    }
  });

  UpdateField field{PointMatrix::Zero(cloud.points().rows(), cloud.dim())};
  parallel_for(count, threads, [&](std::size_t i) {
    std::vector<Vector> lk(blocks);  // ∇_(k) log K_(k) = κ y'_(k)
    for (std::size_t k = 0; k < blocks; ++k) lk[k] = kappa * ys[i][k];
    std::vector<Vector> acc(blocks, Vector::Zero(n));
    std::vector<double> terms(blocks);
    std::vector<double> yl(blocks);
    for (std::size_t j = 0; j < count; ++j) {
      double K = 1.0;
      double sum = 0.0;
      for (std::size_t k = 0; k < blocks; ++k) {
        const Vector& y = ys[j][k];
        const Vector& g = gs[j][k];
        const double s = ss[j][k];
        K *= std::exp(kappa * y.dot(ys[i][k]));
        // log K_(k) is linear in y, so its Laplacian and Hessian quadratic form vanish.
        const double lap = 0.0;
        const double quad = 0.0;
        const double gl = g.dot(lk[k]);
        const double sq = lk[k].dot(lk[k]);
        yl[k] = y.dot(lk[k]);
        terms[k] = gl + lap - quad + sq - yl[k] * yl[k] - (s + nm1) * yl[k];
        sum += terms[k];
      }
      for (std::size_t l = 0; l < blocks; ++l) {
        const Vector& y = ys[j][l];
        const Vector& g = gs[j][l];
        const double s = ss[j][l];
        // ∇'_(ℓ) log K_(ℓ) = κ y_(ℓ); the lap/quad terms have zero y'-gradient.
        acc[l] += K * (kappa * sum * y + kappa * g + 2.0 * kappa * lk[l] - 2.0 * kappa * yl[l] * y -
                       (s + nm1) * kappa * y);
      }
    }
    for (std::size_t l = 0; l < blocks; ++l) {
      acc[l] /= static_cast<double>(count);
      const Vector& yp = ys[i][l];
      field.vectors.row(static_cast<Eigen::Index>(i)).segment(static_cast<Eigen::Index>(l) * n, n) =
          (acc[l] - yp * yp.dot(acc[l])).transpose();
    }
  });
  return field;
}

}  // namespace rsvgd
