#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/kernel.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/parallel.hpp"
#include "rsvgd/target.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

enum class Estimator { v_statistic, u_statistic };

inline std::string to_string(Estimator e) { return e == Estimator::v_statistic ? "v_statistic" : "u_statistic"; }

struct DiscrepancyEstimate {
  double value;
  Estimator estimator;
  std::size_t n_samples;
};

namespace detail {

/// Doubly Stein-operated Gaussian kernel in flat space, where K is a radial
/// profile φ₀(ρ) of ρ = ‖a − a'‖²:
///   u = gᵀ(∂_a∂_a'ᵀK)g' + Δ'ΔK + g'ᵀ∇'ΔK + gᵀ∇Δ'K.
inline double gaussian_stein_pair(double h, const VectorRef& a, const VectorRef& ga, const VectorRef& b,
                                  const VectorRef& gb) {
  const double d = static_cast<double>(a.size());
  const Vector r = a - b;
  const double rho = r.squaredNorm();
  const double e = std::exp(-rho / (2.0 * h));
  const double h2 = h * h;
  const double h3 = h2 * h;
  // φ(ρ) = ΔK = (ρ/h² − d/h) e; φ' and φ'' are its ρ-derivatives.
  const double dphi = e * ((2.0 + d) / (2.0 * h2) - rho / (2.0 * h3));
  const double ddphi = e * (rho / (4.0 * h2 * h2) - (4.0 + d) / (4.0 * h3));
  const double gr = ga.dot(r);
  const double gpr = gb.dot(r);
  const double cross = e * (ga.dot(gb) / h - gr * gpr / h2);
  const double lap_lap = 4.0 * rho * ddphi + 2.0 * d * dphi;
  return cross + lap_lap + 2.0 * dphi * (gr - gpr);
}

}  // namespace detail

/// Stein pair function u_p(a, a') for a Gaussian or summed-Gaussian kernel.
/// `ga`, `gb` are ∇log p at a and a'.
inline double stein_pair_euclidean(const KernelSpec& kernel, const VectorRef& a, const VectorRef& ga,
                                   const VectorRef& b, const VectorRef& gb) {
  if (a.size() != b.size() || ga.size() != a.size() || gb.size() != b.size()) {
    throw dimension_error("stein_pair_euclidean: dimension mismatch");
  }
  if (const auto* g = std::get_if<GaussianKernel>(&kernel.variant())) {
    return detail::gaussian_stein_pair(g->h, a, ga, b, gb);
  }
  if (const auto* s = std::get_if<SummedGaussianKernel>(&kernel.variant())) {
    double sum = 0.0;
    for (double h : s->bandwidths) sum += detail::gaussian_stein_pair(h, a, ga, b, gb);
    return sum;
  }
  throw precondition_error("stein_pair_euclidean: requires a Gaussian or summed Gaussian kernel");
}

/// Stein pair function on S^{n-1} for K = exp(κ yᵀy').
///
/// With t = yᵀy', k^{(j)} = κ^j e^{κt} and the zonal Laplacian
/// L(t) = ΔK = (1 − t²)k'' − (n − 1)t k':
///   u = k'' a a' + k' c + [(1 − t²)L'' − (n − 1)t L'] + L'(a + a'),
/// where a = (grad log p)ᵀy', a' = (grad' log p')ᵀy and
/// c = (grad log p)ᵀ(grad' log p'), with grad the tangent projection.
inline double stein_pair_sphere(double kappa, const VectorRef& y, const VectorRef& gy, const VectorRef& yp,
                                const VectorRef& gyp) {
  if (y.size() != yp.size() || gy.size() != y.size() || gyp.size() != yp.size()) {
    throw dimension_error("stein_pair_sphere: dimension mismatch");
  }
  detail::require_unit(y, "stein_pair_sphere");
  detail::require_unit(yp, "stein_pair_sphere");
  const double n = static_cast<double>(y.size());
  const double t = y.dot(yp);
  const double e = std::exp(kappa * t);
  const double k1 = kappa * e;
  const double k2 = kappa * k1;
  const double k3 = kappa * k2;
  const double k4 = kappa * k3;
  const double one_t2 = 1.0 - t * t;

  const double dL = -2.0 * t * k2 + one_t2 * k3 - (n - 1.0) * k1 - (n - 1.0) * t * k2;
  const double ddL = one_t2 * k4 - (n + 3.0) * t * k3 - 2.0 * n * k2;
  const double lap_lap = one_t2 * ddL - (n - 1.0) * t * dL;

  const double s = y.dot(gy);
  const double sp = yp.dot(gyp);
  const double gy_yp = gy.dot(yp);
  const double gyp_y = gyp.dot(y);
  const double a = gy_yp - s * t;
  const double ap = gyp_y - sp * t;
  const double c = gy.dot(gyp) - (sp * gy_yp + s * gyp_y) + s * sp * t;
  return k2 * (a * ap) + k1 * c + lap_lap + dL * (a + ap);
}

namespace detail {

template <typename Pair>
DiscrepancyEstimate assemble(std::size_t n, Estimator estimator, std::size_t threads, Pair&& pair) {
  if (n == 0) throw precondition_error("discrepancy: no samples");
  if (estimator == Estimator::u_statistic && n < 2) {
    throw precondition_error("discrepancy: U-statistic needs at least two samples");
  }
  std::vector<double> row_sums(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (estimator == Estimator::u_statistic && i == j) continue;
      s += pair(i, j);
    }
    row_sums[i] = s;
  });
  double total = 0.0;
  for (double s : row_sums) total += s;
  const double nn = static_cast<double>(n);
  const double denom = estimator == Estimator::v_statistic ? nn * nn : nn * (nn - 1.0);
  return {total / denom, estimator, n};
}

}  // namespace detail

/// Kernelized Stein discrepancy of Euclidean samples against a target.
template <GradLogTarget Target>
DiscrepancyEstimate ksd_euclidean(const PointMatrix& samples, const Target& target, const KernelSpec& kernel,
                                  Estimator estimator = Estimator::v_statistic, std::size_t threads = 1) {
  const auto n = static_cast<std::size_t>(samples.rows());
  std::vector<Vector> xs(n);
  std::vector<Vector> gs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = samples.row(static_cast<Eigen::Index>(i)).transpose();
    gs[i] = target.grad_log(xs[i]);
  }
  return detail::assemble(n, estimator, threads, [&](std::size_t i, std::size_t j) {
    return stein_pair_euclidean(kernel, xs[i], gs[i], xs[j], gs[j]);
  });
}

/// Riemannian kernelized Stein discrepancy of samples on S^{n-1} (vMF kernel, P = 1).
template <GradLogTarget Target>
DiscrepancyEstimate rksd_sphere(const PointMatrix& samples, const Target& target, const KernelSpec& kernel,
                                Estimator estimator = Estimator::v_statistic, std::size_t threads = 1) {
  if (!kernel.is_vmf() || kernel.vmf().blocks != 1 ||
      static_cast<Eigen::Index>(kernel.vmf().n) != samples.cols()) {
    throw precondition_error("rksd_sphere: requires a single-block vMF kernel matching the sample dimension");
  }
  const double kappa = kernel.vmf().kappa;
  const auto n = static_cast<std::size_t>(samples.rows());
  std::vector<Vector> ys(n);
  std::vector<Vector> gs(n);
  for (std::size_t i = 0; i < n; ++i) {
    ys[i] = samples.row(static_cast<Eigen::Index>(i)).transpose();
    detail::require_unit(ys[i], "rksd_sphere");
    gs[i] = target.grad_log(ys[i]);
  }
  return detail::assemble(n, estimator, threads, [&](std::size_t i, std::size_t j) {
    return stein_pair_sphere(kappa, ys[i], gs[i], ys[j], gs[j]);
  });
}

}  // namespace rsvgd
