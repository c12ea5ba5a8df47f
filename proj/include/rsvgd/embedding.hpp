#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/fields.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/parallel.hpp"
#include "rsvgd/particles.hpp"
#include "rsvgd/target.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// Chart and normal-space hooks describing an isometrically embedded m-manifold in R^n.
struct EmbeddingProviders {
  std::function<Vector(const Vector&)> chart_forward;  ///< ambient y ↦ chart x
  std::function<Vector(const Vector&)> chart_inverse;  ///< chart x ↦ ambient y
  std::function<Matrix(const Vector&)> chart_M;        ///< n × m, ∂y/∂x
  std::function<Matrix(const Vector&)> chart_G;        ///< m × m metric
  std::function<double(const Vector&)> chart_detG;     ///< det G
  std::function<Matrix(const Vector&)> normal_N;       ///< n × (n − m) orthonormal normal basis at y
};

/// Step of the central differences taken along chart directions.
inline constexpr double kChartStep = 1e-5;

/// M = I, G = I, no normal directions: R^n embedded in itself.
inline EmbeddingProviders trivial_providers(std::size_t n) {
  const auto d = static_cast<Eigen::Index>(n);
  EmbeddingProviders p;
  p.chart_forward = [](const Vector& y) { return y; };
  p.chart_inverse = [](const Vector& x) { return x; };
  p.chart_M = [d](const Vector&) { return Matrix(Matrix::Identity(d, d)); };
  p.chart_G = [d](const Vector&) { return Matrix(Matrix::Identity(d, d)); };
  p.chart_detG = [](const Vector&) { return 1.0; };
  p.normal_N = [d](const Vector&) { return Matrix(d, 0); };
  return p;
}

/// Upper-hemisphere chart of S^{n-1} with normal N = y.
inline EmbeddingProviders hemisphere_providers() {
  EmbeddingProviders p;
  p.chart_forward = [](const Vector& y) { return chart_forward(y); };
  p.chart_inverse = [](const Vector& x) { return chart_inverse(x); };
  p.chart_M = [](const Vector& x) { return hemisphere_chart(x).M; };
  p.chart_G = [](const Vector& x) { return hemisphere_chart(x).G; };
  p.chart_detG = [](const Vector& x) { return hemisphere_chart(x).detG; };
  p.normal_N = [](const Vector& y) { return Matrix(y); };
  return p;
}

/// Quantities of the embedded update rule that depend only on the particle A.
struct EmbeddedTerms {
  Matrix projector;  ///< I − NNᵀ
  Vector drift;      ///< (I − NNᵀ)∇log(p√|G|) + ((Mᵀ∇)ᵀ(G⁻¹Mᵀ))ᵀ
};

/// Evaluates the providers at ambient point y, checks their invariants and
/// assembles the per-particle terms. `grad_log_p` is the ambient gradient.
inline EmbeddedTerms embedded_terms(const EmbeddingProviders& providers, const Vector& y, const Vector& grad_log_p,
                                    std::size_t index) {
  const auto n = y.size();
  Vector x;
  try {
    x = providers.chart_forward(y);
  } catch (const error& e) {
    throw provider_error(index, std::string("outside the chart domain: ") + e.what());
  }
  const auto m = x.size();
  const Matrix M = providers.chart_M(x);
  const Matrix G = providers.chart_G(x);
  const Matrix N = providers.normal_N(y);
  if (M.rows() != n || M.cols() != m || G.rows() != m || G.cols() != m || N.rows() != n || N.cols() != n - m) {
    throw provider_error(index, "provider matrix shapes are inconsistent");
  }
  if (N.cols() > 0) {
    if (((N.transpose() * N) - Matrix::Identity(N.cols(), N.cols())).cwiseAbs().maxCoeff() > 1e-10) {
      throw provider_error(index, "normal basis is not orthonormal");
    }
    if ((N.transpose() * M).cwiseAbs().maxCoeff() > 1e-8) {
      throw provider_error(index, "normal basis is not orthogonal to the tangent space");
    }
  }
  const Matrix Ginv = G.inverse();
  const Matrix projector = Matrix::Identity(n, n) - N * N.transpose();
  if ((M * Ginv * M.transpose() - projector).cwiseAbs().maxCoeff() > 1e-8) {
    throw provider_error(index, "M G⁻¹ Mᵀ differs from I − N Nᵀ");
  }

  // ∂_x log√|G| and Σ_i ∂_i (G⁻¹Mᵀ)_(i,·) by central differences in the chart.
  Vector dlog_sqrt_det(m);
  Vector correction = Vector::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    Vector xp = x;
    Vector xm = x;
    xp(i) += kChartStep;
    xm(i) -= kChartStep;
    dlog_sqrt_det(i) =
        0.5 * (std::log(providers.chart_detG(xp)) - std::log(providers.chart_detG(xm))) / (2.0 * kChartStep);
    const Matrix Bp = providers.chart_G(xp).inverse() * providers.chart_M(xp).transpose();
    const Matrix Bm = providers.chart_G(xm).inverse() * providers.chart_M(xm).transpose();
    correction += (Bp.row(i) - Bm.row(i)).transpose() / (2.0 * kChartStep);
  }

  // (I − NNᵀ)∇ log√|G| equals M G⁻¹ ∂_x log√|G| for any extension off the manifold.
  return {projector, projector * grad_log_p + M * (Ginv * dlog_sqrt_det) + correction};
}

/// Riemannian SVGD through a generic isometric embedding:
///
///   f(y') = E_y[(∇log(p√|G|))ᵀ(I − NNᵀ)∇K + ∇ᵀ∇K − tr(Nᵀ(∇∇ᵀK)N) + ((Mᵀ∇)ᵀ(G⁻¹Mᵀ))∇K],
///   X(y') = (I − N'N'ᵀ) ∇' f(y').
///
/// The chart-dependent correction is differentiated numerically, so this is a
/// validation path rather than the production rule.
template <GradLogTarget Target, CoordinateKernel Kernel>
UpdateField rsvgd_embedded_field(const ParticleCloud& cloud, const Target& target, const Kernel& kernel,
                                 const EmbeddingProviders& providers, std::size_t threads = 1) {
  const auto count = cloud.size();
  const auto n = cloud.dim();
  std::vector<Vector> points(count);
  std::vector<EmbeddedTerms> terms(count);
  parallel_for(count, threads, [&](std::size_t j) {
    points[j] = cloud.point(static_cast<Eigen::Index>(j));
    const Vector& y = points[j];
    const Vector g = target.grad_log(y);
    if (g.size() != n) throw dimension_error("rsvgd_embedded_field: gradient dimension mismatch");
    terms[j] = embedded_terms(providers, y, g, j);
  });

  UpdateField field{PointMatrix::Zero(cloud.points().rows(), n)};
  parallel_for(count, threads, [&](std::size_t i) {
    const Vector& b = points[i];
    Vector acc = Vector::Zero(n);
    for (std::size_t j = 0; j < count; ++j) {
      const Vector& a = points[j];
      acc += kernel.cross_hessian_transpose_times(a, b, terms[j].drift);
      acc += kernel.grad2_weighted_laplacian(a, b, terms[j].projector);
    }
    acc /= static_cast<double>(count);
    field.vectors.row(static_cast<Eigen::Index>(i)) = (terms[i].projector * acc).transpose();
  });
  return field;
}

}  // namespace rsvgd
