#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// K(a, b) = exp(−‖a − b‖² / (2h)). `h` is a squared length scale.
struct GaussianKernel {
  double h;
};

/// Sum of Gaussian kernels, one per bandwidth.
struct SummedGaussianKernel {
  std::vector<double> bandwidths;
};

/// K(a, b) = ∏_k exp(κ a_(k)ᵀ b_(k)) over P blocks of length n.
struct VmfProductKernel {
  double kappa;
  std::size_t blocks;
  std::size_t n;
};

/// Every derivative of K(a, b) the update rules and discrepancies consume.
///
/// Derivatives are ambient: index 1 refers to the first argument a, index 2
/// to the second argument b.
struct KernelJet {
  double value = 0.0;
  Vector grad1;         ///< ∇_a K
  Vector grad2;         ///< ∇_b K
  Matrix hessian1;      ///< ∇_a ∇_aᵀ K
  double laplacian1 = 0.0;  ///< ∇_aᵀ ∇_a K
  Matrix cross_hessian;     ///< ∂²K / ∂a_i ∂b_j (row i, column j)

  /// yᵀ (∇_a ∇_aᵀ K) y.
  double quad1(const VectorRef& y) const { return y.dot(hessian1 * y); }

  KernelJet& operator+=(const KernelJet& o) {
    value += o.value;
    grad1 += o.grad1;
    grad2 += o.grad2;
    hessian1 += o.hessian1;
    laplacian1 += o.laplacian1;
    cross_hessian += o.cross_hessian;
    return *this;
  }
};

namespace detail {

inline KernelJet gaussian_jet(double h, const VectorRef& a, const VectorRef& b) {
  const auto d = a.size();
  const Vector r = a - b;
  const double rho = r.squaredNorm();
  const double k = std::exp(-rho / (2.0 * h));
  const Matrix rrT = r * r.transpose();
  const Matrix I = Matrix::Identity(d, d);

  KernelJet jet;
  jet.value = k;
  jet.grad1 = -r * (k / h);
  jet.grad2 = r * (k / h);
  jet.hessian1 = (rrT / (h * h) - I / h) * k;
  jet.laplacian1 = (rho / (h * h) - static_cast<double>(d) / h) * k;
  jet.cross_hessian = (I / h - rrT / (h * h)) * k;
  return jet;
}

inline Vector gaussian_grad2_weighted_laplacian(double h, const VectorRef& a, const VectorRef& b,
                                                const MatrixRef& W) {
  const Vector r = a - b;
  const double k = std::exp(-r.squaredNorm() / (2.0 * h));
  const double quad = r.dot(W * r);
  const Vector sym = W * r + W.transpose() * r;
  return (-sym / (h * h) + r * ((quad / (h * h) - W.trace() / h) / h)) * k;
}

}  // namespace detail

/// Immutable kernel description with closed-form derivatives.
class KernelSpec {
 public:
  using Variant = std::variant<GaussianKernel, SummedGaussianKernel, VmfProductKernel>;

  static KernelSpec gaussian(double h) {
    if (!(h > 0.0)) throw precondition_error("gaussian kernel: bandwidth must be positive");
    return KernelSpec(GaussianKernel{h});
  }

  static KernelSpec summed_gaussian(std::vector<double> bandwidths) {
    if (bandwidths.empty()) throw precondition_error("summed gaussian kernel: no bandwidths");
    for (double h : bandwidths) {
      if (!(h > 0.0)) throw precondition_error("summed gaussian kernel: bandwidths must be positive");
    }
    return KernelSpec(SummedGaussianKernel{std::move(bandwidths)});
  }

  static KernelSpec vmf_product(double kappa, std::size_t blocks, std::size_t n) {
    if (!(kappa > 0.0)) throw precondition_error("vMF kernel: kappa must be positive");
    if (blocks < 1 || n < 2) throw precondition_error("vMF kernel: need P >= 1 and n >= 2");
    return KernelSpec(VmfProductKernel{kappa, blocks, n});
  }

  const Variant& variant() const noexcept { return kind_; }
  bool is_vmf() const noexcept { return std::holds_alternative<VmfProductKernel>(kind_); }
  const VmfProductKernel& vmf() const { return std::get<VmfProductKernel>(kind_); }

  std::string describe() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianKernel>) {
            return "gaussian(h=" + std::to_string(k.h) + ")";
          } else if constexpr (std::is_same_v<T, SummedGaussianKernel>) {
            std::string s = "summed_gaussian(";
            for (std::size_t i = 0; i < k.bandwidths.size(); ++i) {
              if (i) s += ",";
              s += std::to_string(k.bandwidths[i]);
            }
            return s + ")";
          } else {
            return "vmf_product(kappa=" + std::to_string(k.kappa) + ",P=" + std::to_string(k.blocks) +
                   ",n=" + std::to_string(k.n) + ")";
          }
        },
        kind_);
  }

  double value(const VectorRef& a, const VectorRef& b) const {
    check(a, b);
    return std::visit(
        [&](const auto& k) -> double {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianKernel>) {
            return std::exp(-(a - b).squaredNorm() / (2.0 * k.h));
          } else if constexpr (std::is_same_v<T, SummedGaussianKernel>) {
            const double rho = (a - b).squaredNorm();
            double s = 0.0;
            for (double h : k.bandwidths) s += std::exp(-rho / (2.0 * h));
            return s;
          } else {
            double prod = 1.0;
            const auto n = static_cast<Eigen::Index>(k.n);
            for (std::size_t blk = 0; blk < k.blocks; ++blk) {
              const auto off = static_cast<Eigen::Index>(blk) * n;
              prod *= std::exp(k.kappa * a.segment(off, n).dot(b.segment(off, n)));
            }
            return prod;
          }
        },
        kind_);
  }

  /// K(a, b) and ∇_a K(a, b), the two quantities plain SVGD needs.
  std::pair<double, Vector> value_and_grad1(const VectorRef& a, const VectorRef& b) const {
    check(a, b);
    return std::visit(
        [&](const auto& k) -> std::pair<double, Vector> {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianKernel>) {
            const Vector r = a - b;
            const double v = std::exp(-r.squaredNorm() / (2.0 * k.h));
            return {v, -r * (v / k.h)};
          } else if constexpr (std::is_same_v<T, SummedGaussianKernel>) {
            const Vector r = a - b;
            const double rho = r.squaredNorm();
            double v = 0.0;
            double c = 0.0;
            for (double h : k.bandwidths) {
              const double e = std::exp(-rho / (2.0 * h));
              v += e;
              c += e / h;
            }
            return {v, -r * c};
          } else {
            const double v = value(a, b);
            return {v, b * (k.kappa * v)};
          }
        },
        kind_);
  }

  KernelJet jet(const VectorRef& a, const VectorRef& b) const {
    check(a, b);
    return std::visit(
        [&](const auto& k) -> KernelJet {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianKernel>) {
            return detail::gaussian_jet(k.h, a, b);
          } else if constexpr (std::is_same_v<T, SummedGaussianKernel>) {
            KernelJet sum = detail::gaussian_jet(k.bandwidths.front(), a, b);
            for (std::size_t i = 1; i < k.bandwidths.size(); ++i) sum += detail::gaussian_jet(k.bandwidths[i], a, b);
            return sum;
          } else {
            // The product over blocks equals exp(κ aᵀb) in ambient coordinates.
            const double v = value(a, b);
            const double kap = k.kappa;
            const auto d = a.size();
            KernelJet jet;
            jet.value = v;
            jet.grad1 = b * (kap * v);
            jet.grad2 = a * (kap * v);
            jet.hessian1 = b * b.transpose() * (kap * kap * v);
            jet.laplacian1 = kap * kap * b.squaredNorm() * v;
            jet.cross_hessian = (Matrix::Identity(d, d) + b * a.transpose() * kap) * (kap * v);
            return jet;
          }
        },
        kind_);
  }

  /// ∂²K/∂a_i∂b_j.
  Matrix cross_hessian(const VectorRef& a, const VectorRef& b) const { return jet(a, b).cross_hessian; }

  /// (∂²K/∂a∂bᵀ)ᵀ u = ∇_b (uᵀ∇_a K), without forming the matrix.
  Vector cross_hessian_transpose_times(const VectorRef& a, const VectorRef& b, const VectorRef& u) const {
    check(a, b);
    if (u.size() != a.size()) throw dimension_error("cross_hessian_transpose_times: vector size mismatch");
    return std::visit(
        [&](const auto& k) -> Vector {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianKernel>) {
            const Vector r = a - b;
            const double e = std::exp(-r.squaredNorm() / (2.0 * k.h));
            return (u / k.h - r * (r.dot(u) / (k.h * k.h))) * e;
          } else if constexpr (std::is_same_v<T, SummedGaussianKernel>) {
            const Vector r = a - b;
            const double rho = r.squaredNorm();
            const double ru = r.dot(u);
            double cu = 0.0;
            double cr = 0.0;
            for (double h : k.bandwidths) {
              const double e = std::exp(-rho / (2.0 * h));
              cu += e / h;
              cr += e / (h * h);
            }
            return u * cu - r * (ru * cr);
          } else {
            const double v = value(a, b);
            return (u + a * (k.kappa * b.dot(u))) * (k.kappa * v);
          }
        },
        kind_);
  }

  /// ∇_b tr(W ∇_a∇_aᵀ K(a, b)): the third-order term of the coordinate-space
  /// and embedded update rules, with W the inverse metric or a tangent projector.
  Vector grad2_weighted_laplacian(const VectorRef& a, const VectorRef& b, const MatrixRef& W) const {
    check(a, b);
    if (W.rows() != a.size() || W.cols() != a.size()) {
      throw dimension_error("grad2_weighted_laplacian: weight matrix shape mismatch");
    }
    return std::visit(
        [&](const auto& k) -> Vector {
          using T = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<T, GaussianKernel>) {
            return detail::gaussian_grad2_weighted_laplacian(k.h, a, b, W);
          } else if constexpr (std::is_same_v<T, SummedGaussianKernel>) {
            Vector sum = detail::gaussian_grad2_weighted_laplacian(k.bandwidths.front(), a, b, W);
            for (std::size_t i = 1; i < k.bandwidths.size(); ++i) {
              sum += detail::gaussian_grad2_weighted_laplacian(k.bandwidths[i], a, b, W);
            }
            return sum;
          } else {
            const double v = value(a, b);
            const double kap = k.kappa;
            const double quad = b.dot(W * b);
            return ((W * b + W.transpose() * b) + a * (kap * quad)) * (kap * kap * v);
          }
        },
        kind_);
  }

 private:
  explicit KernelSpec(Variant kind) : kind_(std::move(kind)) {}

  void check(const VectorRef& a, const VectorRef& b) const {
    detail::require_same_size(a, b, "kernel");
    if (const auto* k = std::get_if<VmfProductKernel>(&kind_)) {
      if (static_cast<std::size_t>(a.size()) != k->blocks * k->n) {
        throw dimension_error("vMF kernel: point size does not match P * n");
      }
    }
  }

  Variant kind_;
};

inline KernelJet eval_jet(const KernelSpec& spec, const VectorRef& a, const VectorRef& b) { return spec.jet(a, b); }

/// log K_(k), ∇ log K_(k) and ∇∇ᵀ log K_(k) of one vMF block, differentiated in y.
struct VmfLogJet {
  double log_value;
  Vector grad;
  Matrix hessian;
};

inline VmfLogJet log_jet_vmf_block(double kappa, const VectorRef& y, const VectorRef& y_other) {
  detail::require_same_size(y, y_other, "log_jet_vmf_block");
  detail::require_unit(y, "log_jet_vmf_block");
  detail::require_unit(y_other, "log_jet_vmf_block");
  return {kappa * y.dot(y_other), y_other * kappa, Matrix::Zero(y.size(), y.size())};
}

/// Result of the median heuristic. `fallback` is set when every pairwise
/// distance was zero and h = 1 was substituted.
struct Bandwidth {
  double h;
  bool fallback;
};

/// h = med² / log(N + 1), med the median of the N(N−1)/2 pairwise distances.
inline Bandwidth median_bandwidth(const PointMatrix& points) {
  const auto n = points.rows();
  if (n < 2) throw precondition_error("median_bandwidth: need at least two particles");
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) dist.push_back((points.row(i) - points.row(j)).norm());
  }
  std::sort(dist.begin(), dist.end());
  const std::size_t m = dist.size();
  const double med = (m % 2 == 1) ? dist[m / 2] : 0.5 * (dist[m / 2 - 1] + dist[m / 2]);
  if (!(med > 0.0)) return {1.0, true};
  return {med * med / std::log(static_cast<double>(n) + 1.0), false};
}

inline constexpr std::array<double, 5> kSummedBandwidthMultipliers{0.25, 0.5, 1.0, 2.0, 4.0};

inline std::vector<double> summed_bandwidths(double h_med) {
  if (!(h_med > 0.0)) throw precondition_error("summed_bandwidths: h must be positive");
  std::vector<double> out;
  out.reserve(kSummedBandwidthMultipliers.size());
  for (double c : kSummedBandwidthMultipliers) out.push_back(h_med * c);
  return out;
}

}  // namespace rsvgd
