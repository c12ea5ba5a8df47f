#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/types.hpp"

namespace rsvgd {

/// Anything that returns the (ambient) gradient of its log-density.
template <typename T>
concept GradLogTarget = requires(const T& t, const Vector& x) {
  { t.grad_log(x) } -> std::convertible_to<Vector>;
};

/// Riemann metric package at one point of a coordinate space.
struct MetricQuantities {
  Matrix G;
  Matrix Ginv;
  Vector grad_logdet;    ///< ∂_i log|G|
  Vector div_ginv_rows;  ///< Σ_j ∂_j G⁻¹_ij
};

/// A target that also supplies the metric for the coordinate-space update rule.
template <typename T>
concept MetricTarget = GradLogTarget<T> && requires(const T& t, const Vector& x) {
  { t.metric(x) } -> std::convertible_to<MetricQuantities>;
};

inline double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

enum class Inversion { direct, sherman_morrison };

/// Bayesian logistic regression: w ~ N(0, αI), y_d ~ Bern(s(wᵀx_d)).
///
/// The metric is the Fisher information of the likelihood plus the negative
/// Hessian of the log-prior, G(w) = Σ c_d x_d x_dᵀ + I/α with
/// c_d = s(wᵀx_d)(1 − s(wᵀx_d)).
class BlrModel {
 public:
  BlrModel(Matrix X, Vector y, double alpha, Inversion inversion = Inversion::direct)
      : X_(std::move(X)), y_(std::move(y)), alpha_(alpha), inversion_(inversion) {
    if (X_.cols() < 1) throw precondition_error("BlrModel: need at least one feature");
    if (X_.rows() != y_.size()) throw dimension_error("BlrModel: row count differs from label count");
    if (!(alpha_ > 0.0)) throw precondition_error("BlrModel: prior variance must be positive");
    for (Eigen::Index d = 0; d < y_.size(); ++d) {
      if (y_(d) != 0.0 && y_(d) != 1.0) throw precondition_error("BlrModel: labels must be 0 or 1");
    }
  }

  const Matrix& X() const noexcept { return X_; }
  const Vector& y() const noexcept { return y_; }
  double alpha() const noexcept { return alpha_; }
  Eigen::Index dim() const noexcept { return X_.cols(); }
  Eigen::Index rows() const noexcept { return X_.rows(); }

  /// Log-posterior up to an additive constant.
  double log_posterior(const VectorRef& w) const {
    check(w);
    const Vector z = X_ * w;
    double lp = -w.squaredNorm() / (2.0 * alpha_);
    for (Eigen::Index d = 0; d < z.size(); ++d) lp += y_(d) * z(d) - softplus(z(d));
    return lp;
  }

  /// ∇ log p(w | data) = −w/α + Σ (y_d − s(wᵀx_d)) x_d.
  Vector grad_log(const VectorRef& w) const {
    check(w);
    const Vector z = X_ * w;
    Vector resid(z.size());
    for (Eigen::Index d = 0; d < z.size(); ++d) resid(d) = y_(d) - logistic(z(d));
    return -w / alpha_ + X_.transpose() * resid;
  }

  MetricQuantities metric(const VectorRef& w) const { return metric(w, inversion_); }

  MetricQuantities metric(const VectorRef& w, Inversion inversion) const {
    check(w);
    const auto m = dim();
    const Vector z = X_ * w;
    Vector c(z.size());
    Vector f(z.size());
    for (Eigen::Index d = 0; d < z.size(); ++d) {
      const double s = logistic(z(d));
      c(d) = s * (1.0 - s);
      // (1 − e^z)/(1 + e^z) written as 1 − 2 s(z), which does not overflow.
      f(d) = (1.0 - 2.0 * s) * c(d);
    }

    MetricQuantities q;
    q.G = X_.transpose() * c.asDiagonal() * X_;
    q.G.diagonal().array() += 1.0 / alpha_;

    if (inversion == Inversion::direct) {
      Eigen::LLT<Matrix> llt(q.G);
      if (llt.info() != Eigen::Success || llt.rcond() < 1e-14) {
        throw singular_matrix_error("BlrModel::metric: metric is numerically singular");
      }
      q.Ginv = llt.solve(Matrix::Identity(m, m));
    } else {
      q.Ginv = Matrix::Identity(m, m) * alpha_;
      for (Eigen::Index d = 0; d < X_.rows(); ++d) {
        const Vector u = q.Ginv * X_.row(d).transpose();
        const double denom = 1.0 + c(d) * X_.row(d).dot(u);
        q.Ginv.noalias() -= (c(d) / denom) * u * u.transpose();
      }
    }

    // ∂_i log|G| = Σ_d f_d (x_dᵀ G⁻¹ x_d) x_di
    Vector weight(X_.rows());
    for (Eigen::Index d = 0; d < X_.rows(); ++d) {
      weight(d) = f(d) * X_.row(d).dot(q.Ginv * X_.row(d).transpose());
    }
    q.grad_logdet = X_.transpose() * weight;
    // Σ_j ∂_j G⁻¹_ij = −G⁻¹_(i,:) ∇log|G|, using the full index symmetry of ∂_i G_jk.
    q.div_ginv_rows = -q.Ginv * q.grad_logdet;
    return q;
  }

  /// ∂G/∂w_i = Σ_d f_d x_di x_d x_dᵀ.
  Matrix metric_partial(const VectorRef& w, Eigen::Index i) const {
    check(w);
    if (i < 0 || i >= dim()) throw dimension_error("metric_partial: coordinate out of range");
    const Vector z = X_ * w;
    Vector weight(z.size());
    for (Eigen::Index d = 0; d < z.size(); ++d) {
      const double s = logistic(z(d));
      weight(d) = (1.0 - 2.0 * s) * s * (1.0 - s) * X_(d, i);
    }
    return X_.transpose() * weight.asDiagonal() * X_;
  }

 private:
  void check(const VectorRef& w) const {
    if (w.size() != dim()) throw dimension_error("BlrModel: parameter size does not match feature count");
  }

  Matrix X_;
  Vector y_;
  double alpha_;
  Inversion inversion_;
};

/// Free-function spelling of the model operations.
inline Vector blr_grad_log_post(const BlrModel& model, const VectorRef& w) { return model.grad_log(w); }

inline MetricQuantities blr_metric(const BlrModel& model, const VectorRef& w, Inversion inversion) {
  return model.metric(w, inversion);
}

/// Test accuracy of the posterior-mean predictive probability (1/N) Σ_i s(w_iᵀx),
/// thresholded at 1/2 with ties predicted as label 1.
inline double blr_predict(const PointMatrix& particles, const MatrixRef& X_test, const VectorRef& y_test) {
  if (particles.rows() == 0 || X_test.rows() == 0) throw precondition_error("blr_predict: empty input");
  if (particles.cols() != X_test.cols()) throw dimension_error("blr_predict: feature count mismatch");
  if (X_test.rows() != y_test.size()) throw dimension_error("blr_predict: label count mismatch");
  const Matrix z = X_test * particles.transpose();
  std::size_t correct = 0;
  for (Eigen::Index d = 0; d < z.rows(); ++d) {
    double prob = 0.0;
    for (Eigen::Index i = 0; i < z.cols(); ++i) prob += logistic(z(d, i));
    prob /= static_cast<double>(z.cols());
    const double label = prob >= 0.5 ? 1.0 : 0.0;
    if (label == y_test(d)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(z.rows());
}

/// Wraps a target with the constant identity metric.
template <GradLogTarget T>
class IdentityMetric {
 public:
  explicit IdentityMetric(const T& target, Eigen::Index dim) : target_(&target), dim_(dim) {}

  Vector grad_log(const VectorRef& x) const { return target_->grad_log(x); }

  MetricQuantities metric(const VectorRef&) const {
    return {Matrix::Identity(dim_, dim_), Matrix::Identity(dim_, dim_), Vector::Zero(dim_), Vector::Zero(dim_)};
  }

 private:
  const T* target_;
  Eigen::Index dim_;
};

/// N(mean, σ² I).
class IsotropicGaussian {
 public:
  IsotropicGaussian(Vector mean, double sigma) : mean_(std::move(mean)), sigma2_(sigma * sigma) {
    if (!(sigma > 0.0)) throw precondition_error("IsotropicGaussian: sigma must be positive");
  }

  Vector grad_log(const VectorRef& x) const {
    if (x.size() != mean_.size()) throw dimension_error("IsotropicGaussian: dimension mismatch");
    return -(x - mean_) / sigma2_;
  }

  const Vector& mean() const noexcept { return mean_; }

 private:
  Vector mean_;
  double sigma2_;
};

/// The uniform distribution on S^{n-1}.
class UniformSphere {
 public:
  explicit UniformSphere(std::size_t n) : n_(static_cast<Eigen::Index>(n)) {}

  Vector grad_log(const VectorRef& y) const {
    if (y.size() != n_) throw dimension_error("UniformSphere: dimension mismatch");
    return Vector::Zero(n_);
  }

 private:
  Eigen::Index n_;
};

struct VmfComponent {
  Vector mean;  ///< unit mean direction
  double kappa;
  double weight;
};

/// p(y) ∝ Σ_c π_c exp(κ_c μ_cᵀ y) on S^{n-1}. Normalizers are never needed.
class VmfMixture {
 public:
  explicit VmfMixture(std::vector<VmfComponent> components) : components_(std::move(components)) {
    if (components_.empty()) throw precondition_error("VmfMixture: no components");
    const auto n = components_.front().mean.size();
    double total = 0.0;
    for (const auto& c : components_) {
      if (c.mean.size() != n) throw dimension_error("VmfMixture: components disagree on dimension");
      if (std::abs(c.mean.norm() - 1.0) > kUnitTolerance) throw precondition_error("VmfMixture: mean not unit");
      if (!(c.kappa > 0.0)) throw precondition_error("VmfMixture: kappa must be positive");
      if (!(c.weight > 0.0)) throw precondition_error("VmfMixture: weights must be positive");
      total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) throw precondition_error("VmfMixture: weights must sum to 1");
  }

  static VmfMixture single(Vector mean, double kappa) { return VmfMixture({{std::move(mean), kappa, 1.0}}); }

  const std::vector<VmfComponent>& components() const noexcept { return components_; }
  Eigen::Index dim() const noexcept { return components_.front().mean.size(); }

  /// log Σ_c π_c exp(κ_c μ_cᵀ y), i.e. the unnormalized log-density.
  double log_density(const VectorRef& y) const {
    const Vector l = logits(y);
    const double top = l.maxCoeff();
    return top + std::log((l.array() - top).exp().sum());
  }

  /// Ambient gradient Σ_c r_c(y) κ_c μ_c with responsibilities r_c.
  Vector grad_log(const VectorRef& y) const {
    detail::require_unit(y, "VmfMixture::grad_log");
    const Vector l = logits(y);
    const double top = l.maxCoeff();
    const Eigen::ArrayXd e = (l.array() - top).exp();
    const double z = e.sum();
    Vector g = Vector::Zero(dim());
    for (std::size_t c = 0; c < components_.size(); ++c) {
      g += components_[c].mean * (components_[c].kappa * e(static_cast<Eigen::Index>(c)) / z);
    }
    return g;
  }

 private:
  Vector logits(const VectorRef& y) const {
    if (y.size() != dim()) throw dimension_error("VmfMixture: dimension mismatch");
    Vector l(static_cast<Eigen::Index>(components_.size()));
    for (std::size_t c = 0; c < components_.size(); ++c) {
      l(static_cast<Eigen::Index>(c)) = std::log(components_[c].weight) + components_[c].kappa * components_[c].mean.dot(y);
    }
    return l;
  }

  std::vector<VmfComponent> components_;
};

inline Vector vmf_mixture_grad_log(const VmfMixture& target, const VectorRef& y) { return target.grad_log(y); }

/// Independent mixtures on each block of (S^{n-1})^P.
class ProductVmfTarget {
 public:
  explicit ProductVmfTarget(std::vector<VmfMixture> blocks) : blocks_(std::move(blocks)) {
    if (blocks_.empty()) throw precondition_error("ProductVmfTarget: no blocks");
    for (const auto& b : blocks_) {
      if (b.dim() != blocks_.front().dim()) throw dimension_error("ProductVmfTarget: block dimensions differ");
    }
  }

  std::size_t block_count() const noexcept { return blocks_.size(); }
  Eigen::Index block_dim() const noexcept { return blocks_.front().dim(); }
  const std::vector<VmfMixture>& blocks() const noexcept { return blocks_; }

  Vector grad_log(const VectorRef& y) const {
    const auto n = block_dim();
    if (y.size() != n * static_cast<Eigen::Index>(blocks_.size())) {
      throw dimension_error("ProductVmfTarget: dimension mismatch");
    }
    Vector g(y.size());
    for (std::size_t k = 0; k < blocks_.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(k) * n;
      g.segment(off, n) = blocks_[k].grad_log(y.segment(off, n));
    }
    return g;
  }

 private:
  std::vector<VmfMixture> blocks_;
};

}  // namespace rsvgd
