#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rsvgd/rsvgd.hpp"
#include "support/oracles.hpp"

using rsvgd::KernelSpec;
using rsvgd::ManifoldSpec;
using rsvgd::Matrix;
using rsvgd::ParticleCloud;
using rsvgd::PointMatrix;
using rsvgd::Vector;

namespace {

PointMatrix sphere_cloud(std::mt19937_64& rng, std::size_t count, std::size_t blocks, Eigen::Index n) {
  PointMatrix p(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(blocks) * n);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (std::size_t k = 0; k < blocks; ++k) {
      p.row(i).segment(static_cast<Eigen::Index>(k) * n, n) = oracle::unit_vector(rng, n).transpose();
    }
  }
  return p;
}

/// f(y') = (1/N) Σ_j bracket(y_j, y') for the vMF product kernel, written
/// with the ambient derivatives of K and the log-form third term.
double product_objective(double kappa, std::size_t blocks, Eigen::Index n, const PointMatrix& pts,
                         const PointMatrix& grads, const Vector& yp) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < pts.rows(); ++j) {
    double K = 1.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < blocks; ++k) {
      const auto off = static_cast<Eigen::Index>(k) * n;
      const Vector y = pts.row(j).segment(off, n).transpose();
      const Vector g = grads.row(j).segment(off, n).transpose();
      const Vector lk = kappa * yp.segment(off, n);
      K *= std::exp(kappa * y.dot(yp.segment(off, n)));
      sum += g.dot(lk) + lk.squaredNorm() - std::pow(y.dot(lk), 2) - (y.dot(g) + n - 1.0) * y.dot(lk);
    }
    total += K * sum;
  }
  return total / static_cast<double>(pts.rows());
}

}  // namespace

TEST(ParticleCloud, Validation) {
  EXPECT_THROW(ParticleCloud(PointMatrix(0, 2), ManifoldSpec::euclidean(2)), rsvgd::precondition_error);
  EXPECT_THROW(ParticleCloud(PointMatrix::Zero(2, 3), ManifoldSpec::euclidean(2)), rsvgd::dimension_error);
  EXPECT_THROW(ParticleCloud(PointMatrix::Ones(1, 2), ManifoldSpec::sphere(2)), rsvgd::precondition_error);
}

TEST(SvgdField, SingleParticleAtMode) {
  const rsvgd::IsotropicGaussian target(Vector::Zero(2), 1.0);
  const ParticleCloud cloud(PointMatrix::Zero(1, 2), ManifoldSpec::euclidean(2));
  EXPECT_TRUE(rsvgd::svgd_field(cloud, target, KernelSpec::gaussian(1.0)).vectors.isZero(0.0));
}

TEST(SvgdField, AntisymmetricPair) {
  const rsvgd::IsotropicGaussian target(Vector::Zero(2), 1.0);
  PointMatrix p(2, 2);
  p << 1.5, 0.0, -1.5, 0.0;
  const auto f = rsvgd::svgd_field(ParticleCloud(p, ManifoldSpec::euclidean(2)), target, KernelSpec::gaussian(0.8));
  EXPECT_LT((f.at(0) + f.at(1)).norm(), 1e-15);
  EXPECT_GT(f.at(0).norm(), 0.0);
}

TEST(SvgdField, MatchesDoubleLoop) {
  std::mt19937_64 rng(1);
  const rsvgd::IsotropicGaussian target(oracle::normal_vector(rng, 2), 1.3);
  for (int t = 0; t < 20; ++t) {
    const PointMatrix p = oracle::normal_samples(rng, 3, 2);
    const double h = 0.7;
    const auto f = rsvgd::svgd_field(ParticleCloud(p, ManifoldSpec::euclidean(2)), target, KernelSpec::gaussian(h));
    for (Eigen::Index i = 0; i < 3; ++i) {
      Vector v = Vector::Zero(2);
      for (Eigen::Index j = 0; j < 3; ++j) {
        const Vector a = p.row(j).transpose();
        const Vector b = p.row(i).transpose();
        const double k = std::exp(-(a - b).squaredNorm() / (2.0 * h));
        v += k * target.grad_log(a) - (a - b) / h * k;
      }
      EXPECT_LT((f.at(i) - v / 3.0).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(SvgdField, RejectsSphereCloud) {
  const rsvgd::UniformSphere target(3);
  PointMatrix p(1, 3);
  p << 0, 0, 1;
  EXPECT_THROW(rsvgd::svgd_field(ParticleCloud(p, ManifoldSpec::sphere(3)), target, KernelSpec::gaussian(1.0)),
               rsvgd::precondition_error);
}

TEST(RsvgdEuclideanField, ConstantMetricIsGradientOfObjective) {
  std::mt19937_64 rng(2);
  const rsvgd::IsotropicGaussian target(oracle::normal_vector(rng, 3), 1.0);
  const rsvgd::IdentityMetric<rsvgd::IsotropicGaussian> metric(target, 3);
  const KernelSpec kernel = KernelSpec::gaussian(1.1);
  const PointMatrix p = oracle::normal_samples(rng, 5, 3);
  const auto f = rsvgd::rsvgd_euclidean_field(ParticleCloud(p, ManifoldSpec::euclidean(3)), metric, kernel);
  const auto objective = [&](const Vector& b) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const Vector a = p.row(j).transpose();
      const auto jet = kernel.jet(a, b);
      s += target.grad_log(a).dot(jet.grad1) + jet.laplacian1;
    }
    return s / static_cast<double>(p.rows());
  };
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    EXPECT_LT(oracle::rel_err(f.at(i), oracle::fd_gradient(objective, p.row(i).transpose())), 1e-7);
  }
}

TEST(RsvgdEuclideanField, SingleParticleAtModeIsStationary) {
  const rsvgd::IsotropicGaussian target(Vector::Zero(2), 1.0);
  const rsvgd::IdentityMetric<rsvgd::IsotropicGaussian> metric(target, 2);
  const auto f = rsvgd::rsvgd_euclidean_field(ParticleCloud(PointMatrix::Zero(1, 2), ManifoldSpec::euclidean(2)),
                                              metric, KernelSpec::gaussian(0.6));
  EXPECT_LT(f.vectors.norm(), 1e-15);
}

TEST(RsvgdEuclideanField, BlrMatchesTwoLevelFiniteDifferences) {
  std::mt19937_64 rng(3);
  Matrix X(20, 3);
  Vector y(20);
  for (Eigen::Index r = 0; r < 20; ++r) {
    X.row(r) = oracle::normal_vector(rng, 3).transpose();
    y(r) = r % 2;
  }
  const rsvgd::BlrModel model(X, y, 1.0);
  const PointMatrix p = oracle::normal_samples(rng, 4, 3);
  for (const auto& kernel : {KernelSpec::gaussian(1.3), KernelSpec::summed_gaussian({0.5, 1.0, 2.0})}) {
    const auto field = rsvgd::rsvgd_euclidean_field(ParticleCloud(p, ManifoldSpec::euclidean(3)), model, kernel);

    // Inner expectation with every derivative taken by differences: ∂_a log(p√|G|)
    // from the log-posterior and log det G, ∂_a g^{ab} from the inverse metric,
    // ∂_b K and ∂_a∂_b K from kernel values.
    const auto log_p_sqrt_det = [&](const Vector& w) {
      return model.log_posterior(w) + 0.5 * std::log(model.metric(w).G.determinant());
    };
    const auto ginv = [&](const Vector& w) { return Matrix(model.metric(w).G.inverse()); };
    std::vector<Vector> drift;
    std::vector<Matrix> ginvs;
    for (Eigen::Index j = 0; j < p.rows(); ++j) {
      const Vector a = p.row(j).transpose();
      const Matrix Gi = ginv(a);
      Vector div = Vector::Zero(3);
      for (Eigen::Index col = 0; col < 3; ++col) {
        const auto c = [&](const Vector& w) { return Vector(ginv(w).col(col)); };
        div += oracle::fd_jacobian(c, a, 1e-5).col(col);
      }
      drift.push_back(Gi * oracle::fd_gradient(log_p_sqrt_det, a, 1e-5) + div);
      ginvs.push_back(Gi);
    }
    const double hk = 1e-3;
    const auto inner = [&](const Vector& b) {
      double s = 0.0;
      for (Eigen::Index j = 0; j < p.rows(); ++j) {
        const Vector a = p.row(j).transpose();
        const auto K = [&](const Vector& q) { return kernel.value(q, b); };
        const Vector gk = oracle::fd_gradient(K, a, hk);
        Matrix H(3, 3);
        for (Eigen::Index u = 0; u < 3; ++u) {
          for (Eigen::Index v = 0; v < 3; ++v) {
            Vector e_u = Vector::Zero(3), e_v = Vector::Zero(3);
            e_u(u) = hk;
            e_v(v) = hk;
            H(u, v) = (K(a + e_u + e_v) - K(a + e_u - e_v) - K(a - e_u + e_v) + K(a - e_u - e_v)) / (4 * hk * hk);
          }
        }
        s += drift[static_cast<std::size_t>(j)].dot(gk) + (ginvs[static_cast<std::size_t>(j)].array() * H.array()).sum();
      }
      return s / static_cast<double>(p.rows());
    };
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const Vector b = p.row(i).transpose();
      const Vector expect = ginv(b) * oracle::fd_gradient(inner, b, 1e-3);
      EXPECT_LT(oracle::rel_err(field.at(i), expect), 1e-5) << "particle " << i;
    }
  }
}

TEST(RsvgdSphereField, FixedPoints) {
  std::mt19937_64 rng(5);
  const Vector y = oracle::unit_vector(rng, 3);
  const PointMatrix p = y.transpose();
  const ParticleCloud cloud(p, ManifoldSpec::sphere(3));
  const KernelSpec kernel = KernelSpec::vmf_product(3.0, 1, 3);
  EXPECT_LT(rsvgd::rsvgd_sphere_field(cloud, rsvgd::UniformSphere(3), kernel).vectors.norm(), 1e-14);
  const auto at_mode = rsvgd::rsvgd_sphere_field(cloud, rsvgd::VmfMixture::single(y, 10.0), kernel);
  EXPECT_LT(at_mode.vectors.norm(), 1e-12);
}

TEST(RsvgdSphereField, TangentAndGradientOfObjective) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index n = 3 + t % 3;
    const rsvgd::VmfMixture target({{oracle::unit_vector(rng, n), 4.0, 0.6}, {oracle::unit_vector(rng, n), 2.0, 0.4}});
    const PointMatrix p = sphere_cloud(rng, 10, 1, n);
    const double kappa = 2.0;
    const auto f = rsvgd::rsvgd_sphere_field(ParticleCloud(p, ManifoldSpec::sphere(static_cast<std::size_t>(n))), target,
                                             KernelSpec::vmf_product(kappa, 1, static_cast<std::size_t>(n)));
    PointMatrix grads(p.rows(), n);
    for (Eigen::Index j = 0; j < p.rows(); ++j) grads.row(j) = target.grad_log(p.row(j).transpose()).transpose();
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const Vector yp = p.row(i).transpose();
      EXPECT_LE(std::abs(yp.dot(f.at(i))), 1e-10 * f.at(i).norm());
      const auto obj = [&](const Vector& q) { return product_objective(kappa, 1, n, p, grads, q); };
      const Vector expect = rsvgd::project_tangent_sphere(yp, oracle::fd_gradient(obj, yp));
      EXPECT_LT(oracle::rel_err(f.at(i), expect), 1e-6);
    }
  }
}

TEST(RsvgdSphereField, Validation) {
  PointMatrix p(1, 3);
  p << 0, 0, 1;
  const ParticleCloud cloud(p, ManifoldSpec::sphere(3));
  EXPECT_THROW(rsvgd::rsvgd_sphere_field(cloud, rsvgd::UniformSphere(3), KernelSpec::gaussian(1.0)),
               rsvgd::precondition_error);
  EXPECT_THROW(rsvgd::rsvgd_sphere_field(cloud, rsvgd::UniformSphere(3), KernelSpec::vmf_product(1.0, 1, 4)),
               rsvgd::dimension_error);
  const ParticleCloud flat(p, ManifoldSpec::euclidean(3));
  EXPECT_THROW(rsvgd::rsvgd_sphere_field(flat, rsvgd::UniformSphere(3), KernelSpec::vmf_product(1.0, 1, 3)),
               rsvgd::precondition_error);
}

TEST(RsvgdProductField, SingleBlockEqualsSphereBitwise) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index n = 2 + t % 4;
    const auto target = rsvgd::VmfMixture::single(oracle::unit_vector(rng, n), 1.0 + t);
    const PointMatrix p = sphere_cloud(rng, 7, 1, n);
    const auto kernel = KernelSpec::vmf_product(0.5 + t, 1, static_cast<std::size_t>(n));
    const auto a = rsvgd::rsvgd_sphere_field(ParticleCloud(p, ManifoldSpec::sphere(static_cast<std::size_t>(n))),
                                             target, kernel);
    const auto b = rsvgd::rsvgd_product_field(
        ParticleCloud(p, ManifoldSpec::product_sphere(1, static_cast<std::size_t>(n))), target, kernel);
    EXPECT_TRUE((a.vectors.array() == b.vectors.array()).all());
  }
}

TEST(RsvgdProductField, TangentAndGradientOfObjective) {
  std::mt19937_64 rng(8);
  const Eigen::Index n = 3;
  const std::size_t P = 2;
  const rsvgd::ProductVmfTarget target({rsvgd::VmfMixture::single(oracle::unit_vector(rng, n), 3.0),
                                        rsvgd::VmfMixture::single(oracle::unit_vector(rng, n), 6.0)});
  const PointMatrix p = sphere_cloud(rng, 5, P, n);
  const double kappa = 1.5;
  const auto f = rsvgd::rsvgd_product_field(ParticleCloud(p, ManifoldSpec::product_sphere(P, 3)), target,
                                            KernelSpec::vmf_product(kappa, P, 3));
  PointMatrix grads(p.rows(), p.cols());
  for (Eigen::Index j = 0; j < p.rows(); ++j) grads.row(j) = target.grad_log(p.row(j).transpose()).transpose();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const Vector yp = p.row(i).transpose();
    const auto obj = [&](const Vector& q) { return product_objective(kappa, P, n, p, grads, q); };
    const Vector grad = oracle::fd_gradient(obj, yp);
    for (std::size_t k = 0; k < P; ++k) {
      const auto off = static_cast<Eigen::Index>(k) * n;
      const Vector yk = yp.segment(off, n);
      const Vector vk = f.at(i).segment(off, n);
      EXPECT_LE(std::abs(yk.dot(vk)), 1e-10 * vk.norm());
      EXPECT_LT(oracle::rel_err(vk, rsvgd::project_tangent_sphere(yk, grad.segment(off, n))), 1e-5);
    }
  }
}

TEST(RsvgdProductField, UniformSingleParticleIsStationary) {
  std::mt19937_64 rng(9);
  const PointMatrix p = sphere_cloud(rng, 1, 3, 4);
  const rsvgd::ProductVmfTarget target(std::vector<rsvgd::VmfMixture>(
      3, rsvgd::VmfMixture({{oracle::unit_vector(rng, 4), 1.0, 0.5}, {oracle::unit_vector(rng, 4), 1.0, 0.5}})));
  struct Uniform {
    Vector grad_log(const Vector& y) const { return Vector::Zero(y.size()); }
  };
  const auto f = rsvgd::rsvgd_product_field(ParticleCloud(p, ManifoldSpec::product_sphere(3, 4)), Uniform{},
                                            KernelSpec::vmf_product(2.0, 3, 4));
  EXPECT_LT(f.vectors.norm(), 1e-10);
}

TEST(Fields, PermutationEquivariance) {
  std::mt19937_64 rng(10);
  const Eigen::Index n = 3;
  const auto target = rsvgd::VmfMixture::single(oracle::unit_vector(rng, n), 5.0);
  const PointMatrix p = sphere_cloud(rng, 6, 1, n);
  const auto kernel = KernelSpec::vmf_product(2.0, 1, 3);
  const auto f = rsvgd::rsvgd_sphere_field(ParticleCloud(p, ManifoldSpec::sphere(3)), target, kernel);
  const std::vector<Eigen::Index> perm{3, 0, 5, 1, 4, 2};
  PointMatrix q(p.rows(), p.cols());
  for (std::size_t i = 0; i < perm.size(); ++i) q.row(static_cast<Eigen::Index>(i)) = p.row(perm[i]);
  const auto g = rsvgd::rsvgd_sphere_field(ParticleCloud(q, ManifoldSpec::sphere(3)), target, kernel);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    EXPECT_LT((g.at(static_cast<Eigen::Index>(i)) - f.at(perm[i])).norm(), 1e-12 * (1.0 + f.at(perm[i]).norm()));
  }
}

TEST(Fields, ThreadCountDoesNotChangeBits) {
  std::mt19937_64 rng(11);
  const auto target = rsvgd::VmfMixture::single(oracle::unit_vector(rng, 4), 5.0);
  const PointMatrix p = sphere_cloud(rng, 13, 1, 4);
  const ParticleCloud cloud(p, ManifoldSpec::sphere(4));
  const auto kernel = KernelSpec::vmf_product(2.0, 1, 4);
  const auto one = rsvgd::rsvgd_sphere_field(cloud, target, kernel, 1);
  for (std::size_t threads : {2u, 3u, 8u}) {
    const auto many = rsvgd::rsvgd_sphere_field(cloud, target, kernel, threads);
    EXPECT_TRUE((one.vectors.array() == many.vectors.array()).all());
  }
}

TEST(ChartOracle, KernelDerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(12);
  const oracle::ChartVmfKernel k{1.7};
  for (int t = 0; t < 20; ++t) {
    const Vector a = oracle::chart_point(rng, 2, 0.8);
    const Vector b = oracle::chart_point(rng, 2, 0.8);
    const Vector u = oracle::normal_vector(rng, 2);
    const Matrix W = oracle::normal_vector(rng, 4).reshaped(2, 2);
    const auto ugradK = [&](const Vector& q) {
      return u.dot(oracle::fd_gradient([&](const Vector& s) { return k.value(s, q); }, a, 1e-4));
    };
    EXPECT_LT(oracle::rel_err(k.cross_hessian_transpose_times(a, b, u), oracle::fd_gradient(ugradK, b, 1e-4)), 1e-5);
    const auto weighted = [&](const Vector& q) {
      const auto gradK = [&](const Vector& s) {
        return oracle::fd_gradient([&](const Vector& r) { return k.value(r, q); }, s, 1e-4);
      };
      return (W.array() * oracle::fd_jacobian(gradK, a, 1e-4).array()).sum();
    };
    EXPECT_LT(oracle::rel_err(k.grad2_weighted_laplacian(a, b, W), oracle::fd_gradient(weighted, b, 1e-3)), 1e-4);
  }
}

TEST(ChartOracle, CoordinateFieldPushedForwardEqualsSphereField) {
  std::mt19937_64 rng(13);
  for (Eigen::Index n : {3, 5}) {
    const auto target = rsvgd::VmfMixture({{oracle::unit_vector(rng, n), 4.0, 0.7}, {oracle::unit_vector(rng, n), 2.0, 0.3}});
    PointMatrix x(20, n - 1);
    PointMatrix y(20, n);
    for (Eigen::Index i = 0; i < 20; ++i) {
      x.row(i) = oracle::chart_point(rng, n - 1, 0.9).transpose();
      y.row(i) = rsvgd::chart_inverse(x.row(i).transpose()).transpose();
    }
    const double kappa = 2.5;
    const PointMatrix chart = oracle::chart_field_ambient(x, target, kappa);
    const auto f = rsvgd::rsvgd_sphere_field(ParticleCloud(y, ManifoldSpec::sphere(static_cast<std::size_t>(n))), target,
                                             KernelSpec::vmf_product(kappa, 1, static_cast<std::size_t>(n)));
    for (Eigen::Index i = 0; i < 20; ++i) {
      EXPECT_LT(oracle::rel_err(f.at(i), Vector(chart.row(i).transpose())), 1e-6);
    }
  }
}

TEST(ApplyUpdate, VanillaSteps) {
  PointMatrix p(1, 2);
  p << 1.0, 2.0;
  const ParticleCloud cloud(p, ManifoldSpec::euclidean(2));
  rsvgd::OptimizerState opt(rsvgd::VanillaStep{0.1});
  const auto moved = rsvgd::apply_update(cloud, {PointMatrix::Ones(1, 2)}, opt);
  EXPECT_NEAR(moved.points()(0, 0), 1.1, 1e-15);
  EXPECT_NEAR(moved.points()(0, 1), 2.1, 1e-15);
  EXPECT_EQ(rsvgd::apply_update(cloud, {PointMatrix::Zero(1, 2)}, opt).points(), p);

  PointMatrix s(1, 2);
  s << 1.0, 0.0;
  PointMatrix v(1, 2);
  v << 0.0, std::numbers::pi / 2;
  rsvgd::OptimizerState unit(rsvgd::VanillaStep{1.0});
  const auto q = rsvgd::apply_update(ParticleCloud(s, ManifoldSpec::sphere(2)), {v}, unit);
  EXPECT_NEAR(q.points()(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(q.points()(0, 1), 1.0, 1e-15);
  EXPECT_EQ(unit.clip_events(), 0u);
  EXPECT_EQ(rsvgd::apply_update(ParticleCloud(s, ManifoldSpec::sphere(2)), {PointMatrix::Zero(1, 2)}, unit).points(), s);
}

TEST(ApplyUpdate, SphereStepsAreClipped) {
  PointMatrix s(1, 2);
  s << 1.0, 0.0;
  PointMatrix v(1, 2);
  v << 0.0, 3.0;
  rsvgd::OptimizerState opt(rsvgd::VanillaStep{1.0});
  const auto q = rsvgd::apply_update(ParticleCloud(s, ManifoldSpec::sphere(2)), {v}, opt);
  EXPECT_NEAR(q.points()(0, 1), 1.0, 1e-15);
  EXPECT_EQ(opt.clip_events(), 1u);
}

TEST(ApplyUpdate, AdagradMomentumRecursion) {
  PointMatrix p = PointMatrix::Zero(1, 2);
  rsvgd::OptimizerState opt(rsvgd::AdagradMomentum{0.5, 0.9, 1e-6});
  ParticleCloud cloud(p, ManifoldSpec::euclidean(2));
  PointMatrix g1(1, 2), g2(1, 2);
  g1 << 2.0, -1.0;
  g2 << 1.0, 3.0;
  Vector rho = Vector::Zero(2), mu = Vector::Zero(2), x = Vector::Zero(2);
  for (const PointMatrix& g : {g1, g2}) {
    cloud = rsvgd::apply_update(cloud, {g}, opt);
    const Vector v = g.row(0).transpose();
    rho += v.cwiseProduct(v);
    mu = 0.9 * mu + v.cwiseQuotient((rho.cwiseSqrt().array() + 1e-6).matrix());
    x += 0.5 * mu;
    EXPECT_LT((cloud.point(0) - x).norm(), 1e-14);
  }
}

TEST(ApplyUpdate, Validation) {
  EXPECT_THROW(rsvgd::OptimizerState(rsvgd::VanillaStep{0.0}), rsvgd::precondition_error);
  EXPECT_THROW(rsvgd::OptimizerState(rsvgd::AdagradMomentum{0.1, 1.0, 1e-6}), rsvgd::precondition_error);
  EXPECT_THROW(rsvgd::OptimizerState(rsvgd::AdagradMomentum{0.1, 0.9, 0.0}), rsvgd::precondition_error);
  PointMatrix s(1, 2);
  s << 1.0, 0.0;
  rsvgd::OptimizerState ada(rsvgd::AdagradMomentum{0.1});
  EXPECT_THROW(rsvgd::apply_update(ParticleCloud(s, ManifoldSpec::sphere(2)), {PointMatrix::Zero(1, 2)}, ada),
               rsvgd::precondition_error);
  rsvgd::OptimizerState van(rsvgd::VanillaStep{0.1});
  EXPECT_THROW(rsvgd::apply_update(ParticleCloud(s, ManifoldSpec::sphere(2)), {PointMatrix::Zero(2, 2)}, van),
               rsvgd::dimension_error);
}

TEST(Run, ZeroIterationsRecordsInitialRowOnly) {
  const rsvgd::IsotropicGaussian target(Vector::Zero(2), 1.0);
  const PointMatrix p = PointMatrix::Ones(3, 2);
  rsvgd::OptimizerState opt(rsvgd::VanillaStep{0.1});
  const auto r = rsvgd::run(
      ParticleCloud(p, ManifoldSpec::euclidean(2)),
      [&](const ParticleCloud& c) { return rsvgd::svgd_field(c, target, KernelSpec::gaussian(1.0)); }, opt,
      rsvgd::RunOptions{0, 5, false}, {"x"}, [](const ParticleCloud& c) { return std::vector<double>{c.points()(0, 0)}; });
  ASSERT_EQ(r.report.rows().size(), 1u);
  EXPECT_EQ(r.report.rows()[0].iteration, 0u);
  EXPECT_EQ(r.cloud.points(), p);
  EXPECT_EQ(r.report.columns(), (std::vector<std::string>{"wall_ms", "x", "mean_step_norm"}));
}

TEST(Run, CadenceAndFinalRow) {
  const rsvgd::IsotropicGaussian target(Vector::Zero(1), 1.0);
  rsvgd::OptimizerState opt(rsvgd::VanillaStep{0.1});
  const auto r = rsvgd::run(
      ParticleCloud(PointMatrix::Ones(2, 1), ManifoldSpec::euclidean(1)),
      [&](const ParticleCloud& c) { return rsvgd::svgd_field(c, target, KernelSpec::gaussian(1.0)); }, opt,
      rsvgd::RunOptions{7, 3, false}, {}, [](const ParticleCloud&) { return std::vector<double>{}; });
  std::vector<std::size_t> its;
  for (const auto& row : r.report.rows()) its.push_back(row.iteration);
  EXPECT_EQ(its, (std::vector<std::size_t>{0, 3, 6, 7}));
}

TEST(Run, ErrorsCarryIterationIndex) {
  rsvgd::OptimizerState opt(rsvgd::VanillaStep{0.1});
  int calls = 0;
  try {
    rsvgd::run(
        ParticleCloud(PointMatrix::Ones(1, 1), ManifoldSpec::euclidean(1)),
        [&](const ParticleCloud&) -> rsvgd::UpdateField {
          if (++calls == 3) throw rsvgd::precondition_error("boom");
          return {PointMatrix::Zero(1, 1)};
        },
        opt, rsvgd::RunOptions{5, 1, false}, {}, [](const ParticleCloud&) { return std::vector<double>{}; });
    FAIL() << "expected an error";
  } catch (const rsvgd::error& e) {
    EXPECT_NE(std::string(e.what()).find("iteration 3"), std::string::npos);
  }
}

TEST(Run, SphereDriftStaysBounded) {
  std::mt19937_64 rng(14);
  const auto target = rsvgd::VmfMixture::single(oracle::unit_vector(rng, 3), 10.0);
  const auto kernel = KernelSpec::vmf_product(3.0, 1, 3);
  rsvgd::OptimizerState opt(rsvgd::VanillaStep{0.1});
  const auto r = rsvgd::run(
      ParticleCloud(sphere_cloud(rng, 10, 1, 3), ManifoldSpec::sphere(3)),
      [&](const ParticleCloud& c) { return rsvgd::rsvgd_sphere_field(c, target, kernel); }, opt,
      rsvgd::RunOptions{1000, 1000, false}, {}, [](const ParticleCloud&) { return std::vector<double>{}; });
  for (Eigen::Index i = 0; i < r.cloud.points().rows(); ++i) {
    EXPECT_LT(std::abs(r.cloud.points().row(i).norm() - 1.0), 1e-9);
  }
}
