#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "rsvgd/config.hpp"
#include "rsvgd/data.hpp"
#include "rsvgd/discrepancy.hpp"
#include "rsvgd/errors.hpp"
#include "rsvgd/fields.hpp"
#include "rsvgd/kernel.hpp"
#include "rsvgd/manifold.hpp"
#include "rsvgd/optimizer.hpp"
#include "rsvgd/particles.hpp"
#include "rsvgd/report.hpp"
#include "rsvgd/run.hpp"
#include "rsvgd/target.hpp"

namespace rsvgd {

namespace detail {

/// Independent RNG seed for one consumer of the run seed (splitmix64 finalizer).
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { data_stream = 0, split_stream = 1, init_stream = 2 };

inline PointMatrix gaussian_points(std::size_t count, std::size_t dim, double mean, double sd, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PointMatrix p(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) p(i, j) = mean + sd * normal(rng);
  }
  return p;
}

/// Normalized standard normals, blockwise: uniform on (S^{n-1})^P.
inline PointMatrix uniform_sphere_points(std::size_t count, std::size_t blocks, std::size_t n, std::uint64_t seed) {
  PointMatrix p = gaussian_points(count, blocks * n, 0.0, 1.0, seed);
  const auto nn = static_cast<Eigen::Index>(n);
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (std::size_t k = 0; k < blocks; ++k) {
      auto block = p.row(i).segment(static_cast<Eigen::Index>(k) * nn, nn);
      block /= block.norm();
    }
  }
  return p;
}

/// Kernel schedule for Euclidean runs: fixed, or the median heuristic
/// recomputed from every snapshot unless frozen at the initial cloud.
class EuclideanKernelPolicy {
 public:
  EuclideanKernelPolicy(const RunConfig& c, const PointMatrix& initial) : mode_(c.kernel), freeze_(c.freeze_bandwidth) {
    if (mode_.rfind("fixed:", 0) == 0) {
      fixed_ = KernelSpec::gaussian(detail::to_double("kernel", mode_.substr(6)));
    } else if (freeze_) {
      fixed_ = from_points(initial);
    }
  }

  KernelSpec operator()(const PointMatrix& points) const { return fixed_ ? *fixed_ : from_points(points); }

 private:
  KernelSpec from_points(const PointMatrix& points) const {
    const double h = points.rows() >= 2 ? median_bandwidth(points).h : 1.0;
    if (mode_ == "summed") return KernelSpec::summed_gaussian(summed_bandwidths(h));
    return KernelSpec::gaussian(h);
  }

  std::string mode_;
  bool freeze_;
  std::optional<KernelSpec> fixed_;
};

inline OptimizerState make_optimizer(const RunConfig& c) {
  if (c.method == "svgd") return OptimizerState(AdagradMomentum{*c.step, c.momentum, c.fuzz});
  return OptimizerState(VanillaStep{*c.step});
}

inline std::vector<VmfComponent> components_of(const RunConfig& c) {
  std::vector<VmfComponent> out;
  double total = 0.0;
  for (const auto& text : c.components) {
    out.push_back(parse_component(text));
    total += out.back().weight;
  }
  // Weights in a config file are relative; normalize them.
  for (auto& comp : out) comp.weight /= total;
  return out;
}

inline RunOptions run_options(const RunConfig& c) { return {c.iters, c.cadence, c.timing}; }

inline void stamp_header(RunReport& report, const RunConfig& c) {
  for (const auto& [k, v] : header_entries(c)) report.set_header(k, v);
}

}  // namespace detail

/// Particles, resolved configuration and report of one benchmark run.
struct BenchResult {
  RunConfig config;
  RunReport report;
  ParticleCloud cloud;
};

/// Bayesian logistic regression on a dataset file or the seeded synthetic generator.
/// Reports test accuracy of the posterior-mean predictor.
inline BenchResult blr_bench(const RunConfig& raw) {
  const RunConfig c = resolve(raw);
  Dataset data;
  if (c.data.empty()) {
    data = make_synthetic_blr(c.synthetic_rows, c.synthetic_features, detail::stream_seed(c.seed, detail::data_stream),
                              c.synthetic_separable)
               .data;
  } else {
    data = load_sparse_dataset(c.data);
  }
  const Split split = split_standardize(data, c.split, detail::stream_seed(c.seed, detail::split_stream), c.standardize);
  const BlrModel model(split.train.X, split.train.y, c.alpha,
                       c.inversion == "direct" ? Inversion::direct : Inversion::sherman_morrison);
  const auto m = static_cast<std::size_t>(model.dim());

  ParticleCloud cloud(detail::gaussian_points(c.particles, m, 0.0, std::sqrt(c.alpha),
                                              detail::stream_seed(c.seed, detail::init_stream)),
                      ManifoldSpec::euclidean(m));
  const detail::EuclideanKernelPolicy kernel(c, cloud.points());
  OptimizerState opt = detail::make_optimizer(c);

  auto field = [&](const ParticleCloud& cl) {
    const KernelSpec k = kernel(cl.points());
    return c.method == "svgd" ? svgd_field(cl, model, k, c.threads) : rsvgd_euclidean_field(cl, model, k, c.threads);
  };
  auto metrics = [&](const ParticleCloud& cl) {
    return std::vector<double>{blr_predict(cl.points(), split.test.X, split.test.y)};
  };
  RunResult r = run(std::move(cloud), field, opt, detail::run_options(c), {"test_accuracy"}, metrics);
  detail::stamp_header(r.report, c);
  return {c, std::move(r.report), std::move(r.cloud)};
}

/// Standard normal target in `dim` dimensions from a shifted Gaussian start.
/// RSVGD runs with the identity metric. Reports per-axis moments and the KSD
/// under a unit-bandwidth Gaussian kernel.
inline BenchResult gaussian_sanity(const RunConfig& raw) {
  const RunConfig c = resolve(raw);
  const std::size_t d = *c.dim;
  const IsotropicGaussian target(Vector::Zero(static_cast<Eigen::Index>(d)), 1.0);
  const IdentityMetric<IsotropicGaussian> metric_target(target, static_cast<Eigen::Index>(d));

  ParticleCloud cloud(detail::gaussian_points(c.particles, d, c.init_mean, c.init_std,
                                              detail::stream_seed(c.seed, detail::init_stream)),
                      ManifoldSpec::euclidean(d));
  const detail::EuclideanKernelPolicy kernel(c, cloud.points());
  OptimizerState opt = detail::make_optimizer(c);
  const KernelSpec ksd_kernel = KernelSpec::gaussian(1.0);

  std::vector<std::string> names;
  for (std::size_t i = 0; i < d; ++i) names.push_back("mean_" + std::to_string(i));
  for (std::size_t i = 0; i < d; ++i) names.push_back("std_" + std::to_string(i));
  names.emplace_back("ksd");

  auto field = [&](const ParticleCloud& cl) {
    const KernelSpec k = kernel(cl.points());
    return c.method == "svgd" ? svgd_field(cl, target, k, c.threads)
                              : rsvgd_euclidean_field(cl, metric_target, k, c.threads);
  };
  auto metrics = [&](const ParticleCloud& cl) {
    const PointMatrix& p = cl.points();
    const double count = static_cast<double>(p.rows());
    std::vector<double> v;
    const Vector mean = p.colwise().sum().transpose() / count;
    for (Eigen::Index i = 0; i < mean.size(); ++i) v.push_back(mean(i));
    for (Eigen::Index i = 0; i < mean.size(); ++i) {
      v.push_back(std::sqrt((p.col(i).array() - mean(i)).square().sum() / count));
    }
    v.push_back(ksd_euclidean(p, target, ksd_kernel, Estimator::v_statistic, c.threads).value);
    return v;
  };
  RunResult r = run(std::move(cloud), field, opt, detail::run_options(c), names, metrics);
  detail::stamp_header(r.report, c);
  return {c, std::move(r.report), std::move(r.cloud)};
}

/// Angle in degrees between the particle mean resultant and `mu`.
inline double resultant_angle_deg(const PointMatrix& points, const VectorRef& mu) {
  const Vector resultant = points.colwise().sum().transpose();
  const double norm = resultant.norm();
  if (!(norm > 0.0)) return 90.0;
  const double cosine = std::clamp(resultant.dot(mu) / (norm * mu.norm()), -1.0, 1.0);
  return std::acos(cosine) * 180.0 / std::numbers::pi;
}

/// vMF mixture target on S^{n-1} from a uniform start. Reports the RKSD and the
/// angle between the mean resultant direction and the first component mean.
inline BenchResult sphere_demo(const RunConfig& raw) {
  const RunConfig c = resolve(raw);
  const std::size_t n = *c.dim;
  const VmfMixture target(detail::components_of(c));
  const KernelSpec kernel = KernelSpec::vmf_product(*c.kappa, 1, n);
  const Vector mu = target.components().front().mean;

  ParticleCloud cloud(detail::uniform_sphere_points(c.particles, 1, n, detail::stream_seed(c.seed, detail::init_stream)),
                      ManifoldSpec::sphere(n));
  OptimizerState opt = detail::make_optimizer(c);
  auto field = [&](const ParticleCloud& cl) { return rsvgd_sphere_field(cl, target, kernel, c.threads); };
  auto metrics = [&](const ParticleCloud& cl) {
    return std::vector<double>{rksd_sphere(cl.points(), target, kernel, Estimator::v_statistic, c.threads).value,
                               resultant_angle_deg(cl.points(), mu)};
  };
  RunResult r = run(std::move(cloud), field, opt, detail::run_options(c), {"rksd", "resultant_angle_deg"}, metrics);
  detail::stamp_header(r.report, c);
  r.report.set_header("clip_events", std::to_string(opt.clip_events()));
  return {c, std::move(r.report), std::move(r.cloud)};
}

/// The same vMF mixture on every block of (S^{n-1})^P; reports step norms only.
inline BenchResult product_demo(const RunConfig& raw) {
  const RunConfig c = resolve(raw);
  const std::size_t n = *c.dim;
  const VmfMixture block(detail::components_of(c));
  const ProductVmfTarget target(std::vector<VmfMixture>(c.blocks, block));
  const KernelSpec kernel = KernelSpec::vmf_product(*c.kappa, c.blocks, n);

  ParticleCloud cloud(
      detail::uniform_sphere_points(c.particles, c.blocks, n, detail::stream_seed(c.seed, detail::init_stream)),
      ManifoldSpec::product_sphere(c.blocks, n));
  OptimizerState opt = detail::make_optimizer(c);
  auto field = [&](const ParticleCloud& cl) { return rsvgd_product_field(cl, target, kernel, c.threads); };
  auto metrics = [](const ParticleCloud&) { return std::vector<double>{}; };
  RunResult r = run(std::move(cloud), field, opt, detail::run_options(c), {}, metrics);
  detail::stamp_header(r.report, c);
  r.report.set_header("clip_events", std::to_string(opt.clip_events()));
  return {c, std::move(r.report), std::move(r.cloud)};
}

inline BenchResult run_command(const RunConfig& c) {
  if (c.command == "blr-bench") return blr_bench(c);
  if (c.command == "sphere-demo") return sphere_demo(c);
  if (c.command == "product-demo") return product_demo(c);
  if (c.command == "gaussian-sanity") return gaussian_sanity(c);
  throw precondition_error("unknown command '" + c.command + "'");
}

/// Writes the report to `config.out`, or to `fallback` when no path is set.
inline void write_report(const BenchResult& result, std::ostream& fallback) {
  if (result.config.out.empty()) {
    result.report.write_csv(fallback);
    return;
  }
  std::ofstream out(result.config.out, std::ios::binary);
  if (!out) throw error("cannot write report '" + result.config.out + "'");
  result.report.write_csv(out);
}

}  // namespace rsvgd
