#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <vector>

#include "rsvgd/errors.hpp"
#include "rsvgd/optimizer.hpp"
#include "rsvgd/particles.hpp"
#include "rsvgd/report.hpp"

namespace rsvgd {

struct RunOptions {
  std::size_t iterations = 0;
  std::size_t cadence = 1;  ///< record metrics every `cadence` iterations
  bool timing = false;      ///< when false, wall_ms is written as 0 so reports are reproducible
};

struct RunResult {
  RunReport report;
  ParticleCloud cloud;
};

/// Synchronous particle loop.
///
/// Each iteration computes `field(cloud)` from a snapshot of all particles and
/// then moves every particle with `optimizer`. Metrics are recorded at
/// iteration 0, every `cadence` iterations, and at the final iteration. The
/// report columns are wall_ms, the names in `metric_names`, mean_step_norm.
template <typename FieldFn, typename MetricFn>
RunResult run(ParticleCloud cloud, FieldFn&& field, OptimizerState& optimizer, const RunOptions& options,
              const std::vector<std::string>& metric_names, MetricFn&& metrics) {
  if (options.cadence < 1) throw precondition_error("run: cadence must be >= 1");
  std::vector<std::string> columns{"wall_ms"};
  columns.insert(columns.end(), metric_names.begin(), metric_names.end());
  columns.emplace_back("mean_step_norm");
  RunReport report(columns);

  const auto start = std::chrono::steady_clock::now();
  auto record = [&](std::size_t it, double step_norm) {
    std::vector<double> row;
    row.reserve(columns.size());
    const double ms =
        options.timing ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
                       : 0.0;
    row.push_back(ms);
    const std::vector<double> values = metrics(cloud);
    if (values.size() != metric_names.size()) throw dimension_error("run: metric callback returned the wrong count");
    row.insert(row.end(), values.begin(), values.end());
    row.push_back(step_norm);
    report.add_row(it, std::move(row));
  };

  record(0, 0.0);
  for (std::size_t it = 1; it <= options.iterations; ++it) {
    try {
      const UpdateField f = field(cloud);
      cloud = apply_update(cloud, f, optimizer);
      if (it % options.cadence == 0 || it == options.iterations) record(it, optimizer.last_mean_step_norm());
    } catch (const std::exception& e) {
      throw error("iteration " + std::to_string(it) + ": " + e.what());
    }
  }
  return {std::move(report), std::move(cloud)};
}

}  // namespace rsvgd
