#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "infogeo/common.hpp"
#include "infogeo/geometry.hpp"
#include "infogeo/likelihood.hpp"
#include "infogeo/linalg.hpp"
#include "infogeo/models.hpp"

namespace infogeo {

struct AxisSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  int resolution = 100;
};

/// Grid coordinate k of an axis: uniform, endpoints inclusive. The
/// fraction k/(res-1) is formed first so co-located points of nested
/// resolutions are bitwise identical.
inline double axis_point(const AxisSpec& axis, int k) {
  const double frac = static_cast<double>(k) / static_cast<double>(axis.resolution - 1);
  return axis.lo + (axis.hi - axis.lo) * frac;
}

struct GridFailure {
  int i = 0;
  int j = 0;
  std::string reason;
};

/// Scalar field sampled on a rectangular grid. values(i, j) belongs to
/// (axis_point(axis1, i), axis_point(axis2, j)); failed cells hold NaN
/// and are listed in `failures`.
struct ScalarGrid {
  AxisSpec axis1;
  AxisSpec axis2;
  Matrix values;
  std::vector<GridFailure> failures;
};

/// Evaluates `cell` at every grid point, cells split across threads.
/// Each cell writes only its own slot and failures never abort the scan,
/// so results are bitwise independent of thread count and order.
inline ScalarGrid scan_grid(const AxisSpec& axis1, const AxisSpec& axis2,
                            const std::function<double(double, double)>& cell,
                            unsigned threads = 0) {
  if (axis1.resolution < 2 || axis2.resolution < 2)
    throw DomainError("scan_grid: resolution must be at least 2");
  if (!(axis1.hi > axis1.lo) || !(axis2.hi > axis2.lo))
    throw DomainError("scan_grid: axis upper bound must exceed lower bound");
  ScalarGrid grid;
  grid.axis1 = axis1;
  grid.axis2 = axis2;
  grid.values = Matrix(axis1.resolution, axis2.resolution,
                       std::numeric_limits<double>::quiet_NaN());

  const int n1 = axis1.resolution, n2 = axis2.resolution;
  const long total = static_cast<long>(n1) * n2;
  if (threads == 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : std::min(hw, 8u);
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(total));

  std::vector<std::vector<GridFailure>> local_failures(threads);
  auto work = [&](unsigned w) {
    const long begin = total * w / threads;
    const long end = total * (w + 1) / threads;
    for (long idx = begin; idx < end; ++idx) {
      const int i = static_cast<int>(idx / n2);
      const int j = static_cast<int>(idx % n2);
      const double t1 = axis_point(axis1, i);
      const double t2 = axis_point(axis2, j);
      try {
        grid.values(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
            cell(t1, t2);
      } catch (const std::exception& e) {
        local_failures[w].push_back({i, j, e.what()});
      }
    }
  };

  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& lf : local_failures)
    grid.failures.insert(grid.failures.end(), lf.begin(), lf.end());
  std::sort(grid.failures.begin(), grid.failures.end(),
            [](const GridFailure& a, const GridFailure& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return grid;
}

/// Normalised log-likelihood over the box; cells are <= 0 up to
/// optimizer tolerance, 0 at the MLE's cell.
inline ScalarGrid loglik_grid(const ModelSpec& spec, const Dataset& data,
                              const MleResult& mle, const AxisSpec& axis1,
                              const AxisSpec& axis2, unsigned threads = 0) {
  return scan_grid(axis1, axis2,
                   [&](double t1, double t2) {
                     ParameterPoint p{spec.inferred, {t1, t2}};
                     return normalized_log_likelihood(spec, p, data, mle);
                   },
                   threads);
}

/// Scalar curvature over the box; singular-metric cells land in
/// `failures` and the scan continues.
inline ScalarGrid curvature_grid(const MetricField& metric, const AxisSpec& axis1,
                                 const AxisSpec& axis2, unsigned threads = 0) {
  return scan_grid(axis1, axis2,
                   [&](double t1, double t2) {
                     return scalar_curvature(metric, {t1, t2});
                   },
                   threads);
}

}  // namespace infogeo
