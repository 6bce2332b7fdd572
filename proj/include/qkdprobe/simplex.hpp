#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace qkdprobe {

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x{};
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
  bool converged = false;
};

struct SimplexOptions {
  double initial_step = 0.1;
  double min_diameter = 1e-9;
  int max_evaluations = 10000;
};

/// Nelder-Mead with standard coefficients. f may return +inf for infeasible
/// points; the simplex then contracts away from them.
template <std::size_t N, typename F>
SimplexResult<N> nelder_mead(F&& f, const std::array<double, N>& start,
                             const SimplexOptions& opt = {}) {
  using Point = std::array<double, N>;
  std::array<Point, N + 1> pts;
  std::array<double, N + 1> val;
  SimplexResult<N> res;
  auto eval = [&](const Point& p) {
    ++res.evaluations;
    return f(p);
  };

  pts[0] = start;
  val[0] = eval(start);
  for (std::size_t i = 0; i < N; ++i) {
    pts[i + 1] = start;
    pts[i + 1][i] += opt.initial_step;
    val[i + 1] = eval(pts[i + 1]);
  }

  std::array<std::size_t, N + 1> order;
  auto diameter = [&] {
    double d = 0.0;
    for (std::size_t i = 1; i <= N; ++i)
      for (std::size_t j = 0; j < N; ++j) d = std::max(d, std::abs(pts[i][j] - pts[0][j]));
    return d;
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return val[a] < val[b]; });
    {
      auto p2 = pts;
      auto v2 = val;
      for (std::size_t i = 0; i <= N; ++i) {
        pts[i] = p2[order[i]];
        val[i] = v2[order[i]];
      }
    }
    if (diameter() < opt.min_diameter) {
      res.converged = true;
      break;
    }
    if (res.evaluations >= opt.max_evaluations) break;

    Point centroid{};
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) centroid[j] += pts[i][j] / static_cast<double>(N);
    auto along = [&](double t) {
      Point p;
      for (std::size_t j = 0; j < N; ++j) p[j] = centroid[j] + t * (pts[N][j] - centroid[j]);
      return p;
    };

    const Point xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < val[0]) {
      const Point xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[N] = xe;
        val[N] = fe;
      } else {
        pts[N] = xr;
        val[N] = fr;
      }
    } else if (fr < val[N - 1]) {
      pts[N] = xr;
      val[N] = fr;
    } else {
      const bool outside = fr < val[N];
      const Point xc = along(outside ? -0.5 : 0.5);
      const double fc = eval(xc);
      if (fc < (outside ? fr : val[N])) {
        pts[N] = xc;
        val[N] = fc;
      } else {
        for (std::size_t i = 1; i <= N; ++i) {
          for (std::size_t j = 0; j < N; ++j) pts[i][j] = pts[0][j] + 0.5 * (pts[i][j] - pts[0][j]);
          val[i] = eval(pts[i]);
        }
      }
    }
  }
  res.x = pts[0];
  res.value = val[0];
  return res;
}

}  // namespace qkdprobe
