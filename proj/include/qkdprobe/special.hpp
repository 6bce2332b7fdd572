#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qkdprobe/error.hpp"

namespace qkdprobe {

/// z with erf(z) = y, by Newton on std::erf kept inside a shrinking bracket.
inline double inverse_erf(double y) {
  if (!(std::abs(y) < 1.0)) throw Error(ErrorCode::Domain, "inverse_erf needs |y| < 1");
  if (y == 0.0) return 0.0;
  const double sign = y < 0.0 ? -1.0 : 1.0;
  const double t = std::abs(y);
  double lo = 0.0;
  double hi = 6.0;  // erf(6) rounds to 1
  // Leading term of the asymptotic inverse as the starting point.
  const double w = -std::log((1.0 - t) * (1.0 + t));
  double z = std::min(std::sqrt(std::max(w - std::log(w) / 2.0, 0.0)), 5.9);
  if (t < 0.5) z = t * std::sqrt(std::numbers::pi) / 2.0;
  const double k = 2.0 / std::sqrt(std::numbers::pi);
  for (int it = 0; it < 100; ++it) {
    const double f = std::erf(z) - t;
    if (f == 0.0) break;
    if (f < 0.0) lo = z; else hi = z;
    double next = z - f / (k * std::exp(-z * z));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - z) <= 1e-16 * std::max(1.0, z)) {
      z = next;
      break;
    }
    z = next;
  }
  return sign * z;
}

}  // namespace qkdprobe
