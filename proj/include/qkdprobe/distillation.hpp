#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/rng.hpp"
#include "qkdprobe/special.hpp"

namespace qkdprobe {

/// Collision (order-2) information of a distribution on 2^l outcomes:
/// l + log2(sum p^2).
inline double renyi_information(std::span<const double> probabilities, int l) {
  if (l < 0 || l > 62 || probabilities.size() != (std::size_t{1} << l)) {
    throw Error(ErrorCode::InvalidArgument, "distribution length must be 2^l");
  }
  double total = 0.0;
  double collision = 0.0;
  for (double p : probabilities) {
    if (p < 0.0) throw Error(ErrorCode::NotNormalized, "negative probability");
    total += p;
    collision += p * p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "probabilities sum to " << total;
    throw Error(ErrorCode::NotNormalized, os.str());
  }
  return static_cast<double>(l) + std::log2(collision);
}

/// Upper bound on the eavesdropper's average Shannon information after
/// hashing away s bits from data on which she holds r Renyi bits.
inline double pa_shannon_bound(double r, double s) {
  return std::exp2(r - s) / std::numbers::ln2;
}

inline double shannon_entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

struct PaCheckResult {
  double observed = 0.0;  // mean over hashes of (l - s) - H(Y)
  double sigma_mc = 0.0;  // standard error of that mean
  double max_single = 0.0;
  double bound = 0.0;
  double renyi = 0.0;
  bool holds = false;
};

namespace detail {

inline int gf2_rank(std::vector<std::uint32_t> rows) {
  int rank = 0;
  for (int bit = 31; bit >= 0; --bit) {
    const std::uint32_t mask = 1u << bit;
    auto pivot = std::find_if(rows.begin() + rank, rows.end(),
                              [mask](std::uint32_t r) { return (r & mask) != 0; });
    if (pivot == rows.end()) continue;
    std::iter_swap(rows.begin() + rank, pivot);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i != static_cast<std::size_t>(rank) && (rows[i] & mask)) rows[i] ^= rows[rank];
    }
    ++rank;
  }
  return rank;
}

}  // namespace detail

/// Toy privacy-amplification check: uniformly random full-rank GF(2)
/// matrices (still a universal class) hash l-bit strings to l - s bits; the eavesdropper's information
/// on the output is its entropy deficit.
inline PaCheckResult pa_empirical_check(int l, int s, std::span<const double> source,
                                        int hash_count, std::uint64_t seed) {
  if (l > 14) throw Error(ErrorCode::TooLarge, "l > 14 is too large for exhaustive enumeration");
  if (l < 1 || s < 0 || s > l || hash_count < 1) {
    throw Error(ErrorCode::InvalidArgument, "need 1 <= l, 0 <= s <= l, hash_count >= 1");
  }
  PaCheckResult res;
  res.renyi = renyi_information(source, l);
  res.bound = pa_shannon_bound(res.renyi, s);
  const int out_bits = l - s;
  const std::size_t inputs = std::size_t{1} << l;
  std::vector<double> hist(std::size_t{1} << out_bits);
  std::vector<std::uint32_t> rows(static_cast<std::size_t>(out_bits));
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int h = 0; h < hash_count; ++h) {
    auto eng = make_engine(seed, static_cast<std::uint64_t>(h));
    do {
      for (auto& r : rows) r = static_cast<std::uint32_t>(eng()) & ((1u << l) - 1u);
    } while (detail::gf2_rank(rows) < out_bits);
    std::fill(hist.begin(), hist.end(), 0.0);
    for (std::size_t x = 0; x < inputs; ++x) {
      std::size_t y = 0;
      for (int b = 0; b < out_bits; ++b) {
        y |= static_cast<std::size_t>(std::popcount(rows[b] & static_cast<std::uint32_t>(x)) & 1)
             << b;
      }
      hist[y] += source[x];
    }
    const double info = std::max(0.0, out_bits - shannon_entropy(hist));
    sum += info;
    sum_sq += info * info;
    res.max_single = std::max(res.max_single, info);
  }
  const double n = hash_count;
  res.observed = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) : 0.0;
  res.sigma_mc = std::sqrt(var / n);
  res.holds = res.observed <= res.bound + 3.0 * res.sigma_mc;
  return res;
}

/// Statistical allowance on the error rate: erfinv(1 - p) / sqrt(2n).
inline double xi(double n, double p) {
  if (!(n >= 1.0)) throw Error(ErrorCode::Domain, "xi needs n >= 1");
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::Domain, "xi needs 0 < p < 1");
  return inverse_erf(1.0 - p) / std::sqrt(2.0 * n);
}

inline double binary_entropy(double e) {
  if (e <= 0.0 || e >= 1.0) return 0.0;
  return -e * std::log2(e) - (1.0 - e) * std::log2(1.0 - e);
}

/// Error-correction leakage q. Zero by default; BinaryEntropy charges
/// f * n * h2(e_T / n) bits, an optional extension.
struct QModel {
  enum class Kind { Zero, BinaryEntropy } kind = Kind::Zero;
  double f = 1.0;

  double leak(std::int64_t n, std::int64_t errors) const {
    if (kind == Kind::Zero || n <= 0) return 0.0;
    return f * static_cast<double>(n) *
           binary_entropy(static_cast<double>(errors) / static_cast<double>(n));
  }
};

struct DistillationConfig {
  std::int64_t n = 1;
  std::int64_t e_T = 0;
  double p = 0.01;
  double q_leak = 0.0;
  double nu = 0.0;
  double g = 0.0;
  /// Arguments e/n + xi past the admissible E range are charged the
  /// largest Renyi information on the range instead of being rejected.
  bool clamp = true;
};

struct FrontierResult {
  double t_F = 0.0;
  std::int64_t argmax_e = 0;
  double xi = 0.0;
  /// Number of e whose argument fell outside the admissible range.
  std::int64_t clamped = 0;
};

inline void validate(const DistillationConfig& c) {
  if (c.n < 1) throw Error(ErrorCode::Domain, "n must be >= 1");
  if (c.e_T < 0 || c.e_T > c.n) throw Error(ErrorCode::Domain, "need 0 <= e_T <= n");
  if (!(c.p > 0.0 && c.p < 1.0)) throw Error(ErrorCode::Domain, "need 0 < p < 1");
  for (double v : {c.q_leak, c.nu, c.g}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::Domain, "leakage terms must be finite and nonnegative");
    }
  }
}

/// Largest I_opt^R over the admissible range: 1 bit wherever Q_opt crosses 0.
inline double renyi_envelope_max(const SignalGeometry& g) {
  const double emax = std::min(max_error_rate(g), std::nextafter(0.5, 0.0));
  const Branch b = branch_of(g);
  const double f = b == Branch::CscBranch ? g.csc2a_sq() : g.sec2a_sq();
  const double e_zero = 1.0 / (2.0 * f - 1.0);  // Q_opt(e_zero) = 0
  if (e_zero <= emax) return 1.0;
  return optimal_renyi_info(emax, g);
}

inline FrontierResult defense_frontier(const DistillationConfig& c, const SignalGeometry& g) {
  validate(c);
  FrontierResult r;
  r.xi = xi(static_cast<double>(c.n), c.p);
  const double n = static_cast<double>(c.n);
  const double emax = max_error_rate(g);
  const double envelope = renyi_envelope_max(g);
  bool any = false;
  r.t_F = -std::numeric_limits<double>::infinity();
  for (std::int64_t e = 0; e <= c.e_T; ++e) {
    const double frac = static_cast<double>(e) / n;
    const double arg = frac + r.xi;
    double info = 0.0;
    if (arg <= emax && arg < 0.5) {
      info = optimal_renyi_info(arg, g);
    } else if (c.clamp) {
      info = envelope;
      ++r.clamped;
    } else {
      if (e == 0) {
        std::ostringstream os;
        os << "I_opt argument " << arg << " exceeds the admissible range";
        throw Error(ErrorCode::OutOfDomain, os.str());
      }
      continue;
    }
    const double val = (n - static_cast<double>(e)) * info + r.xi * n * std::sqrt(1.0 - frac);
    if (!any || val > r.t_F) {
      r.t_F = val;
      r.argmax_e = e;
      any = true;
    }
  }
  return r;
}

/// s = ceil(t_F + q + nu + g); a 1e-9 relative slack keeps values that are
/// integers up to rounding from being bumped.
inline std::int64_t compression_bits(double t_F, const DistillationConfig& c) {
  const double x = t_F + c.q_leak + c.nu + c.g;
  return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::max(1.0, std::abs(x))));
}

inline std::int64_t compression_level(const DistillationConfig& c, const SignalGeometry& g) {
  return compression_bits(defense_frontier(c, g).t_F, c);
}

struct CapacityPoint {
  double error_rate = 0.0;
  double capacity = 0.5;
  double inner_argmax = 0.0;
  double inner_max = 0.0;
};

/// max over E' in [0, E] of (1 - E') I_opt^R(E'): grid at step 1e-4, then
/// golden-section refinement around the best node.
inline std::pair<double, double> capacity_inner_max(double error, const SignalGeometry& g) {
  require_admissible_error(error, g);
  auto h = [&](double e) { return (1.0 - e) * optimal_renyi_info(std::min(e, error), g); };
  constexpr double step = 1e-4;
  const auto nodes = static_cast<std::int64_t>(std::floor(error / step));
  double best_x = 0.0;
  double best_v = h(0.0);
  std::int64_t best_i = 0;
  for (std::int64_t i = 1; i <= nodes + 1; ++i) {
    const double x = i <= nodes ? static_cast<double>(i) * step : error;
    const double v = h(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
      best_i = i;
    }
  }
  double a = std::max(0.0, static_cast<double>(best_i - 1) * step);
  double b = std::min(error, static_cast<double>(best_i + 1) * step);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = h(x1);
  double f2 = h(x2);
  while (b - a > 1e-10) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = h(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = h(x1);
    }
  }
  for (double x : {x1, x2, a, b}) {
    const double v = h(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  return {best_x, best_v};
}

/// C' = (1 - E - max_{E' <= E} (1 - E') I_opt^R(E')) / 2.
inline CapacityPoint asymptotic_capacity(double error, const SignalGeometry& g) {
  const auto [arg, val] = capacity_inner_max(error, g);
  return {error, 0.5 * (1.0 - error - val), arg, val};
}

inline std::vector<CapacityPoint> capacity_curve(const SignalGeometry& g, double e_min,
                                                 double e_max, int steps) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (steps > 1 && !(e_max >= e_min)) {
    throw Error(ErrorCode::InvalidArgument, "need e_max >= e_min");
  }
  std::vector<CapacityPoint> out;
  for (int i = 0; i < steps; ++i) {
    double e = e_min;
    if (i == steps - 1 && steps > 1) {
      e = e_max;
    } else if (i > 0) {
      e = e_min + (e_max - e_min) * i / (steps - 1);
    }
    out.push_back(asymptotic_capacity(e, g));
  }
  return out;
}

/// Error rate at which the asymptotic capacity changes sign, by bisection.
inline double capacity_zero_crossing(const SignalGeometry& g, double tol = 1e-8) {
  double lo = 0.0;
  double hi = std::min(max_error_rate(g), std::nextafter(0.5, 0.0));
  if (asymptotic_capacity(hi, g).capacity > 0.0) {
    throw Error(ErrorCode::OutOfDomain, "capacity stays positive on the admissible range");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (asymptotic_capacity(mid, g).capacity > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace qkdprobe
