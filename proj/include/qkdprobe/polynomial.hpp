#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "qkdprobe/error.hpp"

namespace qkdprobe::poly {

using cplx = std::complex<double>;

/// Horner evaluation; coefficients run from the highest power down.
template <typename T>
T evaluate(std::span<const double> coeffs, T x) {
  T acc{0.0};
  for (double c : coeffs) acc = acc * x + c;
  return acc;
}

inline std::vector<double> derivative(std::span<const double> coeffs) {
  std::vector<double> out;
  const std::size_t deg = coeffs.empty() ? 0 : coeffs.size() - 1;
  for (std::size_t i = 0; i + 1 < coeffs.size(); ++i) {
    out.push_back(coeffs[i] * static_cast<double>(deg - i));
  }
  return out;
}

inline double max_abs(std::span<const double> coeffs) {
  double m = 0.0;
  for (double c : coeffs) m = std::max(m, std::abs(c));
  return m;
}

/// |p(x)| relative to the largest coefficient magnitude.
template <typename T>
double relative_residual(std::span<const double> coeffs, T x) {
  const double scale = max_abs(coeffs);
  return scale > 0.0 ? std::abs(evaluate(coeffs, x)) / scale : 0.0;
}

/// Roots of a1 x^3 + a2 x^2 + a3 x + a4 by the depressed cubic
/// y^3 + A y + B = 0, x = y - p/3. Sorted by real part, then imaginary part.
inline std::array<cplx, 3> cardano_roots(double a1, double a2, double a3, double a4) {
  if (std::abs(a1) < 1e-300) {
    throw Error(ErrorCode::LeadingZero, "cubic leading coefficient vanishes");
  }
  const double p = a2 / a1;
  const double q = a3 / a1;
  const double r = a4 / a1;
  const double A = (3.0 * q - p * p) / 3.0;
  const double B = (2.0 * p * p * p - 9.0 * p * q + 27.0 * r) / 27.0;

  const cplx disc = std::sqrt(cplx(B * B / 4.0 + A * A * A / 27.0));
  const cplx w1 = -B / 2.0 + disc;
  const cplx w2 = -B / 2.0 - disc;
  const cplx w = std::abs(w1) >= std::abs(w2) ? w1 : w2;

  cplx cp = std::abs(w) > 0.0 ? std::pow(w, 1.0 / 3.0) : cplx(0.0);
  // The partner root must satisfy cp * cm = -A/3; taking an independent
  // principal cube root breaks that pairing for some sign combinations.
  cplx cm = std::abs(cp) > 0.0 ? -A / (3.0 * cp) : cplx(0.0);

  const cplx half_i_sqrt3(0.0, std::sqrt(3.0) / 2.0);
  std::array<cplx, 3> roots{
      cp + cm,
      -0.5 * (cp + cm) + half_i_sqrt3 * (cp - cm),
      -0.5 * (cp + cm) - half_i_sqrt3 * (cp - cm),
  };

  const std::array<double, 4> c{a1, a2, a3, a4};
  const std::array<double, 3> dc{3.0 * a1, 2.0 * a2, a3};
  for (auto& x : roots) {
    x -= p / 3.0;
    for (int it = 0; it < 2; ++it) {
      const cplx f = evaluate<cplx>(c, x);
      const cplx fp = evaluate<cplx>(dc, x);
      if (std::abs(fp) == 0.0) break;
      const cplx next = x - f / fp;
      if (std::abs(evaluate<cplx>(c, next)) < std::abs(f)) x = next;
    }
    if (std::abs(x.imag()) < 1e-14 * std::max(1.0, std::abs(x.real()))) x = {x.real(), 0.0};
  }
  std::sort(roots.begin(), roots.end(), [](const cplx& l, const cplx& r) {
    if (l.real() != r.real()) return l.real() < r.real();
    return l.imag() < r.imag();
  });
  return roots;
}

namespace detail {

inline double bisect(std::span<const double> c, double lo, double hi, double tol) {
  double flo = evaluate(c, lo);
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = evaluate(c, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline std::vector<double> trimmed(std::span<const double> coeffs) {
  std::size_t first = 0;
  const double scale = max_abs(coeffs);
  while (first < coeffs.size() && std::abs(coeffs[first]) <= 1e-15 * scale) ++first;
  return {coeffs.begin() + static_cast<std::ptrdiff_t>(first), coeffs.end()};
}

}  // namespace detail

/// Real roots in [lo, hi]. The interval is split at the real roots of the
/// derivative so every piece is monotone; each sign change is then bisected
/// to `tol`. Critical points where |p| is negligible count as (touching)
/// roots.
inline std::vector<double> real_roots_in(std::span<const double> coeffs, double lo, double hi,
                                         double tol = 1e-12) {
  const auto c = detail::trimmed(coeffs);
  if (c.size() < 2) return {};
  if (c.size() == 2) {
    const double x = -c[1] / c[0];
    return (x >= lo && x <= hi) ? std::vector<double>{x} : std::vector<double>{};
  }
  const auto dc = derivative(c);
  std::vector<double> knots{lo};
  for (double x : real_roots_in(dc, lo, hi, tol)) {
    if (x > knots.back()) knots.push_back(x);
  }
  if (hi > knots.back()) knots.push_back(hi);

  const double scale = max_abs(c);
  std::vector<double> roots;
  auto push = [&](double x) {
    if (roots.empty() || std::abs(x - roots.back()) > 10.0 * tol) roots.push_back(x);
  };
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const double f = evaluate<double>(c, knots[i]);
    if (std::abs(f) <= 1e-13 * scale) push(knots[i]);
    if (i + 1 == knots.size()) break;
    const double g = evaluate<double>(c, knots[i + 1]);
    if (std::abs(f) > 1e-13 * scale && std::abs(g) > 1e-13 * scale && (f < 0.0) != (g < 0.0)) {
      push(detail::bisect(c, knots[i], knots[i + 1], tol));
    }
  }
  return roots;
}

}  // namespace qkdprobe::poly
