#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/polynomial.hpp"
#include "qkdprobe/probe_model.hpp"
#include "qkdprobe/stationarity.hpp"

namespace qkdprobe {

/// (e_theta, e_phi) = (cos 2theta, sin 2phi) when sin 2theta = cos 2phi = 0.
class SignPair {
 public:
  SignPair(int e_theta, int e_phi) : e_theta_(e_theta), e_phi_(e_phi) {
    auto unit = [](int v) { return v == 1 || v == -1; };
    if (!unit(e_theta) || !unit(e_phi)) {
      throw Error(ErrorCode::InvalidArgument, "sign pair entries must be +1 or -1");
    }
  }
  int e_theta() const noexcept { return e_theta_; }
  int e_phi() const noexcept { return e_phi_; }

 private:
  int e_theta_;
  int e_phi_;
};

enum class PossibilityStatus { YieldsOptimum, ExcludedAnalytically, InfeasibleNumerically };

inline constexpr std::string_view to_string(PossibilityStatus s) {
  switch (s) {
    case PossibilityStatus::YieldsOptimum: return "YieldsOptimum";
    case PossibilityStatus::ExcludedAnalytically: return "ExcludedAnalytically";
    case PossibilityStatus::InfeasibleNumerically: return "InfeasibleNumerically";
  }
  return "Unknown";
}

struct PossibilityReport {
  char label = 'A';
  PossibilityStatus status = PossibilityStatus::ExcludedAnalytically;
  std::optional<double> achieved_Q;
  std::string detail;
  /// Parameter point realizing the case, when one was constructed.
  std::optional<ProbeParams> witness;
};

// ---------------------------------------------------------------------------
// Polynomials of the sin(lambda) = 0, F2 = F3 = 0 case

/// Cubic in x = sin 2phi.
inline std::array<double, 4> sin2phi_cubic_coefficients(double error, const SignalGeometry& g) {
  const double s2 = g.sin2a_sq();
  const double c2 = g.cos2a_sq();
  const double k = g.cot2a_sq();
  return {s2, 3.0 - 4.0 * s2, (2.0 * error - c2 - 1.0) * (1.0 - 2.0 * k), 1.0 - 2.0 * error};
}

/// Cubic in Lambda = cos^2 2alpha + sin^2 2alpha sin 2phi (a factor Lambda
/// already divided out).
inline std::array<double, 4> lambda_cubic_coefficients(double error, const SignalGeometry& g) {
  const double s2 = g.sin2a_sq();
  const double c2 = g.cos2a_sq();
  const double k = g.cot2a_sq();
  const double csc2 = g.csc2a_sq();
  const double u = 1.0 - 2.0 * error;
  const double v = 1.0 - error;
  return {
      u * (1.0 - 2.0 * csc2),
      4.0 * v * v - s2 + u * u * (1.0 - 2.0 * csc2) - u * (1.0 + c2 - 4.0 * k),
      -u * u * (1.0 + c2 - 4.0 * k) + u * c2 * (1.0 - 2.0 * k),
      u * u * (1.0 - 2.0 * c2 * k),
  };
}

/// Quintic in x = sin 2phi.
inline std::array<double, 6> quintic_coefficients(double error, const SignalGeometry& g) {
  const double s2 = g.sin2a_sq();
  const double s4 = s2 * s2;
  const double s6 = s4 * s2;
  const double c2 = g.cos2a_sq();
  const double c4 = c2 * c2;
  const double k = g.cot2a_sq();
  const double u = 1.0 - 2.0 * error;
  const double v2 = (1.0 - error) * (1.0 - error);
  const double E = error;
  const double w = 1.0 - 2.0 * k;
  return {
      s6,
      s4 * (5.0 * c2 + 2.0 * E - 2.0),
      s4 * (5.0 - 12.0 * E + 8.0 * E * E) - s2 * c2 * u - 2.0 * s2 * u * u - 2.0 * s4 * c2 +
          5.0 * s2 * c4 - s6,
      w * (s2 * u * u - 4.0 * s4 * v2 + s6 - s2 * c4) - 2.0 * s4 * c2 - s4 * u * u + s4 * u +
          8.0 * s2 * c2 * v2,
      w * (-8.0 * s2 * c2 * v2 + 2.0 * s4 * c2) + 4.0 * c4 * v2 + s2 * (2.0 - s2) * u * u +
          s2 * c2 * u - s2 * c4,
      w * (s2 * c4 - 4.0 * c4 * v2 - s2 * u * u) + s4 * u * u,
  };
}

struct PossibilityDEntry {
  double error = 0.0;
  std::vector<double> cubic_roots;    // sin 2phi from the sin2phi cubic
  std::vector<double> lambda_roots;   // sin 2phi mapped from the Lambda cubic
  std::vector<double> quintic_roots;  // sin 2phi from the quintic
  double x0 = 0.0;                    // sin 2phi = 1 - 2E csc^2(2alpha)
  double spread_i = std::numeric_limits<double>::infinity();    // cubic, Lambda, quintic
  double spread_ii = std::numeric_limits<double>::infinity();   // x0, Lambda, quintic
  double spread_iii = std::numeric_limits<double>::infinity();  // x0, quintic

  double min_spread() const { return std::min({spread_i, spread_ii, spread_iii}); }
};

struct PossibilityDReport {
  std::vector<PossibilityDEntry> entries;
  double min_joint_spread = std::numeric_limits<double>::infinity();
  bool feasible = false;
};

inline constexpr double kJointRootTol = 1e-6;

namespace detail {

/// A sin 2phi candidate is physical only if cos 2theta = (1 - 2E)/Lambda is
/// a cosine. Lambda = 0 is the factor divided out of the system.
inline bool physical_sin2phi(double x, double error, const SignalGeometry& g) {
  if (x < -1.0 - 1e-9 || x > 1.0 + 1e-9) return false;
  const double lam = g.cos2a_sq() + g.sin2a_sq() * x;
  if (std::abs(lam) < 1e-9) return false;
  return std::abs(1.0 - 2.0 * error) <= std::abs(lam) * (1.0 + 1e-12);
}

inline std::vector<double> physical(std::vector<double> xs, double error,
                                    const SignalGeometry& g) {
  std::erase_if(xs, [&](double x) { return !physical_sin2phi(x, error, g); });
  return xs;
}

inline double spread3(const std::vector<double>& a, const std::vector<double>& b,
                      const std::vector<double>& c) {
  double best = std::numeric_limits<double>::infinity();
  for (double x : a)
    for (double y : b)
      for (double z : c) best = std::min(best, std::max({x, y, z}) - std::min({x, y, z}));
  return best;
}

}  // namespace detail

inline PossibilityDEntry possibility_d_entry(double error, const SignalGeometry& g) {
  PossibilityDEntry e;
  e.error = error;

  e.cubic_roots =
      detail::physical(poly::real_roots_in(sin2phi_cubic_coefficients(error, g), -1.0, 1.0),
                       error, g);

  const auto lc = lambda_cubic_coefficients(error, g);
  std::vector<double> from_lambda;
  if (std::abs(lc[0]) > 1e-300) {
    for (const auto& r : poly::cardano_roots(lc[0], lc[1], lc[2], lc[3])) {
      if (std::abs(r.imag()) > 1e-9 * std::max(1.0, std::abs(r.real()))) continue;
      from_lambda.push_back((r.real() - g.cos2a_sq()) / g.sin2a_sq());
    }
  }
  std::sort(from_lambda.begin(), from_lambda.end());
  e.lambda_roots = detail::physical(from_lambda, error, g);

  e.quintic_roots =
      detail::physical(poly::real_roots_in(quintic_coefficients(error, g), -1.0, 1.0), error, g);

  e.x0 = 1.0 - 2.0 * error * g.csc2a_sq();
  const auto x0s = detail::physical({e.x0}, error, g);
  e.spread_i = detail::spread3(e.cubic_roots, e.lambda_roots, e.quintic_roots);
  e.spread_ii = detail::spread3(x0s, e.lambda_roots, e.quintic_roots);
  e.spread_iii = detail::spread3(x0s, x0s, e.quintic_roots);
  return e;
}

/// sin(lambda) = 0 with F2 = F3 = 0 requires sin 2phi to be a common root of
/// the cubic/Lambda-cubic/quintic chain, or of x0 with the later members.
/// Feasible only if some chain agrees within kJointRootTol.
inline PossibilityDReport possibility_d_feasibility(const SignalGeometry& g,
                                                    const std::vector<double>& errors) {
  PossibilityDReport rep;
  for (double E : errors) {
    if (!(E >= 0.0 && E < 0.5)) {
      throw Error(ErrorCode::Domain, "error rates must lie in [0, 1/2)");
    }
    rep.entries.push_back(possibility_d_entry(E, g));
    rep.min_joint_spread = std::min(rep.min_joint_spread, rep.entries.back().min_spread());
  }
  rep.feasible = rep.min_joint_spread < kJointRootTol;
  return rep;
}

inline std::vector<double> default_d_grid() {
  std::vector<double> es;
  for (int i = 1; i <= 9; ++i) es.push_back(0.05 * i);
  return es;
}

// ---------------------------------------------------------------------------
// Classification of the twelve ways of zeroing the stationarity residuals

namespace detail {

struct Witness {
  ProbeParams params;
  std::string note;
};

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline PossibilityReport yields(char label, const Witness& w, double error,
                                const SignalGeometry& g) {
  PossibilityReport r;
  r.label = label;
  r.witness = w.params;
  const auto k = coefficients(w.params);
  const double e_w = error_rate(k, g);
  const double q_w = overlap(k, g);
  const double res = stationarity_residuals(w.params, g).max_abs();
  r.achieved_Q = q_w;
  const bool ok = std::abs(e_w - error) < 1e-9 && std::abs(q_w - csc_branch_overlap(error, g)) < 1e-9 &&
                  res < 1e-9;
  r.status = ok ? PossibilityStatus::YieldsOptimum : PossibilityStatus::InfeasibleNumerically;
  r.detail = w.note + "; witness E = " + fmt(e_w) + ", Q = " + fmt(q_w) +
             ", max residual = " + fmt(res) + "; Q = [1 + (1 - 2csc^2 2alpha)E]/(1 - E)";
  return r;
}

inline PossibilityReport infeasible(char label, const std::string& why) {
  PossibilityReport r;
  r.label = label;
  r.status = PossibilityStatus::InfeasibleNumerically;
  r.detail = why;
  return r;
}

inline PossibilityReport possibility_a(double error, const SignalGeometry& g) {
  PossibilityReport r;
  r.label = 'A';
  r.status = PossibilityStatus::ExcludedAnalytically;
  const double s2 = g.sin2a_sq();
  std::ostringstream os;
  os << "sin(lambda) = sin(2theta) = cos(2phi) = 0 pins E to isolated values and gives |Q| = 1:";
  double best_gap = std::numeric_limits<double>::infinity();
  for (int et : {1, -1}) {
    for (int ep : {1, -1}) {
      const SignPair sp(et, ep);
      const double e_req = 0.5 * (1.0 - sp.e_theta() + sp.e_theta() * (1.0 - sp.e_phi()) * s2);
      const double den = (1.0 + sp.e_theta()) - sp.e_theta() * (1.0 - sp.e_phi()) * s2;
      os << " (e_theta=" << et << ", e_phi=" << ep << "): E=" << fmt(e_req);
      if (std::abs(den) < 1e-15) {
        os << ", degenerate;";
        continue;
      }
      const double q =
          (sp.e_phi() * (1.0 + sp.e_theta()) + sp.e_theta() * (1.0 - sp.e_phi()) * s2) / den;
      os << ", Q=" << fmt(q) << ";";
      const double gap = std::abs(e_req - error);
      if (gap < best_gap) {
        best_gap = gap;
        r.achieved_Q = q;
      }
    }
  }
  os << " not a minimum of Q at fixed E";
  r.detail = os.str();
  return r;
}

}  // namespace detail

inline std::vector<PossibilityReport> enumerate_possibilities(double error,
                                                              const SignalGeometry& g) {
  if (!(error >= 0.0 && error < 0.5)) {
    throw Error(ErrorCode::Domain, "E must lie in [0, 1/2)");
  }
  using detail::Witness;
  const double x0 = 1.0 - 2.0 * error * g.csc2a_sq();
  const double k = g.cot2a_sq();
  const double alt_phi = 1.0 - 2.0 * k;  // sin 2phi = 1 - 2cot^2(2alpha)
  const bool alt_ok = std::abs(alt_phi) <= 1.0 + 1e-12;
  const bool x0_ok = std::abs(x0) <= 1.0 + 1e-12;
  auto hasin = [](double v) { return detail::half_asin(v, MuBranch::Lower, "sine"); };

  std::vector<PossibilityReport> out;
  auto csc_case = [&](char label, auto&& build) {
    if (!x0_ok) {
      out.push_back(detail::infeasible(
          label, "requires sin(2phi) or sin(2mu) = 1 - 2E csc^2(2alpha) = " + detail::fmt(x0) +
                     ", outside [-1, 1]"));
      return;
    }
    try {
      out.push_back(detail::yields(label, build(), error, g));
    } catch (const Error& e) {
      out.push_back(detail::infeasible(label, e.what()));
    }
  };

  out.push_back(detail::possibility_a(error, g));

  csc_case('B', [&] {
    return Witness{{0.0, 0.0, 0.0, hasin(x0)},
                   "sin(lambda) = 0, cos(2theta) = 1 (e_theta = -1 excluded by F3 = 0), "
                   "sin(2phi) = 1 - 2E csc^2(2alpha), mu free"};
  });

  {
    PossibilityReport r;
    r.label = 'C';
    r.status = PossibilityStatus::ExcludedAnalytically;
    r.detail =
        "sin(lambda) = cos(2phi) = 0 with F2 = 0 forces sin(2phi) = 1 - 2cot^2(2alpha) = e_phi, "
        "hence alpha = pi/8, e_phi = -1, and then E = 1/2";
    out.push_back(r);
  }

  {
    const auto d = possibility_d_entry(error, g);
    PossibilityReport r;
    r.label = 'D';
    if (d.min_spread() < kJointRootTol) {
      r.status = PossibilityStatus::YieldsOptimum;
      r.detail = "common sin(2phi) root found, joint spread " + detail::fmt(d.min_spread());
    } else {
      r.status = PossibilityStatus::InfeasibleNumerically;
      r.detail = "sin(lambda) = 0, F2 = F3 = 0: no common physical root of the sin(2phi) "
                 "cubic, Lambda cubic and quintic; min joint spread " +
                 detail::fmt(d.min_spread());
    }
    out.push_back(r);
  }

  csc_case('E', [&] {
    return Witness{{pi / 2.0, hasin(x0), pi / 5.0, pi / 7.0},
                   "cos(lambda) = 0, sin(2mu) = 1 - 2E csc^2(2alpha), theta and phi free"};
  });

  csc_case('F', [&] {
    const double sl2 = 0.5 * (1.0 + error * g.csc2a_sq());
    const double lam = std::asin(std::sqrt(std::min(sl2, 1.0)));
    const double mu = mu_from_constraint(lam, 0.0, pi / 4.0, error, g);
    return Witness{{lam, mu, 0.0, pi / 4.0},
                   "sin(2theta) = cos(2phi) = 0, e_theta = 1, e_phi = 1, mu tied to lambda"};
  });

  csc_case('G', [&] {
    return Witness{{pi / 2.0, hasin(x0), 0.0, pi / 7.0},
                   "cos(lambda) = 0, cos(2theta) = 1, sin(2mu) = 1 - 2E csc^2(2alpha)"};
  });

  csc_case('H', [&] {
    const double lam = pi / 3.0;
    const double phi = hasin(x0);
    const double mu = mu_from_constraint(lam, 0.0, phi, error, g);
    return Witness{{lam, mu, 0.0, phi}, "cos(2theta) = 1, F1 = F3 = 0, mu tied to (lambda, phi)"};
  });

  csc_case('I', [&] {
    if (alt_ok) {
      return Witness{{pi / 2.0, hasin(x0), pi / 5.0, hasin(alt_phi)},
                     "cos(lambda) = 0, sin(2phi) = 1 - 2cot^2(2alpha)"};
    }
    return Witness{{pi / 2.0, hasin(x0), 0.0, pi / 7.0},
                   "cos(lambda) = 0, cos(2theta) = 1 (sin(2phi) = 1 - 2cot^2(2alpha) = " +
                       detail::fmt(alt_phi) + " not realizable)"};
  });

  {
    PossibilityReport r;
    const bool at_standard = std::abs(k - 1.0) < 1e-12;
    if (at_standard) {
      // e_phi = -1 at alpha = pi/8: the extra sin(2phi) = -1 family.
      const double cl2 = std::min(error, 2.0 * error);
      const double lam = std::acos(std::sqrt(cl2));
      const double sl2 = 1.0 - cl2;
      try {
        const double mu = hasin((1.0 - 4.0 * error + cl2) / sl2);
        r = detail::yields('J', {{lam, mu, pi / 5.0, 3.0 * pi / 4.0},
                                 "alpha = pi/8, e_phi = -1: sin(2phi) = -1, "
                                 "sin(2mu) sin^2(lambda) = 1 - 4E + cos^2(lambda)"},
                           error, g);
      } catch (const Error& e) {
        r = detail::infeasible('J', e.what());
      }
    } else {
      r = detail::infeasible(
          'J', "cos(2phi) = 0 with F1 = F2 = 0 requires cot^2(2alpha) = (1 - e_phi)/2 in {0, 1}; "
               "cot^2(2alpha) = " + detail::fmt(k));
    }
    out.push_back(r);
  }

  csc_case('K', [&] {
    if (alt_ok) {
      return Witness{{pi / 2.0, hasin(x0), pi / 5.0, hasin(alt_phi)},
                     "cos(lambda) = 0, sin(2phi) = 1 - 2cot^2(2alpha), theta free"};
    }
    return Witness{{pi / 2.0, hasin(x0), pi / 5.0, pi / 7.0},
                   "cos(lambda) = 0 (F1 = F2 = 0 would need sin(2phi) = " +
                       detail::fmt(alt_phi) + ", not realizable; cos(lambda) = 0 suffices)"};
  });

  csc_case('L', [&] {
    // cos(2theta) = 1 makes F1 and F3 vanish; F2 = 0 fixes cos^2(lambda).
    const double s2 = g.sin2a_sq();
    const double qopt = 1.0 + (1.0 - 2.0 * g.csc2a_sq()) * error;
    for (int i = 1; i < 360; ++i) {
      const double phi = pi * i / 360.0;
      const double s2f = std::sin(2.0 * phi);
      const double c2f = std::cos(2.0 * phi);
      if (std::abs(c2f) < 1e-6 || std::abs(qopt) < 1e-12) continue;
      const double cl2 = 2.0 * (1.0 - error) * (1.0 - error) * (1.0 - 2.0 * k - s2f) /
                         (s2 * c2f * c2f * qopt);
      if (!(cl2 > 0.0 && cl2 < 1.0)) continue;
      const double lam = std::acos(std::sqrt(cl2));
      try {
        const double mu = mu_from_constraint(lam, 0.0, phi, error, g);
        return Witness{{lam, mu, 0.0, phi}, "F1 = F2 = F3 = 0 with cos(2theta) = 1"};
      } catch (const Error&) {
      }
    }
    const double phi = hasin(x0);
    return Witness{{pi / 3.0, mu_from_constraint(pi / 3.0, 0.0, phi, error, g), 0.0, phi},
                   "cos(2theta) = 1 (F2 = 0 has no realizable lambda at this (alpha, E))"};
  });

  return out;
}

}  // namespace qkdprobe
