#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/probe_model.hpp"

namespace qkdprobe {

/// CscBranch covers alpha <= pi/8, SecBranch alpha > pi/8. The two formulas
/// coincide at pi/8.
enum class Branch { CscBranch, SecBranch };

inline constexpr std::string_view to_string(Branch b) {
  return b == Branch::CscBranch ? "CscBranch" : "SecBranch";
}

struct BranchedOptimum {
  double overlap = 1.0;
  double renyi_bits = 0.0;
  Branch branch = Branch::CscBranch;
};

inline Branch branch_of(const SignalGeometry& g) {
  return g.alpha() <= pi / 8.0 ? Branch::CscBranch : Branch::SecBranch;
}

/// Raw formula, valid as an extremum for any alpha; a minimum only on
/// alpha <= pi/8.
inline double csc_branch_overlap(double error, const SignalGeometry& g) {
  return (1.0 + (1.0 - 2.0 * g.csc2a_sq()) * error) / (1.0 - error);
}

inline double sec_branch_overlap(double error, const SignalGeometry& g) {
  return (1.0 + (1.0 - 2.0 * g.sec2a_sq()) * error) / (1.0 - error);
}

/// Largest error rate the optimum families can reach (where Q_opt = -1).
inline double max_error_rate(const SignalGeometry& g) {
  return branch_of(g) == Branch::CscBranch ? g.sin2a_sq() : g.cos2a_sq();
}

inline void require_admissible_error(double error, const SignalGeometry& g) {
  const double emax = max_error_rate(g);
  if (!(error >= 0.0) || error > emax + kIdentityTol || !(error < 0.5)) {
    std::ostringstream os;
    os << "E = " << error << " outside [0, " << std::min(emax, 0.5) << "] for alpha = "
       << g.alpha();
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
}

inline BranchedOptimum optimal_overlap(double error, const SignalGeometry& g) {
  require_admissible_error(error, g);
  const Branch b = branch_of(g);
  double q = b == Branch::CscBranch ? csc_branch_overlap(error, g) : sec_branch_overlap(error, g);
  q = std::clamp(q, -1.0, 1.0);
  return {q, renyi_info(q), b};
}

/// I_opt^R(E): Renyi bits of the optimum probe at error rate E.
inline double optimal_renyi_info(double error, const SignalGeometry& g) {
  return optimal_overlap(error, g).renyi_bits;
}

// ---------------------------------------------------------------------------
// Optimum parameter families

enum class FamilyTag { SetE, SetH, SetPhiNeg };

inline constexpr std::string_view to_string(FamilyTag t) {
  switch (t) {
    case FamilyTag::SetE: return "SetE";
    case FamilyTag::SetH: return "SetH";
    case FamilyTag::SetPhiNeg: return "SetPhiNeg";
  }
  return "Unknown";
}

struct OptimumFamily {
  FamilyTag tag = FamilyTag::SetE;
  Branch branch = Branch::CscBranch;
  std::string constraint;
  std::vector<std::string> free_parameters;
  /// 1 - 2E csc^2(2 alpha) on CscBranch, 1 - 2E sec^2(2 alpha) on SecBranch;
  /// 1 - 4E for SetPhiNeg.
  double rhs = 1.0;
};

inline double family_rhs(double error, const SignalGeometry& g) {
  const double f = branch_of(g) == Branch::CscBranch ? g.csc2a_sq() : g.sec2a_sq();
  return 1.0 - 2.0 * error * f;
}

inline std::vector<OptimumFamily> optimal_parameter_families(double error,
                                                             const SignalGeometry& g) {
  require_admissible_error(error, g);
  const Branch b = branch_of(g);
  const std::string f = b == Branch::CscBranch ? "csc^2(2alpha)" : "sec^2(2alpha)";
  const double rhs = family_rhs(error, g);
  std::vector<OptimumFamily> out;
  out.push_back({FamilyTag::SetE, b, "cos(lambda) = 0, sin(2mu) = 1 - 2E " + f,
                 {"theta", "phi"}, rhs});
  out.push_back({FamilyTag::SetH, b,
                 "cos(2theta) = 1, sin(2mu) sin^2(lambda) = 1 - 2E " + f +
                     " - cos^2(lambda) sin(2phi)",
                 {"lambda", "phi"}, rhs});
  if (g.is_standard()) {
    out.push_back({FamilyTag::SetPhiNeg, b,
                   "sin(2phi) = -1, sin(2mu) sin^2(lambda) = 1 - 4E + cos^2(lambda)",
                   {"lambda", "theta"}, 1.0 - 4.0 * error});
  }
  return out;
}

/// Values for a family's free angles. Only the entries named in
/// OptimumFamily::free_parameters are read; mu is read by SetH when
/// sin(lambda) = 0, where it drops out of every observable.
struct FreeChoices {
  double lambda = 0.0;
  double mu = 0.0;
  double theta = 0.0;
  double phi = 0.0;
  MuBranch mu_branch = MuBranch::Lower;
};

/// `frame` is the geometry in which params realize (E, Q_opt). On the
/// SecBranch the families are the alpha -> pi/4 - alpha images of the
/// CscBranch ones, so frame = interchange_geometry(geom) there.
struct FamilySample {
  ProbeParams params;
  SignalGeometry frame = SignalGeometry::standard();
};

namespace detail {

inline double half_asin(double v, MuBranch branch, const char* what) {
  if (std::abs(v) > 1.0 + 1e-12) {
    std::ostringstream os;
    os << what << " = " << v << " outside [-1, 1]";
    throw Error(ErrorCode::OutOfDomain, os.str());
  }
  v = std::clamp(v, -1.0, 1.0);
  const double p = std::asin(v);
  const double lower = v >= 0.0 ? 0.5 * p : 0.5 * (pi - p);
  const double upper = v >= 0.0 ? 0.5 * (pi - p) : 0.5 * (2.0 * pi + p);
  return branch == MuBranch::Lower ? lower : upper;
}

}  // namespace detail

inline FamilySample sample_params(const OptimumFamily& family, double error,
                                  const SignalGeometry& g, const FreeChoices& free) {
  require_admissible_error(error, g);
  const SignalGeometry frame =
      family.branch == Branch::SecBranch ? interchange_geometry(g) : g;
  // In the frame the CscBranch constraint holds with csc^2 of the frame.
  const double rhs = 1.0 - 2.0 * error * frame.csc2a_sq();
  ProbeParams p;
  switch (family.tag) {
    case FamilyTag::SetE:
      p.lambda = pi / 2.0;
      p.theta = free.theta;
      p.phi = free.phi;
      p.mu = detail::half_asin(rhs, free.mu_branch, "sin(2mu)");
      break;
    case FamilyTag::SetH: {
      p.theta = 0.0;
      p.lambda = free.lambda;
      const double sl = std::sin(free.lambda);
      if (std::abs(sl) < kIdentityTol) {
        p.phi = detail::half_asin(rhs, free.mu_branch, "sin(2phi)");
        p.mu = free.mu;
      } else {
        const double cl2 = std::cos(free.lambda) * std::cos(free.lambda);
        p.phi = free.phi;
        p.mu = detail::half_asin((rhs - cl2 * std::sin(2.0 * free.phi)) / (sl * sl),
                                 free.mu_branch, "sin(2mu)");
      }
      break;
    }
    case FamilyTag::SetPhiNeg: {
      if (!g.is_standard()) {
        throw Error(ErrorCode::OutOfDomain, "SetPhiNeg exists only at alpha = pi/8");
      }
      p.lambda = free.lambda;
      p.theta = free.theta;
      p.phi = 3.0 * pi / 4.0;
      const double sl = std::sin(free.lambda);
      const double cl2 = std::cos(free.lambda) * std::cos(free.lambda);
      if (std::abs(sl) < kIdentityTol) {
        throw Error(ErrorCode::OutOfDomain, "SetPhiNeg needs sin(lambda) != 0");
      }
      p.mu = detail::half_asin((1.0 - 4.0 * error + cl2) / (sl * sl), free.mu_branch,
                               "sin(2mu)");
      break;
    }
  }
  return {p, frame};
}

}  // namespace qkdprobe
