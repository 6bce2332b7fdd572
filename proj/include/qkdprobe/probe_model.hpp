#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"

namespace qkdprobe {

/// The four scalars through which every observable of the probe flows.
struct ProbeCoefficients {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

/// P_ij: probability that state i is sent and j detected by the receiver.
struct DetectionProbabilities {
  double p_uu = 0.0;
  double p_u_ubar = 0.0;
  double p_ubar_u = 0.0;
  double p_ubar_ubar = 0.0;
};

struct AttackEvaluation {
  double error_rate = 0.0;
  double overlap = 0.0;
  double renyi_info = 0.0;
};

inline constexpr double kIdentityTol = 1e-12;

inline ProbeCoefficients coefficients(const ProbeParams& p) {
  const double sl2 = std::sin(p.lambda) * std::sin(p.lambda);
  const double cl2 = std::cos(p.lambda) * std::cos(p.lambda);
  const double s2mu = std::sin(2.0 * p.mu);
  const double c2t = std::cos(2.0 * p.theta);
  const double s2t = std::sin(2.0 * p.theta);
  const double s2f = std::sin(2.0 * p.phi);
  const double c2f = std::cos(2.0 * p.phi);
  return {
      sl2 * s2mu + cl2 * c2t * s2f,
      sl2 * s2mu + cl2 * s2f,
      cl2 * s2t * c2f,
      sl2 + cl2 * c2t,
  };
}

/// Throws DegenerateModel when an entry leaves [0, 1] by more than 1e-12,
/// which means the coefficients are not produced by any probe.
inline DetectionProbabilities detection_probabilities(const ProbeCoefficients& k,
                                                      const SignalGeometry& g) {
  const double base = 0.5 * (k.d - k.a) * g.sin2a_sq();
  const double cross = 0.5 * k.c * g.sin2a();
  DetectionProbabilities p{
      0.5 * (1.0 + k.d) - base + cross,
      0.5 * (1.0 - k.d) + base - cross,
      0.5 * (1.0 - k.d) + base + cross,
      0.5 * (1.0 + k.d) - base - cross,
  };
  for (double v : {p.p_uu, p.p_u_ubar, p.p_ubar_u, p.p_ubar_ubar}) {
    if (v < -kIdentityTol || v > 1.0 + kIdentityTol) {
      std::ostringstream os;
      os << "detection probability " << v << " outside [0, 1]";
      throw Error(ErrorCode::DegenerateModel, os.str());
    }
  }
  return p;
}

inline double error_rate(const ProbeCoefficients& k, const SignalGeometry& g) {
  return 0.5 * (1.0 - k.d + (k.d - k.a) * g.sin2a_sq());
}

/// Error rate as the ratio of wrong detections to all detections.
inline double error_rate(const DetectionProbabilities& p) {
  const double wrong = p.p_u_ubar + p.p_ubar_u;
  return wrong / (wrong + p.p_uu + p.p_ubar_ubar);
}

inline double q_value(const ProbeCoefficients& k) { return k.a + k.b + k.d; }

/// Normalized overlap of the probe states correlated with the receiver's
/// two outcomes, written directly in the coefficients.
inline double overlap(const ProbeCoefficients& k, const SignalGeometry& g) {
  const double s2 = g.sin2a_sq();
  const double num = 0.5 * (k.a + k.b) + 0.5 * (k.d - k.a) * s2;
  const double half = 1.0 + k.d + (k.a - k.d) * s2;
  const double radicand = 0.25 * half * half - 0.25 * k.c * k.c * s2;
  if (!(radicand > 0.0)) {
    std::ostringstream os;
    os << "overlap radicand " << radicand << " <= 0";
    throw Error(ErrorCode::DegenerateDenominator, os.str());
  }
  return num / std::sqrt(radicand);
}

/// Same overlap expressed through q = a + b + d and a fixed error rate.
inline double overlap_from_q(double q, double c, double error, const SignalGeometry& g) {
  const double radicand = (1.0 - error) * (1.0 - error) - 0.25 * c * c * g.sin2a_sq();
  if (!(radicand > 0.0)) {
    std::ostringstream os;
    os << "overlap radicand " << radicand << " <= 0";
    throw Error(ErrorCode::DegenerateDenominator, os.str());
  }
  return (0.5 * (q - 1.0) + error) / std::sqrt(radicand);
}

/// q = a + b + d with mu eliminated through the error-rate constraint.
/// Depends only on (lambda, theta, phi) once the error rate is fixed.
inline double q_constant_error(double lambda, double theta, double phi, double error,
                               const SignalGeometry& g) {
  const double cl2 = std::cos(lambda) * std::cos(lambda);
  const double c2t = std::cos(2.0 * theta);
  const double s2f = std::sin(2.0 * phi);
  const double t2 = g.tan2a_sq();
  const double k2 = g.cot2a_sq();
  const double brace = (2.0 - t2) * (k2 - c2t * (s2f + k2)) + s2f * (1.0 + (1.0 - t2) * c2t);
  return cl2 * brace - 4.0 * g.csc2a_sq() * error + 3.0;
}

enum class MuBranch { Lower, Upper };

/// Right-hand side of the constraint sin(2 mu) = f(lambda, theta, phi, E).
/// Throws SingularLambda when sin(lambda) ~ 0.
inline double sin2mu_for_error(double lambda, double theta, double phi, double error,
                               const SignalGeometry& g) {
  const double sl = std::sin(lambda);
  if (std::abs(sl) < kIdentityTol) {
    throw Error(ErrorCode::SingularLambda,
                "sin(lambda) ~ 0: mu does not enter the error rate");
  }
  const double sl2 = sl * sl;
  const double cl2 = std::cos(lambda) * std::cos(lambda);
  const double c2t = std::cos(2.0 * theta);
  const double s2f = std::sin(2.0 * phi);
  const double s2 = g.sin2a_sq();
  return (cl2 * (1.0 - c2t) + s2 * (sl2 + cl2 * c2t - cl2 * c2t * s2f) - 2.0 * error) /
         (s2 * sl2);
}

/// Solves the error-rate constraint for mu in [0, pi]. sin(2 mu) has two
/// preimages there; Lower picks the smaller mu, Upper the other. Both give
/// identical coefficients.
inline double mu_from_constraint(double lambda, double theta, double phi, double error,
                                 const SignalGeometry& g,
                                 MuBranch branch = MuBranch::Lower) {
  if (!(error >= 0.0 && error < 0.5)) {
    throw Error(ErrorCode::Domain, "target error rate must lie in [0, 1/2)");
  }
  double v = sin2mu_for_error(lambda, theta, phi, error, g);
  if (std::abs(v) > 1.0 + kIdentityTol) {
    std::ostringstream os;
    os << "sin(2 mu) = " << v << " required";
    throw Error(ErrorCode::Infeasible, os.str());
  }
  v = std::clamp(v, -1.0, 1.0);
  const double principal = std::asin(v);  // 2mu in [-pi/2, pi/2]
  double lower = 0.0;
  double upper = 0.0;
  if (v >= 0.0) {
    lower = 0.5 * principal;
    upper = 0.5 * (pi - principal);
  } else {
    lower = 0.5 * (pi - principal);
    upper = 0.5 * (2.0 * pi + principal);
  }
  return branch == MuBranch::Lower ? lower : upper;
}

/// Maximum Renyi information extractable from probe states with overlap Q.
inline double renyi_info(double overlap_q) {
  if (std::abs(overlap_q) > 1.0 + kIdentityTol) {
    throw Error(ErrorCode::Domain, "|Q| > 1");
  }
  const double q2 = std::min(overlap_q * overlap_q, 1.0);
  return std::log2(2.0 - q2);
}

/// Relabeling u <-> u-bar maps alpha to pi/4 - alpha and leaves (E, Q)
/// invariant.
inline SignalGeometry interchange_geometry(const SignalGeometry& g) {
  return SignalGeometry(pi / 4.0 - g.alpha());
}

inline AttackEvaluation evaluate(const ProbeParams& p, const SignalGeometry& g) {
  const auto k = coefficients(p);
  const double q = overlap(k, g);
  return {error_rate(k, g), q, renyi_info(q)};
}

}  // namespace qkdprobe
