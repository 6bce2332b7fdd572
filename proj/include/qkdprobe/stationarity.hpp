#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/probe_model.hpp"

namespace qkdprobe {

/// Derivatives of Q at fixed E, up to the common factor 1/(2 sqrt(D)):
///   dQ/dlambda = -r_lambda / (2 sqrt D), dQ/dtheta = r_theta / (2 sqrt D),
///   dQ/dphi = r_phi / (2 sqrt D),  D = (1 - E)^2 - c^2 sin^2(2alpha) / 4.
struct StationaryResiduals {
  double r_lambda = 0.0;
  double r_theta = 0.0;
  double r_phi = 0.0;
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;

  double max_abs() const {
    return std::max({std::abs(r_lambda), std::abs(r_theta), std::abs(r_phi)});
  }
};

/// Residuals at (lambda, theta, phi) on the surface of constant error rate.
/// q is taken from its mu-free form so mu never has to be solved.
inline StationaryResiduals stationarity_residuals(double lambda, double theta, double phi,
                                                  double error, const SignalGeometry& g) {
  const double s2 = g.sin2a_sq();
  const double t2 = g.tan2a_sq();
  const double k2 = g.cot2a_sq();
  const double cl2 = std::cos(lambda) * std::cos(lambda);
  const double c2t = std::cos(2.0 * theta);
  const double s2t = std::sin(2.0 * theta);
  const double s2f = std::sin(2.0 * phi);
  const double c2f = std::cos(2.0 * phi);
  const double c = cl2 * s2t * c2f;

  const double denom = 4.0 * (1.0 - error) * (1.0 - error) - c * c * s2;
  if (!(denom > 0.0)) {
    std::ostringstream os;
    os << "stationarity denominator " << denom << " <= 0";
    throw Error(ErrorCode::DegenerateDenominator, os.str());
  }
  const double q = q_constant_error(lambda, theta, phi, error, g);
  const double G = 2.0 * (q - 1.0 + 2.0 * error) / denom;

  StationaryResiduals r;
  const double brace = (2.0 - t2) * (k2 - c2t * (s2f + k2)) + s2f * (1.0 + (1.0 - t2) * c2t);
  r.f1 = 2.0 * brace + G * s2 * cl2 * s2t * s2t * c2f * c2f;
  r.f2 = 2.0 * (s2f + 2.0 * k2 - 1.0) + G * s2 * cl2 * c2t * c2f * c2f;
  r.f3 = 2.0 * (1.0 - c2t) - G * s2 * cl2 * s2t * s2t * s2f;
  r.r_lambda = std::sin(lambda) * std::cos(lambda) * r.f1;
  r.r_theta = s2t * cl2 * r.f2;
  r.r_phi = cl2 * c2f * r.f3;
  return r;
}

/// Residuals at a full parameter point, with E computed from the point.
inline StationaryResiduals stationarity_residuals(const ProbeParams& p, const SignalGeometry& g) {
  const auto k = coefficients(p);
  return stationarity_residuals(p.lambda, p.theta, p.phi, error_rate(k, g), g);
}

/// Q as a function of (lambda, theta, phi) with mu eliminated at fixed E.
inline double constant_error_overlap(double lambda, double theta, double phi, double error,
                                     const SignalGeometry& g) {
  const double cl2 = std::cos(lambda) * std::cos(lambda);
  const double c = cl2 * std::sin(2.0 * theta) * std::cos(2.0 * phi);
  return overlap_from_q(q_constant_error(lambda, theta, phi, error, g), c, error, g);
}

}  // namespace qkdprobe
