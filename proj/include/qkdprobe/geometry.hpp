#pragma once

#include <cmath>
#include <numbers>
#include <sstream>

#include "qkdprobe/error.hpp"

namespace qkdprobe {

inline constexpr double pi = std::numbers::pi;

/// Basis half-angle alpha of the four-state protocol, alpha in (0, pi/4).
/// alpha = pi/8 is the standard 45-degree protocol.
class SignalGeometry {
 public:
  explicit SignalGeometry(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < pi / 4.0)) {
      std::ostringstream os;
      os << "alpha = " << alpha << " outside (0, pi/4)";
      throw Error(ErrorCode::Domain, os.str());
    }
    const double s = std::sin(2.0 * alpha);
    const double c = std::cos(2.0 * alpha);
    sin2a_ = s;
    sin2a_sq_ = s * s;
    cos2a_sq_ = c * c;
  }

  static SignalGeometry standard() { return SignalGeometry(pi / 8.0); }

  double alpha() const noexcept { return alpha_; }
  /// Angle between the two nonorthogonal signal states.
  double theta_bar() const noexcept { return pi / 2.0 - 2.0 * alpha_; }

  double sin2a() const noexcept { return sin2a_; }
  double sin2a_sq() const noexcept { return sin2a_sq_; }
  double cos2a_sq() const noexcept { return cos2a_sq_; }
  double csc2a_sq() const noexcept { return 1.0 / sin2a_sq_; }
  double sec2a_sq() const noexcept { return 1.0 / cos2a_sq_; }
  double tan2a_sq() const noexcept { return sin2a_sq_ / cos2a_sq_; }
  double cot2a_sq() const noexcept { return cos2a_sq_ / sin2a_sq_; }

  bool is_standard(double tol = 1e-12) const noexcept {
    return std::abs(alpha_ - pi / 8.0) < tol;
  }

  friend bool operator==(const SignalGeometry& l, const SignalGeometry& r) noexcept {
    return l.alpha_ == r.alpha_;
  }

 private:
  double alpha_;
  double sin2a_ = 0.0;
  double sin2a_sq_ = 0.0;
  double cos2a_sq_ = 0.0;
};

/// Entangling-probe angles. Every observable is pi-periodic in each angle,
/// so the canonical domain is [0, pi] per angle.
struct ProbeParams {
  double lambda = 0.0;
  double mu = 0.0;
  double theta = 0.0;
  double phi = 0.0;

  bool in_domain() const noexcept {
    auto ok = [](double x) { return x >= 0.0 && x <= pi; };
    return ok(lambda) && ok(mu) && ok(theta) && ok(phi);
  }

  friend bool operator==(const ProbeParams&, const ProbeParams&) = default;
};

/// Maps an angle into [0, pi) using pi-periodicity.
inline double wrap_angle(double x) noexcept {
  double r = std::fmod(x, pi);
  if (r < 0.0) r += pi;
  return r;
}

inline ProbeParams wrapped(const ProbeParams& p) noexcept {
  auto keep = [](double x) { return (x >= 0.0 && x <= pi) ? x : wrap_angle(x); };
  return {keep(p.lambda), keep(p.mu), keep(p.theta), keep(p.phi)};
}

inline void require_in_domain(const ProbeParams& p) {
  if (!p.in_domain()) {
    std::ostringstream os;
    os << "probe angles must lie in [0, pi]: (" << p.lambda << ", " << p.mu << ", "
       << p.theta << ", " << p.phi << ")";
    throw Error(ErrorCode::Domain, os.str());
  }
}

}  // namespace qkdprobe
