#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <tuple>
#include <vector>

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/probe_model.hpp"
#include "qkdprobe/rng.hpp"
#include "qkdprobe/simplex.hpp"

namespace qkdprobe {

/// Curve the sampled Q values are compared against.
enum class ReferenceCurve { Optimal, CscFormula, SecFormula };

inline constexpr std::string_view to_string(ReferenceCurve r) {
  switch (r) {
    case ReferenceCurve::Optimal: return "optimal";
    case ReferenceCurve::CscFormula: return "csc";
    case ReferenceCurve::SecFormula: return "sec";
  }
  return "unknown";
}

struct SearchConfig {
  SignalGeometry geom = SignalGeometry::standard();
  double target_E = 0.0;
  int grid_resolution = 40;
  int random_restarts = 50;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  ReferenceCurve reference = ReferenceCurve::Optimal;
  bool record_samples = false;
};

struct SampleRow {
  double lambda, theta, phi, mu, E, Q;
};

struct SearchReport {
  double best_Q = std::numeric_limits<double>::infinity();
  ProbeParams best_params;
  double analytic_Q = 0.0;
  long long violations = 0;
  long long samples_evaluated = 0;
  long long infeasible_points = 0;
  /// Best value reached by local refinement alone (grid excluded).
  double refined_Q = std::numeric_limits<double>::infinity();
  /// penalty_scan only: |E - target| at the minimizer of the penalized objective.
  std::optional<double> constraint_gap;
  std::vector<SampleRow> samples;
};

struct RefineResult {
  double Q = std::numeric_limits<double>::infinity();
  ProbeParams params;
  int evaluations = 0;
};

inline void validate(const SearchConfig& c) {
  if (c.grid_resolution < 3) throw Error(ErrorCode::InvalidArgument, "grid_resolution < 3");
  if (!(c.tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance <= 0");
  if (c.random_restarts < 0) throw Error(ErrorCode::InvalidArgument, "random_restarts < 0");
  if (!(c.target_E >= 0.0 && c.target_E < 0.5)) {
    throw Error(ErrorCode::Domain, "target E must lie in [0, 1/2)");
  }
}

inline double reference_overlap(ReferenceCurve ref, double error, const SignalGeometry& g) {
  switch (ref) {
    case ReferenceCurve::Optimal: return optimal_overlap(error, g).overlap;
    case ReferenceCurve::CscFormula: return csc_branch_overlap(error, g);
    case ReferenceCurve::SecFormula: return sec_branch_overlap(error, g);
  }
  return 0.0;
}

namespace detail {

inline bool lex_less(const ProbeParams& a, const ProbeParams& b) {
  return std::tie(a.lambda, a.theta, a.phi, a.mu) < std::tie(b.lambda, b.theta, b.phi, b.mu);
}

/// Records one evaluated point; keeps the minimum by Q, ties by
/// lexicographic (lambda, theta, phi).
struct Tracker {
  SearchReport& rep;
  double tol;
  bool record;

  void add(const ProbeParams& p, double e, double q, double reference) {
    ++rep.samples_evaluated;
    if (q < reference - tol) ++rep.violations;
    if (record) rep.samples.push_back({p.lambda, p.theta, p.phi, p.mu, e, q});
    if (q < rep.best_Q || (q == rep.best_Q && lex_less(p, rep.best_params))) {
      rep.best_Q = q;
      rep.best_params = p;
    }
  }
};

/// Q at (lambda, theta, phi) on the constant-E surface, mu solved from the
/// constraint; nullopt when the point cannot reach the target.
inline std::optional<std::pair<ProbeParams, double>> constrained_point(
    double lambda, double theta, double phi, const SignalGeometry& g, double target,
    const ProbeParams* singular_fallback = nullptr) {
  ProbeParams p{wrap_angle(lambda), 0.0, wrap_angle(theta), wrap_angle(phi)};
  try {
    if (std::abs(std::sin(p.lambda)) < kIdentityTol) {
      // mu drops out; the point is on the surface only if (theta, phi) put it there.
      if (singular_fallback) p.mu = singular_fallback->mu;
      const auto k = coefficients(p);
      if (std::abs(error_rate(k, g) - target) > 1e-10) return std::nullopt;
      return std::pair{p, overlap(k, g)};
    }
    p.mu = mu_from_constraint(p.lambda, p.theta, p.phi, target, g);
    return std::pair{p, overlap(coefficients(p), g)};
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::DegenerateDenominator) {
      return std::nullopt;
    }
    throw;
  }
}

inline RefineResult refine_tracked(const ProbeParams& start, const SearchConfig& cfg,
                                   Tracker* tracker, double reference) {
  const auto& g = cfg.geom;
  const double target = cfg.target_E;
  auto f = [&](const std::array<double, 3>& x) {
    const auto r = constrained_point(x[0], x[1], x[2], g, target, &start);
    if (!r) return std::numeric_limits<double>::infinity();
    if (tracker) tracker->add(r->first, target, r->second, reference);
    return r->second;
  };
  SimplexOptions opt;
  opt.initial_step = 0.05;
  const auto s = nelder_mead<3>(f, {start.lambda, start.theta, start.phi}, opt);
  RefineResult out;
  out.evaluations = s.evaluations;
  if (const auto r = constrained_point(s.x[0], s.x[1], s.x[2], g, target, &start)) {
    out.Q = r->second;
    out.params = r->first;
  }
  return out;
}

}  // namespace detail

/// Derivative-free local search over (lambda, theta, phi) with mu re-solved
/// at every step. Never returns a Q above the starting value.
inline RefineResult refine(const ProbeParams& start, const SearchConfig& cfg) {
  validate(cfg);
  const auto s0 = detail::constrained_point(start.lambda, start.theta, start.phi, cfg.geom,
                                            cfg.target_E, &start);
  if (!s0) {
    throw Error(ErrorCode::Infeasible, "refine: start point cannot reach the target E");
  }
  auto r = detail::refine_tracked(start, cfg, nullptr, 0.0);
  if (!(r.Q <= s0->second)) {
    r.Q = s0->second;
    r.params = s0->first;
  }
  return r;
}

/// Grid scan of (lambda, theta, phi) over [0, pi]^3 on the constant-E
/// surface, followed by local refinement from the best grid point and from
/// `random_restarts` random feasible starts.
inline SearchReport constrained_scan(const SearchConfig& cfg) {
  validate(cfg);
  const auto& g = cfg.geom;
  const double target = cfg.target_E;
  SearchReport rep;
  rep.analytic_Q = reference_overlap(cfg.reference, target, g);
  detail::Tracker tr{rep, cfg.tolerance, cfg.record_samples};

  const int n = cfg.grid_resolution;
  auto node = [n](int i) { return pi * i / (n - 1); };
  const double s2 = g.sin2a_sq();
  for (int i = 0; i < n; ++i) {
    const double lam = node(i);
    const bool singular = std::abs(std::sin(lam)) < kIdentityTol;
    for (int j = 0; j < n; ++j) {
      const double th = node(j);
      if (singular) {
        // sin(lambda) = 0: solve sin(2phi) from the constraint instead of mu.
        const double c2t = std::cos(2.0 * th);
        if (std::abs(c2t) < kIdentityTol) {
          ++rep.infeasible_points;
          continue;
        }
        const double v = 1.0 - (2.0 * target - 1.0 + c2t) / (s2 * c2t);
        if (std::abs(v) > 1.0) {
          ++rep.infeasible_points;
          continue;
        }
        const double a = std::asin(v);
        for (double phi : {0.5 * a, 0.5 * (pi - a)}) {
          ProbeParams p{lam, 0.0, th, wrap_angle(phi)};
          const auto k = coefficients(p);
          tr.add(p, error_rate(k, g), overlap(k, g), rep.analytic_Q);
        }
        continue;
      }
      for (int l = 0; l < n; ++l) {
        const auto r = detail::constrained_point(lam, th, node(l), g, target);
        if (!r) {
          ++rep.infeasible_points;
          continue;
        }
        tr.add(r->first, target, r->second, rep.analytic_Q);
      }
    }
  }
  if (rep.samples_evaluated == 0) {
    throw Error(ErrorCode::EmptyFeasibleSet, "no grid point reaches the target error rate");
  }

  auto run_refine = [&](const ProbeParams& start) {
    const auto r = detail::refine_tracked(start, cfg, &tr, rep.analytic_Q);
    rep.refined_Q = std::min(rep.refined_Q, r.Q);
  };
  if (cfg.random_restarts > 0) run_refine(rep.best_params);
  for (int k = 0; k < cfg.random_restarts; ++k) {
    auto eng = make_engine(cfg.seed, static_cast<std::uint64_t>(k));
    for (int attempt = 0; attempt < 1000; ++attempt) {
      const double lam = uniform(eng, 0.0, pi);
      const double th = uniform(eng, 0.0, pi);
      const double ph = uniform(eng, 0.0, pi);
      if (const auto r = detail::constrained_point(lam, th, ph, g, target)) {
        run_refine(r->first);
        break;
      }
    }
  }
  return rep;
}

/// Penalty method over all four angles: minimizes Q + w (E - target)^2 from
/// random starts. best_Q is the lowest Q seen with |E - target| < 1e-4;
/// violations compare each such point against the optimum at its own E.
inline SearchReport penalty_scan(const SearchConfig& cfg, double penalty_weight) {
  validate(cfg);
  if (!(penalty_weight > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "penalty weight must be positive");
  }
  const auto& g = cfg.geom;
  const double target = cfg.target_E;
  SearchReport rep;
  rep.analytic_Q = reference_overlap(cfg.reference, target, g);
  constexpr double band = 1e-4;

  double best_obj = std::numeric_limits<double>::infinity();
  ProbeParams best_obj_params;
  auto objective = [&](const std::array<double, 4>& x) {
    ProbeParams p{wrap_angle(x[0]), wrap_angle(x[1]), wrap_angle(x[2]), wrap_angle(x[3])};
    const auto k = coefficients(p);
    const double e = error_rate(k, g);
    double q = 0.0;
    try {
      q = overlap(k, g);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    ++rep.samples_evaluated;
    if (cfg.record_samples) rep.samples.push_back({p.lambda, p.theta, p.phi, p.mu, e, q});
    if (std::abs(e - target) < band) {
      double ref = rep.analytic_Q;
      bool have_ref = true;
      try {
        ref = reference_overlap(cfg.reference, e, g);
      } catch (const Error&) {
        have_ref = false;
      }
      if (have_ref && q < ref - cfg.tolerance) ++rep.violations;
      if (q < rep.best_Q || (q == rep.best_Q && detail::lex_less(p, rep.best_params))) {
        rep.best_Q = q;
        rep.best_params = p;
      }
    }
    const double obj = q + penalty_weight * (e - target) * (e - target);
    if (obj < best_obj) {
      best_obj = obj;
      best_obj_params = p;
    }
    return obj;
  };

  const int starts = std::max(1, cfg.random_restarts);
  SimplexOptions opt;
  opt.initial_step = 0.1;
  for (int k = 0; k < starts; ++k) {
    auto eng = make_engine(cfg.seed, static_cast<std::uint64_t>(k));
    std::array<double, 4> x0{};
    for (auto& v : x0) v = uniform(eng, 0.0, pi);
    nelder_mead<4>(objective, x0, opt);
  }
  rep.constraint_gap = std::abs(error_rate(coefficients(best_obj_params), g) - target);
  rep.refined_Q = rep.best_Q;
  return rep;
}

}  // namespace qkdprobe
