#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/distillation.hpp"
#include "qkdprobe/error.hpp"
#include "qkdprobe/geometry.hpp"
#include "qkdprobe/probe_model.hpp"
#include "qkdprobe/rng.hpp"

namespace qkdprobe::sim {

/// Attack drawn from an optimum family at a target error rate.
struct FamilyAttack {
  FamilyTag family = FamilyTag::SetE;
  double target_E = 0.0;
  FreeChoices free{};
};

using Attack = std::variant<ProbeParams, FamilyAttack>;

/// Scalar: each sifted bit flips with probability E(params).
/// FourState: the sent state is drawn uniformly from {u, u-bar} and the
/// outcome from the corresponding row of the detection matrix.
enum class ErrorSampling { Scalar, FourState };

struct SimulationConfig {
  std::int64_t m = 1;
  SignalGeometry geom = SignalGeometry::standard();
  Attack attack = ProbeParams{0.0, 0.0, 0.0, pi / 4.0};
  double p = 0.01;
  QModel q_model{};
  double nu = 0.0;
  double g = 0.0;
  std::uint64_t seed = 0;
  ErrorSampling sampling = ErrorSampling::Scalar;
};

struct ResolvedAttack {
  ProbeParams params;
  /// Geometry in which params are evaluated; differs from the protocol
  /// geometry only for SecBranch family samples.
  SignalGeometry frame = SignalGeometry::standard();
  double error_rate = 0.0;
  double overlap = 1.0;
};

struct SimulationReport {
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t e_T = 0;
  std::int64_t s = 0;
  std::int64_t final_key_len = 0;
  double empirical_E = 0.0;
  double empirical_rate = 0.0;
  double analytic_E = 0.0;
  std::optional<double> analytic_capacity;
  double t_F = 0.0;
  double xi = 0.0;
  double q_leak = 0.0;
  std::int64_t clamped = 0;
  ResolvedAttack attack{};
  std::uint64_t seed = 0;
};

inline ResolvedAttack resolve_attack(const Attack& attack, const SignalGeometry& g) {
  ResolvedAttack r{ProbeParams{}, g};
  if (const auto* p = std::get_if<ProbeParams>(&attack)) {
    require_in_domain(*p);
    r.params = *p;
  } else {
    const auto& fa = std::get<FamilyAttack>(attack);
    const auto families = optimal_parameter_families(fa.target_E, g);
    const auto it = std::find_if(families.begin(), families.end(),
                                 [&](const OptimumFamily& f) { return f.tag == fa.family; });
    if (it == families.end()) {
      throw Error(ErrorCode::InvalidArgument,
                  std::string("family ") + std::string(to_string(fa.family)) +
                      " does not exist at this alpha");
    }
    const auto sample = sample_params(*it, fa.target_E, g, fa.free);
    r.params = sample.params;
    r.frame = sample.frame;
  }
  const auto k = coefficients(r.params);
  detection_probabilities(k, r.frame);
  r.error_rate = error_rate(k, r.frame);
  r.overlap = overlap(k, r.frame);
  return r;
}

inline constexpr std::int64_t kBlockBits = 1 << 16;

/// Monte Carlo of sifting and bit errors for m raw bits. Blocks of 2^16 raw
/// bits draw from independent counter-derived streams, so the counts do
/// not depend on how blocks are scheduled.
inline SimulationReport run(const SimulationConfig& cfg) {
  if (cfg.m < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1");
  SimulationReport rep;
  rep.m = cfg.m;
  rep.seed = cfg.seed;
  rep.attack = resolve_attack(cfg.attack, cfg.geom);
  rep.analytic_E = rep.attack.error_rate;

  const auto k = coefficients(rep.attack.params);
  const auto P = detection_probabilities(k, rep.attack.frame);
  const double flip = std::clamp(rep.analytic_E, 0.0, 1.0);
  const double flip_u = std::clamp(P.p_u_ubar, 0.0, 1.0);
  const double flip_ubar = std::clamp(P.p_ubar_u, 0.0, 1.0);

  const std::int64_t blocks = (cfg.m + kBlockBits - 1) / kBlockBits;
  for (std::int64_t b = 0; b < blocks; ++b) {
    auto eng = make_engine(cfg.seed, static_cast<std::uint64_t>(b));
    const std::int64_t len = std::min(kBlockBits, cfg.m - b * kBlockBits);
    for (std::int64_t i = 0; i < len; ++i) {
      if (!bernoulli(eng, 0.5)) continue;  // bases differ: discarded in sifting
      ++rep.n;
      bool error = false;
      if (cfg.sampling == ErrorSampling::Scalar) {
        error = bernoulli(eng, flip);
      } else {
        const bool sent_u = bernoulli(eng, 0.5);
        error = bernoulli(eng, sent_u ? flip_u : flip_ubar);
      }
      if (error) ++rep.e_T;
    }
  }
  if (rep.n == 0) throw Error(ErrorCode::DegenerateRun, "no bits survived sifting");

  rep.empirical_E = static_cast<double>(rep.e_T) / static_cast<double>(rep.n);
  DistillationConfig dc;
  dc.n = rep.n;
  dc.e_T = rep.e_T;
  dc.p = cfg.p;
  dc.q_leak = cfg.q_model.leak(rep.n, rep.e_T);
  dc.nu = cfg.nu;
  dc.g = cfg.g;
  const auto fr = defense_frontier(dc, cfg.geom);
  rep.t_F = fr.t_F;
  rep.xi = fr.xi;
  rep.clamped = fr.clamped;
  rep.q_leak = dc.q_leak;
  rep.s = compression_bits(fr.t_F, dc);
  const std::int64_t kept = rep.n - rep.e_T - rep.s;
  rep.final_key_len = std::max<std::int64_t>(0, kept);
  rep.empirical_rate = static_cast<double>(kept) / static_cast<double>(cfg.m);
  try {
    rep.analytic_capacity = asymptotic_capacity(rep.analytic_E, cfg.geom).capacity;
  } catch (const Error&) {
    rep.analytic_capacity.reset();
  }
  return rep;
}

enum class SweepVariable { ErrorRate, Alpha };

struct SweepRow {
  double value = 0.0;
  SimulationReport report;
};

/// One run per value; value i runs with seed derive_seed(template.seed, i),
/// echoed in its report.
inline std::vector<SweepRow> sweep(const SimulationConfig& tmpl, SweepVariable variable,
                                   const std::vector<double>& values) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < values.size(); ++i) {
    SimulationConfig c = tmpl;
    c.seed = derive_seed(tmpl.seed, i);
    if (variable == SweepVariable::Alpha) {
      c.geom = SignalGeometry(values[i]);
    } else {
      auto* fa = std::get_if<FamilyAttack>(&c.attack);
      if (!fa) {
        throw Error(ErrorCode::InvalidArgument,
                    "an error-rate sweep needs a family attack, not fixed angles");
      }
      fa->target_E = values[i];
    }
    rows.push_back({values[i], run(c)});
  }
  return rows;
}

}  // namespace qkdprobe::sim
