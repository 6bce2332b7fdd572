#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkdprobe/analytic_optimum.hpp"
#include "qkdprobe/distillation.hpp"
#include "qkdprobe/numeric_search.hpp"
#include "qkdprobe/possibilities.hpp"
#include "qkdprobe/probe_model.hpp"
#include "qkdprobe/simulator.hpp"

namespace qkdprobe::io {

using json = nlohmann::ordered_json;

/// Angle echoed in both conventions.
inline json angle(double rad) { return json{{"rad", rad}, {"pi", rad / pi}}; }

inline json to_json(const SignalGeometry& g) {
  return json{{"alpha", angle(g.alpha())}, {"theta_bar", angle(g.theta_bar())}};
}

inline json to_json(const ProbeParams& p) {
  return json{{"lambda", angle(p.lambda)},
              {"mu", angle(p.mu)},
              {"theta", angle(p.theta)},
              {"phi", angle(p.phi)}};
}

inline json to_json(const ProbeCoefficients& k) {
  return json{{"a", k.a}, {"b", k.b}, {"c", k.c}, {"d", k.d}};
}

inline json to_json(const DetectionProbabilities& p) {
  return json{{"p_uu", p.p_uu},
              {"p_u_ubar", p.p_u_ubar},
              {"p_ubar_u", p.p_ubar_u},
              {"p_ubar_ubar", p.p_ubar_ubar}};
}

inline json to_json(const AttackEvaluation& e) {
  return json{{"E", e.error_rate}, {"Q", e.overlap}, {"I", e.renyi_info}};
}

inline json to_json(const BranchedOptimum& o) {
  return json{{"Q", o.overlap}, {"I", o.renyi_bits}, {"branch", to_string(o.branch)}};
}

inline json to_json(const OptimumFamily& f) {
  return json{{"tag", to_string(f.tag)},
              {"branch", to_string(f.branch)},
              {"constraint", f.constraint},
              {"free_parameters", f.free_parameters},
              {"rhs", f.rhs}};
}

inline json to_json(const StationaryResiduals& r) {
  return json{{"r_lambda", r.r_lambda}, {"r_theta", r.r_theta}, {"r_phi", r.r_phi},
              {"f1", r.f1},           {"f2", r.f2},           {"f3", r.f3}};
}

inline json to_json(const PossibilityReport& r) {
  json j{{"label", std::string(1, r.label)},
         {"status", to_string(r.status)},
         {"achieved_Q", r.achieved_Q ? json(*r.achieved_Q) : json(nullptr)},
         {"detail", r.detail}};
  j["witness"] = r.witness ? to_json(*r.witness) : json(nullptr);
  return j;
}

inline json to_json(const PossibilityDEntry& e) {
  return json{{"E", e.error},
              {"cubic_roots", e.cubic_roots},
              {"lambda_roots", e.lambda_roots},
              {"quintic_roots", e.quintic_roots},
              {"x0", e.x0},
              {"spread_i", e.spread_i},
              {"spread_ii", e.spread_ii},
              {"spread_iii", e.spread_iii}};
}

inline json to_json(const PossibilityDReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back(to_json(e));
  return json{{"feasible", r.feasible}, {"min_joint_spread", r.min_joint_spread},
              {"entries", entries}};
}

inline json to_json(const SearchReport& r) {
  json j{{"best_Q", r.best_Q},
         {"best_params", to_json(r.best_params)},
         {"analytic_Q", r.analytic_Q},
         {"violations", r.violations},
         {"samples_evaluated", r.samples_evaluated},
         {"infeasible_points", r.infeasible_points},
         {"refined_Q", r.refined_Q}};
  if (r.constraint_gap) j["constraint_gap"] = *r.constraint_gap;
  return j;
}

inline json to_json(const FrontierResult& f) {
  return json{{"t_F", f.t_F}, {"argmax_e", f.argmax_e}, {"xi", f.xi}, {"clamped", f.clamped}};
}

inline json to_json(const CapacityPoint& c) {
  return json{{"E", c.error_rate},
              {"capacity", c.capacity},
              {"inner_argmax", c.inner_argmax},
              {"inner_max", c.inner_max}};
}

inline json to_json(const sim::SimulationReport& r) {
  return json{{"m", r.m},
              {"n", r.n},
              {"e_T", r.e_T},
              {"s", r.s},
              {"final_key_len", r.final_key_len},
              {"empirical_E", r.empirical_E},
              {"empirical_rate", r.empirical_rate},
              {"analytic_E", r.analytic_E},
              {"analytic_capacity",
               r.analytic_capacity ? json(*r.analytic_capacity) : json(nullptr)},
              {"t_F", r.t_F},
              {"xi", r.xi},
              {"q_leak", r.q_leak},
              {"clamped", r.clamped},
              {"params", to_json(r.attack.params)},
              {"frame_alpha", angle(r.attack.frame.alpha())},
              {"seed", r.seed}};
}

/// %.12g, the fixed CSV precision.
inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string capacity_csv(const SignalGeometry& g, const std::vector<CapacityPoint>& pts) {
  std::ostringstream os;
  os << "alpha,E,Q_opt,I_opt,capacity\n";
  for (const auto& p : pts) {
    const auto o = optimal_overlap(p.error_rate, g);
    os << num(g.alpha()) << ',' << num(p.error_rate) << ',' << num(o.overlap) << ','
       << num(o.renyi_bits) << ',' << num(p.capacity) << '\n';
  }
  return os.str();
}

struct FrontierRow {
  std::int64_t n = 0;
  std::int64_t e_T = 0;
  double p = 0.0;
  FrontierResult result;
  std::int64_t s = 0;
};

inline std::string frontier_csv(const std::vector<FrontierRow>& rows) {
  std::ostringstream os;
  os << "n,e_T,p,xi,t_F,argmax_e,s\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.e_T << ',' << num(r.p) << ',' << num(r.result.xi) << ','
       << num(r.result.t_F) << ',' << r.result.argmax_e << ',' << r.s << '\n';
  }
  return os.str();
}

inline std::string samples_csv(const std::vector<SampleRow>& rows) {
  std::ostringstream os;
  os << "lambda,theta,phi,mu,E,Q\n";
  for (const auto& r : rows) {
    os << num(r.lambda) << ',' << num(r.theta) << ',' << num(r.phi) << ',' << num(r.mu) << ','
       << num(r.E) << ',' << num(r.Q) << '\n';
  }
  return os.str();
}

inline std::string sweep_csv(const std::string& variable, const std::vector<sim::SweepRow>& rows) {
  std::ostringstream os;
  os << variable << ",seed,m,n,e_T,s,final_key_len,empirical_E,empirical_rate,analytic_E,"
                    "analytic_capacity\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << num(row.value) << ',' << r.seed << ',' << r.m << ',' << r.n << ',' << r.e_T << ','
       << r.s << ',' << r.final_key_len << ',' << num(r.empirical_E) << ','
       << num(r.empirical_rate) << ',' << num(r.analytic_E) << ','
       << (r.analytic_capacity ? num(*r.analytic_capacity) : std::string()) << '\n';
  }
  return os.str();
}

}  // namespace qkdprobe::io
