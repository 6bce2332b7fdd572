// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkdprobe/qkdprobe.hpp"

using namespace qkdprobe;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

std::string run_cli(const std::string& args, int& code) {
  const std::string cmd = "\"" QKDPROBE_CLI "\" " + args + " 2>/dev/null";
  std::string out;
  code = -1;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return out;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
  const int status = pclose(p);
  code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

// --- 1 ---------------------------------------------------------------------
Outcome counter_example_1() {
  const SignalGeometry g(pi / 8.0 + 1e-6);
  const ProbeParams p{0.3 * pi, 0.156816 * pi, 0.1 * pi, 0.75 * pi};
  const auto ev = evaluate(p, g);
  const double csc = csc_branch_overlap(ev.error_rate, g);
  const bool ok = std::abs(ev.error_rate - 0.2) <= 5e-5 && std::abs(ev.overlap - 0.500003) <= 1e-5 &&
                  std::abs(csc - 0.500004) <= 1e-6;
  return {ok, "E=" + fmt(ev.error_rate, 9) + " Q=" + fmt(ev.overlap, 9) + " csc=" + fmt(csc, 9)};
}

// --- 2 ---------------------------------------------------------------------
Outcome counter_example_2() {
  const SignalGeometry g(pi / 5.0);
  const ProbeParams p{0.7 * pi, 0.0711275 * pi, 0.7 * pi, 0.7 * pi};
  const auto ev = evaluate(p, g);
  const double csc = csc_branch_overlap(0.3, g);
  const bool ok = std::abs(ev.overlap - 0.34828) <= 1e-4 && std::abs(csc - 0.909509) <= 1e-6 &&
                  ev.overlap < csc;
  return {ok, "E=" + fmt(ev.error_rate, 9) + " Q=" + fmt(ev.overlap, 9) + " csc=" + fmt(csc, 9)};
}

// --- 3 ---------------------------------------------------------------------
Outcome standard_closed_form() {
  const auto g = SignalGeometry::standard();
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const double E = 0.49 * i / 49.0;
    const double ref = 3.0 - 2.0 / (1.0 - E);
    worst = std::max(worst, std::abs(optimal_overlap(E, g).overlap - std::max(-1.0, ref)));
  }
  return {worst <= 1e-12, "max |Q_opt - (3 - 2/(1-E))| = " + fmt(worst, 3) + " over 50 E"};
}

// --- 4 ---------------------------------------------------------------------
Outcome brute_force() {
  bool ok = true;
  std::ostringstream os;
  long long total_viol = 0;
  double worst_best = 0.0, worst_ref = 0.0;
  for (double a : {pi / 12.0, pi / 9.0, pi / 8.0}) {
    for (double E : {0.05, 0.1, 0.2}) {
      SearchConfig c;
      c.geom = SignalGeometry(a);
      c.target_E = E;
      c.grid_resolution = 40;
      c.random_restarts = 50;
      c.seed = 1;
      c.tolerance = 1e-6;
      const auto rep = constrained_scan(c);
      const double ref = csc_branch_overlap(E, c.geom);
      total_viol += rep.violations;
      worst_best = std::max(worst_best, std::abs(rep.best_Q - ref));
      worst_ref = std::max(worst_ref, std::abs(rep.refined_Q - ref));
      if (rep.violations != 0 || std::abs(rep.best_Q - ref) > 1e-3 ||
          std::abs(rep.refined_Q - ref) > 1e-6) {
        ok = false;
        os << " [fail at alpha/pi=" << fmt(a / pi, 4) << " E=" << E << "]";
      }
    }
  }
  return {ok, "9 configs: violations=" + std::to_string(total_viol) +
                  " max|best-ref|=" + fmt(worst_best, 3) + " max|refined-ref|=" +
                  fmt(worst_ref, 3) + os.str()};
}

// --- 5 ---------------------------------------------------------------------
Outcome families() {
  const auto g = SignalGeometry::standard();
  std::mt19937_64 eng(2024);
  std::uniform_real_distribution<double> u(0.0, pi);
  bool ok = true;
  std::ostringstream os;
  for (double E : {0.05, 0.2}) {
    for (const auto& fam : optimal_parameter_families(E, g)) {
      double dE = 0, dQ = 0, res = 0, dc = 0, dd = 0;
      int drawn = 0;
      while (drawn < 20) {
        FreeChoices fc{u(eng), u(eng), u(eng), u(eng), MuBranch::Lower};
        FamilySample s;
        try {
          s = sample_params(fam, E, g, fc);
        } catch (const Error&) {
          continue;  // free values outside the family's reach; redraw
        }
        ++drawn;
        const auto k = coefficients(s.params);
        dE = std::max(dE, std::abs(error_rate(k, s.frame) - E));
        dQ = std::max(dQ, std::abs(overlap(k, s.frame) - optimal_overlap(E, g).overlap));
        res = std::max(res, stationarity_residuals(s.params, s.frame).max_abs());
        dc = std::max(dc, std::abs(k.c));
        dd = std::max(dd, std::abs(k.d - 1.0));
      }
      const bool f_ok = dE <= 1e-10 && dQ <= 1e-9 && res < 1e-9 && dc <= 1e-12 && dd <= 1e-12;
      ok = ok && f_ok;
      os << " " << to_string(fam.tag) << "@" << E << (f_ok ? ":ok" : ":FAIL") << "(dE=" << fmt(dE, 2)
         << " dQ=" << fmt(dQ, 2) << " res=" << fmt(res, 2) << " |c|=" << fmt(dc, 2)
         << " |d-1|=" << fmt(dd, 2) << ")";
    }
  }
  return {ok, "20 draws per family and E:" + os.str()};
}

// --- 6 ---------------------------------------------------------------------
Outcome possibilities_cli() {
  using nlohmann::json;
  bool ok = true;
  std::ostringstream os;
  for (const auto& [name, a] : std::vector<std::pair<std::string, double>>{
           {"pi/6", pi / 6.0}, {"pi/9", pi / 9.0}, {"pi/8", pi / 8.0}, {"pi/5", pi / 5.0}}) {
    int code = 0;
    const auto out = run_cli("possibilities --alpha " + name + " --error-rate 0.1", code);
    if (code != 0) {
      ok = false;
      os << " " << name << ": exit " << code;
      continue;
    }
    const auto res = json::parse(out).at("results");
    const auto& reps = res.at("reports");
    const auto& A = reps.at(0);
    const bool a_ok = !A.at("achieved_Q").is_null() &&
                      std::abs(std::abs(A.at("achieved_Q").get<double>()) - 1.0) < 1e-12;
    const bool c_ok = reps.at(2).at("status") != "YieldsOptimum";
    bool j_ok = true;
    if (a != pi / 8.0 && a != pi / 5.0) j_ok = reps.at(9).at("status") == "InfeasibleNumerically";
    bool d_ok = true;
    double spread = 0.0;
    if (a != pi / 6.0) {
      const auto& d = res.at("possibility_d_grid");
      spread = d.at("min_joint_spread").is_null() ? INFINITY
                                                  : d.at("min_joint_spread").get<double>();
      d_ok = !d.at("feasible").get<bool>() && spread > 1e-6 && d.at("entries").size() == 9;
    }
    ok = ok && a_ok && c_ok && j_ok && d_ok;
    os << " " << name << ":A" << (a_ok ? "+" : "-") << "C" << (c_ok ? "+" : "-") << "J"
       << (j_ok ? "+" : "-") << "D" << (d_ok ? "+" : "-");
    if (a != pi / 6.0) os << "(spread " << fmt(spread, 3) << ")";
  }
  return {ok, "via CLI at E=0.1; D over E=0.05..0.45:" + os.str()};
}

// --- 7 ---------------------------------------------------------------------
Outcome gradient_oracle() {
  std::mt19937_64 eng(77);
  std::uniform_real_distribution<double> u(0.05, pi - 0.05);
  std::uniform_real_distribution<double> ue(0.02, 0.3);
  const double h = 1e-5;
  double worst = 0.0;
  int points = 0;
  for (double a : {pi / 9.0, pi / 8.0}) {
    const SignalGeometry g(a);
    int here = 0;
    while (here < 100) {
      const double l = u(eng), t = u(eng), f = u(eng), E = ue(eng);
      try {
        mu_from_constraint(l, t, f, E, g);
      } catch (const Error&) {
        continue;
      }
      auto Q = [&](double x, double y, double z) { return constant_error_overlap(x, y, z, E, g); };
      const double c = std::cos(l) * std::cos(l) * std::sin(2 * t) * std::cos(2 * f);
      const double root = 2.0 * std::sqrt((1 - E) * (1 - E) - 0.25 * c * c * g.sin2a_sq());
      const auto r = stationarity_residuals(l, t, f, E, g);
      const double fl = -root * (Q(l + h, t, f) - Q(l - h, t, f)) / (2 * h);
      const double ft = root * (Q(l, t + h, f) - Q(l, t - h, f)) / (2 * h);
      const double fp = root * (Q(l, t, f + h) - Q(l, t, f - h)) / (2 * h);
      worst = std::max({worst, std::abs(r.r_lambda - fl), std::abs(r.r_theta - ft),
                        std::abs(r.r_phi - fp)});
      ++here;
    }
    points += here;
  }
  return {worst <= 1e-5,
          std::to_string(points) + " points, max |residual - FD| = " + fmt(worst, 3)};
}

// --- 8 ---------------------------------------------------------------------
Outcome branch_symmetry() {
  std::mt19937_64 eng(88);
  std::uniform_real_distribution<double> ua(0.005, pi / 8.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    // E drawn over the admissible range [0, E_max(alpha)]
    const double a = ua(eng);
    const double E = u01(eng) * std::min(max_error_rate(SignalGeometry(a)), 0.49);
    worst = std::max(worst, std::abs(csc_branch_overlap(E, SignalGeometry(a)) -
                                     sec_branch_overlap(E, SignalGeometry(pi / 4.0 - a))));
  }
  return {worst < 1e-12, "100 pairs, max difference " + fmt(worst, 3)};
}

// --- 9 ---------------------------------------------------------------------
Outcome root_solvers() {
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  double worst = 0.0;
  int roots = 0;
  auto cubic = [&](const std::array<double, 4>& c) {
    for (const auto& z : poly::cardano_roots(c[0], c[1], c[2], c[3])) {
      worst = std::max(worst, poly::relative_residual(std::span<const double>(c), z));
      ++roots;
    }
  };
  auto quintic = [&](const std::array<double, 6>& c) {
    for (double x : poly::real_roots_in(c, -1.0, 1.0)) {
      worst = std::max(worst, poly::relative_residual(std::span<const double>(c), x));
      ++roots;
    }
  };
  int sets = 0;
  while (sets < 200) {
    std::array<double, 4> c3{u(eng), u(eng), u(eng), u(eng)};
    std::array<double, 6> c5{};
    for (auto& v : c5) v = u(eng);
    if (std::abs(c3[0]) < 1e-6) continue;
    cubic(c3);
    quintic(c5);
    ++sets;
  }
  for (double a : {pi / 9.0, pi / 8.0, pi / 5.0}) {
    for (double E : {0.1, 0.3}) {
      const SignalGeometry g(a);
      cubic(sin2phi_cubic_coefficients(E, g));
      cubic(lambda_cubic_coefficients(E, g));
      quintic(quintic_coefficients(E, g));
    }
  }
  return {worst < 1e-9, std::to_string(roots) + " roots, max relative residual " + fmt(worst, 3)};
}

// --- 10 --------------------------------------------------------------------
Outcome distillation_identities() {
  bool ok = true;
  std::ostringstream os;
  for (int l = 0; l <= 12; ++l) {
    const std::size_t n = std::size_t{1} << l;
    std::vector<double> uni(n, 1.0 / static_cast<double>(n));
    std::vector<double> pm(n, 0.0);
    pm[n / 2] = 1.0;
    if (renyi_information(uni, l) != 0.0 || renyi_information(pm, l) != l) ok = false;
  }
  os << "renyi " << (ok ? "exact" : "INEXACT");
  double rt = 0.0;
  for (double y : {-0.999, -0.9, -0.5, 0.0, 0.5, 0.9, 0.999}) {
    rt = std::max(rt, std::abs(std::erf(inverse_erf(y)) - y));
  }
  ok = ok && rt < 1e-12;
  os << "; erfinv round-trip " << fmt(rt, 3);
  bool half = true;
  for (double a : {pi / 12.0, pi / 9.0, pi / 8.0}) {
    half = half && asymptotic_capacity(0.0, SignalGeometry(a)).capacity == 0.5;
  }
  ok = ok && half;
  os << "; C'(0)=1/2 " << (half ? "yes" : "NO");
  const double c8 = asymptotic_capacity(0.05, SignalGeometry::standard()).capacity;
  bool best = true;
  os << "; C'(0.05):";
  for (double a : {pi / 12.0, pi / 10.0, pi / 9.0}) {
    const double c = asymptotic_capacity(0.05, SignalGeometry(a)).capacity;
    best = best && c < c8;
    os << " " << fmt(c);
  }
  os << " < " << fmt(c8);
  return {ok && best, os.str()};
}

// --- 11 --------------------------------------------------------------------
Outcome frontier_limit() {
  const auto g = SignalGeometry::standard();
  const double target = capacity_inner_max(0.1, g).second;
  std::vector<double> diffs;
  for (std::int64_t n : {1000, 10000, 100000, 1000000}) {
    DistillationConfig c;
    c.n = n;
    c.e_T = n / 10;
    c.p = 0.5;
    diffs.push_back(std::abs(defense_frontier(c, g).t_F / static_cast<double>(n) - target));
  }
  bool mono = true;
  for (std::size_t i = 1; i < diffs.size(); ++i) mono = mono && diffs[i] < diffs[i - 1];
  std::ostringstream os;
  os << "differences";
  for (double d : diffs) os << " " << fmt(d, 4);
  return {mono && diffs.back() < 2e-3, os.str()};
}

// --- 12 --------------------------------------------------------------------
Outcome privacy_amplification() {
  std::mt19937_64 eng(1212);
  int held = 0;
  double worst_margin = -INFINITY;
  for (int i = 0; i < 50; ++i) {
    const int l = 2 + static_cast<int>(eng() % 11);  // 2..12
    const int s = 1 + static_cast<int>(eng() % static_cast<std::uint64_t>(l));
    std::vector<double> src(std::size_t{1} << l);
    // skewed random source: exponentiated uniforms concentrate mass
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double sharp = 1.0 + 20.0 * u(eng);
    double tot = 0.0;
    for (auto& v : src) tot += (v = std::pow(u(eng), sharp));
    for (auto& v : src) v /= tot;
    const auto r = pa_empirical_check(l, s, src, 500, derive_seed(1212, i));
    const double margin = r.observed - (r.bound + 3.0 * r.sigma_mc);
    worst_margin = std::max(worst_margin, margin);
    if (margin <= 0.0) ++held;
  }
  return {held == 50, std::to_string(held) + "/50 configurations hold; max(observed - bound - 3sigma) = " +
                          fmt(worst_margin, 4)};
}

// --- 13 --------------------------------------------------------------------
Outcome simulator() {
  sim::SimulationConfig c;
  c.m = 400000;
  c.geom = SignalGeometry::standard();
  c.attack = sim::FamilyAttack{FamilyTag::SetE, 0.05, {}};
  c.p = 0.01;
  c.seed = 1;
  const auto r = sim::run(c);
  const double sigma = std::sqrt(0.05 * 0.95 / static_cast<double>(r.n));
  const double cap = r.analytic_capacity.value_or(NAN);
  const bool ok = std::abs(r.empirical_E - 0.05) <= 4.0 * sigma &&
                  std::abs(r.empirical_rate - cap) <= 0.01;
  return {ok, "n=" + std::to_string(r.n) + " e_T=" + std::to_string(r.e_T) +
                  " E=" + fmt(r.empirical_E) + " (" + fmt(std::abs(r.empirical_E - 0.05) / sigma, 3) +
                  " sigma) rate=" + fmt(r.empirical_rate) + " capacity=" + fmt(cap)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"counter-example 1 (alpha = pi/8 + 1e-6)", counter_example_1},
      {"counter-example 2 (alpha = pi/5)", counter_example_2},
      {"optimum at pi/8 equals 3 - 2/(1-E)", standard_closed_form},
      {"zero-violation brute force", brute_force},
      {"optimum family verification", families},
      {"possibility classification", possibilities_cli},
      {"gradient oracle", gradient_oracle},
      {"branch symmetry", branch_symmetry},
      {"root solvers", root_solvers},
      {"distillation identities", distillation_identities},
      {"frontier limit", frontier_limit},
      {"privacy amplification check", privacy_amplification},
      {"simulator convergence", simulator},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS]" : "[FAIL]") << " criterion " << i + 1 << ": "
              << criteria[i].first << " -- " << o.detail << " (" << fmt(secs, 3) << " s)"
              << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
