// qkdprobe command-line front end: every subcommand prints one JSON envelope
// (or a CSV table with --format csv) and exits 0 on success, 1 when verify
// finds violations, 2 on usage or domain errors.

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <unistd.h>

#include "qkdprobe/io.hpp"
#include "qkdprobe/qkdprobe.hpp"

#ifndef QKDPROBE_VERSION
#define QKDPROBE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using qkdprobe::io::json;
using namespace qkdprobe;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double parse_number(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError("cannot parse value '" + whole + "'");
  }
  if (used != s.size()) throw UsageError("cannot parse value '" + whole + "'");
  return v;
}

/// Accepts raw radians ("0.39") or multiples of pi ("pi/8", "0.3pi",
/// "0.125*pi", "3pi/4", "-pi").
double parse_angle(const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += static_cast<char>(std::tolower(ch));
  const auto at = s.find("pi");
  if (at == std::string::npos) return parse_number(s, text);
  std::string coef = s.substr(0, at);
  if (!coef.empty() && coef.back() == '*') coef.pop_back();
  double c = 1.0;
  if (coef == "-") {
    c = -1.0;
  } else if (!coef.empty() && coef != "+") {
    c = parse_number(coef, text);
  }
  const std::string rest = s.substr(at + 2);
  if (rest.empty()) return c * pi;
  if (rest[0] != '/') throw UsageError("cannot parse value '" + text + "'");
  const double d = parse_number(rest.substr(1), text);
  if (d == 0.0) throw UsageError("division by zero in angle '" + text + "'");
  return c * pi / d;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw UsageError("write to " + tmp.string() + " failed");
  }
  fs::rename(tmp, path);
}

struct Common {
  std::string format = "json";
  std::string out;
};

struct Runner {
  std::string command;
  Common common;
  json inputs = json::object();
  json warnings = json::array();

  void emit(const json& results, const std::optional<std::string>& csv) const {
    std::string text;
    if (common.format == "csv") {
      if (!csv) throw UsageError("--format csv is not available for " + command);
      text = *csv;
    } else {
      json env;
      env["tool_version"] = QKDPROBE_VERSION;
      env["command"] = command;
      env["inputs"] = inputs;
      env["results"] = results;
      env["warnings"] = warnings;
      text = env.dump(2) + "\n";
    }
    fs::path target;
    if (!common.out.empty()) {
      target = common.out;
    } else if (const char* dir = std::getenv("OUTPUT_DIR"); dir && *dir) {
      target = fs::path(dir) / (command + (common.format == "csv" ? ".csv" : ".json"));
    }
    if (target.empty()) {
      std::cout << text;
    } else {
      write_atomic(target, text);
    }
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  sub->add_option("--out", c.out, "Output file (default: stdout, or $OUTPUT_DIR/<command>.<ext>)");
}

SignalGeometry geometry_from(const std::string& alpha) { return SignalGeometry(parse_angle(alpha)); }

FamilyTag parse_family(const std::string& s) {
  if (s == "SetE") return FamilyTag::SetE;
  if (s == "SetH") return FamilyTag::SetH;
  if (s == "SetPhiNeg") return FamilyTag::SetPhiNeg;
  throw UsageError("unknown family '" + s + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entangling-probe attack toolkit for four-state QKD"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QKDPROBE_VERSION);

  std::string alpha = "pi/8";
  std::string lambda_s, mu_s, theta_s, phi_s;
  double error_rate = 0.0;
  std::int64_t n = 10000, errors = 0, m = 400000;
  double p_fail = 0.01, q_leak = 0.0, nu = 0.0, g_margin = 0.0, tolerance = 1e-6;
  double e_min = 0.0;
  std::optional<double> e_max, penalty;
  int steps = 50, resolution = 40, restarts = 50;
  std::uint64_t seed = 0;
  bool no_clamp = false, four_state = false;
  std::string family, reference = "optimal", q_model = "zero", variable = "E", values;
  double q_f = 1.0;
  Common common;

  auto angles = [&](CLI::App* s, bool with_mu) {
    s->add_option("--lambda", lambda_s, "Probe angle lambda (radians or e.g. 0.3pi)");
    if (with_mu) s->add_option("--mu", mu_s, "Probe angle mu");
    s->add_option("--theta", theta_s, "Probe angle theta");
    s->add_option("--phi", phi_s, "Probe angle phi");
  };
  auto alpha_opt = [&](CLI::App* s) {
    s->add_option("--alpha", alpha, "Basis half-angle alpha in (0, pi/4)")->capture_default_str();
  };

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate E, Q and I at one probe setting");
  alpha_opt(evaluate_cmd);
  angles(evaluate_cmd, true);
  add_common(evaluate_cmd, common);

  auto* optimal_cmd = app.add_subcommand("optimal", "Optimum overlap, information and families");
  alpha_opt(optimal_cmd);
  optimal_cmd->add_option("--error-rate", error_rate, "Error rate E")->required();
  add_common(optimal_cmd, common);

  auto* verify_cmd = app.add_subcommand("verify", "Brute-force check of the optimum at fixed E");
  alpha_opt(verify_cmd);
  verify_cmd->add_option("--error-rate", error_rate, "Error rate E")->required();
  verify_cmd->add_option("--resolution", resolution, "Grid points per angle")->capture_default_str();
  verify_cmd->add_option("--restarts", restarts, "Random local-search restarts")->capture_default_str();
  verify_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  verify_cmd->add_option("--tolerance", tolerance, "Violation tolerance")->capture_default_str();
  verify_cmd->add_option("--reference", reference, "Reference curve")
      ->check(CLI::IsMember({"optimal", "csc", "sec"}))
      ->capture_default_str();
  verify_cmd->add_option("--penalty", penalty, "Also run the penalty scan with this weight");
  add_common(verify_cmd, common);

  auto* capacity_cmd = app.add_subcommand("capacity", "Asymptotic secrecy capacity curve");
  alpha_opt(capacity_cmd);
  capacity_cmd->add_option("--e-min", e_min, "First error rate")->capture_default_str();
  capacity_cmd->add_option("--e-max", e_max, "Last error rate (default: admissible maximum)");
  capacity_cmd->add_option("--steps", steps, "Number of points")->capture_default_str();
  add_common(capacity_cmd, common);

  auto* frontier_cmd = app.add_subcommand("frontier", "Defense frontier and compression level");
  alpha_opt(frontier_cmd);
  frontier_cmd->add_option("--n", n, "Sifted bits")->capture_default_str();
  frontier_cmd->add_option("--errors", errors, "Observed errors e_T")->capture_default_str();
  frontier_cmd->add_option("--p-fail", p_fail, "Defense probability p")->capture_default_str();
  frontier_cmd->add_option("--q-leak", q_leak, "Error-correction leakage bits")->capture_default_str();
  frontier_cmd->add_option("--nu", nu, "Multi-photon leakage bits")->capture_default_str();
  frontier_cmd->add_option("--g", g_margin, "Safety margin bits")->capture_default_str();
  frontier_cmd->add_flag("--no-clamp", no_clamp, "Skip inadmissible terms instead of clamping");
  add_common(frontier_cmd, common);

  auto simulate_opts = [&](CLI::App* s) {
    alpha_opt(s);
    angles(s, true);
    s->add_option("--m", m, "Raw transmitted bits")->capture_default_str();
    s->add_option("--family", family, "Optimum family attack (SetE, SetH, SetPhiNeg)");
    s->add_option("--error-rate", error_rate, "Target E of the family attack");
    s->add_option("--p-fail", p_fail, "Defense probability p")->capture_default_str();
    s->add_option("--q-model", q_model, "Leakage model")
        ->check(CLI::IsMember({"zero", "entropy"}))
        ->capture_default_str();
    s->add_option("--q-f", q_f, "Efficiency factor of the entropy leakage model")
        ->capture_default_str();
    s->add_option("--nu", nu, "Multi-photon leakage bits")->capture_default_str();
    s->add_option("--g", g_margin, "Safety margin bits")->capture_default_str();
    s->add_option("--seed", seed, "Master seed")->capture_default_str();
    s->add_flag("--four-state", four_state, "Sample sent states and the detection matrix");
    add_common(s, common);
  };
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo run of the protocol");
  simulate_opts(simulate_cmd);

  auto* possibilities_cmd =
      app.add_subcommand("possibilities", "Classify the twelve stationarity cases");
  alpha_opt(possibilities_cmd);
  possibilities_cmd->add_option("--error-rate", error_rate, "Error rate E")->required();
  add_common(possibilities_cmd, common);

  auto* sweep_cmd = app.add_subcommand("sweep", "Simulation sweep over E or alpha");
  simulate_opts(sweep_cmd);
  sweep_cmd->add_option("--variable", variable, "Swept variable")
      ->check(CLI::IsMember({"E", "alpha"}))
      ->capture_default_str();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Runner r;
    r.common = common;
    CLI::App* sub = app.get_subcommands().front();
    r.command = sub->get_name();
    r.inputs["format"] = common.format;

    if (r.command == "evaluate") {
      const auto g = geometry_from(alpha);
      if (lambda_s.empty() || mu_s.empty() || theta_s.empty() || phi_s.empty()) {
        throw UsageError("evaluate needs --lambda, --mu, --theta and --phi");
      }
      const ProbeParams p{parse_angle(lambda_s), parse_angle(mu_s), parse_angle(theta_s),
                          parse_angle(phi_s)};
      require_in_domain(p);
      r.inputs["alpha"] = io::angle(g.alpha());
      r.inputs["params"] = io::to_json(p);
      const auto k = coefficients(p);
      const auto probs = detection_probabilities(k, g);
      const auto ev = evaluate(p, g);
      json res = io::to_json(ev);
      res["coefficients"] = io::to_json(k);
      res["q"] = q_value(k);
      res["probabilities"] = io::to_json(probs);
      res["E_from_probabilities"] = qkdprobe::error_rate(probs);
      res["geometry"] = io::to_json(g);
      std::string csv = "alpha,lambda,mu,theta,phi,a,b,c,d,E,Q,I\n";
      for (double v : {g.alpha(), p.lambda, p.mu, p.theta, p.phi, k.a, k.b, k.c, k.d,
                       ev.error_rate, ev.overlap}) {
        csv += io::num(v) + ",";
      }
      csv += io::num(ev.renyi_info) + "\n";
      r.emit(res, csv);
      return 0;
    }

    if (r.command == "optimal") {
      const auto g = geometry_from(alpha);
      r.inputs["alpha"] = io::angle(g.alpha());
      r.inputs["E"] = error_rate;
      const auto o = optimal_overlap(error_rate, g);
      json res = io::to_json(o);
      res["E_max"] = max_error_rate(g);
      res["csc_formula"] = csc_branch_overlap(error_rate, g);
      res["sec_formula"] = sec_branch_overlap(error_rate, g);
      json fams = json::array();
      for (const auto& f : optimal_parameter_families(error_rate, g)) {
        json fj = io::to_json(f);
        FreeChoices free;
        free.lambda = f.tag == FamilyTag::SetPhiNeg ? pi / 2.0 : 0.0;
        try {
          const auto s = sample_params(f, error_rate, g, free);
          fj["example_params"] = io::to_json(s.params);
          fj["frame_alpha"] = io::angle(s.frame.alpha());
        } catch (const Error& e) {
          r.warnings.push_back(std::string(to_string(f.tag)) + ": " + e.what());
        }
        fams.push_back(fj);
      }
      res["families"] = fams;
      const std::string csv = "alpha,E,Q_opt,I_opt,branch\n" + io::num(g.alpha()) + "," +
                              io::num(error_rate) + "," + io::num(o.overlap) + "," +
                              io::num(o.renyi_bits) + "," + std::string(to_string(o.branch)) +
                              "\n";
      r.emit(res, csv);
      return 0;
    }

    if (r.command == "verify") {
      SearchConfig cfg{geometry_from(alpha), error_rate};
      cfg.grid_resolution = resolution;
      cfg.random_restarts = restarts;
      cfg.seed = seed;
      cfg.tolerance = tolerance;
      cfg.reference = reference == "csc"   ? ReferenceCurve::CscFormula
                      : reference == "sec" ? ReferenceCurve::SecFormula
                                           : ReferenceCurve::Optimal;
      cfg.record_samples = common.format == "csv";
      r.inputs["alpha"] = io::angle(cfg.geom.alpha());
      r.inputs["E"] = error_rate;
      r.inputs["resolution"] = resolution;
      r.inputs["restarts"] = restarts;
      r.inputs["seed"] = seed;
      r.inputs["tolerance"] = tolerance;
      r.inputs["reference"] = reference;
      if (penalty) r.inputs["penalty"] = *penalty;
      const auto rep = constrained_scan(cfg);
      json res = io::to_json(rep);
      long long violations = rep.violations;
      std::string csv = io::samples_csv(rep.samples);
      if (penalty) {
        const auto pen = penalty_scan(cfg, *penalty);
        res["penalty_scan"] = io::to_json(pen);
        violations += pen.violations;
        csv += io::samples_csv(pen.samples).substr(std::string("lambda,theta,phi,mu,E,Q\n").size());
      }
      if (violations > 0) {
        r.warnings.push_back(std::to_string(violations) + " sampled points fall below the reference");
      }
      r.emit(res, csv);
      return violations > 0 ? 1 : 0;
    }

    if (r.command == "capacity") {
      const auto g = geometry_from(alpha);
      const double hi = e_max.value_or(std::min(max_error_rate(g), 0.49));
      r.inputs["alpha"] = io::angle(g.alpha());
      r.inputs["e_min"] = e_min;
      r.inputs["e_max"] = hi;
      r.inputs["steps"] = steps;
      const auto pts = capacity_curve(g, e_min, hi, steps);
      json arr = json::array();
      for (const auto& pt : pts) {
        json j = io::to_json(pt);
        const auto o = optimal_overlap(pt.error_rate, g);
        j["Q_opt"] = o.overlap;
        j["I_opt"] = o.renyi_bits;
        arr.push_back(j);
      }
      r.emit(json{{"points", arr}}, io::capacity_csv(g, pts));
      return 0;
    }

    if (r.command == "frontier") {
      const auto g = geometry_from(alpha);
      DistillationConfig c;
      c.n = n;
      c.e_T = errors;
      c.p = p_fail;
      c.q_leak = q_leak;
      c.nu = nu;
      c.g = g_margin;
      c.clamp = !no_clamp;
      r.inputs["alpha"] = io::angle(g.alpha());
      r.inputs["n"] = n;
      r.inputs["e_T"] = errors;
      r.inputs["p"] = p_fail;
      r.inputs["q_leak"] = q_leak;
      r.inputs["nu"] = nu;
      r.inputs["g"] = g_margin;
      r.inputs["clamp"] = c.clamp;
      const auto f = defense_frontier(c, g);
      const auto s = compression_bits(f.t_F, c);
      if (f.clamped > 0) {
        r.warnings.push_back(std::to_string(f.clamped) +
                             " terms had e/n + xi beyond the admissible error rate and were "
                             "charged the maximal Renyi information");
      }
      json res = io::to_json(f);
      res["s"] = s;
      r.emit(res, io::frontier_csv({{n, errors, p_fail, f, s}}));
      return 0;
    }

    auto sim_config = [&]() {
      sim::SimulationConfig c;
      c.m = m;
      c.geom = geometry_from(alpha);
      c.p = p_fail;
      c.nu = nu;
      c.g = g_margin;
      c.seed = seed;
      c.sampling = four_state ? sim::ErrorSampling::FourState : sim::ErrorSampling::Scalar;
      if (q_model == "entropy") {
        c.q_model.kind = QModel::Kind::BinaryEntropy;
        c.q_model.f = q_f;
      }
      r.inputs["alpha"] = io::angle(c.geom.alpha());
      r.inputs["m"] = m;
      r.inputs["p"] = p_fail;
      r.inputs["q_model"] = q_model;
      if (q_model == "entropy") r.inputs["q_f"] = q_f;
      r.inputs["nu"] = nu;
      r.inputs["g"] = g_margin;
      r.inputs["seed"] = seed;
      r.inputs["four_state"] = four_state;
      if (!family.empty()) {
        sim::FamilyAttack fa;
        fa.family = parse_family(family);
        fa.target_E = error_rate;
        if (!lambda_s.empty()) fa.free.lambda = parse_angle(lambda_s);
        if (!mu_s.empty()) fa.free.mu = parse_angle(mu_s);
        if (!theta_s.empty()) fa.free.theta = parse_angle(theta_s);
        if (!phi_s.empty()) fa.free.phi = parse_angle(phi_s);
        c.attack = fa;
        r.inputs["family"] = family;
        r.inputs["E"] = error_rate;
        r.inputs["free"] = io::to_json(ProbeParams{fa.free.lambda, fa.free.mu, fa.free.theta,
                                                   fa.free.phi});
      } else {
        if (lambda_s.empty() || mu_s.empty() || theta_s.empty() || phi_s.empty()) {
          throw UsageError("give --family with --error-rate, or all four probe angles");
        }
        const ProbeParams p{parse_angle(lambda_s), parse_angle(mu_s), parse_angle(theta_s),
                            parse_angle(phi_s)};
        c.attack = p;
        r.inputs["params"] = io::to_json(p);
      }
      return c;
    };

    if (r.command == "simulate") {
      const auto c = sim_config();
      const auto rep = sim::run(c);
      if (rep.clamped > 0) {
        r.warnings.push_back(std::to_string(rep.clamped) + " frontier terms were clamped");
      }
      std::string csv =
          "m,n,e_T,s,final_key_len,empirical_E,empirical_rate,analytic_E,analytic_capacity\n" +
          std::to_string(rep.m) + "," + std::to_string(rep.n) + "," + std::to_string(rep.e_T) +
          "," + std::to_string(rep.s) + "," + std::to_string(rep.final_key_len) + "," +
          io::num(rep.empirical_E) + "," + io::num(rep.empirical_rate) + "," +
          io::num(rep.analytic_E) + "," +
          (rep.analytic_capacity ? io::num(*rep.analytic_capacity) : std::string()) + "\n";
      r.emit(io::to_json(rep), csv);
      return 0;
    }

    if (r.command == "possibilities") {
      const auto g = geometry_from(alpha);
      r.inputs["alpha"] = io::angle(g.alpha());
      r.inputs["E"] = error_rate;
      json reports = json::array();
      std::string csv = "label,status,achieved_Q,detail\n";
      for (const auto& rep : enumerate_possibilities(error_rate, g)) {
        reports.push_back(io::to_json(rep));
        std::string detail = rep.detail;
        for (auto& ch : detail)
          if (ch == '"') ch = '\'';
        csv += std::string(1, rep.label) + "," + std::string(to_string(rep.status)) + "," +
               (rep.achieved_Q ? io::num(*rep.achieved_Q) : std::string()) + ",\"" + detail +
               "\"\n";
      }
      json res{{"reports", reports},
               {"possibility_d_grid", io::to_json(possibility_d_feasibility(g, default_d_grid()))}};
      r.emit(res, csv);
      return 0;
    }

    if (r.command == "sweep") {
      if (variable == "E" && family.empty()) {
        throw UsageError("an E sweep needs --family");
      }
      auto c = sim_config();
      std::vector<double> vals;
      for (const auto& v : split_list(values)) {
        vals.push_back(variable == "alpha" ? parse_angle(v) : parse_number(v, v));
      }
      if (vals.empty()) throw UsageError("--values is empty");
      r.inputs["variable"] = variable;
      r.inputs["values"] = vals;
      const auto rows = sim::sweep(
          c, variable == "alpha" ? sim::SweepVariable::Alpha : sim::SweepVariable::ErrorRate, vals);
      json arr = json::array();
      for (const auto& row : rows) {
        json j = io::to_json(row.report);
        j["value"] = row.value;
        arr.push_back(j);
      }
      r.emit(json{{"rows", arr}}, io::sweep_csv(variable, rows));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
