#pragma once

// Command-line driver: verify | multipliers | stabilize | simulate.
// Exit codes: 0 success, 1 failed mathematical check, 2 input error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dissipative/builtin.hpp"
#include "dissipative/errors.hpp"
#include "dissipative/floquet.hpp"
#include "dissipative/io.hpp"
#include "dissipative/orbit.hpp"
#include "dissipative/system.hpp"

namespace dissipative::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

struct CommonOptions {
  std::string system;  // file path or builtin name
  std::string rate = "-1";
  std::vector<std::string> params;
  int samples = 256;
  int panels = 512;
  double orbit_tol = 1e-7;
  std::optional<double> tol_rel;
  std::optional<double> tol_abs;
  unsigned long long seed = 1;
  std::string out;
  std::string csv;
};

struct VerifyOutcome {
  Json report;
  std::vector<std::string> reasons;
};

/// Thrown for input problems discovered by the driver itself.
inline InputError usage(const std::string& what) { return InputError("usage", what); }

inline EulerParams parse_params(const std::vector<std::string>& kvs) {
  EulerParams p;
  std::map<std::string, double*> slots{
      {"I1", &p.I1}, {"I2", &p.I2}, {"I3", &p.I3}, {"h", &p.h}, {"c", &p.c}};
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw usage("--param expects key=value, got '" + kv + "'");
    const auto key = kv.substr(0, eq);
    auto it = slots.find(key);
    if (it == slots.end()) throw usage("unknown parameter '" + key + "'");
    try {
      std::size_t used = 0;
      *it->second = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
    } catch (const std::exception&) {
      throw usage("bad value in --param '" + kv + "'");
    }
  }
  return p;
}

inline LoadedSystem load(const CommonOptions& o) {
  const auto& names = builtin_names();
  if (std::find(names.begin(), names.end(), o.system) != names.end()) {
    if (!o.params.empty() && o.system.rfind("euler", 0) != 0) {
      throw usage("--param applies to the euler builtins only");
    }
    const EulerParams p = parse_params(o.params);
    Json doc{{"builtin", o.system}, {"rate", o.rate}, {"params", detail::euler_json(p)}};
    return load_system(doc);
  }
  if (!o.params.empty()) throw usage("--param applies to builtin names only");
  return load_system_file(o.system);
}

inline OdeTolerances tolerances(const CommonOptions& o, OdeTolerances base) {
  if (o.tol_rel) base.relative = *o.tol_rel;
  if (o.tol_abs) base.absolute = *o.tol_abs;
  if (!(base.relative > 0.0) || !(base.absolute > 0.0)) {
    throw usage("tolerances must be positive");
  }
  return base;
}

/// Lie-derivative residuals at the orbit samples and at seeded random
/// points near the orbit; singular points are skipped.
inline Json lie_check(const LoadedSystem& ls, const CommonOptions& o, bool& pass) {
  const VectorField field = as_vector_field(ls.system);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> offset(-0.1, 0.1);
  const int n = ls.system.dimension();
  double worst = 0.0;
  double worst_ratio = 0.0;
  int points = 0, skipped = 0;
  for (int j = 0; j < 2 * o.samples; ++j) {
    Point x = ls.orbit.evaluate(ls.orbit.period() * (j / 2) / o.samples);
    if (j % 2 == 1) {
      for (int i = 0; i < n; ++i) x[i] += offset(rng);
    }
    try {
      const auto r = lie_residuals(field, ls.system, x);
      const auto f = field(x);
      double scale = 1.0;
      for (const auto& c : ls.system.conserved()) scale += norm(f) * norm(c.gradient(x));
      for (int i = 0; i < ls.system.dissipated_count(); ++i) {
        const auto& d = ls.system.dissipated()[i];
        scale += norm(f) * norm(d.gradient(x)) + std::abs(ls.system.rates()[i](x) * d(x));
      }
      for (double v : r) {
        worst = std::max(worst, std::abs(v));
        worst_ratio = std::max(worst_ratio, std::abs(v) / scale);
      }
      ++points;
    } catch (const SingularPoint&) {
      ++skipped;
    } catch (const DomainError&) {
      ++skipped;
    }
  }
  constexpr double tol = 1e-9;
  pass = points > 0 && worst_ratio <= tol;
  return Json{{"max_residual", worst}, {"max_scaled_residual", worst_ratio}, {"tolerance", tol},
              {"points", points},      {"skipped", skipped},                 {"pass", pass}};
}

inline VerifyOutcome verify(const LoadedSystem& ls, const CommonOptions& o) {
  VerifyOutcome v;
  const VectorField field = as_vector_field(ls.system);
  PeriodicityReport per;
  try {
    per = verify_periodicity(ls.orbit, field, std::max(o.samples, 8), o.orbit_tol);
  } catch (const SingularPoint&) {
    per.closure = distance(ls.orbit.raw(ls.orbit.period()), ls.orbit.raw(0.0));
    per.closure_ok = per.closure <= o.orbit_tol;
    per.max_residual = std::numeric_limits<double>::infinity();
    per.tolerance = o.orbit_tol;
  }
  if (!per.closure_ok) v.reasons.emplace_back("closure");
  if (!per.residual_ok) v.reasons.emplace_back("ode_residual");
  const RegularityReport reg = regularity_report(ls.system, ls.orbit, std::max(o.samples, 2));
  for (const auto& f : reg.failures()) v.reasons.push_back(f);
  bool lie_ok = false;
  Json lie = lie_check(ls, o, lie_ok);
  if (!lie_ok) v.reasons.emplace_back("lie_residual");

  Json per_json = periodicity_json(per);
  if (!std::isfinite(per.max_residual)) per_json["max_residual"] = nullptr;
  v.report["command"] = "verify";
  v.report["system"] = ls.name;
  v.report["status"] = v.reasons.empty() ? "ok" : "failed";
  v.report["reasons"] = v.reasons;
  v.report["periodicity"] = per_json;
  v.report["regularity"] = regularity_json(reg);
  v.report["lie"] = lie;
  return v;
}

inline void emit(const Json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("file", "cannot write '" + path + "'");
  f << text;
}

template <typename Writer>
void emit_text(const std::string& path, std::ostream& out, Writer w) {
  if (path.empty() || path == "-") {
    w(out);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("file", "cannot write '" + path + "'");
  w(f);
}

inline Json failure_json(const std::string& command, const std::string& name,
                         const std::vector<std::string>& reasons, const std::string& message) {
  return Json{{"command", command}, {"system", name},       {"status", "failed"},
              {"reasons", reasons}, {"message", message}};
}

/// Runs the multiplier pipeline on a loaded system and writes the reports.
inline int multipliers(const LoadedSystem& ls, const CommonOptions& o, bool numeric,
                       const std::string& command, std::ostream& out) {
  const VerifyOutcome v = verify(ls, o);
  if (!v.reasons.empty()) {
    Json r = v.report;
    r["command"] = command;
    emit(r, o.out, out);
    return kExitCheckFailed;
  }
  MultiplierOptions mo;
  mo.panels = o.panels;
  mo.numeric = numeric;
  mo.samples = std::max(o.samples, 8);
  mo.periodicity_tolerance = o.orbit_tol;
  mo.monodromy.ode = tolerances(o, mo.monodromy.ode);
  MultiplierReport rep;
  try {
    rep = analytic_multipliers(ls.system, ls.orbit, mo);
  } catch (const HypothesisError& e) {
    emit(failure_json(command, ls.name, {e.reason()}, e.what()), o.out, out);
    return kExitCheckFailed;
  }
  const StabilityVerdict verdict = classify(rep);
  Json j;
  j["command"] = command;
  j["status"] = "ok";
  const Json body = multiplier_report_json(ls.name, rep, verdict);
  for (const auto& [k, val] : body.items()) j[k] = val;
  j["lie"] = v.report["lie"];
  emit(j, o.out, out);
  if (!o.csv.empty()) {
    emit_text(o.csv, out, [&](std::ostream& s) { write_multiplier_csv(s, rep); });
  }
  return kExitOk;
}

inline std::vector<double> parse_point(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t", used) != std::string::npos) {
        throw std::invalid_argument(cell);
      }
    } catch (const std::exception&) {
      throw usage("bad coordinate '" + cell + "' in --x0");
    }
  }
  return v;
}

inline void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("system", o.system, "system file (JSON) or builtin name")->required();
  sub->add_option("--rate", o.rate, "rate expression for builtin names");
  sub->add_option("--param", o.params, "Euler parameter key=value (I1, I2, I3, h, c)");
  sub->add_option("--samples", o.samples, "orbit samples for the checks")
      ->check(CLI::Range(8, 1000000));
  sub->add_option("--panels", o.panels, "Simpson panels for rate integrals")
      ->check(CLI::Range(16, 100000000));
  sub->add_option("--orbit-tol", o.orbit_tol, "periodicity tolerance");
  sub->add_option("--tol-rel", o.tol_rel, "relative ODE tolerance");
  sub->add_option("--tol-abs", o.tol_abs, "absolute ODE tolerance");
  sub->add_option("--seed", o.seed, "seed for randomized sampling");
  sub->add_option("--out", o.out, "output path (default stdout)");
}

/// Runs the driver on argv-style arguments (args[0] is the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Floquet multipliers and stabilization of codimension-one dissipative systems",
               "dissipative_cli"};
  app.require_subcommand(1);
  CommonOptions o;

  auto* verify_cmd = app.add_subcommand("verify", "check the orbit and system hypotheses");
  add_common(verify_cmd, o);

  bool numeric = true;
  auto* mult_cmd = app.add_subcommand("multipliers", "characteristic multipliers and verdict");
  add_common(mult_cmd, o);
  mult_cmd->add_flag("--numeric,!--no-numeric", numeric, "attach monodromy spectra");
  mult_cmd->add_option("--csv", o.csv, "CSV summary path");

  std::string rate_kind = "stabilizing";
  std::string psi = "0";
  double c = 1.0;
  std::string report_path;
  auto* stab_cmd = app.add_subcommand("stabilize", "perturb with templated rates");
  add_common(stab_cmd, o);
  stab_cmd->add_option("--rate-kind", rate_kind, "stabilizing | destabilizing")
      ->check(CLI::IsMember({"stabilizing", "destabilizing"}));
  stab_cmd->add_option("--psi", psi, "template function psi");
  stab_cmd->add_option("--c", c, "template constant c > 0");
  stab_cmd->add_option("--report", report_path, "report path (default stdout)");
  stab_cmd->add_flag("--numeric,!--no-numeric", numeric, "attach monodromy spectra");
  stab_cmd->add_option("--csv", o.csv, "CSV summary path");

  std::string x0_text;
  double t_end = 0.0;
  double dt = 0.0;
  std::string observe = "dist";
  auto* sim_cmd = app.add_subcommand("simulate", "integrate a trajectory");
  add_common(sim_cmd, o);
  sim_cmd->add_option("--x0", x0_text, "initial state, comma separated")->required();
  sim_cmd->add_option("--t-end", t_end, "final time")->required();
  sim_cmd->add_option("--dt", dt, "output interval (default t_end/1000)");
  sim_cmd->add_option("--observe", observe, "dist | none")
      ->check(CLI::IsMember({"dist", "none"}));

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  std::string command = app.get_subcommands().front()->get_name();
  std::string name = o.system;
  try {
    if (command == "verify") {
      const LoadedSystem ls = load(o);
      name = ls.name;
      const VerifyOutcome v = verify(ls, o);
      emit(v.report, o.out, out);
      return v.reasons.empty() ? kExitOk : kExitCheckFailed;
    }
    if (command == "multipliers") {
      const LoadedSystem ls = load(o);
      name = ls.name;
      return multipliers(ls, o, numeric, command, out);
    }
    if (command == "stabilize") {
      const LoadedSystem ls = load(o);
      name = ls.name;
      if (!ls.system.perturbation_mode()) {
        throw InputError("base_field", "stabilize needs a system with a base field");
      }
      if (o.out.empty()) throw usage("stabilize needs --out for the augmented system file");
      const RateKind kind =
          rate_kind == "stabilizing" ? RateKind::stabilizing : RateKind::destabilizing;
      const ScalarField tmpl =
          rate_template(kind, ScalarField::parse(psi, ls.system.dimension()), c);
      std::vector<ScalarField> rates(ls.system.dissipated_count(), tmpl);
      const DissipativeSystem stabilized = ls.system.with_rates(rates);
      emit(system_to_json(ls.name, stabilized, ls.orbit_ref), o.out, out);
      const LoadedSystem reloaded = load_system_file(o.out);
      CommonOptions ro = o;
      ro.out = report_path;
      return multipliers(reloaded, ro, numeric, command, out);
    }
    // simulate
    const LoadedSystem ls = load(o);
    name = ls.name;
    const Point x0 = parse_point(x0_text);
    if (static_cast<int>(x0.size()) != ls.system.dimension()) {
      throw InputError("x0", "--x0 has " + std::to_string(x0.size()) + " coordinates, expected " +
                                 std::to_string(ls.system.dimension()));
    }
    if (!(t_end > 0.0)) throw InputError("t_end", "--t-end must be positive");
    if (dt <= 0.0) dt = t_end / 1000.0;
    std::vector<double> times;
    const auto count = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));
    for (std::size_t i = 0; i <= count; ++i) times.push_back(std::min(dt * i, t_end));
    if (times.back() < t_end) times.push_back(t_end);
    const OdeTolerances tol = tolerances(o, OdeTolerances{});
    try {
      const Trajectory traj = simulate(as_vector_field(ls.system), x0, t_end, tol, times);
      emit_text(o.out, out, [&](std::ostream& s) {
        write_trajectory_csv(s, traj, observe == "dist" ? &ls.orbit : nullptr);
      });
    } catch (const IntegrationError& e) {
      Json j = failure_json(command, name, {"integration"}, e.what());
      j["last_time"] = e.last_time();
      err << j.dump(2) << "\n";
      return kExitCheckFailed;
    } catch (const SingularPoint& e) {
      err << failure_json(command, name, {"singular_point"}, e.what()).dump(2) << "\n";
      return kExitCheckFailed;
    }
    return kExitOk;
  } catch (const InputError& e) {
    Json j{{"command", command}, {"system", name}, {"status", "error"},
           {"reason", e.reason()},  {"message", e.what()}};
    err << j.dump(2) << "\n";
    return kExitInputError;
  } catch (const ParseError& e) {
    Json j{{"command", command}, {"system", name}, {"status", "error"},
           {"reason", "parse"},     {"message", e.what()}, {"offset", e.offset()}};
    err << j.dump(2) << "\n";
    return kExitInputError;
  } catch (const nlohmann::json::exception& e) {
    Json j{{"command", command}, {"system", name}, {"status", "error"},
           {"reason", "schema"},    {"message", e.what()}};
    err << j.dump(2) << "\n";
    return kExitInputError;
  } catch (const DimensionError& e) {
    Json j{{"command", command}, {"system", name}, {"status", "error"},
           {"reason", "dimension"}, {"message", e.what()}};
    err << j.dump(2) << "\n";
    return kExitInputError;
  } catch (const Error& e) {
    Json j{{"command", command}, {"system", name}, {"status", "failed"},
           {"reasons", {"numerical"}}, {"message", e.what()}};
    err << j.dump(2) << "\n";
    return kExitCheckFailed;
  }
}

}  // namespace dissipative::cli
