#pragma once

// System files (JSON), orbit tables and report serialization.
//
// A system file is one JSON document, either explicit
//   {"dim": 3, "conserved": ["x^2+y^2-1"], "dissipated": ["z"], "rates": ["-1"],
//    "nu": "...", "base_field": ["y", "-x", "0"], "manifold": "...",
//    "orbit": {"builtin": "harmonic"} | {"builtin": "euler", "I1": 3, ...}
//           | {"csv": "table.csv", "period": 6.28}}
// or a builtin shortcut
//   {"builtin": "euler:energyI", "rate": "-1", "params": {"I1": 3, ...}}

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dissipative/builtin.hpp"
#include "dissipative/errors.hpp"
#include "dissipative/floquet.hpp"
#include "dissipative/orbit.hpp"
#include "dissipative/system.hpp"

namespace dissipative {

using Json = nlohmann::ordered_json;

/// %.17g
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct LoadedSystem {
  std::string name;
  DissipativeSystem system;
  PeriodicOrbit orbit;
  Json orbit_ref;  // orbit description as written back by save_system
};

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("file", "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// CSV with header t,x1..xn; '#' lines and blank lines are skipped.
inline PeriodicOrbit read_orbit_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  std::vector<double> times;
  std::vector<Point> states;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(s);
    while (std::getline(ls, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return cells;
  };
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    auto cells = split(line);
    if (header.empty()) {
      header = cells;
      if (header.size() < 2 || header[0] != "t") {
        throw InputError("orbit_table", "orbit table header must be t,x1,...,xn");
      }
      for (std::size_t i = 1; i < header.size(); ++i) {
        if (header[i] != "x" + std::to_string(i)) {
          throw InputError("orbit_table", "orbit table header must be t,x1,...,xn");
        }
      }
      continue;
    }
    if (cells.size() != header.size()) {
      throw InputError("orbit_table", "orbit table line " + std::to_string(line_no) +
                                          " has " + std::to_string(cells.size()) + " cells");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != c.size() || c.empty() || !std::isfinite(v)) {
        throw InputError("orbit_table",
                         "bad number '" + c + "' on orbit table line " + std::to_string(line_no));
      }
      row.push_back(v);
    }
    times.push_back(row[0]);
    states.emplace_back(row.begin() + 1, row.end());
  }
  if (header.empty()) throw InputError("orbit_table", "orbit table is empty");
  return PeriodicOrbit::sampled(std::move(times), std::move(states));
}

inline PeriodicOrbit read_orbit_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("file", "cannot open orbit table '" + path.string() + "'");
  return read_orbit_csv(in);
}

inline void write_orbit_csv(std::ostream& out, const PeriodicOrbit& orbit, int rows) {
  out << "t";
  for (int i = 1; i <= orbit.dimension(); ++i) out << ",x" << i;
  out << "\n";
  for (int j = 0; j < rows; ++j) {
    const double t = orbit.period() * j / (rows - 1);
    out << format_double(t);
    for (double v : orbit.raw(t)) out << "," << format_double(v);
    out << "\n";
  }
}

namespace detail {

inline const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError("schema", std::string("missing key '") + key + "'");
  return j.at(key);
}

inline std::vector<ScalarField> parse_list(const Json& j, const char* key, int n) {
  std::vector<ScalarField> out;
  if (!j.contains(key)) return out;
  const Json& arr = j.at(key);
  if (!arr.is_array()) throw InputError("schema", std::string("'") + key + "' must be an array");
  for (const auto& e : arr) {
    if (!e.is_string()) {
      throw InputError("schema", std::string("'") + key + "' entries must be strings");
    }
    out.push_back(ScalarField::parse(e.get<std::string>(), n));
  }
  return out;
}

inline double number(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InputError("schema", std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

inline EulerParams euler_params(const Json& j) {
  EulerParams p;
  p.I1 = number(j, "I1", p.I1);
  p.I2 = number(j, "I2", p.I2);
  p.I3 = number(j, "I3", p.I3);
  p.h = number(j, "h", p.h);
  p.c = number(j, "c", p.c);
  return p;
}

inline Json euler_json(const EulerParams& p) {
  return Json{{"builtin", "euler"}, {"I1", p.I1}, {"I2", p.I2},
              {"I3", p.I3},         {"h", p.h},   {"c", p.c}};
}

inline PeriodicOrbit load_orbit(const Json& o, const std::filesystem::path& base_dir,
                                Json& ref) {
  if (!o.is_object()) throw InputError("schema", "'orbit' must be an object");
  if (o.contains("builtin")) {
    const std::string b = o.at("builtin").get<std::string>();
    if (b == "harmonic") {
      ref = Json{{"builtin", "harmonic"}};
      return harmonic_orbit();
    }
    if (b == "euler") {
      const EulerParams p = euler_params(o);
      ref = euler_json(p);
      return euler_orbit(p);
    }
    throw InputError("builtin", "unknown builtin orbit '" + b + "'");
  }
  if (o.contains("csv")) {
    std::filesystem::path p = o.at("csv").get<std::string>();
    if (p.is_relative()) p = base_dir / p;
    PeriodicOrbit orbit = read_orbit_csv(p);
    if (o.contains("period")) {
      const double T = number(o, "period", 0.0);
      if (std::abs(T - orbit.period()) > 1e-9 * std::max(1.0, std::abs(T))) {
        throw InputError("orbit_table", "declared period " + format_double(T) +
                                            " differs from the table's final time " +
                                            format_double(orbit.period()));
      }
    }
    ref = Json{{"csv", std::filesystem::absolute(p).lexically_normal().string()},
               {"period", orbit.period()}};
    return orbit;
  }
  throw InputError("schema", "'orbit' needs 'builtin' or 'csv'");
}

}  // namespace detail

/// Builds a system from a parsed document. Relative CSV paths resolve
/// against base_dir.
inline LoadedSystem load_system(const Json& doc, const std::filesystem::path& base_dir = ".") {
  if (!doc.is_object()) throw InputError("schema", "system file must be a JSON object");
  if (doc.contains("builtin")) {
    const std::string name = doc.at("builtin").get<std::string>();
    const std::string rate = doc.contains("rate") ? doc.at("rate").get<std::string>() : "-1";
    const EulerParams p =
        doc.contains("params") ? detail::euler_params(doc.at("params")) : EulerParams{};
    Scenario sc = builtin_scenario(name, ScalarField::parse(rate, 3), p);
    Json ref = name.rfind("euler", 0) == 0 ? detail::euler_json(p) : Json{{"builtin", "harmonic"}};
    return {sc.name, sc.system, sc.orbit, ref};
  }
  const Json& dimj = detail::require(doc, "dim");
  if (!dimj.is_number_integer()) throw InputError("schema", "'dim' must be an integer");
  const int n = dimj.get<int>();
  if (n < 2 || n > kMaxExteriorDim) {
    throw InputError("dimension", "'dim' must lie in [2, " + std::to_string(kMaxExteriorDim) + "]");
  }
  auto conserved = detail::parse_list(doc, "conserved", n);
  auto dissipated = detail::parse_list(doc, "dissipated", n);
  auto rates = detail::parse_list(doc, "rates", n);
  std::optional<ScalarField> nu;
  if (doc.contains("nu")) nu = ScalarField::parse(doc.at("nu").get<std::string>(), n);
  std::optional<std::vector<ScalarField>> base;
  if (doc.contains("base_field")) base = detail::parse_list(doc, "base_field", n);
  const std::string manifold = doc.contains("manifold") ? doc.at("manifold").get<std::string>() : "";
  DissipativeSystem sys(n, std::move(conserved), std::move(dissipated), std::move(rates), nu,
                        base, manifold);
  Json ref;
  PeriodicOrbit orbit = detail::load_orbit(detail::require(doc, "orbit"), base_dir, ref);
  if (orbit.dimension() != n) {
    throw InputError("dimension", "orbit dimension differs from 'dim'");
  }
  const std::string name = doc.contains("name") ? doc.at("name").get<std::string>() : "custom";
  return {name, std::move(sys), std::move(orbit), std::move(ref)};
}

/// Reads a system file; JSON syntax errors are InputError("json").
inline LoadedSystem load_system_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("json", std::string("invalid JSON in '") + path.string() + "': " + e.what());
  }
  return load_system(doc, path.parent_path().empty() ? std::filesystem::path(".")
                                                     : path.parent_path());
}

/// Explicit form of a system; loading it back gives the same fields.
inline Json system_to_json(const std::string& name, const DissipativeSystem& sys,
                           const Json& orbit_ref) {
  Json j;
  j["name"] = name;
  j["dim"] = sys.dimension();
  auto list = [](const std::vector<ScalarField>& fs) {
    Json a = Json::array();
    for (const auto& f : fs) a.push_back(f.source());
    return a;
  };
  j["conserved"] = list(sys.conserved());
  j["dissipated"] = list(sys.dissipated());
  j["rates"] = list(sys.rates());
  if (sys.rescale()) j["nu"] = sys.rescale()->source();
  if (sys.base_field()) j["base_field"] = list(*sys.base_field());
  j["manifold"] = sys.manifold_label();
  j["orbit"] = orbit_ref;
  return j;
}

inline Json complex_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

inline Json complex_list(const std::vector<Complex>& zs) {
  Json a = Json::array();
  for (const auto& z : zs) a.push_back(complex_json(z));
  return a;
}

inline Json periodicity_json(const PeriodicityReport& r) {
  return Json{{"closure", r.closure},
              {"max_residual", r.max_residual},
              {"worst_time", r.worst_time},
              {"tolerance", r.tolerance},
              {"pass", r.pass()}};
}

inline Json regularity_json(const RegularityReport& r) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return Json{{"max_membership", r.max_membership},
              {"min_independence", finite_or_null(r.min_independence)},
              {"min_regular_value", finite_or_null(r.min_regular_value)},
              {"min_conserved_regular", finite_or_null(r.min_conserved_regular)},
              {"worst_independence_time", r.worst_independence_time},
              {"conserved_regular", r.conserved_regular_ok},
              {"pass", r.pass()}};
}

inline Json verdict_json(const StabilityVerdict& v) {
  Json j{{"outcome", to_string(v.outcome)}, {"manifold", v.manifold}, {"reason", v.reason}};
  if (v.outcome == StabilityOutcome::unstable) {
    j["witness"] = Json{{"index", v.witness_index}, {"integral", v.witness_integral}};
  } else if (v.outcome == StabilityOutcome::stable_on_manifold) {
    j["witness"] = Json{{"negative_integrals", v.negative_integrals}};
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline Json multiplier_report_json(const std::string& name, const MultiplierReport& r,
                                   const StabilityVerdict& v) {
  Json j;
  j["system"] = name;
  j["dimension"] = r.dimension;
  j["conserved"] = r.conserved;
  j["dissipated"] = r.dissipated;
  j["period"] = r.period;
  j["integrals"] = r.integrals;
  j["integral_errors"] = r.integral_errors;
  j["analytic"] = complex_list(r.analytic);
  j["numeric"] = complex_list(r.numeric);
  j["reduced"] = complex_list(r.reduced);
  Json pairs = Json::array();
  for (const auto& p : r.pairing) {
    pairs.push_back(Json{{"analytic", complex_json(p.analytic)},
                         {"numeric", complex_json(p.numeric)},
                         {"gap", p.gap}});
  }
  j["pairing"] = pairs;
  j["max_pairing_gap"] = r.max_pairing_gap;
  j["unit_cluster"] = r.unit_cluster;
  if (r.liouville) {
    j["liouville"] = Json{{"determinant", r.liouville->determinant},
                          {"expected", r.liouville->expected},
                          {"relative_error", r.liouville->relative_error}};
  } else {
    j["liouville"] = nullptr;
  }
  j["periodicity"] = periodicity_json(r.periodicity);
  j["regularity"] = regularity_json(r.regularity);
  j["verdict"] = verdict_json(v);
  return j;
}

/// One row per analytic multiplier, with its paired numeric value when present.
inline void write_multiplier_csv(std::ostream& out, const MultiplierReport& r) {
  out << "index,analytic_re,analytic_im,numeric_re,numeric_im,gap\n";
  if (!r.pairing.empty()) {
    for (std::size_t i = 0; i < r.pairing.size(); ++i) {
      const auto& p = r.pairing[i];
      out << i + 1 << "," << format_double(p.analytic.real()) << ","
          << format_double(p.analytic.imag()) << "," << format_double(p.numeric.real()) << ","
          << format_double(p.numeric.imag()) << "," << format_double(p.gap) << "\n";
    }
    return;
  }
  for (std::size_t i = 0; i < r.analytic.size(); ++i) {
    out << i + 1 << "," << format_double(r.analytic[i].real()) << ","
        << format_double(r.analytic[i].imag()) << ",,,\n";
  }
}

/// t, x1..xn[, dist_to_orbit]
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj,
                                 const PeriodicOrbit* orbit) {
  const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (std::size_t i = 1; i <= n; ++i) out << ",x" << i;
  if (orbit) out << ",dist_to_orbit";
  out << "\n";
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    out << format_double(traj.times[r]);
    for (double v : traj.states[r]) out << "," << format_double(v);
    if (orbit) out << "," << format_double(distance_to_orbit(traj.states[r], *orbit));
    out << "\n";
  }
}

}  // namespace dissipative
