#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "extrusim/linearization.hpp"
#include "extrusim/lyapunov.hpp"
#include "extrusim/model.hpp"
#include "extrusim/profile.hpp"
#include "extrusim/solver.hpp"

// Scenario files (strict key = value text), the built-in "paper-sec4" preset,
// the simulation pipeline, and CSV / metadata emission.

namespace extrusim {

class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

// 17 significant digits, enough to round-trip a double exactly.
inline std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct OutputsConfig {
  std::string dir = "out";
  std::vector<double> probes = {0.0, 0.5, 1.0};
};

struct Scenario {
  PhysicalParams params{};
  double f_pe = 0.0;
  double N_e = 0.0;
  std::optional<double> l_e;  // full equilibrium tuple when present

  bool synthesize = false;
  GainStrategy strategy = GainStrategy::PaperLimit;
  Gains gains{0.0, 0.0};

  double l0 = 0.0;
  Profile profile;

  SolverConfig solver;
  bool lyap_auto = true;
  LyapunovConfig lyap_explicit{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

  OutputsConfig outputs;
  double compat_tolerance = 1e-6;

  std::string serialize() const;
  std::uint64_t content_hash() const;
};

namespace detail {

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "params.L",        "params.B",          "params.K_d",
      "params.zeta",     "params.eta",        "params.rho0",
      "params.S_eff",    "params.V_eff",      "setpoint.f_pe",
      "setpoint.N_e",    "setpoint.l_e",      "gains.k1",
      "gains.k2",        "gains.synthesize",  "initial.l0",
      "initial.profile", "solver.M",          "solver.rel_tol",
      "solver.abs_tol",  "solver.dt_init",    "solver.dt_max",
      "solver.cfl_safety", "solver.t_end",    "solver.fixed_step",
      "solver.interface_extrap", "lyapunov.mode", "lyapunov.gamma1",
      "lyapunov.gamma2", "lyapunov.gamma3",   "lyapunov.A1",
      "lyapunov.A2",     "lyapunov.A3",       "outputs.dir",
      "outputs.stride",  "outputs.probes",    "compat.tolerance"};
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ScenarioError("scenario: value of '" + key + "' is not a number: '" +
                        v + "'");
  }
}

inline std::vector<double> parse_doubles(const std::string& key,
                                         const std::string& v) {
  std::istringstream in(v);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(parse_double(key, tok));
  return out;
}

using KeyMap = std::map<std::string, std::string>;

inline KeyMap parse_keyfile_text(const std::string& text,
                                 const std::string& origin) {
  KeyMap map;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ScenarioError(origin + ":" + std::to_string(lineno) +
                          ": expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (!known_keys().count(key))
      throw ScenarioError(origin + ":" + std::to_string(lineno) +
                          ": unknown key '" + key + "'");
    if (map.count(key))
      throw ScenarioError(origin + ":" + std::to_string(lineno) +
                          ": duplicate key '" + key + "'");
    map[key] = val;
  }
  return map;
}

inline KeyMap paper_sec4_keys() {
  // Reference configuration for the published closed-loop experiment; the
  // screw-speed setpoint is deliberately absent and must be supplied.
  KeyMap m;
  m["params.L"] = "2.0";
  m["params.B"] = "2.4e-6";
  m["params.K_d"] = "2.4e-3";
  m["params.zeta"] = "0.003";
  m["params.eta"] = "125.0";
  m["params.rho0"] = "350.0";
  m["params.S_eff"] = "0.014";
  m["setpoint.f_pe"] = "0.6";
  m["gains.k1"] = "0.01";
  m["gains.k2"] = "0.0001";
  m["initial.l0"] = "1.5";
  m["initial.profile"] = "coeffs 0.6905 0.025 0.0117";
  m["solver.M"] = "128";
  m["solver.t_end"] = "3000.0";
  m["outputs.stride"] = "5.0";
  return m;
}

inline Scenario build_scenario(const KeyMap& map) {
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = map.find(key);
    if (it == map.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& key) {
    const auto v = get(key);
    if (!v) throw ScenarioError("scenario: missing required key '" + key + "'");
    return *v;
  };
  auto num = [&](const std::string& key) {
    return parse_double(key, require(key));
  };
  auto num_or = [&](const std::string& key, double fallback) {
    const auto v = get(key);
    return v ? parse_double(key, *v) : fallback;
  };

  Scenario s;
  s.params = PhysicalParams::create(
      num("params.L"), num("params.B"), num("params.K_d"), num("params.zeta"),
      num("params.eta"), num("params.rho0"), num("params.S_eff"),
      num_or("params.V_eff", -1.0));

  s.f_pe = num("setpoint.f_pe");
  if (!(s.f_pe > 0.0) || !(s.f_pe < 1.0))
    throw ScenarioError("scenario: setpoint.f_pe must lie in (0, 1)");
  if (!get("setpoint.N_e"))
    throw ScenarioError("scenario: setpoint.N_e required (the screw-speed "
                        "setpoint is a free parameter, no default exists)");
  s.N_e = num("setpoint.N_e");
  if (!(s.N_e > 0.0))
    throw ScenarioError("scenario: setpoint.N_e must be positive");
  if (get("setpoint.l_e")) s.l_e = num("setpoint.l_e");

  const bool has_k = get("gains.k1").has_value() || get("gains.k2").has_value();
  const auto synth = get("gains.synthesize");
  if (has_k == synth.has_value())
    throw ScenarioError("scenario: provide either gains.k1/gains.k2 or "
                        "gains.synthesize, not both");
  if (synth) {
    s.synthesize = true;
    if (*synth == "paper-limit")
      s.strategy = GainStrategy::PaperLimit;
    else if (*synth == "margin-max")
      s.strategy = GainStrategy::MarginMax;
    else
      throw ScenarioError("scenario: gains.synthesize must be 'paper-limit' "
                          "or 'margin-max'");
  } else {
    s.gains = Gains{num("gains.k1"), num("gains.k2")};
  }

  s.l0 = num("initial.l0");
  if (!(s.l0 > 0.0) || !(s.l0 < s.params.L))
    throw ScenarioError("scenario: initial.l0 outside (0, L)");
  {
    const std::string spec = require("initial.profile");
    std::istringstream in(spec);
    std::string kind;
    in >> kind;
    if (kind == "preset") {
      std::string name;
      in >> name;
      if (name != "paper-sec4")
        throw ScenarioError("scenario: unknown profile preset '" + name + "'");
      s.profile = Profile::coeffs(0.6905, 0.025, 0.0117);
    } else if (kind == "coeffs") {
      double a, b, c;
      if (!(in >> a >> b >> c))
        throw ScenarioError("scenario: initial.profile coeffs needs 3 values");
      s.profile = Profile::coeffs(a, b, c);
    } else if (kind == "table") {
      std::vector<double> vals;
      double v;
      while (in >> v) vals.push_back(v);
      if (vals.size() < 2)
        throw ScenarioError("scenario: initial.profile table needs >= 2 values");
      s.profile = Profile::tabulated(std::move(vals));
    } else {
      throw ScenarioError("scenario: initial.profile must start with "
                          "'preset', 'coeffs' or 'table'");
    }
  }

  s.solver.M = static_cast<int>(num_or("solver.M", 128));
  s.solver.rel_tol = num_or("solver.rel_tol", 1e-6);
  s.solver.abs_tol = num_or("solver.abs_tol", 1e-9);
  s.solver.dt_init = num_or("solver.dt_init", 1e-3);
  s.solver.dt_max = num_or("solver.dt_max", 10.0);
  s.solver.cfl_safety = num_or("solver.cfl_safety", 0.9);
  s.solver.t_end = num_or("solver.t_end", 3000.0);
  s.solver.output_stride = num_or("outputs.stride", 5.0);
  s.solver.fixed_step = num_or("solver.fixed_step", 0.0) != 0.0;
  const double extrap = num_or("solver.interface_extrap", 2.0);
  if (extrap != 1.0 && extrap != 2.0)
    throw ScenarioError("scenario: solver.interface_extrap must be 1 or 2");
  s.solver.first_order_extrap = extrap == 1.0;
  s.solver.validate();

  const std::string lmode = get("lyapunov.mode").value_or("auto");
  if (lmode == "auto") {
    s.lyap_auto = true;
  } else if (lmode == "explicit") {
    s.lyap_auto = false;
    s.lyap_explicit =
        LyapunovConfig{num("lyapunov.gamma1"), num("lyapunov.gamma2"),
                       num("lyapunov.gamma3"), num("lyapunov.A1"),
                       num("lyapunov.A2"),     num("lyapunov.A3")};
  } else {
    throw ScenarioError("scenario: lyapunov.mode must be 'auto' or 'explicit'");
  }

  if (get("outputs.dir")) s.outputs.dir = *get("outputs.dir");
  if (get("outputs.probes")) {
    s.outputs.probes = parse_doubles("outputs.probes", *get("outputs.probes"));
    for (double x : s.outputs.probes)
      if (x < 0.0 || x > 1.0)
        throw ScenarioError("scenario: outputs.probes must lie in [0, 1]");
    if (s.outputs.probes.empty())
      throw ScenarioError("scenario: outputs.probes is empty");
  }
  s.compat_tolerance = num_or("compat.tolerance", 1e-6);
  return s;
}

}  // namespace detail

// Loads a scenario from a file, or from the built-in preset when path is
// "paper-sec4". Overrides are "key=value" strings applied after parsing.
inline Scenario load_scenario(const std::string& path,
                              const std::vector<std::string>& overrides = {}) {
  detail::KeyMap map;
  if (path == "paper-sec4") {
    map = detail::paper_sec4_keys();
  } else {
    std::ifstream in(path);
    if (!in) throw ScenarioError("scenario: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    map = detail::parse_keyfile_text(buf.str(), path);
  }
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos)
      throw ScenarioError("scenario: override '" + ov + "' is not key=value");
    const std::string key = detail::trim(ov.substr(0, eq));
    if (!detail::known_keys().count(key))
      throw ScenarioError("scenario: unknown override key '" + key + "'");
    map[key] = detail::trim(ov.substr(eq + 1));
  }
  return detail::build_scenario(map);
}

inline std::string Scenario::serialize() const {
  std::ostringstream out;
  out << "params.L = " << g17(params.L) << "\n";
  out << "params.B = " << g17(params.B) << "\n";
  out << "params.K_d = " << g17(params.K_d) << "\n";
  out << "params.zeta = " << g17(params.zeta) << "\n";
  out << "params.eta = " << g17(params.eta) << "\n";
  out << "params.rho0 = " << g17(params.rho0) << "\n";
  out << "params.S_eff = " << g17(params.S_eff) << "\n";
  out << "params.V_eff = " << g17(params.V_eff) << "\n";
  out << "setpoint.f_pe = " << g17(f_pe) << "\n";
  out << "setpoint.N_e = " << g17(N_e) << "\n";
  if (l_e) out << "setpoint.l_e = " << g17(*l_e) << "\n";
  if (synthesize) {
    out << "gains.synthesize = "
        << (strategy == GainStrategy::PaperLimit ? "paper-limit" : "margin-max")
        << "\n";
  } else {
    out << "gains.k1 = " << g17(gains.k1) << "\n";
    out << "gains.k2 = " << g17(gains.k2) << "\n";
  }
  out << "initial.l0 = " << g17(l0) << "\n";
  out << "initial.profile = ";
  if (profile.kind == Profile::Kind::Coeffs) {
    out << "coeffs " << g17(profile.a) << " " << g17(profile.b) << " "
        << g17(profile.c) << "\n";
  } else {
    out << "table";
    for (double v : profile.table) out << " " << g17(v);
    out << "\n";
  }
  out << "solver.M = " << solver.M << "\n";
  out << "solver.rel_tol = " << g17(solver.rel_tol) << "\n";
  out << "solver.abs_tol = " << g17(solver.abs_tol) << "\n";
  out << "solver.dt_init = " << g17(solver.dt_init) << "\n";
  out << "solver.dt_max = " << g17(solver.dt_max) << "\n";
  out << "solver.cfl_safety = " << g17(solver.cfl_safety) << "\n";
  out << "solver.t_end = " << g17(solver.t_end) << "\n";
  out << "solver.fixed_step = " << (solver.fixed_step ? 1 : 0) << "\n";
  out << "solver.interface_extrap = " << (solver.first_order_extrap ? 1 : 2)
      << "\n";
  if (lyap_auto) {
    out << "lyapunov.mode = auto\n";
  } else {
    out << "lyapunov.mode = explicit\n";
    out << "lyapunov.gamma1 = " << g17(lyap_explicit.gamma1) << "\n";
    out << "lyapunov.gamma2 = " << g17(lyap_explicit.gamma2) << "\n";
    out << "lyapunov.gamma3 = " << g17(lyap_explicit.gamma3) << "\n";
    out << "lyapunov.A1 = " << g17(lyap_explicit.A1) << "\n";
    out << "lyapunov.A2 = " << g17(lyap_explicit.A2) << "\n";
    out << "lyapunov.A3 = " << g17(lyap_explicit.A3) << "\n";
  }
  out << "outputs.dir = " << outputs.dir << "\n";
  out << "outputs.stride = " << g17(solver.output_stride) << "\n";
  out << "outputs.probes =";
  for (double x : outputs.probes) out << " " << g17(x);
  out << "\n";
  out << "compat.tolerance = " << g17(compat_tolerance) << "\n";
  return out.str();
}

inline std::uint64_t Scenario::content_hash() const {
  // FNV-1a over the canonical serialization.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : serialize()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct RunResult {
  Equilibrium eq{};
  LinearizationConstants lc{};
  ThetaConstants th{};
  Gains gains{};
  GainCheck gain_check{};
  CompatibilityReport compat{};
  LyapunovConfig lycfg{};
  bool lyap_selected = false;
  bool combo_sized = false;
  Trajectory traj;
  DecayFit fit{};
  std::vector<std::size_t> monotonicity_violations;
  bool converged = false;
  double h2_initial = 0.0;
  double h2_final = 0.0;
};

inline RunResult run_scenario(const Scenario& scn, bool fixed_step = false,
                              bool strict_compat = false) {
  RunResult r;
  r.eq = scn.l_e ? Equilibrium::create(scn.params, *scn.l_e, scn.f_pe, scn.N_e)
                 : equilibrium_from_fill(scn.params, scn.f_pe, scn.N_e);
  r.lc = linearize(scn.params, r.eq);
  r.gains = scn.synthesize
                ? synthesize_gains(r.lc, r.eq, scn.params, scn.strategy)
                : scn.gains;
  r.th = theta_constants(r.lc, r.eq, scn.params, r.gains);
  r.gain_check = check_gain_conditions(r.lc, r.eq, scn.params, r.gains);
  r.compat = check_compatibility(scn.params, r.eq, r.gains, scn.l0, scn.profile,
                                 scn.compat_tolerance);
  if (strict_compat && (!r.compat.c1_pass || !r.compat.c2_pass))
    throw ScenarioError(
        "run: initial data violates the compatibility conditions (c1 = " +
        g17(r.compat.c1_residual) + ", c2 = " + g17(r.compat.c2_residual) +
        ", tolerance = " + g17(r.compat.tolerance) + ")");

  if (!scn.lyap_auto) {
    r.lycfg = scn.lyap_explicit;
  } else if (r.gain_check.pass) {
    r.lycfg = select_constants(r.lc, r.th, r.eq);
    r.lyap_selected = true;
  } else {
    r.lycfg = LyapunovConfig{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
  }

  SolverConfig cfg = scn.solver;
  cfg.fixed_step = cfg.fixed_step || fixed_step;
  r.traj = simulate(cfg, scn.params, r.eq, r.gains, r.lycfg, scn.l0,
                    scn.profile);

  const std::size_t n = r.traj.samples.size();
  std::vector<double> t(n), V0(n), V1(n), V2(n), V3(n), Lc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = r.traj.samples[i];
    t[i] = s.t;
    V0[i] = s.reading.V0;
    V1[i] = s.reading.V1;
    V2[i] = s.reading.V2;
    V3[i] = s.reading.V3;
  }
  if (scn.lyap_auto && r.lyap_selected && n >= 12 &&
      r.traj.status == Termination::Completed) {
    r.combo_sized = size_combination(r.lycfg, V0, V1, V2, V3);
    for (auto& s : r.traj.samples)
      s.reading.Lcomposite = composite(r.lycfg, s.reading.V0, s.reading.V1,
                                       s.reading.V2, s.reading.V3);
  }
  for (std::size_t i = 0; i < n; ++i) Lc[i] = r.traj.samples[i].reading.Lcomposite;

  if (n >= 2) {
    r.fit = fit_decay(t, Lc, 0.1);
    const auto skip = static_cast<std::size_t>(0.1 * n);
    if (n - skip >= 2) {
      const std::vector<double> tail(Lc.begin() + skip, Lc.end());
      for (std::size_t i : monotonicity_report(tail, 1e-8, 1e-14))
        r.monotonicity_violations.push_back(i + skip);
    }
    r.h2_initial = r.traj.samples.front().reading.h2_err;
    r.h2_final = r.traj.samples.back().reading.h2_err;
    r.converged = r.traj.status == Termination::Completed &&
                  std::abs(r.traj.samples.back().l - r.eq.l_e) <
                      0.01 * r.eq.l_e;
  }
  return r;
}

// Linear interpolation between cell centers, one-sided extrapolation at the
// domain ends.
inline double probe_value(const std::vector<double>& f, double x) {
  const auto M = static_cast<int>(f.size());
  const double dx = 1.0 / M;
  const double pos = x / dx - 0.5;  // index coordinate over cell centers
  const int j = std::clamp(static_cast<int>(std::floor(pos)), 0, M - 2);
  const double w = pos - j;
  return (1.0 - w) * f[j] + w * f[j + 1];
}

inline std::string csv_header(const std::vector<double>& probes) {
  std::ostringstream out;
  out << "t,l,N,F_in,dP";
  for (double x : probes) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    out << ",f_at_probe_" << buf;
  }
  out << ",V0,V1,V2,V3,Lcomposite,h2_err,dt_used";
  return out.str();
}

inline std::string trajectory_csv(const Trajectory& traj,
                                  const std::vector<double>& probes) {
  std::ostringstream out;
  out << csv_header(probes) << "\n";
  for (const auto& s : traj.samples) {
    out << g17(s.t) << "," << g17(s.l) << "," << g17(s.act.N) << ","
        << g17(s.act.F_in) << "," << g17(s.act.dP);
    for (double x : probes) out << "," << g17(probe_value(s.f, x));
    out << "," << g17(s.reading.V0) << "," << g17(s.reading.V1) << ","
        << g17(s.reading.V2) << "," << g17(s.reading.V3) << ","
        << g17(s.reading.Lcomposite) << "," << g17(s.reading.h2_err) << ","
        << g17(s.dt_used) << "\n";
  }
  return out.str();
}

inline std::string run_metadata(const Scenario& scn, const RunResult& r) {
  std::ostringstream out;
  char hash[20];
  std::snprintf(hash, sizeof hash, "%016llx",
                static_cast<unsigned long long>(scn.content_hash()));
  out << "scenario_hash = " << hash << "\n";
  out << "equilibrium.l_e = " << g17(r.eq.l_e) << "\n";
  out << "equilibrium.f_pe = " << g17(r.eq.f_pe) << "\n";
  out << "equilibrium.N_e = " << g17(r.eq.N_e) << "\n";
  out << "equilibrium.dP_e = " << g17(r.eq.dP_e) << "\n";
  out << "equilibrium.alpha_pe = " << g17(r.eq.alpha_pe) << "\n";
  out << "equilibrium.F_ine = " << g17(r.eq.F_ine) << "\n";
  out << "linearization.a1 = " << g17(r.lc.a1) << "\n";
  out << "linearization.a2 = " << g17(r.lc.a2) << "\n";
  out << "linearization.a3 = " << g17(r.lc.a3) << "\n";
  out << "linearization.b1 = " << g17(r.lc.b1) << "\n";
  out << "linearization.b2 = " << g17(r.lc.b2) << "\n";
  out << "theta0 = " << g17(r.th.theta0) << "\n";
  out << "theta1 = " << g17(r.th.theta1) << "\n";
  out << "gains.k1 = " << g17(r.gains.k1) << "\n";
  out << "gains.k2 = " << g17(r.gains.k2) << "\n";
  out << "gain_conditions.pass = " << (r.gain_check.pass ? 1 : 0) << "\n";
  out << "gain_conditions.margin_damping = " << g17(r.gain_check.margin_damping)
      << "\n";
  out << "gain_conditions.margin_boundary = "
      << g17(r.gain_check.margin_boundary) << "\n";
  out << "compatibility.c1_residual = " << g17(r.compat.c1_residual) << "\n";
  out << "compatibility.c2_residual = " << g17(r.compat.c2_residual) << "\n";
  out << "compatibility.c2_residual_alt = " << g17(r.compat.c2_residual_alt)
      << "\n";
  out << "lyapunov.gamma1 = " << g17(r.lycfg.gamma1) << "\n";
  out << "lyapunov.gamma2 = " << g17(r.lycfg.gamma2) << "\n";
  out << "lyapunov.gamma3 = " << g17(r.lycfg.gamma3) << "\n";
  out << "lyapunov.A1 = " << g17(r.lycfg.A1) << "\n";
  out << "lyapunov.A2 = " << g17(r.lycfg.A2) << "\n";
  out << "lyapunov.A3 = " << g17(r.lycfg.A3) << "\n";
  out << "lyapunov.auto_selected = " << (r.lyap_selected ? 1 : 0) << "\n";
  out << "lyapunov.combination_sized = " << (r.combo_sized ? 1 : 0) << "\n";
  out << "run.status = "
      << (r.traj.status == Termination::Completed ? "completed" : "fault")
      << "\n";
  if (r.traj.status == Termination::Fault) {
    out << "run.fault_reason = " << r.traj.fault_reason << "\n";
    out << "run.fault_time = " << g17(r.traj.fault_time) << "\n";
  }
  out << "run.outflow_flagged = " << (r.traj.outflow_flagged ? 1 : 0) << "\n";
  out << "run.converged = " << (r.converged ? 1 : 0) << "\n";
  out << "run.h2_initial = " << g17(r.h2_initial) << "\n";
  out << "run.h2_final = " << g17(r.h2_final) << "\n";
  out << "decay.omega = " << g17(r.fit.omega) << "\n";
  out << "decay.Mconst = " << g17(r.fit.Mconst) << "\n";
  out << "decay.r2 = " << g17(r.fit.r2) << "\n";
  out << "decay.valid = " << (r.fit.valid ? 1 : 0) << "\n";
  out << "monotonicity.violations = " << r.monotonicity_violations.size()
      << "\n";
  out << "# scenario (reload with --scenario to reproduce)\n";
  out << scn.serialize();
  return out.str();
}

}  // namespace extrusim
