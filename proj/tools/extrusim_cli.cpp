// Command-line front end: equilibrium / linearization reports, gain checks
// and synthesis, closed-loop simulation with CSV + metadata output, decay-rate
// fitting, and batch sweeps.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "extrusim/linearization.hpp"
#include "extrusim/lyapunov.hpp"
#include "extrusim/model.hpp"
#include "extrusim/scenario.hpp"
#include "extrusim/solver.hpp"

namespace fs = std::filesystem;
using namespace extrusim;

namespace {

struct GlobalOpts {
  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool fixed_step = false;
  bool strict_compat = false;
  double Ne = -1.0;
  std::vector<std::string> sets;
};

Scenario load(const GlobalOpts& opt) {
  std::vector<std::string> overrides = opt.sets;
  if (opt.Ne > 0.0)
    overrides.push_back("setpoint.N_e=" + g17(opt.Ne));
  if (!opt.out_dir.empty()) overrides.push_back("outputs.dir=" + opt.out_dir);
  return load_scenario(opt.scenario_path, overrides);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ScenarioError("cannot write '" + path.string() + "'");
  out << content;
}

int cmd_equilibrium(const GlobalOpts& opt) {
  const Scenario scn = load(opt);
  const Equilibrium eq =
      scn.l_e ? Equilibrium::create(scn.params, *scn.l_e, scn.f_pe, scn.N_e)
              : equilibrium_from_fill(scn.params, scn.f_pe, scn.N_e);
  std::cout << "l_e = " << g17(eq.l_e) << "\n"
            << "f_pe = " << g17(eq.f_pe) << "\n"
            << "N_e = " << g17(eq.N_e) << "\n"
            << "dP_e = " << g17(eq.dP_e) << "\n"
            << "alpha_pe = " << g17(eq.alpha_pe) << "\n"
            << "F_ine = " << g17(eq.F_ine) << "\n";
  return 0;
}

int cmd_linearize(const GlobalOpts& opt) {
  const Scenario scn = load(opt);
  const Equilibrium eq = equilibrium_from_fill(scn.params, scn.f_pe, scn.N_e);
  const LinearizationConstants lc = linearize(scn.params, eq);
  const LinearizationConstants fd = linearize_fd(scn.params, eq);
  std::cout << "a1 = " << g17(lc.a1) << "  (fd " << g17(fd.a1) << ")\n"
            << "a2 = " << g17(lc.a2) << "  (fd " << g17(fd.a2) << ")\n"
            << "a3 = " << g17(lc.a3) << "  (fd " << g17(fd.a3) << ")\n"
            << "b1 = " << g17(lc.b1) << "  (fd " << g17(fd.b1) << ")\n"
            << "b2 = " << g17(lc.b2) << "  (fd " << g17(fd.b2) << ")\n";
  return 0;
}

int cmd_check_gains(const GlobalOpts& opt) {
  const Scenario scn = load(opt);
  const Equilibrium eq = equilibrium_from_fill(scn.params, scn.f_pe, scn.N_e);
  const LinearizationConstants lc = linearize(scn.params, eq);
  if (scn.synthesize) {
    std::cerr << "check-gains: scenario requests synthesis; provide explicit "
                 "gains.k1/gains.k2\n";
    return 1;
  }
  const GainCheck c = check_gain_conditions(lc, eq, scn.params, scn.gains);
  std::cout << "theta0 = " << g17(c.theta0) << "\n"
            << "boundary_term = " << g17(c.boundary_term) << "\n"
            << "margin_damping = " << g17(c.margin_damping) << "\n"
            << "margin_boundary = " << g17(c.margin_boundary) << "\n"
            << "pass = " << (c.pass ? 1 : 0) << "\n";
  return c.pass ? 0 : 2;
}

int cmd_synthesize(const GlobalOpts& opt, const std::string& strategy) {
  const Scenario scn = load(opt);
  const Equilibrium eq = equilibrium_from_fill(scn.params, scn.f_pe, scn.N_e);
  const LinearizationConstants lc = linearize(scn.params, eq);
  GainStrategy strat = scn.strategy;
  if (strategy == "paper-limit") strat = GainStrategy::PaperLimit;
  else if (strategy == "margin-max") strat = GainStrategy::MarginMax;
  else if (!strategy.empty()) {
    std::cerr << "synthesize-gains: unknown strategy '" << strategy << "'\n";
    return 1;
  }
  try {
    const Gains g = synthesize_gains(lc, eq, scn.params, strat);
    const GainCheck c = check_gain_conditions(lc, eq, scn.params, g);
    std::cout << "k1 = " << g17(g.k1) << "\n"
              << "k2 = " << g17(g.k2) << "\n"
              << "margin_boundary = " << g17(c.margin_boundary) << "\n";
    return 0;
  } catch (const ModelError& e) {
    std::cerr << "synthesize-gains: " << e.what() << "\n";
    return 2;
  }
}

int simulate_once(const Scenario& scn, const GlobalOpts& opt,
                  const fs::path& dir, bool quiet) {
  const RunResult r = run_scenario(scn, opt.fixed_step, opt.strict_compat);
  fs::create_directories(dir);
  write_file(dir / "trajectory.csv", trajectory_csv(r.traj, scn.outputs.probes));
  std::string meta = run_metadata(scn, r);
  meta += "seed = " + std::to_string(opt.seed) + "\n";
  write_file(dir / "metadata.txt", meta);
  write_file(dir / "scenario.resolved", scn.serialize());
  if (!quiet) {
    std::cout << "status: "
              << (r.traj.status == Termination::Completed ? "completed"
                                                          : "fault")
              << ", samples: " << r.traj.samples.size()
              << ", converged: " << (r.converged ? "yes" : "no")
              << ", omega: " << g17(r.fit.omega) << " (r2 " << g17(r.fit.r2)
              << ")\n"
              << "outputs: " << (dir / "trajectory.csv").string() << "\n";
  }
  return r.traj.status == Termination::Completed ? 0 : 2;
}

int cmd_simulate(const GlobalOpts& opt) {
  const Scenario scn = load(opt);
  return simulate_once(scn, opt, scn.outputs.dir, false);
}

int cmd_decay_fit(const GlobalOpts& opt, const std::string& csv_path,
                  double transient_skip) {
  std::ifstream in(csv_path);
  if (!in) {
    std::cerr << "decay-fit: cannot open '" << csv_path << "'\n";
    return 1;
  }
  std::string header;
  std::getline(in, header);
  std::vector<std::string> cols;
  {
    std::istringstream hs(header);
    std::string c;
    while (std::getline(hs, c, ',')) cols.push_back(c);
  }
  int t_col = -1, l_col = -1;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "t") t_col = static_cast<int>(i);
    if (cols[i] == "Lcomposite") l_col = static_cast<int>(i);
  }
  if (t_col < 0 || l_col < 0) {
    std::cerr << "decay-fit: CSV lacks t/Lcomposite columns\n";
    return 1;
  }
  std::vector<double> t, L;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int i = 0;
    double tv = 0, lv = 0;
    while (std::getline(ls, cell, ',')) {
      if (i == t_col) tv = std::stod(cell);
      if (i == l_col) lv = std::stod(cell);
      ++i;
    }
    t.push_back(tv);
    L.push_back(lv);
  }
  const DecayFit fit = fit_decay(t, L, transient_skip);
  std::cout << "omega = " << g17(fit.omega) << "\n"
            << "Mconst = " << g17(fit.Mconst) << "\n"
            << "r2 = " << g17(fit.r2) << "\n"
            << "window = [" << g17(fit.t_start) << ", " << g17(fit.t_end)
            << "]\n"
            << "samples = " << fit.samples_used << "\n"
            << "valid = " << (fit.valid ? 1 : 0) << "\n";
  return fit.valid ? 0 : 2;
}

int cmd_sweep(const GlobalOpts& opt, const std::string& key,
              const std::string& values_csv) {
  std::vector<std::string> values;
  {
    std::istringstream in(values_csv);
    std::string v;
    while (std::getline(in, v, ',')) values.push_back(v);
  }
  if (values.empty()) {
    std::cerr << "sweep: no values given\n";
    return 1;
  }
  std::vector<Scenario> scenarios;
  for (const auto& v : values) {
    GlobalOpts o = opt;
    o.sets.push_back(key + "=" + v);
    scenarios.push_back(load(o));
  }
  unsigned workers = std::thread::hardware_concurrency();
  if (const char* env = std::getenv("EXTRUDER_STAB_THREADS")) {
    const unsigned n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    if (n > 0) workers = n;
  }
  workers = std::min<unsigned>(workers, values.size());
  const fs::path base = scenarios.front().outputs.dir;
  std::atomic<std::size_t> next{0};
  std::atomic<int> worst{0};
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < scenarios.size();
         i = next.fetch_add(1)) {
      const fs::path dir = base / (key + "_" + values[i]);
      int rc = 1;
      try {
        rc = simulate_once(scenarios[i], opt, dir, true);
      } catch (const std::exception& e) {
        std::cerr << "sweep[" << values[i] << "]: " << e.what() << "\n";
      }
      int cur = worst.load();
      while (rc > cur && !worst.compare_exchange_weak(cur, rc)) {}
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  std::cout << "sweep: " << scenarios.size() << " runs under " << base.string()
            << "\n";
  return worst.load();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and control-synthesis toolkit for the bi-zone "
               "extrusion mass-balance model"};
  app.require_subcommand(1);

  GlobalOpts opt;
  app.add_option("--scenario", opt.scenario_path,
                 "Scenario file path or built-in preset name (paper-sec4)")
      ->required();
  app.add_option("--out", opt.out_dir, "Output directory override");
  app.add_option("--seed", opt.seed, "RNG seed (noise tests only)");
  app.add_flag("--fixed-step", opt.fixed_step,
               "Classical RK4 at solver.dt_init (reproducibility mode)");
  app.add_flag("--strict-compat", opt.strict_compat,
               "Abort when the compatibility residuals exceed tolerance");
  app.add_option("--Ne", opt.Ne, "Screw-speed setpoint override [rev/s]");
  app.add_option("--set", opt.sets, "Scenario override key=value (repeatable)");

  app.add_subcommand("equilibrium", "Resolve and print the equilibrium tuple");
  app.add_subcommand("linearize",
                     "Print linearization constants with the finite-difference "
                     "cross-check");
  app.add_subcommand("check-gains", "Evaluate the stabilizing-gain conditions");
  auto* synth =
      app.add_subcommand("synthesize-gains", "Search for stabilizing gains");
  std::string strategy;
  synth->add_option("--strategy", strategy, "paper-limit or margin-max");
  app.add_subcommand("simulate",
                     "Integrate the closed-loop system; write CSV + metadata");
  auto* fitcmd = app.add_subcommand("decay-fit",
                                    "Fit the exponential decay rate of a "
                                    "trajectory CSV");
  std::string csv_path;
  double transient_skip = 0.1;
  fitcmd->add_option("--csv", csv_path, "Trajectory CSV path")->required();
  fitcmd->add_option("--transient-skip", transient_skip,
                     "Initial fraction of samples to skip");
  auto* sweep = app.add_subcommand("sweep", "Batch simulations over one key");
  std::string sweep_key, sweep_values;
  sweep->add_option("--key", sweep_key, "Scenario key to vary")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("equilibrium")) return cmd_equilibrium(opt);
    if (app.got_subcommand("linearize")) return cmd_linearize(opt);
    if (app.got_subcommand("check-gains")) return cmd_check_gains(opt);
    if (app.got_subcommand("synthesize-gains"))
      return cmd_synthesize(opt, strategy);
    if (app.got_subcommand("simulate")) return cmd_simulate(opt);
    if (app.got_subcommand("decay-fit"))
      return cmd_decay_fit(opt, csv_path, transient_skip);
    if (app.got_subcommand("sweep")) return cmd_sweep(opt, sweep_key, sweep_values);
  } catch (const ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
