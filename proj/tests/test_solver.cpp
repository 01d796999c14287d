#include <doctest.h>

#include <cmath>
#include <numbers>

#include "extrusim/solver.hpp"
#include "test_helpers.hpp"

using namespace extrusim;
using extrusim::testing::kReferenceNe;
using extrusim::testing::reference_params;

namespace {

const LyapunovConfig kUnitLyap{1.0, 1.0, 1.0, 1.0, 1.0, 1.0};

std::vector<double> equilibrium_state(const Equilibrium& eq, int M) {
  std::vector<double> y(M + 1, eq.f_pe);
  y[0] = eq.l_e;
  return y;
}

}  // namespace

TEST_CASE("rhs vanishes at the discrete equilibrium") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const Gains g{0.01, 1e-4};
  const Grid grid(64);
  SolverConfig cfg;
  cfg.M = 64;
  const RhsEval r =
      eval_rhs(p, eq, g, grid, cfg, equilibrium_state(eq, 64), 0.0);
  CHECK(std::abs(r.dydt[0]) < 1e-10);
  for (int j = 1; j <= 64; ++j) CHECK(std::abs(r.dydt[j]) < 1e-10);
}

TEST_CASE("constant profile with matching inflow is transport invariant") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const Gains g{0.0, 0.0};  // open loop: inflow stays at F_ine / (rho0 V_eff N_e)
  const Grid grid(32);
  SolverConfig cfg;
  cfg.M = 32;
  // Spatially constant profile equal to the open-loop inflow value f_pe, but
  // off-equilibrium interface: l moves, f does not.
  std::vector<double> y(33, eq.f_pe);
  y[0] = 1.2;
  const RhsEval r = eval_rhs(p, eq, g, grid, cfg, y, 0.0);
  CHECK(std::abs(r.dydt[0]) > 1e-6);
  for (int j = 1; j <= 32; ++j) CHECK(std::abs(r.dydt[j]) < 1e-12);
}

TEST_CASE("rhs faults when the filling ratio leaves (0,1)") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const Grid grid(32);
  SolverConfig cfg;
  cfg.M = 32;
  std::vector<double> y(33, eq.f_pe);
  y[0] = eq.l_e;
  y[7] = 1.0 + 1e-5;
  CHECK_THROWS_AS(eval_rhs(p, eq, Gains{0, 0}, grid, cfg, y, 0.0),
                  SimulationFault);
}

TEST_CASE("frozen-coefficient upwind transport") {
  const double alpha = 0.01;
  auto g = [](double u) { return 0.65 + 0.05 * std::sin(2.0 * u + 0.4); };
  auto inflow = [&](double t) { return g(-alpha * t); };
  auto f0 = [&](double x) { return g(x); };
  const double t_end = 50.0;  // characteristics travel alpha * t = 0.5

  SUBCASE("convergence order near one against the exact solution") {
    std::vector<double> errors;
    for (int M : {64, 128, 256, 512}) {
      const std::vector<double> f = advect_frozen(M, alpha, inflow, f0, t_end);
      double e2 = 0.0;
      for (int j = 0; j < M; ++j) {
        const double x = (j + 0.5) / M;
        const double d = f[j] - g(x - alpha * t_end);
        e2 += d * d;
      }
      errors.push_back(std::sqrt(e2 / M));
    }
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
      const double order = std::log2(errors[i] / errors[i + 1]);
      CHECK(order > 0.8);
      CHECK(order < 1.2);
    }
  }

  SUBCASE("discrete maximum principle") {
    auto step_inflow = [](double) { return 0.6; };
    auto bump = [](double x) { return 0.6 + 0.3 * std::exp(-40.0 * (x - 0.5) * (x - 0.5)); };
    const std::vector<double> f =
        advect_frozen(128, alpha, step_inflow, bump, 80.0);
    for (double v : f) {
      CHECK(v >= 0.6 - 1e-9);
      CHECK(v <= 0.9 + 1e-9);
    }
  }
}

TEST_CASE("adaptive stepper") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const Gains g{0.01, 1e-4};
  const Grid grid(32);

  SUBCASE("equilibrium is a fixed point of the step") {
    SolverConfig cfg;
    cfg.M = 32;
    RKIntegrator integ(cfg, p, eq, g, grid);
    std::vector<double> y = equilibrium_state(eq, 32);
    double t = 0.0;
    for (int i = 0; i < 5; ++i) integ.step(t, y);
    CHECK(std::abs(y[0] - eq.l_e) < cfg.abs_tol);
    for (int j = 1; j <= 32; ++j) CHECK(std::abs(y[j] - eq.f_pe) < cfg.abs_tol);
  }

  SUBCASE("tighter tolerance lowers the accepted error estimate") {
    auto mean_err = [&](double rel_tol) {
      SolverConfig cfg;
      cfg.M = 32;
      cfg.rel_tol = rel_tol;
      cfg.abs_tol = 1e-12;
      cfg.t_end = 40.0;
      RKIntegrator integ(cfg, p, eq, g, grid);
      std::vector<double> y = equilibrium_state(eq, 32);
      y[0] = 1.5;  // off-equilibrium transient
      for (int j = 1; j <= 32; ++j) y[j] = eq.f_pe + 0.05;
      double t = 0.0, dt_sum = 0.0;
      int n = 0;
      while (t < 20.0) {
        const StepResult s = integ.step(t, y);
        dt_sum += s.dt_used;
        ++n;
      }
      return dt_sum / n;  // tighter tolerance forces smaller accepted steps
    };
    CHECK(mean_err(1e-8) < mean_err(1e-4));
  }

  SUBCASE("CFL bound respected") {
    SolverConfig cfg;
    cfg.M = 32;
    cfg.cfl_safety = 0.5;
    RKIntegrator integ(cfg, p, eq, g, grid);
    std::vector<double> y = equilibrium_state(eq, 32);
    y[0] = 1.5;
    double t = 0.0;
    for (int i = 0; i < 20; ++i) {
      const StepResult s = integ.step(t, y);
      const double cap =
          cfg.cfl_safety * grid.dx / integ.current_rhs().alpha_max;
      CHECK(s.dt_used <= cap * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("closed-loop simulation") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const Gains g{0.01, 1e-4};
  const Profile f0 = Profile::coeffs(0.6905, 0.025, 0.0117);

  SUBCASE("starting at the equilibrium stays there") {
    SolverConfig cfg;
    cfg.M = 32;
    cfg.t_end = 50.0;
    cfg.output_stride = 10.0;
    const Profile flat = Profile::coeffs(eq.f_pe, 0.0, 0.0);
    const Trajectory traj =
        simulate(cfg, p, eq, g, kUnitLyap, eq.l_e, flat);
    REQUIRE(traj.status == Termination::Completed);
    for (const auto& s : traj.samples) {
      CHECK(std::abs(s.l - eq.l_e) < 1e-8);
      CHECK(s.reading.h2_err < 1e-12);
    }
  }

  SUBCASE("published transient converges toward the setpoint") {
    SolverConfig cfg;
    cfg.M = 64;
    cfg.t_end = 600.0;
    cfg.output_stride = 5.0;
    const Trajectory traj = simulate(cfg, p, eq, g, kUnitLyap, 1.5, f0);
    REQUIRE(traj.status == Termination::Completed);
    CHECK(std::abs(traj.samples.back().l - eq.l_e) < 0.05 * eq.l_e);
    CHECK(traj.samples.back().reading.h2_err <
          0.5 * traj.samples.front().reading.h2_err);
    CHECK(traj.samples.front().t == 0.0);
    for (std::size_t i = 1; i < traj.samples.size(); ++i)
      CHECK(traj.samples[i].t > traj.samples[i - 1].t);
  }

  SUBCASE("interface agreement across grid resolutions") {
    auto terminal_l = [&](int M) {
      SolverConfig cfg;
      cfg.M = M;
      cfg.t_end = 300.0;
      cfg.output_stride = 50.0;
      const Trajectory traj = simulate(cfg, p, eq, g, kUnitLyap, 1.5, f0);
      REQUIRE(traj.status == Termination::Completed);
      return traj.samples.back().l;
    };
    const double l64 = terminal_l(64);
    const double l128 = terminal_l(128);
    CHECK(std::abs(l64 - l128) < 1e-2 * p.L);
  }

  SUBCASE("fixed-step runs are bitwise deterministic") {
    SolverConfig cfg;
    cfg.M = 32;
    cfg.t_end = 20.0;
    cfg.output_stride = 1.0;
    cfg.fixed_step = true;
    cfg.dt_init = 0.05;
    const Trajectory a = simulate(cfg, p, eq, g, kUnitLyap, 1.5, f0);
    const Trajectory b = simulate(cfg, p, eq, g, kUnitLyap, 1.5, f0);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].l == b.samples[i].l);
      for (std::size_t j = 0; j < a.samples[i].f.size(); ++j)
        CHECK(a.samples[i].f[j] == b.samples[i].f[j]);
    }
  }

  SUBCASE("destabilizing inlet gain faults the run") {
    SolverConfig cfg;
    cfg.M = 32;
    cfg.t_end = 200.0;
    cfg.output_stride = 5.0;
    const Trajectory traj =
        simulate(cfg, p, eq, Gains{0.01, 0.05}, kUnitLyap, 1.5, f0);
    CHECK(traj.status == Termination::Fault);
  }
}
