#pragma once

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "extrusim/grid.hpp"
#include "extrusim/lyapunov.hpp"
#include "extrusim/model.hpp"
#include "extrusim/profile.hpp"

// Method-of-lines solver: first-order upwind semi-discretization of the
// normalized transport equation in advective form, coupled to the interface
// ODE and the closed-loop actuation, integrated by an adaptive
// Dormand-Prince 5(4) pair (classical fixed-step RK4 for reproducibility).

namespace extrusim {

class SimulationFault : public std::runtime_error {
 public:
  SimulationFault(const std::string& what, double t)
      : std::runtime_error(what), time(t) {}
  double time;
};

struct SolverConfig {
  int M = 128;
  double rel_tol = 1e-6;
  double abs_tol = 1e-9;
  double dt_init = 1e-3;
  double dt_max = 10.0;
  double cfl_safety = 0.9;
  double t_end = 3000.0;
  double output_stride = 5.0;        // sampling interval [s]
  bool fixed_step = false;           // classical RK4 at dt_init
  bool first_order_extrap = false;   // copy-out reconstruction of f(t, 1)

  void validate() const {
    if (M < 16) throw ModelError("SolverConfig: M < 16");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
      throw ModelError("SolverConfig: tolerances must be positive");
    if (!(cfl_safety > 0.0) || cfl_safety > 1.0)
      throw ModelError("SolverConfig: cfl_safety outside (0, 1]");
    if (!(dt_init > 0.0) || !(dt_max > 0.0) || !(t_end > 0.0) ||
        !(output_stride > 0.0))
      throw ModelError("SolverConfig: time parameters must be positive");
  }
};

// State vector layout: y[0] = l, y[1..M] = cell-center filling ratios.
struct RhsEval {
  std::vector<double> dydt;
  Actuation act;
  double f1;             // reconstructed interface value
  double alpha_max;      // max |alpha_p| over cell centers
  bool outflow_flagged;  // alpha_p(1) <= 0 during this evaluation
};

// Reconstructed filling ratio at x = 1 from the last two cell centers.
inline double interface_value(const std::vector<double>& y, int M,
                              bool first_order) {
  if (first_order) return y[M];
  return 1.5 * y[M] - 0.5 * y[M - 1];
}

inline RhsEval eval_rhs(const PhysicalParams& p, const Equilibrium& eq,
                        const Gains& g, const Grid& grid,
                        const SolverConfig& cfg, const std::vector<double>& y,
                        double t) {
  const int M = grid.M;
  const double l = y[0];
  for (int j = 1; j <= M; ++j)
    if (y[j] < -1e-6 || y[j] > 1.0 + 1e-6 || !std::isfinite(y[j]))
      throw SimulationFault("filling ratio left (0, 1)", t);
  if (!(l > 0.0) || !(l < p.L))
    throw SimulationFault("interface position left (0, L)", t);

  RhsEval out;
  out.act = resolve_closed_loop(p, eq, g, l);
  out.f1 = interface_value(y, M, cfg.first_order_extrap);
  const double ldot = interface_rhs(p, l, out.act.N, out.f1, out.act.dP);
  out.outflow_flagged = outflow_degenerate(p, l, out.act.N, ldot);
  const double ghost_in = inflow_ratio(p, out.act.F_in, out.act.N);

  out.dydt.assign(M + 1, 0.0);
  out.dydt[0] = ldot;
  out.alpha_max = 0.0;
  for (int j = 0; j < M; ++j) {
    const double alpha =
        transport_velocity(p, grid.centers[j], l, out.act.N, ldot);
    out.alpha_max = std::max(out.alpha_max, std::abs(alpha));
    double diff;
    if (alpha >= 0.0) {
      const double upstream = (j == 0) ? ghost_in : y[j];
      diff = (y[j + 1] - upstream) / grid.dx;
    } else {
      const double downstream = (j == M - 1) ? out.f1 : y[j + 2];
      diff = (downstream - y[j + 1]) / grid.dx;
    }
    out.dydt[j + 1] = -alpha * diff;
  }
  return out;
}

struct StepResult {
  double dt_used;
  double error_estimate;
  int rejections;
};

// Adaptive Dormand-Prince 5(4) with FSAL and PI step-size control. The step
// size is additionally capped by the explicit-transport CFL bound.
class RKIntegrator {
 public:
  RKIntegrator(const SolverConfig& cfg, const PhysicalParams& p,
               const Equilibrium& eq, const Gains& g, const Grid& grid)
      : cfg_(cfg), p_(p), eq_(eq), g_(g), grid_(grid), dt_prop_(cfg.dt_init) {}

  // One accepted step from (t, y); advances both in place.
  StepResult step(double& t, std::vector<double>& y) {
    if (cfg_.fixed_step) return rk4_step(t, y);
    if (!have_k1_) {
      stage_[0] = eval_rhs(p_, eq_, g_, grid_, cfg_, y, t);
      have_k1_ = true;
    }
    int rejections = 0;
    while (true) {
      const double cap =
          cfg_.cfl_safety * grid_.dx / std::max(stage_[0].alpha_max, 1e-30);
      double dt = std::min({dt_prop_, cap, cfg_.dt_max, cfg_.t_end - t});
      if (dt <= 0.0) throw SimulationFault("nonpositive step size", t);
      const auto [ynew, err] = attempt(t, y, dt);
      if (err <= 1.0) {
        const double fac =
            std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2) *
                           std::pow(err_prev_, 0.08),
                       0.2, 5.0);
        dt_prop_ = dt * fac;
        err_prev_ = std::max(err, 1e-10);
        t += dt;
        y = ynew;
        stage_[0] = stage_[6];  // FSAL
        return {dt, err, rejections};
      }
      if (++rejections >= 20)
        throw SimulationFault("20 consecutive step rejections", t);
      dt_prop_ = dt * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
    }
  }

  const RhsEval& current_rhs() const { return stage_[0]; }
  bool outflow_seen() const { return outflow_seen_; }

 private:
  StepResult rk4_step(double& t, std::vector<double>& y) {
    const double dt = std::min(cfg_.dt_init, cfg_.t_end - t);
    const std::size_t n = y.size();
    auto f = [&](const std::vector<double>& yy, double tt) {
      RhsEval e = eval_rhs(p_, eq_, g_, grid_, cfg_, yy, tt);
      outflow_seen_ = outflow_seen_ || e.outflow_flagged;
      return e.dydt;
    };
    const auto k1 = f(y, t);
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    const auto k2 = f(tmp, t + 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    const auto k3 = f(tmp, t + 0.5 * dt);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
    const auto k4 = f(tmp, t + dt);
    for (std::size_t i = 0; i < n; ++i)
      y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    t += dt;
    stage_[0] = eval_rhs(p_, eq_, g_, grid_, cfg_, y, t);
    have_k1_ = true;
    return {dt, 0.0, 0};
  }

  std::pair<std::vector<double>, double> attempt(double t,
                                                 const std::vector<double>& y,
                                                 double dt) {
    static constexpr double c[7] = {0.0,     1.0 / 5, 3.0 / 10, 4.0 / 5,
                                    8.0 / 9, 1.0,     1.0};
    static constexpr double a[7][6] = {
        {},
        {1.0 / 5},
        {3.0 / 40, 9.0 / 40},
        {44.0 / 45, -56.0 / 15, 32.0 / 9},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
         -5103.0 / 18656},
        {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
         11.0 / 84}};
    static constexpr double b5[7] = {35.0 / 384,    0.0,          500.0 / 1113,
                                     125.0 / 192,   -2187.0 / 6784, 11.0 / 84,
                                     0.0};
    static constexpr double b4[7] = {5179.0 / 57600,    0.0,
                                     7571.0 / 16695,    393.0 / 640,
                                     -92097.0 / 339200, 187.0 / 2100,
                                     1.0 / 40};
    const std::size_t n = y.size();
    std::vector<double> tmp(n);
    for (int s = 1; s < 7; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = y[i];
        for (int q = 0; q < s; ++q) acc += dt * a[s][q] * stage_[q].dydt[i];
        tmp[i] = acc;
      }
      stage_[s] = eval_rhs(p_, eq_, g_, grid_, cfg_, tmp, t + c[s] * dt);
      outflow_seen_ = outflow_seen_ || stage_[s].outflow_flagged;
    }
    std::vector<double> ynew(n);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y5 = y[i], y4 = y[i];
      for (int s = 0; s < 7; ++s) {
        y5 += dt * b5[s] * stage_[s].dydt[i];
        y4 += dt * b4[s] * stage_[s].dydt[i];
      }
      ynew[i] = y5;
      const double sc =
          cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(y[i]), std::abs(y5));
      const double e = (y5 - y4) / sc;
      err += e * e;
    }
    return {std::move(ynew), std::sqrt(err / static_cast<double>(n))};
  }

  SolverConfig cfg_;
  PhysicalParams p_;
  Equilibrium eq_;
  Gains g_;
  Grid grid_;
  double dt_prop_;
  double err_prev_ = 1.0;
  bool have_k1_ = false;
  bool outflow_seen_ = false;
  RhsEval stage_[7];
};

enum class Termination { Completed, Fault };

struct TrajectorySample {
  double t;
  double l;
  Actuation act;
  std::vector<double> f;
  LyapunovReading reading;
  double dt_used;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  Termination status = Termination::Completed;
  std::string fault_reason;
  double fault_time = 0.0;
  bool outflow_flagged = false;  // alpha_p(1) <= 0 seen at some evaluation
};

inline Trajectory simulate(const SolverConfig& cfg, const PhysicalParams& p,
                           const Equilibrium& eq, const Gains& g,
                           const LyapunovConfig& lycfg, double l0,
                           const Profile& f0) {
  cfg.validate();
  const Grid grid(cfg.M);
  std::vector<double> y(cfg.M + 1);
  y[0] = l0;
  for (int j = 0; j < cfg.M; ++j) y[j + 1] = f0.value(grid.centers[j]);

  Trajectory traj;
  auto sample = [&](double t, double dt_used, const Actuation& act) {
    TrajectorySample s;
    s.t = t;
    s.l = y[0];
    s.act = act;
    s.f.assign(y.begin() + 1, y.end());
    s.reading = evaluate(lycfg, eq, grid, s.l, s.f);
    s.dt_used = dt_used;
    traj.samples.push_back(std::move(s));
  };

  double t = 0.0;
  try {
    RKIntegrator integ(cfg, p, eq, g, grid);
    sample(0.0, 0.0, resolve_closed_loop(p, eq, g, l0));
    double next_sample = cfg.output_stride;
    while (t < cfg.t_end - 1e-12) {
      const StepResult sr = integ.step(t, y);
      traj.outflow_flagged = traj.outflow_flagged || integ.outflow_seen();
      if (t >= next_sample - 1e-12 || t >= cfg.t_end - 1e-12) {
        sample(t, sr.dt_used, integ.current_rhs().act);
        while (next_sample <= t + 1e-12) next_sample += cfg.output_stride;
      }
    }
  } catch (const SimulationFault& f) {
    traj.status = Termination::Fault;
    traj.fault_reason = f.what();
    traj.fault_time = f.time;
  } catch (const ModelError& e) {
    traj.status = Termination::Fault;
    traj.fault_reason = e.what();
    traj.fault_time = t;
  }
  return traj;
}

// Frozen-coefficient transport: constant velocity alpha > 0, prescribed
// inflow value, first-order upwind, classical RK4 with dt tied to dx. Used
// for convergence studies against the exact characteristics solution.
inline std::vector<double> advect_frozen(
    int M, double alpha, const std::function<double(double)>& inflow,
    const std::function<double(double)>& f0, double t_end, double cfl = 0.4) {
  const Grid grid(M);
  std::vector<double> f(M);
  for (int j = 0; j < M; ++j) f[j] = f0(grid.centers[j]);
  const double dt0 = cfl * grid.dx / alpha;
  const auto steps = static_cast<long>(std::ceil(t_end / dt0));
  const double dt = t_end / static_cast<double>(steps);
  auto rhs = [&](const std::vector<double>& ff, double t) {
    std::vector<double> d(M);
    for (int j = 0; j < M; ++j) {
      const double upstream = (j == 0) ? inflow(t) : ff[j - 1];
      d[j] = -alpha * (ff[j] - upstream) / grid.dx;
    }
    return d;
  };
  std::vector<double> tmp(M);
  for (long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    const auto k1 = rhs(f, t);
    for (int j = 0; j < M; ++j) tmp[j] = f[j] + 0.5 * dt * k1[j];
    const auto k2 = rhs(tmp, t + 0.5 * dt);
    for (int j = 0; j < M; ++j) tmp[j] = f[j] + 0.5 * dt * k2[j];
    const auto k3 = rhs(tmp, t + 0.5 * dt);
    for (int j = 0; j < M; ++j) tmp[j] = f[j] + dt * k3[j];
    const auto k4 = rhs(tmp, t + dt);
    for (int j = 0; j < M; ++j)
      f[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  }
  return f;
}

}  // namespace extrusim
