#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

// Physical model of the isothermal bi-zone extruder: die pressure relation,
// moving-interface mass balance, normalized transport velocity, inflow
// boundary value and the closed-loop actuation fixed point.

namespace extrusim {

class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

struct PhysicalParams {
  double L;      // extruder length [m]
  double B;      // geometric parameter [m^4]
  double K_d;    // die conductance [m^3]
  double zeta;   // screw pitch [m]
  double eta;    // melt viscosity [Pa s]
  double rho0;   // melt density [kg/m^3]
  double S_eff;  // effective cross-section [m^2]
  double V_eff;  // effective volume per pitch [m^3], equals zeta * S_eff

  // Pass V_eff < 0 to have it computed as zeta * S_eff.
  static PhysicalParams create(double L, double B, double K_d, double zeta,
                               double eta, double rho0, double S_eff,
                               double V_eff = -1.0) {
    if (V_eff < 0.0) V_eff = zeta * S_eff;
    PhysicalParams p{L, B, K_d, zeta, eta, rho0, S_eff, V_eff};
    p.validate();
    return p;
  }

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw ModelError(std::string("PhysicalParams: ") + name +
                         " must be strictly positive and finite");
    };
    positive(L, "L");
    positive(B, "B");
    positive(K_d, "K_d");
    positive(zeta, "zeta");
    positive(eta, "eta");
    positive(rho0, "rho0");
    positive(S_eff, "S_eff");
    positive(V_eff, "V_eff");
    const double v = zeta * S_eff;
    if (std::abs(V_eff - v) > 1e-12 * v)
      throw ModelError("PhysicalParams: V_eff inconsistent with zeta * S_eff");
  }
};

// Pressure difference at the die, Delta P = eta rho0 V_eff N (L-l) / (B rho0 + K_d (L-l)).
inline double die_pressure(const PhysicalParams& p, double N, double l) {
  if (!(l > 0.0) || l > p.L)
    throw ModelError("die_pressure: interface position outside (0, L]");
  if (N < 0.0) throw ModelError("die_pressure: negative screw speed");
  const double u = p.L - l;
  return p.eta * p.rho0 * p.V_eff * N * u / (p.B * p.rho0 + p.K_d * u);
}

// Interface velocity from the total mass balance:
//   ldot = ((K_d/eta) dP - rho0 V_eff N f1) / (rho0 S_eff (1 - f1)),
// f1 being the filling ratio at the normalized interface x = 1.
inline double interface_rhs(const PhysicalParams& p, double l, double N,
                            double f1, double dP) {
  if (!(l > 0.0) || !(l < p.L))
    throw ModelError("interface_rhs: interface position outside (0, L)");
  if (std::abs(1.0 - f1) < 1e-9)
    throw ModelError("interface_rhs: filling ratio at interface too close to 1 "
                     "(bi-zone model degenerates)");
  return (p.K_d / p.eta * dP - p.rho0 * p.V_eff * N * f1) /
         (p.rho0 * p.S_eff * (1.0 - f1));
}

// Normalized transport velocity alpha_p(x) = (zeta N - x ldot) / l, affine in x.
inline double transport_velocity(const PhysicalParams& p, double x, double l,
                                 double N, double ldot) {
  if (!(l > 0.0)) throw ModelError("transport_velocity: l must be positive");
  if (x < 0.0 || x > 1.0)
    throw ModelError("transport_velocity: x outside [0, 1]");
  return (p.zeta * N - x * ldot) / l;
}

// Outflow condition at the interface; alpha_p(1) <= 0 means the scheme must
// treat x = 1 as an inflow. Soft diagnostic, not an error.
inline bool outflow_degenerate(const PhysicalParams& p, double l, double N,
                               double ldot) {
  return transport_velocity(p, 1.0, l, N, ldot) <= 0.0;
}

// Boundary filling ratio f_p(t, 0) = F_in / (rho0 V_eff N).
inline double inflow_ratio(const PhysicalParams& p, double F_in, double N) {
  if (!(N > 0.0)) throw ModelError("inflow_ratio: screw speed must be positive");
  return F_in / (p.rho0 * p.V_eff * N);
}

struct Equilibrium {
  double l_e;       // interface setpoint [m]
  double f_pe;      // filling-ratio setpoint, in (0,1)
  double N_e;       // screw-speed setpoint [rev/s]
  double dP_e;      // pressure-difference setpoint [Pa]
  double alpha_pe;  // transport speed zeta N_e / l_e [1/s]
  double F_ine;     // inlet mass-flow setpoint rho0 V_eff N_e f_pe [kg/s]

  // Validates the full tuple against the defining relations.
  static Equilibrium create(const PhysicalParams& p, double l_e, double f_pe,
                            double N_e) {
    if (!(l_e > 0.0) || !(l_e < p.L))
      throw ModelError("Equilibrium: l_e outside (0, L)");
    if (!(f_pe > 0.0) || !(f_pe < 1.0))
      throw ModelError("Equilibrium: f_pe outside (0, 1)");
    if (!(N_e > 0.0)) throw ModelError("Equilibrium: N_e must be positive");
    const double dP_e = die_pressure(p, N_e, l_e);
    const double resid = interface_rhs(p, l_e, N_e, f_pe, dP_e) /
                         std::max(1.0, p.zeta * N_e);
    if (std::abs(resid) > 1e-10)
      throw ModelError("Equilibrium: F(l_e, N_e, f_pe) != 0 (tuple is not a "
                       "steady state)");
    return Equilibrium{l_e, f_pe, N_e, dP_e, p.zeta * N_e / l_e,
                       p.rho0 * p.V_eff * N_e * f_pe};
  }
};

struct Gains {
  double k1;  // screw-speed gain [rev/s/Pa]
  double k2;  // inlet-flow gain [kg/s/Pa]
};

struct Actuation {
  double N;     // screw speed [rev/s]
  double F_in;  // inlet mass flow [kg/s]
  double dP;    // pressure difference [Pa]
};

// Pressure per unit screw speed at a given interface position.
inline double pressure_slope(const PhysicalParams& p, double l) {
  const double u = p.L - l;
  return p.eta * p.rho0 * p.V_eff * u / (p.B * p.rho0 + p.K_d * u);
}

// Resolves the algebraic loop between the pressure relation dP = c(l) N and
// the feedback N = N_e + k1 (dP - dP_e). P is linear in N, so the fixed point
// is closed-form.
inline Actuation resolve_closed_loop(const PhysicalParams& p,
                                     const Equilibrium& eq, const Gains& g,
                                     double l) {
  if (!(l > 0.0) || !(l < p.L))
    throw ModelError("resolve_closed_loop: interface position outside (0, L)");
  const double c = pressure_slope(p, l);
  const double denom = 1.0 - g.k1 * c;
  if (std::abs(denom) < 1e-9)
    throw ModelError("resolve_closed_loop: feedback loop degenerate, "
                     "1 - k1 * dP/dN ~ 0");
  const double dP = c * (eq.N_e - g.k1 * eq.dP_e) / denom;
  const double N = eq.N_e + g.k1 * (dP - eq.dP_e);
  const double F_in = eq.F_ine + g.k2 * (dP - eq.dP_e);
  if (!(N > 0.0))
    throw ModelError("resolve_closed_loop: feedback drives screw speed N <= 0");
  if (F_in < 0.0)
    throw ModelError("resolve_closed_loop: feedback drives inlet flow F_in < 0");
  return Actuation{N, F_in, dP};
}

// Unique l_e with F(l_e, N_e, f_pe) = 0. N_e cancels from the equation; the
// closed form is cross-checked against a bisection root-finder on every call.
inline Equilibrium equilibrium_from_fill(const PhysicalParams& p, double f_pe,
                                         double N_e) {
  if (!(f_pe > 0.0) || !(f_pe < 1.0))
    throw ModelError("equilibrium_from_fill: f_pe outside (0, 1)");
  if (!(N_e > 0.0))
    throw ModelError("equilibrium_from_fill: N_e must be positive");
  const double l_closed = p.L - f_pe * p.B * p.rho0 / (p.K_d * (1.0 - f_pe));
  if (!(l_closed > 0.0) || !(l_closed < p.L))
    throw ModelError("equilibrium_from_fill: no equilibrium interface in "
                     "(0, L) for this filling ratio");

  auto residual = [&](double l) {
    return interface_rhs(p, l, N_e, f_pe, die_pressure(p, N_e, l));
  };
  double lo = 1e-12 * p.L;
  double hi = p.L * (1.0 - 1e-12);
  double flo = residual(lo);
  double fhi = residual(hi);
  if (flo == 0.0) lo = hi = lo;
  if (!(flo * fhi < 0.0) && flo != 0.0)
    throw ModelError("equilibrium_from_fill: bisection bracket failed");
  for (int it = 0; it < 200 && hi - lo > 1e-14 * p.L; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = residual(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    if (flo * fm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  const double l_bisect = 0.5 * (lo + hi);
  if (std::abs(l_bisect - l_closed) > 1e-12 * std::max(1.0, p.L))
    throw ModelError("equilibrium_from_fill: closed form disagrees with "
                     "bisection root of F = 0");
  return Equilibrium::create(p, l_closed, f_pe, N_e);
}

}  // namespace extrusim
