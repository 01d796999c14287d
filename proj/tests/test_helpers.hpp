#pragma once

#include <random>

#include "extrusim/model.hpp"

namespace extrusim::testing {

// Reference configuration: the physical constants of the built-in
// "paper-sec4" preset. N_e = 5 rev/s is the documented reference setpoint.
inline PhysicalParams reference_params() {
  return PhysicalParams::create(2.0, 2.4e-6, 2.4e-3, 0.003, 125.0, 350.0,
                                0.014);
}

inline constexpr double kReferenceNe = 5.0;

// Random valid (params, f_pe, N_e) configuration. Parameters are log-uniform
// around the reference values; infeasible filling ratios are resampled.
template <class Rng>
PhysicalParams random_params(Rng& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto scale = [&] { return std::pow(2.0, u(rng)); };
  const PhysicalParams ref = reference_params();
  return PhysicalParams::create(ref.L * scale(), ref.B * scale(),
                                ref.K_d * scale(), ref.zeta * scale(),
                                ref.eta * scale(), ref.rho0 * scale(),
                                ref.S_eff * scale());
}

template <class Rng>
double random_feasible_fill(const PhysicalParams& p, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int tries = 0; tries < 1000; ++tries) {
    const double f = u(rng);
    const double l = p.L - f * p.B * p.rho0 / (p.K_d * (1.0 - f));
    if (l > 0.01 * p.L && l < 0.99 * p.L) return f;
  }
  throw std::runtime_error("random_feasible_fill: no feasible fill found");
}

}  // namespace extrusim::testing
