#include <doctest.h>

#include <random>

#include "extrusim/linearization.hpp"
#include "extrusim/model.hpp"
#include "test_helpers.hpp"

using namespace extrusim;
using extrusim::testing::kReferenceNe;
using extrusim::testing::reference_params;

namespace {

// Agreement relative to the characteristic magnitude of each constant; a2
// vanishes identically at a consistent equilibrium, so its scale is taken
// from the two canceling terms.
void check_against_fd(const PhysicalParams& p, const Equilibrium& eq,
                      double tol) {
  const LinearizationConstants lc = linearize(p, eq);
  const LinearizationConstants fd = linearize_fd(p, eq);
  const double mass = p.rho0 * p.S_eff * (1.0 - eq.f_pe);
  const double a2_scale = p.K_d / p.eta * lc.b2 / mass;
  auto close = [&](double a, double b, double scale) {
    CHECK(std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), scale}));
  };
  close(lc.a1, fd.a1, 0.0);
  close(lc.a2, fd.a2, a2_scale);
  close(lc.a3, fd.a3, 0.0);
  close(lc.b1, fd.b1, 0.0);
  close(lc.b2, fd.b2, 0.0);
}

}  // namespace

TEST_CASE("analytic constants agree with central differences") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 20; ++i) {
    const PhysicalParams p = extrusim::testing::random_params(rng);
    const double f = extrusim::testing::random_feasible_fill(p, rng);
    const Equilibrium eq = equilibrium_from_fill(p, f, 1.0 + 9.0 * i / 20.0);
    check_against_fd(p, eq, 1e-6);
    const LinearizationConstants lc = linearize(p, eq);
    CHECK(lc.a1 < 0.0);
    CHECK(lc.a3 < 0.0);
    CHECK(lc.b1 < 0.0);
    CHECK(lc.b2 > 0.0);
  }
}

TEST_CASE("finite-difference oracle is step robust") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const LinearizationConstants r4 = linearize_fd(p, eq, 1e-4);
  const LinearizationConstants r5 = linearize_fd(p, eq, 1e-5);
  const LinearizationConstants r6 = linearize_fd(p, eq, 1e-6);
  auto close = [](double a, double b) {
    CHECK(std::abs(a - b) <= 1e-4 * std::max({std::abs(a), std::abs(b), 1e-9}));
  };
  close(r4.a1, r5.a1);
  close(r5.a1, r6.a1);
  close(r4.a3, r5.a3);
  close(r5.a3, r6.a3);
  close(r4.b1, r5.b1);
  close(r5.b1, r6.b1);
  close(r4.b2, r5.b2);
  close(r5.b2, r6.b2);
  CHECK_THROWS_AS(linearize_fd(p, eq, 1e-2), ModelError);
}

TEST_CASE("constants blow up like 1/(1 - f_pe) near the full channel") {
  const PhysicalParams p = reference_params();
  // Fill values this close to 1 are infeasible for the reference geometry,
  // so scale the geometric parameter down to keep l_e inside (0, L).
  const PhysicalParams q = PhysicalParams::create(
      p.L, p.B * 1e-3, p.K_d, p.zeta, p.eta, p.rho0, p.S_eff);
  const Equilibrium near = equilibrium_from_fill(q, 1.0 - 1e-3, 2.0);
  const Equilibrium mid = equilibrium_from_fill(q, 1.0 - 2e-3, 2.0);
  const LinearizationConstants lcn = linearize(q, near);
  const LinearizationConstants lcm = linearize(q, mid);
  // a3 carries the 1/(1 - f_pe) factor directly.
  CHECK(std::abs(lcn.a3) / std::abs(lcm.a3) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("scaling of the constants in N_e") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq1 = equilibrium_from_fill(p, 0.6, 2.0);
  const Equilibrium eq2 = equilibrium_from_fill(p, 0.6, 7.0);
  const LinearizationConstants l1 = linearize(p, eq1);
  const LinearizationConstants l2 = linearize(p, eq2);
  const double lam = 7.0 / 2.0;
  CHECK(l2.b1 == doctest::Approx(lam * l1.b1).epsilon(1e-12));
  CHECK(l2.a3 == doctest::Approx(lam * l1.a3).epsilon(1e-12));
  CHECK(l2.a1 == doctest::Approx(lam * l1.a1).epsilon(1e-12));
  CHECK(l2.b2 == doctest::Approx(l1.b2).epsilon(1e-12));
}

TEST_CASE("reference a1 has the published sign and order of magnitude") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const LinearizationConstants lc = linearize(p, eq);
  CHECK(lc.a1 < 0.0);
  const double ratio = std::abs(lc.a1) / 0.0119;
  CHECK(ratio > 0.1);
  CHECK(ratio < 10.0);
}

TEST_CASE("gain conditions") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const LinearizationConstants lc = linearize(p, eq);

  SUBCASE("zero gains collapse to a1 < 0") {
    const GainCheck c = check_gain_conditions(lc, eq, p, Gains{0.0, 0.0});
    CHECK(c.pass);
    CHECK(c.theta0 == doctest::Approx(lc.a1).epsilon(1e-14));
    CHECK(c.boundary_term == doctest::Approx(0.0));
  }

  SUBCASE("published gains pass at the reference setpoint") {
    const GainCheck c = check_gain_conditions(lc, eq, p, Gains{0.01, 1e-4});
    CHECK(c.pass);
    CHECK(c.margin_boundary > 0.0);
  }

  SUBCASE("balanced k2 zeroes the boundary term") {
    const double k1 = 0.003;
    const Gains g{k1, eq.f_pe * p.rho0 * p.V_eff * k1};
    const GainCheck c = check_gain_conditions(lc, eq, p, g);
    CHECK(c.pass);
    CHECK(c.boundary_term == doctest::Approx(0.0));
  }

  SUBCASE("oversized k2 fails the boundary condition") {
    const GainCheck c = check_gain_conditions(lc, eq, p, Gains{0.01, 0.05});
    CHECK_FALSE(c.pass);
  }

  SUBCASE("degenerate loop") {
    CHECK_THROWS_AS(
        check_gain_conditions(lc, eq, p, Gains{1.0 / lc.b2, 0.0}), ModelError);
  }
}

TEST_CASE("gain existence predicate truth table") {
  auto lc = [](double a1, double a2, double b1) {
    return LinearizationConstants{a1, a2, 0.0, b1, 0.0};
  };
  CHECK(gains_exist(lc(-0.0119, 0.0, -1.0)).which_case == "a1<0");
  CHECK(gains_exist(lc(0.5, 0.0, -1.0)).exists == false);
  CHECK(gains_exist(lc(0.0, 1.0, -1.0)).which_case == "a2b1!=0");
  CHECK(gains_exist(lc(0.5, 1.0, 0.0)).exists == false);
  CHECK(gains_exist(lc(-1.0, 1.0, -1.0)).which_case == "a1<0");
}

TEST_CASE("synthesized gains always pass the checker") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 20; ++i) {
    const PhysicalParams p = extrusim::testing::random_params(rng);
    const double f = extrusim::testing::random_feasible_fill(p, rng);
    std::uniform_real_distribution<double> uN(0.5, 15.0);
    const Equilibrium eq = equilibrium_from_fill(p, f, uN(rng));
    const LinearizationConstants lc = linearize(p, eq);
    for (GainStrategy s : {GainStrategy::PaperLimit, GainStrategy::MarginMax}) {
      const Gains g = synthesize_gains(lc, eq, p, s);
      CHECK(check_gain_conditions(lc, eq, p, g).pass);
    }
  }
}

TEST_CASE("compatibility conditions") {
  const PhysicalParams p = reference_params();
  const Equilibrium eq = equilibrium_from_fill(p, 0.6, kReferenceNe);
  const Gains g{0.01, 1e-4};

  SUBCASE("stationary data is exactly compatible") {
    const Profile flat = Profile::coeffs(eq.f_pe, 0.0, 0.0);
    const CompatibilityReport r = check_compatibility(p, eq, g, eq.l_e, flat);
    CHECK(r.c1_residual < 1e-12);
    CHECK(r.c2_residual < 1e-12);
    CHECK(r.c1_pass);
    CHECK(r.c2_pass);
  }

  SUBCASE("boundary perturbation shifts c1 exactly") {
    const Profile base = Profile::coeffs(0.6905, 0.025, 0.0117);
    const double delta = 3.25e-3;
    const Profile shifted = Profile::coeffs(0.6905 + delta, 0.025, 0.0117);
    const CompatibilityReport r0 = check_compatibility(p, eq, g, 1.5, base);
    const CompatibilityReport r1 = check_compatibility(p, eq, g, 1.5, shifted);
    CHECK(std::abs((r1.c1_residual - r0.c1_residual) - delta) < 1e-12);
  }

  SUBCASE("residuals are continuous in l0") {
    const Profile f0 = Profile::coeffs(0.6905, 0.025, 0.0117);
    const CompatibilityReport a = check_compatibility(p, eq, g, 1.5, f0);
    const CompatibilityReport b = check_compatibility(p, eq, g, 1.5 + 1e-7, f0);
    CHECK(std::abs(a.c1_residual - b.c1_residual) < 1e-6);
    CHECK(std::abs(a.c2_residual - b.c2_residual) < 1e-6);
  }

  SUBCASE("published initial data: residuals reported, both denominators") {
    const Profile f0 = Profile::coeffs(0.6905, 0.025, 0.0117);
    const CompatibilityReport r = check_compatibility(p, eq, g, 1.5, f0);
    CHECK(r.c1_residual > 0.0);
    CHECK(std::isfinite(r.c2_residual));
    CHECK(std::isfinite(r.c2_residual_alt));
  }
}
