#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prhf/initial_data.hpp"
#include "prhf/variational.hpp"

using namespace prhf;

TEST_CASE("Daubechies inequality on the Gaussian matches the closed forms") {
  // L / w = 32 keeps the lattice error of the |k| cone below 1e-4.
  const Grid g = make_grid(96, 32.0);
  const OrbitalSet p = gaussian_family({{{0, 0, 0}, 1.0}}, g, 0.0, 1.0);
  const InequalityReport r = daubechies_check(p, "gaussian");
  CHECK(r.lhs == doctest::Approx(2.0 / std::sqrt(oracle::pi)).epsilon(1e-4));
  CHECK(r.rhs == doctest::Approx(kDaubechiesConstant * oracle::gaussian_rho43(1.0)).epsilon(1e-6));
  CHECK(r.rhs == doctest::Approx(0.597).epsilon(1e-3));
  CHECK(r.pass);
  CHECK(r.witness == "gaussian");
}

TEST_CASE("Daubechies rejects non-admissible families") {
  const Grid g = make_grid(16, 8.0);
  OrbitalSet p = random_bump_family(1, g, 1, 0.0, 1.0);
  for (auto& z : p.orbitals[0].values) z *= 1.1;
  CHECK_THROWS_AS(daubechies_check(p), std::invalid_argument);
}

TEST_CASE("HLS ratio of the Gaussian") {
  const Grid g = make_grid(32, 10.0);
  const RealDensity rho = density(gaussian_family({{{0, 0, 0}, 1.0}}, g, 0.0, 1.0));
  const InequalityReport r = hls_check(rho);
  const double expect = std::sqrt(2.0 / oracle::pi) / oracle::gaussian_rho43(1.0);
  CHECK(r.ratio == doctest::Approx(expect).epsilon(1e-4));
  CHECK(r.ratio == doctest::Approx(2.18).epsilon(2e-3));
  CHECK(r.pass);
  CHECK_FALSE(hls_check(rho, "tight", 2.0).pass);
  CHECK(integral_rho_four_thirds(rho) == doctest::Approx(oracle::gaussian_rho43(1.0)).epsilon(1e-6));
}

TEST_CASE("heuristic calculator against brute-force minimization") {
  for (double kappa : {2.0, 0.5, 0.02}) {
    const double ncr = std::pow(2.0 / kappa, 1.5);
    for (double frac : {0.2, 0.6, 0.95}) {
      const double N = frac * ncr;
      const HeuristicStarResult h = chandrasekhar_heuristic_kappa(kappa, N, 1.0);
      const oracle::HeuristicMin o = oracle::heuristic_min(kappa, N, 1.0);
      CHECK(h.bounded);
      CHECK(h.N_cr == doctest::Approx(ncr).epsilon(1e-14));
      CHECK(h.p_star == doctest::Approx(o.p).epsilon(1e-6));
      CHECK(h.energy == doctest::Approx(o.energy).epsilon(1e-10));
      CHECK(h.radius == doctest::Approx(std::cbrt(N) / h.p_star));
    }
    CHECK_FALSE(chandrasekhar_heuristic_kappa(kappa, 1.01 * ncr, 1.0).bounded);
  }
}

TEST_CASE("heuristic star in physical parameters") {
  HeuristicStarParams p;
  p.G = 1e-38;
  p.m_Z = 2.0;
  p.Z = 1.0;
  p.N = 1.0;
  const HeuristicStarResult h = chandrasekhar_heuristic(p);
  CHECK(h.kappa == doctest::Approx(4e-38));
  CHECK(h.N_cr == doctest::Approx(std::pow(2.0 / 4e-38, 1.5)));
  CHECK(h.N_cr_printed == doctest::Approx(std::pow(2e-38, -1.5)));
  CHECK(h.M_cr == doctest::Approx(2.0 * h.N_cr));
}

TEST_CASE("gradient flow lowers the energy and converges below the critical coupling") {
  const Grid g = make_grid(24, 12.0);
  OrbitalSet p = critical_trial_family(1, g, 1.0);
  p.kappa = 1.0;
  FlowParams fp;
  const FlowResult r = gradient_flow_ground_state(p, fp);
  CHECK(r.converged);
  CHECK(r.outcome == FlowOutcome::Converged);
  CHECK(r.energy < hartree_energy(p));
  for (std::size_t i = 1; i < r.energies.size(); ++i) CHECK(r.energies[i] <= r.energies[i - 1] + 1e-11 * std::abs(r.energies[i - 1]));
  CHECK(r.energy < 1.0);
  CHECK(kinetic_energy(r.psi) >= 1.0);
  CHECK(r.residual <= 10.0 * std::sqrt(fp.tolerance));
  CHECK(energy_gradient_norm(r.psi, Model::Hartree) == doctest::Approx(r.residual).epsilon(1e-6));
}

TEST_CASE("gradient flow collapses far above the critical coupling") {
  const Grid g = make_grid(24, 12.0);
  OrbitalSet p = critical_trial_family(1, g, 1.0);
  p.kappa = 8.0;
  const FlowResult r = gradient_flow_ground_state(p, FlowParams{});
  CHECK_FALSE(r.converged);
  CHECK(r.outcome == FlowOutcome::Collapsed);
}

TEST_CASE("Hartree-Fock flow keeps the family orthonormal") {
  const Grid g = make_grid(24, 12.0);
  OrbitalSet p = critical_trial_family(4, g, 1.0);
  p.kappa = 0.3;
  FlowParams fp;
  fp.model = Model::HartreeFock;
  fp.max_iterations = 40;
  const FlowResult r = gradient_flow_ground_state(p, fp);
  CHECK((gram(r.psi) - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(r.energy < hartree_fock_energy(p));
}

TEST_CASE("relativistic eigenvalue: free case and a well") {
  const Grid g = make_grid(16, 8.0);
  const RealField zero(g);
  CHECK(std::abs(relativistic_lowest_eigenvalue(zero, 1.0).eigenvalue) < 1e-6);
  RealField U(g);
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
        U[g.index(i, j, k)] = std::exp(-(x * x + y * y + z * z));
      }
  const EigenResult e = relativistic_lowest_eigenvalue(U, 3.0);
  CHECK(e.eigenvalue < 0.0);
  CHECK(e.eigenvalue > -3.0);
  CHECK(e.residual < 1e-6);
  // Rayleigh quotient of the returned vector reproduces the eigenvalue.
  OrbitalSet v({e.vector}, 0.0, 1.0);
  double pot = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) pot += U[i] * std::norm(e.vector[i]);
  pot *= g.cell_volume();
  const double q = (kinetic_expectation(e.vector, 0.0) - 3.0 * pot) / norm_sq(e.vector);
  CHECK(q == doctest::Approx(e.eigenvalue).epsilon(1e-6));
}

TEST_CASE("bisection rejects a bracket that does not straddle the threshold") {
  const Grid g = make_grid(16, 12.0);
  BisectionParams b;
  b.lower = 0.2;
  b.upper = 0.4;
  CHECK_THROWS_AS(critical_coupling(1, 1.0, g, b), BracketError);
}
