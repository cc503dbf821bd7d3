#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "prhf/initial_data.hpp"
#include "prhf/meanfield.hpp"

using namespace prhf;

namespace {

RealField unit_gaussian_density(const Grid& g) {
  RealField rho(g);
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
        rho[g.index(i, j, k)] = oracle::unit_gaussian_density(std::sqrt(x * x + y * y + z * z));
      }
  return rho;
}

}  // namespace

TEST_CASE("radial quadrature oracle agrees with erf(r)/r") {
  for (double r : {0.3, 1.0, 2.5, 4.0})
    CHECK(oracle::radial_potential(oracle::unit_gaussian_density, r) == doctest::Approx(std::erf(r) / r).epsilon(1e-9));
  CHECK(oracle::radial_self_energy(oracle::unit_gaussian_density) ==
        doctest::Approx(std::sqrt(2.0 / oracle::pi)).epsilon(1e-7));
}

TEST_CASE("Coulomb potential of a Gaussian") {
  const Grid g = make_grid(48, 16.0);
  const RealField rho = unit_gaussian_density(g);
  const RealField V = coulomb_convolve(rho);
  double worst = 0.0;
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
        const double r = std::sqrt(x * x + y * y + z * z);
        if (r > 0.25 * g.length()) continue;
        const double exact = oracle::radial_potential(oracle::unit_gaussian_density, r);
        worst = std::max(worst, std::abs(V[g.index(i, j, k)] - exact) / exact);
      }
  CHECK(worst < 1e-5);
  CHECK(V[g.index(24, 24, 24)] == doctest::Approx(2.0 / std::sqrt(oracle::pi)).epsilon(1e-5));
}

TEST_CASE("Gaussian self-energy") {
  const Grid g = make_grid(32, 16.0);
  const RealField rho = unit_gaussian_density(g);
  CHECK(direct_energy(rho, rho) == doctest::Approx(std::sqrt(2.0 / oracle::pi)).epsilon(1e-4));
}

TEST_CASE("direct energy is symmetric and bilinear") {
  const Grid g = make_grid(16, 8.0);
  const OrbitalSet a = random_bump_family(1, g, 11, 0.0, 1.0);
  const OrbitalSet b = random_bump_family(2, g, 12, 0.0, 1.0);
  const RealDensity ra = density(a), rb = density(b);
  CHECK(direct_energy(ra, rb) == doctest::Approx(direct_energy(rb, ra)).epsilon(1e-12));
  RealDensity r2 = ra;
  for (auto& v : r2.values) v *= 2.0;
  CHECK(direct_energy(r2, rb) == doctest::Approx(2.0 * direct_energy(ra, rb)).epsilon(1e-12));
}

TEST_CASE("kernel is positive, symmetric, and 1/r away from the origin") {
  const Grid g = make_grid(16, 8.0);
  const auto k = CoulombKernel::for_grid(g);
  CHECK(k->kernel_at(3, 1, 2) == doctest::Approx(k->kernel_at(-3, -1, -2)));
  CHECK(k->kernel_at(3, 1, 2) == doctest::Approx(k->kernel_at(1, 2, 3)));
  CHECK(k->kernel_at(0, 0, 0) > k->kernel_at(1, 0, 0));
  const double r = 6.0 * g.dx();
  CHECK(k->kernel_at(6, 0, 0) == doctest::Approx(1.0 / r).epsilon(0.02));
}

TEST_CASE("kinetic expectation of a Gaussian") {
  // With m > 0 the symbol is analytic in a strip of half-width m, so the lattice error goes like exp(-m L).
  const Grid g = make_grid(48, 20.0);
  for (double m : {1.0, 3.0}) {
    const ComplexField f = gaussian_orbital(g, {{0, 0, 0}, 1.1});
    CHECK(kinetic_expectation(f, m) == doctest::Approx(oracle::gaussian_kinetic(1.1, m)).epsilon(1e-7));
  }
}

TEST_CASE("|k| expectation converges like (dk w)^4") {
  // The cone of |k| at the origin limits the lattice sum; doubling L cuts the error about 16x.
  const double exact = 2.0 / std::sqrt(oracle::pi);
  double prev = 1.0;
  for (double L : {12.0, 24.0}) {
    const Grid g = make_grid(int(4 * L), L);
    const double err = std::abs(half_norm_sq(gaussian_orbital(g, {{0, 0, 0}, 1.0})) - exact) / exact;
    CHECK(err < prev / 10.0);
    prev = err;
  }
  CHECK(prev < 5e-4);
}

TEST_CASE("kinetic operator is self-adjoint") {
  const Grid g = make_grid(16, 6.0);
  const OrbitalSet p = random_bump_family(2, g, 5, 0.5, 1.0);
  const ComplexField& a = p.orbitals[0];
  const ComplexField& b = p.orbitals[1];
  const cplx lhs = inner(a, kinetic_apply(b, 0.5));
  const cplx rhs = inner(kinetic_apply(a, 0.5), b);
  CHECK(std::abs(lhs - rhs) < 1e-12);
}

TEST_CASE("energies decompose into kinetic and interaction parts") {
  const Grid g = make_grid(16, 8.0);
  const OrbitalSet p = random_bump_family(3, g, 21, 1.0, 0.7);
  const RealDensity rho = density(p);
  const double T = kinetic_energy(p), D = direct_energy(rho, rho), X = exchange_energy(p);
  CHECK(hartree_energy(p) == doctest::Approx(T - 0.35 * D).epsilon(1e-12));
  CHECK(hartree_fock_energy(p) == doctest::Approx(T - 0.35 * (D - X)).epsilon(1e-12));
  CHECK(particle_number(p) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(X > 0.0);
  CHECK(X < D);
}

TEST_CASE("a single orbital carries no net Hartree-Fock interaction") {
  const Grid g = make_grid(16, 8.0);
  const OrbitalSet p = random_bump_family(1, g, 3, 0.0, 1.0);
  const RealDensity rho = density(p);
  CHECK(exchange_energy(p) == doctest::Approx(direct_energy(rho, rho)).epsilon(1e-12));
  CHECK(hartree_fock_energy(p) == doctest::Approx(kinetic_energy(p)).epsilon(1e-12));
}

TEST_CASE("Hartree term is -V psi with V = kappa (1/|x| * rho)") {
  const Grid g = make_grid(16, 8.0);
  const OrbitalSet p = random_bump_family(2, g, 4, 0.0, 1.5);
  const HartreeTerm h = hartree_term(p);
  const RealField V = coulomb_convolve(density(p));
  double err = 0.0;
  for (std::size_t i = 0; i < V.size(); ++i) {
    err = std::max(err, std::abs(h.potential[i] - 1.5 * V[i]));
    err = std::max(err, std::abs(h.applied[1][i] + h.potential[i] * p.orbitals[1][i]));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("pair potentials are Hermitian in the orbital indices") {
  const Grid g = make_grid(16, 8.0);
  const OrbitalSet p = random_bump_family(3, g, 8, 0.0, 1.0);
  const PairPotentials C(p);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(C(0, 2)[i] - std::conj(C(2, 0)[i])));
  CHECK(err == 0.0);
  // Diagonal pairs are the Coulomb potentials of |psi_k|^2 and therefore real.
  double imag = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) imag = std::max(imag, std::abs(C(1, 1)[i].imag()));
  CHECK(imag < 1e-12);
}

TEST_CASE("orbital set validation") {
  const Grid g = make_grid(8, 4.0);
  OrbitalSet p({ComplexField(g)}, 1.0, 1.0);
  CHECK_NOTHROW(p.validate());
  p.mass = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.mass = 1.0;
  p.kappa = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.kappa = 1.0;
  p.orbitals.push_back(ComplexField(make_grid(10, 4.0)));
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
