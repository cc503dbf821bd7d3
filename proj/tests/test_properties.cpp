// Randomized invariants over seeded families.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "prhf/dynamics.hpp"
#include "prhf/initial_data.hpp"
#include "prhf/variational.hpp"

using namespace prhf;

namespace {

double distance(const OrbitalSet& a, const OrbitalSet& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.count(); ++k) {
    ComplexField diff = a.orbitals[k];
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= b.orbitals[k][i];
    d += norm_sq(diff);
  }
  return std::sqrt(d);
}

OrbitalSet conjugate(OrbitalSet p) {
  for (auto& f : p.orbitals)
    for (auto& z : f.values) z = std::conj(z);
  return p;
}

Eigen::MatrixXcd random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Eigen::MatrixXcd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = {d(rng), d(rng)};
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(A).householderQ();
}

OrbitalSet mix(const OrbitalSet& p, const Eigen::MatrixXcd& U) {
  OrbitalSet out = p;
  for (std::size_t k = 0; k < p.count(); ++k) {
    auto& f = out.orbitals[k];
    for (auto& z : f.values) z = 0.0;
    for (std::size_t l = 0; l < p.count(); ++l)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += p.orbitals[l][i] * U(l, k);
  }
  return out;
}

}  // namespace

TEST_CASE("Strang keeps the Gram matrix for random families and step sizes") {
  const Grid g = make_grid(16, 8.0);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.01, 0.2);
  for (int trial = 0; trial < 6; ++trial) {
    SimState s;
    s.psi = random_bump_family(1 + trial % 3, g, 100 + trial, trial % 2 ? 0.0 : 1.0, 0.5 + trial);
    s.model = trial % 2 ? Model::HartreeFock : Model::Hartree;
    const Eigen::MatrixXcd G0 = gram(s.psi);
    const double dt = std::min(u(rng), 0.9 * strang_dt_max(s));
    for (int i = 0; i < 4; ++i) s = step_strang(s, dt);
    CHECK((gram(s.psi) - G0).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("Hartree Strang step is time-reversible") {
  const Grid g = make_grid(16, 8.0);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SimState s;
    s.psi = random_bump_family(2, g, seed, 1.0, 2.0);
    SimState f = step_strang(s, 0.1);
    f.psi = conjugate(f.psi);
    SimState back = step_strang(f, 0.1);
    back.psi = conjugate(back.psi);
    CHECK(distance(back.psi, s.psi) < 1e-12);
  }
}

TEST_CASE("unitary mixing commutes with the flow") {
  const Grid g = make_grid(16, 8.0);
  std::mt19937_64 rng(7);
  for (Model model : {Model::Hartree, Model::HartreeFock}) {
    SimState s;
    s.psi = random_bump_family(3, g, 55, 1.0, 1.5);
    s.model = model;
    const Eigen::MatrixXcd U = random_unitary(3, rng);
    SimState a = s, b = s;
    b.psi = mix(s.psi, U);
    for (int i = 0; i < 5; ++i) {
      a = step_strang(a, 0.05);
      b = step_strang(b, 0.05);
    }
    CHECK(distance(mix(a.psi, U), b.psi) < 1e-11);
    CHECK(model_energy(a.psi, model) == doctest::Approx(model_energy(b.psi, model)).epsilon(1e-12));
  }
}

TEST_CASE("energy error shrinks with the step size") {
  const Grid g = make_grid(16, 8.0);
  SimState s;
  s.psi = random_bump_family(2, g, 31, 1.0, 1.0);
  const double e0 = hartree_energy(s.psi);
  auto drift = [&](double dt) {
    SimState t = s;
    for (int i = 0; i < int(std::lround(0.4 / dt)); ++i) t = step_strang(t, dt);
    return std::abs(hartree_energy(t.psi) - e0);
  };
  CHECK(drift(0.05) < drift(0.1));
  CHECK(drift(0.1) < 1e-3 * std::abs(e0));
}

TEST_CASE("Daubechies and HLS hold on random families") {
  const Grid g = make_grid(24, 12.0);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    OrbitalSet p = random_bump_family(1 + trial % 4, g, rng(), 0.0, 1.0);
    if (trial % 3 == 0)
      for (auto& f : p.orbitals)
        for (auto& z : f.values) z *= 0.6;
    CHECK(daubechies_check(p).pass);
    CHECK(hls_check(density(p)).pass);
  }
}

TEST_CASE("Coulomb convolution commutes with whole-cell shifts") {
  const Grid g = make_grid(48, 16.0);
  const RealDensity a = density(gaussian_family({{{0, 0, 0}, 1.0}}, g, 0.0, 1.0));
  const RealDensity b = density(gaussian_family({{{2.0, -1.0, 1.0}, 1.0}}, g, 0.0, 1.0));
  const RealField Va = coulomb_convolve(a), Vb = coulomb_convolve(b);
  // The shift is (6, -3, 3) cells.
  double err = 0.0;
  for (int k = 6; k < 42; ++k)
    for (int j = 6; j < 42; ++j)
      for (int i = 6; i < 42; ++i)
        err = std::max(err, std::abs(Vb[g.index(i + 6, j - 3, k + 3)] - Va[g.index(i, j, k)]));
  CHECK(err < 1e-10);
  CHECK(direct_energy(a, a) == doctest::Approx(direct_energy(b, b)).epsilon(1e-10));
}

TEST_CASE("resampling composes") {
  const Grid g = make_grid(32, 16.0);
  const ComplexField f = gaussian_orbital(g, {{0.3, 0, -0.2}, 1.0});
  const ComplexField a = band_limited_resample(band_limited_resample(f, 1.2), 1.25);
  const ComplexField b = band_limited_resample(f, 1.5);
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  CHECK(err < 1e-6);
}

TEST_CASE("mass in a ball is monotone in the radius") {
  const Grid g = make_grid(24, 12.0);
  const OrbitalSet p = random_bump_family(3, g, 8, 0.0, 1.0);
  double prev = 0.0;
  for (double R = 0.5; R < 6.0; R += 0.5) {
    const double m = mass_in_ball(p, R);
    CHECK(m >= prev);
    CHECK(m <= 3.0 + 1e-12);
    prev = m;
  }
}
