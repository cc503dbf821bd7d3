#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "prhf/dynamics.hpp"
#include "prhf/initial_data.hpp"

using namespace prhf;

namespace {

SimState bumps(int count, const Grid& g, std::uint64_t seed, double mass, double kappa, Model model = Model::Hartree) {
  SimState s;
  s.psi = random_bump_family(count, g, seed, mass, kappa);
  s.model = model;
  return s;
}

double distance(const OrbitalSet& a, const OrbitalSet& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.count(); ++k) {
    ComplexField diff = a.orbitals[k];
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] -= b.orbitals[k][i];
    d += norm_sq(diff);
  }
  return std::sqrt(d);
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  CHECK(parse_scheme(scheme_name(Scheme::Strang)) == Scheme::Strang);
  CHECK(parse_scheme(scheme_name(Scheme::RK4)) == Scheme::RK4);
  CHECK_THROWS_AS(parse_scheme("euler"), std::invalid_argument);
}

TEST_CASE("free Strang step multiplies each mode by exp(-i dt sqrt(k^2+m^2))") {
  const Grid g = make_grid(16, 6.0);
  const double m = 0.8, dt = 0.37;
  SimState s = bumps(1, g, 2, m, 1.0);
  const ComplexField before = to_spectral(s.psi.orbitals[0]);
  StepOptions opt;
  opt.zero_potential = true;
  const SimState next = step_strang(s, dt, opt);
  const ComplexField after = to_spectral(next.psi.orbitals[0]);
  double err = 0.0;
  for (int k = 0; k < g.n(); ++k)
    for (int j = 0; j < g.n(); ++j)
      for (int i = 0; i < g.n(); ++i) {
        const double kx = g.wavenumber(i), ky = g.wavenumber(j), kz = g.wavenumber(k);
        const double w = std::sqrt(kx * kx + ky * ky + kz * kz + m * m);
        const std::size_t p = g.index(i, j, k);
        err = std::max(err, std::abs(after[p] - std::polar(1.0, -dt * w) * before[p]) / double(g.size()));
      }
  CHECK(err < 1e-12);
}

TEST_CASE("Strang step is unitary for both models") {
  const Grid g = make_grid(16, 8.0);
  for (Model model : {Model::Hartree, Model::HartreeFock}) {
    SimState s = bumps(3, g, 5, 1.0, 2.0, model);
    for (int i = 0; i < 5; ++i) s = step_strang(s, 0.05);
    const Eigen::MatrixXcd G = gram(s.psi);
    CHECK((G - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s.step_index == 5);
    CHECK(s.t == doctest::Approx(0.25));
  }
}

TEST_CASE("Strang and RK4 agree on a short interval") {
  const Grid g = make_grid(16, 8.0);
  for (Model model : {Model::Hartree, Model::HartreeFock}) {
    SimState a = bumps(2, g, 7, 1.0, 1.0, model), b = a;
    for (int i = 0; i < 40; ++i) a = step_strang(a, 0.0025);
    for (int i = 0; i < 20; ++i) b = step_rk4(b, 0.005);
    CHECK(distance(a.psi, b.psi) < 1e-4);
  }
}

TEST_CASE("step size guards") {
  const Grid g = make_grid(16, 8.0);
  SimState s = bumps(1, g, 1, 1.0, 50.0);
  const double strang_max = strang_dt_max(s);
  CHECK(strang_max > 0.0);
  CHECK_THROWS_AS(step_strang(s, 1.01 * strang_max), StepSizeError);
  CHECK_NOTHROW(step_strang(s, 0.99 * strang_max));
  const double rk_max = rk4_dt_max(s);
  CHECK(rk_max < 2.8 / g.k_max());
  try {
    step_rk4(s, 2.0 * rk_max);
    FAIL("expected StepSizeError");
  } catch (const StepSizeError& e) {
    CHECK(e.dt() == doctest::Approx(2.0 * rk_max));
    CHECK(e.dt_max() == doctest::Approx(rk_max));
  }
  CHECK_THROWS_AS(step_strang(s, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(step_strang(s, -0.1), std::invalid_argument);
}

TEST_CASE("classification precedence") {
  using Kind = TerminationReason::Kind;
  const BlowUpPolicy policy;
  TimeSeriesRecord r;
  r.sigma = 1.0;
  CHECK(classify(r, 1.0, policy).kind == Kind::Completed);
  r.boundary_mass_fraction = 2e-3;
  CHECK(classify(r, 1.0, policy).kind == Kind::BoundaryLeak);
  r.spectral_tail_fraction = 0.2;
  CHECK(classify(r, 1.0, policy).kind == Kind::ResolutionLoss);
  r.sigma = 11.0;
  const TerminationReason t = classify(r, 1.0, policy);
  CHECK(t.kind == Kind::BlowUpDetected);
  CHECK(t.value == 11.0);
  // Large sigma alone is not blow-up.
  r.spectral_tail_fraction = 0.0;
  r.boundary_mass_fraction = 0.0;
  CHECK(classify(r, 1.0, policy).kind == Kind::Completed);
}

TEST_CASE("exit codes") {
  using Kind = TerminationReason::Kind;
  CHECK(exit_code(Kind::Completed) == 0);
  CHECK(exit_code(Kind::BlowUpDetected) == 2);
  CHECK(exit_code(Kind::ResolutionLoss) == 3);
  CHECK(exit_code(Kind::BoundaryLeak) == 4);
  CHECK(termination_name(Kind::BoundaryLeak) == "BoundaryLeak");
}

TEST_CASE("evolve record cadence") {
  const Grid g = make_grid(32, 12.0);
  SimState s;
  s.psi = gaussian_family({{{0, 0, 0}, 1.2}}, g, 1.0, 0.5);
  SUBCASE("T_end = 0 gives one record") {
    const EvolveResult r = evolve(s, 0.0, 0.1, 0.1);
    CHECK(r.records.size() == 1);
    CHECK(r.reason.kind == TerminationReason::Kind::Completed);
  }
  SUBCASE("interval multiples plus the final state") {
    int calls = 0;
    EvolveOptions opt;
    opt.on_record = [&](const SimState&, const TimeSeriesRecord&) { ++calls; };
    const EvolveResult r = evolve(s, 1.0, 0.1, 0.3, {}, opt);
    REQUIRE(r.records.size() == 5);
    CHECK(calls == 5);
    CHECK(r.records[1].t == doctest::Approx(0.3));
    CHECK(r.records[3].t == doctest::Approx(0.9));
    CHECK(r.records[4].t == doctest::Approx(1.0));
    CHECK(r.final_state.step_index == 10);
    CHECK(r.sigma_reference == r.records[0].sigma);
  }
  SUBCASE("interval must be a multiple of dt") {
    CHECK_THROWS_AS(evolve(s, 1.0, 0.1, 0.25), std::invalid_argument);
    CHECK_THROWS_AS(evolve(s, 1.0, 0.1, 0.05), std::invalid_argument);
  }
}

TEST_CASE("evolve stops at the first firing detector") {
  const Grid g = make_grid(16, 8.0);
  SimState s;
  s.psi = gaussian_family({{{2.4, 0, 0}, 1.5}}, g, 1.0, 0.1);
  BlowUpPolicy policy;
  policy.boundary_max = 1e-6;
  const EvolveResult r = evolve(s, 5.0, 0.1, 0.1, policy);
  CHECK(r.reason.kind == TerminationReason::Kind::BoundaryLeak);
  CHECK(r.reason.value > 1e-6);
  CHECK(r.reason.t == r.records.back().t);
}

TEST_CASE("sigma reference can be supplied for restarts") {
  const Grid g = make_grid(32, 12.0);
  SimState s;
  s.psi = gaussian_family({{{0, 0, 0}, 1.2}}, g, 1.0, 0.5);
  EvolveOptions opt;
  opt.sigma_reference = 0.123;
  CHECK(evolve(s, 0.2, 0.1, 0.1, {}, opt).sigma_reference == 0.123);
}
