#include "prhf/variational.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "prhf/diagnostics.hpp"
#include "prhf/initial_data.hpp"

namespace prhf {

std::string_view flow_outcome_name(FlowOutcome o) {
  switch (o) {
    case FlowOutcome::Converged: return "converged";
    case FlowOutcome::Collapsed: return "collapsed";
    case FlowOutcome::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

// Mean-field pieces at one state, shared by the step, the energy and the residual.
struct Evaluation {
  RealField potential;                // kappa * (1/|x| * rho)
  std::vector<ComplexField> exchange; // HF only
  double kinetic = 0.0;
  double energy = 0.0;
};

Evaluation evaluate(const OrbitalSet& psi, Model model) {
  Evaluation ev;
  const RealDensity rho = density(psi);
  ev.potential = coulomb_convolve(rho);
  for (auto& v : ev.potential.values) v *= psi.kappa;
  ev.kinetic = kinetic_energy(psi);
  const double pot = psi.grid().cell_volume() *
                     pairwise_sum(rho.size(), [&](std::size_t i) { return rho[i] * ev.potential[i]; });
  ev.energy = ev.kinetic - 0.5 * pot;
  if (model == Model::HartreeFock) {
    const PairPotentials pairs(psi);
    ev.exchange = exchange_term(psi, pairs);
    ev.energy += 0.5 * psi.kappa * exchange_energy(psi, pairs);
  }
  return ev;
}

// H psi_k = T psi_k - V psi_k + X_k.
std::vector<ComplexField> apply_mean_field(const OrbitalSet& psi, const Evaluation& ev) {
  const SpectralSymbol kin = kinetic_symbol(psi.grid(), psi.mass);
  std::vector<ComplexField> out(psi.count());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < psi.count(); ++k) {
    ComplexField h = apply_multiplier(psi.orbitals[k], kin);
    const auto& f = psi.orbitals[k];
    for (std::size_t i = 0; i < h.size(); ++i) h[i] -= ev.potential[i] * f[i];
    if (!ev.exchange.empty())
      for (std::size_t i = 0; i < h.size(); ++i) h[i] += ev.exchange[k][i];
    out[k] = std::move(h);
  }
  return out;
}

// r_k = H psi_k - sum_l psi_l <psi_l, H psi_k>.
std::vector<ComplexField> projected_gradient(const OrbitalSet& psi, const Evaluation& ev) {
  auto h = apply_mean_field(psi, ev);
  const std::size_t n = psi.count();
  std::vector<ComplexField> r(n);
  for (std::size_t k = 0; k < n; ++k) {
    ComplexField rk = h[k];
    for (std::size_t l = 0; l < n; ++l) {
      const cplx c = inner(psi.orbitals[l], h[k]);
      const auto& f = psi.orbitals[l];
      for (std::size_t i = 0; i < rk.size(); ++i) rk[i] -= c * f[i];
    }
    r[k] = std::move(rk);
  }
  return r;
}

double gradient_norm(const std::vector<ComplexField>& r) {
  std::vector<double> parts;
  for (const auto& f : r) parts.push_back(norm_sq(f));
  return std::sqrt(pairwise_sum(parts));
}

double projected_residual(const OrbitalSet& psi, const Evaluation& ev) {
  return gradient_norm(projected_gradient(psi, ev));
}

}  // namespace

double energy_gradient_norm(const OrbitalSet& psi, Model model) {
  return projected_residual(psi, evaluate(psi, model));
}

FlowResult gradient_flow_ground_state(const OrbitalSet& psi0, const FlowParams& params) {
  if (!(params.tau > 0.0)) throw std::invalid_argument("gradient flow: tau must be positive");
  FlowResult res;
  res.psi = loewdin_orthonormalize(psi0);
  OrbitalSet& psi = res.psi;
  const Grid& g = psi.grid();
  const SpectralSymbol precond(g, [&](double kx, double ky, double kz) {
    return 1.0 / (1.0 + params.tau * std::sqrt(kx * kx + ky * ky + kz * kz + psi.mass * psi.mass));
  });

  const BlowUpPolicy policy{params.sigma_factor, params.tail_max, std::numeric_limits<double>::infinity()};
  const double sigma0 = sigma(psi);
  Evaluation ev = evaluate(psi, params.model);
  res.energies.push_back(ev.energy);

  for (int it = 1; it <= params.max_iterations; ++it) {
    const auto grad = projected_gradient(psi, ev);
    OrbitalSet next = psi;
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < psi.count(); ++k) {
      const ComplexField step = apply_multiplier(grad[k], precond);
      auto& f = next.orbitals[k];
      for (std::size_t i = 0; i < f.size(); ++i) f[i] -= params.tau * step[i];
    }
    next = loewdin_orthonormalize(next);
    Evaluation ev_next = evaluate(next, params.model);

    const double e_old = ev.energy, e_new = ev_next.energy;
    if (e_new > e_old + 1e-11 * std::max(1.0, std::abs(e_old))) {
      std::ostringstream msg;
      msg << "gradient flow: energy increased from " << e_old << " to " << e_new << " at iteration " << it;
      throw StepSizeError(msg.str(), params.tau, 0.0);
    }
    psi = std::move(next);
    ev = std::move(ev_next);
    res.energies.push_back(ev.energy);
    res.iterations = it;

    TimeSeriesRecord r;
    r.t = it;
    r.sigma = sigma(psi);
    r.spectral_tail_fraction = spectral_tail_fraction(psi);
    const auto verdict = classify(r, sigma0, policy);
    if (verdict.kind != TerminationReason::Kind::Completed || r.sigma > params.sigma_factor * sigma0) {
      res.outcome = FlowOutcome::Collapsed;
      break;
    }
    if (std::abs(e_new - e_old) < params.tolerance * std::max(1.0, std::abs(e_new))) {
      res.residual = projected_residual(psi, ev);
      if (res.residual <= params.residual_factor * std::sqrt(params.tolerance)) {
        res.outcome = FlowOutcome::Converged;
        res.converged = true;
        break;
      }
    }
  }
  res.energy = ev.energy;
  return res;
}

OrbitalSet critical_trial_family(int particles, const Grid& g, double mass) {
  if (particles == 1) return gaussian_family({GaussianSpec{{0.0, 0.0, 0.0}, std::max(3.0 * g.length() / 32.0, 3.0 * g.dx())}}, g, mass, 1.0);
  return ball_shell_eigenstates(BallShellSpec{particles, g.length() / 8.0, std::nullopt}, g, mass, 1.0);
}

CriticalCouplingResult critical_coupling(int particles, double mass, const Grid& g, const BisectionParams& params) {
  if (!(params.lower > 0.0) || !(params.upper > params.lower))
    throw std::invalid_argument("critical coupling: need 0 < lower < upper");
  shell_plan(particles);  // rejects incomplete counts
  const OrbitalSet trial = critical_trial_family(particles, g, mass);
  const double n23 = std::pow(double(particles), 2.0 / 3.0);

  CriticalCouplingResult res;
  res.n = g.n();
  res.box_length = g.length();
  res.particles = particles;
  res.mass = mass;

  auto run = [&](double coupling) {
    OrbitalSet psi = trial;
    psi.kappa = coupling / n23;
    const FlowResult fr = gradient_flow_ground_state(psi, params.flow);
    res.history.push_back({coupling, fr.outcome, fr.iterations, fr.energy});
    return fr.outcome == FlowOutcome::Collapsed;
  };

  double lo = params.lower, hi = params.upper;
  if (run(lo)) throw BracketError("critical coupling: lower end already collapses");
  if (!run(hi)) throw BracketError("critical coupling: upper end does not collapse");
  for (int b = 0; b < params.max_bisections && hi / lo - 1.0 > params.relative_width; ++b) {
    const double mid = std::sqrt(lo * hi);
    if (run(mid))
      hi = mid;
    else
      lo = mid;
  }
  res.stable_side = lo;
  res.collapse_side = hi;
  res.kappa_cr_measured = std::sqrt(lo * hi);

  for (const auto& a : res.history)
    for (const auto& b : res.history)
      if (a.outcome == FlowOutcome::Collapsed && b.coupling > a.coupling && b.outcome != FlowOutcome::Collapsed)
        res.monotone = false;
  return res;
}

double integral_rho_four_thirds(const RealDensity& rho) {
  return rho.grid.cell_volume() *
         pairwise_sum(rho.size(), [&](std::size_t i) { return std::pow(std::max(rho[i], 0.0), 4.0 / 3.0); });
}

InequalityReport daubechies_check(const OrbitalSet& psi, const std::string& witness) {
  const Eigen::MatrixXcd G = gram(psi);
  const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(G, Eigen::EigenvaluesOnly).eigenvalues();
  if (lam.minCoeff() < -1e-10 || lam.maxCoeff() > 1.0 + 1e-10) {
    std::ostringstream msg;
    msg << "daubechies_check: Gram matrix must satisfy 0 <= G <= 1 (eigenvalues in [" << lam.minCoeff() << ", "
        << lam.maxCoeff() << "])";
    throw std::invalid_argument(msg.str());
  }
  InequalityReport r;
  r.name = "daubechies";
  r.witness = witness;
  r.lhs = sigma(psi);
  r.rhs = kDaubechiesConstant * integral_rho_four_thirds(density(psi));
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 1.0;
  r.pass = r.lhs >= r.rhs * (1.0 - 1e-6);
  return r;
}

InequalityReport hls_check(const RealDensity& rho, const std::string& witness, double threshold) {
  const double mass = integrate(rho);
  const double q = integral_rho_four_thirds(rho);
  if (!(mass > 0.0) || !(q > 0.0)) throw std::invalid_argument("hls_check: density must be nonzero");
  InequalityReport r;
  r.name = "hls";
  r.witness = witness;
  r.lhs = direct_energy(rho, rho);
  r.rhs = std::pow(mass, 2.0 / 3.0) * q;
  r.ratio = r.lhs / r.rhs;
  r.pass = r.ratio <= threshold;
  return r;
}

EigenResult relativistic_lowest_eigenvalue(const RealField& U, double c, double tolerance, int max_iterations) {
  const Grid& g = U.grid;
  if (!(c > 0.0)) throw std::invalid_argument("lowest eigenvalue: c must be positive");
  double umax = 0.0;
  for (double u : U.values) {
    if (!(u >= 0.0) || !std::isfinite(u)) throw std::invalid_argument("lowest eigenvalue: U must be >= 0 and finite");
    umax = std::max(umax, u);
  }
  const SpectralSymbol absk = abs_k_symbol(g);
  auto apply = [&](const ComplexField& v) {
    ComplexField out = apply_multiplier(v, absk);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= c * U[i] * v[i];
    return out;
  };
  // (|k| + shift)^{-1}, with the shift keeping the preconditioner positive.
  const double shift = 1.0 / g.length() + c * umax;
  const SpectralSymbol precond(g, [&](double kx, double ky, double kz) {
    return 1.0 / (std::sqrt(kx * kx + ky * ky + kz * kz) + shift);
  });

  auto normalize = [](ComplexField& v) {
    const double n = std::sqrt(norm_sq(v));
    for (auto& z : v.values) z /= n;
    return n;
  };

  // Start from a broad bump centered on the deepest point of the well.
  std::size_t imax = 0;
  for (std::size_t i = 0; i < U.size(); ++i)
    if (U[i] > U[imax]) imax = i;
  const int n = g.n();
  const int ci = int(imax % n), cj = int((imax / n) % n), ck = int(imax / (std::size_t(n) * n));
  GaussianSpec start{{g.coordinate(ci), g.coordinate(cj), g.coordinate(ck)}, g.length() / 6.0};
  ComplexField x = gaussian_orbital(g, start);
  for (auto& z : x.values) z += 1e-3;
  normalize(x);

  EigenResult res;
  ComplexField ax = apply(x);
  double lambda = inner(x, ax).real();
  ComplexField p;
  for (int it = 0; it < max_iterations; ++it) {
    ComplexField r = ax;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= lambda * x[i];
    res.residual = std::sqrt(norm_sq(r));
    res.iterations = it;
    if (res.residual <= tolerance) break;

    // Rayleigh-Ritz on span{x, P r, p}, orthonormalized by Gram-Schmidt.
    std::vector<ComplexField> basis{x};
    auto add = [&](ComplexField v) {
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) {
          const cplx cc = inner(b, v);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] -= cc * b[i];
        }
      const double nv = std::sqrt(norm_sq(v));
      if (nv > 1e-12) {
        for (auto& z : v.values) z /= nv;
        basis.push_back(std::move(v));
      }
    };
    add(apply_multiplier(r, precond));
    if (!p.values.empty()) add(p);

    const auto m = Eigen::Index(basis.size());
    std::vector<ComplexField> abasis;
    abasis.push_back(ax);
    for (std::size_t b = 1; b < basis.size(); ++b) abasis.push_back(apply(basis[b]));
    Eigen::MatrixXcd H(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = a; b < m; ++b) {
        const cplx v = inner(basis[a], abasis[b]);
        H(a, b) = v;
        H(b, a) = std::conj(v);
      }
    for (Eigen::Index a = 0; a < m; ++a) H(a, a) = H(a, a).real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(H);
    const Eigen::VectorXcd y = eig.eigenvectors().col(0);

    ComplexField xn(g), axn(g), pn(g);
    for (Eigen::Index a = 0; a < m; ++a) {
      const cplx w = y(a);
      for (std::size_t i = 0; i < xn.size(); ++i) {
        xn[i] += w * basis[a][i];
        axn[i] += w * abasis[a][i];
        if (a > 0) pn[i] += w * basis[a][i];
      }
    }
    const double nx = normalize(xn);
    for (auto& z : axn.values) z /= nx;
    x = std::move(xn);
    ax = std::move(axn);
    p = std::move(pn);
    lambda = inner(x, ax).real();
    // Recompute A x occasionally to stop the recurrence from drifting.
    if (it % 20 == 19) {
      ax = apply(x);
      lambda = inner(x, ax).real();
    }
  }
  if (res.residual > tolerance) {
    std::ostringstream msg;
    msg << "lowest eigenvalue: no convergence after " << max_iterations << " iterations (residual " << res.residual
        << ")";
    throw std::runtime_error(msg.str());
  }
  res.eigenvalue = lambda;
  res.vector = std::move(x);
  return res;
}

HeuristicStarResult chandrasekhar_heuristic_kappa(double kappa, double N, double m) {
  if (!(kappa > 0.0) || !(N > 0.0) || !(m >= 0.0)) throw std::invalid_argument("heuristic: need kappa, N > 0, m >= 0");
  HeuristicStarResult r;
  r.kappa = kappa;
  r.N_cr = std::pow(2.0 / kappa, 1.5);
  r.M_cr = r.N_cr;
  const double beta = 0.5 * kappa * std::pow(N, 2.0 / 3.0);
  if (beta > 1.0) {
    r.bounded = false;
    r.energy = -std::numeric_limits<double>::infinity();
    r.p_star = std::numeric_limits<double>::infinity();
    r.radius = 0.0;
    return r;
  }
  const double gamma = std::sqrt(1.0 - beta * beta);
  r.energy = N * m * gamma;
  r.p_star = gamma > 0.0 ? m * beta / gamma : std::numeric_limits<double>::infinity();
  r.radius = r.p_star > 0.0 ? std::cbrt(N) / r.p_star : std::numeric_limits<double>::infinity();
  return r;
}

HeuristicStarResult chandrasekhar_heuristic(const HeuristicStarParams& p) {
  if (!(p.N > 0.0) || !(p.Z > 0.0) || !(p.m > 0.0) || !(p.m_Z > 0.0) || !(p.G > 0.0))
    throw std::invalid_argument("heuristic: all parameters must be positive");
  if (p.m_Z < p.m) throw std::invalid_argument("heuristic: need m_Z >= m");
  const double kappa = p.G * p.m_Z * p.m_Z / (p.Z * p.Z);
  HeuristicStarResult r = chandrasekhar_heuristic_kappa(kappa, p.N, p.m);
  r.N_cr_printed = std::pow(p.G * p.m_Z, -1.5) * p.Z * p.Z * p.Z;
  r.M_cr = r.N_cr * p.m_Z / p.Z;
  return r;
}

}  // namespace prhf
