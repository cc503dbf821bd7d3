#include "prhf/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace prhf {

std::string_view scheme_name(Scheme s) { return s == Scheme::Strang ? "strang" : "rk4"; }

Scheme parse_scheme(std::string_view name) {
  if (name == "strang") return Scheme::Strang;
  if (name == "rk4") return Scheme::RK4;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "' (expected strang or rk4)");
}

std::string_view termination_name(TerminationReason::Kind k) {
  switch (k) {
    case TerminationReason::Kind::Completed: return "Completed";
    case TerminationReason::Kind::BlowUpDetected: return "BlowUpDetected";
    case TerminationReason::Kind::ResolutionLoss: return "ResolutionLoss";
    case TerminationReason::Kind::BoundaryLeak: return "BoundaryLeak";
  }
  return "Unknown";
}

int exit_code(TerminationReason::Kind k) {
  switch (k) {
    case TerminationReason::Kind::Completed: return 0;
    case TerminationReason::Kind::BlowUpDetected: return 2;
    case TerminationReason::Kind::ResolutionLoss: return 3;
    case TerminationReason::Kind::BoundaryLeak: return 4;
  }
  return 1;
}

namespace {

// e^{-i tau sqrt(k^2+m^2)} on the lattice, cached for the last few (grid, m, tau).
std::shared_ptr<const CVec> kinetic_phase(const Grid& g, double mass, double tau) {
  using Key = std::tuple<int, double, double, double>;
  static std::mutex mutex;
  static std::deque<std::pair<Key, std::shared_ptr<const CVec>>> cache;
  const Key key{g.n(), g.length(), mass, tau};
  std::lock_guard<std::mutex> lock(mutex);
  for (const auto& [k, v] : cache)
    if (k == key) return v;
  const SpectralSymbol s = kinetic_symbol(g, mass);
  auto table = std::make_shared<CVec>(g.size());
  const auto w = s.table();
  for (std::size_t i = 0; i < table->size(); ++i) (*table)[i] = std::polar(1.0, -tau * w[i]);
  if (cache.size() >= 4) cache.pop_front();
  cache.emplace_back(key, table);
  return table;
}

void kinetic_flow(OrbitalSet& psi, double tau) {
  const Grid& g = psi.grid();
  const auto phase = kinetic_phase(g, psi.mass, tau);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < psi.count(); ++k) {
    ComplexField& f = psi.orbitals[k];
    CVec spec(g.size());
    fft_forward(g, f.values.data(), spec.data());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= (*phase)[i];
    fft_inverse(g, spec.data(), f.values.data());
  }
}

double max_abs(const RealField& v) {
  double m = 0.0;
  for (double x : v.values) m = std::max(m, std::abs(x));
  return m;
}

RealField direct_potential(const OrbitalSet& psi) {
  RealField v = coulomb_convolve(density(psi));
  for (auto& x : v.values) x *= psi.kappa;
  return v;
}

void check_dt(double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive and finite");
}

// A phi = -V phi + kappa sum_l psi_l (1/|x| * conj(psi_l) phi) with the psi_l
// and V frozen. Self-adjoint for the grid inner product, and unchanged when
// the psi_l are mixed by a unitary matrix.
class MeanFieldOperator {
 public:
  MeanFieldOperator(const OrbitalSet& ref, RealField v)
      : ref_(ref), v_(std::move(v)), kernel_(CoulombKernel::for_grid(ref.grid())) {}

  ComplexField operator()(const ComplexField& phi) const {
    const Grid& g = phi.grid;
    ComplexField out(g);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -v_[i] * phi[i];
    ComplexField prod(g);
    for (const auto& psi : ref_.orbitals) {
      for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = std::conj(psi[i]) * phi[i];
      const ComplexField c = kernel_->convolve(prod);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += ref_.kappa * psi[i] * c[i];
    }
    return out;
  }

 private:
  const OrbitalSet& ref_;
  RealField v_;
  std::shared_ptr<const CoulombKernel> kernel_;
};

// exp(-i tau A) b by Lanczos with full reorthogonalization.
ComplexField lanczos_exp(const MeanFieldOperator& A, const ComplexField& b, double tau) {
  constexpr int max_dim = 64;
  constexpr double tol = 1e-14;
  const double beta0 = std::sqrt(norm_sq(b));
  if (beta0 == 0.0) return b;

  std::vector<ComplexField> basis;
  std::vector<double> alpha, beta;
  ComplexField q = b;
  for (auto& z : q.values) z /= beta0;
  basis.push_back(std::move(q));

  Eigen::VectorXcd y;
  for (int j = 0; j < max_dim; ++j) {
    ComplexField w = A(basis[j]);
    alpha.push_back(inner(basis[j], w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& v : basis) {
        const cplx c = inner(v, w);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= c * v[i];
      }
    const double next = std::sqrt(norm_sq(w));

    const auto m = Eigen::Index(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) T(i, i) = alpha[i];
    for (Eigen::Index i = 0; i + 1 < m; ++i) T(i, i + 1) = T(i + 1, i) = beta[i];
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
    Eigen::VectorXcd phase(m);
    for (Eigen::Index i = 0; i < m; ++i) phase(i) = std::polar(1.0, -tau * eig.eigenvalues()(i));
    y = eig.eigenvectors().cast<cplx>() * phase.asDiagonal() * eig.eigenvectors().row(0).transpose().cast<cplx>();

    if (next * std::abs(y(m - 1)) <= tol || next <= tol) break;
    if (j + 1 == max_dim) throw std::runtime_error("lanczos_exp: no convergence; reduce dt");
    beta.push_back(next);
    for (auto& z : w.values) z /= next;
    basis.push_back(std::move(w));
  }
  ComplexField out(b.grid);
  for (Eigen::Index a = 0; a < y.size(); ++a)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += beta0 * y(a) * basis[a][i];
  return out;
}

// psi <- exp(-i tau A) psi for every orbital.
OrbitalSet propagate(const MeanFieldOperator& A, const OrbitalSet& psi, double tau) {
  OrbitalSet out = psi;
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < psi.count(); ++k) out.orbitals[k] = lanczos_exp(A, psi.orbitals[k], tau);
  return out;
}

// Hartree-Fock potential substep. The exchange operator moves the density, so
// A is frozen at a midpoint predicted with A(psi_0); the update itself is one
// exponential of a self-adjoint operator, hence unitary.
void exchange_potential_flow(OrbitalSet& psi, const RealField& v, double dt) {
  const OrbitalSet start = psi;
  const OrbitalSet mid = propagate(MeanFieldOperator(start, v), start, 0.5 * dt);
  psi = propagate(MeanFieldOperator(mid, direct_potential(mid)), start, dt);
}

}  // namespace

double strang_dt_max(const SimState& s, const StepOptions& opt) {
  if (opt.zero_potential) return std::numeric_limits<double>::infinity();
  const double vmax = max_abs(direct_potential(s.psi));
  return vmax > 0.0 ? std::numbers::pi / vmax : std::numeric_limits<double>::infinity();
}

double rk4_dt_max(const SimState& s, const StepOptions& opt) {
  const Grid& g = s.psi.grid();
  const double vmax = opt.zero_potential ? 0.0 : max_abs(direct_potential(s.psi));
  const double km = g.k_max();
  return opt.rk4_stability / (std::sqrt(km * km + s.psi.mass * s.psi.mass) + vmax);
}

SimState step_strang(const SimState& s, double dt, const StepOptions& opt) {
  check_dt(dt);
  SimState out = s;
  kinetic_flow(out.psi, 0.5 * dt);
  if (!opt.zero_potential) {
    const RealField v = direct_potential(out.psi);
    const double vmax = max_abs(v);
    if (dt * vmax > std::numbers::pi)
      throw StepSizeError("step_strang: dt exceeds pi/max|V|", dt, std::numbers::pi / vmax);
    if (s.model == Model::Hartree) {
      // |psi_k| is unchanged by the phase, so V stays fixed through the substep.
#pragma omp parallel for schedule(static)
      for (std::size_t k = 0; k < out.psi.count(); ++k) {
        auto& f = out.psi.orbitals[k];
        for (std::size_t i = 0; i < f.size(); ++i) f[i] *= std::polar(1.0, dt * v[i]);
      }
    } else {
      exchange_potential_flow(out.psi, v, dt);
    }
  }
  kinetic_flow(out.psi, 0.5 * dt);
  out.t = s.t + dt;
  out.step_index = s.step_index + 1;
  return out;
}

namespace {

// F(psi) = -i (T psi - V psi + X psi).
std::vector<ComplexField> right_side(const OrbitalSet& psi, Model model, bool zero_potential) {
  const std::size_t n = psi.count();
  std::vector<ComplexField> out(n);
  RealField v;
  std::vector<ComplexField> x;
  if (!zero_potential) {
    v = direct_potential(psi);
    if (model == Model::HartreeFock) x = exchange_term(psi);
  }
  const SpectralSymbol kin = kinetic_symbol(psi.grid(), psi.mass);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < n; ++k) {
    ComplexField f = apply_multiplier(psi.orbitals[k], kin);
    const auto& p = psi.orbitals[k];
    if (!zero_potential)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] -= v[i] * p[i];
    if (!x.empty())
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += x[k][i];
    for (auto& z : f.values) z = cplx(z.imag(), -z.real());
    out[k] = std::move(f);
  }
  return out;
}

OrbitalSet axpy(const OrbitalSet& psi, double a, const std::vector<ComplexField>& d) {
  OrbitalSet out = psi;
  for (std::size_t k = 0; k < out.count(); ++k)
    for (std::size_t i = 0; i < out.orbitals[k].size(); ++i) out.orbitals[k][i] += a * d[k][i];
  return out;
}

}  // namespace

SimState step_rk4(const SimState& s, double dt, const StepOptions& opt) {
  check_dt(dt);
  const double limit = rk4_dt_max(s, opt);
  if (dt > limit) throw StepSizeError("step_rk4: dt exceeds the stability bound", dt, limit);
  const auto k1 = right_side(s.psi, s.model, opt.zero_potential);
  const auto k2 = right_side(axpy(s.psi, 0.5 * dt, k1), s.model, opt.zero_potential);
  const auto k3 = right_side(axpy(s.psi, 0.5 * dt, k2), s.model, opt.zero_potential);
  const auto k4 = right_side(axpy(s.psi, dt, k3), s.model, opt.zero_potential);
  SimState out = s;
  const double w = dt / 6.0;
  for (std::size_t k = 0; k < out.psi.count(); ++k) {
    auto& f = out.psi.orbitals[k];
    for (std::size_t i = 0; i < f.size(); ++i)
      f[i] += w * (k1[k][i] + 2.0 * k2[k][i] + 2.0 * k3[k][i] + k4[k][i]);
  }
  out.t = s.t + dt;
  out.step_index = s.step_index + 1;
  return out;
}

SimState step(Scheme scheme, const SimState& s, double dt, const StepOptions& opt) {
  return scheme == Scheme::Strang ? step_strang(s, dt, opt) : step_rk4(s, dt, opt);
}

TerminationReason classify(const TimeSeriesRecord& r, double sigma_reference, const BlowUpPolicy& policy) {
  using Kind = TerminationReason::Kind;
  const double tail = r.spectral_tail_fraction;
  if (r.sigma > policy.sigma_factor * sigma_reference && tail > policy.tail_max)
    return {Kind::BlowUpDetected, r.sigma, r.t};
  if (tail > policy.tail_max) return {Kind::ResolutionLoss, tail, r.t};
  if (r.boundary_mass_fraction > policy.boundary_max) return {Kind::BoundaryLeak, r.boundary_mass_fraction, r.t};
  return {Kind::Completed, 0.0, r.t};
}

EvolveResult evolve(const SimState& s0, double T_end, double dt, double interval, const BlowUpPolicy& policy,
                    const EvolveOptions& opt) {
  check_dt(dt);
  s0.psi.validate();
  if (!(T_end >= 0.0) || !std::isfinite(T_end)) throw std::invalid_argument("evolve: T_end must be >= 0");
  if (!(interval > 0.0)) throw std::invalid_argument("evolve: diagnostic interval must be positive");
  const double ratio = interval / dt;
  const long per_tick = std::lround(ratio);
  if (per_tick < 1 || std::abs(ratio - double(per_tick)) > 1e-9 * ratio)
    throw std::invalid_argument("evolve: dt must divide the diagnostic interval");

  const std::vector<double> radii = opt.radii.empty() ? default_radii(s0.psi.grid()) : opt.radii;

  EvolveResult res;
  res.final_state = s0;
  SimState& state = res.final_state;

  auto emit = [&]() {
    TimeSeriesRecord r = record(state, radii);
    if (res.records.empty() && !opt.sigma_reference) res.sigma_reference = r.sigma;
    res.records.push_back(r);
    if (opt.on_record) opt.on_record(state, res.records.back());
    return classify(r, res.sigma_reference, policy);
  };

  if (opt.sigma_reference) res.sigma_reference = *opt.sigma_reference;
  res.reason = emit();
  if (res.reason.kind != TerminationReason::Kind::Completed) return res;

  while (state.t < T_end - 0.5 * dt) {
    state = step(opt.scheme, state, dt, opt.step);
    const bool last = !(state.t < T_end - 0.5 * dt);
    if (state.step_index % per_tick == 0 || last) {
      res.reason = emit();
      if (res.reason.kind != TerminationReason::Kind::Completed) return res;
    }
  }
  res.reason = {TerminationReason::Kind::Completed, 0.0, state.t};
  return res;
}

}  // namespace prhf
