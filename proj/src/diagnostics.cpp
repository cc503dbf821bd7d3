#include "prhf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prhf {

std::string_view model_name(Model m) { return m == Model::Hartree ? "hartree" : "hartree_fock"; }

Model parse_model(std::string_view name) {
  if (name == "hartree") return Model::Hartree;
  if (name == "hartree_fock") return Model::HartreeFock;
  throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected hartree or hartree_fock)");
}

double model_energy(const OrbitalSet& psi, Model model) {
  return model == Model::Hartree ? hartree_energy(psi) : hartree_fock_energy(psi);
}

namespace {

// i*k_j for FFT index idx, with the unpaired Nyquist mode sent to zero so the
// derivative of a real field stays real.
cplx derivative_factor(const Grid& g, int idx) {
  if (idx == g.n() / 2) return {0.0, 0.0};
  return {0.0, g.wavenumber(idx)};
}

// d/dx_axis of a field given by its spectrum.
ComplexField spectral_derivative(const ComplexField& spec, int axis) {
  const Grid& g = spec.grid;
  const int n = g.n();
  ComplexField d(g, Space::Spectral);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const int idx = axis == 0 ? i : axis == 1 ? j : k;
        const std::size_t p = g.index(i, j, k);
        d[p] = derivative_factor(g, idx) * spec[p];
      }
  return to_position(d);
}

struct SpectralSums {
  double sigma = 0.0;
  double tail = 0.0;
};

SpectralSums spectral_sums(const ComplexField& f) {
  const Grid& g = f.grid;
  const ComplexField spec = to_spectral(f);
  const SpectralSymbol absk = abs_k_symbol(g);
  const auto table = absk.table();
  const double cut = 0.5 * g.k_nyquist();
  const double w = g.cell_volume() / double(g.size());
  SpectralSums s;
  s.sigma = w * pairwise_sum(spec.size(), [&](std::size_t i) { return table[i] * std::norm(spec[i]); });
  s.tail = w * pairwise_sum(spec.size(), [&](std::size_t i) {
             return table[i] > cut ? table[i] * std::norm(spec[i]) : 0.0;
           });
  return s;
}

SpectralSums spectral_sums(const OrbitalSet& psi) {
  std::vector<double> sig(psi.count()), tail(psi.count());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < psi.count(); ++k) {
    const SpectralSums s = spectral_sums(psi.orbitals[k]);
    sig[k] = s.sigma;
    tail[k] = s.tail;
  }
  return {pairwise_sum(sig), pairwise_sum(tail)};
}

double tail_fraction(const SpectralSums& s) { return s.sigma > 0.0 ? s.tail / s.sigma : 0.0; }

std::vector<char> boundary_axis_mask(const Grid& g) {
  const double edge = (0.5 - kBoundaryShellFraction) * g.length();
  std::vector<char> mask(g.n());
  for (int i = 0; i < g.n(); ++i) mask[i] = std::abs(g.coordinate(i)) >= edge - 1e-12 * g.length();
  return mask;
}

}  // namespace

Eigen::MatrixXcd gram(const OrbitalSet& psi) {
  const auto n = Eigen::Index(psi.count());
  Eigen::MatrixXcd G(n, n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = k; l < n; ++l) {
      const cplx v = inner(psi.orbitals[k], psi.orbitals[l]);
      G(k, l) = v;
      G(l, k) = std::conj(v);
    }
  for (Eigen::Index k = 0; k < n; ++k) G(k, k) = G(k, k).real();
  return G;
}

double sigma(const OrbitalSet& psi) { return spectral_sums(psi).sigma; }

DilationDetail dilation_a_detail(const OrbitalSet& psi) {
  const Grid& g = psi.grid();
  const auto x = position_coordinates(g);
  const std::size_t count = psi.count();
  std::vector<double> a1(count), a2(count), residue(count);

#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < count; ++k) {
    const ComplexField& f = psi.orbitals[k];
    const ComplexField spec = to_spectral(f);
    ComplexField x_grad(g), div_x(g);
    for (int axis = 0; axis < 3; ++axis) {
      const ComplexField d = spectral_derivative(spec, axis);
      for (std::size_t i = 0; i < f.size(); ++i) x_grad[i] += x[axis][i] * d[i];

      ComplexField xf(g);
      for (std::size_t i = 0; i < f.size(); ++i) xf[i] = x[axis][i] * f[i];
      const ComplexField dx = spectral_derivative(to_spectral(xf), axis);
      for (std::size_t i = 0; i < f.size(); ++i) div_x[i] += dx[i];
    }
    const cplx v1 = inner(f, x_grad);
    a1[k] = v1.imag();
    a2[k] = inner(f, div_x).imag();
    residue[k] = v1.real() + 1.5 * norm_sq(f);
  }
  DilationDetail out;
  out.value = pairwise_sum(a1);
  out.ordering_discrepancy = std::abs(out.value - pairwise_sum(a2));
  out.imaginary_residue = pairwise_sum(residue);
  return out;
}

double dilation_a(const OrbitalSet& psi) { return dilation_a_detail(psi).value; }

double moment_m(const OrbitalSet& psi) {
  const Grid& g = psi.grid();
  const auto x = position_coordinates(g);
  const SpectralSymbol s = kinetic_symbol(g, psi.mass);
  const auto table = s.table();
  const double w = g.cell_volume() / double(g.size());
  std::vector<double> parts(3 * psi.count());

#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < parts.size(); ++p) {
    const ComplexField& f = psi.orbitals[p / 3];
    const auto& xj = x[p % 3];
    ComplexField xf(g);
    for (std::size_t i = 0; i < f.size(); ++i) xf[i] = xj[i] * f[i];
    const ComplexField spec = to_spectral(xf);
    parts[p] = w * pairwise_sum(spec.size(), [&](std::size_t i) { return table[i] * std::norm(spec[i]); });
  }
  return pairwise_sum(parts);
}

double mass_in_ball(const RealDensity& rho, double radius) {
  const Grid& g = rho.grid;
  if (!(radius > 0.0)) throw std::invalid_argument("mass_in_ball: radius must be positive");
  if (!(radius < 0.5 * g.length())) throw std::invalid_argument("mass_in_ball: radius must be below L/2");
  const int n = g.n();
  const double r2 = radius * radius;
  const double sum = pairwise_sum(rho.size(), [&](std::size_t p) {
    const int i = int(p % n), j = int((p / n) % n), k = int(p / (std::size_t(n) * n));
    const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
    return x * x + y * y + z * z < r2 ? rho[p] : 0.0;
  });
  return g.cell_volume() * sum;
}

double mass_in_ball(const OrbitalSet& psi, double radius) { return mass_in_ball(density(psi), radius); }

namespace {

double boundary_fraction_of(const RealDensity& rho) {
  const Grid& g = rho.grid;
  const int n = g.n();
  const auto mask = boundary_axis_mask(g);
  const double total = pairwise_sum(rho.values);
  if (!(total > 0.0)) return 0.0;
  const double shell = pairwise_sum(rho.size(), [&](std::size_t p) {
    const int i = int(p % n), j = int((p / n) % n), k = int(p / (std::size_t(n) * n));
    return (mask[i] || mask[j] || mask[k]) ? rho[p] : 0.0;
  });
  return shell / total;
}

}  // namespace

double boundary_mass_fraction(const OrbitalSet& psi) { return boundary_fraction_of(density(psi)); }

double spectral_tail_fraction(const OrbitalSet& psi) { return tail_fraction(spectral_sums(psi)); }

OrbitalSet rescaled_profile(const OrbitalSet& psi) {
  const double s = sigma(psi);
  if (!(s > 0.0)) throw std::invalid_argument("rescaled_profile: sigma must be positive");
  OrbitalSet out = psi;
  for (auto& f : out.orbitals) f = band_limited_resample(f, s);
  return out;
}

double e_tilde(const OrbitalSet& psi) {
  const RealDensity rho = density(psi);
  return sigma(psi) - 0.5 * psi.kappa * (direct_energy(rho, rho) - exchange_energy(psi));
}

std::vector<double> default_radii(const Grid& g) {
  const double q = 0.25 * g.length();
  return {0.25 * q, 0.5 * q, q};
}

TimeSeriesRecord record(const SimState& s, std::span<const double> radii) {
  const OrbitalSet& psi = s.psi;
  TimeSeriesRecord r;
  r.t = s.t;
  r.energy = model_energy(psi, s.model);

  const RealDensity rho = density(psi);
  r.particle_number = integrate(rho);

  const SpectralSums sums = spectral_sums(psi);
  r.sigma = sums.sigma;
  r.spectral_tail_fraction = tail_fraction(sums);

  const DilationDetail a = dilation_a_detail(psi);
  r.a_dilation = a.value;
  r.a_ordering_discrepancy = a.ordering_discrepancy;
  r.m_moment = moment_m(psi);

  const Eigen::MatrixXcd G = gram(psi);
  for (Eigen::Index k = 0; k < G.rows(); ++k) {
    r.gram_diag_dev_max = std::max(r.gram_diag_dev_max, std::abs(G(k, k).real() - 1.0));
    for (Eigen::Index l = 0; l < G.cols(); ++l)
      if (l != k) r.gram_offdiag_max = std::max(r.gram_offdiag_max, std::abs(G(k, l)));
  }

  r.mass_in_ball.reserve(radii.size());
  for (double R : radii) r.mass_in_ball.push_back(mass_in_ball(rho, R));

  r.boundary_mass_fraction = boundary_fraction_of(rho);
  r.boundary_flagged = r.boundary_mass_fraction > kBoundaryFlagThreshold;
  return r;
}

}  // namespace prhf
