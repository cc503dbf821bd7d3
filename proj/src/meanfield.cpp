#include "prhf/meanfield.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "fft.hpp"

namespace prhf {

// ---------------------------------------------------------------------------
// OrbitalSet

OrbitalSet::OrbitalSet(std::vector<ComplexField> orbs, double m, double k)
    : orbitals(std::move(orbs)), mass(m), kappa(k) {
  validate();
}

void OrbitalSet::validate() const {
  if (orbitals.empty()) throw std::invalid_argument("OrbitalSet: need at least one orbital");
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw std::invalid_argument("OrbitalSet: mass must be >= 0");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("OrbitalSet: kappa must be > 0");
  const Grid& g = orbitals.front().grid;
  for (const auto& f : orbitals) {
    if (!(f.grid == g)) throw std::invalid_argument("OrbitalSet: orbitals on different grids");
    if (f.space != Space::Position) throw std::invalid_argument("OrbitalSet: orbitals must be in position space");
    if (f.values.size() != g.size()) throw std::invalid_argument("OrbitalSet: orbital size mismatch");
  }
}

// ---------------------------------------------------------------------------
// Coulomb kernel

std::shared_ptr<const CoulombKernel> CoulombKernel::for_grid(const Grid& g) {
  static std::mutex mutex;
  static std::map<std::pair<int, double>, std::shared_ptr<const CoulombKernel>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(g.n(), g.length());
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  // Keep the cache small: kernels for large grids are tens of megabytes.
  if (cache.size() >= 6) cache.clear();
  auto k = std::make_shared<const CoulombKernel>(g);
  cache.emplace(key, k);
  return k;
}

CoulombKernel::CoulombKernel(const Grid& g) : grid_(g), padded_n_(2 * g.n()) {
  const int n = g.n();
  const double h = g.dx();
  const int fine = 3 * n;      // Fourier period 3L: images stay beyond the truncation radius
  const int m = fine / 2 + 1;  // REDFT00 length for the even sequence
  const double radius = std::sqrt(3.0) * g.length();
  const double dk = 2.0 * std::numbers::pi / (fine * h);

  RVec fine_kernel(std::size_t(m) * m * m);
  for (int c = 0; c < m; ++c)
    for (int b = 0; b < m; ++b)
      for (int a = 0; a < m; ++a) {
        const double k = dk * std::sqrt(double(a) * a + double(b) * b + double(c) * c);
        double value;
        if (k == 0.0) {
          value = 2.0 * std::numbers::pi * radius * radius;
        } else {
          const double s = std::sin(0.5 * radius * k);
          value = 8.0 * std::numbers::pi * s * s / (k * k);
        }
        fine_kernel[a + std::size_t(m) * (b + std::size_t(m) * c)] = value;
      }
  fft::redft00(m, fine_kernel.data());
  const double period = fine * h;
  const double norm = 1.0 / (period * period * period);

  // Compact even kernel K(|d|) for |d| <= n, then the doubled periodic copy.
  const int p = padded_n_;
  const int c1 = n + 1;
  real_space_.assign(std::size_t(c1) * c1 * c1, 0.0);
  for (int c = 0; c < c1; ++c)
    for (int b = 0; b < c1; ++b)
      for (int a = 0; a < c1; ++a)
        real_space_[a + std::size_t(c1) * (b + std::size_t(c1) * c)] =
            norm * fine_kernel[a + std::size_t(m) * (b + std::size_t(m) * c)];

  RVec padded(std::size_t(p) * p * p);
  auto fold = [p](int d) { return d <= p / 2 ? d : p - d; };
  for (int c = 0; c < p; ++c)
    for (int b = 0; b < p; ++b)
      for (int a = 0; a < p; ++a)
        padded[a + std::size_t(p) * (b + std::size_t(p) * c)] =
            real_space_[fold(a) + std::size_t(c1) * (fold(b) + std::size_t(c1) * fold(c))];

  CVec spec(fft::half_size(p));
  fft::r2c(p, padded.data(), spec.data());
  const double cell = g.cell_volume();
  spectrum_.resize(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) spectrum_[i] = cell * spec[i].real();
}

double CoulombKernel::kernel_at(int di, int dj, int dk) const {
  const int n = grid_.n();
  di = std::abs(di);
  dj = std::abs(dj);
  dk = std::abs(dk);
  if (di > n || dj > n || dk > n) throw std::out_of_range("kernel_at: displacement beyond one box");
  const int c1 = n + 1;
  return real_space_[di + std::size_t(c1) * (dj + std::size_t(c1) * dk)];
}

void CoulombKernel::convolve(const double* in, double* out) const {
  const int n = grid_.n();
  const int p = padded_n_;
  RVec padded(std::size_t(p) * p * p, 0.0);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double* src = in + grid_.index(0, j, k);
      double* dst = padded.data() + std::size_t(p) * (j + std::size_t(p) * k);
      std::copy(src, src + n, dst);
    }
  CVec spec(fft::half_size(p));
  fft::r2c(p, padded.data(), spec.data());
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= spectrum_[i];
  fft::c2r(p, spec.data(), padded.data());
  const double scale = 1.0 / (double(p) * p * p);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      const double* src = padded.data() + std::size_t(p) * (j + std::size_t(p) * k);
      double* dst = out + grid_.index(0, j, k);
      for (int i = 0; i < n; ++i) dst[i] = scale * src[i];
    }
}

RealField CoulombKernel::convolve(const RealField& rho) const {
  if (!(rho.grid == grid_)) throw std::invalid_argument("CoulombKernel: grid mismatch");
  RealField out(grid_);
  convolve(rho.values.data(), out.values.data());
  return out;
}

ComplexField CoulombKernel::convolve(const ComplexField& f) const {
  if (!(f.grid == grid_)) throw std::invalid_argument("CoulombKernel: grid mismatch");
  const std::size_t size = grid_.size();
  RVec re(size), im(size), cre(size), cim(size);
  for (std::size_t i = 0; i < size; ++i) {
    re[i] = f[i].real();
    im[i] = f[i].imag();
  }
  convolve(re.data(), cre.data());
  convolve(im.data(), cim.data());
  ComplexField out(grid_);
  for (std::size_t i = 0; i < size; ++i) out[i] = cplx(cre[i], cim[i]);
  return out;
}

// ---------------------------------------------------------------------------
// operators

namespace {

// dV/n^3 * sum_k s(k) |f^(k)|^2, i.e. <f, S f>.
double spectral_expectation(const ComplexField& f, const SpectralSymbol& s) {
  const ComplexField spec = to_spectral(f);
  const auto table = s.table();
  const double sum = pairwise_sum(spec.size(), [&](std::size_t i) { return table[i] * std::norm(spec[i]); });
  return f.grid.cell_volume() / double(f.grid.size()) * sum;
}

void check_mass(double mass) {
  if (!(mass >= 0.0) || !std::isfinite(mass)) throw std::invalid_argument("mass must be >= 0");
}

}  // namespace

ComplexField kinetic_apply(const ComplexField& f, double mass) {
  check_mass(mass);
  return apply_multiplier(f, kinetic_symbol(f.grid, mass));
}

double kinetic_expectation(const ComplexField& f, double mass) {
  check_mass(mass);
  return spectral_expectation(f, kinetic_symbol(f.grid, mass));
}

double half_norm_sq(const ComplexField& f) { return spectral_expectation(f, abs_k_symbol(f.grid)); }

RealDensity density(const OrbitalSet& psi) {
  RealDensity rho(psi.grid());
  for (const auto& f : psi.orbitals)
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += std::norm(f[i]);
  return rho;
}

RealField coulomb_convolve(const RealDensity& rho) { return CoulombKernel::for_grid(rho.grid)->convolve(rho); }

HartreeTerm hartree_term(const OrbitalSet& psi) {
  HartreeTerm out;
  out.potential = coulomb_convolve(density(psi));
  for (auto& v : out.potential.values) v *= psi.kappa;
  out.applied.reserve(psi.count());
  for (const auto& f : psi.orbitals) {
    ComplexField a(f.grid);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = -out.potential[i] * f[i];
    out.applied.push_back(std::move(a));
  }
  return out;
}

PairPotentials::PairPotentials(const OrbitalSet& psi) : count_(psi.count()), fields_(count_ * count_) {
  const auto kernel = CoulombKernel::for_grid(psi.grid());
  const std::size_t npairs = count_ * (count_ + 1) / 2;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(npairs);
  for (std::size_t k = 0; k < count_; ++k)
    for (std::size_t l = 0; l <= k; ++l) pairs.emplace_back(l, k);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [l, k] = pairs[p];
    const auto& a = psi.orbitals[l];
    const auto& b = psi.orbitals[k];
    ComplexField prod(a.grid);
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = std::conj(a[i]) * b[i];
    fields_[l * count_ + k] = kernel->convolve(prod);
  }
  for (const auto& [l, k] : pairs) {
    if (l == k) continue;
    const ComplexField& src = fields_[l * count_ + k];
    ComplexField dst(src.grid);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::conj(src[i]);
    fields_[k * count_ + l] = std::move(dst);
  }
}

std::vector<ComplexField> exchange_term(const OrbitalSet& psi) { return exchange_term(psi, PairPotentials(psi)); }

std::vector<ComplexField> exchange_term(const OrbitalSet& psi, const PairPotentials& pairs) {
  const std::size_t n = psi.count();
  std::vector<ComplexField> out(n);
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < n; ++k) {
    ComplexField acc(psi.grid());
    for (std::size_t l = 0; l < n; ++l) {
      const auto& c = pairs(l, k);
      const auto& f = psi.orbitals[l];
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += f[i] * c[i];
    }
    for (auto& v : acc.values) v *= psi.kappa;
    out[k] = std::move(acc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// functionals

double direct_energy(const RealDensity& rho, const RealDensity& rho_prime) {
  if (!(rho.grid == rho_prime.grid)) throw std::invalid_argument("direct_energy: grid mismatch");
  const RealField v = coulomb_convolve(rho_prime);
  return rho.grid.cell_volume() * pairwise_sum(rho.size(), [&](std::size_t i) { return rho[i] * v[i]; });
}

double exchange_energy(const OrbitalSet& psi) { return exchange_energy(psi, PairPotentials(psi)); }

double exchange_energy(const OrbitalSet& psi, const PairPotentials& pairs) {
  // sum_{l,k} int psi_l conj(psi_k) C_lk; the (k,l) term is the conjugate of (l,k).
  const std::size_t n = psi.count();
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l <= k; ++l) {
      const auto& a = psi.orbitals[l];
      const auto& b = psi.orbitals[k];
      const auto& c = pairs(l, k);
      const double re = pairwise_sum(a.size(), [&](std::size_t i) { return (a[i] * std::conj(b[i]) * c[i]).real(); });
      total += (l == k ? 1.0 : 2.0) * re;
    }
  return psi.grid().cell_volume() * total;
}

double kinetic_energy(const OrbitalSet& psi) {
  const SpectralSymbol s = kinetic_symbol(psi.grid(), psi.mass);
  std::vector<double> parts(psi.count());
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < psi.count(); ++k) parts[k] = spectral_expectation(psi.orbitals[k], s);
  return pairwise_sum(parts);
}

double hartree_energy(const OrbitalSet& psi) {
  const RealDensity rho = density(psi);
  return kinetic_energy(psi) - 0.5 * psi.kappa * direct_energy(rho, rho);
}

double hartree_fock_energy(const OrbitalSet& psi) {
  return hartree_energy(psi) + 0.5 * psi.kappa * exchange_energy(psi);
}

double particle_number(const OrbitalSet& psi) { return integrate(density(psi)); }

}  // namespace prhf
