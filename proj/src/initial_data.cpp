#include "prhf/initial_data.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "prhf/diagnostics.hpp"

namespace prhf {

double spherical_bessel_zero(int l, int n) {
  if (l < 0 || n < 1) throw std::invalid_argument("spherical_bessel_zero: need l >= 0, n >= 1");
  auto j = [l](double x) { return std::sph_bessel(unsigned(l), x); };
  const double step = 0.05;
  double a = 0.5 * step;
  double fa = j(a);
  int found = 0;
  for (;;) {
    const double b = a + step;
    const double fb = j(b);
    if ((fa > 0.0) != (fb > 0.0) && ++found == n) {
      double lo = a, hi = b, flo = fa;
      while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        const double fm = j(mid);
        if ((fm > 0.0) == (flo > 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    a = b;
    fa = fb;
  }
}

double real_spherical_harmonic(int l, int m, double x, double y, double z) {
  if (l < 0 || std::abs(m) > l) throw std::invalid_argument("real_spherical_harmonic: need |m| <= l");
  const double r = std::sqrt(x * x + y * y + z * z);
  const double ct = r > 0.0 ? z / r : 1.0;
  const double phi = std::atan2(y, x);
  const int am = std::abs(m);
  // (l-m)!/(l+m)! via lgamma for stability.
  const double ratio = std::exp(std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0));
  const double norm = std::sqrt((2.0 * l + 1.0) / (4.0 * std::numbers::pi) * ratio);
  const double p = std::assoc_legendre(unsigned(l), unsigned(am), ct);
  if (m == 0) return norm * p;
  const double s = std::numbers::sqrt2 * norm * p;
  return m > 0 ? s * std::cos(am * phi) : s * std::sin(am * phi);
}

double quintic_cutoff(double r, double radius, double eps) {
  if (r >= radius) return 0.0;
  if (r <= radius - eps) return 1.0;
  const double s = (radius - r) / eps;
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

std::vector<Shell> shell_sequence(int count) {
  // Candidate shells: alpha_{l,1} grows roughly like l + 1.86 l^{1/3}, so taking
  // every (l, n) with alpha below a generous bound and sorting is exact.
  std::vector<Shell> out;
  int covered = 0;
  for (double bound = 8.0; covered < count; bound *= 1.5) {
    std::vector<Shell> cand;
    for (int l = 0; l < bound; ++l)
      for (int n = 1;; ++n) {
        const double a = spherical_bessel_zero(l, n);
        if (a > bound) break;
        cand.push_back({l, n, a});
      }
    std::sort(cand.begin(), cand.end(), [](const Shell& x, const Shell& y) {
      if (x.alpha != y.alpha) return x.alpha < y.alpha;
      if (x.l != y.l) return x.l < y.l;
      return x.n < y.n;
    });
    out.clear();
    covered = 0;
    for (const auto& s : cand) {
      if (covered >= count) break;
      out.push_back(s);
      covered += s.degeneracy();
    }
    // All shells with alpha <= bound are present, so the prefix is exact only
    // if it stays below the bound; otherwise retry with a larger bound.
    if (covered >= count && out.back().alpha < bound) break;
    covered = 0;
  }
  return out;
}

std::vector<int> complete_shell_counts(int limit) {
  std::vector<int> counts;
  int total = 0;
  for (const auto& s : shell_sequence(limit)) {
    total += s.degeneracy();
    if (total <= limit) counts.push_back(total);
  }
  return counts;
}

std::vector<Shell> shell_plan(int n_requested) {
  if (n_requested < 1) throw std::invalid_argument("ball shells: N must be >= 1");
  const auto seq = shell_sequence(n_requested);
  int total = 0, below = 0;
  for (const auto& s : seq) {
    if (total + s.degeneracy() > n_requested) {
      const int above = total + s.degeneracy();
      std::ostringstream msg;
      msg << "ball shells: N=" << n_requested << " does not complete a shell; nearest complete counts are "
          << below << " and " << above;
      throw IncompleteShellError(msg.str(), below, above);
    }
    total += s.degeneracy();
    below = total;
    if (total == n_requested) break;
  }
  return seq;
}

OrbitalSet ball_shell_eigenstates(const BallShellSpec& spec, const Grid& g, double mass, double kappa) {
  const double R = spec.r_ball;
  const double eps = spec.epsilon.value_or(0.1 * R);
  if (!(R > 0.0) || !(eps > 0.0) || eps > R) throw std::invalid_argument("ball shells: need 0 < eps <= R_ball");
  if (!(R + 3.0 * eps < 0.5 * g.length())) throw std::invalid_argument("ball shells: R_ball + 3 eps must be below L/2");
  const auto plan = shell_plan(spec.n_requested);

  struct Mode {
    int l, m;
    double alpha;
  };
  std::vector<Mode> modes;
  for (const auto& s : plan)
    for (int m = -s.l; m <= s.l; ++m) modes.push_back({s.l, m, s.alpha});

  const int n = g.n();
  std::vector<ComplexField> orbs(modes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t q = 0; q < modes.size(); ++q) {
    const Mode& md = modes[q];
    ComplexField f(g);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
          const double x = g.coordinate(i), y = g.coordinate(j), z = g.coordinate(k);
          const double r = std::sqrt(x * x + y * y + z * z);
          if (r >= R) continue;
          const double radial = std::sph_bessel(unsigned(md.l), md.alpha * r / R);
          f[g.index(i, j, k)] = radial * real_spherical_harmonic(md.l, md.m, x, y, z) * quintic_cutoff(r, R, eps);
        }
    const double nrm = std::sqrt(norm_sq(f));
    for (auto& v : f.values) v /= nrm;
    orbs[q] = std::move(f);
  }
  return loewdin_orthonormalize(OrbitalSet(std::move(orbs), mass, kappa));
}

ComplexField gaussian_orbital(const Grid& g, const GaussianSpec& spec) {
  const double w = spec.width;
  if (!(w > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  const double amp = std::pow(std::numbers::pi * w * w, -0.75);
  const int n = g.n();
  ComplexField f(g);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double dx = g.coordinate(i) - spec.center[0];
        const double dy = g.coordinate(j) - spec.center[1];
        const double dz = g.coordinate(k) - spec.center[2];
        f[g.index(i, j, k)] = amp * std::exp(-(dx * dx + dy * dy + dz * dz) / (2.0 * w * w));
      }
  return f;
}

OrbitalSet gaussian_family(const std::vector<GaussianSpec>& specs, const Grid& g, double mass, double kappa) {
  if (specs.empty()) throw std::invalid_argument("gaussian family: need at least one orbital");
  std::vector<ComplexField> orbs;
  for (const auto& s : specs) {
    if (s.width < 3.0 * g.dx())
      throw std::invalid_argument("gaussian family: width " + std::to_string(s.width) + " is below 3 dx");
    for (double c : s.center)
      if (!(std::abs(c) < 0.4 * g.length()))
        throw std::invalid_argument("gaussian family: center outside the interior (|c_j| < 0.4 L)");
    orbs.push_back(gaussian_orbital(g, s));
  }
  return loewdin_orthonormalize(OrbitalSet(std::move(orbs), mass, kappa));
}

OrbitalSet random_bump_family(int count, const Grid& g, std::uint64_t seed, double mass, double kappa) {
  if (count < 1) throw std::invalid_argument("random bumps: count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double L = g.length();
  const double wmin = 3.0 * g.dx(), wmax = std::max(wmin, 0.08 * L);
  std::vector<ComplexField> orbs;
  for (int q = 0; q < count; ++q) {
    ComplexField f(g);
    const int bumps = 1 + int(unit(rng) * 3.0);
    for (int b = 0; b < bumps; ++b) {
      GaussianSpec s;
      for (auto& c : s.center) c = (unit(rng) - 0.5) * 0.3 * L;
      s.width = wmin + unit(rng) * (wmax - wmin);
      const cplx weight = std::polar(0.5 + unit(rng), 2.0 * std::numbers::pi * unit(rng));
      const ComplexField bump = gaussian_orbital(g, s);
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += weight * bump[i];
    }
    orbs.push_back(std::move(f));
  }
  return loewdin_orthonormalize(OrbitalSet(std::move(orbs), mass, kappa));
}

OrbitalSet loewdin_orthonormalize(const OrbitalSet& psi) {
  psi.validate();
  const Eigen::MatrixXcd G = gram(psi);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const double lo = lam.minCoeff(), hi = lam.maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxGramCondition) {
    std::ostringstream msg;
    msg << "loewdin: Gram matrix is rank deficient (smallest eigenvalue " << lo << ", largest " << hi << ")";
    throw RankDeficientError(msg.str(), lo);
  }
  const Eigen::MatrixXcd& Q = eig.eigenvectors();
  const Eigen::MatrixXcd S = Q * lam.cwiseInverse().cwiseSqrt().asDiagonal() * Q.adjoint();

  const std::size_t n = psi.count();
  OrbitalSet out = psi;
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < n; ++k) {
    ComplexField f(psi.grid());
    for (std::size_t l = 0; l < n; ++l) {
      const cplx s = S(Eigen::Index(l), Eigen::Index(k));
      const auto& src = psi.orbitals[l];
      for (std::size_t i = 0; i < f.size(); ++i) f[i] += s * src[i];
    }
    out.orbitals[k] = std::move(f);
  }
  return out;
}

double choose_kappa_negative_energy(const OrbitalSet& psi, double margin) {
  if (!(margin >= 0.0) || !(margin < 1.0)) throw std::invalid_argument("choose_kappa: margin must lie in [0, 1)");
  const RealDensity rho = density(psi);
  const double D = direct_energy(rho, rho);
  if (!(D > 0.0)) throw std::invalid_argument("choose_kappa: density is zero");
  return 2.0 * (1.0 + margin) * kinetic_energy(psi) / D;
}

}  // namespace prhf
