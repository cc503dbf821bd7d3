// Mean-field operators and energy functionals of the Hartree and
// Hartree-Fock equations: kinetic operator sqrt(-Lap + m^2), density,
// free-space Coulomb convolution, direct and exchange terms, energies.
#pragma once

#include <memory>
#include <vector>

#include "prhf/spectral.hpp"

namespace prhf {

/// N orbitals on one grid with rest mass m >= 0 and coupling kappa > 0.
struct OrbitalSet {
  std::vector<ComplexField> orbitals;
  double mass = 0.0;
  double kappa = 1.0;

  OrbitalSet() = default;
  OrbitalSet(std::vector<ComplexField> orbs, double m, double k);

  const Grid& grid() const { return orbitals.front().grid; }
  std::size_t count() const { return orbitals.size(); }

  /// Throws std::invalid_argument if any invariant is broken.
  void validate() const;
};

/// Nonnegative density rho(x) = sum_k |psi_k(x)|^2.
using RealDensity = RealField;

/// Free-space 1/|x| convolution for fields supported in the box.
///
/// Uses a truncated kernel 1{|x| <= R}/|x| with R the box diagonal, whose
/// Fourier transform 8*pi*sin^2(R|k|/2)/|k|^2 is smooth. The kernel is
/// sampled on a 3x oversampled Fourier lattice once per grid, brought back
/// to real space, and stored as a periodic kernel on the doubled grid; each
/// convolution is then a zero-padded FFT product on (2n)^3. For sources and
/// targets inside the box the truncation is exact, so the result converges
/// spectrally for smooth densities.
class CoulombKernel {
 public:
  static std::shared_ptr<const CoulombKernel> for_grid(const Grid& g);

  explicit CoulombKernel(const Grid& g);

  const Grid& grid() const { return grid_; }

  /// out = (1/|x| * in) on the box; in and out have n^3 entries.
  void convolve(const double* in, double* out) const;
  RealField convolve(const RealField& rho) const;
  /// Linear extension to complex inputs (real and imaginary parts separately).
  ComplexField convolve(const ComplexField& f) const;

  /// Real-space kernel sample at integer displacement (for diagnostics/tests).
  double kernel_at(int di, int dj, int dk) const;

 private:
  Grid grid_;
  int padded_n_ = 0;
  RVec spectrum_;   // half-spectrum of the periodic kernel on (2n)^3, real-valued
  RVec real_space_; // kernel on (2n)^3, displacement-periodic
};

// --- operators --------------------------------------------------------------

ComplexField kinetic_apply(const ComplexField& f, double mass);
/// <f, sqrt(-Lap + m^2) f>, computed in Fourier space.
double kinetic_expectation(const ComplexField& f, double mass);
/// ||f||^2_{H^{1/2} homogeneous} = <f, |k| f>.
double half_norm_sq(const ComplexField& f);

RealDensity density(const OrbitalSet& psi);
RealField coulomb_convolve(const RealDensity& rho);

struct HartreeTerm {
  RealField potential;                // V = kappa * (1/|x| * rho)
  std::vector<ComplexField> applied;  // -V psi_k
};
HartreeTerm hartree_term(const OrbitalSet& psi);

/// Pair potentials C_lk = 1/|x| * (conj(psi_l) psi_k), stored for all (l, k);
/// only l <= k is convolved, the rest follows from C_kl = conj(C_lk).
class PairPotentials {
 public:
  explicit PairPotentials(const OrbitalSet& psi);
  const ComplexField& operator()(std::size_t l, std::size_t k) const { return fields_[l * count_ + k]; }
  std::size_t count() const { return count_; }

 private:
  std::size_t count_;
  std::vector<ComplexField> fields_;
};

/// output[k] = kappa * sum_l psi_l * (1/|x| * conj(psi_l) psi_k).
std::vector<ComplexField> exchange_term(const OrbitalSet& psi);
std::vector<ComplexField> exchange_term(const OrbitalSet& psi, const PairPotentials& pairs);

// --- functionals ------------------------------------------------------------

/// D(rho, rho') = int rho * (1/|x| * rho').
double direct_energy(const RealDensity& rho, const RealDensity& rho_prime);
/// int int |rho(x,y)|^2 / |x-y|.
double exchange_energy(const OrbitalSet& psi);
double exchange_energy(const OrbitalSet& psi, const PairPotentials& pairs);
/// sum_k <psi_k, sqrt(-Lap+m^2) psi_k>.
double kinetic_energy(const OrbitalSet& psi);
double hartree_energy(const OrbitalSet& psi);
double hartree_fock_energy(const OrbitalSet& psi);
double particle_number(const OrbitalSet& psi);

}  // namespace prhf
