// Scalar observables evaluated on snapshots: Gram matrix, sigma, the virial
// quantities a(t) and m(t), mass in a ball, boundary and spectral-tail
// monitors, the rescaled profile and the scale-free functional E~.
#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "prhf/state.hpp"

namespace prhf {

/// Fraction of the box, measured from each face, treated as the boundary shell.
inline constexpr double kBoundaryShellFraction = 0.1;
/// Boundary-mass level above which a(t) and m(t) are flagged as unreliable.
inline constexpr double kBoundaryFlagThreshold = 1e-4;

struct TimeSeriesRecord {
  double t = 0.0;
  double energy = 0.0;
  double particle_number = 0.0;
  double sigma = 0.0;
  double a_dilation = 0.0;
  double m_moment = 0.0;
  double gram_offdiag_max = 0.0;
  double gram_diag_dev_max = 0.0;
  std::vector<double> mass_in_ball;
  double boundary_mass_fraction = 0.0;
  double spectral_tail_fraction = 0.0;

  // Not part of the CSV row.
  double a_ordering_discrepancy = 0.0;
  bool boundary_flagged = false;
};

/// G_kl = <psi_k, psi_l>, Hermitian by construction.
Eigen::MatrixXcd gram(const OrbitalSet& psi);

double sigma(const OrbitalSet& psi);

struct DilationDetail {
  double value = 0.0;
  /// Re<psi, x.grad psi> + 3/2 ||psi||^2 summed over orbitals; zero in exact arithmetic.
  double imaginary_residue = 0.0;
  /// |a computed from x.grad psi - a computed from grad.(x psi)|.
  double ordering_discrepancy = 0.0;
};

/// a = sum_k <psi_k, A psi_k>, A = -(i/2)(x.grad + grad.x) = Im<psi, x.grad psi>.
double dilation_a(const OrbitalSet& psi);
DilationDetail dilation_a_detail(const OrbitalSet& psi);

/// m = sum_k sum_j <x_j psi_k, sqrt(-Lap + m^2) x_j psi_k>.
double moment_m(const OrbitalSet& psi);

/// Mass of rho in the open ball |x| < R around the box center; R < L/2.
double mass_in_ball(const OrbitalSet& psi, double radius);
double mass_in_ball(const RealDensity& rho, double radius);

/// Fraction of particle mass in the outer shell of the box.
double boundary_mass_fraction(const OrbitalSet& psi);

/// Fraction of sigma carried by |k| > k_nyquist/2.
double spectral_tail_fraction(const OrbitalSet& psi);

/// psi~_k(x) = s^{-3/2} psi_k(x/s) with s = sigma(psi).
OrbitalSet rescaled_profile(const OrbitalSet& psi);

/// sum ||phi_k||^2_{H^1/2 hom} - kappa/2 [D(rho,rho) - exchange].
double e_tilde(const OrbitalSet& psi);

/// {0.25, 0.5, 1.0} * L/4.
std::vector<double> default_radii(const Grid& g);

TimeSeriesRecord record(const SimState& s, std::span<const double> radii);

}  // namespace prhf
