// Initial configurations: Dirichlet ball eigenfunction shells, Gaussian and
// random-bump families, Loewdin orthonormalization and coupling selection.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "prhf/meanfield.hpp"

namespace prhf {

/// n-th positive zero (n >= 1) of the spherical Bessel function j_l, to 1e-12.
double spherical_bessel_zero(int l, int n);

/// Real spherical harmonic Y_lm (|m| <= l) at the direction of (x, y, z).
double real_spherical_harmonic(int l, int m, double x, double y, double z);

/// 1 for r <= R - eps, 0 for r >= R, quintic smoothstep in between.
double quintic_cutoff(double r, double radius, double eps);

struct Shell {
  int l = 0;
  int n = 1;
  double alpha = 0.0;  // alpha_{l,n}; the Dirichlet eigenvalue is (alpha/R)^2
  int degeneracy() const { return 2 * l + 1; }
};

/// Shells ordered by alpha, ties broken by l then n, covering at least `count` orbitals.
std::vector<Shell> shell_sequence(int count);
/// Cumulative orbital counts of complete shells, all values <= limit.
std::vector<int> complete_shell_counts(int limit);

class IncompleteShellError : public std::invalid_argument {
 public:
  IncompleteShellError(const std::string& what, int below, int above)
      : std::invalid_argument(what), below_(below), above_(above) {}
  int nearest_below() const { return below_; }
  int nearest_above() const { return above_; }

 private:
  int below_, above_;
};

struct BallShellSpec {
  int n_requested = 1;
  double r_ball = 1.0;
  /// Cutoff width; 0.1 * r_ball when unset.
  std::optional<double> epsilon;
};

/// Shell plan for a complete count; throws IncompleteShellError otherwise.
std::vector<Shell> shell_plan(int n_requested);

OrbitalSet ball_shell_eigenstates(const BallShellSpec& spec, const Grid& g, double mass, double kappa);

struct GaussianSpec {
  std::array<double, 3> center{0.0, 0.0, 0.0};
  double width = 1.0;
};

/// (pi w^2)^{-3/4} exp(-|x-c|^2 / (2 w^2)); unit L2 norm in the continuum.
ComplexField gaussian_orbital(const Grid& g, const GaussianSpec& spec);

/// Normalized Gaussians, Loewdin-orthonormalized. Widths >= 3 dx, centers inside 0.4 L.
OrbitalSet gaussian_family(const std::vector<GaussianSpec>& specs, const Grid& g, double mass, double kappa);

/// Each orbital is a seeded sum of a few complex-weighted Gaussian bumps,
/// then the set is Loewdin-orthonormalized.
OrbitalSet random_bump_family(int count, const Grid& g, std::uint64_t seed, double mass, double kappa);

class RankDeficientError : public std::invalid_argument {
 public:
  RankDeficientError(const std::string& what, double smallest)
      : std::invalid_argument(what), smallest_(smallest) {}
  double smallest_eigenvalue() const { return smallest_; }

 private:
  double smallest_;
};

inline constexpr double kMaxGramCondition = 1e8;

/// psi'_k = sum_l psi_l (G^{-1/2})_lk.
OrbitalSet loewdin_orthonormalize(const OrbitalSet& psi);

/// kappa = 2 (1 + margin) T / D, so that E_H = -margin * T.
double choose_kappa_negative_energy(const OrbitalSet& psi, double margin);

}  // namespace prhf
