// Reference values computed without touching the library: radial
// quadratures, closed forms and literature constants.
#pragma once

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// Composite Simpson on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 4000) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

// Unit-mass density pi^{-3/2} exp(-r^2).
inline double unit_gaussian_density(double r) { return std::pow(pi, -1.5) * std::exp(-r * r); }

// Newton's theorem for a radial density: V(r) = (1/r) int_0^r 4 pi s^2 rho + int_r^inf 4 pi s rho.
inline double radial_potential(const std::function<double(double)>& rho, double r, double r_max = 12.0) {
  const double inner = simpson([&](double s) { return 4.0 * pi * s * s * rho(s); }, 0.0, r);
  const double outer = simpson([&](double s) { return 4.0 * pi * s * rho(s); }, r, r_max);
  return (r > 0.0 ? inner / r : 0.0) + outer;
}

// int rho V over R^3 for a radial density.
inline double radial_self_energy(const std::function<double(double)>& rho, double r_max = 10.0) {
  return simpson([&](double r) { return 4.0 * pi * r * r * rho(r) * radial_potential(rho, r, r_max + 2.0); },
                 0.0, r_max, 400);
}

// <psi, sqrt(k^2 + m^2) psi> for psi = (pi w^2)^{-3/4} exp(-r^2/(2 w^2)); |psi^(k)|^2 ~ exp(-k^2 w^2).
inline double gaussian_kinetic(double width, double mass) {
  const auto weight = [&](double k) { return k * k * std::exp(-k * k * width * width); };
  const double kmax = 12.0 / width;
  const double num = simpson([&](double k) { return weight(k) * std::sqrt(k * k + mass * mass); }, 0.0, kmax);
  return num / simpson(weight, 0.0, kmax);
}

// Mass of exp(-r^2/w^2)/(pi w^2)^{3/2} inside radius R.
inline double gaussian_mass_in_ball(double width, double radius) {
  const double u = radius / width;
  return std::erf(u) - 2.0 * u / std::sqrt(pi) * std::exp(-u * u);
}

// int rho^{4/3} of the same density: (pi w^2)^{-1/2} (3/4)^{3/2}.
inline double gaussian_rho43(double width) { return std::pow(0.75, 1.5) / (std::sqrt(pi) * width); }

// Tabulated zeros of spherical Bessel functions j_l (Abramowitz & Stegun 10.1).
inline constexpr double j1_first_zero = 4.493409457909064;
inline constexpr double j2_first_zero = 5.763459196894550;
inline constexpr double j3_first_zero = 6.987932000500519;
inline constexpr double j1_second_zero = 7.725251836937707;

// Brute-force minimum of N sqrt(p^2+m^2) - (kappa/2) N^{5/3} p on a log grid in p, refined by golden section.
struct HeuristicMin {
  double p = 0.0;
  double energy = 0.0;
};
inline HeuristicMin heuristic_min(double kappa, double N, double m) {
  const auto f = [&](double p) { return N * std::sqrt(p * p + m * m) - 0.5 * kappa * std::pow(N, 5.0 / 3.0) * p; };
  double best_p = 0.0, best = f(0.0);
  for (int i = -400; i <= 800; ++i) {
    const double p = m * std::pow(10.0, i / 100.0);
    if (f(p) < best) best = f(p), best_p = p;
  }
  double a = best_p / 1.03, b = best_p * 1.03;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (f(c) < f(d)) b = d; else a = c;
  }
  const double p = 0.5 * (a + b);
  return {p, f(p)};
}

}  // namespace oracle
