// Periodic-grid fields, FFTs, Fourier multipliers and band-limited resampling.
//
// Layout: n^3 values, row-major with x fastest: index = i + n*(j + n*k).
// Coordinates are centered, x(i) = -L/2 + i*dx, so the box center (i = n/2)
// sits at the origin. Wavenumbers follow the FFT ordering and cover
// (2*pi/L) * {-n/2, ..., n/2-1}; the unpaired Nyquist mode is kept.
//
// Transform convention: forward is unnormalized, inverse carries 1/n^3.
// With that, <f,g> = dV * sum conj(f) g = dV/n^3 * sum conj(f^) g^.
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <new>
#include <span>
#include <stdexcept>
#include <vector>

namespace prhf {

using cplx = std::complex<double>;

namespace detail {
void* aligned_malloc(std::size_t bytes);
void aligned_free(void* p) noexcept;
}  // namespace detail

/// Allocator returning FFTW-aligned memory so every buffer shares one plan.
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) noexcept {}
  T* allocate(std::size_t count) {
    void* p = detail::aligned_malloc(count * sizeof(T));
    if (!p && count) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) noexcept { detail::aligned_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const noexcept { return true; }
};

using CVec = std::vector<cplx, FftwAllocator<cplx>>;
using RVec = std::vector<double, FftwAllocator<double>>;

/// Largest supported points-per-axis.
inline constexpr int kMaxGridPoints = 512;

class Grid {
 public:
  Grid() = default;

  int n() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double cell_volume() const { double h = dx(); return h * h * h; }
  std::size_t size() const { return std::size_t(n_) * n_ * n_; }

  std::size_t index(int i, int j, int k) const {
    return std::size_t(i) + std::size_t(n_) * (std::size_t(j) + std::size_t(n_) * k);
  }

  /// Wavenumber of FFT index `idx` along one axis.
  double wavenumber(int idx) const;
  /// Centered coordinate of grid index `idx` along one axis.
  double coordinate(int idx) const { return -0.5 * length_ + idx * dx(); }
  /// Per-axis Nyquist wavenumber pi*n/L.
  double k_nyquist() const;
  /// Largest |k| on the lattice (corner of the Brillouin cube).
  double k_max() const;

  bool operator==(const Grid& o) const { return n_ == o.n_ && length_ == o.length_; }

  friend Grid make_grid(int n, double length);

 private:
  int n_ = 0;
  double length_ = 0.0;
};

/// Validates n (even, 8..kMaxGridPoints) and L > 0.
Grid make_grid(int n, double length);

enum class Space { Position, Spectral };

struct ComplexField {
  Grid grid;
  CVec values;
  Space space = Space::Position;

  ComplexField() = default;
  explicit ComplexField(const Grid& g, Space s = Space::Position)
      : grid(g), values(g.size(), cplx(0.0, 0.0)), space(s) {}

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }
};

struct RealField {
  Grid grid;
  RVec values;

  RealField() = default;
  explicit RealField(const Grid& g) : grid(g), values(g.size(), 0.0) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  const double& operator[](std::size_t i) const { return values[i]; }
};

/// Real function of the wavenumber vector tabulated on a grid's lattice.
class SpectralSymbol {
 public:
  using Function = std::function<double(double kx, double ky, double kz)>;

  SpectralSymbol() = default;
  SpectralSymbol(const Grid& g, const Function& fn);

  const Grid& grid() const { return grid_; }
  std::span<const double> table() const { return table_; }
  double max_abs() const;
  bool finite() const;

 private:
  Grid grid_;
  RVec table_;
};

/// sqrt(|k|^2 + m^2).
SpectralSymbol kinetic_symbol(const Grid& g, double mass);
/// |k|.
SpectralSymbol abs_k_symbol(const Grid& g);

// Transforms. All buffers must come from FftwAllocator.
void fft_forward(const Grid& g, const cplx* in, cplx* out);
void fft_inverse(const Grid& g, const cplx* in, cplx* out);  // includes 1/n^3

ComplexField to_spectral(const ComplexField& f);
ComplexField to_position(const ComplexField& f);

/// inverse(s(k) * forward(f)). Throws std::invalid_argument on non-finite input.
ComplexField apply_multiplier(const ComplexField& f, const SpectralSymbol& s);

/// Quadrature <f,g> = dV * sum conj(f) g, fixed-order pairwise reduction.
cplx inner(const ComplexField& f, const ComplexField& g);
double norm_sq(const ComplexField& f);
/// dV * sum f.
double integrate(const RealField& f);

/// x_1, x_2, x_3 on the grid, centered at the box middle.
std::array<RealField, 3> position_coordinates(const Grid& g);

class AliasingError : public std::runtime_error {
 public:
  AliasingError(const std::string& what, double relative_norm_change)
      : std::runtime_error(what), relative_norm_change_(relative_norm_change) {}
  double relative_norm_change() const { return relative_norm_change_; }

 private:
  double relative_norm_change_;
};

/// scale^{-3/2} f(x/scale) by trigonometric interpolation, separable per axis.
/// The squared L2 norm must survive to `norm_tolerance` (relative), otherwise
/// the stretched field left the box or the band and AliasingError is thrown.
ComplexField band_limited_resample(const ComplexField& f, double scale,
                                   double norm_tolerance = 1e-6);

// Deterministic reductions: the summation tree depends only on the length.
double pairwise_sum(std::span<const double> values);
double pairwise_sum(std::size_t count, const std::function<double(std::size_t)>& term);

}  // namespace prhf
