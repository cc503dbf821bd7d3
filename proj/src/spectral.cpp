#include "prhf/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "fft.hpp"

namespace prhf {

namespace detail {
void* aligned_malloc(std::size_t bytes) { return fftw_malloc(bytes); }
void aligned_free(void* p) noexcept { fftw_free(p); }
}  // namespace detail

// ---------------------------------------------------------------------------
// plan cache

namespace fft {
namespace {

enum class Kind { Forward, Backward, R2C, C2R };

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan plan_for(int n, Kind kind) {
  static std::map<std::pair<int, Kind>, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex());
  auto key = std::make_pair(n, kind);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const std::size_t full = std::size_t(n) * n * n;
  fftw_plan p = nullptr;
  switch (kind) {
    case Kind::Forward:
    case Kind::Backward: {
      auto* a = fftw_alloc_complex(full);
      auto* b = fftw_alloc_complex(full);
      p = fftw_plan_dft_3d(n, n, n, a, b, kind == Kind::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                           FFTW_ESTIMATE);
      fftw_free(a);
      fftw_free(b);
      break;
    }
    case Kind::R2C: {
      auto* a = fftw_alloc_real(full);
      auto* b = fftw_alloc_complex(half_size(n));
      p = fftw_plan_dft_r2c_3d(n, n, n, a, b, FFTW_ESTIMATE);
      fftw_free(a);
      fftw_free(b);
      break;
    }
    case Kind::C2R: {
      auto* a = fftw_alloc_complex(half_size(n));
      auto* b = fftw_alloc_real(full);
      p = fftw_plan_dft_c2r_3d(n, n, n, a, b, FFTW_ESTIMATE);
      fftw_free(a);
      fftw_free(b);
      break;
    }
  }
  if (!p) throw std::runtime_error("FFTW planning failed");
  cache.emplace(key, p);
  return p;
}

fftw_complex* as_fftw(const cplx* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<cplx*>(p));
}

}  // namespace

void c2c_forward(int n, const cplx* in, cplx* out) {
  fftw_execute_dft(plan_for(n, Kind::Forward), as_fftw(in), as_fftw(out));
}

void c2c_backward(int n, const cplx* in, cplx* out) {
  fftw_execute_dft(plan_for(n, Kind::Backward), as_fftw(in), as_fftw(out));
}

void r2c(int n, const double* in, cplx* out) {
  fftw_execute_dft_r2c(plan_for(n, Kind::R2C), const_cast<double*>(in), as_fftw(out));
}

void c2r(int n, cplx* in, double* out) {
  fftw_execute_dft_c2r(plan_for(n, Kind::C2R), as_fftw(in), out);
}

void redft00(int m, double* data) {
  fftw_plan p;
  {
    std::lock_guard<std::mutex> lock(plan_mutex());
    p = fftw_plan_r2r_3d(m, m, m, data, data, FFTW_REDFT00, FFTW_REDFT00, FFTW_REDFT00,
                         FFTW_ESTIMATE);
  }
  if (!p) throw std::runtime_error("FFTW planning failed");
  fftw_execute(p);
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(p);
}

}  // namespace fft

// ---------------------------------------------------------------------------
// grid

Grid make_grid(int n, double length) {
  if (n < 8 || n > kMaxGridPoints || n % 2 != 0) {
    std::ostringstream os;
    os << "grid points per axis must be even and in [8, " << kMaxGridPoints << "], got " << n;
    throw std::invalid_argument(os.str());
  }
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("grid length must be positive and finite");
  Grid g;
  g.n_ = n;
  g.length_ = length;
  return g;
}

double Grid::wavenumber(int idx) const {
  const int m = idx < n_ / 2 ? idx : idx - n_;
  return 2.0 * std::numbers::pi / length_ * m;
}

double Grid::k_nyquist() const { return std::numbers::pi * n_ / length_; }

double Grid::k_max() const { return std::sqrt(3.0) * k_nyquist(); }

// ---------------------------------------------------------------------------
// reductions

namespace {

template <class Term>
double pairwise_impl(std::size_t begin, std::size_t end, const Term& term) {
  const std::size_t count = end - begin;
  if (count <= 64) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += term(i);
    return s;
  }
  const std::size_t mid = begin + count / 2;
  return pairwise_impl(begin, mid, term) + pairwise_impl(mid, end, term);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_impl(0, values.size(), [&](std::size_t i) { return values[i]; });
}

double pairwise_sum(std::size_t count, const std::function<double(std::size_t)>& term) {
  return pairwise_impl(0, count, term);
}

cplx inner(const ComplexField& f, const ComplexField& g) {
  if (!(f.grid == g.grid)) throw std::invalid_argument("inner: fields live on different grids");
  const auto& a = f.values;
  const auto& b = g.values;
  const double re = pairwise_impl(0, a.size(), [&](std::size_t i) {
    return a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  });
  const double im = pairwise_impl(0, a.size(), [&](std::size_t i) {
    return a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  });
  return f.grid.cell_volume() * cplx(re, im);
}

double norm_sq(const ComplexField& f) {
  const auto& a = f.values;
  return f.grid.cell_volume() * pairwise_impl(0, a.size(), [&](std::size_t i) { return std::norm(a[i]); });
}

double integrate(const RealField& f) { return f.grid.cell_volume() * pairwise_sum(f.values); }

// ---------------------------------------------------------------------------
// symbols and transforms

SpectralSymbol::SpectralSymbol(const Grid& g, const Function& fn) : grid_(g), table_(g.size()) {
  const int n = g.n();
  for (int k = 0; k < n; ++k) {
    const double kz = g.wavenumber(k);
    for (int j = 0; j < n; ++j) {
      const double ky = g.wavenumber(j);
      for (int i = 0; i < n; ++i) table_[g.index(i, j, k)] = fn(g.wavenumber(i), ky, kz);
    }
  }
}

double SpectralSymbol::max_abs() const {
  double m = 0.0;
  for (double v : table_) m = std::max(m, std::abs(v));
  return m;
}

bool SpectralSymbol::finite() const {
  for (double v : table_)
    if (!std::isfinite(v)) return false;
  return true;
}

SpectralSymbol kinetic_symbol(const Grid& g, double mass) {
  const double m2 = mass * mass;
  return SpectralSymbol(g, [m2](double kx, double ky, double kz) {
    return std::sqrt(kx * kx + ky * ky + kz * kz + m2);
  });
}

SpectralSymbol abs_k_symbol(const Grid& g) {
  return SpectralSymbol(g, [](double kx, double ky, double kz) {
    return std::sqrt(kx * kx + ky * ky + kz * kz);
  });
}

void fft_forward(const Grid& g, const cplx* in, cplx* out) { fft::c2c_forward(g.n(), in, out); }

void fft_inverse(const Grid& g, const cplx* in, cplx* out) {
  fft::c2c_backward(g.n(), in, out);
  const double scale = 1.0 / double(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= scale;
}

ComplexField to_spectral(const ComplexField& f) {
  if (f.space != Space::Position) throw std::invalid_argument("to_spectral: field already spectral");
  ComplexField out(f.grid, Space::Spectral);
  fft_forward(f.grid, f.values.data(), out.values.data());
  return out;
}

ComplexField to_position(const ComplexField& f) {
  if (f.space != Space::Spectral) throw std::invalid_argument("to_position: field already in position space");
  ComplexField out(f.grid, Space::Position);
  fft_inverse(f.grid, f.values.data(), out.values.data());
  return out;
}

ComplexField apply_multiplier(const ComplexField& f, const SpectralSymbol& s) {
  if (!(f.grid == s.grid())) throw std::invalid_argument("apply_multiplier: symbol grid mismatch");
  if (!s.finite()) throw std::invalid_argument("apply_multiplier: symbol has non-finite values");
  for (const auto& v : f.values)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("apply_multiplier: field has non-finite values");
  ComplexField spec = to_spectral(f);
  const auto table = s.table();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= table[i];
  return to_position(spec);
}

std::array<RealField, 3> position_coordinates(const Grid& g) {
  std::array<RealField, 3> x{RealField(g), RealField(g), RealField(g)};
  const int n = g.n();
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const std::size_t idx = g.index(i, j, k);
        x[0][idx] = g.coordinate(i);
        x[1][idx] = g.coordinate(j);
        x[2][idx] = g.coordinate(k);
      }
  return x;
}

// ---------------------------------------------------------------------------
// resampling

namespace {

// Row-major n x n matrix W with W[i][j] = weight of source node j for the
// trigonometric interpolant evaluated at coordinate(i)/scale. Real because
// the Nyquist term is taken as a cosine.
std::vector<double> interpolation_matrix(const Grid& g, double scale) {
  const int n = g.n();
  const double kappa = 2.0 * std::numbers::pi / g.length();
  std::vector<double> w(std::size_t(n) * n);
  for (int i = 0; i < n; ++i) {
    const double y = g.coordinate(i) / scale;
    for (int j = 0; j < n; ++j) {
      const double d = y - g.coordinate(j);
      double s = 1.0 + std::cos(0.5 * n * kappa * d);
      for (int m = 1; m < n / 2; ++m) s += 2.0 * std::cos(m * kappa * d);
      w[std::size_t(i) * n + j] = s / n;
    }
  }
  return w;
}

}  // namespace

ComplexField band_limited_resample(const ComplexField& f, double scale, double norm_tolerance) {
  if (f.space != Space::Position) throw std::invalid_argument("band_limited_resample: field must be in position space");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw std::invalid_argument("band_limited_resample: scale must be positive");
  const Grid& g = f.grid;
  const int n = g.n();
  const auto w = interpolation_matrix(g, scale);

  ComplexField a = f;
  ComplexField b(g);
  std::vector<cplx> line(n);
  // Pass along each axis: stride 1 (x), n (y), n*n (z).
  const std::size_t strides[3] = {1, std::size_t(n), std::size_t(n) * n};
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = strides[axis];
    for (std::size_t base = 0; base < g.size(); ++base) {
      // base enumerates line starts: coordinate along `axis` must be zero.
      if ((base / stride) % n != 0) continue;
      for (int j = 0; j < n; ++j) line[j] = a[base + j * stride];
      for (int i = 0; i < n; ++i) {
        cplx s = 0.0;
        const double* row = &w[std::size_t(i) * n];
        for (int j = 0; j < n; ++j) s += row[j] * line[j];
        b[base + i * stride] = s;
      }
    }
    std::swap(a, b);
  }
  const double amp = std::pow(scale, -1.5);
  for (auto& v : a.values) v *= amp;

  const double before = norm_sq(f);
  const double after = norm_sq(a);
  if (before > 0.0) {
    const double rel = std::abs(after - before) / before;
    if (rel > norm_tolerance) {
      std::ostringstream os;
      os << "band_limited_resample: scale " << scale << " changes the L2 norm by " << rel
         << " (support left the box or the band)";
      throw AliasingError(os.str(), rel);
    }
  }
  return a;
}

}  // namespace prhf
