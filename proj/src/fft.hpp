// Internal FFTW plan cache. Plans are made once per (shape, kind) with
// FFTW_ESTIMATE under a mutex and executed through the new-array interface,
// so results are identical whichever thread runs them.
#pragma once

#include <complex>
#include <cstddef>

namespace prhf::fft {

using cplx = std::complex<double>;

// Cubic n^3 complex transforms, out-of-place, unnormalized.
void c2c_forward(int n, const cplx* in, cplx* out);
void c2c_backward(int n, const cplx* in, cplx* out);

// Cubic n^3 real <-> half-spectrum n*n*(n/2+1), out-of-place, unnormalized.
// c2r destroys its input.
void r2c(int n, const double* in, cplx* out);
void c2r(int n, cplx* in, double* out);

// In-place 3D REDFT00 on an m^3 real array (logical even period 2(m-1)).
void redft00(int m, double* data);

inline std::size_t half_size(int n) { return std::size_t(n) * n * (n / 2 + 1); }

}  // namespace prhf::fft
