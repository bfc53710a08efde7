#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace sfw {

using cplx = std::complex<double>;

// Row-major 2-D array. Dimensions are ints on purpose: every grid in this
// library is at most a few hundred per side, and signed indices keep the
// modular mirror arithmetic readable.
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int r, int c, T fill = T{})
      : rows(r), cols(c), data(static_cast<size_t>(r > 0 ? r : 0) * static_cast<size_t>(c > 0 ? c : 0), fill) {
    if (r <= 0 || c <= 0) throw std::invalid_argument("Grid: dimensions must be positive");
  }

  T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  const T& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
};

using RealPlane = Grid<double>;
using ComplexPlane = Grid<cplx>;

inline bool all_finite(const RealPlane& p) {
  for (double x : p.data)
    if (!std::isfinite(x)) return false;
  return true;
}

inline bool all_finite(const ComplexPlane& p) {
  for (const cplx& z : p.data)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

inline RealPlane real_part(const ComplexPlane& p) {
  RealPlane out(p.rows, p.cols);
  for (size_t i = 0; i < p.data.size(); ++i) out.data[i] = p.data[i].real();
  return out;
}

inline double max_abs_imag(const ComplexPlane& p) {
  double m = 0.0;
  for (const cplx& z : p.data) m = std::max(m, std::abs(z.imag()));
  return m;
}

inline double max_abs(const ComplexPlane& p) {
  double m = 0.0;
  for (const cplx& z : p.data) m = std::max(m, std::abs(z));
  return m;
}

// Frequency-plane grid. `centered` tracks the layout: false means the DC bin
// is at (0,0) (raw transform order), true means it has been rolled to
// (rows/2, cols/2). `hermitian` is the producer's claim that the values
// satisfy S[(R-r)%R][(C-c)%C] == conj(S[r][c]); use is_hermitian() to verify
// numerically.
struct Spectrum {
  ComplexPlane g;
  bool centered = false;
  bool hermitian = false;

  Spectrum() = default;
  Spectrum(int r, int c) : g(r, c) {}
};

}  // namespace sfw
