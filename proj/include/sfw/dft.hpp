#pragma once

#include <memory>
#include <mutex>
#include <numbers>
#include <unordered_map>

#include "grid.hpp"

namespace sfw {

namespace detail {

// w[j] = exp(-2*pi*i*j/n), the forward kernel. Tables are tiny (n <= a few
// hundred) and cached for the life of the process.
inline const std::vector<cplx>& twiddles(int n) {
  static std::mutex mu;
  static std::unordered_map<int, std::unique_ptr<std::vector<cplx>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    auto t = std::make_unique<std::vector<cplx>>(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      double a = -2.0 * std::numbers::pi * j / n;
      (*t)[j] = {std::cos(a), std::sin(a)};
    }
    it = cache.emplace(n, std::move(t)).first;
  }
  return *it->second;
}

// Length-n transforms along rows then columns, O(n^2) per axis. At this
// library's grid sizes (<= 64 per side) that is faster to get right than an
// FFT and more than fast enough; 44 = 4*11 would need a mixed-radix FFT
// anyway. Complex arithmetic is spelled out on doubles so the inner loop
// stays free of the library's NaN-propagating complex multiply.
inline ComplexPlane dft2_impl(const ComplexPlane& in, bool inverse) {
  const int R = in.rows, C = in.cols;
  const std::vector<cplx>& wc = twiddles(C);
  const std::vector<cplx>& wr = twiddles(R);
  const double sign = inverse ? -1.0 : 1.0;  // conjugate the kernel when inverting

  ComplexPlane tmp(R, C);
  for (int r = 0; r < R; ++r) {
    const cplx* row = &in.data[static_cast<size_t>(r) * C];
    for (int k = 0; k < C; ++k) {
      double sre = 0.0, sim = 0.0;
      int idx = 0;
      for (int n = 0; n < C; ++n) {
        const double xr = row[n].real(), xi = row[n].imag();
        const double tr = wc[idx].real(), ti = sign * wc[idx].imag();
        sre += xr * tr - xi * ti;
        sim += xr * ti + xi * tr;
        idx += k;
        if (idx >= C) idx -= C;
      }
      tmp.at(r, k) = {sre, sim};
    }
  }

  ComplexPlane out(R, C);
  for (int c = 0; c < C; ++c) {
    for (int k = 0; k < R; ++k) {
      double sre = 0.0, sim = 0.0;
      int idx = 0;
      for (int m = 0; m < R; ++m) {
        const cplx& x = tmp.at(m, c);
        const double xr = x.real(), xi = x.imag();
        const double tr = wr[idx].real(), ti = sign * wr[idx].imag();
        sre += xr * tr - xi * ti;
        sim += xr * ti + xi * tr;
        idx += k;
        if (idx >= R) idx -= R;
      }
      out.at(k, c) = {sre, sim};
    }
  }

  if (inverse) {
    const double scale = 1.0 / (static_cast<double>(R) * C);
    for (cplx& z : out.data) z *= scale;
  }
  return out;
}

}  // namespace detail

// Unnormalized forward transform, DC at (0,0).
inline Spectrum dft2(const ComplexPlane& in) {
  Spectrum s;
  s.g = detail::dft2_impl(in, false);
  s.centered = false;
  s.hermitian = false;
  return s;
}

// Real input gives an exactly Hermitian-symmetric spectrum (up to roundoff),
// so the flag is set on the result.
inline Spectrum dft2(const RealPlane& in) {
  ComplexPlane c(in.rows, in.cols);
  for (size_t i = 0; i < in.data.size(); ++i) c.data[i] = {in.data[i], 0.0};
  Spectrum s;
  s.g = detail::dft2_impl(c, false);
  s.centered = false;
  s.hermitian = true;
  return s;
}

// Inverse with 1/(R*C) normalization: idft2(dft2(f)) == f. Input must be in
// uncentered layout; shift() back first if needed.
inline ComplexPlane idft2(const Spectrum& s) {
  if (s.centered) throw std::invalid_argument("idft2: spectrum must be uncentered");
  return detail::dft2_impl(s.g, true);
}

enum class ShiftDirection { to_centered, to_uncentered };

// Circular roll between layouts. to_centered puts DC at (rows/2, cols/2)
// (floor division, so (1,1) for a 3x3 grid); to_uncentered is its exact
// inverse at every parity. For even dimensions the two rolls coincide and the
// operation is an involution.
inline Spectrum shift(const Spectrum& s, ShiftDirection dir) {
  if (dir == ShiftDirection::to_centered && s.centered)
    throw std::invalid_argument("shift: spectrum already centered");
  if (dir == ShiftDirection::to_uncentered && !s.centered)
    throw std::invalid_argument("shift: spectrum already uncentered");

  const int R = s.g.rows, C = s.g.cols;
  const int hr = R / 2, hc = C / 2;
  Spectrum out;
  out.g = ComplexPlane(R, C);
  out.hermitian = s.hermitian;
  out.centered = (dir == ShiftDirection::to_centered);
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) {
      if (dir == ShiftDirection::to_centered)
        out.g.at(r, c) = s.g.at((r - hr + R) % R, (c - hc + C) % C);
      else
        out.g.at(r, c) = s.g.at((r + hr) % R, (c + hc) % C);
    }
  }
  return out;
}

}  // namespace sfw
