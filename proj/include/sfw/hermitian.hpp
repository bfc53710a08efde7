#pragma once

#include <utility>
#include <vector>

#include "dft.hpp"
#include "rng.hpp"

namespace sfw {

// Conjugate-mirror partner of (r, c) in uncentered layout:
// S[(R-r)%R][(C-c)%C] == conj(S[r][c]) holds for the spectrum of any real
// plane. For even dimensions the same index formula happens to be valid in
// centered layout too (the roll by R/2 commutes with negation mod R); odd
// centered grids would need an offset, so everything in this header sticks to
// uncentered indices.
inline std::pair<int, int> conjugate_mirror(int r, int c, int rows, int cols) {
  return {(rows - r) % rows, (cols - c) % cols};
}

inline bool is_self_conjugate(int r, int c, int rows, int cols) {
  return conjugate_mirror(r, c, rows, cols) == std::pair<int, int>{r, c};
}

// Bins whose mirror is themselves; their imaginary part must vanish in any
// Hermitian spectrum. (0,0) always; add R/2 and C/2 axes for even dims, so a
// 64x64 grid has four such bins and a 3x3 grid only one.
inline std::vector<std::pair<int, int>> self_conjugate_points(int rows, int cols) {
  std::vector<int> rr{0}, cc{0};
  if (rows % 2 == 0) rr.push_back(rows / 2);
  if (cols % 2 == 0) cc.push_back(cols / 2);
  std::vector<std::pair<int, int>> out;
  for (int r : rr)
    for (int c : cc) out.emplace_back(r, c);
  return out;
}

// Largest |S[r][c] - conj(S[mirror])| over all bins.
inline double max_hermitian_deviation(const Spectrum& s) {
  if (s.centered) throw std::invalid_argument("max_hermitian_deviation: spectrum must be uncentered");
  const int R = s.g.rows, C = s.g.cols;
  double worst = 0.0;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      auto [mr, mc] = conjugate_mirror(r, c, R, C);
      worst = std::max(worst, std::abs(s.g.at(r, c) - std::conj(s.g.at(mr, mc))));
    }
  return worst;
}

inline bool is_hermitian(const Spectrum& s, double tol) {
  return max_hermitian_deviation(s) <= tol;
}

// Orthogonal projection onto the Hermitian subspace:
// P[r][c] = (S[r][c] + conj(S[mirror])) / 2. Idempotent bit-for-bit (the
// second application averages a value with itself) and zeroes the imaginary
// part at self-conjugate bins. The projected spectrum inverts to a real
// plane up to roundoff.
inline Spectrum hermitian_project(const Spectrum& s) {
  if (s.centered) throw std::invalid_argument("hermitian_project: spectrum must be uncentered");
  const int R = s.g.rows, C = s.g.cols;
  Spectrum out;
  out.g = ComplexPlane(R, C);
  out.centered = false;
  out.hermitian = true;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) {
      auto [mr, mc] = conjugate_mirror(r, c, R, C);
      out.g.at(r, c) = 0.5 * (s.g.at(r, c) + std::conj(s.g.at(mr, mc)));
    }
  return out;
}

// Monte-Carlo estimate of the per-bin spectrum variance of white Gaussian
// planes: draws `trials` N(0, sigma^2) planes, transforms each, and averages
// |F|^2 over every bin. For rows x cols input the expected value is
// rows*cols*sigma^2 in every bin, DC and Nyquist included.
inline double empirical_spectrum_variance(int rows, int cols, double sigma, int trials, uint64_t seed) {
  if (trials <= 0) throw std::invalid_argument("empirical_spectrum_variance: trials must be positive");
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    RealPlane p = gaussian_plane(rows, cols, derive_seed(seed, seed_stream::latent, static_cast<uint64_t>(t)), sigma);
    Spectrum s = dft2(p);
    double m = 0.0;
    for (const cplx& z : s.g.data) m += std::norm(z);
    acc += m / static_cast<double>(s.g.size());
  }
  return acc / trials;
}

}  // namespace sfw
