#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

#include <sfw/hermitian.hpp>

using sfw::cplx;
using sfw::Spectrum;

namespace {

Spectrum random_spectrum(int r, int c, uint64_t seed, double scale) {
  Spectrum s(r, c);
  sfw::Rng rng(seed);
  for (cplx& z : s.g.data) z = rng.complex_gaussian(scale);
  return s;
}

}  // namespace

TEST_CASE("self-conjugate points per parity") {
  using P = std::pair<int, int>;
  auto pts = sfw::self_conjugate_points(64, 64);
  std::sort(pts.begin(), pts.end());
  CHECK(pts == std::vector<P>{{0, 0}, {0, 32}, {32, 0}, {32, 32}});

  CHECK(sfw::self_conjugate_points(3, 3) == std::vector<P>{{0, 0}});

  auto pts46 = sfw::self_conjugate_points(4, 6);
  std::sort(pts46.begin(), pts46.end());
  CHECK(pts46 == std::vector<P>{{0, 0}, {0, 3}, {2, 0}, {2, 3}});
}

TEST_CASE("conjugate mirror is an involution and fixes self-conjugate bins") {
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 9; ++c) {
      auto [mr, mc] = sfw::conjugate_mirror(r, c, 6, 9);
      auto [br, bc] = sfw::conjugate_mirror(mr, mc, 6, 9);
      CHECK(br == r);
      CHECK(bc == c);
    }
  CHECK(sfw::is_self_conjugate(0, 0, 6, 9));
  CHECK(sfw::is_self_conjugate(3, 0, 6, 9));
  CHECK_FALSE(sfw::is_self_conjugate(3, 1, 6, 9));
}

TEST_CASE("hermitian_project is idempotent and produces a symmetric spectrum") {
  Spectrum s = random_spectrum(8, 8, 11, 4096.0);
  Spectrum p = sfw::hermitian_project(s);
  CHECK(p.hermitian);
  CHECK(sfw::max_hermitian_deviation(p) == 0.0);

  // Bit-exact idempotence: averaging a value with its own conjugate mirror a
  // second time must reproduce it.
  Spectrum pp = sfw::hermitian_project(p);
  for (size_t i = 0; i < p.g.data.size(); ++i) CHECK(pp.g.data[i] == p.g.data[i]);

  // Imaginary parts die at the self-conjugate bins.
  for (auto [r, c] : sfw::self_conjugate_points(8, 8)) CHECK(p.g.at(r, c).imag() == 0.0);
}

TEST_CASE("projected spectra invert to real planes") {
  for (int n : {4, 11, 64}) {
    Spectrum s = random_spectrum(n, n, 500 + static_cast<uint64_t>(n), static_cast<double>(n) * n);
    Spectrum p = sfw::hermitian_project(s);
    sfw::ComplexPlane plane = sfw::idft2(p);
    double tol = 1e-9 * std::max(1.0, sfw::max_abs(p.g));
    INFO("size " << n);
    CHECK(sfw::max_abs_imag(plane) <= tol);
  }
}

TEST_CASE("a real plane's spectrum is Hermitian; a generic complex one is not") {
  sfw::RealPlane f = sfw::gaussian_plane(16, 16, 99);
  Spectrum s = sfw::dft2(f);
  CHECK(s.hermitian);
  CHECK(sfw::is_hermitian(s, 1e-9 * std::max(1.0, sfw::max_abs(s.g))));

  Spectrum z = random_spectrum(16, 16, 100, 1.0);
  CHECK_FALSE(sfw::is_hermitian(z, 1e-6));
}

TEST_CASE("projection halves nothing it should not: Hermitian inputs are fixed points") {
  sfw::RealPlane f = sfw::gaussian_plane(12, 10, 42);
  Spectrum s = sfw::dft2(f);
  Spectrum p = sfw::hermitian_project(s);
  for (size_t i = 0; i < s.g.data.size(); ++i)
    CHECK(std::abs(p.g.data[i] - s.g.data[i]) <= 1e-9 * std::max(1.0, sfw::max_abs(s.g)));
}

TEST_CASE("white-noise spectra carry per-bin variance rows*cols*sigma^2") {
  // 4x4, sigma=2: expect 16*4 = 64 within 5% at 10^4 trials.
  double v = sfw::empirical_spectrum_variance(4, 4, 2.0, 10000, 2024);
  CHECK(v > 64.0 * 0.95);
  CHECK(v < 64.0 * 1.05);
}
