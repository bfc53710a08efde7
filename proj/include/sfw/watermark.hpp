#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dft.hpp"
#include "grid.hpp"
#include "hermitian.hpp"
#include "latent.hpp"
#include "qr.hpp"
#include "rng.hpp"

namespace sfw {

// The four pattern families. tree_ring is the non-symmetric baseline whose
// imaginary energy is thrown away on inversion; hstr and hsqr are the
// Hermitian-symmetric variants; noise_key is the channel-0 companion pattern
// used alongside a primary watermark.
enum class WatermarkKind { tree_ring, hstr, hsqr, noise_key };

inline std::string kind_name(WatermarkKind k) {
  switch (k) {
    case WatermarkKind::tree_ring: return "tree_ring";
    case WatermarkKind::hstr: return "hstr";
    case WatermarkKind::hsqr: return "hsqr";
    case WatermarkKind::noise_key: return "noise_key";
  }
  throw std::logic_error("kind_name: unreachable");
}

inline WatermarkKind kind_from_name(const std::string& s) {
  if (s == "tree_ring") return WatermarkKind::tree_ring;
  if (s == "hstr") return WatermarkKind::hstr;
  if (s == "hsqr") return WatermarkKind::hsqr;
  if (s == "noise_key") return WatermarkKind::noise_key;
  throw std::invalid_argument("unknown watermark kind: " + s);
}

enum class EmbedRegion { full_frame, center_aware };

inline std::string region_name(EmbedRegion r) {
  return r == EmbedRegion::center_aware ? "center_aware" : "full_frame";
}

struct RegionWindow {
  int row0 = 0, col0 = 0, rows = 0, cols = 0;
  bool operator==(const RegionWindow&) const = default;
};

// Center-aware embedding keeps a 10-pixel margin on every side (the central
// 44x44 of a 64x64 plane), which is what lets the watermark ride out
// moderate crops.
constexpr int kCenterMargin = 10;

inline RegionWindow region_window(int height, int width, EmbedRegion region) {
  if (height <= 0 || width <= 0) throw std::invalid_argument("region_window: bad plane size");
  if (region == EmbedRegion::full_frame) return {0, 0, height, width};
  if (height <= 2 * kCenterMargin || width <= 2 * kCenterMargin)
    throw std::invalid_argument("region_window: plane too small for center-aware margins");
  return {kCenterMargin, kCenterMargin, height - 2 * kCenterMargin, width - 2 * kCenterMargin};
}

// Centered-coordinate helpers. The DC bin of an n-point centered spectrum
// sits at floor(n/2); these convert back and forth and answer symmetry
// questions by mapping into the uncentered layout where the mirror formula
// lives.
namespace maskdetail {

inline int to_uncentered_index(int centered, int n) { return (centered - n / 2 + n) % n; }

inline bool self_conjugate_centered(int r, int c, int rows, int cols) {
  return is_self_conjugate(to_uncentered_index(r, rows), to_uncentered_index(c, cols), rows, cols);
}

// Canonical half-spectrum membership: a bin is "free" when it is not
// self-conjugate and precedes its mirror lexicographically in the uncentered
// layout. Exactly one of every conjugate pair is free.
inline bool in_free_half_centered(int r, int c, int rows, int cols) {
  int ru = to_uncentered_index(r, rows), cu = to_uncentered_index(c, cols);
  auto [mr, mc] = conjugate_mirror(ru, cu, rows, cols);
  if (ru == mr && cu == mc) return false;
  return ru < mr || (ru == mr && cu < mc);
}

// Integer ring index: round-half-away-from-zero of the Euclidean distance to
// DC. Ties at .5 cannot occur because squared distances are integers.
inline int ring_of(int r, int c, int rows, int cols) {
  return static_cast<int>(std::lround(std::hypot(static_cast<double>(r - rows / 2),
                                                 static_cast<double>(c - cols / 2))));
}

}  // namespace maskdetail

// Everything needed to build one key. channel -1 means "the conventional
// default": 3 for pattern kinds, 0 for the noise key.
struct KeySpec {
  WatermarkKind kind = WatermarkKind::hstr;
  int channel = -1;
  EmbedRegion region = EmbedRegion::full_frame;
  int frame_rows = 64;
  int frame_cols = 64;
  int radius = 14;
  double lambda = 45.0;
  int cell_px = 2;
  int qr_mask_id = 0;
  std::optional<Payload72> payload;  // hsqr; derived from the seed if absent
};

struct WatermarkKey {
  WatermarkKind kind = WatermarkKind::hstr;
  int channel = 3;
  uint64_t seed = 0;
  EmbedRegion region = EmbedRegion::full_frame;
  int frame_rows = 64;
  int frame_cols = 64;
  int radius = 14;
  std::vector<cplx> ring_values;  // one complex value per integer ring, rebuilt from seed
  Payload72 payload{};
  double lambda = 45.0;
  int cell_px = 2;
  int qr_mask_id = 0;
  std::string mask_version = "sfw-mask-v1";

  RegionWindow window() const { return region_window(frame_rows, frame_cols, region); }
};

// Spectrum coordinates (centered view) whose tagged components carry the
// watermark. A coordinate can contribute its real part, imaginary part, or
// both to the L1 distance.
struct MaskEntry {
  int row = 0, col = 0;
  bool re = false, im = false;
};

struct KeyRegionMask {
  int channel = 0;
  RegionWindow window;
  std::vector<MaskEntry> entries;

  size_t scalar_count() const {
    size_t n = 0;
    for (const auto& e : entries) n += static_cast<size_t>(e.re) + static_cast<size_t>(e.im);
    return n;
  }
};

namespace maskdetail {

inline void validate_qr_geometry(const WatermarkKey& key, const RegionWindow& win) {
  if (key.cell_px < 2 || key.cell_px % 2 != 0)
    throw std::invalid_argument("hsqr: cell_px must be even and >= 2");
  int block_rows = QrMatrix::size * key.cell_px;
  int block_cols = block_rows / 2;
  int r0 = (win.rows - block_rows) / 2;
  int c0 = win.cols / 2 + 1;  // one column right of the vertical DC axis
  if (r0 < 0 || c0 + block_cols > win.cols)
    throw std::invalid_argument("hsqr: block does not fit the embedding window");
}

inline void validate_disk_geometry(const WatermarkKey& key, const RegionWindow& win) {
  if (key.radius < 0) throw std::invalid_argument("tree ring: radius must be >= 0");
  int h = win.rows / 2, w = win.cols / 2;
  int room = std::min(std::min(h, win.rows - 1 - h), std::min(w, win.cols - 1 - w));
  if (key.radius > room) throw std::invalid_argument("tree ring: disk exceeds the embedding window");
}

}  // namespace maskdetail

inline WatermarkKey make_key(const KeySpec& spec, uint64_t seed) {
  WatermarkKey key;
  key.kind = spec.kind;
  key.channel = spec.channel >= 0 ? spec.channel
                                  : (spec.kind == WatermarkKind::noise_key ? 0 : 3);
  if (key.channel > 3) throw std::invalid_argument("make_key: channel must be in 0..3");
  key.seed = seed;
  key.region = spec.region;
  key.frame_rows = spec.frame_rows;
  key.frame_cols = spec.frame_cols;
  key.radius = spec.radius;
  key.lambda = spec.lambda;
  key.cell_px = spec.cell_px;
  key.qr_mask_id = spec.qr_mask_id;

  RegionWindow win = key.window();  // validates frame size for the region

  switch (spec.kind) {
    case WatermarkKind::tree_ring:
    case WatermarkKind::hstr: {
      maskdetail::validate_disk_geometry(key, win);
      // One complex Gaussian per integer ring, with the per-bin spectrum
      // variance M·N that a unit-variance real plane would produce.
      double variance = static_cast<double>(win.rows) * static_cast<double>(win.cols);
      Rng rng(derive_seed(seed, seed_stream::ring, 0));
      key.ring_values.reserve(static_cast<size_t>(key.radius));
      for (int r = 1; r <= key.radius; ++r) key.ring_values.push_back(rng.complex_gaussian(variance));
      break;
    }
    case WatermarkKind::hsqr: {
      if (spec.lambda <= 0) throw std::invalid_argument("hsqr: amplitude must be positive");
      if (spec.qr_mask_id < 0 || spec.qr_mask_id > 7)
        throw std::invalid_argument("hsqr: qr_mask_id must be 0..7");
      maskdetail::validate_qr_geometry(key, win);
      key.payload = spec.payload ? *spec.payload
                                 : Payload72::random(derive_seed(seed, seed_stream::payload, 0));
      break;
    }
    case WatermarkKind::noise_key:
      break;  // the seed is the whole pattern
  }
  return key;
}

inline KeyRegionMask key_region_mask(const WatermarkKey& key) {
  using namespace maskdetail;
  RegionWindow win = key.window();
  const int R = win.rows, C = win.cols;

  KeyRegionMask mask;
  mask.channel = key.channel;
  mask.window = win;

  switch (key.kind) {
    case WatermarkKind::tree_ring:
      validate_disk_geometry(key, win);
      if (key.radius == 0) break;  // no ring values, nothing to carry
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
          if (ring_of(r, c, R, C) <= key.radius) mask.entries.push_back({r, c, true, true});
      break;
    case WatermarkKind::hstr:
      validate_disk_geometry(key, win);
      if (key.radius == 0) break;
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
          if (ring_of(r, c, R, C) <= key.radius && in_free_half_centered(r, c, R, C))
            mask.entries.push_back({r, c, true, true});
      break;
    case WatermarkKind::hsqr: {
      validate_qr_geometry(key, win);
      const int block_rows = QrMatrix::size * key.cell_px;
      const int block_cols = block_rows / 2;
      const int r0 = (R - block_rows) / 2;
      const int c0 = C / 2 + 1;
      for (int i = 0; i < block_rows; ++i)
        for (int j = 0; j < block_cols; ++j)
          mask.entries.push_back({r0 + i, c0 + j, true, true});
      break;
    }
    case WatermarkKind::noise_key:
      for (int r = 0; r < R; ++r)
        for (int c = 0; c < C; ++c)
          mask.entries.push_back({r, c, true, !self_conjugate_centered(r, c, R, C)});
      break;
  }
  return mask;
}

// The seeded channel-0 pattern: the spectrum of a unit-variance real plane,
// so it is exactly Hermitian and per-bin CN(0, M·N) by construction.
inline ComplexPlane noise_pattern_uncentered(const WatermarkKey& key) {
  RegionWindow win = key.window();
  RealPlane plane = gaussian_plane(win.rows, win.cols, derive_seed(key.seed, seed_stream::noise_plane, 0));
  return dft2(plane).g;
}

namespace maskdetail {

inline cplx ring_value_at(const WatermarkKey& key, int ring) {
  // Ring 0 is just the DC bin; it borrows the innermost ring's value.
  size_t idx = ring == 0 ? 0 : static_cast<size_t>(ring - 1);
  return key.ring_values.at(idx);
}

// +1/-1 per QR pixel, block-shaped: entry (i, j) of the mask corresponds to
// pixel (i, j) for the real component and (i, j + half) for the imaginary.
inline RealPlane qr_sign_plane(const WatermarkKey& key) {
  return cell_upsample(qr_build(key.payload, key.qr_mask_id), key.cell_px);
}

}  // namespace maskdetail

// Per-coordinate target values, aligned with key_region_mask(key).entries.
// Only the tagged components are meaningful.
inline std::vector<cplx> reference_pattern(const WatermarkKey& key) {
  using namespace maskdetail;
  KeyRegionMask mask = key_region_mask(key);
  RegionWindow win = mask.window;
  std::vector<cplx> ref;
  ref.reserve(mask.entries.size());

  switch (key.kind) {
    case WatermarkKind::tree_ring:
    case WatermarkKind::hstr:
      for (const auto& e : mask.entries)
        ref.push_back(ring_value_at(key, ring_of(e.row, e.col, win.rows, win.cols)));
      break;
    case WatermarkKind::hsqr: {
      RealPlane pix = qr_sign_plane(key);
      const int half = pix.cols / 2;
      const int r0 = (win.rows - pix.rows) / 2;
      const int c0 = win.cols / 2 + 1;
      for (const auto& e : mask.entries) {
        int i = e.row - r0, j = e.col - c0;
        ref.emplace_back(pix.at(i, j) * key.lambda, pix.at(i, j + half) * key.lambda);
      }
      break;
    }
    case WatermarkKind::noise_key: {
      Spectrum s;
      s.g = noise_pattern_uncentered(key);
      s.hermitian = true;
      Spectrum centered = shift(s, ShiftDirection::to_centered);
      for (const auto& e : mask.entries) ref.push_back(centered.g.at(e.row, e.col));
      break;
    }
  }
  return ref;
}

// Writes the key's pattern into the latent and inverts back to the spatial
// domain. Hermitian-symmetric kinds produce an exactly-real result (checked
// against a scaled 1e-9 budget); the tree-ring baseline keeps only the real
// part of its inverse, deliberately dropping energy. Channels other than the
// key's pass through untouched.
inline LatentTensor embed(const LatentTensor& latent, const WatermarkKey& key) {
  using namespace maskdetail;
  if (key.channel < 0 || key.channel >= latent.channels)
    throw std::invalid_argument("embed: key channel out of range");
  if (latent.height != key.frame_rows || latent.width != key.frame_cols)
    throw std::invalid_argument("embed: latent shape does not match the key's frame");
  for (double v : latent.v)
    if (!std::isfinite(v)) throw std::invalid_argument("embed: non-finite latent");

  KeyRegionMask mask = key_region_mask(key);
  if (mask.entries.empty()) return latent;  // nothing to write: bit-exact pass-through

  RegionWindow win = mask.window;
  const int R = win.rows, C = win.cols;

  RealPlane wp(R, C);
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) wp.at(r, c) = latent.at(key.channel, win.row0 + r, win.col0 + c);

  Spectrum spec = dft2(wp);  // uncentered

  auto uncych = [&](const MaskEntry& e) {
    return std::pair<int, int>(to_uncentered_index(e.row, R), to_uncentered_index(e.col, C));
  };

  switch (key.kind) {
    case WatermarkKind::tree_ring: {
      // Baseline: ring values stamped on the whole disk with no conjugate
      // bookkeeping, so the spectrum generally stops being Hermitian.
      std::vector<cplx> ref = reference_pattern(key);
      for (size_t i = 0; i < mask.entries.size(); ++i) {
        auto [ru, cu] = uncych(mask.entries[i]);
        spec.g.at(ru, cu) = ref[i];
      }
      spec.hermitian = false;
      break;
    }
    case WatermarkKind::hstr: {
      // Ring values go into the free half; mirrors receive conjugates so the
      // later projection is a no-op rather than an averaging step.
      std::vector<cplx> ref = reference_pattern(key);
      for (size_t i = 0; i < mask.entries.size(); ++i) {
        auto [ru, cu] = uncych(mask.entries[i]);
        auto [mr, mc] = conjugate_mirror(ru, cu, R, C);
        spec.g.at(ru, cu) = ref[i];
        spec.g.at(mr, mc) = std::conj(ref[i]);
      }
      break;
    }
    case WatermarkKind::hsqr: {
      RealPlane pix = qr_sign_plane(key);
      const int half = pix.cols / 2;
      const int r0 = (R - pix.rows) / 2;
      const int c0 = C / 2 + 1;
      for (const auto& e : mask.entries) {
        auto [ru, cu] = uncych(e);
        int i = e.row - r0, j = e.col - c0;
        cplx cur = spec.g.at(ru, cu);
        // Keep each component's magnitude, impose the bit's sign.
        double re = std::abs(cur.real()) * (pix.at(i, j) > 0 ? 1.0 : -1.0);
        double im = std::abs(cur.imag()) * (pix.at(i, j + half) > 0 ? 1.0 : -1.0);
        auto [mr, mc] = conjugate_mirror(ru, cu, R, C);
        spec.g.at(ru, cu) = {re, im};
        spec.g.at(mr, mc) = {re, -im};
      }
      break;
    }
    case WatermarkKind::noise_key:
      spec.g = noise_pattern_uncentered(key);
      break;
  }

  if (key.kind != WatermarkKind::tree_ring) spec = hermitian_project(spec);

  ComplexPlane back = idft2(spec);
  if (key.kind != WatermarkKind::tree_ring) {
    double tol = 1e-9 * std::max(1.0, max_abs(spec.g));
    if (max_abs_imag(back) > tol)
      throw std::runtime_error("embed: inverse transform lost realness beyond tolerance");
  }

  LatentTensor out = latent;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) out.at(key.channel, win.row0 + r, win.col0 + c) = back.at(r, c).real();
  return out;
}

// Windowed spectrum of one channel, centered so masks index it directly.
inline Spectrum extract_spectrum(const LatentTensor& latent, int channel, EmbedRegion region) {
  if (channel < 0 || channel >= latent.channels)
    throw std::invalid_argument("extract_spectrum: channel out of range");
  RegionWindow win = region_window(latent.height, latent.width, region);
  RealPlane wp(win.rows, win.cols);
  for (int r = 0; r < win.rows; ++r)
    for (int c = 0; c < win.cols; ++c) wp.at(r, c) = latent.at(channel, win.row0 + r, win.col0 + c);
  return shift(dft2(wp), ShiftDirection::to_centered);
}

// Spectrum values at the mask's coordinates, aligned with mask.entries.
inline std::vector<cplx> masked_values(const Spectrum& centered, const KeyRegionMask& mask) {
  if (!centered.centered) throw std::invalid_argument("masked_values: spectrum must be centered");
  if (centered.g.rows != mask.window.rows || centered.g.cols != mask.window.cols)
    throw std::invalid_argument("masked_values: spectrum shape does not match the mask window");
  std::vector<cplx> out;
  out.reserve(mask.entries.size());
  for (const auto& e : mask.entries) out.push_back(centered.g.at(e.row, e.col));
  return out;
}

// Tagged components of `values` in mask order: re first where tagged, then
// im. This is the scalar vector the L1 detector consumes.
inline std::vector<double> flatten_components(const std::vector<cplx>& values, const KeyRegionMask& mask) {
  if (values.size() != mask.entries.size())
    throw std::invalid_argument("flatten_components: value/mask length mismatch");
  std::vector<double> flat;
  flat.reserve(mask.scalar_count());
  for (size_t i = 0; i < values.size(); ++i) {
    if (mask.entries[i].re) flat.push_back(values[i].real());
    if (mask.entries[i].im) flat.push_back(values[i].imag());
  }
  return flat;
}

// Drops one component family from a mask (used by the real-only tree-ring
// detection variant). Entries left with no tags are removed.
inline KeyRegionMask restrict_components(const KeyRegionMask& mask, bool keep_re, bool keep_im) {
  KeyRegionMask out;
  out.channel = mask.channel;
  out.window = mask.window;
  for (const auto& e : mask.entries) {
    MaskEntry ne{e.row, e.col, e.re && keep_re, e.im && keep_im};
    if (ne.re || ne.im) out.entries.push_back(ne);
  }
  return out;
}

}  // namespace sfw
