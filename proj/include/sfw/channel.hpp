#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "grid.hpp"
#include "latent.hpp"
#include "rng.hpp"

namespace sfw {

// Rendered stand-in for a generated image: same tensor layout as a latent
// but with values clamped to [0,1].
struct SurrogateImage {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> v;

  SurrogateImage() = default;
  SurrogateImage(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), v(static_cast<size_t>(c) * static_cast<size_t>(h) * static_cast<size_t>(w), fill) {
    if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("SurrogateImage: dimensions must be positive");
  }

  double& at(int c, int r, int col) {
    return v[(static_cast<size_t>(c) * height + static_cast<size_t>(r)) * width + static_cast<size_t>(col)];
  }
  double at(int c, int r, int col) const {
    return v[(static_cast<size_t>(c) * height + static_cast<size_t>(r)) * width + static_cast<size_t>(col)];
  }
};

namespace channeldetail {

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace channeldetail

// The surrogate "generator": an invertible affine squeeze of the latent
// range into [0,1]. Values beyond +-4 saturate (about 6e-5 of N(0,1) mass).
inline SurrogateImage render(const LatentTensor& latent) {
  for (double x : latent.v)
    if (!std::isfinite(x)) throw std::invalid_argument("render: non-finite latent");
  SurrogateImage img(latent.channels, latent.height, latent.width);
  for (size_t i = 0; i < latent.v.size(); ++i) img.v[i] = channeldetail::clamp01((latent.v[i] + 4.0) / 8.0);
  return img;
}

// The surrogate "inverter": exact inverse of render inside the clamp range.
inline LatentTensor unrender(const SurrogateImage& img) {
  LatentTensor latent(img.channels, img.height, img.width);
  for (size_t i = 0; i < img.v.size(); ++i) latent.v[i] = 8.0 * img.v[i] - 4.0;
  return latent;
}

enum class AttackKind {
  identity,
  brightness,
  contrast,
  jpeg,
  blur,
  noise,
  crop_center,
  crop_random,
  regen,
};

inline std::string attack_kind_name(AttackKind k) {
  switch (k) {
    case AttackKind::identity: return "identity";
    case AttackKind::brightness: return "brightness";
    case AttackKind::contrast: return "contrast";
    case AttackKind::jpeg: return "jpeg";
    case AttackKind::blur: return "blur";
    case AttackKind::noise: return "noise";
    case AttackKind::crop_center: return "crop_center";
    case AttackKind::crop_random: return "crop_random";
    case AttackKind::regen: return "regen";
  }
  throw std::logic_error("attack_kind_name: unreachable");
}

inline AttackKind attack_kind_from_name(const std::string& s) {
  for (AttackKind k : {AttackKind::identity, AttackKind::brightness, AttackKind::contrast,
                       AttackKind::jpeg, AttackKind::blur, AttackKind::noise,
                       AttackKind::crop_center, AttackKind::crop_random, AttackKind::regen})
    if (attack_kind_name(k) == s) return k;
  throw std::invalid_argument("unknown attack kind: " + s);
}

// One attack with its parameters in the units the paper uses. Unused fields
// keep their defaults; validate_attack checks the ones the kind reads.
struct AttackSpec {
  AttackKind kind = AttackKind::identity;
  double factor = 1.0;     // brightness, contrast
  int quality = 100;       // jpeg
  int radius = 0;          // blur, in pixels
  double sigma = 0.0;      // noise
  double scale = 1.0;      // crop_center, crop_random (area fraction kept)
  uint64_t seed = 0;       // crop_random offset stream
  int t_star = 0;          // regen
  int steps_total = 1000;  // regen
};

inline void validate_attack(const AttackSpec& spec) {
  switch (spec.kind) {
    case AttackKind::identity: return;
    case AttackKind::brightness:
    case AttackKind::contrast:
      if (!(spec.factor > 0.0) || !std::isfinite(spec.factor))
        throw std::invalid_argument("attack: factor must be positive");
      return;
    case AttackKind::jpeg:
      if (spec.quality < 1 || spec.quality > 100)
        throw std::invalid_argument("attack: jpeg quality must be 1..100");
      return;
    case AttackKind::blur:
      if (spec.radius < 0) throw std::invalid_argument("attack: blur radius must be >= 0");
      return;
    case AttackKind::noise:
      if (!(spec.sigma >= 0.0) || !std::isfinite(spec.sigma))
        throw std::invalid_argument("attack: noise sigma must be >= 0");
      return;
    case AttackKind::crop_center:
    case AttackKind::crop_random:
      if (!(spec.scale > 0.0 && spec.scale <= 1.0))
        throw std::invalid_argument("attack: crop scale must be in (0,1]");
      return;
    case AttackKind::regen:
      if (spec.steps_total < 1) throw std::invalid_argument("attack: steps_total must be >= 1");
      if (spec.t_star < 0 || spec.t_star > spec.steps_total)
        throw std::invalid_argument("attack: t_star must be in [0, steps_total]");
      return;
  }
  throw std::invalid_argument("attack: unknown kind");
}

// Stable row label for tables: kind plus its distinguishing parameter.
inline std::string attack_label(const AttackSpec& spec) {
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return std::string(buf);
  };
  switch (spec.kind) {
    case AttackKind::identity: return "identity";
    case AttackKind::brightness: return "brightness_" + num(spec.factor);
    case AttackKind::contrast: return "contrast_" + num(spec.factor);
    case AttackKind::jpeg: return "jpeg_" + std::to_string(spec.quality);
    case AttackKind::blur: return "blur_" + std::to_string(spec.radius);
    case AttackKind::noise: return "noise_" + num(spec.sigma);
    case AttackKind::crop_center: return "crop_center_" + num(spec.scale);
    case AttackKind::crop_random: return "crop_random_" + num(spec.scale);
    case AttackKind::regen: return "regen_" + std::to_string(spec.t_star);
  }
  throw std::logic_error("attack_label: unreachable");
}

namespace channeldetail {

// Kept-window side for an area fraction: round(dim * sqrt(scale)).
inline int crop_side(int dim, double scale) {
  int side = static_cast<int>(std::lround(dim * std::sqrt(scale)));
  return std::min(std::max(side, 1), dim);
}

// 1-D Gaussian blur along rows, sigma = radius/2, indices reflected about
// the edge samples. Applied twice (transposed) for the 2-D kernel.
inline void blur_rows(RealPlane& p, int radius) {
  std::vector<double> w(static_cast<size_t>(2 * radius + 1));
  double sigma = radius / 2.0, acc = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    w[static_cast<size_t>(i + radius)] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    acc += w[static_cast<size_t>(i + radius)];
  }
  for (double& x : w) x /= acc;

  std::vector<double> row(static_cast<size_t>(p.cols));
  for (int r = 0; r < p.rows; ++r) {
    for (int c = 0; c < p.cols; ++c) {
      double s = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        int cc = c + i;
        if (cc < 0) cc = -cc;                                // reflect
        if (cc >= p.cols) cc = 2 * (p.cols - 1) - cc;
        s += w[static_cast<size_t>(i + radius)] * p.at(r, cc);
      }
      row[static_cast<size_t>(c)] = s;
    }
    for (int c = 0; c < p.cols; ++c) p.at(r, c) = row[static_cast<size_t>(c)];
  }
}

inline RealPlane transpose(const RealPlane& p) {
  RealPlane t(p.cols, p.rows);
  for (int r = 0; r < p.rows; ++r)
    for (int c = 0; c < p.cols; ++c) t.at(c, r) = p.at(r, c);
  return t;
}

// Annex K luminance quantization table, row-major.
constexpr int kJpegLuminance[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99};

struct Dct8 {
  double c[8][8];  // c[u][k] = alpha(u) * cos((2k+1) u pi / 16) / 2
  Dct8() {
    for (int u = 0; u < 8; ++u) {
      double alpha = u == 0 ? 1.0 / std::sqrt(2.0) : 1.0;
      for (int k = 0; k < 8; ++k) c[u][k] = 0.5 * alpha * std::cos((2 * k + 1) * u * M_PI / 16.0);
    }
  }
};

inline const Dct8& dct8() {
  static const Dct8 d;
  return d;
}

// Quantized round trip of one 8x8 block, values on the 0..255 luma scale.
inline void jpeg_block(double block[8][8], const int q[64]) {
  const Dct8& d = dct8();
  double tmp[8][8], freq[8][8];
  // F = C * B * C^T
  for (int u = 0; u < 8; ++u)
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += d.c[u][k] * block[k][j];
      tmp[u][j] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int vv = 0; vv < 8; ++vv) {
      double s = 0.0;
      for (int k = 0; k < 8; ++k) s += tmp[u][k] * d.c[vv][k];
      freq[u][vv] = s;
    }
  for (int u = 0; u < 8; ++u)
    for (int vv = 0; vv < 8; ++vv) {
      double step = static_cast<double>(q[u * 8 + vv]);
      freq[u][vv] = static_cast<double>(std::llround(freq[u][vv] / step)) * step;
    }
  // B = C^T * F * C
  for (int k = 0; k < 8; ++k)
    for (int vv = 0; vv < 8; ++vv) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += d.c[u][k] * freq[u][vv];
      tmp[k][vv] = s;
    }
  for (int k = 0; k < 8; ++k)
    for (int j = 0; j < 8; ++j) {
      double s = 0.0;
      for (int vv = 0; vv < 8; ++vv) s += tmp[k][vv] * d.c[vv][j];
      block[k][j] = s;
    }
}

inline void scaled_quant_table(int quality, int out[64]) {
  int s = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  for (int i = 0; i < 64; ++i) {
    int q = (kJpegLuminance[i] * s + 50) / 100;
    out[i] = std::min(std::max(q, 1), 255);
  }
}

}  // namespace channeldetail

// Applies one attack. Deterministic given (spec, rng_seed); every result
// stays in [0,1] with the input's dimensions. The regeneration attack lives
// in the latent domain and is rejected here; see channel_roundtrip.
inline SurrogateImage apply_attack(const SurrogateImage& img, const AttackSpec& spec, uint64_t rng_seed) {
  using namespace channeldetail;
  validate_attack(spec);
  const int C = img.channels, H = img.height, W = img.width;

  switch (spec.kind) {
    case AttackKind::identity:
      return img;

    case AttackKind::brightness: {
      SurrogateImage out = img;
      for (double& x : out.v) x = clamp01(x * spec.factor);
      return out;
    }

    case AttackKind::contrast: {
      SurrogateImage out = img;
      const size_t plane = static_cast<size_t>(H) * W;
      for (int c = 0; c < C; ++c) {
        double mean = 0.0;
        for (size_t i = 0; i < plane; ++i) mean += img.v[c * plane + i];
        mean /= static_cast<double>(plane);
        for (size_t i = 0; i < plane; ++i)
          out.v[c * plane + i] = clamp01((img.v[c * plane + i] - mean) * spec.factor + mean);
      }
      return out;
    }

    case AttackKind::noise: {
      SurrogateImage out = img;
      Rng rng(rng_seed);
      for (double& x : out.v) x = clamp01(x + rng.gaussian(0.0, spec.sigma));
      return out;
    }

    case AttackKind::blur: {
      if (spec.radius == 0) return img;
      SurrogateImage out = img;
      const size_t plane = static_cast<size_t>(H) * W;
      for (int c = 0; c < C; ++c) {
        RealPlane p(H, W);
        std::copy(img.v.begin() + c * plane, img.v.begin() + (c + 1) * plane, p.data.begin());
        blur_rows(p, spec.radius);
        p = transpose(p);
        blur_rows(p, spec.radius);
        p = transpose(p);
        for (size_t i = 0; i < plane; ++i) out.v[c * plane + i] = clamp01(p.data[i]);
      }
      return out;
    }

    case AttackKind::jpeg: {
      if (H % 8 != 0 || W % 8 != 0)
        throw std::invalid_argument("jpeg attack: dimensions must be multiples of 8");
      int q[64];
      scaled_quant_table(spec.quality, q);
      SurrogateImage out = img;
      double block[8][8];
      for (int c = 0; c < C; ++c)
        for (int br = 0; br < H; br += 8)
          for (int bc = 0; bc < W; bc += 8) {
            for (int i = 0; i < 8; ++i)
              for (int j = 0; j < 8; ++j) block[i][j] = img.at(c, br + i, bc + j) * 255.0 - 128.0;
            jpeg_block(block, q);
            for (int i = 0; i < 8; ++i)
              for (int j = 0; j < 8; ++j)
                out.at(c, br + i, bc + j) = clamp01((block[i][j] + 128.0) / 255.0);
          }
      return out;
    }

    case AttackKind::crop_center:
    case AttackKind::crop_random: {
      const int side_h = crop_side(H, spec.scale);
      const int side_w = crop_side(W, spec.scale);
      if (side_h == H && side_w == W) return img;  // scale 1: nothing removed

      int src_r, src_c;
      if (spec.kind == AttackKind::crop_center) {
        src_r = (H - side_h) / 2;
        src_c = (W - side_w) / 2;
      } else {
        Rng rng(mix_seed(rng_seed, spec.seed));
        src_r = static_cast<int>(rng.uniform_index(static_cast<size_t>(H - side_h + 1)));
        src_c = static_cast<int>(rng.uniform_index(static_cast<size_t>(W - side_w + 1)));
      }
      // The kept window lands centered on a neutral canvas, so a center crop
      // preserves positions while a random crop translates content.
      const int dst_r = (H - side_h) / 2;
      const int dst_c = (W - side_w) / 2;
      SurrogateImage out(C, H, W, 0.5);
      for (int c = 0; c < C; ++c)
        for (int r = 0; r < side_h; ++r)
          for (int col = 0; col < side_w; ++col)
            out.at(c, dst_r + r, dst_c + col) = img.at(c, src_r + r, src_c + col);
      return out;
    }

    case AttackKind::regen:
      throw std::invalid_argument("apply_attack: regeneration operates on latents; use channel_roundtrip");
  }
  throw std::invalid_argument("apply_attack: unknown kind");
}

// Diffusion-style regeneration: push the latent t_star steps into a cosine
// noise schedule. alpha(t) = cos^2((t/T) pi/2); output = sqrt(alpha) z +
// sqrt(1-alpha) eps.
inline LatentTensor regen_surrogate(const LatentTensor& latent, int t_star, int steps_total, uint64_t rng_seed) {
  if (steps_total < 1) throw std::invalid_argument("regen_surrogate: steps_total must be >= 1");
  if (t_star < 0 || t_star > steps_total)
    throw std::invalid_argument("regen_surrogate: t_star must be in [0, steps_total]");
  double phase = (static_cast<double>(t_star) / steps_total) * (M_PI / 2.0);
  double alpha = std::cos(phase) * std::cos(phase);
  double keep = std::sqrt(alpha), mixin = std::sqrt(1.0 - alpha);

  LatentTensor out = latent;
  Rng rng(rng_seed);
  for (double& x : out.v) x = keep * x + mixin * rng.gaussian();
  return out;
}

struct ChannelConfig {
  double inversion_noise_sigma = 0.1;
  uint64_t seed = 0;
};

// Full surrogate pipeline: render, attack, invert, plus additive inversion
// noise standing in for DDIM error. Regeneration skips the image domain.
inline LatentTensor channel_roundtrip(const LatentTensor& latent, const AttackSpec& spec, const ChannelConfig& cfg) {
  validate_attack(spec);
  if (!(cfg.inversion_noise_sigma >= 0.0) || !std::isfinite(cfg.inversion_noise_sigma))
    throw std::invalid_argument("channel_roundtrip: inversion noise sigma must be >= 0");

  LatentTensor out;
  if (spec.kind == AttackKind::regen) {
    out = regen_surrogate(latent, spec.t_star, spec.steps_total, derive_seed(cfg.seed, seed_stream::attack, 0));
  } else {
    out = unrender(apply_attack(render(latent), spec, derive_seed(cfg.seed, seed_stream::attack, 0)));
  }
  if (cfg.inversion_noise_sigma > 0.0) {
    Rng rng(derive_seed(cfg.seed, seed_stream::channel, 0));
    for (double& x : out.v) x += rng.gaussian(0.0, cfg.inversion_noise_sigma);
  }
  return out;
}

}  // namespace sfw
