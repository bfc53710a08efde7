#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "grid.hpp"
#include "rng.hpp"

namespace sfw {

// Dense C x H x W tensor of doubles, channel-major then row-major. This is
// the unit the embedding and channel stages pass around; channel 0 carries
// the noise key when one is in use.
struct LatentTensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> v;

  LatentTensor() = default;
  LatentTensor(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w), v(static_cast<size_t>(c) * static_cast<size_t>(h) * static_cast<size_t>(w), fill) {
    if (c <= 0 || h <= 0 || w <= 0) throw std::invalid_argument("LatentTensor: dimensions must be positive");
  }

  double& at(int c, int r, int col) {
    return v[(static_cast<size_t>(c) * height + static_cast<size_t>(r)) * width + static_cast<size_t>(col)];
  }
  double at(int c, int r, int col) const {
    return v[(static_cast<size_t>(c) * height + static_cast<size_t>(r)) * width + static_cast<size_t>(col)];
  }

  RealPlane channel_plane(int c) const {
    RealPlane p(height, width);
    std::memcpy(p.data.data(), v.data() + static_cast<size_t>(c) * height * width,
                static_cast<size_t>(height) * width * sizeof(double));
    return p;
  }

  void set_channel(int c, const RealPlane& p) {
    if (p.rows != height || p.cols != width) throw std::invalid_argument("set_channel: shape mismatch");
    std::memcpy(v.data() + static_cast<size_t>(c) * height * width, p.data.data(),
                static_cast<size_t>(height) * width * sizeof(double));
  }

  bool same_shape(const LatentTensor& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
};

inline LatentTensor gaussian_latent(int channels, int height, int width, uint64_t seed) {
  LatentTensor t(channels, height, width);
  Rng rng(seed);
  for (double& x : t.v) x = rng.gaussian();
  return t;
}

// On-disk form: 8-byte magic "SFWLAT1\0", then u32le channels/height/width,
// a reserved u32le (zero for now), then the samples as f64le in tensor
// order. 24-byte header total.
namespace latentfile {

constexpr char kMagic[8] = {'S', 'F', 'W', 'L', 'A', 'T', '1', '\0'};
constexpr size_t kHeaderBytes = 24;
constexpr uint32_t kMaxSide = 1u << 20;  // sanity bound on each dimension

inline void put_u32le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

inline void put_f64le(std::string& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, sizeof(bits));
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

inline double get_f64le(const unsigned char* p) {
  uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[i]) << (8 * i);
  double d;
  std::memcpy(&d, &bits, sizeof(d));
  return d;
}

}  // namespace latentfile

inline std::string serialize_latent(const LatentTensor& t) {
  if (t.channels <= 0 || t.height <= 0 || t.width <= 0)
    throw std::invalid_argument("serialize_latent: empty tensor");
  for (double x : t.v)
    if (!std::isfinite(x)) throw std::invalid_argument("serialize_latent: non-finite sample");

  std::string out;
  out.reserve(latentfile::kHeaderBytes + t.v.size() * 8);
  out.append(latentfile::kMagic, 8);
  latentfile::put_u32le(out, static_cast<uint32_t>(t.channels));
  latentfile::put_u32le(out, static_cast<uint32_t>(t.height));
  latentfile::put_u32le(out, static_cast<uint32_t>(t.width));
  latentfile::put_u32le(out, 0);  // reserved
  for (double x : t.v) latentfile::put_f64le(out, x);
  return out;
}

inline LatentTensor deserialize_latent(const std::string& bytes) {
  using namespace latentfile;
  if (bytes.size() < kHeaderBytes) throw std::invalid_argument("latent file: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 8) != 0) throw std::invalid_argument("latent file: bad magic");

  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  uint32_t c = get_u32le(p + 8), h = get_u32le(p + 12), w = get_u32le(p + 16), rsv = get_u32le(p + 20);
  if (rsv != 0) throw std::invalid_argument("latent file: nonzero reserved field");
  if (c == 0 || h == 0 || w == 0 || c > kMaxSide || h > kMaxSide || w > kMaxSide)
    throw std::invalid_argument("latent file: implausible dimensions");

  size_t count = static_cast<size_t>(c) * h * w;
  if (bytes.size() != kHeaderBytes + count * 8)
    throw std::invalid_argument("latent file: payload length mismatch");

  LatentTensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  for (size_t i = 0; i < count; ++i) {
    t.v[i] = get_f64le(p + kHeaderBytes + i * 8);
    if (!std::isfinite(t.v[i])) throw std::invalid_argument("latent file: non-finite sample");
  }
  return t;
}

inline void write_latent(const std::string& path, const LatentTensor& t) {
  std::string bytes = serialize_latent(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_latent: cannot open " + path);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write_latent: short write to " + path);
}

inline LatentTensor read_latent(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("read_latent: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_latent(bytes);
}

}  // namespace sfw
