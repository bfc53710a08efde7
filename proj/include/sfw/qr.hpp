#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>

#include "grid.hpp"
#include "reed_solomon.hpp"
#include "rng.hpp"

namespace sfw {

// 72-bit message carried by the QR layer. Bits are numbered 0..71, MSB-first
// within each byte (bit 0 is the top bit of bytes[0]), matching the order in
// which the codeword bits are laid into the symbol.
struct Payload72 {
  std::array<uint8_t, 9> bytes{};

  bool bit(int i) const { return (bytes[static_cast<size_t>(i / 8)] >> (7 - i % 8)) & 1; }

  static Payload72 random(uint64_t seed) {
    Payload72 p;
    Rng rng(seed);
    for (auto& b : p.bytes) b = static_cast<uint8_t>(rng.next_u64() & 0xFF);
    return p;
  }

  static Payload72 from_hex(const std::string& hex) {
    if (hex.size() != 18) throw std::invalid_argument("Payload72: expected 18 hex chars");
    Payload72 p;
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      throw std::invalid_argument("Payload72: bad hex digit");
    };
    for (int i = 0; i < 9; ++i)
      p.bytes[static_cast<size_t>(i)] =
          static_cast<uint8_t>((nibble(hex[static_cast<size_t>(2 * i)]) << 4) | nibble(hex[static_cast<size_t>(2 * i + 1)]));
    return p;
  }

  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (uint8_t b : bytes) {
      s.push_back(digits[b >> 4]);
      s.push_back(digits[b & 0xF]);
    }
    return s;
  }

  bool operator==(const Payload72&) const = default;
};

// Version-1 symbol (21x21), error-correction level H: 9 data + 17 parity
// codewords, correction radius 8. The payload octets are placed directly as
// the data codewords -- no mode/length header -- so symbols produced here are
// self-consistent but not phone-scanner compatible.
struct QrMatrix {
  static constexpr int size = 21;
  Grid<uint8_t> modules;  // 1 = dark

  QrMatrix() : modules(size, size, 0) {}
};

namespace qrdetail {

constexpr int kSize = 21;
constexpr int kDataCodewords = 9;
constexpr int kEcCodewords = 17;
constexpr int kDataModules = 208;  // 26 codewords * 8, fills version 1 exactly

// Format info placement, bit index 0 (LSB) .. 14 (MSB).
constexpr std::array<std::pair<int, int>, 15> kFormatCopy1{{{8, 0},
                                                            {8, 1},
                                                            {8, 2},
                                                            {8, 3},
                                                            {8, 4},
                                                            {8, 5},
                                                            {8, 7},
                                                            {8, 8},
                                                            {7, 8},
                                                            {5, 8},
                                                            {4, 8},
                                                            {3, 8},
                                                            {2, 8},
                                                            {1, 8},
                                                            {0, 8}}};
constexpr std::array<std::pair<int, int>, 15> kFormatCopy2{{{20, 8},
                                                            {19, 8},
                                                            {18, 8},
                                                            {17, 8},
                                                            {16, 8},
                                                            {15, 8},
                                                            {14, 8},
                                                            {8, 13},
                                                            {8, 14},
                                                            {8, 15},
                                                            {8, 16},
                                                            {8, 17},
                                                            {8, 18},
                                                            {8, 19},
                                                            {8, 20}}};

// Level indicators are 2-bit field values, not an enum ordering: L=01, M=00,
// Q=11, H=10.
constexpr int kLevelHBits = 0b10;

inline uint16_t format_code(int level_bits, int mask_id) {
  int data5 = (level_bits << 3) | mask_id;
  int rem = data5 << 10;
  constexpr int gen = 0b10100110111;
  for (int i = 14; i >= 10; --i)
    if (rem & (1 << i)) rem ^= gen << (i - 10);
  return static_cast<uint16_t>(((data5 << 10) | rem) ^ 0b101010000010010);
}

inline bool mask_bit(int mask_id, int i, int j) {
  switch (mask_id) {
    case 0: return (i + j) % 2 == 0;
    case 1: return i % 2 == 0;
    case 2: return j % 3 == 0;
    case 3: return (i + j) % 3 == 0;
    case 4: return (i / 2 + j / 3) % 2 == 0;
    case 5: return (i * j) % 2 + (i * j) % 3 == 0;
    case 6: return ((i * j) % 2 + (i * j) % 3) % 2 == 0;
    case 7: return ((i + j) % 2 + (i * j) % 3) % 2 == 0;
    default: throw std::invalid_argument("mask_bit: mask_id must be 0..7");
  }
}

// 1 where the module belongs to a function or format pattern (every position
// that is not a data-bit carrier). Fixed for version 1.
inline const Grid<uint8_t>& function_map() {
  static const Grid<uint8_t> map = [] {
    Grid<uint8_t> m(kSize, kSize, 0);
    auto mark_box = [&](int r0, int c0, int r1, int c1) {
      for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) m.at(r, c) = 1;
    };
    // Finders with their separators: 8x8 corners.
    mark_box(0, 0, 7, 7);
    mark_box(0, 13, 7, 20);
    mark_box(13, 0, 20, 7);
    // Timing strips between the finders.
    for (int i = 8; i <= 12; ++i) {
      m.at(6, i) = 1;
      m.at(i, 6) = 1;
    }
    // Both format-info copies and the fixed dark module at (13, 8).
    for (auto [r, c] : kFormatCopy1) m.at(r, c) = 1;
    for (auto [r, c] : kFormatCopy2) m.at(r, c) = 1;
    m.at(13, 8) = 1;
    return m;
  }();
  return map;
}

// Data-module traversal: column pairs from the right edge, alternating
// up/down, right column before left, hopping over the timing column.
inline const std::vector<std::pair<int, int>>& zigzag_positions() {
  static const std::vector<std::pair<int, int>> order = [] {
    std::vector<std::pair<int, int>> pos;
    const Grid<uint8_t>& fn = function_map();
    bool upward = true;
    int col = kSize - 1;
    while (col > 0) {
      if (col == 6) --col;
      for (int i = 0; i < kSize; ++i) {
        int row = upward ? kSize - 1 - i : i;
        for (int dc = 0; dc < 2; ++dc) {
          int c = col - dc;
          if (!fn.at(row, c)) pos.emplace_back(row, c);
        }
      }
      upward = !upward;
      col -= 2;
    }
    return pos;
  }();
  return order;
}

// Dark/light value of function modules (excluding format bits, which vary).
inline bool function_module_dark(int r, int c) {
  auto finder = [](int dr, int dc) {
    int d = std::max(std::abs(dr - 3), std::abs(dc - 3));
    return d != 2;  // solid core + outer ring
  };
  if (r <= 6 && c <= 6) return finder(r, c);
  if (r <= 6 && c >= 14) return finder(r, c - 14);
  if (r >= 14 && c <= 6) return finder(r - 14, c);
  if (r == 13 && c == 8) return true;  // fixed dark module
  if (r == 6 && c >= 8 && c <= 12) return c % 2 == 0;
  if (c == 6 && r >= 8 && r <= 12) return r % 2 == 0;
  return false;  // separators and anything else in the function map
}

}  // namespace qrdetail

// Renders the payload into a symbol under the given mask (0..7). Everything
// is deterministic: same payload + mask -> same matrix.
inline QrMatrix qr_build(const Payload72& payload, int mask_id = 0) {
  using namespace qrdetail;
  if (mask_id < 0 || mask_id > 7) throw std::invalid_argument("qr_build: mask_id must be 0..7");

  QrMatrix qm;
  const Grid<uint8_t>& fn = function_map();
  for (int r = 0; r < kSize; ++r)
    for (int c = 0; c < kSize; ++c)
      if (fn.at(r, c)) qm.modules.at(r, c) = function_module_dark(r, c) ? 1 : 0;

  uint16_t fmt = format_code(kLevelHBits, mask_id);
  for (int b = 0; b < 15; ++b) {
    uint8_t v = (fmt >> b) & 1;
    auto [r1, c1] = kFormatCopy1[static_cast<size_t>(b)];
    auto [r2, c2] = kFormatCopy2[static_cast<size_t>(b)];
    qm.modules.at(r1, c1) = v;
    qm.modules.at(r2, c2) = v;
  }

  std::vector<uint8_t> codewords(payload.bytes.begin(), payload.bytes.end());
  std::vector<uint8_t> ecc = rs_encode(codewords, kEcCodewords);
  codewords.insert(codewords.end(), ecc.begin(), ecc.end());

  const auto& order = zigzag_positions();
  for (size_t i = 0; i < order.size(); ++i) {
    uint8_t byte = codewords[i / 8];
    uint8_t bit = (byte >> (7 - i % 8)) & 1;
    auto [r, c] = order[i];
    qm.modules.at(r, c) = bit ^ (mask_bit(mask_id, r, c) ? 1 : 0);
  }
  return qm;
}

struct QrReadResult {
  Payload72 payload;
  int corrected = 0;  // symbol errors repaired by RS
  int mask_id = 0;
  int format_distance = 0;  // Hamming distance of the best format-info match
};

// Decodes a (possibly corrupted) symbol. Format info tolerates up to 3 bit
// errors per copy (the BCH code's radius); the payload tolerates up to 8
// codeword errors. Returns nullopt on anything unrecoverable -- garbage in
// never silently becomes data out.
inline std::optional<QrReadResult> qr_read(const QrMatrix& qm) {
  using namespace qrdetail;

  auto read_copy = [&](const std::array<std::pair<int, int>, 15>& where) {
    uint16_t v = 0;
    for (int b = 0; b < 15; ++b) {
      auto [r, c] = where[static_cast<size_t>(b)];
      if (qm.modules.at(r, c)) v |= static_cast<uint16_t>(1u << b);
    }
    return v;
  };
  uint16_t copy1 = read_copy(kFormatCopy1);
  uint16_t copy2 = read_copy(kFormatCopy2);

  int best_level = -1, best_mask = -1, best_dist = 16;
  for (int level = 0; level < 4; ++level) {
    for (int mask = 0; mask < 8; ++mask) {
      uint16_t code = format_code(level, mask);
      int d1 = std::popcount(static_cast<unsigned>(copy1 ^ code));
      int d2 = std::popcount(static_cast<unsigned>(copy2 ^ code));
      int d = std::min(d1, d2);
      if (d < best_dist) {
        best_dist = d;
        best_level = level;
        best_mask = mask;
      }
    }
  }
  if (best_dist > 3) return std::nullopt;              // format unreadable
  if (best_level != kLevelHBits) return std::nullopt;  // geometry below assumes 9+17

  const auto& order = zigzag_positions();
  std::vector<uint8_t> codewords(order.size() / 8, 0);
  for (size_t i = 0; i < order.size(); ++i) {
    auto [r, c] = order[i];
    uint8_t bit = qm.modules.at(r, c) ^ (mask_bit(best_mask, r, c) ? 1 : 0);
    codewords[i / 8] = static_cast<uint8_t>((codewords[i / 8] << 1) | bit);
  }

  auto decoded = rs_decode(codewords, kEcCodewords);
  if (!decoded) return std::nullopt;

  QrReadResult out;
  std::copy(decoded->data.begin(), decoded->data.end(), out.payload.bytes.begin());
  out.corrected = decoded->corrected;
  out.mask_id = best_mask;
  out.format_distance = best_dist;
  return out;
}

// Matrix -> signed pixel grid: each module becomes a cell_px x cell_px block
// of +1 (dark) or -1 (light).
inline RealPlane cell_upsample(const QrMatrix& qm, int cell_px) {
  if (cell_px <= 0) throw std::invalid_argument("cell_upsample: cell_px must be positive");
  const int n = QrMatrix::size * cell_px;
  RealPlane out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out.at(r, c) = qm.modules.at(r / cell_px, c / cell_px) ? 1.0 : -1.0;
  return out;
}

// Pixel grid -> per-cell means. Generic over grid size as long as both sides
// divide evenly; pairs with cell_upsample for an exact round trip.
inline RealPlane cell_downsample(const RealPlane& px, int cell_px) {
  if (cell_px <= 0) throw std::invalid_argument("cell_downsample: cell_px must be positive");
  if (px.rows % cell_px != 0 || px.cols % cell_px != 0)
    throw std::invalid_argument("cell_downsample: grid not divisible by cell_px");
  RealPlane out(px.rows / cell_px, px.cols / cell_px, 0.0);
  for (int r = 0; r < px.rows; ++r)
    for (int c = 0; c < px.cols; ++c) out.at(r / cell_px, c / cell_px) += px.at(r, c);
  const double inv = 1.0 / (static_cast<double>(cell_px) * cell_px);
  for (double& v : out.data) v *= inv;
  return out;
}

// Sign-threshold a 21x21 mean grid back into modules (mean > 0 reads dark).
inline QrMatrix modules_from_means(const RealPlane& means) {
  if (means.rows != QrMatrix::size || means.cols != QrMatrix::size)
    throw std::invalid_argument("modules_from_means: expected a 21x21 grid");
  QrMatrix qm;
  for (int r = 0; r < QrMatrix::size; ++r)
    for (int c = 0; c < QrMatrix::size; ++c) qm.modules.at(r, c) = means.at(r, c) > 0.0 ? 1 : 0;
  return qm;
}

}  // namespace sfw
