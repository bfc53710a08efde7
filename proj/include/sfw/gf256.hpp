#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

namespace sfw::gf {

// GF(2^8) under the QR reduction polynomial x^8+x^4+x^3+x^2+1 (0x11D),
// generator alpha = 2. exp is doubled so mul can skip the mod-255 reduction.
struct Tables {
  std::array<uint8_t, 512> exp{};
  std::array<int16_t, 256> log{};
};

constexpr Tables make_tables() {
  Tables t{};
  int x = 1;
  for (int i = 0; i < 255; ++i) {
    t.exp[static_cast<size_t>(i)] = static_cast<uint8_t>(x);
    t.log[static_cast<size_t>(x)] = static_cast<int16_t>(i);
    x <<= 1;
    if (x & 0x100) x ^= 0x11D;
  }
  for (int i = 255; i < 512; ++i) t.exp[static_cast<size_t>(i)] = t.exp[static_cast<size_t>(i - 255)];
  t.log[0] = -1;  // log of zero is undefined; poisoned so misuse is loud in debugging
  return t;
}

inline constexpr Tables tables = make_tables();

constexpr uint8_t add(uint8_t a, uint8_t b) { return a ^ b; }

constexpr uint8_t mul(uint8_t a, uint8_t b) {
  if (a == 0 || b == 0) return 0;
  return tables.exp[static_cast<size_t>(tables.log[a]) + static_cast<size_t>(tables.log[b])];
}

// alpha^e for e >= 0.
constexpr uint8_t pow_alpha(int e) { return tables.exp[static_cast<size_t>(e % 255)]; }

inline uint8_t inv(uint8_t a) {
  if (a == 0) throw std::domain_error("gf::inv: zero has no inverse");
  return tables.exp[static_cast<size_t>(255 - tables.log[a])];
}

inline uint8_t div(uint8_t a, uint8_t b) {
  if (b == 0) throw std::domain_error("gf::div: division by zero");
  if (a == 0) return 0;
  int e = tables.log[a] - tables.log[b];
  if (e < 0) e += 255;
  return tables.exp[static_cast<size_t>(e)];
}

}  // namespace sfw::gf
