#pragma once

#include <optional>
#include <vector>

#include "gf256.hpp"

namespace sfw {

// Systematic Reed-Solomon over GF(256), narrow-sense with first root alpha^0
// (the QR convention). Codewords are data || parity; coefficient order is
// highest power first, i.e. codeword[0] multiplies x^(n-1).

namespace detail {

// Generator polynomial prod_{i=0}^{ec_len-1} (x - alpha^i), descending powers.
inline std::vector<uint8_t> rs_generator(int ec_len) {
  std::vector<uint8_t> g{1};
  for (int i = 0; i < ec_len; ++i) {
    std::vector<uint8_t> next(g.size() + 1, 0);
    uint8_t root = gf::pow_alpha(i);
    for (size_t j = 0; j < g.size(); ++j) {
      next[j] = gf::add(next[j], g[j]);  // x * g
      next[j + 1] = gf::add(next[j + 1], gf::mul(g[j], root));
    }
    g = std::move(next);
  }
  return g;
}

}  // namespace detail

// data -> parity of length ec_len (long division of data * x^ec_len by g).
inline std::vector<uint8_t> rs_encode(const std::vector<uint8_t>& data, int ec_len) {
  if (ec_len <= 0 || data.empty()) throw std::invalid_argument("rs_encode: bad sizes");
  std::vector<uint8_t> g = detail::rs_generator(ec_len);
  std::vector<uint8_t> rem(data);
  rem.resize(data.size() + static_cast<size_t>(ec_len), 0);
  for (size_t i = 0; i < data.size(); ++i) {
    uint8_t lead = rem[i];
    if (lead == 0) continue;
    for (size_t j = 0; j < g.size(); ++j) rem[i + j] = gf::add(rem[i + j], gf::mul(lead, g[j]));
  }
  return {rem.begin() + static_cast<long>(data.size()), rem.end()};
}

struct RsDecoded {
  std::vector<uint8_t> data;
  int corrected = 0;
};

// Bounded-distance decode of an n-byte word with the last ec_len bytes being
// parity. Corrects up to floor(ec_len/2) symbol errors via Berlekamp-Massey +
// Chien + Forney. Returns nullopt on decoder failure; after correction the
// syndromes are recomputed, so an inconsistent "solution" is rejected rather
// than returned as data.
inline std::optional<RsDecoded> rs_decode(const std::vector<uint8_t>& word, int ec_len) {
  const int n = static_cast<int>(word.size());
  if (ec_len <= 0 || n <= ec_len) throw std::invalid_argument("rs_decode: bad sizes");
  const int k = n - ec_len;
  const int t = ec_len / 2;

  auto syndromes = [&](const std::vector<uint8_t>& w) {
    // S_j = w(alpha^j); w[0] is the x^(n-1) coefficient.
    std::vector<uint8_t> s(static_cast<size_t>(ec_len), 0);
    for (int j = 0; j < ec_len; ++j) {
      uint8_t x = gf::pow_alpha(j);
      uint8_t acc = 0;
      for (int i = 0; i < n; ++i) acc = gf::add(gf::mul(acc, x), w[static_cast<size_t>(i)]);
      s[static_cast<size_t>(j)] = acc;
    }
    return s;
  };

  std::vector<uint8_t> syn = syndromes(word);
  bool clean = true;
  for (uint8_t s : syn)
    if (s != 0) clean = false;
  if (clean) return RsDecoded{{word.begin(), word.begin() + k}, 0};

  // Berlekamp-Massey for the error locator Lambda (ascending powers).
  std::vector<uint8_t> lambda{1}, prev{1};
  int L = 0, m = 1;
  uint8_t b = 1;
  for (int step = 0; step < ec_len; ++step) {
    uint8_t delta = syn[static_cast<size_t>(step)];
    for (int i = 1; i <= L && i < static_cast<int>(lambda.size()); ++i)
      delta = gf::add(delta, gf::mul(lambda[static_cast<size_t>(i)], syn[static_cast<size_t>(step - i)]));
    if (delta == 0) {
      ++m;
      continue;
    }
    std::vector<uint8_t> candidate = lambda;
    uint8_t coef = gf::div(delta, b);
    if (candidate.size() < prev.size() + static_cast<size_t>(m)) candidate.resize(prev.size() + static_cast<size_t>(m), 0);
    for (size_t i = 0; i < prev.size(); ++i)
      candidate[i + static_cast<size_t>(m)] = gf::add(candidate[i + static_cast<size_t>(m)], gf::mul(coef, prev[i]));
    if (2 * L <= step) {
      prev = lambda;
      b = delta;
      L = step + 1 - L;
      m = 1;
    } else {
      ++m;
    }
    lambda = std::move(candidate);
  }
  while (!lambda.empty() && lambda.back() == 0) lambda.pop_back();
  const int deg = static_cast<int>(lambda.size()) - 1;
  if (deg <= 0 || deg > t || deg != L) return std::nullopt;

  // Chien search: position i holds coefficient of x^(n-1-i), locator X_i =
  // alpha^(n-1-i); i is an error position iff Lambda(X_i^{-1}) == 0.
  std::vector<int> positions;
  for (int i = 0; i < n; ++i) {
    int e = n - 1 - i;
    uint8_t xinv = gf::pow_alpha(255 - (e % 255));
    uint8_t acc = 0;
    for (int j = deg; j >= 0; --j) acc = gf::add(gf::mul(acc, xinv), lambda[static_cast<size_t>(j)]);
    if (acc == 0) positions.push_back(i);
  }
  if (static_cast<int>(positions.size()) != deg) return std::nullopt;

  // Forney with b=0: e_i = X_i * Omega(X_i^{-1}) / Lambda'(X_i^{-1}),
  // Omega = S * Lambda mod x^ec_len.
  std::vector<uint8_t> omega(static_cast<size_t>(ec_len), 0);
  for (size_t i = 0; i < lambda.size(); ++i)
    for (size_t j = 0; j + i < static_cast<size_t>(ec_len) && j < syn.size(); ++j)
      omega[i + j] = gf::add(omega[i + j], gf::mul(lambda[i], syn[j]));

  std::vector<uint8_t> fixed = word;
  for (int i : positions) {
    int e = n - 1 - i;
    uint8_t x = gf::pow_alpha(e % 255);
    uint8_t xinv = gf::pow_alpha(255 - (e % 255));
    uint8_t om = 0;
    for (int j = static_cast<int>(omega.size()) - 1; j >= 0; --j)
      om = gf::add(gf::mul(om, xinv), omega[static_cast<size_t>(j)]);
    // Formal derivative of Lambda keeps odd-power terms only.
    uint8_t dl = 0;
    for (size_t j = 1; j < lambda.size(); j += 2) {
      uint8_t term = lambda[j];
      for (size_t p = 1; p < j; ++p) term = gf::mul(term, xinv);
      dl = gf::add(dl, term);
    }
    if (dl == 0) return std::nullopt;
    uint8_t magnitude = gf::mul(x, gf::div(om, dl));
    if (magnitude == 0) return std::nullopt;
    fixed[static_cast<size_t>(i)] = gf::add(fixed[static_cast<size_t>(i)], magnitude);
  }

  for (uint8_t s : syndromes(fixed))
    if (s != 0) return std::nullopt;  // inconsistent solution; never hand back garbage

  return RsDecoded{{fixed.begin(), fixed.begin() + k}, deg};
}

}  // namespace sfw
