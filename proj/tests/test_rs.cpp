#include <catch2/catch_amalgamated.hpp>

#include <set>

#include <sfw/reed_solomon.hpp>
#include <sfw/rng.hpp>

using sfw::gf::add;
using sfw::gf::inv;
using sfw::gf::mul;
using sfw::gf::pow_alpha;

TEST_CASE("GF(256) table spot checks") {
  // 2*128 wraps through the reduction polynomial: 0x100 ^ 0x11D = 0x1D.
  CHECK(mul(2, 128) == 29);
  CHECK(mul(0x53, 0xCA) == 0x8F);
  CHECK(pow_alpha(255) == 1);
  CHECK(pow_alpha(0) == 1);
  CHECK(mul(0, 77) == 0);
  for (int a = 1; a < 256; ++a) {
    CHECK(mul(static_cast<uint8_t>(a), inv(static_cast<uint8_t>(a))) == 1);
  }
  CHECK_THROWS_AS(inv(0), std::domain_error);
}

TEST_CASE("generator polynomial for 17 parity symbols") {
  // Frozen from an independent GF(256) long-multiplication run.
  std::vector<uint8_t> want{1, 119, 66, 83, 120, 119, 22, 197, 83, 249, 41, 143, 134, 85, 53, 125, 99, 79};
  CHECK(sfw::detail::rs_generator(17) == want);
}

TEST_CASE("rs_encode frozen vectors") {
  // 9 data + 17 parity, the geometry used throughout this library.
  std::vector<uint8_t> msg{0x40, 0xd2, 0x75, 0x47, 0x76, 0x17, 0x32, 0x06, 0x27};
  std::vector<uint8_t> want{0xd3, 0x7e, 0x42, 0x48, 0xf9, 0xe0, 0xcc, 0xd6, 0xdb,
                            0x86, 0x3c, 0x1c, 0x94, 0x96, 0x21, 0x8e, 0xa6};
  CHECK(sfw::rs_encode(msg, 17) == want);

  std::vector<uint8_t> msg2{1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<uint8_t> want2{0x30, 0x5b, 0xb1, 0xc3, 0xa4, 0x4c, 0x58, 0xa3, 0x76,
                             0x6d, 0x55, 0x99, 0x16, 0x05, 0x42, 0x7a, 0xf7};
  CHECK(sfw::rs_encode(msg2, 17) == want2);

  std::vector<uint8_t> zeros(9, 0);
  CHECK(sfw::rs_encode(zeros, 17) == std::vector<uint8_t>(17, 0));
}

TEST_CASE("parity makes every codeword vanish at the generator roots") {
  sfw::Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<uint8_t> msg(9);
    for (auto& b : msg) b = static_cast<uint8_t>(rng.next_u64() & 0xFF);
    std::vector<uint8_t> cw = msg;
    auto ecc = sfw::rs_encode(msg, 17);
    cw.insert(cw.end(), ecc.begin(), ecc.end());
    for (int j = 0; j < 17; ++j) {
      uint8_t x = pow_alpha(j);
      uint8_t acc = 0;
      for (uint8_t b : cw) acc = add(mul(acc, x), b);
      CHECK(acc == 0);
    }
  }
}

TEST_CASE("rs_decode round-trips and counts corrections") {
  sfw::Rng rng(2718);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<uint8_t> msg(9);
    for (auto& b : msg) b = static_cast<uint8_t>(rng.next_u64() & 0xFF);
    std::vector<uint8_t> cw = msg;
    auto ecc = sfw::rs_encode(msg, 17);
    cw.insert(cw.end(), ecc.begin(), ecc.end());

    int nerr = static_cast<int>(rng.uniform_index(9));  // 0..8
    std::set<int> pos;
    while (static_cast<int>(pos.size()) < nerr) pos.insert(static_cast<int>(rng.uniform_index(26)));
    std::vector<uint8_t> rx = cw;
    for (int p : pos) rx[static_cast<size_t>(p)] ^= static_cast<uint8_t>(1 + rng.uniform_index(255));

    auto res = sfw::rs_decode(rx, 17);
    REQUIRE(res.has_value());
    CHECK(res->data == msg);
    CHECK(res->corrected == nerr);
  }
}

TEST_CASE("rs_decode never returns inconsistent data under heavy corruption") {
  // Beyond the packing radius the decoder may land on a different codeword,
  // which is legitimate bounded-distance behaviour; what it must never do is
  // return bytes whose re-encoding is not a codeword near the input.
  sfw::Rng rng(31337);
  int failures = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<uint8_t> msg(9);
    for (auto& b : msg) b = static_cast<uint8_t>(rng.next_u64() & 0xFF);
    std::vector<uint8_t> cw = msg;
    auto ecc = sfw::rs_encode(msg, 17);
    cw.insert(cw.end(), ecc.begin(), ecc.end());

    std::set<int> pos;
    while (static_cast<int>(pos.size()) < 12) pos.insert(static_cast<int>(rng.uniform_index(26)));
    std::vector<uint8_t> rx = cw;
    for (int p : pos) rx[static_cast<size_t>(p)] ^= static_cast<uint8_t>(1 + rng.uniform_index(255));

    auto res = sfw::rs_decode(rx, 17);
    if (!res) {
      ++failures;
      continue;
    }
    // Whatever came back must be self-consistent: re-encode and measure the
    // distance to what was received.
    std::vector<uint8_t> back = res->data;
    auto ecc2 = sfw::rs_encode(res->data, 17);
    back.insert(back.end(), ecc2.begin(), ecc2.end());
    int dist = 0;
    for (size_t i = 0; i < back.size(); ++i)
      if (back[i] != rx[i]) ++dist;
    CHECK(dist <= 8);
    CHECK(dist == res->corrected);
  }
  CHECK(failures > 0);  // 12 errors should overwhelm the decoder at least sometimes
}

TEST_CASE("rs_decode validates its inputs") {
  CHECK_THROWS_AS(sfw::rs_decode(std::vector<uint8_t>(10, 0), 17), std::invalid_argument);
  CHECK_THROWS_AS(sfw::rs_encode({}, 17), std::invalid_argument);
}
