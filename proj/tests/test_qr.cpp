#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <set>

#include "sfw/qr.hpp"

using namespace sfw;

TEST_CASE("payload bit order and hex round trip") {
  Payload72 p;
  p.bytes[0] = 0x80;
  p.bytes[8] = 0x01;
  CHECK(p.bit(0));
  CHECK_FALSE(p.bit(1));
  CHECK_FALSE(p.bit(7));
  CHECK(p.bit(71));
  CHECK_FALSE(p.bit(64));

  Payload72 q = Payload72::from_hex("0123456789abcdef01");
  CHECK(q.to_hex() == "0123456789abcdef01");
  CHECK(Payload72::from_hex("0123456789ABCDEF01") == q);
  CHECK_THROWS_AS(Payload72::from_hex("0123"), std::invalid_argument);
  CHECK_THROWS_AS(Payload72::from_hex("0123456789abcdefgg"), std::invalid_argument);

  Payload72 r1 = Payload72::random(7);
  Payload72 r2 = Payload72::random(7);
  Payload72 r3 = Payload72::random(8);
  CHECK(r1 == r2);
  CHECK(r1 != r3);
  CHECK(Payload72::from_hex(r1.to_hex()) == r1);
}

TEST_CASE("function map and data traversal cover the symbol exactly") {
  const auto& fn = qrdetail::function_map();
  int fn_count = 0;
  for (uint8_t v : fn.data) fn_count += v;
  CHECK(fn_count == 233);  // 441 total - 208 data modules

  const auto& order = qrdetail::zigzag_positions();
  REQUIRE(order.size() == 208);

  std::set<std::pair<int, int>> seen;
  for (auto [r, c] : order) {
    CHECK(fn.at(r, c) == 0);
    seen.insert({r, c});
  }
  CHECK(seen.size() == 208);  // no duplicates

  // First steps of the traversal: bottom-right corner, moving up, right
  // column before left.
  CHECK(order[0] == std::pair<int, int>(20, 20));
  CHECK(order[1] == std::pair<int, int>(20, 19));
  CHECK(order[2] == std::pair<int, int>(19, 20));
  CHECK(order[3] == std::pair<int, int>(19, 19));
}

TEST_CASE("format codes match the published table for level H") {
  // 15-bit format strings, masks 0..7, after the fixed XOR mask.
  constexpr uint16_t expected[8] = {0x1689, 0x13be, 0x1ce7, 0x19d0,
                                    0x0762, 0x0255, 0x0d0c, 0x083b};
  for (int m = 0; m < 8; ++m) CHECK(qrdetail::format_code(qrdetail::kLevelHBits, m) == expected[m]);

  // The worked example every reference uses: level M, mask 5.
  CHECK(qrdetail::format_code(0b00, 5) == 0b100000011001110);

  // All 32 codes are pairwise at Hamming distance >= 7, so the <=3 error
  // tolerance in qr_read can never be ambiguous.
  std::vector<uint16_t> codes;
  for (int level = 0; level < 4; ++level)
    for (int m = 0; m < 8; ++m) codes.push_back(qrdetail::format_code(level, m));
  for (size_t i = 0; i < codes.size(); ++i)
    for (size_t j = i + 1; j < codes.size(); ++j)
      CHECK(std::popcount(static_cast<unsigned>(codes[i] ^ codes[j])) >= 7);
}

TEST_CASE("built symbol has the fixed structure") {
  QrMatrix qm = qr_build(Payload72::random(42), 3);

  auto finder_dark = [](int dr, int dc) {
    int d = std::max(std::abs(dr - 3), std::abs(dc - 3));
    return d != 2;
  };
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 7; ++c) {
      CHECK(qm.modules.at(r, c) == (finder_dark(r, c) ? 1 : 0));
      CHECK(qm.modules.at(r, c + 14) == (finder_dark(r, c) ? 1 : 0));
      CHECK(qm.modules.at(r + 14, c) == (finder_dark(r, c) ? 1 : 0));
    }

  // Separators are all light.
  for (int i = 0; i <= 7; ++i) {
    CHECK(qm.modules.at(7, i) == 0);
    CHECK(qm.modules.at(i, 7) == 0);
    CHECK(qm.modules.at(7, 13 + i) == 0);
    CHECK(qm.modules.at(i, 13) == 0);
    CHECK(qm.modules.at(13 + i, 7) == 0);
    CHECK(qm.modules.at(13, i) == 0);
  }

  // Timing alternates starting dark; dark module is dark.
  for (int i = 8; i <= 12; ++i) {
    CHECK(qm.modules.at(6, i) == (i % 2 == 0 ? 1 : 0));
    CHECK(qm.modules.at(i, 6) == (i % 2 == 0 ? 1 : 0));
  }
  CHECK(qm.modules.at(13, 8) == 1);
}

TEST_CASE("round trip across all masks") {
  for (int mask = 0; mask < 8; ++mask) {
    for (uint64_t s = 0; s < 40; ++s) {
      Payload72 p = Payload72::random(mix_seed(1000 + s, static_cast<uint64_t>(mask)));
      QrMatrix qm = qr_build(p, mask);
      auto got = qr_read(qm);
      REQUIRE(got.has_value());
      CHECK(got->payload == p);
      CHECK(got->corrected == 0);
      CHECK(got->mask_id == mask);
      CHECK(got->format_distance == 0);
    }
  }
}

TEST_CASE("distinct masks change the modules but not the message") {
  Payload72 p = Payload72::from_hex("deadbeefcafe123456");
  QrMatrix m0 = qr_build(p, 0);
  QrMatrix m5 = qr_build(p, 5);
  CHECK(m0.modules.data != m5.modules.data);
  CHECK(qr_read(m0)->payload == p);
  CHECK(qr_read(m5)->payload == p);
}

TEST_CASE("data damage within the correction radius is repaired") {
  Payload72 p = Payload72::random(77);
  const auto& order = qrdetail::zigzag_positions();
  Rng rng(123);

  for (int trial = 0; trial < 50; ++trial) {
    QrMatrix qm = qr_build(p, trial % 8);
    // Flip up to 8 data modules; each lands in a distinct codeword at worst,
    // which is exactly the RS correction radius.
    int nflips = 1 + static_cast<int>(rng.uniform_index(8));
    std::set<size_t> picked;
    while (static_cast<int>(picked.size()) < nflips) picked.insert(rng.uniform_index(order.size()));
    for (size_t idx : picked) {
      auto [r, c] = order[idx];
      qm.modules.at(r, c) ^= 1;
    }
    auto got = qr_read(qm);
    REQUIRE(got.has_value());
    CHECK(got->payload == p);
    CHECK(got->corrected >= 1);
    CHECK(got->corrected <= nflips);
  }
}

TEST_CASE("format info survives three bit errors per copy") {
  Payload72 p = Payload72::random(5150);
  QrMatrix qm = qr_build(p, 6);
  for (int b = 0; b < 3; ++b) {
    auto [r1, c1] = qrdetail::kFormatCopy1[static_cast<size_t>(4 * b)];
    auto [r2, c2] = qrdetail::kFormatCopy2[static_cast<size_t>(4 * b + 1)];
    qm.modules.at(r1, c1) ^= 1;
    qm.modules.at(r2, c2) ^= 1;
  }
  auto got = qr_read(qm);
  REQUIRE(got.has_value());
  CHECK(got->payload == p);
  CHECK(got->mask_id == 6);
  CHECK(got->format_distance == 3);
}

TEST_CASE("inverted and degenerate symbols fail gracefully") {
  for (uint64_t s = 0; s < 10; ++s) {
    QrMatrix qm = qr_build(Payload72::random(900 + s), static_cast<int>(s % 8));
    for (auto& m : qm.modules.data) m ^= 1;
    CHECK_FALSE(qr_read(qm).has_value());
  }
  QrMatrix dark;
  for (auto& m : dark.modules.data) m = 1;
  CHECK_FALSE(qr_read(dark).has_value());
  QrMatrix light;  // default all-zero
  CHECK_FALSE(qr_read(light).has_value());
}

TEST_CASE("cell upsample and downsample are exact inverses") {
  Payload72 p = Payload72::random(31337);
  QrMatrix qm = qr_build(p, 2);

  for (int cell : {1, 2, 3}) {
    RealPlane px = cell_upsample(qm, cell);
    REQUIRE(px.rows == 21 * cell);
    REQUIRE(px.cols == 21 * cell);
    for (double v : px.data) CHECK((v == 1.0 || v == -1.0));

    RealPlane means = cell_downsample(px, cell);
    QrMatrix back = modules_from_means(means);
    CHECK(back.modules.data == qm.modules.data);
  }

  // Means are plain block averages.
  RealPlane grid(4, 4, 0.0);
  grid.at(0, 0) = 2.0;
  grid.at(0, 1) = 4.0;
  grid.at(1, 0) = -2.0;
  grid.at(1, 1) = 0.0;
  grid.at(2, 2) = 8.0;
  RealPlane ds = cell_downsample(grid, 2);
  CHECK(ds.at(0, 0) == 1.0);
  CHECK(ds.at(1, 1) == 2.0);
  CHECK(ds.at(0, 1) == 0.0);

  CHECK_THROWS_AS(cell_downsample(grid, 3), std::invalid_argument);
  CHECK_THROWS_AS(cell_upsample(qm, 0), std::invalid_argument);
}

TEST_CASE("noisy pixels still read back through the cell pipeline") {
  Payload72 p = Payload72::random(60601);
  QrMatrix qm = qr_build(p, 0);
  RealPlane px = cell_upsample(qm, 2);

  Rng rng(424242);
  for (double& v : px.data) v += 0.6 * rng.gaussian();

  QrMatrix back = modules_from_means(cell_downsample(px, 2));
  auto got = qr_read(back);
  REQUIRE(got.has_value());
  CHECK(got->payload == p);
}
