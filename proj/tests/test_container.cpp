#include <doctest.h>

#include <vector>

#include "sdcomp/container.hpp"
#include "sdcomp/errors.hpp"
#include "synth.hpp"

using namespace sdcomp;

namespace {

RegionUnit make_unit(LevelCode level, uint32_t id, Rect bbox, int quality,
                     std::vector<uint8_t> mask, std::vector<uint8_t> payload) {
  RegionUnit unit;
  unit.level = level;
  unit.object_id = id;
  unit.bbox = bbox;
  unit.quality = QualityIndex(quality);
  unit.mask_bytes = std::move(mask);
  unit.payload = std::move(payload);
  return unit;
}

// Structurally valid stream with random units; payload bytes are opaque
// at the container level.
StructuredBitstream random_stream(uint64_t seed) {
  synth::Rng rng(seed);
  StructuredBitstream stream;
  stream.width = rng.range(16, 200);
  stream.height = rng.range(16, 200);
  stream.mean_color = {uint8_t(rng.below(256)), uint8_t(rng.below(256)),
                       uint8_t(rng.below(256))};
  uint32_t id = 0;
  for (LevelCode level = kLevelL1; level <= kLevelOtherObjects; ++level) {
    uint32_t count = rng.below(3);
    for (uint32_t i = 0; i < count; ++i) {
      id += 1 + rng.below(3);
      uint32_t w = rng.range(1, stream.width);
      uint32_t h = rng.range(1, stream.height);
      Rect bbox{rng.below(stream.width - w + 1), rng.below(stream.height - h + 1), w, h};
      std::vector<uint8_t> mask(rng.below(8));
      for (auto& b : mask) b = uint8_t(rng.below(256));
      std::vector<uint8_t> payload(1 + rng.below(64));
      for (auto& b : payload) b = uint8_t(rng.below(256));
      stream.units.push_back(make_unit(level, id, bbox, 1 + int(rng.below(8)),
                                       std::move(mask), std::move(payload)));
    }
  }
  if (rng.below(4) != 0) {
    std::vector<uint8_t> payload(1 + rng.below(64));
    for (auto& b : payload) b = uint8_t(rng.below(256));
    stream.units.push_back(make_unit(kLevelBackground, 0,
                                     Rect{0, 0, stream.width, stream.height},
                                     1 + int(rng.below(8)), {}, std::move(payload)));
  }
  return stream;
}

}  // namespace

TEST_CASE("a zero-unit stream serializes to exactly the 16-byte header") {
  StructuredBitstream stream;
  stream.width = 16;
  stream.height = 16;
  stream.mean_color = {1, 2, 3};
  std::vector<uint8_t> bytes = serialize(stream);
  std::vector<uint8_t> expected = {'S', 'D', 'C', '1', 1,           // magic, version
                                   16,  0,   0,   0,   16, 0, 0, 0, // width, height LE
                                   1,   2,   3};                    // mean color
  CHECK(bytes == expected);
  CHECK(parse(bytes) == stream);
}

TEST_CASE("a one-unit stream is byte-exact against the layout") {
  StructuredBitstream stream;
  stream.width = 32;
  stream.height = 24;
  stream.mean_color = {9, 8, 7};
  stream.units.push_back(
      make_unit(kLevelL1, 3, Rect{2, 4, 6, 5}, 2, {0xAA, 0xBB}, {0xCC, 0xDD, 0xEE}));
  std::vector<uint8_t> bytes = serialize(stream);

  std::vector<uint8_t> expected = {
      'S',  'D',  'C',  '1', 1,
      32,   0,    0,    0,
      24,   0,    0,    0,
      9,    8,    7,
      // unit header
      1,               // level
      3,    0,         // object id
      2,    0,         // x
      4,    0,         // y
      6,    0,         // w
      5,    0,         // h
      2,               // quality
      2,    0, 0, 0,   // mask_len
      3,    0, 0, 0,   // payload_len
      0xAA, 0xBB,      // mask
      0xCC, 0xDD, 0xEE // payload
  };
  CHECK(bytes == expected);
  CHECK(bytes.size() == 16 + 20 + 2 + 3);
  CHECK(parse(bytes) == stream);
}

TEST_CASE("serialize rejects invariant violations") {
  StructuredBitstream stream;
  stream.width = 32;
  stream.height = 32;

  SUBCASE("unsorted units") {
    stream.units.push_back(make_unit(kLevelL3, 1, Rect{0, 0, 4, 4}, 1, {}, {1}));
    stream.units.push_back(make_unit(kLevelL1, 2, Rect{0, 0, 4, 4}, 1, {}, {1}));
    CHECK_THROWS_AS(serialize(stream), FormatError);
  }
  SUBCASE("duplicate object ids") {
    stream.units.push_back(make_unit(kLevelL1, 2, Rect{0, 0, 4, 4}, 1, {}, {1}));
    stream.units.push_back(make_unit(kLevelL2, 2, Rect{0, 0, 4, 4}, 1, {}, {1}));
    CHECK_THROWS_AS(serialize(stream), FormatError);
  }
  SUBCASE("object unit with id 0") {
    stream.units.push_back(make_unit(kLevelL2, 0, Rect{0, 0, 4, 4}, 1, {}, {1}));
    CHECK_THROWS_AS(serialize(stream), FormatError);
  }
  SUBCASE("background with a mask") {
    auto bg = make_unit(kLevelBackground, 0, Rect{0, 0, 32, 32}, 1, {0xFF}, {1});
    stream.units.push_back(bg);
    CHECK_THROWS_AS(serialize(stream), FormatError);
  }
  SUBCASE("background not covering the frame") {
    stream.units.push_back(make_unit(kLevelBackground, 0, Rect{0, 0, 16, 32}, 1, {}, {1}));
    CHECK_THROWS_AS(serialize(stream), FormatError);
  }
  SUBCASE("bbox out of frame") {
    stream.units.push_back(make_unit(kLevelL1, 1, Rect{30, 0, 4, 4}, 1, {}, {1}));
    CHECK_THROWS_AS(serialize(stream), FormatError);
  }
}

TEST_CASE("parse and serialize are mutually inverse") {
  for (uint64_t seed = 1; seed <= 40; ++seed) {
    StructuredBitstream stream = random_stream(seed);
    std::vector<uint8_t> bytes = serialize(stream);
    CHECK(parse(bytes) == stream);
    CHECK(serialize(parse(bytes)) == bytes);
  }
}

TEST_CASE("parse rejects malformed streams") {
  StructuredBitstream stream = random_stream(7);
  std::vector<uint8_t> bytes = serialize(stream);

  SUBCASE("flipped magic") {
    bytes[0] ^= 0x01;
    CHECK_THROWS_AS(parse(bytes), FormatError);
  }
  SUBCASE("unsupported version") {
    bytes[4] = 2;
    CHECK_THROWS_AS(parse(bytes), FormatError);
  }
  SUBCASE("short header") {
    std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + 10);
    CHECK_THROWS_AS(parse(cut), FormatError);
  }
  SUBCASE("truncated unit header") {
    REQUIRE(bytes.size() > 16);
    std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + 16 + 7);
    CHECK_THROWS_AS(parse(cut), FormatError);
  }
  SUBCASE("declared payload length overruns the input") {
    StructuredBitstream one;
    one.width = 8;
    one.height = 8;
    one.units.push_back(make_unit(kLevelL1, 1, Rect{0, 0, 8, 8}, 1, {}, {1, 2, 3}));
    std::vector<uint8_t> wire = serialize(one);
    size_t off = 16 + 16;  // payload_len field of the first unit
    wire[off] = 0xFF;
    wire[off + 1] = 0xFF;
    CHECK_THROWS_AS(parse(wire), FormatError);
  }
  SUBCASE("random corruption never crashes") {
    synth::Rng rng(123);
    for (int iter = 0; iter < 5000; ++iter) {
      std::vector<uint8_t> mutated = bytes;
      int edits = 1 + int(rng.below(4));
      for (int e = 0; e < edits; ++e)
        mutated[rng.below(uint32_t(mutated.size()))] = uint8_t(rng.below(256));
      try {
        (void)parse(mutated);
      } catch (const FormatError&) {
      }
    }
  }
}

TEST_CASE("truncate returns exact byte prefixes") {
  for (uint64_t seed = 50; seed < 70; ++seed) {
    StructuredBitstream stream = random_stream(seed);
    std::vector<uint8_t> bytes = serialize(stream);

    size_t prev_len = 0;
    for (LevelCode t = kLevelL1; t <= kLevelBackground; ++t) {
      std::vector<uint8_t> cut = truncate(bytes, t);
      REQUIRE(cut.size() <= bytes.size());
      CHECK(std::equal(cut.begin(), cut.end(), bytes.begin()));  // literal prefix
      CHECK(cut.size() >= prev_len);                             // monotone in t
      prev_len = cut.size();
      StructuredBitstream parsed = parse(cut);  // prefix parses
      for (const auto& unit : parsed.units) CHECK(unit.level <= t);
    }
    CHECK(truncate(bytes, kLevelBackground) == bytes);
  }
}

TEST_CASE("truncating away every unit keeps the header") {
  StructuredBitstream stream;
  stream.width = 20;
  stream.height = 10;
  stream.units.push_back(make_unit(kLevelOtherObjects, 4, Rect{0, 0, 4, 4}, 3, {}, {1, 2}));
  stream.units.push_back(
      make_unit(kLevelBackground, 0, Rect{0, 0, 20, 10}, 5, {}, {3, 4, 5}));
  std::vector<uint8_t> bytes = serialize(stream);
  std::vector<uint8_t> cut = truncate(bytes, kLevelL3);
  CHECK(cut.size() == 16);
  CHECK(parse(cut).units.empty());
}

TEST_CASE("any prefix ending at a unit boundary parses") {
  StructuredBitstream stream = random_stream(99);
  std::vector<uint8_t> bytes = serialize(stream);
  size_t pos = 16;
  for (const auto& unit : stream.units) {
    pos += 20 + unit.mask_bytes.size() + unit.payload.size();
    std::vector<uint8_t> prefix(bytes.begin(), bytes.begin() + pos);
    CHECK_NOTHROW((void)parse(prefix));
  }
  CHECK(pos == bytes.size());
}

TEST_CASE("inspect reports the manifest") {
  SUBCASE("header-only stream") {
    StructuredBitstream stream;
    stream.width = 16;
    stream.height = 16;
    Manifest manifest = inspect(serialize(stream));
    CHECK(manifest.units.empty());
    CHECK(manifest.total_bytes == 16);
    CHECK(manifest.bpp == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("unit count matches and totals add up") {
    StructuredBitstream stream = random_stream(13);
    std::vector<uint8_t> bytes = serialize(stream);
    Manifest manifest = inspect(bytes);
    CHECK(manifest.units.size() == stream.units.size());
    uint64_t sum = 16;
    for (const auto& unit : manifest.units) sum += unit.unit_bytes;
    CHECK(sum == bytes.size());
  }
  SUBCASE("corrupt stream yields an error, not a partial manifest") {
    std::vector<uint8_t> junk = {'S', 'D', 'C', '1', 1, 0, 0};
    CHECK_THROWS_AS(inspect(junk), FormatError);
  }
}
