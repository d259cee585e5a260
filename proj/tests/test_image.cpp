#include <doctest.h>

#include <vector>

#include "sdcomp/errors.hpp"
#include "sdcomp/image.hpp"
#include "synth.hpp"

using namespace sdcomp;

namespace {

std::vector<uint8_t> ppm_bytes(const char* header, std::initializer_list<uint8_t> raster) {
  std::vector<uint8_t> data(header, header + std::char_traits<char>::length(header));
  data.insert(data.end(), raster);
  return data;
}

}  // namespace

TEST_CASE("load_ppm parses a minimal P6 file") {
  Image img = load_ppm(ppm_bytes("P6\n1 1\n255\n", {255, 0, 0}));
  CHECK(img.width == 1);
  CHECK(img.height == 1);
  CHECK(img.pixels == std::vector<uint8_t>{255, 0, 0});
}

TEST_CASE("load_ppm rejects malformed input") {
  CHECK_THROWS_AS(load_ppm(ppm_bytes("P5\n1 1\n255\n", {0})), FormatError);
  CHECK_THROWS_AS(load_ppm(ppm_bytes("P6\n2 1\n255\n", {1, 2, 3})), FormatError);  // truncated
  CHECK_THROWS_AS(load_ppm(ppm_bytes("P6\n1 1\n254\n", {0, 0, 0})), FormatError);  // maxval
  CHECK_THROWS_AS(load_ppm(ppm_bytes("P6\n0 1\n255\n", {})), FormatError);
  CHECK_THROWS_AS(load_ppm(ppm_bytes("P6\n1 x\n255\n", {0, 0, 0})), FormatError);
  CHECK_THROWS_AS(load_ppm(std::vector<uint8_t>{}), FormatError);
}

TEST_CASE("save_ppm writes the canonical header") {
  Image black(1, 1);
  std::vector<uint8_t> expected = ppm_bytes("P6\n1 1\n255\n", {0, 0, 0});
  CHECK(save_ppm(black) == expected);

  Image two(2, 2);
  std::vector<uint8_t> bytes = save_ppm(two);
  std::string header(bytes.begin(), bytes.begin() + 11);
  CHECK(header == "P6\n2 2\n255\n");
}

TEST_CASE("ppm round-trip is the identity") {
  synth::Rng rng(7);
  for (int iter = 0; iter < 8; ++iter) {
    Image img(rng.range(1, 33), rng.range(1, 33));
    for (auto& p : img.pixels) p = uint8_t(rng.below(256));
    CHECK(load_ppm(save_ppm(img)) == img);
  }
}

TEST_CASE("rgb_to_ycbcr known values") {
  Image img(3, 1);
  uint8_t values[9] = {0, 0, 0, 255, 255, 255, 255, 0, 0};
  std::copy(values, values + 9, img.pixels.begin());
  YcbcrPlanes planes = rgb_to_ycbcr(img);
  CHECK(planes.y[0] == 0);
  CHECK(planes.cb[0] == 128);
  CHECK(planes.cr[0] == 128);
  CHECK(planes.y[1] == 255);
  CHECK(planes.cb[1] == 128);
  CHECK(planes.cr[1] == 128);
  // pure red: 0.299*255 = 76.245 -> 76; 128-43.02768 -> 85; 128+127.5 -> clamp 255
  CHECK(planes.y[2] == 76);
  CHECK(planes.cb[2] == 85);
  CHECK(planes.cr[2] == 255);
}

TEST_CASE("ycbcr_to_rgb known values") {
  YcbcrPlanes planes;
  planes.width = 2;
  planes.height = 1;
  planes.y = {0, 255};
  planes.cb = {128, 128};
  planes.cr = {128, 128};
  Image img = ycbcr_to_rgb(planes);
  CHECK(img.pixels == std::vector<uint8_t>{0, 0, 0, 255, 255, 255});
}

TEST_CASE("color round-trip error is at most 3 for every 8-bit input") {
  // Exhaustive scan over all 256^3 inputs, batched as 256x256 images.
  int max_err = 0;
  for (int r = 0; r < 256; ++r) {
    Image img(256, 256);
    for (int g = 0; g < 256; ++g)
      for (int b = 0; b < 256; ++b) {
        size_t off = img.pixel_offset(uint32_t(b), uint32_t(g));
        img.pixels[off + 0] = uint8_t(r);
        img.pixels[off + 1] = uint8_t(g);
        img.pixels[off + 2] = uint8_t(b);
      }
    Image back = ycbcr_to_rgb(rgb_to_ycbcr(img));
    for (size_t i = 0; i < img.pixels.size(); ++i) {
      int err = std::abs(int(img.pixels[i]) - int(back.pixels[i]));
      if (err > max_err) max_err = err;
    }
  }
  MESSAGE("observed max color round-trip error: ", max_err);
  CHECK(max_err <= 3);
}

TEST_CASE("crop copies the requested window") {
  Image img = synth::smooth_image(16, 12, 99);
  SUBCASE("full frame is the identity") {
    CHECK(crop(img, Rect{0, 0, 16, 12}) == img);
  }
  SUBCASE("1x1 at the origin") {
    Image c = crop(img, Rect{0, 0, 1, 1});
    CHECK(c.width == 1);
    CHECK(c.height == 1);
    CHECK(c.pixels[0] == img.pixels[0]);
    CHECK(c.pixels[1] == img.pixels[1]);
    CHECK(c.pixels[2] == img.pixels[2]);
  }
  SUBCASE("out of bounds is rejected") {
    CHECK_THROWS_AS(crop(img, Rect{10, 0, 7, 4}), FormatError);
    CHECK_THROWS_AS(crop(img, Rect{0, 0, 16, 0}), FormatError);
  }
  SUBCASE("dimensions follow the rect") {
    synth::Rng rng(3);
    for (int iter = 0; iter < 16; ++iter) {
      uint32_t w = rng.range(1, 16), h = rng.range(1, 12);
      Rect r{rng.below(16 - w + 1), rng.below(12 - h + 1), w, h};
      Image c = crop(img, r);
      CHECK(c.width == r.w);
      CHECK(c.height == r.h);
    }
  }
}
