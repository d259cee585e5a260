#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace sdcomp {

// Interleaved 8-bit RGB raster, row-major, three bytes per pixel.
struct Image {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> pixels;

  Image() = default;
  Image(uint32_t w, uint32_t h);  // zero-filled; throws FormatError on a zero dimension

  size_t pixel_offset(uint32_t x, uint32_t y) const {
    return (size_t(y) * width + x) * 3;
  }

  bool operator==(const Image&) const = default;
};

struct Rect {
  uint32_t x = 0;
  uint32_t y = 0;
  uint32_t w = 0;
  uint32_t h = 0;

  bool operator==(const Rect&) const = default;
};

// Binary mask, one byte per sample (0 or 1), row-major.
struct Bitmap {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> bits;

  Bitmap() = default;
  Bitmap(uint32_t w, uint32_t h) : width(w), height(h), bits(size_t(w) * h, 0) {}

  bool operator==(const Bitmap&) const = default;
};

struct YcbcrPlanes {
  uint32_t width = 0;
  uint32_t height = 0;
  std::vector<uint8_t> y;
  std::vector<uint8_t> cb;
  std::vector<uint8_t> cr;
};

// Binary PPM (P6, maxval 255). Header grammar: "P6", whitespace, width,
// whitespace, height, whitespace, "255", one whitespace byte, raw RGB.
Image load_ppm(std::span<const uint8_t> bytes);
std::vector<uint8_t> save_ppm(const Image& img);

// BT.601 full-range transforms, 4:4:4, round-half-away-from-zero.
YcbcrPlanes rgb_to_ycbcr(const Image& img);
Image ycbcr_to_rgb(const YcbcrPlanes& planes);

Image crop(const Image& img, const Rect& r);

// Rounding rule used across the codec; clamps to the 8-bit sample range.
uint8_t clamp_round_u8(double v);

}  // namespace sdcomp
