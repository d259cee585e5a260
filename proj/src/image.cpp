#include "sdcomp/image.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

#include "sdcomp/errors.hpp"

namespace sdcomp {

namespace {

constexpr uint64_t kMaxPixelBytes = uint64_t(1) << 30;

bool is_ppm_space(uint8_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_digit(uint8_t c) { return c >= '0' && c <= '9'; }

}  // namespace

Image::Image(uint32_t w, uint32_t h) : width(w), height(h) {
  if (w == 0 || h == 0) throw FormatError("image: dimensions must be at least 1x1");
  if (uint64_t(w) * h * 3 > kMaxPixelBytes) throw FormatError("image: too large");
  pixels.assign(size_t(w) * h * 3, 0);
}

uint8_t clamp_round_u8(double v) {
  long long r = std::llround(v);  // rounds halfway cases away from zero
  if (r < 0) return 0;
  if (r > 255) return 255;
  return uint8_t(r);
}

Image load_ppm(std::span<const uint8_t> bytes) {
  size_t pos = 0;
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6')
    throw FormatError("ppm: not a binary P6 file");
  pos = 2;

  auto skip_whitespace = [&] {
    size_t start = pos;
    while (pos < bytes.size() && is_ppm_space(bytes[pos])) ++pos;
    if (pos == start) throw FormatError("ppm: malformed header");
  };
  auto read_number = [&]() -> uint64_t {
    if (pos >= bytes.size() || !is_digit(bytes[pos]))
      throw FormatError("ppm: malformed header");
    uint64_t value = 0;
    while (pos < bytes.size() && is_digit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 0xFFFFFFFFull) throw FormatError("ppm: header value out of range");
      ++pos;
    }
    return value;
  };

  skip_whitespace();
  uint64_t width = read_number();
  skip_whitespace();
  uint64_t height = read_number();
  skip_whitespace();
  uint64_t maxval = read_number();
  if (maxval != 255) throw FormatError("ppm: maxval must be 255");
  if (pos >= bytes.size() || !is_ppm_space(bytes[pos]))
    throw FormatError("ppm: malformed header");
  ++pos;  // exactly one whitespace byte before the raster

  if (width == 0 || height == 0) throw FormatError("ppm: dimensions must be at least 1x1");
  uint64_t raster = width * height * 3;
  if (raster > kMaxPixelBytes) throw FormatError("ppm: image too large");
  if (bytes.size() - pos < raster) throw FormatError("ppm: truncated pixel data");

  Image img(static_cast<uint32_t>(width), static_cast<uint32_t>(height));
  std::memcpy(img.pixels.data(), bytes.data() + pos, size_t(raster));
  return img;
}

std::vector<uint8_t> save_ppm(const Image& img) {
  if (img.width == 0 || img.height == 0 ||
      img.pixels.size() != size_t(img.width) * img.height * 3)
    throw FormatError("ppm: invalid image");
  char header[64];
  int n = std::snprintf(header, sizeof(header), "P6\n%u %u\n255\n", img.width, img.height);
  std::vector<uint8_t> out;
  out.reserve(size_t(n) + img.pixels.size());
  out.insert(out.end(), header, header + n);
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

YcbcrPlanes rgb_to_ycbcr(const Image& img) {
  YcbcrPlanes planes;
  planes.width = img.width;
  planes.height = img.height;
  size_t count = size_t(img.width) * img.height;
  planes.y.resize(count);
  planes.cb.resize(count);
  planes.cr.resize(count);
  for (size_t i = 0; i < count; ++i) {
    double r = img.pixels[i * 3 + 0];
    double g = img.pixels[i * 3 + 1];
    double b = img.pixels[i * 3 + 2];
    planes.y[i] = clamp_round_u8(0.299 * r + 0.587 * g + 0.114 * b);
    planes.cb[i] = clamp_round_u8(128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b);
    planes.cr[i] = clamp_round_u8(128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b);
  }
  return planes;
}

Image ycbcr_to_rgb(const YcbcrPlanes& planes) {
  size_t count = size_t(planes.width) * planes.height;
  if (planes.y.size() != count || planes.cb.size() != count || planes.cr.size() != count)
    throw FormatError("ycbcr: plane size mismatch");
  Image img(planes.width, planes.height);
  for (size_t i = 0; i < count; ++i) {
    double y = planes.y[i];
    double cb = planes.cb[i] - 128.0;
    double cr = planes.cr[i] - 128.0;
    img.pixels[i * 3 + 0] = clamp_round_u8(y + 1.402 * cr);
    img.pixels[i * 3 + 1] = clamp_round_u8(y - 0.344136 * cb - 0.714136 * cr);
    img.pixels[i * 3 + 2] = clamp_round_u8(y + 1.772 * cb);
  }
  return img;
}

Image crop(const Image& img, const Rect& r) {
  if (r.w == 0 || r.h == 0) throw FormatError("crop: empty rect");
  if (uint64_t(r.x) + r.w > img.width || uint64_t(r.y) + r.h > img.height)
    throw FormatError("crop: rect out of bounds");
  Image out(r.w, r.h);
  for (uint32_t row = 0; row < r.h; ++row) {
    const uint8_t* src = img.pixels.data() + img.pixel_offset(r.x, r.y + row);
    uint8_t* dst = out.pixels.data() + out.pixel_offset(0, row);
    std::memcpy(dst, src, size_t(r.w) * 3);
  }
  return out;
}

}  // namespace sdcomp
