#include "sdcomp/regioncodec.hpp"

#include <cmath>
#include <numbers>

#include "sdcomp/bitio.hpp"
#include "sdcomp/errors.hpp"

namespace sdcomp {

namespace {

// Zigzag scan position -> row-major index, standard JPEG order.
constexpr std::array<uint8_t, 64> kZigzag = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
};

constexpr int kEndOfBlock = 63;  // ue(63); AC runs occupy [0,62]

struct DctTables {
  double cosine[8][8];  // cosine[k][n] = cos((2n+1) k pi / 16)
  double scale[8];      // orthonormal scale factors
  DctTables() {
    for (int k = 0; k < 8; ++k)
      for (int n = 0; n < 8; ++n)
        cosine[k][n] = std::cos((2.0 * n + 1.0) * k * std::numbers::pi / 16.0);
    scale[0] = std::sqrt(1.0 / 8.0);
    for (int k = 1; k < 8; ++k) scale[k] = std::sqrt(2.0 / 8.0);
  }
};

const DctTables& tables() {
  static const DctTables t;
  return t;
}

int64_t round_half_away(double v) { return std::llround(v); }

std::vector<uint8_t> pad_replicate(const std::vector<uint8_t>& samples, uint32_t w, uint32_t h,
                                   uint32_t pw, uint32_t ph) {
  std::vector<uint8_t> out(size_t(pw) * ph);
  for (uint32_t y = 0; y < ph; ++y) {
    uint32_t sy = y < h ? y : h - 1;
    for (uint32_t x = 0; x < pw; ++x) {
      uint32_t sx = x < w ? x : w - 1;
      out[size_t(y) * pw + x] = samples[size_t(sy) * w + sx];
    }
  }
  return out;
}

void mean_fill_outside_mask(std::vector<uint8_t>& samples, const Bitmap& mask) {
  uint64_t sum = 0;
  uint64_t count = 0;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (mask.bits[i]) {
      sum += samples[i];
      ++count;
    }
  }
  if (count == 0 || count == samples.size()) return;  // nothing inside, or nothing to fill
  uint8_t fill = clamp_round_u8(double(sum) / double(count));
  for (size_t i = 0; i < samples.size(); ++i)
    if (!mask.bits[i]) samples[i] = fill;
}

void encode_plane(BitWriter& bw, const std::vector<uint8_t>& samples, uint32_t pw, uint32_t ph,
                  const double steps[8][8]) {
  int64_t dc_pred = 0;
  for (uint32_t by = 0; by < ph / 8; ++by) {
    for (uint32_t bx = 0; bx < pw / 8; ++bx) {
      Block spatial;
      for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
          spatial[x * 8 + y] =
              double(samples[size_t(by * 8 + x) * pw + bx * 8 + y]) - 128.0;
      Block freq = dct8x8_forward(spatial);

      std::array<int64_t, 64> index;
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v)
          index[u * 8 + v] = round_half_away(freq[u * 8 + v] / steps[u][v]);

      bw.put_se(index[0] - dc_pred);
      dc_pred = index[0];

      int run = 0;
      for (int k = 1; k < 64; ++k) {
        int64_t level = index[kZigzag[k]];
        if (level == 0) {
          ++run;
          continue;
        }
        bw.put_ue(uint64_t(run));
        bw.put_se(level);
        run = 0;
      }
      bw.put_ue(kEndOfBlock);
    }
  }
}

void decode_plane(BitReader& br, std::vector<uint8_t>& samples, uint32_t pw, uint32_t ph,
                  const double steps[8][8]) {
  constexpr int64_t kDcLimit = int64_t(1) << 52;
  int64_t dc_pred = 0;
  for (uint32_t by = 0; by < ph / 8; ++by) {
    for (uint32_t bx = 0; bx < pw / 8; ++bx) {
      std::array<int64_t, 64> index{};
      dc_pred += br.get_se();
      if (dc_pred > kDcLimit || dc_pred < -kDcLimit)
        throw FormatError("region payload: DC out of range");
      index[0] = dc_pred;

      int pos = 1;
      for (;;) {
        uint64_t symbol = br.get_ue();
        if (symbol == kEndOfBlock) break;
        if (symbol > 62) throw FormatError("region payload: invalid run length");
        pos += int(symbol);
        if (pos > 63) throw FormatError("region payload: run overflows block");
        int64_t level = br.get_se();
        if (level == 0) throw FormatError("region payload: zero AC level");
        index[kZigzag[pos]] = level;
        ++pos;
      }

      Block freq;
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v)
          freq[u * 8 + v] = double(index[u * 8 + v]) * steps[u][v];
      Block spatial = dct8x8_inverse(freq);
      for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
          samples[size_t(by * 8 + x) * pw + bx * 8 + y] =
              clamp_round_u8(spatial[x * 8 + y] + 128.0);
    }
  }
}

void fill_steps(QualityIndex q, double steps[8][8]) {
  for (int u = 0; u < 8; ++u)
    for (int v = 0; v < 8; ++v) steps[u][v] = quant_step(q, u, v);
}

}  // namespace

QualityIndex::QualityIndex(int v) : value(v) {
  if (v < 1 || v > 8) throw FormatError("quality index must be in [1,8]");
}

double quant_step(QualityIndex q, int u, int v) {
  return std::ldexp(1.0, q.value - 1) * (4.0 + u + v) / 4.0;
}

Block dct8x8_forward(const Block& spatial) {
  const DctTables& t = tables();
  Block out;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double sum = 0.0;
      for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y)
          sum += spatial[x * 8 + y] * t.cosine[u][x] * t.cosine[v][y];
      out[u * 8 + v] = t.scale[u] * t.scale[v] * sum;
    }
  }
  return out;
}

Block dct8x8_inverse(const Block& freq) {
  const DctTables& t = tables();
  Block out;
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      double sum = 0.0;
      for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v)
          sum += t.scale[u] * t.scale[v] * freq[u * 8 + v] * t.cosine[u][x] * t.cosine[v][y];
      out[x * 8 + y] = sum;
    }
  }
  return out;
}

RegionPayload encode_region(const Image& region, const Bitmap* mask, QualityIndex q) {
  if (region.width == 0 || region.height == 0)
    throw FormatError("encode_region: empty region");
  if (mask && (mask->width != region.width || mask->height != region.height ||
               mask->bits.size() != size_t(region.width) * region.height))
    throw FormatError("encode_region: mask dimensions do not match region");

  YcbcrPlanes planes = rgb_to_ycbcr(region);
  uint32_t pw = (region.width + 7) & ~7u;
  uint32_t ph = (region.height + 7) & ~7u;

  double steps[8][8];
  fill_steps(q, steps);

  BitWriter bw;
  for (std::vector<uint8_t>* plane : {&planes.y, &planes.cb, &planes.cr}) {
    std::vector<uint8_t> samples = *plane;
    if (mask) mean_fill_outside_mask(samples, *mask);
    std::vector<uint8_t> padded =
        pad_replicate(samples, region.width, region.height, pw, ph);
    encode_plane(bw, padded, pw, ph, steps);
  }
  return RegionPayload{bw.finish(), pw, ph};
}

Image decode_region(std::span<const uint8_t> payload, uint32_t orig_w, uint32_t orig_h,
                    QualityIndex q) {
  if (orig_w == 0 || orig_h == 0) throw FormatError("decode_region: empty region");
  uint32_t pw = (orig_w + 7) & ~7u;
  uint32_t ph = (orig_h + 7) & ~7u;

  double steps[8][8];
  fill_steps(q, steps);

  BitReader br(payload);
  YcbcrPlanes planes;
  planes.width = pw;
  planes.height = ph;
  planes.y.resize(size_t(pw) * ph);
  planes.cb.resize(size_t(pw) * ph);
  planes.cr.resize(size_t(pw) * ph);
  decode_plane(br, planes.y, pw, ph, steps);
  decode_plane(br, planes.cb, pw, ph, steps);
  decode_plane(br, planes.cr, pw, ph, steps);

  if (br.bits_left() >= 8) throw FormatError("region payload: trailing data");
  while (br.bits_left() > 0)
    if (br.get_bit() != 0) throw FormatError("region payload: nonzero padding");

  Image padded = ycbcr_to_rgb(planes);
  if (pw == orig_w && ph == orig_h) return padded;
  return crop(padded, Rect{0, 0, orig_w, orig_h});
}

std::vector<uint8_t> mask_rle_encode(const Bitmap& mask) {
  size_t n = size_t(mask.width) * mask.height;
  if (n == 0 || mask.bits.size() != n) throw FormatError("mask rle: invalid mask");
  BitWriter bw;
  size_t pos = 0;
  while (pos < n) {
    size_t zeros = 0;
    while (pos + zeros < n && !mask.bits[pos + zeros]) ++zeros;
    bw.put_ue(zeros);
    pos += zeros;
    size_t ones = 0;
    while (pos + ones < n && mask.bits[pos + ones]) ++ones;
    bw.put_ue(ones);
    pos += ones;
  }
  return bw.finish();
}

Bitmap mask_rle_decode(std::span<const uint8_t> bytes, uint32_t w, uint32_t h) {
  uint64_t n = uint64_t(w) * h;
  if (n == 0) throw FormatError("mask rle: empty mask");
  Bitmap mask(w, h);
  BitReader br(bytes);
  uint64_t pos = 0;
  while (pos < n) {
    uint64_t zeros = br.get_ue();
    if (pos + zeros > n) throw FormatError("mask rle: runs exceed mask area");
    pos += zeros;
    uint64_t ones = br.get_ue();
    if (pos + ones > n) throw FormatError("mask rle: runs exceed mask area");
    std::fill(mask.bits.begin() + pos, mask.bits.begin() + pos + ones, uint8_t(1));
    pos += ones;
  }
  if (br.bits_left() >= 8) throw FormatError("mask rle: trailing data");
  while (br.bits_left() > 0)
    if (br.get_bit() != 0) throw FormatError("mask rle: nonzero padding");
  return mask;
}

}  // namespace sdcomp
