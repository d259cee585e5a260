#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sdcomp/image.hpp"

namespace sdcomp {

// Quantizer index: 1 = finest, 8 = coarsest.
struct QualityIndex {
  int value = 1;

  QualityIndex() = default;
  explicit QualityIndex(int v);

  bool operator==(const QualityIndex&) const = default;
};

struct RegionPayload {
  std::vector<uint8_t> bytes;  // entropy-coded, byte-aligned
  uint32_t coded_w = 0;        // padded up to a multiple of 8
  uint32_t coded_h = 0;
};

// step = 2^(q-1) * (4 + u + v) / 4, u = frequency row, v = frequency column.
double quant_step(QualityIndex q, int u, int v);

// Row-major 8x8 block.
using Block = std::array<double, 64>;

// Direct orthonormal 2-D DCT-II with summation loop order (u,v,x,y).
Block dct8x8_forward(const Block& spatial);
Block dct8x8_inverse(const Block& freq);

// Per-region encoder: color transform, optional mean-fill outside the
// mask, edge-replication padding, 8x8 DCT, dead-zone quantization,
// zigzag + Exp-Golomb run-length coding. Planes are coded Y, Cb, Cr into
// one bit sequence; the final byte is zero-padded.
RegionPayload encode_region(const Image& region, const Bitmap* mask, QualityIndex q);

Image decode_region(std::span<const uint8_t> payload, uint32_t orig_w, uint32_t orig_h,
                    QualityIndex q);

// Binary mask RLE: alternating (zero-run, one-run) pairs, each run
// ue-coded MSB-first, repeated until w*h bits are covered; zero-padded to
// a byte.
std::vector<uint8_t> mask_rle_encode(const Bitmap& mask);
Bitmap mask_rle_decode(std::span<const uint8_t> bytes, uint32_t w, uint32_t h);

}  // namespace sdcomp
