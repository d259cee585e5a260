#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "sdcomp/errors.hpp"

namespace sdcomp {

// MSB-first bit writer. finish() returns the buffer; the last byte is
// implicitly padded with zero bits.
class BitWriter {
 public:
  void put_bit(uint32_t bit) {
    if ((bit_count_ & 7) == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= uint8_t(0x80u >> (bit_count_ & 7));
    ++bit_count_;
  }

  void put_bits(uint64_t value, int width) {
    for (int i = width - 1; i >= 0; --i) put_bit(uint32_t(value >> i) & 1u);
  }

  // Exp-Golomb: floor(log2(v+1)) zero bits, then v+1 in binary.
  void put_ue(uint64_t v) {
    int width = std::bit_width(v + 1);
    for (int i = 0; i < width - 1; ++i) put_bit(0);
    put_bits(v + 1, width);
  }

  // Signed mapping: v>0 -> ue(2v-1), v<=0 -> ue(-2v).
  void put_se(int64_t v) {
    put_ue(v > 0 ? uint64_t(2 * v - 1) : uint64_t(-2 * v));
  }

  size_t bit_count() const { return bit_count_; }

  std::vector<uint8_t> finish() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  size_t bit_count_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  uint32_t get_bit() {
    if (pos_ >= bytes_.size() * 8) throw FormatError("bitstream exhausted");
    uint32_t b = (bytes_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return b;
  }

  uint64_t get_ue() {
    int zeros = 0;
    while (get_bit() == 0) {
      if (++zeros > 40) throw FormatError("exp-golomb code out of range");
    }
    uint64_t value = 1;
    for (int i = 0; i < zeros; ++i) value = (value << 1) | get_bit();
    return value - 1;
  }

  int64_t get_se() {
    uint64_t u = get_ue();
    if (u == 0) return 0;
    return (u & 1) ? int64_t((u + 1) / 2) : -int64_t(u / 2);
  }

  size_t bits_consumed() const { return pos_; }
  size_t bits_left() const { return bytes_.size() * 8 - pos_; }

 private:
  std::span<const uint8_t> bytes_;
  size_t pos_ = 0;
};

}  // namespace sdcomp
