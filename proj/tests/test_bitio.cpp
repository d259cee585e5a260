#include <doctest.h>

#include <string>

#include "sdcomp/bitio.hpp"
#include "sdcomp/errors.hpp"

using namespace sdcomp;

namespace {

std::string bit_string(const std::vector<uint8_t>& bytes, size_t bit_count) {
  std::string s;
  for (size_t i = 0; i < bit_count; ++i)
    s.push_back(((bytes[i >> 3] >> (7 - (i & 7))) & 1) ? '1' : '0');
  return s;
}

std::string ue_bits(uint64_t v) {
  BitWriter bw;
  bw.put_ue(v);
  size_t count = bw.bit_count();
  return bit_string(bw.finish(), count);
}

std::string se_bits(int64_t v) {
  BitWriter bw;
  bw.put_se(v);
  size_t count = bw.bit_count();
  return bit_string(bw.finish(), count);
}

}  // namespace

TEST_CASE("ue codes match the definition") {
  CHECK(ue_bits(0) == "1");
  CHECK(ue_bits(1) == "010");
  CHECK(ue_bits(2) == "011");
  CHECK(ue_bits(3) == "00100");
  CHECK(ue_bits(63) == "0000001000000");
  CHECK(ue_bits(64) == "0000001000001");
}

TEST_CASE("se codes map sign to the ue domain") {
  CHECK(se_bits(0) == "1");
  CHECK(se_bits(1) == "010");    // ue(1)
  CHECK(se_bits(-1) == "011");   // ue(2)
  CHECK(se_bits(2) == "00100");  // ue(3)
  CHECK(se_bits(-2) == "00101"); // ue(4)
}

TEST_CASE("ue and se round-trip and are prefix-free up to 1e6") {
  BitWriter bw;
  for (uint64_t v = 0; v <= 1000000; ++v) bw.put_ue(v);
  size_t total_bits = bw.bit_count();
  std::vector<uint8_t> bytes = bw.finish();
  BitReader br(bytes);
  for (uint64_t v = 0; v <= 1000000; ++v) {
    REQUIRE(br.get_ue() == v);  // decoding consumes exactly the written code
  }
  CHECK(br.bits_consumed() == total_bits);

  BitWriter sw;
  for (int64_t v = -100000; v <= 100000; ++v) sw.put_se(v);
  std::vector<uint8_t> sbytes = sw.finish();
  BitReader sr(sbytes);
  for (int64_t v = -100000; v <= 100000; ++v) REQUIRE(sr.get_se() == v);
}

TEST_CASE("reader reports exhaustion as a structured error") {
  std::vector<uint8_t> one = {0x80};
  BitReader br(one);
  for (int i = 0; i < 8; ++i) br.get_bit();
  CHECK_THROWS_AS(br.get_bit(), FormatError);

  std::vector<uint8_t> zeros(16, 0x00);  // runaway zero prefix
  BitReader zr(zeros);
  CHECK_THROWS_AS(zr.get_ue(), FormatError);
}
