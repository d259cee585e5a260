#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "sdcomp/image.hpp"
#include "sdcomp/regioncodec.hpp"

namespace sdcomp {

// Unit importance codes; lower code = transmitted earlier.
using LevelCode = uint8_t;
inline constexpr LevelCode kLevelL1 = 1;
inline constexpr LevelCode kLevelL2 = 2;
inline constexpr LevelCode kLevelL3 = 3;
inline constexpr LevelCode kLevelOtherObjects = 4;
inline constexpr LevelCode kLevelBackground = 5;

// One self-delimiting bitstream unit. The background unit is the unique
// unit with level 5, object_id 0, a full-frame bbox and no mask.
struct RegionUnit {
  LevelCode level = kLevelBackground;
  uint32_t object_id = 0;
  Rect bbox;
  QualityIndex quality;
  std::vector<uint8_t> mask_bytes;  // RLE-coded; empty = no mask
  std::vector<uint8_t> payload;

  bool operator==(const RegionUnit&) const = default;
};

// Global header plus importance-ordered units, sorted by
// (level ascending, object_id ascending).
struct StructuredBitstream {
  uint32_t width = 0;
  uint32_t height = 0;
  std::array<uint8_t, 3> mean_color{};
  std::vector<RegionUnit> units;

  bool operator==(const StructuredBitstream&) const = default;
};

// Wire layout (little-endian):
//   header (16 bytes): "SDC1" | version u8=1 | width u32 | height u32 | mean rgb u8x3
//   unit: level u8 | object_id u16 | x,y u16 | w,h u16 | quality u8 |
//         mask_len u32 | payload_len u32 | mask bytes | payload bytes
std::vector<uint8_t> serialize(const StructuredBitstream& stream);
StructuredBitstream parse(std::span<const uint8_t> bytes);

// Byte prefix of the input ending after the last unit with
// level <= max_level; the header is always kept.
std::vector<uint8_t> truncate(std::span<const uint8_t> bytes, LevelCode max_level);

struct UnitInfo {
  LevelCode level = 0;
  uint32_t object_id = 0;
  Rect bbox;
  int quality = 0;
  uint32_t mask_bytes = 0;
  uint32_t payload_bytes = 0;
  uint64_t unit_bytes = 0;  // total on-wire size including the unit header
};

struct Manifest {
  uint32_t width = 0;
  uint32_t height = 0;
  std::array<uint8_t, 3> mean_color{};
  std::vector<UnitInfo> units;
  uint64_t total_bytes = 0;
  double bpp = 0.0;
};

Manifest inspect(std::span<const uint8_t> bytes);

}  // namespace sdcomp
