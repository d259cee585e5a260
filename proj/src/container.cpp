#include "sdcomp/container.hpp"

#include <cstring>
#include <string>

#include "sdcomp/errors.hpp"

namespace sdcomp {

namespace {

constexpr char kMagic[4] = {'S', 'D', 'C', '1'};
constexpr uint8_t kVersion = 1;
constexpr size_t kHeaderSize = 16;
constexpr size_t kUnitHeaderSize = 20;
constexpr uint32_t kMaxCoord = 0xFFFF;

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v & 0xFF));
  out.push_back(uint8_t(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t((v >> (8 * i)) & 0xFF));
}

uint16_t read_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

uint32_t read_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 | uint32_t(p[3]) << 24;
}

bool is_full_frame(const Rect& r, uint32_t w, uint32_t h) {
  return r.x == 0 && r.y == 0 && r.w == w && r.h == h;
}

void validate_unit(const RegionUnit& unit, uint32_t width, uint32_t height) {
  if (unit.level < kLevelL1 || unit.level > kLevelBackground)
    throw FormatError("container: unit level out of range");
  if (unit.quality.value < 1 || unit.quality.value > 8)
    throw FormatError("container: unit quality out of range");
  if (unit.bbox.w == 0 || unit.bbox.h == 0)
    throw FormatError("container: unit bbox must be at least 1x1");
  if (unit.bbox.x > kMaxCoord || unit.bbox.y > kMaxCoord || unit.bbox.w > kMaxCoord ||
      unit.bbox.h > kMaxCoord)
    throw FormatError("container: unit bbox exceeds 16-bit coordinates");
  if (uint64_t(unit.bbox.x) + unit.bbox.w > width ||
      uint64_t(unit.bbox.y) + unit.bbox.h > height)
    throw FormatError("container: unit bbox out of frame bounds");
  if (unit.level == kLevelBackground) {
    if (unit.object_id != 0)
      throw FormatError("container: background unit must have object id 0");
    if (!is_full_frame(unit.bbox, width, height))
      throw FormatError("container: background unit must cover the full frame");
    if (!unit.mask_bytes.empty())
      throw FormatError("container: background unit must not carry a mask");
  } else {
    if (unit.object_id == 0)
      throw FormatError("container: object units must have object id >= 1");
  }
  if (unit.object_id > kMaxCoord)
    throw FormatError("container: object id exceeds 16 bits");
  if (unit.mask_bytes.size() > 0xFFFFFFFFull || unit.payload.size() > 0xFFFFFFFFull)
    throw FormatError("container: unit section too large");
}

void validate_stream(const StructuredBitstream& stream) {
  if (stream.width == 0 || stream.height == 0)
    throw FormatError("container: frame dimensions must be at least 1x1");
  bool seen_background = false;
  const RegionUnit* prev = nullptr;
  std::vector<uint32_t> seen_ids;
  for (const auto& unit : stream.units) {
    validate_unit(unit, stream.width, stream.height);
    if (prev) {
      if (unit.level < prev->level ||
          (unit.level == prev->level && unit.object_id <= prev->object_id))
        throw FormatError("container: units out of (level, object id) order");
    }
    if (unit.level == kLevelBackground) {
      if (seen_background) throw FormatError("container: multiple background units");
      seen_background = true;
    } else {
      for (uint32_t id : seen_ids)
        if (id == unit.object_id)
          throw FormatError("container: duplicate object id " +
                            std::to_string(unit.object_id));
      seen_ids.push_back(unit.object_id);
    }
    prev = &unit;
  }
}

struct ParsedStream {
  StructuredBitstream stream;
  std::vector<size_t> unit_ends;  // byte offset just past each unit
};

ParsedStream parse_impl(std::span<const uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw FormatError("container: truncated header");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("container: bad magic");
  if (bytes[4] != kVersion) throw FormatError("container: unsupported version");

  ParsedStream parsed;
  StructuredBitstream& stream = parsed.stream;
  stream.width = read_u32(bytes.data() + 5);
  stream.height = read_u32(bytes.data() + 9);
  stream.mean_color = {bytes[13], bytes[14], bytes[15]};
  if (stream.width == 0 || stream.height == 0)
    throw FormatError("container: frame dimensions must be at least 1x1");

  size_t pos = kHeaderSize;
  bool seen_background = false;
  std::vector<uint32_t> seen_ids;
  LevelCode prev_level = 0;
  uint32_t prev_id = 0;
  bool have_prev = false;

  while (pos < bytes.size()) {
    if (bytes.size() - pos < kUnitHeaderSize)
      throw FormatError("container: truncated unit header");
    const uint8_t* p = bytes.data() + pos;
    RegionUnit unit;
    unit.level = p[0];
    unit.object_id = read_u16(p + 1);
    unit.bbox = Rect{read_u16(p + 3), read_u16(p + 5), read_u16(p + 7), read_u16(p + 9)};
    uint8_t quality = p[11];
    uint32_t mask_len = read_u32(p + 12);
    uint32_t payload_len = read_u32(p + 16);
    if (quality < 1 || quality > 8)
      throw FormatError("container: unit quality out of range");
    unit.quality = QualityIndex(quality);
    pos += kUnitHeaderSize;

    if (uint64_t(mask_len) + payload_len > bytes.size() - pos)
      throw FormatError("container: declared unit lengths overrun input");
    unit.mask_bytes.assign(bytes.begin() + pos, bytes.begin() + pos + mask_len);
    pos += mask_len;
    unit.payload.assign(bytes.begin() + pos, bytes.begin() + pos + payload_len);
    pos += payload_len;

    validate_unit(unit, stream.width, stream.height);
    if (have_prev) {
      if (unit.level < prev_level ||
          (unit.level == prev_level && unit.object_id <= prev_id))
        throw FormatError("container: units out of (level, object id) order");
    }
    if (unit.level == kLevelBackground) {
      if (seen_background) throw FormatError("container: multiple background units");
      seen_background = true;
    } else {
      for (uint32_t id : seen_ids)
        if (id == unit.object_id)
          throw FormatError("container: duplicate object id " +
                            std::to_string(unit.object_id));
      seen_ids.push_back(unit.object_id);
    }
    prev_level = unit.level;
    prev_id = unit.object_id;
    have_prev = true;

    stream.units.push_back(std::move(unit));
    parsed.unit_ends.push_back(pos);
  }
  return parsed;
}

}  // namespace

std::vector<uint8_t> serialize(const StructuredBitstream& stream) {
  validate_stream(stream);
  std::vector<uint8_t> out;
  out.reserve(kHeaderSize);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(kVersion);
  put_u32(out, stream.width);
  put_u32(out, stream.height);
  out.push_back(stream.mean_color[0]);
  out.push_back(stream.mean_color[1]);
  out.push_back(stream.mean_color[2]);
  for (const auto& unit : stream.units) {
    out.push_back(unit.level);
    put_u16(out, uint16_t(unit.object_id));
    put_u16(out, uint16_t(unit.bbox.x));
    put_u16(out, uint16_t(unit.bbox.y));
    put_u16(out, uint16_t(unit.bbox.w));
    put_u16(out, uint16_t(unit.bbox.h));
    out.push_back(uint8_t(unit.quality.value));
    put_u32(out, uint32_t(unit.mask_bytes.size()));
    put_u32(out, uint32_t(unit.payload.size()));
    out.insert(out.end(), unit.mask_bytes.begin(), unit.mask_bytes.end());
    out.insert(out.end(), unit.payload.begin(), unit.payload.end());
  }
  return out;
}

StructuredBitstream parse(std::span<const uint8_t> bytes) {
  return parse_impl(bytes).stream;
}

std::vector<uint8_t> truncate(std::span<const uint8_t> bytes, LevelCode max_level) {
  if (max_level < kLevelL1 || max_level > kLevelBackground)
    throw FormatError("truncate: max level must be in [1,5]");
  ParsedStream parsed = parse_impl(bytes);
  size_t end = kHeaderSize;
  for (size_t i = 0; i < parsed.stream.units.size(); ++i) {
    if (parsed.stream.units[i].level <= max_level) end = parsed.unit_ends[i];
  }
  return std::vector<uint8_t>(bytes.begin(), bytes.begin() + end);
}

Manifest inspect(std::span<const uint8_t> bytes) {
  ParsedStream parsed = parse_impl(bytes);
  Manifest manifest;
  manifest.width = parsed.stream.width;
  manifest.height = parsed.stream.height;
  manifest.mean_color = parsed.stream.mean_color;
  size_t prev_end = kHeaderSize;
  for (size_t i = 0; i < parsed.stream.units.size(); ++i) {
    const RegionUnit& unit = parsed.stream.units[i];
    UnitInfo info;
    info.level = unit.level;
    info.object_id = unit.object_id;
    info.bbox = unit.bbox;
    info.quality = unit.quality.value;
    info.mask_bytes = uint32_t(unit.mask_bytes.size());
    info.payload_bytes = uint32_t(unit.payload.size());
    info.unit_bytes = parsed.unit_ends[i] - prev_end;
    prev_end = parsed.unit_ends[i];
    manifest.units.push_back(info);
  }
  manifest.total_bytes = bytes.size();
  manifest.bpp =
      8.0 * double(bytes.size()) / (double(manifest.width) * double(manifest.height));
  return manifest;
}

}  // namespace sdcomp
