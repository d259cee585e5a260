#include "sdcomp/pipeline.hpp"

#include <algorithm>

#include "sdcomp/errors.hpp"

namespace sdcomp {

void QualityProfile::validate() const {
  if (!(l1.value <= l2.value && l2.value <= l3.value && l3.value <= other.value &&
        other.value <= background.value))
    throw FormatError("quality profile must be non-decreasing from L1 to background");
}

QualityIndex QualityProfile::for_level(LevelCode level) const {
  switch (level) {
    case kLevelL1: return l1;
    case kLevelL2: return l2;
    case kLevelL3: return l3;
    case kLevelOtherObjects: return other;
    case kLevelBackground: return background;
    default: throw FormatError("quality profile: level out of range");
  }
}

std::vector<uint8_t> encode_image(const Image& img, const SemanticPriors& priors,
                                  const Ranking& ranking, const QualityProfile& profile) {
  profile.validate();
  if (priors.image_width != img.width || priors.image_height != img.height)
    throw FormatError("encode_image: priors do not match image dimensions");

  auto groups = group_by_level(priors, ranking);

  StructuredBitstream stream;
  stream.width = img.width;
  stream.height = img.height;

  uint64_t sums[3] = {0, 0, 0};
  size_t count = size_t(img.width) * img.height;
  for (size_t i = 0; i < count; ++i)
    for (int c = 0; c < 3; ++c) sums[c] += img.pixels[i * 3 + c];
  for (int c = 0; c < 3; ++c)
    stream.mean_color[c] = clamp_round_u8(double(sums[c]) / double(count));

  const LevelCode group_levels[4] = {kLevelL1, kLevelL2, kLevelL3, kLevelOtherObjects};
  for (size_t g = 0; g < 4; ++g) {
    QualityIndex q = profile.for_level(group_levels[g]);
    for (uint32_t id : groups[g]) {
      const GroundedObject* obj = find_object(priors, id);
      Image region = crop(img, obj->bbox);
      const Bitmap* mask = obj->mask ? &*obj->mask : nullptr;
      RegionPayload payload = encode_region(region, mask, q);

      RegionUnit unit;
      unit.level = group_levels[g];
      unit.object_id = id;
      unit.bbox = obj->bbox;
      unit.quality = q;
      if (mask) unit.mask_bytes = mask_rle_encode(*mask);
      unit.payload = std::move(payload.bytes);
      stream.units.push_back(std::move(unit));
    }
  }

  RegionUnit background;
  background.level = kLevelBackground;
  background.object_id = 0;
  background.bbox = Rect{0, 0, img.width, img.height};
  background.quality = profile.background;
  background.payload = encode_region(img, nullptr, profile.background).bytes;
  stream.units.push_back(std::move(background));

  return serialize(stream);
}

std::vector<const RegionUnit*> composite_order(std::span<const RegionUnit> units) {
  std::vector<const RegionUnit*> order;
  order.reserve(units.size());
  for (const auto& unit : units) order.push_back(&unit);
  std::stable_sort(order.begin(), order.end(), [](const RegionUnit* a, const RegionUnit* b) {
    if (a->level != b->level) return a->level > b->level;
    return a->object_id < b->object_id;
  });
  return order;
}

Image decode_image(std::span<const uint8_t> bytes, LevelFilter filter) {
  if (filter.max_level < kLevelL1 || filter.max_level > kLevelBackground)
    throw FormatError("decode_image: filter level must be in [1,5]");
  StructuredBitstream stream = parse(bytes);

  Image canvas(stream.width, stream.height);
  for (size_t i = 0; i < size_t(stream.width) * stream.height; ++i)
    for (int c = 0; c < 3; ++c) canvas.pixels[i * 3 + c] = stream.mean_color[c];

  std::vector<RegionUnit> retained;
  for (const auto& unit : stream.units)
    if (unit.level <= filter.max_level) retained.push_back(unit);

  for (const RegionUnit* unit : composite_order(retained)) {
    Image region = decode_region(unit->payload, unit->bbox.w, unit->bbox.h, unit->quality);
    if (unit->mask_bytes.empty()) {
      for (uint32_t row = 0; row < unit->bbox.h; ++row) {
        const uint8_t* src = region.pixels.data() + region.pixel_offset(0, row);
        uint8_t* dst = canvas.pixels.data() +
                       canvas.pixel_offset(unit->bbox.x, unit->bbox.y + row);
        std::copy(src, src + size_t(unit->bbox.w) * 3, dst);
      }
    } else {
      Bitmap mask = mask_rle_decode(unit->mask_bytes, unit->bbox.w, unit->bbox.h);
      for (uint32_t row = 0; row < unit->bbox.h; ++row) {
        for (uint32_t col = 0; col < unit->bbox.w; ++col) {
          if (!mask.bits[size_t(row) * unit->bbox.w + col]) continue;
          size_t src = region.pixel_offset(col, row);
          size_t dst = canvas.pixel_offset(unit->bbox.x + col, unit->bbox.y + row);
          canvas.pixels[dst + 0] = region.pixels[src + 0];
          canvas.pixels[dst + 1] = region.pixels[src + 1];
          canvas.pixels[dst + 2] = region.pixels[src + 2];
        }
      }
    }
  }
  return canvas;
}

}  // namespace sdcomp
