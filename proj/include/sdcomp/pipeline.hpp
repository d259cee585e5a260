#pragma once

#include <span>
#include <vector>

#include "sdcomp/container.hpp"
#include "sdcomp/priors.hpp"

namespace sdcomp {

// Per-level quantizer assignment. Lower index = finer quantization, so
// the invariant l1 <= l2 <= l3 <= other <= background spends the most
// bits on the most important content.
struct QualityProfile {
  QualityIndex l1{2};
  QualityIndex l2{3};
  QualityIndex l3{4};
  QualityIndex other{5};
  QualityIndex background{6};

  void validate() const;
  QualityIndex for_level(LevelCode level) const;

  bool operator==(const QualityProfile&) const = default;
};

struct LevelFilter {
  LevelCode max_level = kLevelBackground;
};

// Full encode: group objects by importance, code each object region at
// its level's quality (mask-aware), code the full frame as the
// background unit, and serialize the importance-ordered container.
std::vector<uint8_t> encode_image(const Image& img, const SemanticPriors& priors,
                                  const Ranking& ranking, const QualityProfile& profile);

// Composite reconstruction of the units with level <= filter.max_level
// onto a mean-color canvas; less important units are drawn first so
// important content wins overlaps.
Image decode_image(std::span<const uint8_t> bytes, LevelFilter filter);

// Draw order: stable sort by (level descending, object_id ascending).
std::vector<const RegionUnit*> composite_order(std::span<const RegionUnit> units);

}  // namespace sdcomp
