#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdcomp/image.hpp"

namespace sdcomp {

enum class ImportanceLevel : uint8_t { kL1 = 1, kL2 = 2, kL3 = 3 };

struct GroundedObject {
  uint32_t id = 0;  // unique per image, >= 1
  std::string label;
  Rect bbox;
  double score = 0.0;            // grounding confidence in [0,1]
  std::optional<Bitmap> mask;    // bbox-resolution; 1 = inside the object
};

struct Captions {
  std::string short_caption;  // S1
  std::string long_caption;   // S2
};

// Object id -> importance level; ids absent from the map belong to "other".
struct Ranking {
  std::map<uint32_t, ImportanceLevel> level_of;

  bool operator==(const Ranking&) const = default;
};

struct SemanticPriors {
  uint32_t image_width = 0;
  uint32_t image_height = 0;
  std::vector<GroundedObject> objects;
  std::optional<Captions> captions;
  std::optional<Ranking> ranking;
};

// Sidecar JSON document: {image:{width,height}, objects:[{id,label,
// bbox:[x,y,w,h], score, mask_rle?}], captions?:{short,long},
// ranking?:{L1:[ids],L2:[ids],L3:[ids]}}. mask_rle is a list of
// alternating run lengths starting with a run of 0-bits, row-major over
// the bbox, summing to w*h.
SemanticPriors parse_priors(std::string_view text);
std::string serialize_priors(const SemanticPriors& priors);

// Deterministic fallback ranker: score = 0.5*sqrt(area/frame_area) +
// 0.5*(1 - center_distance/half_diagonal), ties broken by ascending id;
// the top ceil(n/3) objects go to L1, the next ceil(n/3) to L2, rest L3.
Ranking heuristic_rank(const SemanticPriors& priors);

// Groups [0]=L1, [1]=L2, [2]=L3, [3]=other; member ids ascending.
std::array<std::vector<uint32_t>, 4> group_by_level(const SemanticPriors& priors,
                                                    const Ranking& ranking);

const GroundedObject* find_object(const SemanticPriors& priors, uint32_t id);

}  // namespace sdcomp
