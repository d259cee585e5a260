#include "sdcomp/priors.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sdcomp/errors.hpp"

namespace sdcomp {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

uint32_t get_u32(const json& j, const char* key, const char* where) {
  if (!j.contains(key) || !j[key].is_number_unsigned())
    throw FormatError(std::string("priors: ") + where + ": missing or invalid '" + key + "'");
  uint64_t v = j[key].get<uint64_t>();
  if (v > 0xFFFFFFFFull)
    throw FormatError(std::string("priors: ") + where + ": '" + key + "' out of range");
  return uint32_t(v);
}

Bitmap mask_from_rle(const json& runs, uint32_t w, uint32_t h, uint32_t id) {
  if (!runs.is_array())
    throw FormatError("priors: object " + std::to_string(id) + ": mask_rle must be an array");
  Bitmap mask(w, h);
  uint64_t total = uint64_t(w) * h;
  uint64_t pos = 0;
  uint8_t bit = 0;  // runs alternate starting with 0-bits
  for (const auto& run : runs) {
    if (!run.is_number_unsigned())
      throw FormatError("priors: object " + std::to_string(id) + ": mask_rle runs must be non-negative integers");
    uint64_t len = run.get<uint64_t>();
    if (pos + len > total)
      throw FormatError("priors: object " + std::to_string(id) + ": mask_rle runs exceed bbox area");
    if (bit) std::fill(mask.bits.begin() + pos, mask.bits.begin() + pos + len, uint8_t(1));
    pos += len;
    bit ^= 1;
  }
  if (pos != total)
    throw FormatError("priors: object " + std::to_string(id) + ": mask_rle runs do not sum to bbox area");
  return mask;
}

std::vector<uint64_t> rle_from_mask(const Bitmap& mask) {
  std::vector<uint64_t> runs;
  size_t n = mask.bits.size();
  size_t pos = 0;
  uint8_t bit = 0;
  while (pos < n) {
    size_t len = 0;
    while (pos + len < n && mask.bits[pos + len] == bit) ++len;
    runs.push_back(len);
    pos += len;
    bit ^= 1;
  }
  if (runs.empty()) runs.push_back(0);
  return runs;
}

std::vector<uint32_t> parse_id_list(const json& j, const char* key) {
  std::vector<uint32_t> ids;
  if (!j.contains(key)) return ids;
  if (!j[key].is_array())
    throw FormatError(std::string("priors: ranking '") + key + "' must be an array");
  for (const auto& v : j[key]) {
    if (!v.is_number_unsigned())
      throw FormatError(std::string("priors: ranking '") + key + "' must hold non-negative ids");
    uint64_t id = v.get<uint64_t>();
    if (id == 0 || id > 0xFFFFFFFFull)
      throw FormatError(std::string("priors: ranking '") + key + "' has an out-of-range id");
    ids.push_back(uint32_t(id));
  }
  return ids;
}

}  // namespace

const GroundedObject* find_object(const SemanticPriors& priors, uint32_t id) {
  for (const auto& obj : priors.objects)
    if (obj.id == id) return &obj;
  return nullptr;
}

SemanticPriors parse_priors(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("priors: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("image") || !doc["image"].is_object())
    throw FormatError("priors: missing 'image' object");

  SemanticPriors priors;
  priors.image_width = get_u32(doc["image"], "width", "image");
  priors.image_height = get_u32(doc["image"], "height", "image");
  if (priors.image_width == 0 || priors.image_height == 0)
    throw FormatError("priors: image dimensions must be at least 1x1");

  if (!doc.contains("objects") || !doc["objects"].is_array())
    throw FormatError("priors: missing 'objects' array");
  for (const auto& entry : doc["objects"]) {
    if (!entry.is_object()) throw FormatError("priors: object entries must be JSON objects");
    GroundedObject obj;
    obj.id = get_u32(entry, "id", "object");
    if (obj.id == 0) throw FormatError("priors: object ids must be positive");
    if (find_object(priors, obj.id))
      throw FormatError("priors: duplicate object id " + std::to_string(obj.id));
    if (!entry.contains("label") || !entry["label"].is_string())
      throw FormatError("priors: object " + std::to_string(obj.id) + ": missing 'label'");
    obj.label = entry["label"].get<std::string>();
    if (!entry.contains("bbox") || !entry["bbox"].is_array() || entry["bbox"].size() != 4)
      throw FormatError("priors: object " + std::to_string(obj.id) + ": bbox must be [x,y,w,h]");
    uint64_t b[4];
    for (size_t i = 0; i < 4; ++i) {
      if (!entry["bbox"][i].is_number_unsigned())
        throw FormatError("priors: object " + std::to_string(obj.id) + ": bbox must hold non-negative integers");
      b[i] = entry["bbox"][i].get<uint64_t>();
    }
    if (b[2] == 0 || b[3] == 0)
      throw FormatError("priors: object " + std::to_string(obj.id) + ": bbox must be at least 1x1");
    if (b[0] + b[2] > priors.image_width || b[1] + b[3] > priors.image_height)
      throw FormatError("priors: object " + std::to_string(obj.id) + ": bbox out of image bounds");
    obj.bbox = Rect{uint32_t(b[0]), uint32_t(b[1]), uint32_t(b[2]), uint32_t(b[3])};
    if (!entry.contains("score") || !entry["score"].is_number())
      throw FormatError("priors: object " + std::to_string(obj.id) + ": missing 'score'");
    obj.score = entry["score"].get<double>();
    if (!(obj.score >= 0.0 && obj.score <= 1.0))
      throw FormatError("priors: object " + std::to_string(obj.id) + ": score must be in [0,1]");
    if (entry.contains("mask_rle"))
      obj.mask = mask_from_rle(entry["mask_rle"], obj.bbox.w, obj.bbox.h, obj.id);
    priors.objects.push_back(std::move(obj));
  }

  if (doc.contains("captions")) {
    const auto& c = doc["captions"];
    if (!c.is_object() || !c.contains("short") || !c["short"].is_string() ||
        !c.contains("long") || !c["long"].is_string())
      throw FormatError("priors: captions must hold 'short' and 'long' strings");
    Captions captions{c["short"].get<std::string>(), c["long"].get<std::string>()};
    if (captions.short_caption.empty() || captions.long_caption.empty())
      throw FormatError("priors: captions must be non-empty");
    priors.captions = std::move(captions);
  }

  if (doc.contains("ranking")) {
    if (!doc["ranking"].is_object()) throw FormatError("priors: ranking must be an object");
    Ranking ranking;
    const std::array<std::pair<const char*, ImportanceLevel>, 3> levels = {{
        {"L1", ImportanceLevel::kL1},
        {"L2", ImportanceLevel::kL2},
        {"L3", ImportanceLevel::kL3},
    }};
    for (const auto& [key, level] : levels) {
      for (uint32_t id : parse_id_list(doc["ranking"], key)) {
        if (!find_object(priors, id))
          throw FormatError("priors: ranking references unknown object id " + std::to_string(id));
        if (ranking.level_of.count(id))
          throw FormatError("priors: object id " + std::to_string(id) + " ranked in two levels");
        ranking.level_of[id] = level;
      }
    }
    priors.ranking = std::move(ranking);
  }

  return priors;
}

std::string serialize_priors(const SemanticPriors& priors) {
  ordered_json doc;
  doc["image"] = {{"width", priors.image_width}, {"height", priors.image_height}};
  doc["objects"] = ordered_json::array();
  for (const auto& obj : priors.objects) {
    ordered_json entry;
    entry["id"] = obj.id;
    entry["label"] = obj.label;
    entry["bbox"] = {obj.bbox.x, obj.bbox.y, obj.bbox.w, obj.bbox.h};
    entry["score"] = obj.score;
    if (obj.mask) entry["mask_rle"] = rle_from_mask(*obj.mask);
    doc["objects"].push_back(std::move(entry));
  }
  if (priors.captions) {
    doc["captions"] = {{"short", priors.captions->short_caption},
                       {"long", priors.captions->long_caption}};
  }
  if (priors.ranking) {
    std::array<std::vector<uint32_t>, 3> ids;
    for (const auto& [id, level] : priors.ranking->level_of)
      ids[size_t(level) - 1].push_back(id);
    doc["ranking"] = {{"L1", ids[0]}, {"L2", ids[1]}, {"L3", ids[2]}};
  }
  return doc.dump(2) + "\n";
}

Ranking heuristic_rank(const SemanticPriors& priors) {
  if (priors.objects.empty())
    throw FormatError("heuristic ranking needs at least one object");
  const double frame_w = priors.image_width;
  const double frame_h = priors.image_height;
  const double half_diag = std::sqrt(frame_w * frame_w + frame_h * frame_h) / 2.0;

  struct Scored {
    double score;
    uint32_t id;
  };
  std::vector<Scored> scored;
  scored.reserve(priors.objects.size());
  for (const auto& obj : priors.objects) {
    double area = double(obj.bbox.w) * obj.bbox.h;
    double cx = obj.bbox.x + obj.bbox.w / 2.0;
    double cy = obj.bbox.y + obj.bbox.h / 2.0;
    double dx = cx - frame_w / 2.0;
    double dy = cy - frame_h / 2.0;
    double dist = std::sqrt(dx * dx + dy * dy);
    double s = 0.5 * std::sqrt(area / (frame_w * frame_h)) + 0.5 * (1.0 - dist / half_diag);
    scored.push_back({s, obj.id});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });

  size_t n = scored.size();
  size_t third = (n + 2) / 3;  // ceil(n/3)
  Ranking ranking;
  for (size_t i = 0; i < n; ++i) {
    ImportanceLevel level = i < third            ? ImportanceLevel::kL1
                            : i < 2 * third      ? ImportanceLevel::kL2
                                                 : ImportanceLevel::kL3;
    ranking.level_of[scored[i].id] = level;
  }
  return ranking;
}

std::array<std::vector<uint32_t>, 4> group_by_level(const SemanticPriors& priors,
                                                    const Ranking& ranking) {
  for (const auto& [id, level] : ranking.level_of) {
    (void)level;
    if (!find_object(priors, id))
      throw FormatError("ranking references unknown object id " + std::to_string(id));
  }
  std::vector<uint32_t> ids;
  ids.reserve(priors.objects.size());
  for (const auto& obj : priors.objects) ids.push_back(obj.id);
  std::sort(ids.begin(), ids.end());

  std::array<std::vector<uint32_t>, 4> groups;
  for (uint32_t id : ids) {
    auto it = ranking.level_of.find(id);
    size_t g = it == ranking.level_of.end() ? 3 : size_t(it->second) - 1;
    groups[g].push_back(id);
  }
  return groups;
}

}  // namespace sdcomp
