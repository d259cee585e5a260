// Regenerates the shipped sample scene, its priors sidecar and the LMM
// replay fixtures under a target directory (default: data/). Golden
// outputs are produced from these via the CLI; see README.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "sdcomp/image.hpp"
#include "sdcomp/priors.hpp"

using namespace sdcomp;

namespace {

uint32_t lcg(uint64_t& state) {
  state = state * 6364136223846793005ull + 1442695040888963407ull;
  return uint32_t(state >> 33);
}

uint8_t clip(int v) { return uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v)); }

bool in_sun(int x, int y) {
  int dx = x - 70, dy = y - 18;
  return dx * dx + dy * dy <= 81;
}

bool in_foliage(int x, int y) {
  int dx = x - 53, dy = y - 48;
  return dx * dx + dy * dy <= 100;
}

bool in_trunk(int x, int y) { return x >= 51 && x <= 55 && y >= 58 && y <= 71; }

Image make_sample_image() {
  const uint32_t w = 96, h = 72;
  Image img(w, h);
  uint64_t rng = 0x5dc0812345ull;
  for (uint32_t y = 0; y < h; ++y) {
    for (uint32_t x = 0; x < w; ++x) {
      int r, g, b;
      if (y >= 64) {  // ground
        r = 70 + int(x % 5) * 3;
        g = 120 + int(y - 64) * 4;
        b = 50;
      } else {  // sky gradient
        r = 60 + int(y) * 2;
        g = 110 + int(y);
        b = 200 - int(y) / 2;
      }
      if (x >= 8 && x <= 34 && y >= 32 && y <= 71) {  // building
        bool window = (x % 6) < 2 && (y % 8) < 3 && y < 66;
        r = window ? 220 : 92;
        g = window ? 190 : 90;
        b = window ? 90 : 104;
      }
      if (in_trunk(int(x), int(y))) {
        r = 110; g = 70; b = 40;
      }
      if (in_foliage(int(x), int(y))) {
        r = 40 + int(x % 7) * 4;
        g = 130 + int(y % 5) * 6;
        b = 45;
      }
      if (in_sun(int(x), int(y))) {
        int dx = int(x) - 70, dy = int(y) - 18;
        int d2 = dx * dx + dy * dy;
        r = 252 - d2; g = 228 - d2; b = 120 + d2 / 2;
      }
      int noise = int(lcg(rng) % 9) - 4;
      size_t off = img.pixel_offset(x, y);
      img.pixels[off + 0] = clip(r + noise);
      img.pixels[off + 1] = clip(g + noise);
      img.pixels[off + 2] = clip(b + noise);
    }
  }
  return img;
}

SemanticPriors make_sample_priors() {
  SemanticPriors priors;
  priors.image_width = 96;
  priors.image_height = 72;

  GroundedObject sun;
  sun.id = 1;
  sun.label = "sun";
  sun.bbox = Rect{58, 6, 24, 24};
  sun.score = 0.93;
  Bitmap sun_mask(24, 24);
  for (uint32_t y = 0; y < 24; ++y)
    for (uint32_t x = 0; x < 24; ++x)
      sun_mask.bits[y * 24 + x] = in_sun(int(58 + x), int(6 + y)) ? 1 : 0;
  sun.mask = std::move(sun_mask);
  priors.objects.push_back(std::move(sun));

  GroundedObject building;
  building.id = 2;
  building.label = "building";
  building.bbox = Rect{8, 32, 27, 40};
  building.score = 0.88;
  priors.objects.push_back(std::move(building));

  GroundedObject tree;
  tree.id = 3;
  tree.label = "tree";
  tree.bbox = Rect{42, 38, 22, 34};
  tree.score = 0.81;
  Bitmap tree_mask(22, 34);
  for (uint32_t y = 0; y < 34; ++y)
    for (uint32_t x = 0; x < 22; ++x) {
      int ax = int(42 + x), ay = int(38 + y);
      tree_mask.bits[y * 22 + x] = (in_foliage(ax, ay) || in_trunk(ax, ay)) ? 1 : 0;
    }
  tree.mask = std::move(tree_mask);
  priors.objects.push_back(std::move(tree));

  return priors;
}

void write_bytes(const std::filesystem::path& path, const std::vector<uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) {
    std::cerr << "cannot write " << path << "\n";
    std::exit(1);
  }
  std::cout << "wrote " << path.string() << " (" << bytes.size() << " bytes)\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, std::vector<uint8_t>(text.begin(), text.end()));
}

}  // namespace

int main(int argc, char** argv) {
  std::filesystem::path dir = argc > 1 ? argv[1] : "data";
  std::filesystem::create_directories(dir);

  write_bytes(dir / "sample.ppm", save_ppm(make_sample_image()));
  write_text(dir / "sample_priors.json", serialize_priors(make_sample_priors()));

  write_text(dir / "lmm_fixture.json", std::string(R"({
  "responses": [
    "SHORT: A sun over a small street scene.\nLONG: A bright sun hangs in a gradient sky above a grey building with lit windows and a round tree standing on green ground.",
    "Here is the ranking you asked for.\nL1: [1]\nL2: [3]\nL3: [2]"
  ]
}
)"));

  write_text(dir / "lmm_fixture_bad_caption.json", std::string(R"({
  "responses": [
    "I cannot provide captions in that format, sorry.",
    "L1: [1]\nL2: [3]\nL3: [2]"
  ]
}
)"));

  write_text(dir / "lmm_fixture_short.json", std::string(R"({
  "responses": [
    "SHORT: A sun over a small street scene.\nLONG: A bright sun hangs in a gradient sky above a grey building with lit windows and a round tree standing on green ground."
  ]
}
)"));

  return 0;
}
