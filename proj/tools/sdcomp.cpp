#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdcomp/container.hpp"
#include "sdcomp/errors.hpp"
#include "sdcomp/evalkit.hpp"
#include "sdcomp/image.hpp"
#include "sdcomp/pipeline.hpp"
#include "sdcomp/priors.hpp"
#include "sdcomp/prompting.hpp"

namespace {

using namespace sdcomp;

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("cannot read " + path);
  return bytes;
}

// Write to a temp file in the same directory, then rename, so failures
// never leave partial outputs behind.
void write_file_atomic(const std::string& path, std::span<const uint8_t> bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot create " + tmp);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError("cannot write " + tmp);
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename " + tmp + " to " + path);
  }
}

void write_file_atomic(const std::string& path, const std::string& text) {
  write_file_atomic(path, std::span<const uint8_t>(
                              reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

Image load_image_file(const std::string& path) { return load_ppm(read_file(path)); }

SemanticPriors load_priors_file(const std::string& path) {
  std::vector<uint8_t> bytes = read_file(path);
  return parse_priors(std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                       bytes.size()));
}

QualityProfile parse_profile(const std::string& text) {
  std::vector<int> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("profile: expected five comma-separated quality indices");
    }
  }
  if (values.size() != 5)
    throw UsageError("profile: expected five comma-separated quality indices");
  for (int v : values)
    if (v < 1 || v > 8) throw UsageError("profile: quality indices must be in [1,8]");
  QualityProfile profile{QualityIndex(values[0]), QualityIndex(values[1]),
                         QualityIndex(values[2]), QualityIndex(values[3]),
                         QualityIndex(values[4])};
  try {
    profile.validate();
  } catch (const FormatError& e) {
    throw UsageError(e.what());
  }
  return profile;
}

std::vector<int> parse_filters(const std::string& text) {
  std::vector<int> filters;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      int v = std::stoi(item, &used);
      if (used != item.size() || v < 1 || v > 5) throw std::invalid_argument(item);
      filters.push_back(v);
    } catch (const std::exception&) {
      throw UsageError("filters: expected comma-separated levels in [1,5]");
    }
  }
  if (filters.empty()) throw UsageError("filters: expected at least one level");
  return filters;
}

Ranking ranking_from_priors(const SemanticPriors& priors, const std::string& path) {
  if (!priors.ranking)
    throw FormatError(path + ": priors carry no ranking (run `sdcomp rank` first)");
  return *priors.ranking;
}

// CSV input for bdrate: either the rd_sweep format (bpp + psnr_full
// columns) or plain two-column rate,quality rows.
RdCurve load_rd_csv(const std::string& path) {
  std::vector<uint8_t> bytes = read_file(path);
  std::string text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::stringstream ss(text);
  std::string line;
  RdCurve curve;
  bool sweep_format = false;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (first) {
      first = false;
      if (!fields.empty() && fields[0] == "filter") {
        sweep_format = true;
        continue;
      }
      char* end = nullptr;
      std::strtod(fields[0].c_str(), &end);
      if (end == fields[0].c_str()) continue;  // generic header row
    }
    size_t rate_col = sweep_format ? 2 : 0;
    size_t quality_col = sweep_format ? 3 : 1;
    if (fields.size() <= quality_col)
      throw FormatError(path + ": CSV row has too few columns");
    auto to_double = [&](const std::string& s) {
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str()) throw FormatError(path + ": CSV field is not a number");
      return v;
    };
    curve.points.push_back(RdPoint{to_double(fields[rate_col]), to_double(fields[quality_col])});
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const RdPoint& a, const RdPoint& b) { return a.rate < b.rate; });
  validate_curve(curve);
  return curve;
}

std::string manifest_text(const Manifest& manifest) {
  std::ostringstream out;
  out << "frame " << manifest.width << "x" << manifest.height << "  mean rgb("
      << int(manifest.mean_color[0]) << "," << int(manifest.mean_color[1]) << ","
      << int(manifest.mean_color[2]) << ")\n";
  for (const auto& unit : manifest.units) {
    out << "  level " << int(unit.level) << "  id " << unit.object_id << "  bbox ["
        << unit.bbox.x << "," << unit.bbox.y << "," << unit.bbox.w << "," << unit.bbox.h
        << "]  q " << unit.quality << "  mask " << unit.mask_bytes << " B  payload "
        << unit.payload_bytes << " B\n";
  }
  char tail[96];
  std::snprintf(tail, sizeof(tail), "units %zu  total %llu B  bpp %.6g\n",
                manifest.units.size(), (unsigned long long)manifest.total_bytes,
                manifest.bpp);
  out << tail;
  return out.str();
}

std::string manifest_json(const Manifest& manifest) {
  nlohmann::ordered_json doc;
  doc["width"] = manifest.width;
  doc["height"] = manifest.height;
  doc["mean_color"] = {manifest.mean_color[0], manifest.mean_color[1], manifest.mean_color[2]};
  doc["units"] = nlohmann::ordered_json::array();
  for (const auto& unit : manifest.units) {
    doc["units"].push_back({{"level", unit.level},
                            {"object_id", unit.object_id},
                            {"bbox", {unit.bbox.x, unit.bbox.y, unit.bbox.w, unit.bbox.h}},
                            {"quality", unit.quality},
                            {"mask_bytes", unit.mask_bytes},
                            {"payload_bytes", unit.payload_bytes}});
  }
  doc["total_bytes"] = manifest.total_bytes;
  doc["bpp"] = manifest.bpp;
  return doc.dump(2) + "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"sdcomp - semantically structured image codec"};
  app.require_subcommand(1);

  // rank
  auto* rank = app.add_subcommand("rank", "fill the importance ranking of a priors sidecar");
  std::string rank_image, rank_priors, rank_out, rank_replay;
  bool rank_heuristic = false, rank_lmm = false;
  rank->add_option("--image", rank_image, "input PPM image")->required();
  rank->add_option("--priors", rank_priors, "input priors sidecar JSON")->required();
  auto* opt_heuristic = rank->add_flag("--heuristic", rank_heuristic,
                                       "deterministic offline ranker (default)");
  auto* opt_lmm = rank->add_flag("--lmm", rank_lmm, "two-step LMM conversation");
  opt_heuristic->excludes(opt_lmm);
  rank->add_option("--lmm-replay", rank_replay, "replay fixture file instead of HTTP")
      ->needs(opt_lmm);
  rank->add_option("--out", rank_out, "output priors JSON with ranking")->required();
  rank->callback([&] {
    Image image = load_image_file(rank_image);
    SemanticPriors priors = load_priors_file(rank_priors);
    if (priors.image_width != image.width || priors.image_height != image.height)
      throw FormatError(rank_priors + ": priors do not match image dimensions");
    if (rank_lmm) {
      std::unique_ptr<LmmTransport> transport;
      if (!rank_replay.empty())
        transport = std::make_unique<ReplayLmmTransport>(load_replay_fixture(rank_replay));
      else
        transport = std::make_unique<HttpLmmTransport>(HttpLmmTransport::config_from_env());
      LmmRankResult result = rank_via_lmm(*transport, image, priors);
      priors.captions = std::move(result.captions);
      priors.ranking = std::move(result.ranking);
    } else {
      priors.ranking = heuristic_rank(priors);
    }
    write_file_atomic(rank_out, serialize_priors(priors));
  });

  // encode
  auto* encode = app.add_subcommand("encode", "encode an image into a structured bitstream");
  std::string enc_image, enc_priors, enc_out, enc_profile = "2,3,4,5,6";
  encode->add_option("--image", enc_image, "input PPM image")->required();
  encode->add_option("--priors", enc_priors, "ranked priors sidecar JSON")->required();
  encode->add_option("--profile", enc_profile, "five quality indices L1,L2,L3,other,background");
  encode->add_option("--out", enc_out, "output .sdc stream")->required();
  encode->callback([&] {
    Image image = load_image_file(enc_image);
    SemanticPriors priors = load_priors_file(enc_priors);
    Ranking ranking = ranking_from_priors(priors, enc_priors);
    QualityProfile profile = parse_profile(enc_profile);
    std::vector<uint8_t> stream = encode_image(image, priors, ranking, profile);
    write_file_atomic(enc_out, stream);
  });

  // decode
  auto* decode = app.add_subcommand("decode", "reconstruct an image from a stream");
  std::string dec_in, dec_out;
  int dec_level = 5;
  decode->add_option("--in", dec_in, "input .sdc stream")->required();
  decode->add_option("--max-level", dec_level, "decode units up to this level")
      ->check(CLI::Range(1, 5));
  decode->add_option("--out", dec_out, "output PPM image")->required();
  decode->callback([&] {
    std::vector<uint8_t> bytes = read_file(dec_in);
    Image image = decode_image(bytes, LevelFilter{LevelCode(dec_level)});
    write_file_atomic(dec_out, save_ppm(image));
  });

  // truncate
  auto* trunc = app.add_subcommand("truncate", "keep the byte prefix up to a level");
  std::string trunc_in, trunc_out;
  int trunc_level = 5;
  trunc->add_option("--in", trunc_in, "input .sdc stream")->required();
  trunc->add_option("--max-level", trunc_level, "keep units up to this level")
      ->required()
      ->check(CLI::Range(1, 5));
  trunc->add_option("--out", trunc_out, "output .sdc stream")->required();
  trunc->callback([&] {
    std::vector<uint8_t> bytes = read_file(trunc_in);
    write_file_atomic(trunc_out, truncate(bytes, LevelCode(trunc_level)));
  });

  // inspect
  auto* ins = app.add_subcommand("inspect", "print the per-unit manifest of a stream");
  std::string ins_in;
  bool ins_json = false;
  ins->add_option("--in", ins_in, "input .sdc stream")->required();
  ins->add_flag("--json", ins_json, "machine-readable output");
  ins->callback([&] {
    Manifest manifest = inspect(read_file(ins_in));
    std::cout << (ins_json ? manifest_json(manifest) : manifest_text(manifest));
  });

  // eval
  auto* eval = app.add_subcommand("eval", "rate-distortion sweep, CSV output");
  std::string eval_image, eval_priors, eval_out;
  std::string eval_filters = "1,2,3,4,5", eval_profiles = "2,3,4,5,6";
  eval->add_option("--image", eval_image, "input PPM image")->required();
  eval->add_option("--priors", eval_priors, "ranked priors sidecar JSON")->required();
  eval->add_option("--filters", eval_filters, "comma-separated levels");
  eval->add_option("--profiles", eval_profiles, "semicolon-separated quality profiles");
  eval->add_option("--out", eval_out, "output CSV")->required();
  eval->callback([&] {
    Image image = load_image_file(eval_image);
    SemanticPriors priors = load_priors_file(eval_priors);
    Ranking ranking = ranking_from_priors(priors, eval_priors);
    std::vector<QualityProfile> profiles;
    std::stringstream ss(eval_profiles);
    std::string item;
    while (std::getline(ss, item, ';'))
      if (!item.empty()) profiles.push_back(parse_profile(item));
    if (profiles.empty()) throw UsageError("profiles: expected at least one profile");
    auto rows = rd_sweep(image, priors, ranking, parse_filters(eval_filters), profiles);
    write_file_atomic(eval_out, rd_sweep_csv(rows));
  });

  // bdrate
  auto* bdr = app.add_subcommand("bdrate", "Bjontegaard delta rate between two RD CSVs");
  std::string bd_anchor, bd_test;
  bdr->add_option("--anchor", bd_anchor, "anchor RD curve CSV")->required();
  bdr->add_option("--test", bd_test, "test RD curve CSV")->required();
  bdr->callback([&] {
    double percent = bd_rate(load_rd_csv(bd_anchor), load_rd_csv(bd_test));
    std::printf("%.6g\n", percent);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "sdcomp: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "sdcomp: " << e.what() << "\n";
    return 1;
  } catch (const IoError& e) {
    std::cerr << "sdcomp: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "sdcomp: " << e.what() << "\n";
    return 3;
  } catch (const TransportError& e) {
    std::cerr << "sdcomp: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "sdcomp: " << e.what() << "\n";
    return 1;
  }
}
