#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sdcomp/errors.hpp"
#include "sdcomp/prompting.hpp"
#include "synth.hpp"

using namespace sdcomp;

namespace {

struct ScriptedTransport : LmmTransport {
  std::vector<std::string> responses;
  std::vector<LmmRequest> seen;
  bool fail_second = false;

  explicit ScriptedTransport(std::vector<std::string> r) : responses(std::move(r)) {}

  std::string complete(const LmmRequest& request) override {
    seen.push_back(request);
    if (fail_second && seen.size() == 2) throw TransportError("scripted failure");
    if (seen.size() > responses.size()) throw TransportError("script exhausted");
    return responses[seen.size() - 1];
  }
};

SemanticPriors simple_priors() {
  SemanticPriors priors;
  priors.image_width = 32;
  priors.image_height = 32;
  priors.objects.push_back({1, "dog", Rect{5, 5, 10, 10}, 0.9, std::nullopt});
  priors.objects.push_back({3, "ball", Rect{20, 20, 8, 8}, 0.8, std::nullopt});
  return priors;
}

}  // namespace

TEST_CASE("caption prompt is fixed and carries the answer markers") {
  PromptText q1 = build_caption_prompt();
  CHECK(q1.attach_image);
  CHECK(q1.role == PromptRole::kUser);
  CHECK(q1.text.find("SHORT:") != std::string::npos);
  CHECK(q1.text.find("LONG:") != std::string::npos);
  CHECK(build_caption_prompt().text == q1.text);
}

TEST_CASE("ranking prompt embeds captions and grounding lines in id order") {
  Captions captions{"a dog", "a dog on grass"};
  SemanticPriors priors = simple_priors();
  std::swap(priors.objects[0], priors.objects[1]);  // given order 3, 1
  PromptText q2 = build_ranking_prompt(captions, priors.objects);
  CHECK(q2.attach_image);
  CHECK(q2.text.find("a dog on grass") != std::string::npos);
  size_t line1 = q2.text.find("id=1 label=dog bbox=[5,5,10,10]");
  size_t line3 = q2.text.find("id=3 label=ball bbox=[20,20,8,8]");
  REQUIRE(line1 != std::string::npos);
  REQUIRE(line3 != std::string::npos);
  CHECK(line1 < line3);

  CHECK_THROWS_AS(build_ranking_prompt(captions, std::span<const GroundedObject>{}),
                  FormatError);
}

TEST_CASE("parse_ranking_response handles the answer grammar") {
  std::set<uint32_t> known = {1, 2, 3};
  SUBCASE("plain three-line answer") {
    Ranking r = parse_ranking_response("L1: [2]\nL2: [1,3]\nL3: []", known);
    CHECK(r.level_of.at(2) == ImportanceLevel::kL1);
    CHECK(r.level_of.at(1) == ImportanceLevel::kL2);
    CHECK(r.level_of.at(3) == ImportanceLevel::kL2);
    CHECK(r.level_of.size() == 3);
  }
  SUBCASE("ids land exactly where their bracket says") {
    Ranking r = parse_ranking_response("L1: [2]\nL2: [1]\nL3: [3]", known);
    CHECK(r.level_of.at(2) == ImportanceLevel::kL1);
    CHECK(r.level_of.at(1) == ImportanceLevel::kL2);
    CHECK(r.level_of.at(3) == ImportanceLevel::kL3);
  }
  SUBCASE("surrounding prose is tolerated; unmentioned ids fall to other") {
    Ranking r = parse_ranking_response("Sure! L1: [1] L2: [] L3: []", {1, 2});
    CHECK(r.level_of.size() == 1);
    CHECK(r.level_of.at(1) == ImportanceLevel::kL1);
  }
  SUBCASE("unknown id is rejected") {
    CHECK_THROWS_AS(parse_ranking_response("L1: [9]\nL2: []\nL3: []", {1, 2}), FormatError);
  }
  SUBCASE("missing level line is rejected") {
    CHECK_THROWS_AS(parse_ranking_response("L1: [1]\nL3: []", known), FormatError);
  }
  SUBCASE("id in two levels is rejected") {
    CHECK_THROWS_AS(parse_ranking_response("L1: [1]\nL2: [1]\nL3: []", known), FormatError);
  }
  SUBCASE("random junk never crashes") {
    synth::Rng rng(21);
    for (int iter = 0; iter < 20000; ++iter) {
      std::string junk;
      uint32_t len = rng.below(48);
      for (uint32_t i = 0; i < len; ++i) junk.push_back(char(rng.below(256)));
      try {
        (void)parse_ranking_response(junk, known);
      } catch (const FormatError&) {
      }
    }
  }
}

TEST_CASE("rank_via_lmm drives the two-step conversation") {
  Image image = synth::smooth_image(32, 32, 4);
  SemanticPriors priors = simple_priors();

  SUBCASE("replayed responses produce the scripted ranking") {
    ScriptedTransport transport({
        "SHORT: a dog\nLONG: a dog and a ball on grass",
        "L1: [3]\nL2: [1]\nL3: []",
    });
    LmmRankResult result = rank_via_lmm(transport, image, priors);
    CHECK(result.captions.short_caption == "a dog");
    CHECK(result.captions.long_caption == "a dog and a ball on grass");
    CHECK(result.ranking.level_of.at(3) == ImportanceLevel::kL1);
    CHECK(result.ranking.level_of.at(1) == ImportanceLevel::kL2);

    // exactly two calls, Q1 then Q2, both with the image attached
    REQUIRE(transport.seen.size() == 2);
    CHECK(transport.seen[0].prompts.at(0).text == build_caption_prompt().text);
    CHECK(transport.seen[1].prompts.at(0).text.find("id=1 label=dog") != std::string::npos);
    CHECK(transport.seen[0].image_ppm.has_value());
    CHECK(transport.seen[1].image_ppm.has_value());
  }
  SUBCASE("caption parse failure is a format error") {
    ScriptedTransport transport({"no captions here", "L1: [1]\nL2: []\nL3: []"});
    CHECK_THROWS_AS(rank_via_lmm(transport, image, priors), FormatError);
    CHECK(transport.seen.size() == 1);
  }
  SUBCASE("transport failure on Q2 surfaces as a transport error") {
    ScriptedTransport transport({"SHORT: a\nLONG: b", "unused"});
    transport.fail_second = true;
    CHECK_THROWS_AS(rank_via_lmm(transport, image, priors), TransportError);
  }
}

TEST_CASE("replay transport reads fixtures and errors when exhausted") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "sdcomp_prompting_test";
  fs::create_directories(dir);
  fs::path fixture = dir / "fixture.json";
  {
    std::ofstream out(fixture);
    out << R"({"responses": ["first", "second"]})";
  }
  ReplayLmmTransport transport = load_replay_fixture(fixture.string());
  LmmRequest request;
  CHECK(transport.complete(request) == "first");
  CHECK(transport.complete(request) == "second");
  CHECK_THROWS_AS(transport.complete(request), TransportError);

  CHECK_THROWS_AS(load_replay_fixture((dir / "missing.json").string()), IoError);
  {
    std::ofstream out(fixture);
    out << "not json";
  }
  CHECK_THROWS_AS(load_replay_fixture(fixture.string()), FormatError);
  fs::remove_all(dir);
}
