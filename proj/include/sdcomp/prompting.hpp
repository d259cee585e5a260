#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "sdcomp/image.hpp"
#include "sdcomp/priors.hpp"

namespace sdcomp {

enum class PromptRole : uint8_t { kSystem, kUser };

struct PromptText {
  PromptRole role = PromptRole::kUser;
  std::string text;
  bool attach_image = false;
};

struct LmmRequest {
  std::optional<std::vector<uint8_t>> image_ppm;  // binary PPM bytes
  std::vector<PromptText> prompts;
};

// One request -> one complete text response, or a TransportError.
class LmmTransport {
 public:
  virtual ~LmmTransport() = default;
  virtual std::string complete(const LmmRequest& request) = 0;
};

// Q1: ask for a short and a long caption, answered on `SHORT:` / `LONG:`
// lines. Q2: captions + grounding lines, answered as `L1: [ids]`,
// `L2: [ids]`, `L3: [ids]`.
PromptText build_caption_prompt();
PromptText build_ranking_prompt(const Captions& captions,
                                std::span<const GroundedObject> objects);

Captions parse_caption_response(const std::string& text);

// Tolerates surrounding prose; ids not mentioned fall to "other".
Ranking parse_ranking_response(const std::string& text, const std::set<uint32_t>& known_ids);

struct LmmRankResult {
  Captions captions;
  Ranking ranking;
};

// Two-step conversation: Q1 with the image, then Q2 with the image,
// captions and grounding lines. Exactly two transport calls.
LmmRankResult rank_via_lmm(LmmTransport& transport, const Image& image,
                           const SemanticPriors& priors);

// Chat-completions HTTP transport: POST {model, messages:[{role,
// content:[text | base64 image]}]} to the configured endpoint, expecting
// {choices:[{message:{content}}]}.
class HttpLmmTransport : public LmmTransport {
 public:
  struct Config {
    std::string url;
    std::string token;  // optional bearer token
    std::string model = "default";
  };

  // Reads SDCOMP_LMM_URL, SDCOMP_LMM_TOKEN, SDCOMP_LMM_MODEL.
  static Config config_from_env();

  explicit HttpLmmTransport(Config config);
  std::string complete(const LmmRequest& request) override;

 private:
  Config config_;
};

// Deterministic transport replaying canned responses in order; errors
// once the fixture is exhausted.
class ReplayLmmTransport : public LmmTransport {
 public:
  explicit ReplayLmmTransport(std::vector<std::string> responses);
  std::string complete(const LmmRequest& request) override;

  size_t calls() const { return next_; }

 private:
  std::vector<std::string> responses_;
  size_t next_ = 0;
};

// Fixture file: {"responses": ["...", "..."]}.
ReplayLmmTransport load_replay_fixture(const std::string& path);

}  // namespace sdcomp
