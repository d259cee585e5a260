#include "sdcomp/prompting.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "sdcomp/errors.hpp"

namespace sdcomp {

namespace {

using nlohmann::json;

std::string base64_encode(std::span<const uint8_t> data) {
  static const char alphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((data.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 3 <= data.size(); i += 3) {
    uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8 | data[i + 2];
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
  }
  if (i + 1 == data.size()) {
    uint32_t v = uint32_t(data[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == data.size()) {
    uint32_t v = uint32_t(data[i]) << 16 | uint32_t(data[i + 1]) << 8;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

std::string trim(const std::string& s) {
  size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// Text after `marker` up to end of line, trimmed.
std::optional<std::string> find_marked_line(const std::string& text, const std::string& marker) {
  size_t pos = text.find(marker);
  if (pos == std::string::npos) return std::nullopt;
  size_t start = pos + marker.size();
  size_t end = text.find('\n', start);
  if (end == std::string::npos) end = text.size();
  return trim(text.substr(start, end - start));
}

// Parses "[1, 2, 3]" directly after `pos` (whitespace allowed).
std::vector<uint32_t> parse_bracketed_ids(const std::string& text, size_t pos,
                                          const char* level_name) {
  auto fail = [&]() -> FormatError {
    return FormatError(std::string("ranking response: malformed ") + level_name + " id list");
  };
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  if (pos >= text.size() || text[pos] != '[') throw fail();
  ++pos;
  std::vector<uint32_t> ids;
  for (;;) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == ','))
      ++pos;
    if (pos >= text.size()) throw fail();
    if (text[pos] == ']') return ids;
    if (!std::isdigit(uint8_t(text[pos]))) throw fail();
    uint64_t value = 0;
    while (pos < text.size() && std::isdigit(uint8_t(text[pos]))) {
      value = value * 10 + (text[pos] - '0');
      if (value > 0xFFFFFFFFull) throw fail();
      ++pos;
    }
    ids.push_back(uint32_t(value));
  }
}

}  // namespace

PromptText build_caption_prompt() {
  PromptText prompt;
  prompt.role = PromptRole::kUser;
  prompt.attach_image = true;
  prompt.text =
      "Describe this image twice. Reply with exactly two lines and nothing else:\n"
      "SHORT: <one concise sentence describing the image>\n"
      "LONG: <one detailed paragraph describing the image, covering every visible "
      "object and the overall scene>";
  return prompt;
}

PromptText build_ranking_prompt(const Captions& captions,
                                std::span<const GroundedObject> objects) {
  if (objects.empty())
    throw FormatError("ranking prompt: needs at least one grounded object");

  std::vector<const GroundedObject*> sorted;
  sorted.reserve(objects.size());
  for (const auto& obj : objects) sorted.push_back(&obj);
  std::sort(sorted.begin(), sorted.end(),
            [](const GroundedObject* a, const GroundedObject* b) { return a->id < b->id; });

  std::ostringstream text;
  text << "You rank the objects of an image by their importance for downstream machine "
          "vision tasks (classification, detection, segmentation).\n"
       << "Short caption: " << captions.short_caption << "\n"
       << "Detailed caption: " << captions.long_caption << "\n"
       << "Grounded objects, one per line:\n";
  for (const GroundedObject* obj : sorted) {
    text << "id=" << obj->id << " label=" << obj->label << " bbox=[" << obj->bbox.x << ','
         << obj->bbox.y << ',' << obj->bbox.w << ',' << obj->bbox.h << "]\n";
  }
  text << "Rank the importance of the objects into three levels: L1 (most important), "
          "L2, then L3. Use each id at most once; ids you omit are treated as "
          "unimportant.\n"
          "Reply with exactly three lines and nothing else:\n"
          "L1: [comma-separated ids]\n"
          "L2: [comma-separated ids]\n"
          "L3: [comma-separated ids]";

  PromptText prompt;
  prompt.role = PromptRole::kUser;
  prompt.attach_image = true;
  prompt.text = text.str();
  return prompt;
}

Captions parse_caption_response(const std::string& text) {
  auto short_caption = find_marked_line(text, "SHORT:");
  auto long_caption = find_marked_line(text, "LONG:");
  if (!short_caption || short_caption->empty())
    throw FormatError("caption response: missing SHORT caption");
  if (!long_caption || long_caption->empty())
    throw FormatError("caption response: missing LONG caption");
  return Captions{*short_caption, *long_caption};
}

Ranking parse_ranking_response(const std::string& text, const std::set<uint32_t>& known_ids) {
  const std::array<std::pair<const char*, ImportanceLevel>, 3> levels = {{
      {"L1:", ImportanceLevel::kL1},
      {"L2:", ImportanceLevel::kL2},
      {"L3:", ImportanceLevel::kL3},
  }};
  Ranking ranking;
  for (const auto& [marker, level] : levels) {
    size_t pos = text.find(marker);
    if (pos == std::string::npos)
      throw FormatError(std::string("ranking response: missing ") +
                        std::string(marker, 2) + " line");
    for (uint32_t id : parse_bracketed_ids(text, pos + 3, marker)) {
      if (!known_ids.count(id))
        throw FormatError("ranking response: unknown object id " + std::to_string(id));
      auto [it, inserted] = ranking.level_of.emplace(id, level);
      if (!inserted && it->second != level)
        throw FormatError("ranking response: object id " + std::to_string(id) +
                          " appears in two levels");
    }
  }
  return ranking;
}

LmmRankResult rank_via_lmm(LmmTransport& transport, const Image& image,
                           const SemanticPriors& priors) {
  if (priors.objects.empty())
    throw FormatError("lmm ranking: priors hold no objects");

  std::vector<uint8_t> ppm = save_ppm(image);

  LmmRequest caption_request;
  caption_request.image_ppm = ppm;
  caption_request.prompts = {build_caption_prompt()};
  Captions captions = parse_caption_response(transport.complete(caption_request));

  LmmRequest ranking_request;
  ranking_request.image_ppm = std::move(ppm);
  ranking_request.prompts = {build_ranking_prompt(captions, priors.objects)};
  std::string response = transport.complete(ranking_request);

  std::set<uint32_t> known_ids;
  for (const auto& obj : priors.objects) known_ids.insert(obj.id);
  return LmmRankResult{std::move(captions), parse_ranking_response(response, known_ids)};
}

HttpLmmTransport::Config HttpLmmTransport::config_from_env() {
  Config config;
  if (const char* url = std::getenv("SDCOMP_LMM_URL")) config.url = url;
  if (const char* token = std::getenv("SDCOMP_LMM_TOKEN")) config.token = token;
  if (const char* model = std::getenv("SDCOMP_LMM_MODEL")) config.model = model;
  return config;
}

HttpLmmTransport::HttpLmmTransport(Config config) : config_(std::move(config)) {
  if (config_.url.empty())
    throw UsageError("lmm transport: endpoint URL not configured (SDCOMP_LMM_URL)");
}

std::string HttpLmmTransport::complete(const LmmRequest& request) {
  json messages = json::array();
  for (const auto& prompt : request.prompts) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", prompt.text}});
    if (prompt.attach_image) {
      if (!request.image_ppm)
        throw TransportError("lmm transport: prompt attaches an image but none was given");
      content.push_back(
          {{"type", "image_url"},
           {"image_url",
            {{"url", "data:image/x-portable-pixmap;base64," +
                         base64_encode(*request.image_ppm)}}}});
    }
    messages.push_back(
        {{"role", prompt.role == PromptRole::kSystem ? "system" : "user"},
         {"content", std::move(content)}});
  }
  json body = {{"model", config_.model}, {"messages", std::move(messages)}};

  // Split scheme://host[:port] from the request path.
  size_t scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos)
    throw TransportError("lmm transport: endpoint URL must include a scheme");
  size_t path_start = config_.url.find('/', scheme_end + 3);
  std::string base = path_start == std::string::npos ? config_.url
                                                     : config_.url.substr(0, path_start);
  std::string path =
      path_start == std::string::npos ? "/v1/chat/completions" : config_.url.substr(path_start);

  httplib::Client client(base);
  client.set_connection_timeout(30, 0);
  client.set_read_timeout(300, 0);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);

  auto result = client.Post(path, headers, body.dump(), "application/json");
  if (!result)
    throw TransportError("lmm transport: request failed: " + httplib::to_string(result.error()));
  if (result->status < 200 || result->status >= 300)
    throw TransportError("lmm transport: endpoint returned status " +
                         std::to_string(result->status));

  json response;
  try {
    response = json::parse(result->body);
  } catch (const json::exception& e) {
    throw TransportError(std::string("lmm transport: response is not JSON: ") + e.what());
  }
  if (!response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty())
    throw TransportError("lmm transport: response carries no choices");
  const json& choice = response["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content"))
    throw TransportError("lmm transport: response carries no message content");
  const json& content = choice["message"]["content"];
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    for (const auto& part : content)
      if (part.is_object() && part.contains("text") && part["text"].is_string())
        text += part["text"].get<std::string>();
    return text;
  }
  throw TransportError("lmm transport: unsupported content shape");
}

ReplayLmmTransport::ReplayLmmTransport(std::vector<std::string> responses)
    : responses_(std::move(responses)) {}

std::string ReplayLmmTransport::complete(const LmmRequest&) {
  if (next_ >= responses_.size())
    throw TransportError("replay transport: fixture exhausted after " +
                         std::to_string(responses_.size()) + " responses");
  return responses_[next_++];
}

ReplayLmmTransport load_replay_fixture(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("replay fixture: cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();

  json doc;
  try {
    doc = json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw FormatError(std::string("replay fixture: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("responses") || !doc["responses"].is_array())
    throw FormatError("replay fixture: expected {\"responses\": [...]}");
  std::vector<std::string> responses;
  for (const auto& r : doc["responses"]) {
    if (!r.is_string()) throw FormatError("replay fixture: responses must be strings");
    responses.push_back(r.get<std::string>());
  }
  return ReplayLmmTransport(std::move(responses));
}

}  // namespace sdcomp
