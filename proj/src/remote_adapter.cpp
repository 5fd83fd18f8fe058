#include "wayfinder/remote_adapter.hpp"

#include "wayfinder/mock_perception.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <zlib.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

namespace wf::perception {

namespace {

std::string env(const char* a, const char* b) {
  if (const char* v = std::getenv(a); v && *v) return v;
  if (const char* v = std::getenv(b); v && *v) return v;
  return {};
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void put_chunk(std::string& out, const char* type, const std::string& data) {
  put_u32(out, static_cast<std::uint32_t>(data.size()));
  std::string body(type, 4);
  body += data;
  out += body;
  put_u32(out, static_cast<std::uint32_t>(crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size()))));
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

RemoteSettings RemoteSettings::from_env(RemoteSettings s) {
  if (auto v = env("WAYFINDER_API_BASE", "OPENAI_BASE_URL"); !v.empty()) s.base_url = v;
  if (auto v = env("WAYFINDER_API_KEY", "OPENAI_API_KEY"); !v.empty()) s.api_key = v;
  return s;
}

void RemoteSettings::validate() const {
  static const std::regex url(R"(^https?://[^/\s]+(/.*)?$)");
  if (!std::regex_match(base_url, url)) throw ConfigError("remote base URL must be http(s)://host[/prefix]");
  if (timeout_s <= 0.0) throw ConfigError("remote timeout must be positive");
  if (max_attempts < 1) throw ConfigError("remote attempt count must be at least 1");
  if (backoff_ms < 0) throw ConfigError("remote backoff must be non-negative");
}

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t n = (static_cast<unsigned char>(bytes[i]) << 16) |
                            (static_cast<unsigned char>(bytes[i + 1]) << 8) | static_cast<unsigned char>(bytes[i + 2]);
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += kAlphabet[(n >> 6) & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    std::uint32_t n = static_cast<unsigned char>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) n |= static_cast<unsigned char>(bytes[i + 1]) << 8;
    out += kAlphabet[(n >> 18) & 63];
    out += kAlphabet[(n >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(n >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || std::isspace(static_cast<unsigned char>(c))) continue;
    const int v = value(c);
    if (v < 0) throw ParseError("invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xff));
    }
  }
  return out;
}

std::string image_to_png(const Image& image) {
  if (!image.has_labels()) {
    if (image.encoded.empty()) throw ContractViolation("image has neither labels nor encoded bytes");
    return image.encoded;
  }
  std::string raw;
  raw.reserve(static_cast<std::size_t>(image.height) * (image.width * 3 + 1));
  for (int v = 0; v < image.height; ++v) {
    raw.push_back(0);
    for (int u = 0; u < image.width; ++u) {
      const std::uint32_t label = image.label_at(u, v);
      if (label == 0) {
        raw.append(3, static_cast<char>(200));
        continue;
      }
      const std::uint64_t c = hash_words({label});
      raw.push_back(static_cast<char>(c & 0xff));
      raw.push_back(static_cast<char>((c >> 8) & 0xff));
      raw.push_back(static_cast<char>((c >> 16) & 0xff));
    }
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  std::string packed(len, '\0');
  if (compress2(reinterpret_cast<Bytef*>(packed.data()), &len, reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), Z_BEST_SPEED) != Z_OK)
    throw Error("PNG compression failed");
  packed.resize(len);

  std::string png("\x89PNG\r\n\x1a\n", 8);
  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(image.width));
  put_u32(ihdr, static_cast<std::uint32_t>(image.height));
  ihdr += std::string("\x08\x02\x00\x00\x00", 5);  // 8-bit RGB
  put_chunk(png, "IHDR", ihdr);
  put_chunk(png, "IDAT", packed);
  put_chunk(png, "IEND", "");
  return png;
}

RemoteClient::RemoteClient(RemoteSettings settings) : settings_(std::move(settings)) {
  settings_.validate();
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  std::regex_match(settings_.base_url, m, url);
  scheme_host_ = m[1].str();
  path_prefix_ = m[2].str();
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

void RemoteClient::log(const nlohmann::json& record) {
  if (settings_.transcript_path.empty()) return;
  std::lock_guard lock(log_mutex_);
  std::ofstream(settings_.transcript_path, std::ios::app) << record.dump() << '\n';
}

nlohmann::json RemoteClient::post(const std::string& role, const std::string& path, const nlohmann::json& body,
                                  const std::function<void(const nlohmann::json&)>& validate) {
  httplib::Client cli(scheme_host_);
  const auto secs = static_cast<time_t>(settings_.timeout_s);
  const auto usecs = static_cast<time_t>((settings_.timeout_s - secs) * 1e6);
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 1; attempt <= settings_.max_attempts; ++attempt) {
    if (attempt > 1)
      std::this_thread::sleep_for(std::chrono::milliseconds(settings_.backoff_ms << std::min(attempt - 2, 16)));
    nlohmann::json rec = {{"time_ms", now_ms()}, {"role", role}, {"attempt", attempt}, {"path", path}, {"request", body}};
    auto res = cli.Post(path_prefix_ + path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
    } else if (res->status != 200) {
      last_error = "HTTP status " + std::to_string(res->status);
      rec["response"] = res->body;
    } else {
      rec["response"] = res->body;
      try {
        auto doc = nlohmann::json::parse(res->body);
        if (validate) validate(doc);
        rec["ok"] = true;
        log(rec);
        return doc;
      } catch (const std::exception& e) {
        last_error = std::string("parse error: ") + e.what();
      }
    }
    rec["ok"] = false;
    rec["error"] = last_error;
    log(rec);
  }
  throw RetrievalUnavailable(role + " request failed after " + std::to_string(settings_.max_attempts) +
                             " attempts: " + last_error);
}

std::string RemoteClient::chat(const std::string& role, const std::string& prompt, std::span<const Image> images,
                               const std::function<void(const std::string&)>& validate) {
  nlohmann::json content = nlohmann::json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  for (const auto& img : images) {
    const std::string mime = img.has_labels() || img.mime_type.empty() ? "image/png" : img.mime_type;
    content.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", "data:" + mime + ";base64," + base64_encode(image_to_png(img))}}}});
  }
  const nlohmann::json body = {{"model", settings_.chat_model},
                               {"temperature", 0},
                               {"messages", {{{"role", "user"}, {"content", content}}}}};
  std::string text;
  post(role, "/chat/completions", body, [&](const nlohmann::json& doc) {
    text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    if (validate) validate(text);
  });
  return text;
}

std::vector<Image> RemoteClient::generate_images(const std::string& prompt, int count) {
  const nlohmann::json body = {{"model", settings_.image_model},
                               {"prompt", prompt},
                               {"n", count},
                               {"size", "1024x1024"},
                               {"response_format", "b64_json"}};
  std::vector<Image> out;
  post("image_generation", "/images/generations", body, [&](const nlohmann::json& doc) {
    out.clear();
    for (const auto& d : doc.at("data")) {
      Image img;
      img.mime_type = "image/png";
      img.encoded = base64_decode(d.at("b64_json").get<std::string>());
      out.push_back(std::move(img));
    }
    if (out.empty()) throw ParseError("no images returned");
  });
  return out;
}

std::string RemoteReasoner::complete(const PromptRequest& request) {
  std::function<void(const std::string&)> validate;
  if (request.role == roles::kLandmarkRetrieval) validate = [](const std::string& t) { parse_nav_locations(t); };
  else if (request.role == roles::kInstructionDecomposition) validate = [](const std::string& t) { parse_decomposition(t); };
  return client_->chat(request.role, request.prompt, {}, validate);
}

std::string RemoteEnricher::enrich(const std::string& goal_text, std::span<const Image> context) {
  std::string list;
  for (std::size_t i = 0; i < context.size(); ++i) list += (i ? ", " : "") + std::string("<image ") + std::to_string(i + 1) + ">";
  const auto prompt = prompts_.render(roles::kDescriptionEnrichment,
                                      {{"text_prompt", goal_text}, {"img_list", list.empty() ? "none" : list}});
  return parse_enhancement(client_->chat(roles::kDescriptionEnrichment, prompt, context));
}

std::vector<Image> RemoteImaginer::imagine(const std::string& description, int count) {
  return client_->generate_images(description, count);
}

Verification RemoteVerifier::verify(const Observation& obs, const GoalSpec& goal) {
  std::vector<Image> images{obs.rgb};
  std::string target = goal.text.value_or("the object shown in the second image");
  if (goal.image) images.push_back(*goal.image);
  const auto prompt = prompts_.render(roles::kGoalVerification, {{"text_prompt", target}, {"img", "<image 1>"}});
  Verification v;
  client_->chat(roles::kGoalVerification, prompt, images, [&](const std::string& t) { v = parse_verification(t); });
  return v;
}

int RemoteScorer::score(const std::string& question, const std::string& reference, const std::string& answer) {
  const std::string prompt =
      "Rate how well the answer matches the reference answer to the question on a scale from 1 (wrong) to 5 "
      "(fully correct). Reply with the number only.\nQuestion: " +
      question + "\nReference: " + reference + "\nAnswer: " + answer;
  int s = 1;
  client_->chat(roles::kJudge, prompt, {}, [&](const std::string& t) { s = parse_score(t); });
  return s;
}

InterfaceSet make_remote_interfaces(InterfaceSet base, const RemoteSettings& settings, const PromptLibrary& prompts) {
  auto client = std::make_shared<RemoteClient>(settings);
  base.reasoner = std::make_shared<RemoteReasoner>(client);
  base.enricher = std::make_shared<RemoteEnricher>(client, prompts);
  base.imaginer = std::make_shared<RemoteImaginer>(client);
  base.verifier = std::make_shared<RemoteVerifier>(client, prompts);
  base.scorer = std::make_shared<RemoteScorer>(client);
  return base;
}

}  // namespace wf::perception
