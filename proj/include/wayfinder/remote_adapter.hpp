#pragma once

#include "wayfinder/perception.hpp"
#include "wayfinder/prompts.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <string>

namespace wf::perception {

/// Connection settings for an OpenAI-compatible endpoint.
struct RemoteSettings {
  /// Including the version prefix, e.g. "https://api.openai.com/v1".
  std::string base_url;
  std::string api_key;
  std::string chat_model = "gpt-4o";
  std::string image_model = "dall-e-3";
  double timeout_s = 30.0;
  int max_attempts = 3;
  /// Delay before the second attempt; doubled for each further attempt.
  int backoff_ms = 500;
  /// Append-only JSONL log of every exchange; empty disables it.
  std::string transcript_path;

  /// Fills base_url and api_key from WAYFINDER_API_BASE / WAYFINDER_API_KEY,
  /// falling back to OPENAI_BASE_URL / OPENAI_API_KEY.
  static RemoteSettings from_env(RemoteSettings defaults);
  static RemoteSettings from_env() { return from_env(RemoteSettings{}); }
  void validate() const;
};

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// RGB PNG of an image's label raster (labels mapped to stable colors), or
/// the image's own encoded bytes when it carries no raster.
std::string image_to_png(const Image& image);

/// Chat-completion and image-generation client with retries. A reply that
/// fails `validate` (by throwing) is retried like a transport error; after
/// the last attempt RetrievalUnavailable is raised.
class RemoteClient {
 public:
  explicit RemoteClient(RemoteSettings settings);

  std::string chat(const std::string& role, const std::string& prompt, std::span<const Image> images = {},
                   const std::function<void(const std::string&)>& validate = {});
  std::vector<Image> generate_images(const std::string& prompt, int count);

  const RemoteSettings& settings() const { return settings_; }

 private:
  nlohmann::json post(const std::string& role, const std::string& path, const nlohmann::json& body,
                      const std::function<void(const nlohmann::json&)>& validate);
  void log(const nlohmann::json& record);

  RemoteSettings settings_;
  std::string scheme_host_;
  std::string path_prefix_;
  std::mutex log_mutex_;
};

class RemoteReasoner : public Reasoner {
 public:
  explicit RemoteReasoner(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  std::string complete(const PromptRequest& request) override;

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteEnricher : public DescriptionEnricher {
 public:
  RemoteEnricher(std::shared_ptr<RemoteClient> client, PromptLibrary prompts)
      : client_(std::move(client)), prompts_(std::move(prompts)) {}
  std::string enrich(const std::string& goal_text, std::span<const Image> context) override;

 private:
  std::shared_ptr<RemoteClient> client_;
  PromptLibrary prompts_;
};

class RemoteImaginer : public ImageImaginer {
 public:
  explicit RemoteImaginer(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  std::vector<Image> imagine(const std::string& description, int count) override;

 private:
  std::shared_ptr<RemoteClient> client_;
};

class RemoteVerifier : public GoalVerifier {
 public:
  RemoteVerifier(std::shared_ptr<RemoteClient> client, PromptLibrary prompts)
      : client_(std::move(client)), prompts_(std::move(prompts)) {}
  Verification verify(const Observation& obs, const GoalSpec& goal) override;

 private:
  std::shared_ptr<RemoteClient> client_;
  PromptLibrary prompts_;
};

class RemoteScorer : public AnswerScorer {
 public:
  explicit RemoteScorer(std::shared_ptr<RemoteClient> client) : client_(std::move(client)) {}
  int score(const std::string& question, const std::string& reference, const std::string& answer) override;

 private:
  std::shared_ptr<RemoteClient> client_;
};

/// Replaces the language and generation roles of `base` with remote
/// adapters; detector and encoder stay as given.
InterfaceSet make_remote_interfaces(InterfaceSet base, const RemoteSettings& settings, const PromptLibrary& prompts);

}  // namespace wf::perception
