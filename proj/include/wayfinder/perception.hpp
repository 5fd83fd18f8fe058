#pragma once

#include "wayfinder/goal.hpp"
#include "wayfinder/perception_types.hpp"

#include <json.hpp>

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace wf::perception {

class ObjectDetector {
 public:
  virtual ~ObjectDetector() = default;
  virtual std::vector<Detection> detect(const Observation& obs) = 0;
};

class PatchEncoder {
 public:
  virtual ~PatchEncoder() = default;
  virtual cogmap::PatchGrid encode(const Image& image) = 0;
};

class DescriptionEnricher {
 public:
  virtual ~DescriptionEnricher() = default;
  virtual std::string enrich(const std::string& goal_text, std::span<const Image> context) = 0;
};

class ImageImaginer {
 public:
  virtual ~ImageImaginer() = default;
  virtual std::vector<Image> imagine(const std::string& description, int count) = 0;
};

class GoalVerifier {
 public:
  virtual ~GoalVerifier() = default;
  virtual Verification verify(const Observation& obs, const GoalSpec& goal) = 0;
};

/// Judges an answer against a reference on a 1..5 scale.
class AnswerScorer {
 public:
  virtual ~AnswerScorer() = default;
  virtual int score(const std::string& question, const std::string& reference,
                    const std::string& answer) = 0;
};

/// Prompt sent to a text reasoner. `fields` carries the structured values the
/// prompt was rendered from so offline reasoners can answer without parsing
/// prose.
struct PromptRequest {
  std::string role;
  std::string prompt;
  nlohmann::json fields = nlohmann::json::object();
};

class Reasoner {
 public:
  virtual ~Reasoner() = default;
  /// Throws RetrievalUnavailable when no answer can be produced.
  virtual std::string complete(const PromptRequest& request) = 0;
};

/// Every foundation-model role the agent relies on.
struct InterfaceSet {
  std::shared_ptr<ObjectDetector> detector;
  std::shared_ptr<PatchEncoder> encoder;
  std::shared_ptr<DescriptionEnricher> enricher;
  std::shared_ptr<ImageImaginer> imaginer;
  std::shared_ptr<GoalVerifier> verifier;
  std::shared_ptr<AnswerScorer> scorer;
  std::shared_ptr<Reasoner> reasoner;

  /// Throws ConfigError naming the first missing role.
  void validate() const;
};

/// Replies from a fixed table keyed by role; the n-th call for a role returns
/// the n-th scripted reply (the last one repeats).
class ScriptedReasoner : public Reasoner {
 public:
  ScriptedReasoner() = default;
  explicit ScriptedReasoner(std::map<std::string, std::vector<std::string>> replies)
      : replies_(std::move(replies)) {}

  void add(const std::string& role, std::string reply) { replies_[role].push_back(std::move(reply)); }
  std::string complete(const PromptRequest& request) override;
  const std::vector<PromptRequest>& requests() const { return log_; }

 private:
  std::map<std::string, std::vector<std::string>> replies_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<PromptRequest> log_;
};

/// Deterministic reasoner: landmark retrieval returns the top-k exact category
/// matches by confidence, in the same wire format a remote model would use.
/// Other roles get conservative, format-correct answers.
class FallbackReasoner : public Reasoner {
 public:
  std::string complete(const PromptRequest& request) override;
};

/// sigma = 5 when normalized strings are equal, 1 otherwise.
class ExactMatchScorer : public AnswerScorer {
 public:
  int score(const std::string& question, const std::string& reference, const std::string& answer) override;
};

/// Lower-cased, whitespace-collapsed, trailing punctuation stripped.
std::string normalize_answer(std::string_view s);

// ---- Wire contracts shared by remote adapters and reasoners ----

struct NavLocation {
  Vec3 position = Vec3::Zero();
};

/// Parses "Nav Loc i: [x, y, z]" entries. "Nav Loc: Unable to find" yields an
/// empty list. Malformed entries are skipped (reported through `warnings`).
/// Throws ParseError when the text contains neither.
std::vector<NavLocation> parse_nav_locations(std::string_view text, std::vector<std::string>* warnings = nullptr);
std::string format_nav_locations(std::span<const Vec3> locations);

/// Parses "Success: yes|no" and "need forward: yes|no"; the remaining lines
/// become the analysis. Throws ParseError without a Success line.
Verification parse_verification(std::string_view text);

/// Extracts the braces of each "Move to the {...}" line. Throws ParseError
/// when no sub-goal is present.
std::vector<std::string> parse_decomposition(std::string_view text);

/// Text after "enhancement description:"; the whole reply when absent.
std::string parse_enhancement(std::string_view text);

/// First integer in 1..5. Throws ParseError otherwise.
int parse_score(std::string_view text);

inline constexpr std::string_view kGoAroundSentinel = "We need to go around and check";

}  // namespace wf::perception
