#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace wf::perception {

/// Named prompt templates. Placeholders are written `{name}`; other braces
/// are left untouched so templates can show literal answer formats.
class PromptLibrary {
 public:
  /// Templates compiled into the library.
  static PromptLibrary builtin();
  /// Builtins overridden by every `<name>.txt` found in `dir`.
  static PromptLibrary load(const std::filesystem::path& dir);

  bool has(const std::string& name) const { return templates_.count(name) != 0; }
  const std::string& get(const std::string& name) const;
  void set(const std::string& name, std::string text) { templates_[name] = std::move(text); }
  std::vector<std::string> names() const;

  std::string render(const std::string& name, const std::map<std::string, std::string>& values) const;

 private:
  std::map<std::string, std::string> templates_;
};

namespace roles {
inline constexpr const char* kLandmarkRetrieval = "landmark_retrieval";
inline constexpr const char* kDescriptionEnrichment = "description_enrichment";
inline constexpr const char* kGoalVerification = "goal_verification";
inline constexpr const char* kInstructionDecomposition = "instruction_decomposition";
inline constexpr const char* kEqaWaypoint = "eqa_waypoint";
inline constexpr const char* kAnswer = "answer";
inline constexpr const char* kJudge = "judge";
}  // namespace roles

}  // namespace wf::perception
