#include "wayfinder/perception.hpp"

#include "wayfinder/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

namespace wf {

std::string_view to_string(GoalModality m) {
  switch (m) {
    case GoalModality::Category: return "category";
    case GoalModality::TextInstance: return "text_instance";
    case GoalModality::ImageInstance: return "image_instance";
    case GoalModality::Waypoint: return "waypoint";
  }
  return "category";
}

GoalModality goal_modality_from_string(std::string_view s) {
  if (s == "category") return GoalModality::Category;
  if (s == "text_instance") return GoalModality::TextInstance;
  if (s == "image_instance") return GoalModality::ImageInstance;
  if (s == "waypoint") return GoalModality::Waypoint;
  throw ConfigError("unknown goal modality: " + std::string(s));
}

void GoalSpec::validate() const {
  if (modality == GoalModality::ImageInstance) {
    if (!image) throw ContractViolation("image goal requires an image");
  } else if (!text || text->empty()) {
    throw ContractViolation("text goal requires non-empty text");
  }
}

std::string GoalSpec::label() const {
  std::string out(to_string(modality));
  out += ':';
  if (text) out += *text;
  else if (image && image->source_instance >= 0) out += "instance#" + std::to_string(image->source_instance);
  else out += "image";
  return out;
}

}  // namespace wf

namespace wf::perception {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void InterfaceSet::validate() const {
  if (!detector) throw ConfigError("interface set is missing a detector");
  if (!encoder) throw ConfigError("interface set is missing an encoder");
  if (!enricher) throw ConfigError("interface set is missing an enricher");
  if (!imaginer) throw ConfigError("interface set is missing an imaginer");
  if (!verifier) throw ConfigError("interface set is missing a verifier");
  if (!scorer) throw ConfigError("interface set is missing a scorer");
  if (!reasoner) throw ConfigError("interface set is missing a reasoner");
}

std::string ScriptedReasoner::complete(const PromptRequest& request) {
  log_.push_back(request);
  auto it = replies_.find(request.role);
  if (it == replies_.end() || it->second.empty())
    throw RetrievalUnavailable("no scripted reply for role " + request.role);
  auto& n = cursor_[request.role];
  const auto& reply = it->second[std::min(n, it->second.size() - 1)];
  ++n;
  return reply;
}

std::string FallbackReasoner::complete(const PromptRequest& request) {
  const auto& f = request.fields;
  if (request.role == roles::kLandmarkRetrieval) {
    const std::string goal = lower(trim(f.value("goal", std::string{})));
    const std::size_t k = f.value("k", std::size_t{3});
    struct Hit {
      double confidence;
      Vec3 loc;
    };
    auto collect = [&](const char* key) {
      std::vector<Hit> hits;
      for (const auto& l : f.value("landmarks", nlohmann::json::array())) {
        if (lower(trim(l.value(key, std::string{}))) != goal) continue;
        const auto& loc = l.at("loc");
        hits.push_back({l.at("confidence").get<double>(),
                        Vec3(loc.at(0).get<double>(), loc.at(1).get<double>(), loc.at(2).get<double>())});
      }
      return hits;
    };
    auto hits = collect("label");
    if (hits.empty()) hits = collect("description");
    std::stable_sort(hits.begin(), hits.end(),
                     [](const Hit& a, const Hit& b) { return a.confidence > b.confidence; });
    if (hits.size() > k) hits.resize(k);
    std::vector<Vec3> locs;
    for (const auto& h : hits) locs.push_back(h.loc);
    return format_nav_locations(locs);
  }
  if (request.role == roles::kDescriptionEnrichment) {
    return "analysis process: no scene context available\nenhancement description: " +
           f.value("goal", std::string{});
  }
  if (request.role == roles::kGoalVerification) {
    return "Success: no\nno visual judgement available";
  }
  if (request.role == roles::kInstructionDecomposition) {
    // Split on sentence or clause separators.
    const std::string text = f.value("instruction", std::string{});
    static const std::regex sep(R"(\s*(?:[.;]|,?\s+then\s+|,?\s+and\s+)\s*)", std::regex::icase);
    std::ostringstream out;
    int n = 0;
    for (std::sregex_token_iterator it(text.begin(), text.end(), sep, -1), end; it != end; ++it) {
      std::string part = trim(it->str());
      static const std::regex lead(R"(^(?:go|walk|move|head|navigate)\s+(?:to|towards?)\s+(?:the\s+)?)",
                                   std::regex::icase);
      part = std::regex_replace(part, lead, "");
      if (part.empty()) continue;
      out << ++n << ". Move to the {" << part << "}\n";
    }
    return out.str();
  }
  if (request.role == roles::kEqaWaypoint) {
    const std::string q = lower(f.value("question", std::string{}));
    for (const auto& c : f.value("categories", nlohmann::json::array())) {
      const std::string cat = lower(c.get<std::string>());
      if (!cat.empty() && q.find(cat) != std::string::npos) return c.get<std::string>();
    }
    return std::string(kGoAroundSentinel);
  }
  if (request.role == roles::kAnswer) {
    return f.value("observed_description", std::string{"unknown"});
  }
  throw RetrievalUnavailable("fallback reasoner has no answer for role " + request.role);
}

std::string normalize_answer(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  while (!out.empty() && std::ispunct(static_cast<unsigned char>(out.back()))) out.pop_back();
  return out;
}

int ExactMatchScorer::score(const std::string&, const std::string& reference, const std::string& answer) {
  return normalize_answer(reference) == normalize_answer(answer) ? 5 : 1;
}

std::vector<NavLocation> parse_nav_locations(std::string_view text, std::vector<std::string>* warnings) {
  const std::string s(text);
  static const std::regex unable(R"(Nav\s*Loc\s*:\s*Unable\s+to\s+find)", std::regex::icase);
  static const std::regex entry(R"(Nav\s*Loc\s*(\d+)\s*:\s*\[([^\]]*)\])", std::regex::icase);
  static const std::regex any(R"(Nav\s*Loc)", std::regex::icase);
  static const std::regex num(R"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)");

  std::vector<NavLocation> out;
  for (std::sregex_iterator it(s.begin(), s.end(), entry), end; it != end; ++it) {
    const std::string body = (*it)[2].str();
    std::vector<double> v;
    for (std::sregex_iterator n(body.begin(), body.end(), num); n != end; ++n) v.push_back(std::stod(n->str()));
    if (v.size() != 3 || !std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); })) {
      if (warnings) warnings->push_back("skipping malformed entry: " + it->str());
      continue;
    }
    out.push_back({Vec3(v[0], v[1], v[2])});
  }
  if (out.empty() && !std::regex_search(s, unable)) {
    if (!std::regex_search(s, any)) throw ParseError("reply contains no navigation locations");
  }
  return out;
}

std::string format_nav_locations(std::span<const Vec3> locations) {
  if (locations.empty()) return "{Nav Loc: Unable to find}";
  std::string out = "{";
  for (std::size_t i = 0; i < locations.size(); ++i) {
    if (i) out += ", ";
    const auto& p = locations[i];
    out += "Nav Loc " + std::to_string(i + 1) + ": [" + fmt17(p.x()) + ", " + fmt17(p.y()) + ", " +
           fmt17(p.z()) + "]";
  }
  return out + "}";
}

Verification parse_verification(std::string_view text) {
  static const std::regex success(R"(success\s*:\s*(yes|no))", std::regex::icase);
  static const std::regex forward(R"(need\s+forward\s*:\s*(yes|no))", std::regex::icase);
  Verification v;
  bool found = false;
  std::ostringstream analysis;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::smatch m;
    bool consumed = false;
    if (std::regex_search(line, m, success)) {
      if (!found) v.success = lower(m[1].str()) == "yes";
      found = true;
      consumed = true;
    }
    if (std::regex_search(line, m, forward)) {
      v.need_forward = lower(m[1].str()) == "yes";
      consumed = true;
    }
    if (!consumed && !trim(line).empty()) {
      if (analysis.tellp() > 0) analysis << '\n';
      analysis << trim(line);
    }
  }
  if (!found) throw ParseError("verification reply has no Success line");
  if (!v.success) v.need_forward = false;
  v.analysis = analysis.str();
  return v;
}

std::vector<std::string> parse_decomposition(std::string_view text) {
  static const std::regex step(R"(Move\s+to\s+the\s*\{([^}]*)\})", std::regex::icase);
  const std::string s(text);
  std::vector<std::string> out;
  for (std::sregex_iterator it(s.begin(), s.end(), step), end; it != end; ++it) {
    auto t = trim((*it)[1].str());
    if (!t.empty()) out.push_back(std::move(t));
  }
  if (out.empty()) throw ParseError("decomposition reply has no sub-goals");
  return out;
}

std::string parse_enhancement(std::string_view text) {
  const std::string key = "enhancement description:";
  const auto pos = lower(text).find(key);
  if (pos == std::string::npos) return trim(text);
  return trim(text.substr(pos + key.size()));
}

int parse_score(std::string_view text) {
  static const std::regex integer(R"(\d+)");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, integer)) throw ParseError("score reply has no integer");
  const int v = std::stoi(m.str());
  if (v < 1 || v > 5) throw ParseError("score out of range: " + m.str());
  return v;
}

}  // namespace wf::perception
