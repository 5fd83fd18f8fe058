#include "wayfinder/prompts.hpp"

#include "wayfinder/common.hpp"

#include <fstream>
#include <sstream>
#include <utility>

namespace wf::perception {

namespace {

const std::pair<const char*, const char*> kBuiltin[] = {
#include "wayfinder/builtin_prompts.inc"
};

}  // namespace

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (const auto& [name, text] : kBuiltin) lib.templates_[name] = text;
  return lib;
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ConfigError("prompt directory not found: " + dir.string());
  PromptLibrary lib = builtin();
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream buf;
    buf << in.rdbuf();
    lib.templates_[entry.path().stem().string()] = buf.str();
  }
  return lib;
}

const std::string& PromptLibrary::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw ConfigError("unknown prompt template: " + name);
  return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : templates_) out.push_back(k);
  return out;
}

std::string PromptLibrary::render(const std::string& name,
                                  const std::map<std::string, std::string>& values) const {
  const std::string& t = get(name);
  std::string out;
  out.reserve(t.size());
  std::size_t i = 0;
  while (i < t.size()) {
    if (t[i] == '{') {
      const auto close = t.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = values.find(t.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += t[i++];
  }
  return out;
}

}  // namespace wf::perception
