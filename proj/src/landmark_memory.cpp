#include "wayfinder/landmark_memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <mutex>

namespace wf::landmark {

namespace {

constexpr int kSchemaVersion = 1;

}  // namespace

void Landmark::validate() const {
  if (category.empty()) throw ContractViolation("landmark category must be non-empty");
  if (!(confidence >= 0.0 && confidence <= 1.0))
    throw ContractViolation("landmark confidence must lie in [0, 1]");
  if (!position.allFinite()) throw ContractViolation("landmark position must be finite");
}

bool same_category(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

Landmark fuse(const Landmark& incoming, std::span<const Landmark> overlaps) {
  require(!overlaps.empty(), "fuse requires at least one overlapping landmark");
  for (const auto& l : overlaps)
    require(same_category(l.category, incoming.category), "fused landmarks must share a category");

  const std::size_t n = overlaps.size() + 1;
  auto member = [&](std::size_t i) -> const Landmark& {
    return i < overlaps.size() ? overlaps[i] : incoming;
  };

  double weight_sum = 0.0;
  double confidence_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weight_sum += member(i).confidence;
    confidence_sum += member(i).confidence;
  }

  // Normalizing the weights first keeps self-fusion bit-exact.
  Vec3 position = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    const double w = weight_sum > 0.0 ? member(i).confidence / weight_sum : 1.0 / n;
    position += w * member(i).position;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (member(i).confidence >= member(best).confidence) best = i;

  Landmark fused;
  fused.category = incoming.category;
  fused.position = position;
  fused.confidence = confidence_sum / static_cast<double>(n);
  fused.description = member(best).description;
  return fused;
}

LandmarkStore::LandmarkStore(double overlap_distance, double confidence_floor)
    : overlap_distance_(overlap_distance), confidence_floor_(confidence_floor) {
  if (!(overlap_distance > 0.0)) throw ContractViolation("overlap distance must be positive");
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0))
    throw ContractViolation("confidence floor must lie in [0, 1]");
}

LandmarkStore::LandmarkStore(const LandmarkStore& other) {
  std::shared_lock lock(other.mutex_);
  overlap_distance_ = other.overlap_distance_;
  confidence_floor_ = other.confidence_floor_;
  items_ = other.items_;
  stats_ = other.stats_;
}

LandmarkStore& LandmarkStore::operator=(const LandmarkStore& other) {
  if (this == &other) return *this;
  std::unique_lock mine(mutex_, std::defer_lock);
  std::shared_lock theirs(other.mutex_, std::defer_lock);
  std::lock(mine, theirs);
  overlap_distance_ = other.overlap_distance_;
  confidence_floor_ = other.confidence_floor_;
  items_ = other.items_;
  stats_ = other.stats_;
  return *this;
}

bool LandmarkStore::insert(const Landmark& incoming) {
  incoming.validate();
  std::unique_lock lock(mutex_);
  if (incoming.confidence < confidence_floor_) {
    ++stats_.dropped_below_floor;
    return false;
  }

  Landmark current = incoming;
  bool fused_any = false;
  for (;;) {
    std::vector<Landmark> overlap;
    std::vector<Landmark> rest;
    rest.reserve(items_.size());
    for (auto& l : items_) {
      if (same_category(l.category, current.category) &&
          (l.position - current.position).norm() <= overlap_distance_)
        overlap.push_back(std::move(l));
      else
        rest.push_back(std::move(l));
    }
    items_ = std::move(rest);
    if (overlap.empty()) break;
    current = fuse(current, overlap);
    fused_any = true;
  }
  items_.push_back(std::move(current));
  if (fused_any)
    ++stats_.fused;
  else
    ++stats_.appended;
  return true;
}

std::vector<Landmark> LandmarkStore::query_category(std::string_view category) const {
  std::shared_lock lock(mutex_);
  std::vector<Landmark> out;
  for (const auto& l : items_)
    if (same_category(l.category, category)) out.push_back(l);
  std::stable_sort(out.begin(), out.end(),
                   [](const Landmark& a, const Landmark& b) { return a.confidence > b.confidence; });
  return out;
}

std::vector<Landmark> LandmarkStore::landmarks() const {
  std::shared_lock lock(mutex_);
  return items_;
}

std::size_t LandmarkStore::size() const {
  std::shared_lock lock(mutex_);
  return items_.size();
}

InsertStats LandmarkStore::stats() const {
  std::shared_lock lock(mutex_);
  return stats_;
}

nlohmann::json LandmarkStore::to_json() const {
  std::shared_lock lock(mutex_);
  nlohmann::json doc;
  doc["version"] = kSchemaVersion;
  doc["overlap_distance"] = overlap_distance_;
  doc["confidence_floor"] = confidence_floor_;
  auto& list = doc["landmarks"] = nlohmann::json::array();
  for (const auto& l : items_) {
    list.push_back({{"category", l.category},
                    {"position", {l.position.x(), l.position.y(), l.position.z()}},
                    {"confidence", l.confidence},
                    {"description", l.description}});
  }
  return doc;
}

LandmarkStore LandmarkStore::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("version").get<int>() != kSchemaVersion)
      throw ParseError("unsupported landmark store version");
    LandmarkStore store(doc.at("overlap_distance").get<double>(),
                        doc.value("confidence_floor", kDefaultConfidenceFloor));
    for (const auto& item : doc.at("landmarks")) {
      Landmark l;
      l.category = item.at("category").get<std::string>();
      const auto& p = item.at("position");
      if (!p.is_array() || p.size() != 3) throw ParseError("landmark position must have 3 entries");
      l.position = Vec3(p[0].get<double>(), p[1].get<double>(), p[2].get<double>());
      l.confidence = item.at("confidence").get<double>();
      l.description = item.value("description", std::string{});
      l.validate();
      // Stored entries already satisfy the overlap invariant; keep them verbatim.
      store.items_.push_back(std::move(l));
    }
    return store;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("landmark store: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ParseError(std::string("landmark store: ") + e.what());
  }
}

void LandmarkStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

LandmarkStore LandmarkStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("landmark store: ") + e.what());
  }
}

}  // namespace wf::landmark
