#include "wayfinder/planner.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace wf::planner {

namespace {

constexpr unsigned char kFree = 254;
constexpr unsigned char kOccupied = 0;
constexpr unsigned char kUnknown = 205;

std::filesystem::path sidecar(const std::filesystem::path& p) { return p.string() + ".json"; }

}  // namespace

void write_pgm(const OccupancyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "P5\n" << grid.width() << ' ' << grid.height() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(grid.width()));
  for (int y = grid.height() - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width(); ++x) {
      switch (grid.at({x, y})) {
        case CellState::Free: row[x] = kFree; break;
        case CellState::Occupied: row[x] = kOccupied; break;
        case CellState::Unknown: row[x] = kUnknown; break;
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  nlohmann::json meta = {{"image", path.filename().string()},
                         {"resolution", grid.resolution()},
                         {"origin", {grid.origin_x(), grid.origin_y(), 0.0}},
                         {"width", grid.width()},
                         {"height", grid.height()},
                         {"free_value", kFree},
                         {"occupied_value", kOccupied},
                         {"unknown_value", kUnknown}};
  std::ofstream(sidecar(path)) << meta.dump(2) << '\n';
}

OccupancyGrid read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  // Header tokens, skipping comment lines.
  auto token = [&]() {
    std::string t;
    while (in >> t) {
      if (t[0] != '#') return t;
      std::string rest;
      std::getline(in, rest);
    }
    throw ParseError("truncated PGM header in " + path.string());
  };
  if (token() != "P5") throw ParseError("not a binary PGM: " + path.string());
  const int w = std::stoi(token());
  const int h = std::stoi(token());
  const int maxval = std::stoi(token());
  if (w <= 0 || h <= 0 || maxval != 255) throw ParseError("unsupported PGM geometry in " + path.string());
  in.get();

  double resolution = 0.25, ox = 0.0, oy = 0.0;
  if (std::ifstream side(sidecar(path)); side) {
    try {
      const auto meta = nlohmann::json::parse(side);
      resolution = meta.at("resolution").get<double>();
      ox = meta.at("origin").at(0).get<double>();
      oy = meta.at("origin").at(1).get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("bad occupancy sidecar: " + std::string(e.what()));
    }
  }

  OccupancyGrid grid(w, h, resolution, ox, oy);
  std::vector<unsigned char> row(static_cast<std::size_t>(w));
  for (int y = h - 1; y >= 0; --y) {
    if (!in.read(reinterpret_cast<char*>(row.data()), w)) throw ParseError("truncated PGM data in " + path.string());
    for (int x = 0; x < w; ++x) {
      // Thresholds follow the usual map-server convention.
      const CellState s = row[x] >= 250 ? CellState::Free : row[x] <= 50 ? CellState::Occupied : CellState::Unknown;
      grid.set({x, y}, s);
    }
  }
  return grid;
}

}  // namespace wf::planner
