#include "wayfinder/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace wf::eval {

namespace {

const char* const kColumns[] = {"scene_seed", "episode",       "task",  "method",
                                "goal",       "success",       "solvable", "path_length",
                                "geodesic",   "steps",         "stop_distance", "candidates_visited",
                                "verifications", "reason"};
constexpr std::size_t kColumnCount = std::size(kColumns);

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// One record, honoring quoted fields that may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields) {
  fields.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  for (int ch = in.get(); ch != std::char_traits<char>::eof(); ch = in.get()) {
    const char c = static_cast<char>(ch);
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  fields.push_back(std::move(field));
  return true;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw ParseError("bad number in CSV: " + s);
  return v;
}

long long parse_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw ParseError("bad integer in CSV: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "1") return true;
  if (s == "0") return false;
  throw ParseError("bad flag in CSV: " + s);
}

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};

}  // namespace

void write_csv(const std::vector<EpisodeRow>& rows, std::ostream& out) {
  for (std::size_t i = 0; i < kColumnCount; ++i) out << (i ? "," : "") << kColumns[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.scene_seed << ',' << r.episode << ',' << quote(r.task) << ',' << quote(r.method) << ',' << quote(r.goal)
        << ',' << (r.success ? 1 : 0) << ',' << (r.solvable ? 1 : 0) << ',' << num(r.path_length) << ','
        << num(r.geodesic) << ',' << r.steps << ',' << num(r.stop_distance) << ',' << r.candidates_visited << ','
        << r.verifications << ',' << quote(r.reason) << '\n';
  }
}

std::vector<EpisodeRow> read_csv(std::istream& in) {
  std::vector<std::string> f;
  if (!read_record(in, f) || f.size() != kColumnCount) throw ParseError("CSV header mismatch");
  for (std::size_t i = 0; i < kColumnCount; ++i)
    if (f[i] != kColumns[i]) throw ParseError("unexpected CSV column " + f[i]);
  std::vector<EpisodeRow> rows;
  while (read_record(in, f)) {
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != kColumnCount) throw ParseError("CSV row has " + std::to_string(f.size()) + " fields");
    EpisodeRow r;
    r.scene_seed = std::strtoull(f[0].c_str(), nullptr, 10);
    r.episode = static_cast<int>(parse_int(f[1]));
    r.task = f[2];
    r.method = f[3];
    r.goal = f[4];
    r.success = parse_bool(f[5]);
    r.solvable = parse_bool(f[6]);
    r.path_length = parse_double(f[7]);
    r.geodesic = parse_double(f[8]);
    r.steps = static_cast<int>(parse_int(f[9]));
    r.stop_distance = parse_double(f[10]);
    r.candidates_visited = static_cast<int>(parse_int(f[11]));
    r.verifications = static_cast<int>(parse_int(f[12]));
    r.reason = f[13];
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_summary_svg(const std::vector<TaskSummary>& summaries, const std::filesystem::path& path) {
  std::vector<std::string> tasks, methods;
  for (const auto& s : summaries) {
    if (std::find(tasks.begin(), tasks.end(), s.task) == tasks.end()) tasks.push_back(s.task);
    if (std::find(methods.begin(), methods.end(), s.method) == methods.end()) methods.push_back(s.method);
  }
  const int bar = 22, gap = 40, chart_h = 200, top = 30, left = 50;
  const int group_w = static_cast<int>(methods.size()) * 2 * bar + gap;
  const int width = left + static_cast<int>(tasks.size()) * group_w + 160;
  const int height = top + chart_h + 60;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = top + chart_h * (1.0 - t / 4.0);
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << width - 150 << "\" y2=\"" << y
        << "\" stroke=\"#ddd\"/>\n<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" font-size=\"11\" text-anchor=\"end\">" << t * 25 << "%</text>\n";
  }
  for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
    const int gx = left + 10 + static_cast<int>(ti) * group_w;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const TaskSummary* s = nullptr;
      for (const auto& c : summaries)
        if (c.task == tasks[ti] && c.method == methods[mi]) s = &c;
      if (!s) continue;
      const double vals[2] = {s->sr, s->spl};
      for (int k = 0; k < 2; ++k) {
        const int x = gx + static_cast<int>(mi * 2 + k) * bar;
        const double h = chart_h * vals[k];
        out << "<rect x=\"" << x << "\" y=\"" << top + chart_h - h << "\" width=\"" << bar - 2 << "\" height=\"" << h
            << "\" fill=\"" << kPalette[(mi * 2 + k) % std::size(kPalette)] << "\"/>\n";
      }
    }
    out << "<text x=\"" << gx + (group_w - gap) / 2 << "\" y=\"" << top + chart_h + 18
        << "\" font-size=\"12\" text-anchor=\"middle\">" << xml_escape(tasks[ti]) << "</text>\n";
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (int k = 0; k < 2; ++k) {
      const int y = top + static_cast<int>(mi * 2 + k) * 18;
      out << "<rect x=\"" << width - 140 << "\" y=\"" << y << "\" width=\"12\" height=\"12\" fill=\""
          << kPalette[(mi * 2 + k) % std::size(kPalette)] << "\"/>\n<text x=\"" << width - 122 << "\" y=\"" << y + 11
          << "\" font-size=\"12\">" << xml_escape(methods[mi]) << (k ? " SPL" : " SR") << "</text>\n";
    }
  }
  out << "</svg>\n";
}

void write_trajectory_svg(const sim::Scene& scene, const std::vector<std::vector<geometry::AgentPose>>& trajectories,
                          const std::filesystem::path& path) {
  const double ppm = 40.0;
  const double w = scene.width_m() * ppm, h = scene.height_m() * ppm;
  auto sx = [&](double x) { return x * ppm; };
  auto sy = [&](double y) { return h - y * ppm; };
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g fill=\"#444\">\n";
  const double cell = sim::Scene::kResolution * ppm;
  for (int cy = 0; cy < scene.height(); ++cy) {
    for (int cx = 0; cx < scene.width();) {
      if (!scene.wall(cx, cy)) {
        ++cx;
        continue;
      }
      int end = cx;
      while (end < scene.width() && scene.wall(end, cy)) ++end;
      out << "<rect x=\"" << cx * cell << "\" y=\"" << h - (cy + 1) * cell << "\" width=\"" << (end - cx) * cell
          << "\" height=\"" << cell << "\"/>\n";
      cx = end;
    }
  }
  out << "</g>\n";
  for (const auto& inst : scene.instances()) {
    out << "<circle cx=\"" << sx(inst.x) << "\" cy=\"" << sy(inst.y) << "\" r=\"" << inst.radius * ppm
        << "\" fill=\"#f4c542\" stroke=\"#8a6d00\"/>\n<text x=\"" << sx(inst.x) << "\" y=\"" << sy(inst.y) + 3
        << "\" font-size=\"9\" text-anchor=\"middle\">" << xml_escape(inst.category) << "</text>\n";
  }
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto& t = trajectories[i];
    if (t.empty()) continue;
    const char* color = kPalette[i % std::size(kPalette)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (const auto& p : t) out << sx(p.x) << ',' << sy(p.y) << ' ';
    out << "\"/>\n<circle cx=\"" << sx(t.front().x) << "\" cy=\"" << sy(t.front().y) << "\" r=\"4\" fill=\"" << color
        << "\"/>\n<rect x=\"" << sx(t.back().x) - 4 << "\" y=\"" << sy(t.back().y) - 4
        << "\" width=\"8\" height=\"8\" fill=\"" << color << "\"/>\n";
  }
  out << "</svg>\n";
}

void write_report(const BenchmarkReport& report, const SuiteConfig& suite, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw Error("cannot write report in " + dir.string());
    out << report.to_json().dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "episodes.csv");
    write_csv(report.rows, out);
  }
  write_summary_svg(report.summaries, dir / "summary.svg");
  int plotted = 0;
  for (const auto& rec : report.scenes) {
    if (plotted >= suite.plot_scenes) break;
    if (!rec.error.empty()) continue;
    const auto scene = sim::generate_scene(rec.seed, suite.scene);
    write_trajectory_svg(scene, rec.trajectories, dir / ("scene_" + std::to_string(rec.seed) + ".svg"));
    ++plotted;
  }
}

}  // namespace wf::eval
