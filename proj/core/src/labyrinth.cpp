#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "adaptd/envs.hpp"
#include "json.hpp"

namespace adaptd {

namespace detail {
extern const std::array<std::string_view, 6> kBuiltinMapJson;
}

namespace {

// Liang-Barsky: does the closed segment p0 + t (p1 - p0), t in [0, 1], meet
// the closed rectangle?
bool segment_meets_rect(double x0, double y0, double x1, double y1, const Rect& r) {
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  double t_lo = 0.0;
  double t_hi = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - r.x, r.x + r.w - x0, y0 - r.y, r.y + r.h - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t_lo = std::max(t_lo, t);
    } else {
      t_hi = std::min(t_hi, t);
    }
    if (t_lo > t_hi) return false;
  }
  return true;
}

}  // namespace

bool LabMap::in_wall(double x, double y) const noexcept {
  for (const auto& w : walls) {
    if (w.contains(x, y)) return true;
  }
  return false;
}

bool LabMap::in_goal(double x, double y) const noexcept {
  for (const auto& g : goals) {
    if (g.contains(x, y)) return true;
  }
  return false;
}

bool LabMap::segment_hits_wall(double x0, double y0, double x1, double y1) const noexcept {
  for (const auto& w : walls) {
    if (segment_meets_rect(x0, y0, x1, y1, w)) return true;
  }
  return false;
}

void validate(const LabMap& map) {
  if (!(map.width > 0.0) || !(map.height > 0.0)) throw std::invalid_argument("lab map: non-positive extent");
  if (!(map.p_end > 0.0 && map.p_end < 1.0)) throw std::invalid_argument("lab map: p_end must lie in (0, 1)");
  if (!std::isfinite(map.reward)) throw std::invalid_argument("lab map: reward must be finite");
  if (map.goals.empty()) throw std::invalid_argument("lab map: at least one goal is required");
  for (const auto& w : map.walls) {
    if (!(w.w > 0.0) || !(w.h > 0.0) || w.x < 0.0 || w.y < 0.0 || w.x + w.w > map.width ||
        w.y + w.h > map.height) {
      throw std::invalid_argument("lab map: wall outside bounds or degenerate");
    }
  }
  for (const auto& g : map.goals) {
    if (!(g.r > 0.0) || g.cx - g.r < 0.0 || g.cy - g.r < 0.0 || g.cx + g.r > map.width ||
        g.cy + g.r > map.height) {
      throw std::invalid_argument("lab map: goal outside bounds or degenerate");
    }
    // A goal must keep some free area; probe a polar lattice inside the disk.
    bool free_point = !map.in_wall(g.cx, g.cy);
    for (int ring = 1; ring <= 16 && !free_point; ++ring) {
      const double rad = g.r * ring / 16.0;
      for (int k = 0; k < 64 && !free_point; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 64.0;
        free_point = !map.in_wall(g.cx + rad * std::cos(a), g.cy + rad * std::sin(a));
      }
    }
    if (!free_point) throw std::invalid_argument("lab map: goal fully covered by walls");
  }
}

LabMap parse_lab_map(std::string_view json_text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("lab map: ") + e.what());
  }
  LabMap map;
  try {
    map.name = j.value("name", "");
    map.width = j.at("width").get<double>();
    map.height = j.at("height").get<double>();
    for (const auto& w : j.value("walls", json::array())) {
      map.walls.push_back(
          {w.at("x").get<double>(), w.at("y").get<double>(), w.at("w").get<double>(), w.at("h").get<double>()});
    }
    for (const auto& g : j.at("goals")) {
      map.goals.push_back({g.at("cx").get<double>(), g.at("cy").get<double>(), g.at("r").get<double>()});
    }
    map.reward = j.value("reward", 30.0);
    map.p_end = j.value("p_end", 0.0005);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("lab map: ") + e.what());
  }
  validate(map);
  return map;
}

LabMap load_lab_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open map file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_lab_map(buf.str());
}

std::string lab_map_to_json(const LabMap& map) {
  using nlohmann::json;
  json walls = json::array();
  for (const auto& w : map.walls) walls.push_back({{"x", w.x}, {"y", w.y}, {"w", w.w}, {"h", w.h}});
  json goals = json::array();
  for (const auto& g : map.goals) goals.push_back({{"cx", g.cx}, {"cy", g.cy}, {"r", g.r}});
  json j = {{"name", map.name},   {"width", map.width},   {"height", map.height}, {"walls", walls},
            {"goals", goals},     {"reward", map.reward}, {"p_end", map.p_end}};
  return j.dump(2);
}

LabMap builtin_lab_map(int id) {
  if (id < 0 || id >= static_cast<int>(detail::kBuiltinMapJson.size())) {
    throw std::out_of_range("no builtin labyrinth map " + std::to_string(id));
  }
  return parse_lab_map(detail::kBuiltinMapJson[static_cast<std::size_t>(id)]);
}

LabyrinthEnv::LabyrinthEnv(LabMap map, double step_size, std::string id)
    : LabyrinthEnv(map, step_size, map.p_end, std::move(id)) {}

LabyrinthEnv::LabyrinthEnv(LabMap map, double step_size, double p_end, std::string id)
    : map_(std::move(map)), step_size_(step_size), p_end_(p_end), id_(std::move(id)) {
  if (!(step_size_ > 0.0) || !std::isfinite(step_size_)) throw std::invalid_argument("labyrinth: step_size must be > 0");
  if (!(p_end_ > 0.0 && p_end_ < 1.0)) throw std::invalid_argument("labyrinth: p_end must lie in (0, 1)");
  validate(map_);
}

StateSpace LabyrinthEnv::state_space() const { return StateSpace{0, Box{0.0, map_.width, 0.0, map_.height}}; }

State LabyrinthEnv::initial_state(Rng& rng) const {
  for (;;) {
    const double x = uniform01(rng) * map_.width;
    const double y = uniform01(rng) * map_.height;
    if (!map_.in_wall(x, y)) return State::point(x, y);
  }
}

State LabyrinthEnv::move(const State& s, double angle) const {
  const double x1 = s.x() + step_size_ * std::cos(angle);
  const double y1 = s.y() + step_size_ * std::sin(angle);
  if (x1 < 0.0 || x1 > map_.width || y1 < 0.0 || y1 > map_.height) return s;
  if (map_.segment_hits_wall(s.x(), s.y(), x1, y1)) return s;
  return State::point(x1, y1);
}

StepResult LabyrinthEnv::step(const State& s, int action, Rng& rng) const {
  if (action < 0 || action >= kAngleBins) throw std::out_of_range("labyrinth: invalid action");
  const double angle = (action + uniform01(rng)) * (2.0 * std::numbers::pi / kAngleBins);
  State next = move(s, angle);
  const double reward = map_.in_goal(next.x(), next.y()) ? map_.reward : 0.0;
  const bool terminal = uniform01(rng) < p_end_;
  return {std::move(next), reward, terminal};
}

bool LabyrinthEnv::is_free(const State& s) const {
  return !s.is_discrete() && s.x() >= 0.0 && s.x() <= map_.width && s.y() >= 0.0 && s.y() <= map_.height &&
         !map_.in_wall(s.x(), s.y());
}

int UniformAnglePolicy::action(const State&, Rng& rng) const {
  return static_cast<int>(uniform_index(rng, kAngleBins));
}

Scenario make_labyrinth_scenario(LabMap map, double step_size, std::string id) {
  return {std::make_shared<LabyrinthEnv>(std::move(map), step_size, std::move(id)),
          std::make_shared<UniformAnglePolicy>()};
}

}  // namespace adaptd
