#pragma once

// Deterministic 2-D world with static and moving obstacles and a unicycle
// robot driven by A* waypoints and VFH+ steering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dotnav/error.hpp"
#include "dotnav/geometry.hpp"
#include "dotnav/planning.hpp"
#include "dotnav/random.hpp"

namespace dotnav {

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

struct Circle {
  double x = 0, y = 0, r = 0;
};

using Shape = std::variant<Rect, Circle>;

/// Signed distance from a point to a shape: negative inside.
inline double signed_distance(const Shape& shape, double px, double py) {
  if (const auto* c = std::get_if<Circle>(&shape)) return std::hypot(px - c->x, py - c->y) - c->r;
  const auto& r = std::get<Rect>(shape);
  const double dx = std::max({r.x0 - px, 0.0, px - r.x1});
  const double dy = std::max({r.y0 - py, 0.0, py - r.y1});
  if (dx > 0.0 || dy > 0.0) return std::hypot(dx, dy);
  return -std::min({px - r.x0, r.x1 - px, py - r.y0, r.y1 - py});
}

inline Shape translated(const Shape& shape, double dx, double dy) {
  if (const auto* c = std::get_if<Circle>(&shape)) return Circle{c->x + dx, c->y + dy, c->r};
  const auto& r = std::get<Rect>(shape);
  return Rect{r.x0 + dx, r.y0 + dy, r.x1 + dx, r.y1 + dy};
}

/// Moving obstacle: `shape` is given relative to the mover's position, which
/// travels the closed waypoint loop at constant speed starting `phase` meters in.
struct Mover {
  Shape shape = Circle{0, 0, 0.2};
  std::vector<Vec2> waypoints;
  double speed = 0.3;  // m/s
  double phase = 0.0;  // meters along the loop at t = 0

  double loop_length() const {
    double len = 0.0;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
      len += (waypoints[(i + 1) % waypoints.size()] - waypoints[i]).norm();
    }
    return len;
  }

  Vec2 position_at(double t) const {
    if (waypoints.empty()) return Vec2::Zero();
    const double len = loop_length();
    if (waypoints.size() == 1 || len <= 0.0) return waypoints.front();
    double s = std::fmod(phase + speed * t, len);
    if (s < 0) s += len;
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
      const Vec2& a = waypoints[i];
      const Vec2& b = waypoints[(i + 1) % waypoints.size()];
      const double seg = (b - a).norm();
      if (s <= seg && seg > 0.0) return a + (b - a) * (s / seg);
      s -= seg;
    }
    return waypoints.front();
  }

  Shape shape_at(double t) const {
    const Vec2 p = position_at(t);
    return translated(shape, p.x(), p.y());
  }
};

/// Rectangular arena [0, width] x [0, height].
struct World {
  double width = 10.0;
  double height = 10.0;
  std::vector<Shape> obstacles;
  std::vector<Mover> movers;
  RobotPose2D start{1.0, 1.0, 0.0};
  Vec2 goal{9.0, 9.0};
  double goal_radius = 0.3;
  double min_goal_clearance = 0.0;  // recorded generation parameter

  /// Distance from a point to the nearest static obstacle surface.
  double static_clearance(double x, double y) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : obstacles) d = std::min(d, signed_distance(o, x, y));
    return d;
  }

  /// Clearance of a disc of radius r at time t against obstacles, movers and walls.
  double disc_clearance(double x, double y, double r, double t) const {
    double d = std::min({x, width - x, y, height - y});
    d = std::min(d, static_clearance(x, y));
    for (const auto& m : movers) d = std::min(d, signed_distance(m.shape_at(t), x, y));
    return d - r;
  }
};

struct RobotState {
  double x = 0, y = 0, theta = 0;
  double v = 0;  // m/s
  double w = 0;  // rad/s
  double radius = 0.25;
};

struct SimConfig {
  double dt = 0.05;
  int max_steps = 3000;
  double v_max = 0.8;
  double w_max = 1.5;
  double a_max = 1.0;      // m/s^2
  double alpha_max = 4.0;  // rad/s^2
  double robot_radius = 0.25;
  double grid_resolution = 0.1;
  double k_w = 2.0;
  double narrow_speed_scale = 0.5;
  double min_speed_scale = 0.25;  // floor of the obstacle-density slowdown
  double max_substep_travel = 0.05;  // meters between collision checks
  double waypoint_spacing = 0.5;
  int replan_blocked_steps = 3;
  double occupied_threshold = 0.5;
  double inflation_margin = 0.25;  // added to robot_radius for the A* grid
  // Movers are drawn into the planning grid at their predicted positions
  // over this look-ahead, sampled every mover_sample seconds.
  double mover_horizon = 1.5;
  double mover_sample = 0.25;
  VfhConfig vfh;
};

struct Command {
  double v = 0.0;
  double w = 0.0;
};

struct StepResult {
  RobotState state;
  bool collision = false;
  double clearance = 0.0;  // smallest clearance seen during the step
};

/// Advances the robot by dt from time t. Commands are limited by the
/// acceleration bounds, then by v_max / w_max; the unicycle model is
/// integrated in substeps of at most max_substep_travel and the disc is
/// checked against the world (movers at the substep time) after each.
inline StepResult step(const World& world, const RobotState& robot, Command cmd, double dt, double t,
                       const SimConfig& cfg) {
  if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
  StepResult out;
  RobotState s = robot;
  s.v = std::clamp(cmd.v, robot.v - cfg.a_max * dt, robot.v + cfg.a_max * dt);
  s.v = std::clamp(s.v, -cfg.v_max, cfg.v_max);
  s.w = std::clamp(cmd.w, robot.w - cfg.alpha_max * dt, robot.w + cfg.alpha_max * dt);
  s.w = std::clamp(s.w, -cfg.w_max, cfg.w_max);
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(s.v) * dt / cfg.max_substep_travel - 1e-12)));
  const double h = dt / n;
  out.clearance = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= n; ++j) {
    s.x += s.v * std::cos(s.theta) * h;
    s.y += s.v * std::sin(s.theta) * h;
    if (s.w != 0.0) s.theta = wrap_angle(s.theta + s.w * h);
    const double c = world.disc_clearance(s.x, s.y, s.radius, t + j * h);
    out.clearance = std::min(out.clearance, c);
    if (c <= 0.0) {
      out.collision = true;
      break;
    }
  }
  out.state = s;
  return out;
}

// ---------------------------------------------------------------------------
// Rasterization

inline void rasterize_shape(OccupancyGrid& grid, const Shape& shape) {
  const double res = grid.resolution();
  double x0, y0, x1, y1;
  if (const auto* c = std::get_if<Circle>(&shape)) {
    x0 = c->x - c->r;
    y0 = c->y - c->r;
    x1 = c->x + c->r;
    y1 = c->y + c->r;
  } else {
    const auto& r = std::get<Rect>(shape);
    x0 = r.x0;
    y0 = r.y0;
    x1 = r.x1;
    y1 = r.y1;
  }
  const Cell lo = grid.cell_at(x0, y0), hi = grid.cell_at(x1, y1);
  for (int row = std::max(0, lo.row); row <= std::min(grid.height() - 1, hi.row); ++row) {
    for (int col = std::max(0, lo.col); col <= std::min(grid.width() - 1, hi.col); ++col) {
      // Cell square overlaps the shape when its nearest point lies inside.
      const double cx0 = grid.origin_x() + col * res, cy0 = grid.origin_y() + row * res;
      double inside;
      if (const auto* c = std::get_if<Circle>(&shape)) {
        const double nx = std::clamp(c->x, cx0, cx0 + res), ny = std::clamp(c->y, cy0, cy0 + res);
        inside = std::hypot(nx - c->x, ny - c->y) - c->r;
      } else {
        const auto& r = std::get<Rect>(shape);
        inside = (cx0 + res > r.x0 && cx0 < r.x1 && cy0 + res > r.y0 && cy0 < r.y1) ? -1.0 : 1.0;
      }
      if (inside < 0.0) grid.set(col, row, 1.0);
    }
  }
}

/// Occupancy of the world at time t, walls included as the outer cell ring.
inline OccupancyGrid rasterize_world(const World& world, double resolution, double t, bool include_movers = true) {
  const int w = static_cast<int>(std::ceil(world.width / resolution - 1e-9));
  const int h = static_cast<int>(std::ceil(world.height / resolution - 1e-9));
  OccupancyGrid grid(w, h, resolution);
  for (int c = 0; c < w; ++c) {
    grid.set(c, 0, 1.0);
    grid.set(c, h - 1, 1.0);
  }
  for (int r = 0; r < h; ++r) {
    grid.set(0, r, 1.0);
    grid.set(w - 1, r, 1.0);
  }
  for (const auto& o : world.obstacles) rasterize_shape(grid, o);
  if (include_movers) {
    for (const auto& m : world.movers) rasterize_shape(grid, m.shape_at(t));
  }
  return grid;
}

/// Marks every cell whose centre lies within `radius` of an occupied cell centre.
inline OccupancyGrid inflate(const OccupancyGrid& grid, double radius, double occupied_threshold) {
  OccupancyGrid out = grid;
  const int k = static_cast<int>(std::ceil(radius / grid.resolution()));
  // Small slack so a radius that is a whole number of cells keeps the boundary cell.
  const double r2 = (radius / grid.resolution()) * (radius / grid.resolution()) + 1e-9;
  for (int row = 0; row < grid.height(); ++row) {
    for (int col = 0; col < grid.width(); ++col) {
      if (grid.at(col, row) < occupied_threshold) continue;
      for (int dr = -k; dr <= k; ++dr) {
        for (int dc = -k; dc <= k; ++dc) {
          if (dr * dr + dc * dc > r2) continue;
          const Cell c{col + dc, row + dr};
          if (out.contains(c)) out.set(c, 1.0);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Episodes

enum class Outcome { reached, collided, timeout };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::reached: return "reached";
    case Outcome::collided: return "collided";
    case Outcome::timeout: return "timeout";
  }
  return "timeout";
}

struct EpisodeResult {
  Outcome outcome = Outcome::timeout;
  int steps = 0;
  double path_length = 0.0;  // meters
  double min_clearance = std::numeric_limits<double>::infinity();
  int replans = 0;
  double final_distance = 0.0;  // to the goal

  bool operator==(const EpisodeResult&) const = default;
};

struct StepRecord {
  double t = 0, x = 0, y = 0, theta = 0, v = 0, w = 0;
  double heading = 0;
  bool blocked = false;
  bool replanned = false;
};

inline nlohmann::ordered_json to_json(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["x"] = r.x;
  j["y"] = r.y;
  j["theta"] = r.theta;
  j["v"] = r.v;
  j["w"] = r.w;
  j["heading"] = r.heading;
  j["blocked"] = r.blocked;
  j["replanned"] = r.replanned;
  return j;
}

inline nlohmann::ordered_json to_json(const EpisodeResult& r) {
  nlohmann::ordered_json j;
  j["outcome"] = to_string(r.outcome);
  j["steps"] = r.steps;
  j["path_length"] = r.path_length;
  j["min_clearance"] = r.min_clearance;
  j["replans"] = r.replans;
  j["final_distance"] = r.final_distance;
  return j;
}

/// Start disc or goal point inside an obstacle or outside the arena.
inline void validate_world(const World& world, double robot_radius) {
  const auto& s = world.start;
  if (world.disc_clearance(s.x, s.y, robot_radius, 0.0) <= 0.0) throw InvalidWorld("start pose is in collision");
  const auto& g = world.goal;
  if (g.x() <= 0.0 || g.y() <= 0.0 || g.x() >= world.width || g.y() >= world.height) {
    throw InvalidWorld("goal outside the arena");
  }
  if (world.static_clearance(g.x(), g.y()) <= 0.0) throw InvalidWorld("goal lies inside an obstacle");
}

namespace detail {

// A* waypoints from (x, y) to the goal on the inflated grid; empty on failure.
inline std::vector<Vec2> plan_waypoints(const World& world, const OccupancyGrid& raw, double x, double y,
                                        const SimConfig& cfg) {
  OccupancyGrid grid = inflate(raw, cfg.robot_radius + cfg.inflation_margin, cfg.occupied_threshold);
  const Cell start = grid.cell_at(x, y), goal = grid.cell_at(world.goal.x(), world.goal.y());
  if (!grid.contains(start) || !grid.contains(goal)) return {};
  // Endpoints only need to be free in the raw grid; inflation near them is cleared.
  if (raw.at(start) >= cfg.occupied_threshold || raw.at(goal) >= cfg.occupied_threshold) return {};
  grid.set(start, 0.0);
  grid.set(goal, 0.0);
  PlanResult plan;
  try {
    plan = astar(grid, start, goal, cfg.occupied_threshold);
  } catch (const NoPath&) {
    return {};
  }
  const int stride = std::max(1, static_cast<int>(std::lround(cfg.waypoint_spacing / grid.resolution())));
  std::vector<Vec2> wps;
  for (std::size_t i = static_cast<std::size_t>(stride); i < plan.path.size(); i += static_cast<std::size_t>(stride)) {
    wps.emplace_back(grid.center_x(plan.path[i].col), grid.center_y(plan.path[i].row));
  }
  wps.push_back(world.goal);
  return wps;
}

}  // namespace detail

/// Runs one navigation episode. `seed` shifts the movers' starting phases;
/// with equal inputs the result and the step log are bit-identical.
inline EpisodeResult run_episode(const World& input_world, const SimConfig& input_cfg, std::uint64_t seed,
                                 std::vector<StepRecord>* log = nullptr) {
  SimConfig cfg = input_cfg;
  cfg.vfh.robot_radius = cfg.robot_radius;
  validate_world(input_world, cfg.robot_radius);

  World world = input_world;
  Rng rng(seed);
  for (auto& m : world.movers) m.phase += rng.uniform(0.0, std::max(0.0, m.loop_length()));

  RobotState robot;
  robot.x = world.start.x;
  robot.y = world.start.y;
  robot.theta = world.start.theta;
  robot.radius = cfg.robot_radius;

  const OccupancyGrid static_grid = rasterize_world(world, cfg.grid_resolution, 0.0, false);
  auto current_grid = [&](double t) {
    OccupancyGrid g = static_grid;
    const int samples = static_cast<int>(std::floor(cfg.mover_horizon / cfg.mover_sample + 1e-9));
    for (const auto& m : world.movers) {
      for (int j = 0; j <= samples; ++j) rasterize_shape(g, m.shape_at(t + j * cfg.mover_sample));
    }
    return g;
  };

  EpisodeResult result;
  result.min_clearance = world.disc_clearance(robot.x, robot.y, robot.radius, 0.0);
  std::vector<Vec2> waypoints = detail::plan_waypoints(world, current_grid(0.0), robot.x, robot.y, cfg);
  std::size_t wp = 0;
  int blocked_run = 0;
  double previous_heading = robot.theta;
  std::optional<PolarHistogram> previous_binary;
  double t = 0.0;

  for (int k = 0;; ++k) {
    const double dist_goal = std::hypot(world.goal.x() - robot.x, world.goal.y() - robot.y);
    result.final_distance = dist_goal;
    if (dist_goal <= world.goal_radius) {
      result.outcome = Outcome::reached;
      break;
    }
    if (k >= cfg.max_steps) {
      result.outcome = Outcome::timeout;
      break;
    }
    const OccupancyGrid grid = current_grid(t);

    auto dist_to = [&](const Vec2& p) { return std::hypot(p.x() - robot.x, p.y() - robot.y); };
    while (!waypoints.empty() && wp + 1 < waypoints.size() && dist_to(waypoints[wp]) < cfg.waypoint_spacing) ++wp;
    const bool diverged = !waypoints.empty() && dist_to(waypoints[wp]) > 2.0 * cfg.waypoint_spacing;
    bool replanned = false;
    if (waypoints.empty() || diverged || blocked_run >= cfg.replan_blocked_steps) {
      auto fresh = detail::plan_waypoints(world, grid, robot.x, robot.y, cfg);
      replanned = true;
      ++result.replans;
      blocked_run = 0;
      if (!fresh.empty()) {
        waypoints = std::move(fresh);
        wp = 0;
      }
    }
    const Vec2 target = waypoints.empty() ? world.goal : waypoints[wp];
    const double target_dir = std::atan2(target.y() - robot.y, target.x() - robot.x);

    const MotionState ms{robot.x, robot.y, robot.theta, robot.v, robot.w};
    const VfhStep vfh = vfh_step(grid, ms, turning_radius(robot.v, cfg.w_max), target_dir, previous_heading,
                                 previous_binary ? &*previous_binary : nullptr, cfg.vfh);
    previous_binary = vfh.binary;

    Command cmd;
    double heading = target_dir;
    if (vfh.decision.blocked) {
      ++blocked_run;
      cmd.v = 0.0;
      cmd.w = std::clamp(cfg.k_w * wrap_angle(target_dir - robot.theta), -cfg.w_max, cfg.w_max);
    } else {
      blocked_run = 0;
      heading = vfh.decision.heading;
      previous_heading = heading;
      const double err = wrap_angle(heading - robot.theta);
      cmd.w = cfg.k_w * err;
      double v = cfg.v_max * std::max(0.0, std::cos(err));
      if (vfh.decision.narrow) v *= cfg.narrow_speed_scale;
      const double density = vfh.primary[static_cast<std::size_t>(cfg.vfh.sector_of(heading))];
      v *= std::max(cfg.min_speed_scale, 1.0 - density / cfg.vfh.tau_high);
      cmd.v = v;
    }

    const StepResult sr = step(world, robot, cmd, cfg.dt, t, cfg);
    result.path_length += std::hypot(sr.state.x - robot.x, sr.state.y - robot.y);
    result.min_clearance = std::min(result.min_clearance, sr.clearance);
    robot = sr.state;
    t = (k + 1) * cfg.dt;
    result.steps = k + 1;
    if (log) {
      log->push_back({t, robot.x, robot.y, robot.theta, robot.v, robot.w, heading, vfh.decision.blocked, replanned});
    }
    if (sr.collision) {
      result.outcome = Outcome::collided;
      result.final_distance = std::hypot(world.goal.x() - robot.x, world.goal.y() - robot.y);
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Scene generation

struct SceneParams {
  int n_obstacles = 8;
  int n_movers = 2;
  double width = 10.0;
  double height = 10.0;
  double min_goal_clearance = 1.0;
  RobotPose2D start{1.0, 1.0, std::numbers::pi / 4.0};
  Vec2 goal{9.0, 9.0};
  double goal_radius = 0.3;
  // Obstacles drawn from a band just outside min_goal_clearance, so the
  // clearance parameter controls how crowded the goal is.
  int near_goal = 2;
  double near_goal_band = 0.5;  // meters beyond min_goal_clearance
  double start_clearance = 0.75;  // obstacle-free margin around the start disc
  double robot_radius = 0.25;
  double grid_resolution = 0.1;
  int max_attempts = 2000;
};

namespace detail {

inline bool goal_reachable(const World& world, const SceneParams& p) {
  SimConfig cfg;
  cfg.robot_radius = p.robot_radius;
  cfg.grid_resolution = p.grid_resolution;
  const OccupancyGrid raw = rasterize_world(world, p.grid_resolution, 0.0, false);
  return !plan_waypoints(world, raw, world.start.x, world.start.y, cfg).empty();
}

inline double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double u = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (a + u * ab - p).norm();
}

inline bool shape_inside(const Shape& s, double w, double h) {
  if (const auto* c = std::get_if<Circle>(&s)) return c->x - c->r > 0 && c->y - c->r > 0 && c->x + c->r < w && c->y + c->r < h;
  const auto& r = std::get<Rect>(s);
  return r.x0 > 0 && r.y0 > 0 && r.x1 < w && r.y1 < h;
}

}  // namespace detail

/// Rejection-samples a reproducible scene: every obstacle leaves the start
/// disc and goal clear and keeps the goal reachable.
inline World generate_scene(std::uint64_t seed, const SceneParams& p) {
  World world;
  world.width = p.width;
  world.height = p.height;
  world.start = p.start;
  world.goal = p.goal;
  world.goal_radius = p.goal_radius;
  world.min_goal_clearance = p.min_goal_clearance;
  validate_world(world, p.robot_radius);
  Rng rng(seed);

  for (int i = 0; i < p.n_obstacles; ++i) {
    const bool near = i < p.near_goal;
    bool placed = false;
    for (int attempt = 0; attempt < p.max_attempts && !placed; ++attempt) {
      Vec2 centre;
      if (near) {
        const double ang = rng.uniform(0.0, kTwoPi);
        const double dist = p.min_goal_clearance + rng.uniform(0.1, 1.2 + p.near_goal_band);
        centre = p.goal + dist * Vec2(std::cos(ang), std::sin(ang));
      } else {
        centre = Vec2(rng.uniform(0.0, p.width), rng.uniform(0.0, p.height));
      }
      Shape shape;
      if (rng.uniform() < 0.5) {
        const double hw = rng.uniform(0.15, 0.6), hh = rng.uniform(0.15, 0.6);
        shape = Rect{centre.x() - hw, centre.y() - hh, centre.x() + hw, centre.y() + hh};
      } else {
        shape = Circle{centre.x(), centre.y(), rng.uniform(0.15, 0.5)};
      }
      if (!detail::shape_inside(shape, p.width, p.height)) continue;
      const double goal_gap = signed_distance(shape, p.goal.x(), p.goal.y());
      if (goal_gap < p.min_goal_clearance) continue;
      if (near && goal_gap > p.min_goal_clearance + p.near_goal_band) continue;
      if (signed_distance(shape, p.start.x, p.start.y) < p.robot_radius + p.start_clearance) continue;
      world.obstacles.push_back(shape);
      if (!detail::goal_reachable(world, p)) {
        world.obstacles.pop_back();
        continue;
      }
      placed = true;
    }
    if (!placed) throw PlacementFailure("could not place obstacle " + std::to_string(i));
  }

  for (int i = 0; i < p.n_movers; ++i) {
    bool placed = false;
    for (int attempt = 0; attempt < p.max_attempts && !placed; ++attempt) {
      const Vec2 a(rng.uniform(0.5, p.width - 0.5), rng.uniform(0.5, p.height - 0.5));
      const Vec2 b(rng.uniform(0.5, p.width - 0.5), rng.uniform(0.5, p.height - 0.5));
      const double speed = rng.uniform(0.2, 0.4);
      if ((b - a).norm() < 2.0) continue;
      const Vec2 start(p.start.x, p.start.y);
      if (detail::segment_distance(a, b, start) < 1.5 || detail::segment_distance(a, b, p.goal) < 1.5) continue;
      Mover m;
      m.shape = Circle{0.0, 0.0, 0.2};
      m.waypoints = {a, b};
      m.speed = speed;
      world.movers.push_back(std::move(m));
      placed = true;
    }
    if (!placed) throw PlacementFailure("could not place mover " + std::to_string(i));
  }
  return world;
}

// ---------------------------------------------------------------------------
// Scenario files

inline nlohmann::ordered_json shape_to_json(const Shape& s) {
  nlohmann::ordered_json j;
  if (const auto* c = std::get_if<Circle>(&s)) {
    j["type"] = "circle";
    j["x"] = c->x;
    j["y"] = c->y;
    j["r"] = c->r;
  } else {
    const auto& r = std::get<Rect>(s);
    j["type"] = "rect";
    j["x0"] = r.x0;
    j["y0"] = r.y0;
    j["x1"] = r.x1;
    j["y1"] = r.y1;
  }
  return j;
}

inline Shape shape_from_json(const nlohmann::json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "circle") return Circle{j.at("x").get<double>(), j.at("y").get<double>(), j.at("r").get<double>()};
  if (type == "rect") {
    Rect r{j.at("x0").get<double>(), j.at("y0").get<double>(), j.at("x1").get<double>(), j.at("y1").get<double>()};
    if (!(r.x1 > r.x0) || !(r.y1 > r.y0)) throw FormatError("rect with non-positive extent");
    return r;
  }
  throw FormatError("unknown shape type '" + type + "'");
}

inline nlohmann::ordered_json to_json(const World& w) {
  nlohmann::ordered_json j;
  j["bounds"] = {w.width, w.height};
  j["start"] = {{"x", w.start.x}, {"y", w.start.y}, {"theta", w.start.theta}};
  j["goal"] = {{"x", w.goal.x()}, {"y", w.goal.y()}};
  j["goal_radius"] = w.goal_radius;
  auto& obs = j["obstacles"] = nlohmann::ordered_json::array();
  for (const auto& o : w.obstacles) obs.push_back(shape_to_json(o));
  auto& movers = j["movers"] = nlohmann::ordered_json::array();
  for (const auto& m : w.movers) {
    nlohmann::ordered_json jm;
    jm["shape"] = shape_to_json(m.shape);
    jm["speed"] = m.speed;
    jm["phase"] = m.phase;
    auto& wps = jm["waypoints"] = nlohmann::ordered_json::array();
    for (const auto& p : m.waypoints) wps.push_back({p.x(), p.y()});
    movers.push_back(std::move(jm));
  }
  j["clearances"] = {{"min_goal_clearance", w.min_goal_clearance}};
  return j;
}

inline World world_from_json(const nlohmann::json& j) {
  try {
    World w;
    w.width = j.at("bounds").at(0).get<double>();
    w.height = j.at("bounds").at(1).get<double>();
    if (!(w.width > 0.0) || !(w.height > 0.0)) throw FormatError("bounds must be positive");
    w.start.x = j.at("start").at("x").get<double>();
    w.start.y = j.at("start").at("y").get<double>();
    w.start.theta = j.at("start").value("theta", 0.0);
    w.goal = Vec2(j.at("goal").at("x").get<double>(), j.at("goal").at("y").get<double>());
    w.goal_radius = j.value("goal_radius", 0.3);
    for (const auto& o : j.value("obstacles", nlohmann::json::array())) w.obstacles.push_back(shape_from_json(o));
    for (const auto& jm : j.value("movers", nlohmann::json::array())) {
      Mover m;
      m.shape = shape_from_json(jm.at("shape"));
      m.speed = jm.at("speed").get<double>();
      m.phase = jm.value("phase", 0.0);
      for (const auto& p : jm.at("waypoints")) m.waypoints.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      w.movers.push_back(std::move(m));
    }
    if (j.contains("clearances")) w.min_goal_clearance = j.at("clearances").value("min_goal_clearance", 0.0);
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("scenario: ") + e.what());
  }
}

}  // namespace dotnav
