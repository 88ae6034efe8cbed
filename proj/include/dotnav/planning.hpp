#pragma once

// Global A* planning on an occupancy grid and VFH+ local steering.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <vector>

#include "dotnav/dataset_io.hpp"
#include "dotnav/error.hpp"

namespace dotnav {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  if (a > -std::numbers::pi && a <= std::numbers::pi) return a;  // exact for in-range input
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

/// Unsigned angular distance in [0, pi].
inline double angle_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

struct Cell {
  int col = 0;
  int row = 0;

  bool operator==(const Cell&) const = default;
};

/// Row-major occupancy certainties in [0, 1]. Cell (c, r) covers world
/// [origin_x + c*res, origin_x + (c+1)*res) x [origin_y + r*res, ...).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double resolution, double origin_x = 0.0, double origin_y = 0.0)
      : width_(width), height_(height), resolution_(resolution), origin_x_(origin_x), origin_y_(origin_y),
        cells_(static_cast<std::size_t>(std::max(0, width)) * static_cast<std::size_t>(std::max(0, height)), 0.0f) {
    if (width <= 0 || height <= 0) throw InvalidArgument("grid dimensions must be positive");
    if (!(resolution > 0.0)) throw InvalidArgument("grid resolution must be positive");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }

  bool contains(Cell c) const { return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_; }

  std::size_t index(Cell c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

  float at(Cell c) const { return cells_[index(c)]; }
  float at(int col, int row) const { return cells_[static_cast<std::size_t>(row) * width_ + col]; }

  void set(Cell c, double v) { cells_[index(c)] = static_cast<float>(std::clamp(v, 0.0, 1.0)); }
  void set(int col, int row, double v) { set(Cell{col, row}, v); }

  const std::vector<float>& cells() const { return cells_; }

  double center_x(int col) const { return origin_x_ + (col + 0.5) * resolution_; }
  double center_y(int row) const { return origin_y_ + (row + 0.5) * resolution_; }

  Cell cell_at(double x, double y) const {
    return {static_cast<int>(std::floor((x - origin_x_) / resolution_)),
            static_cast<int>(std::floor((y - origin_y_) / resolution_))};
  }

  bool operator==(const OccupancyGrid&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  double origin_x_ = 0.0;
  double origin_y_ = 0.0;
  std::vector<float> cells_;
};

/// Text grid: header `cols rows resolution`, then cols*rows values row-major.
inline OccupancyGrid parse_grid(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::pair<std::size_t, std::string>> tokens;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    for (auto tok : detail::split_ws(line)) tokens.emplace_back(lineno, std::string(tok));
  }
  if (tokens.size() < 3) throw ParseError(lineno, "grid header `cols rows resolution` missing");
  int cols = 0, rows = 0;
  double res = 0.0;
  try {
    cols = std::stoi(tokens[0].second);
    rows = std::stoi(tokens[1].second);
  } catch (const std::exception&) {
    throw ParseError(tokens[0].first, "bad grid dimensions");
  }
  if (!detail::parse_double(tokens[2].second, res) || !(res > 0.0) || cols <= 0 || rows <= 0) {
    throw ParseError(tokens[0].first, "bad grid header");
  }
  const std::size_t n = static_cast<std::size_t>(cols) * rows;
  if (tokens.size() - 3 != n) {
    throw ParseError(tokens.back().first, "expected " + std::to_string(n) + " cell values, found " +
                                              std::to_string(tokens.size() - 3));
  }
  OccupancyGrid grid(cols, rows, res);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0.0;
    if (!detail::parse_double(tokens[3 + i].second, v)) throw ParseError(tokens[3 + i].first, "bad cell value");
    grid.set(static_cast<int>(i % cols), static_cast<int>(i / cols), v);
  }
  return grid;
}

inline OccupancyGrid parse_grid(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_grid(in);
}

inline std::string write_grid(const OccupancyGrid& grid) {
  std::string out = std::to_string(grid.width()) + " " + std::to_string(grid.height()) + " " +
                    format_number(grid.resolution()) + "\n";
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      if (c) out += ' ';
      out += format_number(grid.at(c, r));
    }
    out += '\n';
  }
  return out;
}

/// PGM import: 0 = free, 255 = occupied; image row 0 becomes grid row 0.
inline OccupancyGrid grid_from_image(const GrayImage& img, double resolution) {
  OccupancyGrid grid(img.width, img.height, resolution);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) grid.set(c, r, img.at(c, r) / 255.0);
  }
  return grid;
}

inline GrayImage grid_to_image(const OccupancyGrid& grid) {
  GrayImage img(grid.width(), grid.height());
  for (int r = 0; r < grid.height(); ++r) {
    for (int c = 0; c < grid.width(); ++c) {
      img.at(c, r) = static_cast<std::uint8_t>(std::lround(grid.at(c, r) * 255.0f));
    }
  }
  return img;
}

// ---------------------------------------------------------------------------
// A*

/// Search node: f = g + h, all in meters.
struct PlanNode {
  Cell cell;
  double g = 0.0;
  double h = 0.0;
  double f = 0.0;
};

struct PlanResult {
  std::vector<Cell> path;  // start .. goal inclusive
  double cost = 0.0;       // meters
  std::size_t expanded = 0;
};

/// Octile distance, admissible and consistent for 8-connected unit/sqrt2 moves.
inline double octile_distance(Cell a, Cell b, double resolution) {
  const int dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
  return resolution * (std::max(dx, dy) + (std::numbers::sqrt2 - 1.0) * std::min(dx, dy));
}

/// Cost of a path given as counts of cardinal and diagonal steps. Computed
/// from counts so equal-length paths report bit-identical costs.
inline double step_cost(std::int64_t cardinal, std::int64_t diagonal, double resolution) {
  return resolution * (static_cast<double>(cardinal) + static_cast<double>(diagonal) * std::numbers::sqrt2);
}

/// 8-connected A*. Cells with certainty >= occupied_threshold are blocked and
/// diagonal moves may not cut the corner of a blocked cell. Open-list ties
/// break on lower f, then higher g, then row-major cell index.
inline PlanResult astar(const OccupancyGrid& grid, Cell start, Cell goal, double occupied_threshold = 0.5) {
  auto free = [&](Cell c) { return grid.contains(c) && grid.at(c) < occupied_threshold; };
  if (!grid.contains(start) || !grid.contains(goal)) throw InvalidEndpoint("start or goal outside the grid");
  if (!free(start) || !free(goal)) throw InvalidEndpoint("start or goal is occupied");

  const double res = grid.resolution();
  const std::size_t n = grid.cells().size();
  struct Score {
    std::int64_t cardinal = 0, diagonal = 0;
  };
  std::vector<Score> counts(n);
  std::vector<double> g(n, std::numeric_limits<double>::infinity());
  std::vector<std::int64_t> parent(n, -1);
  std::vector<char> closed(n, 0);

  struct Entry {
    double f, g;
    std::size_t idx;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.idx > b.idx;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  const std::size_t s = grid.index(start), t = grid.index(goal);
  g[s] = 0.0;
  open.push({octile_distance(start, goal, res), 0.0, s});

  PlanResult result;
  static constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  static constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.idx] || e.g > g[e.idx]) continue;
    closed[e.idx] = 1;
    ++result.expanded;
    if (e.idx == t) break;
    const Cell c{static_cast<int>(e.idx % grid.width()), static_cast<int>(e.idx / grid.width())};
    for (int k = 0; k < 8; ++k) {
      const Cell nb{c.col + kDx[k], c.row + kDy[k]};
      if (!free(nb)) continue;
      const bool diagonal = k >= 4;
      if (diagonal && (!free(Cell{c.col + kDx[k], c.row}) || !free(Cell{c.col, c.row + kDy[k]}))) continue;
      const std::size_t ni = grid.index(nb);
      if (closed[ni]) continue;
      Score sc = counts[e.idx];
      (diagonal ? sc.diagonal : sc.cardinal) += 1;
      const double ng = step_cost(sc.cardinal, sc.diagonal, res);
      if (ng < g[ni]) {
        g[ni] = ng;
        counts[ni] = sc;
        parent[ni] = static_cast<std::int64_t>(e.idx);
        PlanNode node{nb, ng, octile_distance(nb, goal, res), 0.0};
        node.f = node.g + node.h;
        open.push({node.f, node.g, ni});
      }
    }
  }
  if (!closed[t]) throw NoPath("goal unreachable from start");
  for (std::int64_t i = static_cast<std::int64_t>(t); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    result.path.push_back({static_cast<int>(i % grid.width()), static_cast<int>(i / grid.width())});
  }
  std::reverse(result.path.begin(), result.path.end());
  result.cost = g[t];
  return result;
}

// ---------------------------------------------------------------------------
// VFH+

struct VfhConfig {
  int sectors = 72;
  double window_radius = 2.0;  // meters
  double robot_radius = 0.25;
  double safety_margin = 0.1;
  // Magnitude m = c^2 (a - b d^2); b is pinned so m vanishes at the window edge.
  double a = 1000.0;
  double tau_low = 2000.0;
  double tau_high = 4000.0;
  int s_max = 16;  // sectors
  double mu_target = 5.0;
  double mu_heading = 2.0;
  double mu_previous = 2.0;
  double blocking_threshold = 0.5;  // certainty at which a cell limits turning

  double b() const { return a / (window_radius * window_radius); }
  double sector_width() const { return kTwoPi / sectors; }
  double sector_angle(double k) const { return k * sector_width(); }

  /// Sector whose centre is nearest to the angle.
  int sector_of(double angle) const {
    const double k = std::round(wrap_angle(angle) / sector_width());
    return static_cast<int>(((static_cast<long long>(k) % sectors) + sectors) % sectors);
  }
};

enum class HistogramStage { primary, binary, masked };

/// Densities per sector; sector k is centred on world angle k * 2pi / n.
struct PolarHistogram {
  std::vector<double> sectors;
  HistogramStage stage = HistogramStage::primary;

  std::size_t size() const { return sectors.size(); }
  double operator[](std::size_t k) const { return sectors[k]; }
};

struct RobotPose2D {
  double x = 0.0, y = 0.0, theta = 0.0;
};

/// Enlargement half-angle for a cell at distance d; pi/2 once the cell is
/// within the enlarged robot radius.
inline double enlargement_angle(double distance, double enlarged_radius) {
  if (distance <= enlarged_radius) return std::numbers::pi / 2.0;
  return std::asin(enlarged_radius / distance);
}

/// Primary polar obstacle density over the circular active window.
inline PolarHistogram build_polar_histogram(const OccupancyGrid& grid, const RobotPose2D& robot,
                                            const VfhConfig& cfg) {
  PolarHistogram hist;
  hist.sectors.assign(static_cast<std::size_t>(cfg.sectors), 0.0);
  const double res = grid.resolution();
  const double radius = cfg.window_radius;
  const double enlarged = cfg.robot_radius + cfg.safety_margin;
  const double alpha = cfg.sector_width();
  const double a = cfg.a, b = cfg.b();
  const Cell lo = grid.cell_at(robot.x - radius, robot.y - radius);
  const Cell hi = grid.cell_at(robot.x + radius, robot.y + radius);
  for (int r = std::max(0, lo.row); r <= std::min(grid.height() - 1, hi.row); ++r) {
    for (int c = std::max(0, lo.col); c <= std::min(grid.width() - 1, hi.col); ++c) {
      const double certainty = grid.at(c, r);
      if (certainty <= 0.0) continue;
      const double dx = grid.center_x(c) - robot.x, dy = grid.center_y(r) - robot.y;
      const double d2 = dx * dx + dy * dy;
      if (d2 >= radius * radius) continue;
      const double m = certainty * certainty * (a - b * d2);
      const double d = std::sqrt(d2);
      if (d < 1e-9 * res) {
        for (auto& s : hist.sectors) s += m;
        continue;
      }
      const double beta = std::atan2(dy, dx);
      const double gamma = enlargement_angle(d, enlarged);
      const auto k0 = static_cast<long long>(std::ceil((beta - gamma) / alpha - 1e-12));
      const auto k1 = static_cast<long long>(std::floor((beta + gamma) / alpha + 1e-12));
      for (long long k = k0; k <= k1 && k - k0 < cfg.sectors; ++k) {
        const auto idx = static_cast<std::size_t>(((k % cfg.sectors) + cfg.sectors) % cfg.sectors);
        hist.sectors[idx] += m;
      }
    }
  }
  return hist;
}

/// Hysteresis: 1 above tau_high, 0 below tau_low, otherwise the previous
/// binary value (1 when there is none).
inline PolarHistogram binarize_histogram(const PolarHistogram& primary, const PolarHistogram* previous_binary,
                                         double tau_low, double tau_high) {
  if (tau_low > tau_high) throw InvalidThresholds("tau_low exceeds tau_high");
  if (previous_binary && previous_binary->size() != primary.size()) {
    throw InvalidArgument("previous histogram has a different sector count");
  }
  PolarHistogram out;
  out.stage = HistogramStage::binary;
  out.sectors.resize(primary.size());
  for (std::size_t k = 0; k < primary.size(); ++k) {
    const double v = primary[k];
    if (v > tau_high) {
      out.sectors[k] = 1.0;
    } else if (v < tau_low) {
      out.sectors[k] = 0.0;
    } else {
      out.sectors[k] = previous_binary ? (*previous_binary)[k] : 1.0;
    }
  }
  return out;
}

struct MotionState {
  double x = 0.0, y = 0.0, theta = 0.0;
  double v = 0.0;  // m/s
  double w = 0.0;  // rad/s
};

/// Turning radius implied by the current speed at the maximum turn rate.
inline double turning_radius(double v, double w_max) { return std::abs(v) / w_max; }

/// Reachable heading range left after accounting for the turning circles.
/// Angles are relative to the robot heading, in (-pi, pi].
struct TurnLimits {
  std::optional<double> left;   // sectors at or beyond this relative angle are blocked
  std::optional<double> right;  // sectors at or below this relative angle are blocked
};

inline TurnLimits turn_limits(const OccupancyGrid& grid, const MotionState& state, double min_turn_radius,
                              const VfhConfig& cfg) {
  TurnLimits lim;
  const double r = min_turn_radius;
  const double reach = r + cfg.robot_radius + cfg.safety_margin;
  const double st = std::sin(state.theta), ct = std::cos(state.theta);
  const double lx = state.x - r * st, ly = state.y + r * ct;
  const double rx = state.x + r * st, ry = state.y - r * ct;
  const double radius = cfg.window_radius;
  const Cell lo = grid.cell_at(state.x - radius, state.y - radius);
  const Cell hi = grid.cell_at(state.x + radius, state.y + radius);
  for (int row = std::max(0, lo.row); row <= std::min(grid.height() - 1, hi.row); ++row) {
    for (int col = std::max(0, lo.col); col <= std::min(grid.width() - 1, hi.col); ++col) {
      if (grid.at(col, row) < cfg.blocking_threshold) continue;
      const double cx = grid.center_x(col), cy = grid.center_y(row);
      const double dx = cx - state.x, dy = cy - state.y;
      if (dx * dx + dy * dy >= radius * radius) continue;
      const double rel = wrap_angle(std::atan2(dy, dx) - state.theta);
      if (rel >= 0.0 && std::hypot(cx - lx, cy - ly) < reach) lim.left = std::min(lim.left.value_or(rel), rel);
      if (rel <= 0.0 && std::hypot(cx - rx, cy - ry) < reach) lim.right = std::max(lim.right.value_or(rel), rel);
    }
  }
  return lim;
}

/// Blocks sectors the robot cannot turn into without sweeping an obstacle.
/// Never unblocks a sector.
inline PolarHistogram mask_histogram(const PolarHistogram& binary, const OccupancyGrid& grid, const MotionState& state,
                                     double min_turn_radius, const VfhConfig& cfg) {
  PolarHistogram out = binary;
  out.stage = HistogramStage::masked;
  const TurnLimits lim = turn_limits(grid, state, min_turn_radius, cfg);
  if (!lim.left && !lim.right) return out;
  const double alpha = kTwoPi / static_cast<double>(binary.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double rel = wrap_angle(static_cast<double>(k) * alpha - state.theta);
    const bool blocked_left = lim.left && rel >= *lim.left;
    const bool blocked_right = lim.right && rel <= *lim.right;
    if (blocked_left || blocked_right) out.sectors[k] = 1.0;
  }
  return out;
}

struct Valley {
  int start = 0;  // rightmost sector (smallest angle, circularly)
  int width = 0;  // sectors
};

/// Maximal circular runs of free sectors. A fully free histogram is one
/// valley of full width starting at sector 0.
inline std::vector<Valley> find_valleys(const PolarHistogram& masked) {
  const int n = static_cast<int>(masked.size());
  std::vector<Valley> out;
  int first_blocked = -1;
  for (int k = 0; k < n; ++k) {
    if (masked[static_cast<std::size_t>(k)] != 0.0) {
      first_blocked = k;
      break;
    }
  }
  if (first_blocked < 0) {
    out.push_back({0, n});
    return out;
  }
  // Walk once around the circle starting just after a blocked sector.
  int run_start = -1, run_len = 0;
  for (int step = 1; step <= n; ++step) {
    const int k = (first_blocked + step) % n;
    if (masked[static_cast<std::size_t>(k)] == 0.0) {
      if (run_len == 0) run_start = k;
      ++run_len;
    } else if (run_len > 0) {
      out.push_back({run_start, run_len});
      run_len = 0;
    }
  }
  std::sort(out.begin(), out.end(), [](const Valley& a, const Valley& b) { return a.start < b.start; });
  return out;
}

struct SteeringDecision {
  double heading = 0.0;  // world frame, radians; ignored when blocked
  Valley valley;
  bool blocked = false;
  bool narrow = false;  // chosen valley narrower than s_max
};

struct SteeringCandidate {
  double angle = 0.0;
  double sector = 0.0;  // position in sector units, [0, n)
  Valley valley;
  bool narrow = false;
};

/// Candidate directions per valley: the centre of narrow valleys; for wide
/// valleys the two directions s_max/2 inside each border plus the target
/// itself when it falls in the valley.
inline std::vector<SteeringCandidate> steering_candidates(const PolarHistogram& masked, double target_direction,
                                                          const VfhConfig& cfg) {
  const int n = static_cast<int>(masked.size());
  const double alpha = kTwoPi / n;
  auto make = [&](double sector, const Valley& v, bool narrow) {
    double s = std::fmod(sector, static_cast<double>(n));
    if (s < 0) s += n;
    return SteeringCandidate{wrap_angle(s * alpha), s, v, narrow};
  };
  const int target_sector = static_cast<int>(
      ((static_cast<long long>(std::round(wrap_angle(target_direction) / alpha)) % n) + n) % n);
  std::vector<SteeringCandidate> out;
  for (const auto& v : find_valleys(masked)) {
    const int offset = ((target_sector - v.start) % n + n) % n;
    const bool target_inside = offset < v.width;
    if (v.width >= cfg.s_max) {
      if (v.width < n) {
        out.push_back(make(v.start + cfg.s_max / 2.0, v, false));
        out.push_back(make(v.start + v.width - 1 - cfg.s_max / 2.0, v, false));
      }
      if (target_inside) {
        const double ta = wrap_angle(target_direction);
        auto c = make(ta / alpha, v, false);
        c.angle = ta;  // exact, not rebuilt from the sector position
        out.push_back(c);
      }
    } else {
      out.push_back(make(v.start + (v.width - 1) / 2.0, v, true));
    }
  }
  return out;
}

inline double steering_cost(double candidate, double target, double heading, double previous, const VfhConfig& cfg) {
  return cfg.mu_target * angle_distance(candidate, target) + cfg.mu_heading * angle_distance(candidate, heading) +
         cfg.mu_previous * angle_distance(candidate, previous);
}

/// Picks the cheapest candidate direction; ties go to the smaller distance to
/// the target, then the smaller sector position.
inline SteeringDecision select_steering(const PolarHistogram& masked, double target_direction, double current_heading,
                                        double previous_heading, const VfhConfig& cfg) {
  SteeringDecision best;
  const auto cands = steering_candidates(masked, target_direction, cfg);
  if (cands.empty()) {
    best.blocked = true;
    return best;
  }
  double best_cost = std::numeric_limits<double>::infinity();
  double best_target_gap = 0.0, best_sector = 0.0;
  bool have = false;
  for (const auto& c : cands) {
    const double cost = steering_cost(c.angle, target_direction, current_heading, previous_heading, cfg);
    const double gap = angle_distance(c.angle, target_direction);
    bool better = !have || cost < best_cost - 1e-12;
    if (have && !better && std::abs(cost - best_cost) <= 1e-12) {
      better = gap < best_target_gap - 1e-12 ||
               (std::abs(gap - best_target_gap) <= 1e-12 && c.sector < best_sector);
    }
    if (better) {
      have = true;
      best_cost = cost;
      best_target_gap = gap;
      best_sector = c.sector;
      best.heading = c.angle;
      best.valley = c.valley;
      best.narrow = c.narrow;
    }
  }
  return best;
}

/// One full VFH+ update; `previous_binary` carries the hysteresis state.
struct VfhStep {
  PolarHistogram primary;
  PolarHistogram binary;
  PolarHistogram masked;
  SteeringDecision decision;
};

inline VfhStep vfh_step(const OccupancyGrid& grid, const MotionState& state, double min_turn_radius,
                        double target_direction, double previous_heading, const PolarHistogram* previous_binary,
                        const VfhConfig& cfg) {
  VfhStep s;
  s.primary = build_polar_histogram(grid, {state.x, state.y, state.theta}, cfg);
  s.binary = binarize_histogram(s.primary, previous_binary, cfg.tau_low, cfg.tau_high);
  s.masked = mask_histogram(s.binary, grid, state, min_turn_radius, cfg);
  s.decision = select_steering(s.masked, target_direction, state.theta, previous_heading, cfg);
  return s;
}

}  // namespace dotnav
