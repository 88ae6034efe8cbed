#pragma once

// Decides which detected boxes hold genuinely moving objects from sparse flow
// and masks those boxes whole.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dotnav/dataset_io.hpp"
#include "dotnav/error.hpp"
#include "dotnav/flow.hpp"

namespace dotnav {

enum class MotionModelKind { translation, affine };

inline const char* to_string(MotionModelKind k) {
  return k == MotionModelKind::affine ? "affine" : "translation";
}

/// Image-space model of camera-induced flow: cur = A * prev + t.
/// For the translation kind A is the identity.
struct BackgroundMotionModel {
  MotionModelKind kind = MotionModelKind::translation;
  Eigen::Matrix2d linear = Eigen::Matrix2d::Identity();
  Vec2 offset = Vec2::Zero();

  static BackgroundMotionModel identity() { return {}; }

  static BackgroundMotionModel translation(const Vec2& t) {
    BackgroundMotionModel m;
    m.offset = t;
    return m;
  }

  Vec2 predicted_displacement(const Vec2& p) const { return linear * p + offset - p; }

  /// 2 values for translation, 6 (row-major [A | t]) for affine.
  std::vector<double> parameters() const {
    if (kind == MotionModelKind::translation) return {offset.x(), offset.y()};
    return {linear(0, 0), linear(0, 1), offset.x(), linear(1, 0), linear(1, 1), offset.y()};
  }
};

/// How a point's deviation is measured against threshold1.
enum class ResidualMode {
  compensated,  // displacement minus the background prediction
  raw,          // raw displacement magnitude
};

namespace detail {

inline bool inside_any(const Vec2& p, std::span<const BoundingBox> boxes) {
  return std::any_of(boxes.begin(), boxes.end(), [&](const BoundingBox& b) { return b.contains(p.x(), p.y()); });
}

inline double median_of(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline BackgroundMotionModel fit_model(std::span<const FlowTrack* const> tracks, MotionModelKind kind) {
  BackgroundMotionModel m;
  m.kind = kind;
  if (kind == MotionModelKind::translation) {
    Vec2 sum = Vec2::Zero();
    for (const auto* t : tracks) sum += t->displacement();
    m.offset = sum / static_cast<double>(tracks.size());
    return m;
  }
  const auto n = static_cast<Eigen::Index>(tracks.size());
  Eigen::MatrixXd design(n, 3);
  Eigen::MatrixXd target(n, 2);
  // Centre the coordinates for conditioning; undone below.
  Vec2 centre = Vec2::Zero();
  for (const auto* t : tracks) centre += t->prev;
  centre /= static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto* t = tracks[static_cast<std::size_t>(i)];
    design(i, 0) = t->prev.x() - centre.x();
    design(i, 1) = t->prev.y() - centre.y();
    design(i, 2) = 1.0;
    target(i, 0) = t->cur.x();
    target(i, 1) = t->cur.y();
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) throw InsufficientBackground("background points are collinear");
  const Eigen::MatrixXd sol = qr.solve(target);  // 3x2
  m.linear << sol(0, 0), sol(1, 0), sol(0, 1), sol(1, 1);
  m.offset = Vec2(sol(2, 0), sol(2, 1)) - m.linear * centre;
  if (!(m.linear.determinant() > 0.0)) throw InsufficientBackground("affine fit is not orientation-preserving");
  return m;
}

}  // namespace detail

/// Least-squares fit of the background model to tracked points lying outside
/// every given box, followed by one refit after dropping residuals above
/// 3x the median. Throws InsufficientBackground when fewer than 3 (affine) or
/// 1 (translation) usable tracks remain.
inline BackgroundMotionModel estimate_background_motion(std::span<const FlowTrack> tracks,
                                                        std::span<const BoundingBox> boxes,
                                                        MotionModelKind kind = MotionModelKind::affine) {
  const std::size_t needed = kind == MotionModelKind::affine ? 3 : 1;
  std::vector<const FlowTrack*> bg;
  for (const auto& t : tracks) {
    if (t.tracked && !detail::inside_any(t.cur, boxes)) bg.push_back(&t);
  }
  if (bg.size() < needed) {
    throw InsufficientBackground("only " + std::to_string(bg.size()) + " background tracks");
  }
  BackgroundMotionModel model = detail::fit_model(bg, kind);

  std::vector<double> residuals;
  residuals.reserve(bg.size());
  for (const auto* t : bg) residuals.push_back((t->displacement() - model.predicted_displacement(t->prev)).norm());
  // Floor keeps exact fits from discarding points over rounding noise.
  const double cutoff = std::max(3.0 * detail::median_of(residuals), 1e-6);
  std::vector<const FlowTrack*> inliers;
  for (std::size_t i = 0; i < bg.size(); ++i) {
    if (residuals[i] <= cutoff) inliers.push_back(bg[i]);
  }
  if (inliers.size() >= needed && inliers.size() < bg.size()) model = detail::fit_model(inliers, kind);
  return model;
}

inline BackgroundMotionModel estimate_background_motion(const std::vector<FlowTrack>& tracks,
                                                        const std::vector<BoundingBox>& boxes,
                                                        MotionModelKind kind = MotionModelKind::affine) {
  return estimate_background_motion(std::span<const FlowTrack>(tracks), std::span<const BoundingBox>(boxes), kind);
}

enum class PointState { untracked, static_point, dynamic_point };

struct PointFlag {
  std::size_t index = 0;
  PointState state = PointState::untracked;
  double residual = 0.0;  // pixels

  bool is_dynamic() const { return state == PointState::dynamic_point; }
};

/// A point is dynamic iff its residual strictly exceeds threshold1.
inline std::vector<PointFlag> classify_points(std::span<const FlowTrack> tracks, const BackgroundMotionModel& model,
                                              double threshold1, ResidualMode mode = ResidualMode::compensated) {
  std::vector<PointFlag> flags;
  flags.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& t = tracks[i];
    PointFlag f;
    f.index = i;
    if (t.tracked) {
      const Vec2 d = t.displacement();
      f.residual = mode == ResidualMode::raw ? d.norm() : (d - model.predicted_displacement(t.prev)).norm();
      f.state = f.residual > threshold1 ? PointState::dynamic_point : PointState::static_point;
    }
    flags.push_back(f);
  }
  return flags;
}

inline std::vector<PointFlag> classify_points(const std::vector<FlowTrack>& tracks, const BackgroundMotionModel& model,
                                              double threshold1, ResidualMode mode = ResidualMode::compensated) {
  return classify_points(std::span<const FlowTrack>(tracks), model, threshold1, mode);
}

/// Per-box decision rule on dynamic-point counts.
struct BoxPolicy {
  double fraction = 0.25;
  int absolute_min = 5;

  /// A box is moving iff its dynamic count exceeds this value.
  int cutoff(int total) const {
    const int by_fraction = static_cast<int>(std::ceil(fraction * static_cast<double>(total))) - 1;
    return std::max(absolute_min - 1, by_fraction);
  }
};

struct BoxVerdict {
  std::size_t box_index = 0;
  int dynamic_count = 0;
  int total_count = 0;
  bool is_moving = false;
  bool undecidable = false;  // too few points to judge; defaults to moving
};

struct DynamicVerdict {
  std::vector<PointFlag> per_point;
  std::vector<BoxVerdict> per_box;
};

/// Counts tracked points whose current position lies in each box (boundary
/// inclusive). Boxes with fewer than absolute_min points are undecidable and
/// reported as moving.
inline DynamicVerdict classify_boxes(std::span<const BoundingBox> boxes, std::span<const PointFlag> flags,
                                     std::span<const Vec2> points, const BoxPolicy& policy) {
  if (flags.size() != points.size()) throw InvalidArgument("flags and points differ in length");
  DynamicVerdict verdict;
  verdict.per_point.assign(flags.begin(), flags.end());
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    BoxVerdict v;
    v.box_index = b;
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (flags[i].state == PointState::untracked) continue;
      if (!boxes[b].contains(points[i].x(), points[i].y())) continue;
      ++v.total_count;
      if (flags[i].is_dynamic()) ++v.dynamic_count;
    }
    if (v.total_count < policy.absolute_min) {
      v.undecidable = true;
      v.is_moving = true;
    } else {
      v.is_moving = v.dynamic_count > policy.cutoff(v.total_count);
    }
    verdict.per_box.push_back(v);
  }
  return verdict;
}

inline DynamicVerdict classify_boxes(const std::vector<BoundingBox>& boxes, const std::vector<PointFlag>& flags,
                                     const std::vector<Vec2>& points, const BoxPolicy& policy) {
  return classify_boxes(std::span<const BoundingBox>(boxes), std::span<const PointFlag>(flags),
                        std::span<const Vec2>(points), policy);
}

/// Pixel (i, j) belongs to a box when x <= i < x + w and y <= j < y + h.
inline void fill_box(Mask& mask, const BoundingBox& box) {
  const int x0 = std::max(0, static_cast<int>(std::ceil(box.x)));
  const int y0 = std::max(0, static_cast<int>(std::ceil(box.y)));
  const int x1 = std::min(mask.width, static_cast<int>(std::ceil(box.x + box.w)));
  const int y1 = std::min(mask.height, static_cast<int>(std::ceil(box.y + box.h)));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) mask.set(x, y);
  }
}

/// Union of every box flagged as moving. `verdict.per_box[k].box_index` indexes `boxes`.
inline Mask build_mask(int width, int height, const DynamicVerdict& verdict, std::span<const BoundingBox> boxes) {
  Mask mask(width, height);
  for (const auto& v : verdict.per_box) {
    if (!v.is_moving) continue;
    if (v.box_index >= boxes.size()) throw InvalidArgument("verdict refers to a missing box");
    fill_box(mask, boxes[v.box_index]);
  }
  return mask;
}

inline Mask build_mask(int width, int height, const DynamicVerdict& verdict, const std::vector<BoundingBox>& boxes) {
  return build_mask(width, height, verdict, std::span<const BoundingBox>(boxes));
}

// ---------------------------------------------------------------------------
// Per-frame pipeline

struct DynamicConfig {
  FlowConfig flow;
  double threshold1 = 1.0;  // pixels
  BoxPolicy policy;
  MotionModelKind model_kind = MotionModelKind::affine;
  ResidualMode residual_mode = ResidualMode::compensated;
  std::vector<std::string> target_classes{"person"};

  bool is_target(const BoundingBox& b) const {
    return std::find(target_classes.begin(), target_classes.end(), b.class_label) != target_classes.end();
  }
};

struct FrameResult {
  double timestamp = 0.0;
  std::vector<FlowTrack> tracks;
  std::optional<BackgroundMotionModel> model;  // empty when the frame was undecidable
  DynamicVerdict verdict;  // per_box indexes the frame's full box list
  Mask mask;
};

/// Background fit, point and box decisions and mask from tracks already
/// computed for a frame pair. Only target-class boxes are judged; other
/// detections count as background.
inline FrameResult judge_tracks(std::vector<FlowTrack> tracks, int width, int height,
                                const FrameDetections& detections, const DynamicConfig& cfg) {
  FrameResult out;
  out.timestamp = detections.timestamp;
  out.tracks = std::move(tracks);

  std::vector<BoundingBox> targets;
  std::vector<std::size_t> target_index;
  for (std::size_t i = 0; i < detections.boxes.size(); ++i) {
    if (cfg.is_target(detections.boxes[i])) {
      targets.push_back(detections.boxes[i]);
      target_index.push_back(i);
    }
  }

  if (cfg.residual_mode == ResidualMode::raw) {
    out.model = BackgroundMotionModel::identity();
  } else {
    try {
      out.model = estimate_background_motion(out.tracks, targets, cfg.model_kind);
    } catch (const InsufficientBackground&) {
      if (cfg.model_kind == MotionModelKind::affine) {
        try {
          out.model = estimate_background_motion(out.tracks, targets, MotionModelKind::translation);
        } catch (const InsufficientBackground&) {
        }
      }
    }
  }

  std::vector<Vec2> positions;
  positions.reserve(out.tracks.size());
  for (const auto& t : out.tracks) positions.push_back(t.tracked ? t.cur : t.prev);

  std::vector<PointFlag> flags;
  if (out.model) {
    flags = classify_points(out.tracks, *out.model, cfg.threshold1, cfg.residual_mode);
  } else {
    // No camera-motion estimate: every target box stays undecidable (moving).
    flags.resize(out.tracks.size());
    for (std::size_t i = 0; i < flags.size(); ++i) flags[i].index = i;
  }
  out.verdict = classify_boxes(targets, flags, positions, cfg.policy);
  for (auto& v : out.verdict.per_box) {
    if (!out.model) {
      v.undecidable = true;
      v.is_moving = true;
    }
    v.box_index = target_index[v.box_index];
  }
  out.mask = build_mask(width, height, out.verdict, detections.boxes);
  return out;
}

/// Corners -> flow -> judge_tracks for one consecutive frame pair.
inline FrameResult detect_dynamic(const GrayImage& prev, const GrayImage& cur, const FrameDetections& detections,
                                  const DynamicConfig& cfg) {
  if (prev.width != cur.width || prev.height != cur.height) throw DimensionMismatch("frames differ in size");
  auto tracks = track_pyr_lk(prev, cur, detect_corners(prev, cfg.flow), cfg.flow);
  return judge_tracks(std::move(tracks), cur.width, cur.height, detections, cfg);
}

/// Verdict log record: {"t", "boxes": [{"idx", "count", "total", "moving"}]}.
inline nlohmann::ordered_json verdict_to_json(double timestamp, const DynamicVerdict& verdict) {
  nlohmann::ordered_json rec;
  rec["t"] = timestamp;
  rec["boxes"] = nlohmann::ordered_json::array();
  for (const auto& v : verdict.per_box) {
    nlohmann::ordered_json jb;
    jb["idx"] = v.box_index;
    jb["count"] = v.dynamic_count;
    jb["total"] = v.total_count;
    jb["moving"] = v.is_moving;
    rec["boxes"].push_back(std::move(jb));
  }
  return rec;
}

struct VerdictRecord {
  double timestamp = 0.0;
  DynamicVerdict verdict;
};

inline std::vector<VerdictRecord> parse_verdicts(std::istream& in) {
  std::vector<VerdictRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      VerdictRecord r;
      r.timestamp = rec.at("t").get<double>();
      for (const auto& jb : rec.at("boxes")) {
        BoxVerdict v;
        v.box_index = jb.at("idx").get<std::size_t>();
        v.dynamic_count = jb.at("count").get<int>();
        v.total_count = jb.at("total").get<int>();
        v.is_moving = jb.at("moving").get<bool>();
        r.verdict.per_box.push_back(v);
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return out;
}

}  // namespace dotnav
