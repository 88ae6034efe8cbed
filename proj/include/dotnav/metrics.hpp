#pragma once

// Relative pose error and absolute trajectory error with RMSE / mean / median
// summaries.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "dotnav/dataset_io.hpp"
#include "dotnav/error.hpp"
#include "dotnav/geometry.hpp"

namespace dotnav {

struct MetricSummary {
  double rmse = 0.0;
  double mean = 0.0;
  double median = 0.0;
  std::size_t count = 0;
};

/// Summaries are reduced in input order so results are bit-stable. The
/// median of an even-length list is the lower middle sample.
inline MetricSummary summarize(std::span<const double> samples) {
  if (samples.empty()) throw EmptySamples("cannot summarize an empty sample list");
  MetricSummary s;
  s.count = samples.size();
  double sum = 0.0, sum_sq = 0.0;
  for (double v : samples) {
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(samples.size());
  s.mean = sum / n;
  s.rmse = std::sqrt(sum_sq / n);
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  s.median = sorted[(sorted.size() - 1) / 2];
  return s;
}

inline MetricSummary summarize(const std::vector<double>& samples) {
  return summarize(std::span<const double>(samples));
}

/// How the per-frame relative error pose is formed.
enum class RpeForm {
  canonical,  // (Q_i^-1 Q_{i+d})^-1 (P_i^-1 P_{i+d}); identity when est == gt
  printed,    // (Q_i^-1 Q_{i+d}) (P_i^-1 P_{i+d}); literal product, comparison only
};

struct RpeSample {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians
};

struct RpeReport {
  std::size_t delta = 1;  // frames
  MetricSummary translational;  // meters
  MetricSummary rotational;     // degrees
  std::vector<RpeSample> per_frame;
};

inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Relative pose error over a fixed frame offset. Inputs must already be
/// associated 1:1.
inline RpeReport rpe(const Trajectory& gt, const Trajectory& est, std::size_t delta,
                     RpeForm form = RpeForm::canonical) {
  if (gt.size() != est.size()) throw LengthMismatch("trajectories differ in length");
  if (delta == 0) throw InvalidArgument("delta must be >= 1");
  if (delta >= gt.size()) throw DeltaTooLarge("delta " + std::to_string(delta) + " >= n " + std::to_string(gt.size()));
  RpeReport report;
  report.delta = delta;
  const std::size_t m = gt.size() - delta;
  report.per_frame.reserve(m);
  std::vector<double> trans, rot;
  trans.reserve(m);
  rot.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const Pose gt_rel = inverse(gt[i].pose) * gt[i + delta].pose;
    const Pose est_rel = inverse(est[i].pose) * est[i + delta].pose;
    const Pose err = form == RpeForm::canonical ? inverse(gt_rel) * est_rel : gt_rel * est_rel;
    const RpeSample s{err.translation().norm(), rotation_angle(err)};
    report.per_frame.push_back(s);
    trans.push_back(s.translation);
    rot.push_back(rad_to_deg(s.rotation));
  }
  report.translational = summarize(trans);
  report.rotational = summarize(rot);
  return report;
}

/// Frame offset whose timestamp gap is nearest to `seconds`, using the median
/// frame spacing of the trajectory. Never less than 1.
inline std::size_t delta_for_seconds(const Trajectory& traj, double seconds) {
  if (traj.size() < 2) return 1;
  std::vector<double> gaps;
  for (std::size_t i = 1; i < traj.size(); ++i) gaps.push_back(traj[i].timestamp - traj[i - 1].timestamp);
  std::nth_element(gaps.begin(), gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2), gaps.end());
  const double spacing = gaps[gaps.size() / 2];
  if (!(spacing > 0.0)) return 1;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(seconds / spacing)));
}

struct AteReport {
  AlignmentResult alignment;  // maps estimate positions onto ground truth
  MetricSummary translational;  // meters
  std::vector<double> per_frame;
};

/// Absolute trajectory error after rigid alignment fitted on positions.
inline AteReport ate(const Trajectory& gt, const Trajectory& est) {
  if (gt.size() != est.size()) throw LengthMismatch("trajectories differ in length");
  if (gt.size() < 3) throw DegenerateGeometry("ATE needs at least 3 associated poses");
  AteReport report;
  report.alignment = umeyama_align(gt.positions(), est.positions());
  const Pose& s = report.alignment.transform;
  report.per_frame.reserve(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const Pose f = inverse(gt[i].pose) * s * est[i].pose;
    report.per_frame.push_back(f.translation().norm());
  }
  report.translational = summarize(report.per_frame);
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::ordered_json to_json(const MetricSummary& s) {
  nlohmann::ordered_json j;
  j["rmse"] = s.rmse;
  j["mean"] = s.mean;
  j["median"] = s.median;
  j["count"] = s.count;
  return j;
}

inline nlohmann::ordered_json to_json(const Pose& p) {
  const auto& q = p.rotation();
  const auto& t = p.translation();
  nlohmann::ordered_json j;
  j["translation"] = {t.x(), t.y(), t.z()};
  j["rotation_xyzw"] = {q.x(), q.y(), q.z(), q.w()};
  return j;
}

inline nlohmann::ordered_json to_json(const RpeReport& r) {
  nlohmann::ordered_json j;
  j["delta"] = r.delta;
  j["translational"] = to_json(r.translational);
  j["rotational"] = to_json(r.rotational);
  auto& frames = j["per_frame"] = nlohmann::ordered_json::array();
  for (const auto& s : r.per_frame) frames.push_back({s.translation, rad_to_deg(s.rotation)});
  return j;
}

inline nlohmann::ordered_json to_json(const AteReport& r) {
  nlohmann::ordered_json j;
  j["alignment"] = to_json(r.alignment.transform);
  j["alignment"]["residual_rmse"] = r.alignment.residual_rmse;
  j["translational"] = to_json(r.translational);
  j["per_frame"] = r.per_frame;
  return j;
}

}  // namespace dotnav
