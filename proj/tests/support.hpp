#pragma once

#include <cmath>
#include <numbers>

#include "dotnav/dotnav.hpp"

namespace dotnav::testing {

inline Vec3 random_unit(Rng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-3);
  return v.normalized();
}

inline Pose random_pose(Rng& rng, double max_translation = 5.0) {
  const Vec3 t(rng.uniform(-max_translation, max_translation), rng.uniform(-max_translation, max_translation),
               rng.uniform(-max_translation, max_translation));
  return Pose::from_axis_angle(random_unit(rng), rng.uniform(0.0, std::numbers::pi), t);
}

inline Trajectory random_trajectory(Rng& rng, std::size_t n) {
  Trajectory tr;
  for (std::size_t i = 0; i < n; ++i) tr.entries.push_back({0.1 * static_cast<double>(i), random_pose(rng)});
  return tr;
}

// A smooth path: small random increments composed onto the previous pose.
inline Trajectory random_walk(Rng& rng, std::size_t n) {
  Trajectory tr;
  Pose p = random_pose(rng);
  for (std::size_t i = 0; i < n; ++i) {
    tr.entries.push_back({0.1 * static_cast<double>(i), p});
    const Vec3 step(rng.uniform(0.0, 0.2), rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05));
    p = p * Pose::from_axis_angle(random_unit(rng), rng.uniform(0.0, 0.1), step);
  }
  return tr;
}

inline Trajectory left_compose(const Pose& s, const Trajectory& tr) {
  Trajectory out = tr;
  for (auto& e : out.entries) e.pose = s * e.pose;
  return out;
}

}  // namespace dotnav::testing

#include "dotnav/fixtures.hpp"

namespace dotnav::testing {

// Window of a larger image with the top-left corner at (ox, oy).
inline GrayImage crop(const GrayImage& src, int ox, int oy, int w, int h) {
  GrayImage out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = src.at(x + ox, y + oy);
  }
  return out;
}

// Frame pair whose content moves by (dx, dy) pixels between prev and cur.
inline std::pair<GrayImage, GrayImage> shifted_pair(std::uint64_t seed, int w, int h, int dx, int dy) {
  Rng rng(seed);
  const int pad = 32;
  const GrayImage world = make_texture(rng, w + 2 * pad, h + 2 * pad);
  return {crop(world, pad, pad, w, h), crop(world, pad - dx, pad - dy, w, h)};
}

}  // namespace dotnav::testing
