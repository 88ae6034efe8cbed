#pragma once

// Synthetic frame sequences standing in for detector-annotated RGB-D video:
// a textured background panned by the camera plus textured "person" patches
// that either stay put in the world or move on their own.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dotnav/dataset_io.hpp"
#include "dotnav/random.hpp"

namespace dotnav {

enum class FixtureKind {
  walking,  // one person moving independently, one standing still
  sitting,  // every person still
};

struct FixtureParams {
  int width = 320;
  int height = 240;
  int frames = 6;
  double frame_rate = 30.0;
  // Camera pan per frame in pixels; the image content moves by -pan.
  int pan_x = 2;
  int pan_y = 1;
  // Independent motion of walking persons, pixels per frame, magnitude range.
  double mover_speed_min = 3.0;
  double mover_speed_max = 5.0;
  int object_min = 40;
  int object_max = 70;
  bool include_background_box = true;  // a non-target detection on plain background
};

struct FixtureObject {
  int x0 = 0, y0 = 0;  // world position of the top-left corner at frame 0
  int w = 0, h = 0;
  int vx = 0, vy = 0;  // independent world motion per frame
  bool moving = false;
  GrayImage texture;
};

struct FixtureSequence {
  std::vector<GrayImage> frames;
  std::vector<double> timestamps;
  std::vector<FrameDetections> detections;
  // Ground truth per frame, aligned with detections[k].boxes.
  std::vector<std::vector<bool>> moving;
};

/// Band-limited noise texture stretched to the full 8-bit range.
inline GrayImage make_texture(Rng& rng, int width, int height) {
  std::vector<float> a(static_cast<std::size_t>(width) * height), b(a.size());
  for (auto& v : a) v = static_cast<float>(rng.uniform());
  auto at = [&](std::vector<float>& img, int x, int y) -> float& {
    return img[static_cast<std::size_t>(std::clamp(y, 0, height - 1)) * width + std::clamp(x, 0, width - 1)];
  };
  for (int pass = 0; pass < 2; ++pass) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        b[static_cast<std::size_t>(y) * width + x] =
            (at(a, x - 2, y) + 4 * at(a, x - 1, y) + 6 * at(a, x, y) + 4 * at(a, x + 1, y) + at(a, x + 2, y)) / 16.0f;
      }
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        a[static_cast<std::size_t>(y) * width + x] =
            (at(b, x, y - 2) + 4 * at(b, x, y - 1) + 6 * at(b, x, y) + 4 * at(b, x, y + 1) + at(b, x, y + 2)) / 16.0f;
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(a.begin(), a.end());
  const float span = std::max(*hi - *lo, 1e-6f);
  GrayImage img(width, height);
  for (std::size_t i = 0; i < a.size(); ++i) {
    img.pixels[i] = static_cast<std::uint8_t>(std::clamp(255.0f * (a[i] - *lo) / span, 0.0f, 255.0f) + 0.5f);
  }
  return img;
}

/// Deterministic sequence from a seed. Boxes are the exact object rectangles
/// in each frame, labelled "person"; an optional "chair" box covers plain
/// background.
inline FixtureSequence generate_fixture(std::uint64_t seed, FixtureKind kind, const FixtureParams& p) {
  Rng rng(seed);
  const int margin = 4;
  const int span_x = std::abs(p.pan_x) * (p.frames - 1), span_y = std::abs(p.pan_y) * (p.frames - 1);
  const int world_w = p.width + span_x + 2 * margin, world_h = p.height + span_y + 2 * margin;
  const GrayImage world = make_texture(rng, world_w, world_h);
  auto cam = [&](int k) {
    const int ox = margin + (p.pan_x >= 0 ? p.pan_x * k : span_x + p.pan_x * k);
    const int oy = margin + (p.pan_y >= 0 ? p.pan_y * k : span_y + p.pan_y * k);
    return std::pair{ox, oy};
  };

  // Objects are placed in the left and right halves so they never overlap.
  std::vector<FixtureObject> objects(2);
  for (int i = 0; i < 2; ++i) {
    auto& o = objects[static_cast<std::size_t>(i)];
    o.moving = kind == FixtureKind::walking && i == 0;
    o.w = static_cast<int>(rng.integer(p.object_min, p.object_max));
    o.h = static_cast<int>(rng.integer(p.object_min, p.object_max));
    if (o.moving) {
      const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double speed = rng.uniform(p.mover_speed_min, p.mover_speed_max);
      o.vx = static_cast<int>(std::lround(speed * std::cos(ang)));
      o.vy = static_cast<int>(std::lround(speed * std::sin(ang)));
      if (o.vx == 0 && o.vy == 0) o.vx = 3;
    }
    // Frame-0 image position chosen so the object stays inside its half for
    // every frame; world position adds the camera offset.
    const int half_w = p.width / 2;
    const int rel_vx = o.vx - p.pan_x, rel_vy = o.vy - p.pan_y;
    const int travel_x = rel_vx * (p.frames - 1), travel_y = rel_vy * (p.frames - 1);
    const int lo_x = i * half_w + 2 + std::max(0, -travel_x);
    const int hi_x = (i + 1) * half_w - 2 - o.w - std::max(0, travel_x);
    const int lo_y = 2 + std::max(0, -travel_y);
    const int hi_y = p.height - 2 - o.h - std::max(0, travel_y);
    const int ix = hi_x > lo_x ? static_cast<int>(rng.integer(lo_x, hi_x)) : lo_x;
    const int iy = hi_y > lo_y ? static_cast<int>(rng.integer(lo_y, hi_y)) : lo_y;
    const auto [cx, cy] = cam(0);
    o.x0 = ix + cx;
    o.y0 = iy + cy;
    o.texture = make_texture(rng, o.w, o.h);
  }

  // Background-only box: a patch of the right half's lower band.
  BoundingBox chair{"chair", 0.8, 0.0, 0.0, 30.0, 20.0};

  FixtureSequence seq;
  for (int k = 0; k < p.frames; ++k) {
    const auto [ox, oy] = cam(k);
    GrayImage frame(p.width, p.height);
    for (int y = 0; y < p.height; ++y) {
      for (int x = 0; x < p.width; ++x) frame.at(x, y) = world.at(x + ox, y + oy);
    }
    FrameDetections det;
    det.timestamp = static_cast<double>(k) / p.frame_rate;
    std::vector<bool> truth;
    for (const auto& o : objects) {
      const int px = o.x0 + o.vx * k - ox, py = o.y0 + o.vy * k - oy;
      for (int y = 0; y < o.h; ++y) {
        for (int x = 0; x < o.w; ++x) {
          const int fx = px + x, fy = py + y;
          if (fx >= 0 && fy >= 0 && fx < p.width && fy < p.height) frame.at(fx, fy) = o.texture.at(x, y);
        }
      }
      det.boxes.push_back({"person", 0.9, static_cast<double>(px), static_cast<double>(py),
                           static_cast<double>(o.w), static_cast<double>(o.h)});
      truth.push_back(o.moving);
    }
    if (p.include_background_box) {
      chair.x = 0.5 * p.width + 10.0;
      chair.y = p.height - 24.0;
      // Only kept when it does not overlap a person box.
      bool overlaps = false;
      for (const auto& b : det.boxes) {
        overlaps |= chair.x < b.x + b.w && b.x < chair.x + chair.w && chair.y < b.y + b.h && b.y < chair.y + chair.h;
      }
      if (!overlaps) {
        det.boxes.push_back(chair);
        truth.push_back(false);
      }
    }
    seq.frames.push_back(std::move(frame));
    seq.timestamps.push_back(det.timestamp);
    seq.detections.push_back(std::move(det));
    seq.moving.push_back(std::move(truth));
  }
  return seq;
}

}  // namespace dotnav
