#pragma once

// Shi-Tomasi corner selection and sparse pyramidal Lucas-Kanade tracking.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "dotnav/dataset_io.hpp"
#include "dotnav/error.hpp"

namespace dotnav {

struct FlowConfig {
  int max_corners = 1250;
  double quality_level = 0.01;
  double min_distance = 7.0;  // pixels
  int pyramid_levels = 3;
  int window = 21;  // odd, pixels
  int max_iterations = 30;
  double epsilon = 0.01;  // pixels
  // Smallest accepted eigenvalue of the per-pixel averaged gradient matrix,
  // in (intensity/pixel)^2. Below it the window has no usable texture.
  double min_eigen = 0.5;

  void validate() const {
    if (window < 3 || window % 2 == 0) throw InvalidArgument("window must be odd and >= 3");
    if (pyramid_levels < 1) throw InvalidArgument("pyramid_levels must be >= 1");
    if (!(quality_level > 0.0 && quality_level < 1.0)) throw InvalidArgument("quality_level must be in (0,1)");
    if (max_corners < 1) throw InvalidArgument("max_corners must be >= 1");
    if (max_iterations < 1) throw InvalidArgument("max_iterations must be >= 1");
    if (!(min_distance >= 0.0) || !(epsilon > 0.0)) throw InvalidArgument("min_distance/epsilon out of range");
  }
};

/// One tracked feature. `cur` is meaningful only when `tracked` is true.
struct FlowTrack {
  Vec2 prev = Vec2::Zero();
  Vec2 cur = Vec2::Zero();
  bool tracked = false;
  double residual = 0.0;  // SSD of the final level-0 window, intensity^2

  Vec2 displacement() const { return cur - prev; }
};

/// Single-channel float raster with clamp-to-edge access.
struct FloatImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  FloatImage() = default;
  FloatImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}

  explicit FloatImage(const GrayImage& img) : FloatImage(img.width, img.height) {
    std::transform(img.pixels.begin(), img.pixels.end(), data.begin(),
                   [](std::uint8_t v) { return static_cast<float>(v); });
  }

  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }

  float clamped(int x, int y) const {
    return at(std::clamp(x, 0, width - 1), std::clamp(y, 0, height - 1));
  }
};

namespace detail {

// Separable [1 4 6 4 1]/16 blur followed by 2x decimation, clamp-to-edge.
inline FloatImage pyr_down(const FloatImage& src) {
  const int w = src.width, h = src.height;
  FloatImage tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      tmp.at(x, y) = (src.clamped(x - 2, y) + 4.0f * src.clamped(x - 1, y) + 6.0f * src.at(x, y) +
                      4.0f * src.clamped(x + 1, y) + src.clamped(x + 2, y)) /
                     16.0f;
    }
  }
  const int dw = (w + 1) / 2, dh = (h + 1) / 2;
  FloatImage dst(dw, dh);
  for (int y = 0; y < dh; ++y) {
    const int sy = 2 * y;
    for (int x = 0; x < dw; ++x) {
      const int sx = 2 * x;
      dst.at(x, y) = (tmp.clamped(sx, sy - 2) + 4.0f * tmp.clamped(sx, sy - 1) + 6.0f * tmp.at(sx, sy) +
                      4.0f * tmp.clamped(sx, sy + 1) + tmp.clamped(sx, sy + 2)) /
                     16.0f;
    }
  }
  return dst;
}

inline std::vector<FloatImage> build_pyramid(const GrayImage& img, int levels) {
  std::vector<FloatImage> pyr;
  pyr.reserve(static_cast<std::size_t>(levels));
  pyr.emplace_back(img);
  for (int l = 1; l < levels; ++l) pyr.push_back(pyr_down(pyr.back()));
  return pyr;
}

// Samples a (2r+1)^2 patch centred at (cx, cy) with bilinear interpolation.
// All taps share the same fractional offset, so the weights are computed once.
inline void sample_patch(const FloatImage& img, double cx, double cy, int r, std::vector<float>& out) {
  const int side = 2 * r + 1;
  out.resize(static_cast<std::size_t>(side) * side);
  const double fx = std::floor(cx), fy = std::floor(cy);
  const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
  const float ax = static_cast<float>(cx - fx), ay = static_cast<float>(cy - fy);
  const float w00 = (1 - ax) * (1 - ay), w10 = ax * (1 - ay), w01 = (1 - ax) * ay, w11 = ax * ay;
  const bool interior = ix - r >= 0 && iy - r >= 0 && ix + r + 1 < img.width && iy + r + 1 < img.height;
  std::size_t k = 0;
  if (interior) {
    for (int dy = -r; dy <= r; ++dy) {
      const float* row0 = &img.data[static_cast<std::size_t>(iy + dy) * img.width + (ix - r)];
      const float* row1 = row0 + img.width;
      for (int dx = 0; dx < side; ++dx) {
        out[k++] = w00 * row0[dx] + w10 * row0[dx + 1] + w01 * row1[dx] + w11 * row1[dx + 1];
      }
    }
  } else {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const int x = ix + dx, y = iy + dy;
        out[k++] = w00 * img.clamped(x, y) + w10 * img.clamped(x + 1, y) + w01 * img.clamped(x, y + 1) +
                   w11 * img.clamped(x + 1, y + 1);
      }
    }
  }
}

// Smaller eigenvalue of [[a, b], [b, c]].
inline double min_eigenvalue(double a, double b, double c) {
  const double half_trace = 0.5 * (a + c);
  const double d = 0.5 * (a - c);
  return half_trace - std::sqrt(d * d + b * b);
}

}  // namespace detail

/// Shi-Tomasi corners: minimum eigenvalue of the 3x3-summed Sobel structure
/// tensor, thresholded at quality_level x max response, 3x3 non-maximum
/// suppression, then greedy min_distance selection strongest-first.
inline std::vector<Vec2> detect_corners(const GrayImage& img, const FlowConfig& cfg) {
  cfg.validate();
  const int w = img.width, h = img.height;
  std::vector<Vec2> corners;
  if (w < 5 || h < 5) return corners;

  const FloatImage src(img);
  FloatImage gxx(w, h), gxy(w, h), gyy(w, h);
  auto sobel = [&](int x, int y, float& dx, float& dy) {
    if (x > 0 && y > 0 && x < w - 1 && y < h - 1) {
      const float* up = &src.data[static_cast<std::size_t>(y - 1) * w + x];
      const float* mid = up + w;
      const float* dn = mid + w;
      dx = (up[1] + 2.0f * mid[1] + dn[1]) - (up[-1] + 2.0f * mid[-1] + dn[-1]);
      dy = (dn[-1] + 2.0f * dn[0] + dn[1]) - (up[-1] + 2.0f * up[0] + up[1]);
      return;
    }
    dx = (src.clamped(x + 1, y - 1) + 2.0f * src.clamped(x + 1, y) + src.clamped(x + 1, y + 1)) -
         (src.clamped(x - 1, y - 1) + 2.0f * src.clamped(x - 1, y) + src.clamped(x - 1, y + 1));
    dy = (src.clamped(x - 1, y + 1) + 2.0f * src.clamped(x, y + 1) + src.clamped(x + 1, y + 1)) -
         (src.clamped(x - 1, y - 1) + 2.0f * src.clamped(x, y - 1) + src.clamped(x + 1, y - 1));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float dx, dy;
      sobel(x, y, dx, dy);
      gxx.at(x, y) = dx * dx;
      gxy.at(x, y) = dx * dy;
      gyy.at(x, y) = dy * dy;
    }
  }

  // Horizontal 3-tap sums; the vertical pass happens in the response loop.
  FloatImage sxx(w, h), sxy(w, h), syy(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      sxx.at(x, y) = gxx.at(x - 1, y) + gxx.at(x, y) + gxx.at(x + 1, y);
      sxy.at(x, y) = gxy.at(x - 1, y) + gxy.at(x, y) + gxy.at(x + 1, y);
      syy.at(x, y) = gyy.at(x - 1, y) + gyy.at(x, y) + gyy.at(x + 1, y);
    }
  }

  // Response on the interior only; a 2-pixel border has incomplete support.
  constexpr int kBorder = 2;
  FloatImage response(w, h);
  float max_response = 0.0f;
  for (int y = kBorder; y < h - kBorder; ++y) {
    for (int x = kBorder; x < w - kBorder; ++x) {
      const double a = sxx.at(x, y - 1) + sxx.at(x, y) + sxx.at(x, y + 1);
      const double b = sxy.at(x, y - 1) + sxy.at(x, y) + sxy.at(x, y + 1);
      const double c = syy.at(x, y - 1) + syy.at(x, y) + syy.at(x, y + 1);
      const float r = static_cast<float>(std::max(0.0, detail::min_eigenvalue(a, b, c)));
      response.at(x, y) = r;
      max_response = std::max(max_response, r);
    }
  }
  if (max_response <= 0.0f) return corners;

  const float threshold = static_cast<float>(cfg.quality_level) * max_response;
  struct Candidate {
    float score;
    int x, y;
  };
  std::vector<Candidate> cands;
  for (int y = kBorder; y < h - kBorder; ++y) {
    for (int x = kBorder; x < w - kBorder; ++x) {
      const float r = response.at(x, y);
      if (r <= threshold) continue;
      bool is_max = true;
      for (int v = -1; v <= 1 && is_max; ++v) {
        for (int u = -1; u <= 1; ++u) {
          if ((u || v) && response.at(x + u, y + v) > r) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) cands.push_back({r, x, y});
    }
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.score > b.score; });

  // Bucket grid with cell size min_distance for the spacing test.
  const double min_d = cfg.min_distance;
  const double min_d2 = min_d * min_d;
  const int cell = std::max(1, static_cast<int>(std::ceil(min_d)));
  const int gw = (w + cell - 1) / cell, gh = (h + cell - 1) / cell;
  std::vector<std::vector<Vec2>> grid(static_cast<std::size_t>(gw) * gh);
  for (const auto& c : cands) {
    if (static_cast<int>(corners.size()) >= cfg.max_corners) break;
    const Vec2 p(c.x, c.y);
    bool ok = true;
    if (min_d > 0.0) {
      const int gx = c.x / cell, gy = c.y / cell;
      for (int yy = std::max(0, gy - 1); yy <= std::min(gh - 1, gy + 1) && ok; ++yy) {
        for (int xx = std::max(0, gx - 1); xx <= std::min(gw - 1, gx + 1) && ok; ++xx) {
          for (const auto& q : grid[static_cast<std::size_t>(yy) * gw + xx]) {
            if ((q - p).squaredNorm() < min_d2) {
              ok = false;
              break;
            }
          }
        }
      }
    }
    if (!ok) continue;
    corners.push_back(p);
    grid[static_cast<std::size_t>(c.y / cell) * gw + c.x / cell].push_back(p);
  }
  return corners;
}

namespace detail {

// Tracks one point through prebuilt pyramids. Scratch buffers are caller-owned.
inline FlowTrack track_point(const std::vector<FloatImage>& prev_pyr, const std::vector<FloatImage>& cur_pyr,
                             const Vec2& pt, const FlowConfig& cfg, std::vector<float>& ipatch,
                             std::vector<float>& jpatch, std::vector<float>& gx, std::vector<float>& gy,
                             std::vector<float>& icore) {
  FlowTrack track;
  track.prev = pt;
  const int r = cfg.window / 2;
  const int side = 2 * r + 1;
  const int ext = side + 2;
  const double area = static_cast<double>(side) * side;
  const int levels = static_cast<int>(prev_pyr.size());

  Vec2 guess = Vec2::Zero();
  Vec2 flow_at_level = Vec2::Zero();
  for (int level = levels - 1; level >= 0; --level) {
    const FloatImage& iimg = prev_pyr[static_cast<std::size_t>(level)];
    const FloatImage& jimg = cur_pyr[static_cast<std::size_t>(level)];
    const double scale = std::ldexp(1.0, -level);
    const Vec2 p = pt * scale;

    // Previous-frame patch with a one-pixel apron for central differences.
    sample_patch(iimg, p.x(), p.y(), r + 1, ipatch);
    gx.resize(static_cast<std::size_t>(side) * side);
    gy.resize(gx.size());
    icore.resize(gx.size());
    double a = 0, b = 0, c = 0;
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        const std::size_t e = static_cast<std::size_t>(y + 1) * ext + (x + 1);
        const float dx = 0.5f * (ipatch[e + 1] - ipatch[e - 1]);
        const float dy = 0.5f * (ipatch[e + ext] - ipatch[e - ext]);
        const std::size_t k = static_cast<std::size_t>(y) * side + x;
        gx[k] = dx;
        gy[k] = dy;
        icore[k] = ipatch[e];
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
      }
    }
    const double det = a * c - b * b;
    if (min_eigenvalue(a, b, c) / area < cfg.min_eigen || det <= 0.0) {
      if (level == 0) return track;  // untracked: aperture degeneracy
      guess = 2.0 * guess;
      continue;
    }

    Vec2 v = Vec2::Zero();
    for (int it = 0; it < cfg.max_iterations; ++it) {
      const Vec2 q = p + guess + v;
      if (q.x() < -r || q.y() < -r || q.x() > jimg.width - 1 + r || q.y() > jimg.height - 1 + r) {
        return track;  // left the image
      }
      sample_patch(jimg, q.x(), q.y(), r, jpatch);
      double bx = 0, by = 0;
      float sx = 0.0f, sy = 0.0f;
      for (std::size_t k = 0; k < jpatch.size(); ++k) {
        const float diff = icore[k] - jpatch[k];
        sx += diff * gx[k];
        sy += diff * gy[k];
      }
      bx = sx;
      by = sy;
      const Vec2 step((c * bx - b * by) / det, (a * by - b * bx) / det);
      v += step;
      if (step.norm() < cfg.epsilon) break;
    }
    flow_at_level = guess + v;
    guess = level > 0 ? Vec2(2.0 * flow_at_level) : flow_at_level;
  }

  const Vec2 cur = pt + guess;
  const FloatImage& j0 = cur_pyr.front();
  if (!std::isfinite(cur.x()) || !std::isfinite(cur.y()) || cur.x() < 0 || cur.y() < 0 ||
      cur.x() > j0.width - 1 || cur.y() > j0.height - 1) {
    return track;
  }
  sample_patch(j0, cur.x(), cur.y(), r, jpatch);
  sample_patch(prev_pyr.front(), pt.x(), pt.y(), r, ipatch);
  double ssd = 0.0;
  for (std::size_t k = 0; k < jpatch.size(); ++k) {
    const double d = static_cast<double>(ipatch[k]) - jpatch[k];
    ssd += d * d;
  }
  track.cur = cur;
  track.tracked = true;
  track.residual = ssd;
  return track;
}

}  // namespace detail

/// Sparse pyramidal Lucas-Kanade: each point is solved coarse-to-fine with
/// bilinear subpixel sampling. Results are in input order.
inline std::vector<FlowTrack> track_pyr_lk(const GrayImage& prev, const GrayImage& cur,
                                           std::span<const Vec2> points, const FlowConfig& cfg) {
  cfg.validate();
  if (prev.width != cur.width || prev.height != cur.height) {
    throw DimensionMismatch("frames differ in size");
  }
  const auto prev_pyr = detail::build_pyramid(prev, cfg.pyramid_levels);
  const auto cur_pyr = detail::build_pyramid(cur, cfg.pyramid_levels);
  std::vector<FlowTrack> tracks;
  tracks.reserve(points.size());
  std::vector<float> ipatch, jpatch, gx, gy, icore;
  for (const auto& p : points) {
    tracks.push_back(detail::track_point(prev_pyr, cur_pyr, p, cfg, ipatch, jpatch, gx, gy, icore));
  }
  return tracks;
}

inline std::vector<FlowTrack> track_pyr_lk(const GrayImage& prev, const GrayImage& cur,
                                           const std::vector<Vec2>& points, const FlowConfig& cfg) {
  return track_pyr_lk(prev, cur, std::span<const Vec2>(points), cfg);
}

}  // namespace dotnav
