#include <gtest/gtest.h>

#include "support.hpp"

using namespace dotnav;
using dotnav::testing::shifted_pair;

namespace {

bool interior(const Vec2& p, int w, int h, int margin) {
  return p.x() >= margin && p.y() >= margin && p.x() <= w - 1 - margin && p.y() <= h - 1 - margin;
}

double fraction_recovered(const std::vector<FlowTrack>& tracks, const Vec2& shift, int w, int h, int margin) {
  int n = 0, ok = 0;
  for (const auto& t : tracks) {
    if (!interior(t.prev, w, h, margin)) continue;
    ++n;
    if (t.tracked && (t.displacement() - shift).norm() <= 0.3) ++ok;
  }
  return n ? static_cast<double>(ok) / n : 0.0;
}

}  // namespace

TEST(Corners, UniformImageHasNone) {
  EXPECT_TRUE(detect_corners(GrayImage(64, 48, 128), FlowConfig{}).empty());
}

TEST(Corners, WhiteSquareVertices) {
  GrayImage img(80, 80, 0);
  for (int y = 20; y < 60; ++y) {
    for (int x = 20; x < 60; ++x) img.at(x, y) = 255;
  }
  const auto corners = detect_corners(img, FlowConfig{});
  ASSERT_EQ(corners.size(), 4u);
  // The vertices sit on the pixel boundary at 19.5 and 59.5.
  const std::vector<Vec2> truth{{19.5, 19.5}, {59.5, 19.5}, {19.5, 59.5}, {59.5, 59.5}};
  for (const auto& v : truth) {
    double best = 1e9;
    for (const auto& c : corners) best = std::min(best, (c - v).norm());
    EXPECT_LE(best, 1.0) << v.transpose();
  }
}

TEST(Corners, CheckerboardLattice) {
  const int cell = 16, cells = 8;
  GrayImage img(cell * cells, cell * cells);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) img.at(x, y) = ((x / cell + y / cell) % 2) ? 255 : 0;
  }
  const auto corners = detect_corners(img, FlowConfig{});
  int matched = 0;
  for (int i = 1; i < cells; ++i) {
    for (int j = 1; j < cells; ++j) {
      const Vec2 v(i * cell - 0.5, j * cell - 0.5);
      for (const auto& c : corners) {
        if ((c - v).norm() <= 1.0) {
          ++matched;
          break;
        }
      }
    }
  }
  EXPECT_EQ(matched, (cells - 1) * (cells - 1));
  EXPECT_EQ(static_cast<int>(corners.size()), (cells - 1) * (cells - 1));
}

TEST(Corners, RespectsLimitsAndSpacing) {
  auto [img, unused] = shifted_pair(40, 200, 150, 0, 0);
  FlowConfig cfg;
  cfg.max_corners = 50;
  const auto few = detect_corners(img, cfg);
  EXPECT_EQ(few.size(), 50u);
  cfg.max_corners = 5000;
  const auto all = detect_corners(img, cfg);
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_GE((all[i] - all[j]).norm(), cfg.min_distance);
  }
  // Strongest-first selection: the capped list is a prefix of the full one.
  for (std::size_t i = 0; i < few.size(); ++i) EXPECT_EQ(few[i], all[i]);
}

TEST(Corners, InvalidConfig) {
  FlowConfig cfg;
  cfg.window = 20;
  EXPECT_THROW(detect_corners(GrayImage(10, 10), cfg), InvalidArgument);
}

TEST(Lk, IdenticalFramesGiveZeroFlow) {
  auto [img, unused] = shifted_pair(41, 160, 120, 0, 0);
  const auto pts = detect_corners(img, FlowConfig{});
  ASSERT_GT(pts.size(), 50u);
  for (const auto& t : track_pyr_lk(img, img, pts, FlowConfig{})) {
    ASSERT_TRUE(t.tracked);
    EXPECT_LT(t.displacement().norm(), 1e-3);
  }
}

TEST(Lk, RecoversIntegerShift) {
  auto [a, b] = shifted_pair(42, 160, 120, 3, 2);
  const auto tracks = track_pyr_lk(a, b, detect_corners(a, FlowConfig{}), FlowConfig{});
  EXPECT_GE(fraction_recovered(tracks, {3, 2}, 160, 120, 15), 0.95);
}

TEST(Lk, FlatRegionIsUntracked) {
  GrayImage img(64, 64, 100);
  const auto tracks = track_pyr_lk(img, img, std::vector<Vec2>{{32, 32}}, FlowConfig{});
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_FALSE(tracks[0].tracked);
}

TEST(Lk, PyramidHelpsLargeShifts) {
  // Shift beyond half the window: a single level cannot converge, three can.
  auto [a, b] = shifted_pair(43, 200, 160, 11, 0);
  const auto pts = detect_corners(a, FlowConfig{});
  FlowConfig one;
  one.pyramid_levels = 1;
  const double single = fraction_recovered(track_pyr_lk(a, b, pts, one), {11, 0}, 200, 160, 30);
  const double pyramid = fraction_recovered(track_pyr_lk(a, b, pts, FlowConfig{}), {11, 0}, 200, 160, 30);
  EXPECT_LT(single, 0.5);
  EXPECT_GE(pyramid, 0.9);
}

TEST(Lk, TracksThatLeaveTheImageAreDropped) {
  auto [a, b] = shifted_pair(44, 120, 90, 5, 0);
  const auto tracks = track_pyr_lk(a, b, std::vector<Vec2>{{118, 45}}, FlowConfig{});
  EXPECT_FALSE(tracks[0].tracked);
}

TEST(Lk, SizeMismatch) {
  EXPECT_THROW(track_pyr_lk(GrayImage(10, 10), GrayImage(11, 10), std::vector<Vec2>{}, FlowConfig{}),
               DimensionMismatch);
}

TEST(Lk, ResultsFollowInputOrderAndAreDeterministic) {
  auto [a, b] = shifted_pair(45, 120, 90, 1, 1);
  auto pts = detect_corners(a, FlowConfig{});
  std::reverse(pts.begin(), pts.end());
  const auto t1 = track_pyr_lk(a, b, pts, FlowConfig{});
  const auto t2 = track_pyr_lk(a, b, pts, FlowConfig{});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    EXPECT_EQ(t1[i].prev, pts[i]);
    EXPECT_EQ(t1[i].cur, t2[i].cur);
  }
}
