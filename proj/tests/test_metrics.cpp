#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "support.hpp"

using namespace dotnav;
using namespace dotnav::testing;

TEST(Summarize, HandValues) {
  const auto z = summarize(std::vector<double>{0, 0, 0});
  EXPECT_EQ(z.rmse, 0.0);
  EXPECT_EQ(z.mean, 0.0);
  EXPECT_EQ(z.median, 0.0);

  const auto s = summarize(std::vector<double>{3, 4});
  EXPECT_DOUBLE_EQ(s.rmse, std::sqrt(12.5));
  EXPECT_DOUBLE_EQ(s.mean, 3.5);
  EXPECT_DOUBLE_EQ(s.median, 3.0);

  const auto one = summarize(std::vector<double>{5});
  EXPECT_EQ(one.rmse, 5.0);
  EXPECT_EQ(one.mean, 5.0);
  EXPECT_EQ(one.median, 5.0);

  EXPECT_THROW(summarize(std::vector<double>{}), EmptySamples);
}

TEST(Summarize, Ordering) {
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v(static_cast<std::size_t>(rng.integer(1, 30)));
    for (auto& x : v) x = rng.uniform(0, 10);
    const auto s = summarize(v);
    EXPECT_LE(s.mean, s.rmse + 1e-12);
    EXPECT_GE(s.median, *std::min_element(v.begin(), v.end()));
    EXPECT_LE(s.median, *std::max_element(v.begin(), v.end()));
  }
}

TEST(Rpe, IdenticalTrajectoriesGiveExactZero) {
  Rng rng(12);
  const auto gt = random_walk(rng, 30);
  for (std::size_t d : {1u, 2u, 5u}) {
    const auto r = rpe(gt, gt, d);
    for (const auto& s : r.per_frame) {
      EXPECT_EQ(s.translation, 0.0);
      EXPECT_EQ(s.rotation, 0.0);
    }
    EXPECT_EQ(r.translational.rmse, 0.0);
    EXPECT_EQ(r.translational.mean, 0.0);
    EXPECT_EQ(r.translational.median, 0.0);
    EXPECT_EQ(r.rotational.rmse, 0.0);
  }
}

TEST(Rpe, InvariantUnderCommonLeftTransform) {
  Rng rng(13);
  for (int k = 0; k < 20; ++k) {
    const auto gt = random_walk(rng, 25);
    const auto est = left_compose(random_pose(rng), gt);
    const auto r = rpe(gt, est, 1);
    EXPECT_LT(r.translational.rmse, 1e-9);
    EXPECT_LT(r.rotational.rmse, 1e-6);  // degrees; acos-free angle so this is tight too
  }
}

TEST(Rpe, MatchesMatrixOracle) {
  Rng rng(14);
  const auto gt = random_trajectory(rng, 20), est = random_trajectory(rng, 20);
  const auto r = rpe(gt, est, 1);
  const auto o = oracle::rpe_matrix(gt, est, 1);
  ASSERT_EQ(r.per_frame.size(), o.trans.size());
  for (std::size_t i = 0; i < o.trans.size(); ++i) EXPECT_NEAR(r.per_frame[i].translation, o.trans[i], 1e-9);
  const auto so = summarize(o.trans);
  EXPECT_NEAR(r.translational.rmse, so.rmse, 1e-9);
  EXPECT_NEAR(r.translational.mean, so.mean, 1e-9);
  EXPECT_NEAR(r.translational.median, so.median, 1e-9);
}

TEST(Rpe, PrintedFormDiffersFromCanonical) {
  Rng rng(15);
  const auto gt = random_walk(rng, 10);
  const auto printed = rpe(gt, gt, 1, RpeForm::printed);
  EXPECT_GT(printed.translational.rmse, 0.0);
}

TEST(Rpe, Errors) {
  Rng rng(16);
  const auto a = random_walk(rng, 5), b = random_walk(rng, 6);
  EXPECT_THROW(rpe(a, b, 1), LengthMismatch);
  EXPECT_THROW(rpe(a, a, 0), InvalidArgument);
  EXPECT_THROW(rpe(a, a, 5), DeltaTooLarge);
  EXPECT_NO_THROW(rpe(a, a, 4));
}

TEST(Rpe, DeltaForSeconds) {
  Trajectory t;
  for (int i = 0; i < 100; ++i) t.entries.push_back({i / 30.0, Pose::identity()});
  EXPECT_EQ(delta_for_seconds(t, 1.0), 30u);
  EXPECT_EQ(delta_for_seconds(t, 0.0), 1u);
}

TEST(Ate, IdenticalGivesExactZero) {
  Rng rng(17);
  const auto gt = random_walk(rng, 40);
  const auto r = ate(gt, gt);
  for (double v : r.per_frame) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(r.translational.rmse, 0.0);
}

TEST(Ate, AbsorbsGlobalRigidMotion) {
  Rng rng(18);
  const auto gt = random_walk(rng, 40);
  const Pose s = Pose::from_axis_angle({0, 0, 1}, std::numbers::pi / 4, {3, 0, 1});
  EXPECT_LT(ate(gt, left_compose(s, gt)).translational.rmse, 1e-9);
  for (int k = 0; k < 20; ++k) {
    EXPECT_LT(ate(gt, left_compose(random_pose(rng), gt)).translational.rmse, 1e-9);
  }
}

TEST(Ate, MatchesMatrixOracle) {
  Rng rng(19);
  const auto gt = random_walk(rng, 30), est = random_walk(rng, 30);
  const auto r = ate(gt, est);
  const auto o = oracle::ate_matrix(gt, est);
  for (std::size_t i = 0; i < o.size(); ++i) EXPECT_NEAR(r.per_frame[i], o[i], 1e-9);
}

TEST(Ate, TranslationNoiseMonteCarlo) {
  // Noise is applied along each axis with sigma / sqrt(3), so the expected
  // 3-D error magnitude rmse is sigma.
  const double sigma = 0.01;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    const auto gt = random_walk(rng, 500);
    Trajectory est = gt;
    for (auto& e : est.entries) {
      const Vec3 n = (sigma / std::sqrt(3.0)) * Vec3(rng.normal(), rng.normal(), rng.normal());
      e.pose = Pose(e.pose.rotation(), e.pose.translation() + n);
    }
    const double rmse = ate(gt, est).translational.rmse;
    EXPECT_GE(rmse, 0.008) << seed;
    EXPECT_LE(rmse, 0.012) << seed;
  }
}

TEST(Ate, Errors) {
  Rng rng(20);
  const auto a = random_walk(rng, 2);
  EXPECT_THROW(ate(a, a), DegenerateGeometry);
  EXPECT_THROW(ate(random_walk(rng, 5), random_walk(rng, 4)), LengthMismatch);
}

TEST(MetricsJson, Shapes) {
  Rng rng(21);
  const auto gt = random_walk(rng, 10);
  const auto j = to_json(rpe(gt, gt, 2));
  EXPECT_EQ(j["delta"], 2);
  EXPECT_TRUE(j.contains("translational"));
  EXPECT_TRUE(j.contains("rotational"));
  const auto a = to_json(ate(gt, gt));
  EXPECT_EQ(a["translational"]["rmse"], 0.0);
}
