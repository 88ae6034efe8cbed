// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fail.
//
//   acceptance --cli path/to/dotnav [--only N]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "oracles.hpp"
#include "support.hpp"

using namespace dotnav;
using namespace dotnav::testing;
namespace fs = std::filesystem;

namespace {

// Collects the first few failure notes of a criterion.
struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (notes.size() < 5) notes.push_back(what);
  }
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1 -------------------------------------------------------------------------

std::string metrics_oracle(Check& c) {
  Rng rng(1001);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto n = static_cast<std::size_t>(rng.integer(6, 50));
    const auto gt = k % 2 ? random_trajectory(rng, n) : random_walk(rng, n);
    const auto est = k % 2 ? random_trajectory(rng, n) : random_walk(rng, n);
    for (std::size_t delta : {1u, 2u, 5u}) {
      const auto r = rpe(gt, est, delta);
      const auto o = oracle::rpe_matrix(gt, est, delta);
      c.expect(r.per_frame.size() == o.trans.size(), "rpe sample count");
      for (std::size_t i = 0; i < o.trans.size(); ++i) {
        const double dt = std::abs(r.per_frame[i].translation - o.trans[i]);
        const double dr = std::abs(rad_to_deg(r.per_frame[i].rotation) - o.rot_deg[i]);
        worst = std::max({worst, dt, dr});
        c.expect(dt <= 1e-9 && dr <= 1e-9, "rpe pair " + std::to_string(k) + " sample " + std::to_string(i));
      }
    }
    const auto a = ate(gt, est);
    const auto o = oracle::ate_matrix(gt, est);
    for (std::size_t i = 0; i < o.size(); ++i) {
      const double d = std::abs(a.per_frame[i] - o[i]);
      worst = std::max(worst, d);
      c.expect(d <= 1e-9, "ate pair " + std::to_string(k) + " sample " + std::to_string(i));
    }
  }
  return "max deviation " + num(worst);
}

// 2 -------------------------------------------------------------------------

std::string metric_invariance(Check& c) {
  Rng rng(1002);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto gt = random_walk(rng, 30);
    const auto est = random_walk(rng, 30);
    const auto base = ate(gt, est);
    const auto moved = ate(gt, left_compose(random_pose(rng), est));
    for (std::size_t i = 0; i < gt.size(); ++i) {
      const double d = std::abs(base.per_frame[i] - moved.per_frame[i]);
      worst = std::max(worst, d);
      c.expect(d <= 1e-9, "ate invariance, trial " + std::to_string(k));
    }
    const Pose s = random_pose(rng);
    const auto r0 = rpe(gt, est, 1);
    const auto r1 = rpe(left_compose(s, gt), left_compose(s, est), 1);
    for (std::size_t i = 0; i < r0.per_frame.size(); ++i) {
      const double dt = std::abs(r0.per_frame[i].translation - r1.per_frame[i].translation);
      const double dr = std::abs(rad_to_deg(r0.per_frame[i].rotation) - rad_to_deg(r1.per_frame[i].rotation));
      worst = std::max({worst, dt, dr});
      c.expect(dt <= 1e-9 && dr <= 1e-9, "rpe invariance, trial " + std::to_string(k));
    }
    const auto same_ate = ate(gt, gt);
    const auto same_rpe = rpe(gt, gt, 1);
    c.expect(same_ate.translational.rmse == 0.0, "ate of identical trajectories is not exactly 0");
    c.expect(same_rpe.translational.rmse == 0.0 && same_rpe.rotational.rmse == 0.0,
             "rpe of identical trajectories is not exactly 0");
  }
  return "max deviation " + num(worst);
}

// 3 -------------------------------------------------------------------------

std::string alignment_exactness(Check& c) {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(3000 + seed);
    std::vector<Vec3> src, ref;
    const Pose t = random_pose(rng);
    for (int i = 0; i < 10; ++i) {
      src.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
      ref.push_back(t.apply(src.back()));
    }
    const auto r = umeyama_align(ref, src);
    worst = std::max(worst, r.residual_rmse);
    c.expect(r.residual_rmse < 1e-10, "residual " + num(r.residual_rmse) + " at seed " + std::to_string(seed));
    c.expect((r.transform.matrix() - t.matrix()).cwiseAbs().maxCoeff() < 1e-9, "transform differs");
  }
  bool thrown = false;
  try {
    const std::vector<Vec3> line{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}, {3, 3, 3}};
    umeyama_align(line, line);
  } catch (const DegenerateGeometry&) {
    thrown = true;
  }
  c.expect(thrown, "collinear input accepted");
  return "max residual " + num(worst);
}

// 4 -------------------------------------------------------------------------

double fraction_recovered(const std::vector<FlowTrack>& tracks, const Vec2& shift, int w, int h, int margin) {
  int n = 0, ok = 0;
  for (const auto& t : tracks) {
    const auto& p = t.prev;
    if (p.x() < margin || p.y() < margin || p.x() > w - 1 - margin || p.y() > h - 1 - margin) continue;
    ++n;
    if (t.tracked && (t.displacement() - shift).norm() <= 0.3) ++ok;
  }
  return n ? static_cast<double>(ok) / n : 0.0;
}

std::string flow_accuracy(Check& c) {
  const int w = 200, h = 160;
  const FlowConfig cfg;
  double worst_fraction = 1.0;
  int shifts = 0;
  for (int dy = -5; dy <= 5; ++dy) {
    for (int dx = -5; dx <= 5; ++dx) {
      if (dx * dx + dy * dy > 25) continue;
      ++shifts;
      auto [a, b] = shifted_pair(4000 + static_cast<std::uint64_t>(shifts), w, h, dx, dy);
      const auto tracks = track_pyr_lk(a, b, detect_corners(a, cfg), cfg);
      const double f = fraction_recovered(tracks, Vec2(dx, dy), w, h, 15);
      worst_fraction = std::min(worst_fraction, f);
      c.expect(f >= 0.95, "shift (" + std::to_string(dx) + "," + std::to_string(dy) + ") recovered " + num(f));
    }
  }
  auto [a, b] = shifted_pair(4100, w, h, 0, 0);
  double still = 0.0;
  for (const auto& t : track_pyr_lk(a, a, detect_corners(a, cfg), cfg)) {
    c.expect(t.tracked, "identical frames: point lost");
    still = std::max(still, t.displacement().norm());
  }
  c.expect(still < 1e-3, "identical frames moved " + num(still));

  // Shift beyond window/2 = 10.5 px.
  auto [p, q] = shifted_pair(4200, w, h, 11, 0);
  const auto pts = detect_corners(p, cfg);
  FlowConfig one = cfg;
  one.pyramid_levels = 1;
  const double single = fraction_recovered(track_pyr_lk(p, q, pts, one), {11, 0}, w, h, 30);
  const double pyramid = fraction_recovered(track_pyr_lk(p, q, pts, cfg), {11, 0}, w, h, 30);
  c.expect(single < 0.5, "1-level recovered " + num(single) + " at 11 px");
  c.expect(pyramid >= 0.95, "3-level recovered " + num(pyramid) + " at 11 px");
  return std::to_string(shifts) + " shifts, worst " + num(worst_fraction) + "; identical max " + num(still) +
         "; 11 px: 1-level " + num(single) + ", 3-level " + num(pyramid);
}

// 5 -------------------------------------------------------------------------

std::string algorithm_fidelity(Check& c) {
  const double thresholds[] = {0.5, 1.0, 2.0};
  int judged = 0, wrong = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    for (auto kind : {FixtureKind::walking, FixtureKind::sitting}) {
      const auto seq = generate_fixture(5000 + seed, kind, FixtureParams{});
      const FixtureParams p;
      for (std::size_t k = 1; k < seq.frames.size(); ++k) {
        DynamicConfig base;
        const auto tracks =
            track_pyr_lk(seq.frames[k - 1], seq.frames[k], detect_corners(seq.frames[k - 1], base.flow), base.flow);
        const auto& det = seq.detections[k];
        std::vector<int> prev_counts;
        std::vector<bool> prev_moving;
        for (double th : thresholds) {
          DynamicConfig cfg;
          cfg.threshold1 = th;
          const auto r = judge_tracks(tracks, p.width, p.height, det, cfg);
          for (std::size_t b = 0; b < r.verdict.per_box.size(); ++b) {
            const auto& v = r.verdict.per_box[b];
            ++judged;
            if (v.is_moving != seq.moving[k][v.box_index]) {
              ++wrong;
              c.expect(false, "seed " + std::to_string(seed) + " frame " + std::to_string(k) + " box " +
                                  std::to_string(v.box_index) + " at threshold1 " + num(th));
            }
            // Raising threshold1 never adds dynamic points or moving boxes.
            if (!prev_counts.empty()) {
              c.expect(v.dynamic_count <= prev_counts[b], "threshold1 monotonicity (count)");
              c.expect(!v.is_moving || prev_moving[b], "threshold1 monotonicity (verdict)");
            }
          }
          prev_counts.clear();
          prev_moving.clear();
          for (const auto& v : r.verdict.per_box) {
            prev_counts.push_back(v.dynamic_count);
            prev_moving.push_back(v.is_moving);
          }
        }
        // Raising either part of threshold2 never adds decidable moving boxes.
        std::vector<bool> last;
        for (double fraction : {0.1, 0.25, 0.5, 0.75, 1.0}) {
          DynamicConfig cfg;
          cfg.policy.fraction = fraction;
          const auto r = judge_tracks(tracks, p.width, p.height, det, cfg);
          for (std::size_t b = 0; b < last.size(); ++b) {
            const auto& v = r.verdict.per_box[b];
            c.expect(v.undecidable || !v.is_moving || last[b], "threshold2 fraction monotonicity");
          }
          last.clear();
          for (const auto& v : r.verdict.per_box) last.push_back(v.is_moving);
        }
        last.clear();
        for (int absolute_min : {1, 3, 5, 10, 20}) {
          DynamicConfig cfg;
          cfg.policy.absolute_min = absolute_min;
          const auto r = judge_tracks(tracks, p.width, p.height, det, cfg);
          for (std::size_t b = 0; b < last.size(); ++b) {
            const auto& v = r.verdict.per_box[b];
            c.expect(v.undecidable || !v.is_moving || last[b], "threshold2 absolute_min monotonicity");
          }
          last.clear();
          for (const auto& v : r.verdict.per_box) last.push_back(v.is_moving);
        }
      }
    }
  }
  return std::to_string(judged) + " box verdicts, " + std::to_string(wrong) + " wrong";
}

// 6 -------------------------------------------------------------------------

std::string mask_correctness(Check& c) {
  Rng rng(6001);
  long long total = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = static_cast<int>(rng.integer(1, 8));
    std::vector<BoundingBox> boxes;
    std::vector<oracle::IRect> rects;
    DynamicVerdict v;
    for (int i = 0; i < n; ++i) {
      const int x = static_cast<int>(rng.integer(-20, 100)), y = static_cast<int>(rng.integer(-20, 70));
      const int w = static_cast<int>(rng.integer(1, 50)), h = static_cast<int>(rng.integer(1, 50));
      boxes.push_back({"person", 1, double(x), double(y), double(w), double(h)});
      v.per_box.push_back({static_cast<std::size_t>(i), 0, 0, true, false});
      rects.push_back({x, y, x + w, y + h});
    }
    const long long got = static_cast<long long>(build_mask(100, 75, v, boxes).count());
    const long long want = oracle::union_area(rects, 100, 75);
    total += want;
    c.expect(got == want, "set " + std::to_string(k) + ": " + std::to_string(got) + " vs " + std::to_string(want));
  }
  return "100 sets, " + std::to_string(total) + " masked pixels in total";
}

// 7 -------------------------------------------------------------------------

std::string astar_optimality(Check& c) {
  Rng rng(7001);
  int solved = 0, unreachable = 0;
  for (int k = 0; k < 50; ++k) {
    OccupancyGrid g(64, 64, 0.1);
    for (int r = 0; r < 64; ++r) {
      for (int col = 0; col < 64; ++col) g.set(col, r, rng.uniform() < 0.2 ? 1.0 : 0.0);
    }
    const Cell s{static_cast<int>(rng.integer(0, 63)), static_cast<int>(rng.integer(0, 63))};
    const Cell t{static_cast<int>(rng.integer(0, 63)), static_cast<int>(rng.integer(0, 63))};
    g.set(s, 0.0);
    g.set(t, 0.0);
    const double want = oracle::dijkstra_cost(g, s, t, 0.5);
    if (want < 0) {
      ++unreachable;
      bool thrown = false;
      try {
        astar(g, s, t);
      } catch (const NoPath&) {
        thrown = true;
      }
      c.expect(thrown, "grid " + std::to_string(k) + ": no NoPath");
      continue;
    }
    ++solved;
    const auto a = astar(g, s, t);
    c.expect(std::abs(a.cost - want) <= 1e-9, "grid " + std::to_string(k) + ": cost " + num(a.cost) + " vs " + num(want));
    c.expect(astar(g, s, t).path == a.path, "grid " + std::to_string(k) + ": path differs on rerun");
  }
  return std::to_string(solved) + " solved, " + std::to_string(unreachable) + " unreachable";
}

// 8 -------------------------------------------------------------------------

std::string vfh_behavior(Check& c) {
  const VfhConfig cfg;
  PolarHistogram empty;
  empty.sectors.assign(72, 0.0);
  for (double target : {0.0, 0.1234, -2.9, 3.0, std::numbers::pi}) {
    const auto d = select_steering(empty, target, 1.0, -1.0, cfg);
    c.expect(!d.blocked && d.heading == target, "empty histogram missed target " + num(target));
  }

  Rng rng(8001);
  for (int k = 0; k < 1000; ++k) {
    PolarHistogram primary, previous;
    for (int s = 0; s < 72; ++s) {
      primary.sectors.push_back(rng.uniform(0, 6000));
      previous.sectors.push_back(rng.uniform() < 0.5 ? 1.0 : 0.0);
    }
    const bool use_prev = k % 3 != 0;
    const auto got = binarize_histogram(primary, use_prev ? &previous : nullptr, cfg.tau_low, cfg.tau_high);
    c.expect(got.sectors == oracle::hysteresis(primary.sectors, use_prev ? &previous.sectors : nullptr, cfg.tau_low,
                                               cfg.tau_high),
             "hysteresis mismatch at " + std::to_string(k));
  }

  for (int k = 0; k < 200; ++k) {
    OccupancyGrid g(40, 40, 0.1);
    for (int r = 0; r < 40; ++r) {
      for (int col = 0; col < 40; ++col) g.set(col, r, rng.uniform() < 0.05 ? 1.0 : 0.0);
    }
    PolarHistogram b;
    for (int s = 0; s < 72; ++s) b.sectors.push_back(rng.uniform() < 0.3 ? 1.0 : 0.0);
    const MotionState st{rng.uniform(0.5, 3.5), rng.uniform(0.5, 3.5), rng.uniform(-3, 3), rng.uniform(0, 1), 0};
    const auto m = mask_histogram(b, g, st, rng.uniform(0, 1.5), cfg);
    for (std::size_t s = 0; s < 72; ++s) c.expect(m[s] >= b[s], "mask unblocked a sector");
  }

  for (int k = 0; k < 100; ++k) {
    PolarHistogram h;
    h.sectors.assign(72, 1.0);
    const int valleys = static_cast<int>(rng.integer(1, 4));
    for (int v = 0; v < valleys; ++v) {
      const int start = static_cast<int>(rng.integer(0, 71)), width = static_cast<int>(rng.integer(1, 30));
      for (int s = 0; s < width; ++s) h.sectors[static_cast<std::size_t>((start + s) % 72)] = 0.0;
    }
    const double target = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double heading = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const double previous = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const auto d = select_steering(h, target, heading, previous, cfg);
    const auto o = oracle::steering_exhaustive(h.sectors, target, heading, previous, cfg);
    c.expect(d.blocked == o.blocked && angle_distance(d.heading, o.heading) <= 1e-9,
             "steering differs from oracle at configuration " + std::to_string(k));
  }
  return "target, 1000 hysteresis, 200 mask, 100 steering cases";
}

// 9 -------------------------------------------------------------------------

std::string navigation_success(Check& c) {
  int reached[3] = {0, 0, 0};
  const double clearances[3] = {1.0, 0.5, 0.25};
  for (int ci = 0; ci < 3; ++ci) {
    SceneParams p;
    p.min_goal_clearance = clearances[ci];
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto world = generate_scene(seed, p);
      reached[ci] += run_episode(world, SimConfig{}, seed).outcome == Outcome::reached;
    }
  }
  c.expect(reached[0] >= 95, "only " + std::to_string(reached[0]) + "/100 reached at 1.0 m");
  c.expect(reached[1] <= reached[0] && reached[2] <= reached[1], "success rate increased as clearance dropped");
  return "reached " + std::to_string(reached[0]) + "/" + std::to_string(reached[1]) + "/" +
         std::to_string(reached[2]) + " of 100 at clearance 1.0/0.5/0.25 m";
}

// 10 ------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under dir, keyed by relative path.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return out;
}

std::string cli_determinism(Check& c, const std::string& cli) {
  const fs::path root = fs::temp_directory_path() / "dotnav_acceptance_cli";
  fs::remove_all(root);
  const fs::path inputs = root / "inputs";
  fs::create_directories(inputs);

  // Inputs shared by both runs.
  Rng rng(10001);
  std::ofstream(inputs / "gt.txt") << write_trajectory(random_walk(rng, 60));
  std::ofstream(inputs / "est.txt") << write_trajectory(random_walk(rng, 60));
  OccupancyGrid g(32, 32, 0.1);
  for (int r = 0; r < 32; ++r) {
    for (int col = 0; col < 32; ++col) g.set(col, r, (r * 7 + col * 3) % 11 == 0 ? 1.0 : 0.0);
  }
  g.set(0, 0, 0.0);
  g.set(31, 31, 0.0);
  std::ofstream(inputs / "grid.txt") << write_grid(g);

  const std::string in = inputs.string();
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-fixtures", "gen-fixtures --seed 3 --frames 4 --out-dir fx"},
      {"detect-dynamic",
       "detect-dynamic --index " + in + "/fx/rgb.txt --detections " + in + "/fx/detections.jsonl --out-dir det"},
      {"mask", "mask --detections " + in + "/fx/detections.jsonl --width 320 --height 240 --out-dir mk"},
      {"gen-scene", "gen-scene --seed 5 --out scene.json"},
      {"simulate", "simulate --scene " + in + "/scene.json --seed 7 --log log.jsonl --dump-grid grid.pgm"},
      {"plan", "plan --grid " + in + "/grid.txt --start 0 0 --goal 31 31 --json"},
      {"eval-ate", "eval-ate --gt " + in + "/gt.txt --est " + in + "/est.txt --json"},
      {"eval-rpe", "eval-rpe --gt " + in + "/gt.txt --est " + in + "/est.txt --delta 3"},
  };
  // Fixtures and the scene are generated once into inputs/ for the later commands.
  auto exec = [&](const fs::path& dir, const std::string& args) {
    fs::create_directories(dir);
    const std::string cmd = "cd '" + dir.string() + "' && '" + cli + "' " + args +
                            " --manifest manifest.json >stdout.txt 2>stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  c.expect(exec(inputs, "gen-fixtures --seed 3 --frames 4 --out-dir fx") == 0, "fixture setup failed");
  c.expect(exec(inputs, "gen-scene --seed 5 --out scene.json") == 0, "scene setup failed");

  int compared = 0;
  for (const auto& [name, args] : commands) {
    const fs::path a = root / name / "a", b = root / name / "b";
    const int ca = exec(a, args), cb = exec(b, args);
    c.expect(ca == 0 && cb == 0, name + " exited " + std::to_string(ca) + "/" + std::to_string(cb));
    const auto sa = snapshot(a), sb = snapshot(b);
    c.expect(sa == sb, name + " outputs differ between runs");
    compared += static_cast<int>(sa.size());
  }
  fs::remove_all(root);
  return std::to_string(commands.size()) + " subcommands, " + std::to_string(compared) + " files compared";
}

// 11 ------------------------------------------------------------------------

std::string throughput(Check& c) {
  FixtureParams p;
  p.width = 640;
  p.height = 480;
  p.frames = 21;
  p.object_min = 80;
  p.object_max = 140;
  const auto seq = generate_fixture(11001, FixtureKind::walking, p);
  const DynamicConfig cfg;
  std::size_t corners = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t k = 1; k < seq.frames.size(); ++k) {
    const auto r = detect_dynamic(seq.frames[k - 1], seq.frames[k], seq.detections[k], cfg);
    corners += r.tracks.size();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double pairs = static_cast<double>(seq.frames.size() - 1);
  const double fps = pairs / secs;
  const double mean_corners = static_cast<double>(corners) / pairs;
  c.expect(mean_corners >= 1250 * 0.99, "only " + num(mean_corners) + " corners per frame");
  c.expect(fps >= 10.0, num(fps) + " frames/s");
  return num(fps) + " frames/s at 640x480, " + num(mean_corners) + " corners per frame";
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--cli" && i + 1 < argc) {
      cli = fs::absolute(argv[++i]).string();
    } else if (a == "--only" && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: acceptance --cli PATH [--only N]\n");
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<std::string(Check&)>>> criteria = {
      {"metrics oracle equivalence", metrics_oracle},
      {"metric invariances", metric_invariance},
      {"alignment exactness", alignment_exactness},
      {"flow accuracy", flow_accuracy},
      {"dynamic detection fidelity", algorithm_fidelity},
      {"mask correctness", mask_correctness},
      {"A* optimality", astar_optimality},
      {"VFH+ behaviour", vfh_behavior},
      {"navigation success", navigation_success},
      {"CLI determinism",
       [&](Check& c) {
         if (cli.empty()) {
           c.expect(false, "no --cli given");
           return std::string();
         }
         return cli_determinism(c, cli);
       }},
      {"detection throughput", throughput},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (only && static_cast<int>(i + 1) != only) continue;
    Check c;
    std::string detail;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      detail = criteria[i].second(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s: %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), detail.c_str(),
                secs);
    for (const auto& n : c.notes) std::printf("        %s\n", n.c_str());
    std::fflush(stdout);
    failed += !c.ok;
  }
  return failed ? 1 : 0;
}
