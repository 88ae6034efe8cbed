// dotnav: command-line front end for trajectory metrics, dynamic-object
// masking, grid planning and the navigation simulator.
//
// Exit codes: 0 success, 1 domain or I/O error (one JSON line on stderr),
// 2 usage error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dotnav/dotnav.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

class IoError : public dotnav::Error {
 public:
  explicit IoError(const std::string& message) : Error("IoError", message) {}
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

// Writes next to the target and renames, so readers never see a partial file.
void write_atomic(const fs::path& path, std::string_view data) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_atomic(const fs::path& path, const std::vector<std::uint8_t>& data) {
  write_atomic(path, std::string_view(reinterpret_cast<const char*>(data.data()), data.size()));
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fixed(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string frame_name(const char* prefix, std::size_t k) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu.pgm", prefix, k);
  return buf;
}

// Per-run context shared by all subcommands.
struct Run {
  CLI::App* sub = nullptr;
  bool json = false;
  std::string out;       // report destination; stdout when empty
  std::string manifest;  // manifest destination; stderr when empty
  std::map<std::string, std::string> digests;

  std::string input(const std::string& path) {
    std::string data = read_file(path);
    digests[path] = fnv1a_hex(data);
    return data;
  }

  void report(const std::string& text) const {
    if (out.empty()) {
      std::cout << text;
    } else {
      write_atomic(out, text);
    }
  }

  void finish() const {
    ordered_json m;
    m["command"] = sub->get_name();
    // Effective values in config-file form; feeding it back via --config replays the run.
    m["config"] = "[" + sub->get_name() + "]\n" + sub->config_to_str(true, false);
    m["inputs"] = ordered_json::object();
    for (const auto& [path, digest] : digests) m["inputs"][path] = "fnv1a64:" + digest;
    m["version"] = kVersion;
    if (manifest.empty()) {
      std::cerr << "manifest: " << m.dump() << "\n";
    } else {
      write_atomic(manifest, m.dump(2) + "\n");
    }
  }
};

std::string summary_row(const std::string& label, const dotnav::MetricSummary& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %12.6f %12.6f %12.6f %8zu\n", label.c_str(), s.rmse, s.mean, s.median,
                s.count);
  return buf;
}

std::string summary_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-18s %12s %12s %12s %8s\n", "metric", "rmse", "mean", "median", "count");
  return buf;
}

// ---------------------------------------------------------------------------
// Trajectory metrics

struct TrajArgs {
  std::string gt, est;
  double max_diff = 0.02;
};

void add_traj_args(CLI::App* sub, TrajArgs& a) {
  sub->add_option("--gt", a.gt, "Ground-truth trajectory (TUM format)")->required();
  sub->add_option("--est", a.est, "Estimated trajectory (TUM format)")->required();
  sub->add_option("--max-diff", a.max_diff, "Timestamp association tolerance, seconds")
      ->check(CLI::NonNegativeNumber);
}

std::pair<dotnav::Trajectory, dotnav::Trajectory> load_pair(Run& run, const TrajArgs& a) {
  const auto gt = dotnav::parse_trajectory(run.input(a.gt));
  const auto est = dotnav::parse_trajectory(run.input(a.est));
  return dotnav::associate_trajectories(gt, est, a.max_diff);
}

void eval_ate(Run& run, const TrajArgs& a) {
  const auto [gt, est] = load_pair(run, a);
  const auto report = dotnav::ate(gt, est);
  if (run.json) {
    run.report(dotnav::to_json(report).dump(2) + "\n");
    return;
  }
  std::string t = "ATE over " + std::to_string(gt.size()) + " associated poses\n";
  t += summary_header();
  t += summary_row("translation [m]", report.translational);
  t += "alignment residual [m]: " + fixed(report.alignment.residual_rmse) + "\n";
  run.report(t);
}

struct RpeArgs {
  std::size_t delta = 1;
  bool per_second = false;
  bool printed_form = false;
};

void eval_rpe(Run& run, const TrajArgs& a, const RpeArgs& r) {
  const auto [gt, est] = load_pair(run, a);
  const std::size_t delta = r.per_second ? dotnav::delta_for_seconds(gt, 1.0) : r.delta;
  const auto form = r.printed_form ? dotnav::RpeForm::printed : dotnav::RpeForm::canonical;
  const auto report = dotnav::rpe(gt, est, delta, form);
  if (run.json) {
    auto j = dotnav::to_json(report);
    j["form"] = r.printed_form ? "printed" : "canonical";
    run.report(j.dump(2) + "\n");
    return;
  }
  std::string t = "RPE over " + std::to_string(gt.size()) + " associated poses, delta " + std::to_string(delta) +
                  " frames" + (r.printed_form ? " (printed form)" : "") + "\n";
  t += summary_header();
  t += summary_row("translation [m]", report.translational);
  t += summary_row("rotation [deg]", report.rotational);
  run.report(t);
}

// ---------------------------------------------------------------------------
// Dynamic objects

struct DetectArgs {
  std::string index, detections, out_dir;
  double max_diff = 0.02;
  double threshold1 = 1.0;
  double fraction = 0.25;
  int absolute_min = 5;
  int max_corners = 1250;
  double min_distance = 7.0;
  int levels = 3;
  int window = 21;
  std::string model = "affine";
  std::string residual = "compensated";
  std::vector<std::string> classes{"person"};
};

dotnav::DynamicConfig detect_config(const DetectArgs& a) {
  dotnav::DynamicConfig cfg;
  cfg.threshold1 = a.threshold1;
  cfg.policy.fraction = a.fraction;
  cfg.policy.absolute_min = a.absolute_min;
  cfg.flow.max_corners = a.max_corners;
  cfg.flow.min_distance = a.min_distance;
  cfg.flow.pyramid_levels = a.levels;
  cfg.flow.window = a.window;
  cfg.model_kind = a.model == "translation" ? dotnav::MotionModelKind::translation : dotnav::MotionModelKind::affine;
  cfg.residual_mode = a.residual == "raw" ? dotnav::ResidualMode::raw : dotnav::ResidualMode::compensated;
  cfg.target_classes = a.classes;
  cfg.flow.validate();
  return cfg;
}

void detect_dynamic(Run& run, const DetectArgs& a) {
  const auto cfg = detect_config(a);
  const auto index = dotnav::parse_image_index(run.input(a.index));
  if (index.size() < 2) throw dotnav::InvalidArgument("need at least two frames");
  const fs::path base = fs::path(a.index).parent_path();
  std::vector<dotnav::GrayImage> frames;
  for (const auto& e : index) {
    frames.push_back(dotnav::read_gray_image(to_bytes(run.input((base / e.path).string()))));
  }
  const dotnav::ImageSize size{frames[0].width, frames[0].height};
  const auto dets = dotnav::parse_detections(run.input(a.detections), size);

  // Detections are attached to frames by nearest timestamp.
  std::vector<double> frame_t, det_t;
  for (const auto& e : index) frame_t.push_back(e.timestamp);
  for (const auto& d : dets) det_t.push_back(d.timestamp);
  std::vector<dotnav::FrameDetections> per_frame(index.size());
  for (std::size_t k = 0; k < index.size(); ++k) per_frame[k].timestamp = index[k].timestamp;
  for (const auto& [fk, dk] : dotnav::associate(frame_t, det_t, a.max_diff)) {
    per_frame[fk].boxes = dets[dk].boxes;
  }

  std::string log, table;
  ordered_json frames_json = ordered_json::array();
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %6s %6s %7s %10s\n", "t", "boxes", "moving", "tracks", "masked_px");
  table += buf;
  for (std::size_t k = 1; k < frames.size(); ++k) {
    const auto res = dotnav::detect_dynamic(frames[k - 1], frames[k], per_frame[k], cfg);
    const auto rec = dotnav::verdict_to_json(index[k].timestamp, res.verdict);
    log += rec.dump() + "\n";
    const std::string mask_name = frame_name("mask", k);
    write_atomic(fs::path(a.out_dir) / mask_name, dotnav::write_mask(res.mask));
    std::size_t moving = 0, tracked = 0;
    for (const auto& v : res.verdict.per_box) moving += v.is_moving;
    for (const auto& t : res.tracks) tracked += t.tracked;
    ordered_json fj;
    fj["t"] = index[k].timestamp;
    fj["mask"] = mask_name;
    fj["boxes"] = rec["boxes"];
    fj["tracks"] = tracked;
    fj["masked_px"] = res.mask.count();
    fj["background_model"] = res.model.has_value();
    frames_json.push_back(std::move(fj));
    std::snprintf(buf, sizeof buf, "%-14s %6zu %6zu %7zu %10zu\n", fixed(index[k].timestamp).c_str(),
                  res.verdict.per_box.size(), moving, tracked, res.mask.count());
    table += buf;
  }
  write_atomic(fs::path(a.out_dir) / "verdicts.jsonl", log);
  if (run.json) {
    ordered_json j;
    j["frames"] = std::move(frames_json);
    run.report(j.dump(2) + "\n");
  } else {
    run.report(table);
  }
}

struct MaskArgs {
  std::string detections, verdicts, out_dir;
  int width = 0, height = 0;
  std::vector<std::string> classes{"person"};
};

// Masks moving boxes from a verdict log, or every target-class box without one.
void mask_cmd(Run& run, const MaskArgs& a) {
  const dotnav::ImageSize size{a.width, a.height};
  const auto dets = dotnav::parse_detections(run.input(a.detections), size);
  std::vector<dotnav::VerdictRecord> verdicts;
  if (!a.verdicts.empty()) {
    std::istringstream in(run.input(a.verdicts));
    verdicts = dotnav::parse_verdicts(in);
  }
  std::string table;
  ordered_json frames = ordered_json::array();
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-14s %6s %10s\n", "t", "masked", "masked_px");
  table += buf;
  std::size_t next = 0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const auto& d = dets[k];
    dotnav::DynamicVerdict verdict;
    if (a.verdicts.empty()) {
      for (std::size_t i = 0; i < d.boxes.size(); ++i) {
        const bool target = std::find(a.classes.begin(), a.classes.end(), d.boxes[i].class_label) != a.classes.end();
        if (target) verdict.per_box.push_back({i, 0, 0, true, false});
      }
    } else {
      while (next < verdicts.size() && verdicts[next].timestamp < d.timestamp) ++next;
      if (next == verdicts.size() || verdicts[next].timestamp != d.timestamp) continue;  // frame never judged
      verdict = verdicts[next].verdict;
    }
    const auto m = dotnav::build_mask(a.width, a.height, verdict, d.boxes);
    const std::string name = frame_name("mask", k);
    write_atomic(fs::path(a.out_dir) / name, dotnav::write_mask(m));
    std::size_t masked = 0;
    for (const auto& v : verdict.per_box) masked += v.is_moving;
    frames.push_back({{"t", d.timestamp}, {"mask", name}, {"masked_boxes", masked}, {"masked_px", m.count()}});
    std::snprintf(buf, sizeof buf, "%-14s %6zu %10zu\n", fixed(d.timestamp).c_str(), masked,
                  m.count());
    table += buf;
  }
  if (run.json) {
    run.report(ordered_json{{"frames", frames}}.dump(2) + "\n");
  } else {
    run.report(table);
  }
}

// ---------------------------------------------------------------------------
// Planning and simulation

struct PlanArgs {
  std::string grid;
  double resolution = 0.1;  // used for PGM input only
  std::pair<int, int> start{0, 0}, goal{0, 0};
  double threshold = 0.5;
  double inflate = 0.0;
};

void plan_cmd(Run& run, const PlanArgs& a) {
  const std::string data = run.input(a.grid);
  dotnav::OccupancyGrid grid = fs::path(a.grid).extension() == ".pgm"
                                   ? dotnav::grid_from_image(dotnav::read_gray_image(to_bytes(data)), a.resolution)
                                   : dotnav::parse_grid(data);
  if (a.inflate > 0.0) grid = dotnav::inflate(grid, a.inflate, a.threshold);
  const dotnav::Cell s{a.start.first, a.start.second}, g{a.goal.first, a.goal.second};
  const auto res = dotnav::astar(grid, s, g, a.threshold);
  if (run.json) {
    ordered_json j;
    j["cost"] = res.cost;
    j["expanded"] = res.expanded;
    j["path"] = ordered_json::array();
    for (const auto& c : res.path) j["path"].push_back({c.col, c.row});
    run.report(j.dump() + "\n");
    return;
  }
  std::string t = "cost [m]: " + fixed(res.cost) + "\ncells: " + std::to_string(res.path.size()) +
                  "\nexpanded: " + std::to_string(res.expanded) + "\npath:";
  for (const auto& c : res.path) t += " " + std::to_string(c.col) + "," + std::to_string(c.row);
  run.report(t + "\n");
}

struct SimArgs {
  std::string scene, log, dump_grid;
  std::uint64_t seed = 0;
  int episodes = 1;
  dotnav::SimConfig cfg;
};

void simulate_cmd(Run& run, SimArgs& a) {
  const auto world = dotnav::world_from_json(nlohmann::json::parse(run.input(a.scene)));
  if (!a.dump_grid.empty()) {
    const auto g = dotnav::rasterize_world(world, a.cfg.grid_resolution, 0.0);
    write_atomic(a.dump_grid, dotnav::write_gray_image(dotnav::grid_to_image(g)));
  }
  std::string log, table;
  ordered_json episodes = ordered_json::array();
  char buf[192];
  std::snprintf(buf, sizeof buf, "%-8s %-9s %6s %9s %9s %7s\n", "seed", "outcome", "steps", "path_m", "min_clr",
                "replans");
  table += buf;
  int reached = 0;
  for (int e = 0; e < a.episodes; ++e) {
    const std::uint64_t seed = a.seed + static_cast<std::uint64_t>(e);
    std::vector<dotnav::StepRecord> steps;
    const auto res = dotnav::run_episode(world, a.cfg, seed, a.log.empty() ? nullptr : &steps);
    reached += res.outcome == dotnav::Outcome::reached;
    for (const auto& s : steps) log += dotnav::to_json(s).dump() + "\n";
    auto summary = dotnav::to_json(res);
    summary["seed"] = seed;
    if (!a.log.empty()) log += ordered_json{{"summary", summary}}.dump() + "\n";
    episodes.push_back(summary);
    std::snprintf(buf, sizeof buf, "%-8llu %-9s %6d %9.3f %9.3f %7d\n", static_cast<unsigned long long>(seed),
                  dotnav::to_string(res.outcome), res.steps, res.path_length, res.min_clearance, res.replans);
    table += buf;
  }
  if (!a.log.empty()) write_atomic(a.log, log);
  const double rate = static_cast<double>(reached) / a.episodes;
  if (run.json) {
    ordered_json j;
    j["episodes"] = std::move(episodes);
    j["reached"] = reached;
    j["success_rate"] = rate;
    run.report(j.dump(2) + "\n");
  } else {
    run.report(table + "reached " + std::to_string(reached) + "/" + std::to_string(a.episodes) + "\n");
  }
}

void gen_scene_cmd(Run& run, std::uint64_t seed, const dotnav::SceneParams& p) {
  run.report(dotnav::to_json(dotnav::generate_scene(seed, p)).dump(2) + "\n");
}

struct FixtureArgs {
  std::uint64_t seed = 0;
  std::string kind = "walking";
  std::string out_dir;
  dotnav::FixtureParams params;
};

void gen_fixtures_cmd(Run& run, const FixtureArgs& a) {
  const auto kind = a.kind == "sitting" ? dotnav::FixtureKind::sitting : dotnav::FixtureKind::walking;
  const auto seq = dotnav::generate_fixture(a.seed, kind, a.params);
  const fs::path dir(a.out_dir);
  std::vector<dotnav::ImageIndexEntry> index;
  std::string truth;
  for (std::size_t k = 0; k < seq.frames.size(); ++k) {
    const std::string name = frame_name("frame", k);
    write_atomic(dir / name, dotnav::write_gray_image(seq.frames[k]));
    index.push_back({seq.timestamps[k], name});
    truth += ordered_json{{"t", seq.timestamps[k]}, {"moving", seq.moving[k]}}.dump() + "\n";
  }
  write_atomic(dir / "rgb.txt", dotnav::write_image_index(index));
  write_atomic(dir / "detections.jsonl", dotnav::write_detections(seq.detections));
  write_atomic(dir / "truth.jsonl", truth);
  if (run.json) {
    run.report(ordered_json{{"frames", seq.frames.size()}, {"index", "rgb.txt"}, {"detections", "detections.jsonl"},
                            {"truth", "truth.jsonl"}}
                   .dump(2) +
               "\n");
  } else {
    run.report("wrote " + std::to_string(seq.frames.size()) + " frames, rgb.txt, detections.jsonl, truth.jsonl to " +
               a.out_dir + "\n");
  }
}

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << "error: " << nlohmann::json{{"kind", kind}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dotnav: trajectory metrics, dynamic-object masking, planning and simulation"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.option_defaults()->always_capture_default();
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML config file; flags override it")->envname("DOTNAV_CONFIG");

  Run run;
  app.add_flag("--json", run.json, "Print reports as JSON");
  app.add_option("--out", run.out, "Write the report to this file instead of stdout");
  app.add_option("--manifest", run.manifest, "Write the run manifest here instead of stderr");

  TrajArgs ate_args, rpe_traj;
  RpeArgs rpe_args;
  auto* ate = app.add_subcommand("eval-ate", "Absolute trajectory error after rigid alignment");
  add_traj_args(ate, ate_args);

  auto* rpe = app.add_subcommand("eval-rpe", "Relative pose error over a frame offset");
  add_traj_args(rpe, rpe_traj);
  auto* delta_opt = rpe->add_option("--delta", rpe_args.delta, "Frame offset (>= 1)")->check(CLI::Range(1, 1 << 30));
  rpe->add_flag("--per-second", rpe_args.per_second, "Use the offset nearest one second of timestamps")
      ->excludes(delta_opt);
  rpe->add_flag("--printed-form", rpe_args.printed_form, "Use the literal product form (comparison only)");

  DetectArgs det;
  auto* detect = app.add_subcommand("detect-dynamic", "Flag moving detection boxes and write masks");
  detect->add_option("--index", det.index, "Frame index (timestamp filename per line)")->required();
  detect->add_option("--detections", det.detections, "Detections JSON-lines file")->required();
  detect->add_option("--out-dir", det.out_dir, "Directory for masks and verdicts.jsonl")->required();
  detect->add_option("--max-diff", det.max_diff, "Frame/detection timestamp tolerance, seconds");
  detect->add_option("--threshold1", det.threshold1, "Point residual threshold, pixels")->check(CLI::PositiveNumber);
  detect->add_option("--threshold2-fraction", det.fraction, "Dynamic-point fraction for a moving box")
      ->check(CLI::Range(0.0, 1.0));
  detect->add_option("--threshold2-min", det.absolute_min, "Minimum dynamic points for a moving box")
      ->check(CLI::NonNegativeNumber);
  detect->add_option("--max-corners", det.max_corners, "Corner budget per frame")->check(CLI::PositiveNumber);
  detect->add_option("--min-distance", det.min_distance, "Corner spacing, pixels")->check(CLI::NonNegativeNumber);
  detect->add_option("--levels", det.levels, "Pyramid levels")->check(CLI::PositiveNumber);
  detect->add_option("--window", det.window, "Flow window, odd pixels");
  detect->add_option("--model", det.model, "Background motion model")
      ->check(CLI::IsMember({"affine", "translation"}));
  detect->add_option("--residual", det.residual, "Residual mode")->check(CLI::IsMember({"compensated", "raw"}));
  detect->add_option("--classes", det.classes, "Detection classes that may move");

  MaskArgs mk;
  auto* mask = app.add_subcommand("mask", "Write box masks from detections and an optional verdict log");
  mask->add_option("--detections", mk.detections, "Detections JSON-lines file")->required();
  mask->add_option("--verdicts", mk.verdicts, "Verdict log; without it every target box is masked");
  mask->add_option("--width", mk.width, "Image width")->required()->check(CLI::PositiveNumber);
  mask->add_option("--height", mk.height, "Image height")->required()->check(CLI::PositiveNumber);
  mask->add_option("--out-dir", mk.out_dir, "Directory for mask PGMs")->required();
  mask->add_option("--classes", mk.classes, "Target classes when no verdict log is given");

  PlanArgs pa;
  auto* plan = app.add_subcommand("plan", "A* path on an occupancy grid");
  plan->add_option("--grid", pa.grid, "Grid file (text, or .pgm)")->required();
  plan->add_option("--resolution", pa.resolution, "Cell size for PGM grids, meters")->check(CLI::PositiveNumber);
  plan->add_option("--start", pa.start, "Start cell: col row")->required();
  plan->add_option("--goal", pa.goal, "Goal cell: col row")->required();
  plan->add_option("--threshold", pa.threshold, "Occupied certainty threshold");
  plan->add_option("--inflate", pa.inflate, "Obstacle inflation radius, meters")->check(CLI::NonNegativeNumber);

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Run navigation episodes in a scene");
  sim->add_option("--scene", sa.scene, "Scenario JSON")->required();
  sim->add_option("--seed", sa.seed, "Episode seed (mover phases)");
  sim->add_option("--episodes", sa.episodes, "Episodes with consecutive seeds")->check(CLI::PositiveNumber);
  sim->add_option("--log", sa.log, "JSON-lines step log with one summary record per episode");
  sim->add_option("--dump-grid", sa.dump_grid, "Write the t = 0 occupancy grid as PGM");
  sim->add_option("--dt", sa.cfg.dt, "Control period, seconds")->check(CLI::PositiveNumber);
  sim->add_option("--max-steps", sa.cfg.max_steps, "Step budget")->check(CLI::PositiveNumber);
  sim->add_option("--v-max", sa.cfg.v_max, "Speed limit, m/s")->check(CLI::PositiveNumber);
  sim->add_option("--w-max", sa.cfg.w_max, "Turn-rate limit, rad/s")->check(CLI::PositiveNumber);
  sim->add_option("--robot-radius", sa.cfg.robot_radius, "Robot disc radius, m")->check(CLI::PositiveNumber);
  sim->add_option("--resolution", sa.cfg.grid_resolution, "Grid cell size, m")->check(CLI::PositiveNumber);
  sim->add_option("--inflation-margin", sa.cfg.inflation_margin, "Extra A* inflation, m")
      ->check(CLI::NonNegativeNumber);
  sim->add_option("--sectors", sa.cfg.vfh.sectors, "Polar histogram sectors")->check(CLI::PositiveNumber);
  sim->add_option("--window-radius", sa.cfg.vfh.window_radius, "Histogram window radius, m")
      ->check(CLI::PositiveNumber);
  sim->add_option("--s-max", sa.cfg.vfh.s_max, "Wide-valley width, sectors")->check(CLI::PositiveNumber);
  sim->add_option("--tau-low", sa.cfg.vfh.tau_low, "Lower binarization threshold");
  sim->add_option("--tau-high", sa.cfg.vfh.tau_high, "Upper binarization threshold");

  std::uint64_t scene_seed = 0;
  dotnav::SceneParams sp;
  auto* scene = app.add_subcommand("gen-scene", "Generate a random scenario");
  scene->add_option("--seed", scene_seed, "Scene seed");
  scene->add_option("--n-obstacles", sp.n_obstacles, "Static obstacles")->check(CLI::NonNegativeNumber);
  scene->add_option("--n-movers", sp.n_movers, "Moving obstacles")->check(CLI::NonNegativeNumber);
  scene->add_option("--width", sp.width, "Arena width, m")->check(CLI::PositiveNumber);
  scene->add_option("--height", sp.height, "Arena height, m")->check(CLI::PositiveNumber);
  scene->add_option("--min-goal-clearance", sp.min_goal_clearance, "Obstacle-free radius around the goal, m")
      ->check(CLI::NonNegativeNumber);
  scene->add_option("--near-goal", sp.near_goal, "Obstacles placed just outside the goal clearance")
      ->check(CLI::NonNegativeNumber);

  FixtureArgs fa;
  auto* fix = app.add_subcommand("gen-fixtures", "Generate a synthetic frame sequence with detections");
  fix->add_option("--seed", fa.seed, "Fixture seed");
  fix->add_option("--kind", fa.kind, "Sequence kind")->check(CLI::IsMember({"walking", "sitting"}));
  fix->add_option("--out-dir", fa.out_dir, "Output directory")->required();
  fix->add_option("--frames", fa.params.frames, "Frame count")->check(CLI::Range(2, 10000));
  fix->add_option("--width", fa.params.width, "Frame width")->check(CLI::Range(64, 8192));
  fix->add_option("--height", fa.params.height, "Frame height")->check(CLI::Range(64, 8192));
  fix->add_option("--pan-x", fa.params.pan_x, "Camera pan per frame, pixels");
  fix->add_option("--pan-y", fa.params.pan_y, "Camera pan per frame, pixels");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*ate) {
      run.sub = ate;
      eval_ate(run, ate_args);
    } else if (*rpe) {
      run.sub = rpe;
      eval_rpe(run, rpe_traj, rpe_args);
    } else if (*detect) {
      run.sub = detect;
      detect_dynamic(run, det);
    } else if (*mask) {
      run.sub = mask;
      mask_cmd(run, mk);
    } else if (*plan) {
      run.sub = plan;
      plan_cmd(run, pa);
    } else if (*sim) {
      run.sub = sim;
      simulate_cmd(run, sa);
    } else if (*scene) {
      run.sub = scene;
      gen_scene_cmd(run, scene_seed, sp);
    } else if (*fix) {
      run.sub = fix;
      gen_fixtures_cmd(run, fa);
    }
    run.finish();
  } catch (const dotnav::Error& e) {
    print_error(e.kind(), e.what());
    return 1;
  } catch (const nlohmann::json::exception& e) {
    print_error("FormatError", e.what());
    return 1;
  } catch (const fs::filesystem_error& e) {
    print_error("IoError", e.what());
    return 1;
  }
  return 0;
}
