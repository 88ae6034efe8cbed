#pragma once

// TUM RGB-D style text formats, detection JSON-lines, and binary PGM images.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dotnav/error.hpp"
#include "dotnav/geometry.hpp"

namespace dotnav {

/// Shortest decimal text that parses back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace detail {

inline bool parse_double(std::string_view tok, double& out) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return res.ec == std::errc() && res.ptr == tok.data() + tok.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
    const std::size_t start = i;
    while (i < line.size() && !(line[i] == ' ' || line[i] == '\t' || line[i] == '\r' || line[i] == ',')) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

inline bool is_blank_or_comment(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectories

struct TimedPose {
  double timestamp = 0.0;  // seconds
  Pose pose;
};

/// Timestamp-ordered poses; timestamps are strictly increasing.
struct Trajectory {
  std::vector<TimedPose> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  const TimedPose& operator[](std::size_t i) const { return entries[i]; }

  std::vector<double> timestamps() const {
    std::vector<double> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.timestamp);
    return out;
  }

  std::vector<Vec3> positions() const {
    std::vector<Vec3> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.pose.translation());
    return out;
  }
};

/// Parses `timestamp tx ty tz qx qy qz qw` lines; `#` lines and blank lines
/// are skipped.
inline Trajectory parse_trajectory(std::istream& in) {
  Trajectory traj;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 8) {
      throw ParseError(lineno, "expected 8 fields, found " + std::to_string(tok.size()));
    }
    double v[8];
    for (std::size_t k = 0; k < 8; ++k) {
      if (!detail::parse_double(tok[k], v[k])) {
        throw ParseError(lineno, "malformed number '" + std::string(tok[k]) + "'");
      }
    }
    const Eigen::Quaterniond q(v[7], v[4], v[5], v[6]);
    if (!(q.norm() > 0.0) || !std::isfinite(q.norm())) {
      throw ParseError(lineno, "quaternion has zero or non-finite norm");
    }
    if (!traj.entries.empty() && !(v[0] > traj.entries.back().timestamp)) {
      throw OrderError("line " + std::to_string(lineno) + ": timestamp " + std::string(tok[0]) +
                       " does not increase");
    }
    traj.entries.push_back({v[0], Pose(q, Vec3(v[1], v[2], v[3]))});
  }
  return traj;
}

inline Trajectory parse_trajectory(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trajectory(in);
}

inline std::string write_trajectory(const Trajectory& traj) {
  std::string out;
  for (const auto& e : traj.entries) {
    const auto& t = e.pose.translation();
    const auto& q = e.pose.rotation();
    const double vals[8] = {e.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()};
    for (int k = 0; k < 8; ++k) {
      if (k) out += ' ';
      out += format_number(vals[k]);
    }
    out += '\n';
  }
  return out;
}

/// Greedy nearest-timestamp matching: candidate pairs with |a - b| <= max_diff
/// are taken in order of increasing gap, each index used at most once.
/// Returned pairs are sorted by the index into `a`.
inline std::vector<std::pair<std::size_t, std::size_t>> associate(std::span<const double> a,
                                                                  std::span<const double> b,
                                                                  double max_diff) {
  struct Candidate {
    double gap;
    std::size_t ia, ib;
  };
  std::vector<Candidate> cands;
  // Both lists are sorted, so only a window of b is within reach of each a.
  std::size_t lo = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    while (lo < b.size() && b[lo] < a[i] - max_diff) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j] <= a[i] + max_diff; ++j) {
      cands.push_back({std::abs(a[i] - b[j]), i, j});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
    if (x.gap != y.gap) return x.gap < y.gap;
    if (x.ia != y.ia) return x.ia < y.ia;
    return x.ib < y.ib;
  });
  std::vector<char> used_a(a.size(), 0), used_b(b.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& c : cands) {
    if (used_a[c.ia] || used_b[c.ib]) continue;
    used_a[c.ia] = used_b[c.ib] = 1;
    out.emplace_back(c.ia, c.ib);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::pair<std::size_t, std::size_t>> associate(const std::vector<double>& a,
                                                                  const std::vector<double>& b,
                                                                  double max_diff) {
  return associate(std::span<const double>(a), std::span<const double>(b), max_diff);
}

/// Restricts two trajectories to their associated entries, pairwise aligned.
inline std::pair<Trajectory, Trajectory> associate_trajectories(const Trajectory& gt,
                                                               const Trajectory& est,
                                                               double max_diff = 0.02) {
  const auto pairs = associate(gt.timestamps(), est.timestamps(), max_diff);
  std::pair<Trajectory, Trajectory> out;
  for (const auto& [i, j] : pairs) {
    out.first.entries.push_back(gt.entries[i]);
    out.second.entries.push_back(est.entries[j]);
  }
  return out;
}

/// TUM image index (`rgb.txt`): `timestamp filename` per line.
struct ImageIndexEntry {
  double timestamp = 0.0;
  std::string path;
};

inline std::vector<ImageIndexEntry> parse_image_index(std::istream& in) {
  std::vector<ImageIndexEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    const auto tok = detail::split_ws(line);
    if (tok.size() != 2) throw ParseError(lineno, "expected 'timestamp filename'");
    ImageIndexEntry e;
    if (!detail::parse_double(tok[0], e.timestamp)) throw ParseError(lineno, "malformed timestamp");
    if (!out.empty() && !(e.timestamp > out.back().timestamp)) {
      throw OrderError("line " + std::to_string(lineno) + ": timestamp does not increase");
    }
    e.path = std::string(tok[1]);
    out.push_back(std::move(e));
  }
  return out;
}

inline std::vector<ImageIndexEntry> parse_image_index(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_image_index(in);
}

inline std::string write_image_index(const std::vector<ImageIndexEntry>& index) {
  std::string out = "# timestamp filename\n";
  for (const auto& e : index) out += format_number(e.timestamp) + " " + e.path + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Detections

struct BoundingBox {
  std::string class_label;
  double score = 0.0;  // [0, 1]
  double x = 0.0, y = 0.0;  // top-left, pixels
  double w = 0.0, h = 0.0;

  /// Boundary-inclusive containment.
  bool contains(double px, double py) const {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }

  bool operator==(const BoundingBox&) const = default;
};

struct FrameDetections {
  double timestamp = 0.0;
  std::vector<BoundingBox> boxes;
  std::size_t clamped = 0;  // boxes trimmed to the image rectangle
  std::size_t dropped = 0;  // boxes entirely outside the image
};

struct ImageSize {
  int width = 0;
  int height = 0;
};

/// Intersects the box with [0,width] x [0,height]. Returns false when nothing
/// of positive area remains.
inline bool clamp_box(BoundingBox& box, ImageSize size, bool& changed) {
  const double x0 = std::clamp(box.x, 0.0, static_cast<double>(size.width));
  const double y0 = std::clamp(box.y, 0.0, static_cast<double>(size.height));
  const double x1 = std::clamp(box.x + box.w, 0.0, static_cast<double>(size.width));
  const double y1 = std::clamp(box.y + box.h, 0.0, static_cast<double>(size.height));
  changed = x0 != box.x || y0 != box.y || x1 != box.x + box.w || y1 != box.y + box.h;
  if (!(x1 > x0) || !(y1 > y0)) return false;
  if (changed) {
    box.x = x0;
    box.y = y0;
    box.w = x1 - x0;
    box.h = y1 - y0;
  }
  return true;
}

/// One JSON object per line: {"t": s, "boxes": [{"cls", "score", "x", "y", "w", "h"}]}.
/// With `bounds`, boxes are clamped to the image and the clamp events counted.
inline std::vector<FrameDetections> parse_detections(std::istream& in,
                                                     std::optional<ImageSize> bounds = std::nullopt) {
  using nlohmann::json;
  std::vector<FrameDetections> frames;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_blank_or_comment(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("malformed JSON: ") + e.what());
    }
    auto number = [&](const json& obj, const char* key) -> double {
      if (!obj.is_object() || !obj.contains(key)) throw ParseError(lineno, std::string("missing key '") + key + "'");
      const auto& v = obj.at(key);
      if (!v.is_number()) throw ParseError(lineno, std::string("key '") + key + "' is not a number");
      return v.get<double>();
    };
    FrameDetections frame;
    frame.timestamp = number(rec, "t");
    if (!rec.contains("boxes") || !rec.at("boxes").is_array()) {
      throw ParseError(lineno, "missing array 'boxes'");
    }
    for (const auto& jb : rec.at("boxes")) {
      BoundingBox box;
      if (!jb.is_object() || !jb.contains("cls") || !jb.at("cls").is_string()) {
        throw ParseError(lineno, "box without string 'cls'");
      }
      box.class_label = jb.at("cls").get<std::string>();
      box.score = number(jb, "score");
      box.x = number(jb, "x");
      box.y = number(jb, "y");
      box.w = number(jb, "w");
      box.h = number(jb, "h");
      if (!(box.w > 0.0) || !(box.h > 0.0)) throw ParseError(lineno, "box with non-positive size");
      if (!(box.score >= 0.0 && box.score <= 1.0)) throw ParseError(lineno, "score outside [0,1]");
      if (bounds) {
        bool changed = false;
        if (!clamp_box(box, *bounds, changed)) {
          ++frame.dropped;
          continue;
        }
        if (changed) ++frame.clamped;
      }
      frame.boxes.push_back(std::move(box));
    }
    frames.push_back(std::move(frame));
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const FrameDetections& a, const FrameDetections& b) { return a.timestamp < b.timestamp; });
  return frames;
}

inline std::vector<FrameDetections> parse_detections(std::string_view text,
                                                     std::optional<ImageSize> bounds = std::nullopt) {
  std::istringstream in{std::string(text)};
  return parse_detections(in, bounds);
}

inline nlohmann::ordered_json detections_to_json(const FrameDetections& frame) {
  nlohmann::ordered_json rec;
  rec["t"] = frame.timestamp;
  rec["boxes"] = nlohmann::ordered_json::array();
  for (const auto& b : frame.boxes) {
    nlohmann::ordered_json jb;
    jb["cls"] = b.class_label;
    jb["score"] = b.score;
    jb["x"] = b.x;
    jb["y"] = b.y;
    jb["w"] = b.w;
    jb["h"] = b.h;
    rec["boxes"].push_back(std::move(jb));
  }
  return rec;
}

inline std::string write_detections(std::span<const FrameDetections> frames) {
  std::string out;
  for (const auto& f : frames) out += detections_to_json(f).dump() + "\n";
  return out;
}

inline std::string write_detections(const std::vector<FrameDetections>& frames) {
  return write_detections(std::span<const FrameDetections>(frames));
}

// ---------------------------------------------------------------------------
// Images

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const GrayImage&) const = default;
};

/// true = masked (dynamic).
struct Mask {
  int width = 0;
  int height = 0;
  std::vector<bool> bits;  // row-major

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), bits(static_cast<std::size_t>(w) * h, false) {}

  bool at(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, bool v = true) { bits[static_cast<std::size_t>(y) * width + x] = v; }

  std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true)); }

  bool operator==(const Mask&) const = default;
};

namespace detail {

// Reads the next header token of a PNM file, skipping whitespace and comments.
inline std::string_view pnm_token(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  auto is_ws = [](std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; };
  for (;;) {
    while (pos < bytes.size() && is_ws(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !is_ws(bytes[pos]) && bytes[pos] != '#') ++pos;
  return {reinterpret_cast<const char*>(bytes.data()) + start, pos - start};
}

inline int pnm_int(std::span<const std::uint8_t> bytes, std::size_t& pos, const char* what) {
  const auto tok = pnm_token(bytes, pos);
  int v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
    throw FormatError(std::string("PGM: bad ") + what);
  }
  return v;
}

}  // namespace detail

/// Decodes a binary PGM (P5) with maxval <= 255.
inline GrayImage read_gray_image(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (detail::pnm_token(bytes, pos) != "P5") throw FormatError("PGM: bad magic (expected P5)");
  const int w = detail::pnm_int(bytes, pos, "width");
  const int h = detail::pnm_int(bytes, pos, "height");
  const int maxval = detail::pnm_int(bytes, pos, "maxval");
  if (w <= 0 || h <= 0) throw FormatError("PGM: non-positive dimensions");
  if (maxval <= 0 || maxval > 255) throw FormatError("PGM: only 8-bit maxval supported");
  ++pos;  // single whitespace byte before the raster
  const std::size_t n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (pos > bytes.size() || bytes.size() - pos < n) throw FormatError("PGM: truncated raster");
  GrayImage img(w, h);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), n, img.pixels.begin());
  return img;
}

inline GrayImage read_gray_image(const std::vector<std::uint8_t>& bytes) {
  return read_gray_image(std::span<const std::uint8_t>(bytes));
}

inline std::vector<std::uint8_t> write_gray_image(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

/// Masks are stored as P5 with 0 = keep and 255 = masked.
inline std::vector<std::uint8_t> write_mask(const Mask& mask) {
  GrayImage img(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.bits.size(); ++i) img.pixels[i] = mask.bits[i] ? 255 : 0;
  return write_gray_image(img);
}

/// Any nonzero pixel reads back as masked.
inline Mask read_mask(std::span<const std::uint8_t> bytes) {
  const GrayImage img = read_gray_image(bytes);
  Mask mask(img.width, img.height);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) mask.bits[i] = img.pixels[i] != 0;
  return mask;
}

inline Mask read_mask(const std::vector<std::uint8_t>& bytes) {
  return read_mask(std::span<const std::uint8_t>(bytes));
}

}  // namespace dotnav
