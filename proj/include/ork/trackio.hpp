// Copyright 2026 The object-reward-kit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ORK_TRACKIO_HPP_
#define ORK_TRACKIO_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ork/error.hpp"
#include "ork/geometry.hpp"

namespace ork {

/// Tracked 2D points (pixels) for one video frame. Occluded points keep the
/// tracker's extrapolated position but are flagged not visible.
struct TrackFrame {
  double t = 0.0;
  std::vector<Vec2> points;
  std::vector<bool> visible;

  std::size_t size() const { return points.size(); }

  std::size_t VisibleCount() const {
    return static_cast<std::size_t>(std::count(visible.begin(), visible.end(), true));
  }

  bool IsDegenerate() const { return VisibleCount() == 0; }

  bool operator==(const TrackFrame&) const = default;
};

enum class TrackSource { kHuman, kRobot };

struct TrackSet {
  std::vector<TrackFrame> frames;
  TrackSource source = TrackSource::kHuman;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
  std::size_t NumPoints() const { return frames.empty() ? 0 : frames.front().size(); }

  // Throws kSchema when N varies or timestamps are not strictly increasing.
  void Validate() const {
    for (std::size_t i = 0; i < frames.size(); ++i) {
      const auto& f = frames[i];
      if (f.points.empty()) throw Error(ErrorKind::kSchema, "frame has no points");
      if (f.visible.size() != f.points.size()) {
        throw Error(ErrorKind::kSchema, "visibility length differs from point count");
      }
      if (f.size() != frames.front().size()) {
        throw Error(ErrorKind::kSchema,
                    fmt::format("inconsistent point count: frame {} has {}, expected {}", i,
                                f.size(), frames.front().size()));
      }
      if (i > 0 && !(f.t > frames[i - 1].t)) {
        throw Error(ErrorKind::kSchema, "timestamps must be strictly increasing");
      }
    }
  }

  bool operator==(const TrackSet&) const = default;
};

struct FingertipTrajectory {
  std::vector<double> timestamps;
  std::vector<FingertipSet> frames;

  std::size_t size() const { return frames.size(); }

  void Validate() const {
    if (timestamps.size() != frames.size()) {
      throw Error(ErrorKind::kSchema, "timestamp count differs from frame count");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
      if (!(timestamps[i] > timestamps[i - 1])) {
        throw Error(ErrorKind::kSchema, "fingertip timestamps must be strictly increasing");
      }
    }
  }
};

struct AlignedSample {
  double t = 0.0;
  FingertipSet tips;
  TrackFrame frame;
};

/// Demo tuples on a uniform grid of spacing 1/rate.
struct SyncedDemo {
  double rate = 5.0;
  std::vector<AlignedSample> tuples;

  FingertipTrajectory Fingertips() const {
    FingertipTrajectory out;
    for (const auto& s : tuples) {
      out.timestamps.push_back(s.t);
      out.frames.push_back(s.tips);
    }
    return out;
  }

  TrackSet Tracks(TrackSource source = TrackSource::kHuman) const {
    TrackSet out;
    out.source = source;
    for (const auto& s : tuples) out.frames.push_back(s.frame);
    return out;
  }
};

// ---------------------------------------------------------------------------
// JSONL I/O

inline std::string FormatDouble(double x) { return fmt::format("{:.17g}", x); }

namespace detail {

inline nlohmann::json ParseLine(const std::string& line, const std::string& name,
                                std::size_t lineno) {
  try {
    return nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, fmt::format("{}:{}: {}", name, lineno, e.what()));
  }
}

inline double NumberField(const nlohmann::json& rec, const char* key, const std::string& where) {
  if (!rec.is_object() || !rec.contains(key) || !rec[key].is_number()) {
    throw Error(ErrorKind::kParse, fmt::format("{}: missing numeric field '{}'", where, key));
  }
  return rec[key].get<double>();
}

inline bool IsBlank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

inline std::ifstream OpenOrThrow(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path);
  return in;
}

}  // namespace detail

inline TrackSet ParseTracks(std::istream& in, const std::string& name = "<stream>") {
  TrackSet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::IsBlank(line)) continue;
    const std::string where = fmt::format("{}:{}", name, lineno);
    const auto rec = detail::ParseLine(line, name, lineno);
    TrackFrame frame;
    frame.t = detail::NumberField(rec, "t", where);
    if (!rec.contains("pts") || !rec["pts"].is_array()) {
      throw Error(ErrorKind::kParse, where + ": missing array field 'pts'");
    }
    for (const auto& p : rec["pts"]) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw Error(ErrorKind::kParse, where + ": points must be [x, y] pairs");
      }
      frame.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    if (rec.contains("vis")) {
      if (!rec["vis"].is_array()) throw Error(ErrorKind::kParse, where + ": 'vis' must be an array");
      for (const auto& v : rec["vis"]) {
        if (!v.is_boolean()) throw Error(ErrorKind::kParse, where + ": 'vis' entries must be bool");
        frame.visible.push_back(v.get<bool>());
      }
    } else {
      frame.visible.assign(frame.points.size(), true);
    }
    if (frame.visible.size() != frame.points.size()) {
      throw Error(ErrorKind::kSchema, where + ": 'vis' length differs from 'pts'");
    }
    set.frames.push_back(std::move(frame));
  }
  if (set.frames.empty()) throw Error(ErrorKind::kSchema, name + ": no frames");
  std::stable_sort(set.frames.begin(), set.frames.end(),
                   [](const TrackFrame& a, const TrackFrame& b) { return a.t < b.t; });
  set.Validate();
  return set;
}

inline TrackSet LoadTracks(const std::string& path, TrackSource source = TrackSource::kHuman) {
  auto in = detail::OpenOrThrow(path);
  TrackSet set = ParseTracks(in, path);
  set.source = source;
  return set;
}

inline void WriteTracks(std::ostream& out, const TrackSet& set) {
  for (const auto& f : set.frames) {
    std::string line = "{\"t\": " + FormatDouble(f.t) + ", \"pts\": [";
    for (std::size_t i = 0; i < f.points.size(); ++i) {
      if (i) line += ", ";
      line += "[" + FormatDouble(f.points[i].x()) + ", " + FormatDouble(f.points[i].y()) + "]";
    }
    line += "], \"vis\": [";
    for (std::size_t i = 0; i < f.visible.size(); ++i) {
      if (i) line += ", ";
      line += f.visible[i] ? "true" : "false";
    }
    line += "]}\n";
    out << line;
  }
}

inline void SaveTracks(const std::string& path, const TrackSet& set) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  WriteTracks(out, set);
}

inline FingertipTrajectory ParseFingertips(std::istream& in, const std::string& name = "<stream>") {
  std::vector<std::pair<double, FingertipSet>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::IsBlank(line)) continue;
    const std::string where = fmt::format("{}:{}", name, lineno);
    const auto rec = detail::ParseLine(line, name, lineno);
    const double t = detail::NumberField(rec, "t", where);
    if (!rec.contains("tips") || !rec["tips"].is_array() || rec["tips"].size() != 12) {
      throw Error(ErrorKind::kParse, where + ": 'tips' must hold 12 numbers");
    }
    Vec12 v;
    for (int i = 0; i < 12; ++i) {
      if (!rec["tips"][i].is_number()) {
        throw Error(ErrorKind::kParse, where + ": 'tips' entries must be numbers");
      }
      v[i] = rec["tips"][i].get<double>();
    }
    rows.emplace_back(t, FingertipSet::Unflatten(v));
  }
  if (rows.empty()) throw Error(ErrorKind::kSchema, name + ": no frames");
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  FingertipTrajectory traj;
  for (auto& [t, f] : rows) {
    traj.timestamps.push_back(t);
    traj.frames.push_back(f);
  }
  traj.Validate();
  return traj;
}

inline FingertipTrajectory LoadFingertips(const std::string& path) {
  auto in = detail::OpenOrThrow(path);
  return ParseFingertips(in, path);
}

inline void WriteFingertips(std::ostream& out, const FingertipTrajectory& traj) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vec12 v = traj.frames[i].Flatten();
    std::string line = "{\"t\": " + FormatDouble(traj.timestamps[i]) + ", \"tips\": [";
    for (int k = 0; k < 12; ++k) {
      if (k) line += ", ";
      line += FormatDouble(v[k]);
    }
    line += "]}\n";
    out << line;
  }
}

inline void SaveFingertips(const std::string& path, const FingertipTrajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  WriteFingertips(out, traj);
}

// ---------------------------------------------------------------------------
// Alignment and resampling

// Pairs every track frame inside the common time range with the fingertip
// frame of nearest timestamp; ties go to the earlier fingertip frame.
inline std::vector<AlignedSample> AlignStreams(const FingertipTrajectory& fts,
                                               const TrackSet& tracks) {
  if (fts.size() == 0 || tracks.empty()) {
    throw Error(ErrorKind::kAlignment, "both streams must be nonempty");
  }
  fts.Validate();
  const double lo = std::max(fts.timestamps.front(), tracks.frames.front().t);
  const double hi = std::min(fts.timestamps.back(), tracks.frames.back().t);
  if (lo > hi) throw Error(ErrorKind::kAlignment, "streams do not overlap in time");

  std::vector<AlignedSample> out;
  const auto& ts = fts.timestamps;
  for (const auto& frame : tracks.frames) {
    if (frame.t < lo || frame.t > hi) continue;
    // First fingertip timestamp >= frame.t.
    const auto it = std::lower_bound(ts.begin(), ts.end(), frame.t);
    std::size_t idx = static_cast<std::size_t>(it - ts.begin());
    if (idx == ts.size()) {
      idx = ts.size() - 1;
    } else if (idx > 0 && frame.t - ts[idx - 1] <= ts[idx] - frame.t) {
      --idx;
    }
    out.push_back({frame.t, fts.frames[idx], frame});
  }
  return out;
}

/// Resamples an aligned stream onto t0 + k/rate for every grid point inside
/// the source time range. Fingertips are interpolated linearly; track frames
/// are copied from the nearest source frame (points are never interpolated).
inline SyncedDemo Resample(const std::vector<AlignedSample>& demo, double rate = 5.0) {
  if (!(rate > 0.0)) throw Error(ErrorKind::kResample, "rate must be positive");
  if (demo.size() < 2) throw Error(ErrorKind::kResample, "need at least two samples");
  const double t0 = demo.front().t;
  const double duration = demo.back().t - t0;
  if (duration + 1e-9 < 2.0 / rate) {
    throw Error(ErrorKind::kResample,
                fmt::format("input spans {} s, shorter than 2/rate = {} s", duration, 2.0 / rate));
  }
  constexpr double kSnap = 1e-9;
  const auto count = static_cast<std::size_t>(std::floor(duration * rate + kSnap)) + 1;

  SyncedDemo out;
  out.rate = rate;
  out.tuples.reserve(count);
  std::size_t j = 0;  // demo[j].t <= t < demo[j+1].t
  for (std::size_t k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) / rate;
    while (j + 1 < demo.size() && demo[j + 1].t <= t + kSnap) ++j;
    AlignedSample s;
    s.t = t;
    const auto& a = demo[j];
    if (std::abs(a.t - t) <= kSnap || j + 1 == demo.size()) {
      s.tips = a.tips;
      s.frame = a.frame;
    } else {
      const auto& b = demo[j + 1];
      const double alpha = (t - a.t) / (b.t - a.t);
      s.tips = FingertipSet::Unflatten((1.0 - alpha) * a.tips.Flatten() + alpha * b.tips.Flatten());
      s.frame = (t - a.t <= b.t - t) ? a.frame : b.frame;
    }
    s.frame.t = t;
    out.tuples.push_back(std::move(s));
  }
  return out;
}

// Source index for output slot i of `len`, nearest on a uniform [0,1]
// parameterization; halves round to even.
inline std::size_t NearestIndex(std::size_t i, std::size_t len, std::size_t source_len) {
  if (len <= 1 || source_len <= 1) return 0;
  const double x = static_cast<double>(i) * static_cast<double>(source_len - 1) /
                   static_cast<double>(len - 1);
  return std::min(source_len - 1, static_cast<std::size_t>(std::nearbyint(x)));
}

inline TrackSet ResampleToLength(const TrackSet& tracks, std::size_t len) {
  if (len < 2) throw Error(ErrorKind::kResample, "target length must be >= 2");
  if (tracks.empty()) throw Error(ErrorKind::kResample, "empty track set");
  TrackSet out;
  out.source = tracks.source;
  out.frames.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    out.frames.push_back(tracks.frames[NearestIndex(i, len, tracks.size())]);
  }
  return out;
}

// Per-axis pixel scale, for robot and human cameras with different resolutions.
inline TrackSet ScalePixels(const TrackSet& tracks, const Vec2& scale) {
  TrackSet out = tracks;
  for (auto& f : out.frames) {
    for (auto& p : f.points) p = p.cwiseProduct(scale);
  }
  return out;
}

}  // namespace ork

#endif  // ORK_TRACKIO_HPP_
