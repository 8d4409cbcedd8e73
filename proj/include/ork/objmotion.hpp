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

#ifndef ORK_OBJMOTION_HPP_
#define ORK_OBJMOTION_HPP_

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ork/error.hpp"
#include "ork/geometry.hpp"
#include "ork/trackio.hpp"

namespace ork {

/// Motion summary of the tracked object at one timestep, relative to frame 0.
struct ObjectMotion {
  Vec2 d_trans = Vec2::Zero();       // pixels
  std::optional<double> d_rot;       // pixels², present for rotation-aware tasks
  Vec2 centroid = Vec2::Zero();      // pixels

  int NumComponents() const { return d_rot ? 3 : 2; }

  // Stacked [dx, dy(, w_rot * d_rot)].
  Eigen::VectorXd Components(double w_rot = 1.0) const {
    Eigen::VectorXd v(NumComponents());
    v[0] = d_trans.x();
    v[1] = d_trans.y();
    if (d_rot) v[2] = w_rot * *d_rot;
    return v;
  }
};

using MotionSeries = std::vector<ObjectMotion>;

inline Vec2 Centroid(const TrackFrame& frame) {
  Vec2 sum = Vec2::Zero();
  std::size_t n = 0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!frame.visible[i]) continue;
    sum += frame.points[i];
    ++n;
  }
  if (n == 0) {
    throw Error(ErrorKind::kDegenerateFrame, fmt::format("no visible points at t={}", frame.t));
  }
  return sum / static_cast<double>(n);
}

inline Vec2 MeanTranslation(const TrackFrame& frame_t, const TrackFrame& frame_1) {
  if (frame_t.size() != frame_1.size()) {
    throw Error(ErrorKind::kShape, "frames disagree on point count");
  }
  return Centroid(frame_t) - Centroid(frame_1);
}

inline double Cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Mean of (p_t − c_t) × (p_1 − c_1) over points visible in both frames, with
// both centroids taken over that common subset. A rigid rotation by θ gives
// −sin θ · mean(r²).
inline double MeanRotation(const TrackFrame& frame_t, const TrackFrame& frame_1) {
  if (frame_t.size() != frame_1.size()) {
    throw Error(ErrorKind::kShape, "frames disagree on point count");
  }
  std::vector<std::size_t> common;
  for (std::size_t i = 0; i < frame_t.size(); ++i) {
    if (frame_t.visible[i] && frame_1.visible[i]) common.push_back(i);
  }
  if (common.size() < 2) {
    throw Error(ErrorKind::kDegenerateFrame,
                fmt::format("fewer than 2 common visible points at t={}", frame_t.t));
  }
  Vec2 c_t = Vec2::Zero();
  Vec2 c_1 = Vec2::Zero();
  for (auto i : common) {
    c_t += frame_t.points[i];
    c_1 += frame_1.points[i];
  }
  const double n = static_cast<double>(common.size());
  c_t /= n;
  c_1 /= n;
  double acc = 0.0;
  for (auto i : common) acc += Cross2(frame_t.points[i] - c_t, frame_1.points[i] - c_1);
  return acc / n;
}

inline ObjectMotion ObjectMotionAt(const TrackSet& tracks, std::size_t t, bool with_rotation) {
  if (t >= tracks.size()) {
    throw Error(ErrorKind::kInvalidInput,
                fmt::format("frame index {} out of range [0, {})", t, tracks.size()));
  }
  const auto& ref = tracks.frames.front();
  const auto& cur = tracks.frames[t];
  ObjectMotion m;
  m.centroid = Centroid(cur);
  m.d_trans = m.centroid - Centroid(ref);
  if (with_rotation) m.d_rot = (t == 0) ? 0.0 : MeanRotation(cur, ref);
  return m;
}

enum class DegeneratePolicy {
  kError,        // propagate kDegenerateFrame
  kHoldPrevious  // reuse the last valid motion (frame 0 must be valid)
};

inline MotionSeries ExtractMotion(const TrackSet& tracks, bool with_rotation,
                                  DegeneratePolicy policy = DegeneratePolicy::kError) {
  MotionSeries out;
  out.reserve(tracks.size());
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    try {
      out.push_back(ObjectMotionAt(tracks, t, with_rotation));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDegenerateFrame || policy == DegeneratePolicy::kError ||
          out.empty()) {
        throw;
      }
      out.push_back(out.back());
    }
  }
  return out;
}

// Negative RMS over the stacked motion components at one timestep.
inline double RewardH2R(const ObjectMotion& robot, const ObjectMotion& human, double w_rot = 1.0) {
  if (robot.NumComponents() != human.NumComponents()) {
    throw Error(ErrorKind::kShape, "robot and human motions have different layouts");
  }
  const Eigen::VectorXd diff = robot.Components(w_rot) - human.Components(w_rot);
  return 0.0 - std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
}

struct RewardMode {
  enum class Kind { kDense, kSparse } kind = Kind::kDense;
  std::size_t sparse_k = 5;

  static RewardMode Dense() { return {}; }
  static RewardMode Sparse(std::size_t k = 5) { return {Kind::kSparse, k}; }
  bool IsSparse() const { return kind == Kind::kSparse; }
};

struct RewardOptions {
  RewardMode mode;
  bool with_rotation = false;
  double w_rot = 1.0;
  DegeneratePolicy degenerate = DegeneratePolicy::kError;
};

struct EpisodeRewardResult {
  MotionSeries robot;
  MotionSeries human;
  std::vector<double> rewards;
};

// Sparse mode emits the reward only on the last k frames.
inline std::vector<double> RewardsFromMotion(const MotionSeries& robot, const MotionSeries& human,
                                             const RewardOptions& opts) {
  if (robot.size() != human.size()) {
    throw Error(ErrorKind::kShape, "motion series lengths differ after resampling");
  }
  const std::size_t len = robot.size();
  std::vector<double> rewards(len, 0.0);
  const std::size_t first =
      opts.mode.IsSparse() && opts.mode.sparse_k < len ? len - opts.mode.sparse_k : 0;
  for (std::size_t t = first; t < len; ++t) rewards[t] = RewardH2R(robot[t], human[t], opts.w_rot);
  return rewards;
}

// Robot tracks are resampled to the human length before matching.
inline EpisodeRewardResult EpisodeRewards(const TrackSet& robot, const TrackSet& human,
                                          const RewardOptions& opts) {
  if (robot.empty() || human.empty()) throw Error(ErrorKind::kInvalidInput, "empty track set");
  const std::size_t len = human.size();
  const TrackSet robot_rs = (robot.size() == len || len < 2) ? robot : ResampleToLength(robot, len);
  EpisodeRewardResult out;
  out.robot = ExtractMotion(robot_rs, opts.with_rotation, opts.degenerate);
  out.human = ExtractMotion(human, opts.with_rotation, opts.degenerate);
  out.rewards = RewardsFromMotion(out.robot, out.human, opts);
  return out;
}

}  // namespace ork

#endif  // ORK_OBJMOTION_HPP_
