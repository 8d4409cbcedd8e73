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

#ifndef ORK_SIM_HPP_
#define ORK_SIM_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ork/error.hpp"
#include "ork/geometry.hpp"
#include "ork/nn.hpp"
#include "ork/objmotion.hpp"
#include "ork/otreward.hpp"
#include "ork/residual.hpp"
#include "ork/trackio.hpp"

namespace ork {

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Vec2 Position() const { return {x, y}; }
  Vec2 ToWorld(const Vec2& body) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return {x + c * body.x() - s * body.y(), y + s * body.x() + c * body.y()};
  }
  Vec2 ToBody(const Vec2& world) const {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const Vec2 d = world - Position();
    return {c * d.x() + s * d.y(), -s * d.x() + c * d.y()};
  }
  bool operator==(const Pose2&) const = default;
};

/// Flat object on a table (top surface at z = 0) pushed quasi-statically by
/// fingertips. A tip couples to the object when it is within contact_radius
/// of the footprint in the plane and pressed below touch_height; the
/// coupling ramps linearly to 1 over press_band.
struct PlanarScene {
  Pose2 pose;
  Vec2 half_extents{0.1, 0.075};
  double friction_gain = 0.9;
  double contact_radius = 0.005;
  double touch_height = 0.01;
  double press_band = 0.01;
  std::vector<Vec2> sample_points;  // body frame
  std::optional<FingertipSet> prev_tips;

  void Validate() const {
    if (!(half_extents.x() > 0.0) || !(half_extents.y() > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "object half extents must be positive");
    }
    if (sample_points.size() < 4) throw Error(ErrorKind::kInvalidInput, "need at least 4 sample points");
    for (const auto& p : sample_points) {
      if (std::abs(p.x()) > half_extents.x() || std::abs(p.y()) > half_extents.y()) {
        throw Error(ErrorKind::kInvalidInput, "sample point outside the object");
      }
    }
    if (!(press_band > 0.0) || contact_radius < 0.0) {
      throw Error(ErrorKind::kInvalidInput, "contact parameters out of range");
    }
  }

  double GyrationSq() const { return half_extents.squaredNorm() / 3.0; }

  bool operator==(const PlanarScene&) const = default;
};

// Regular grid of nx × ny points covering `fill` of the footprint.
inline std::vector<Vec2> GridSamplePoints(const Vec2& half_extents, int nx, int ny, double fill = 0.8) {
  std::vector<Vec2> pts;
  for (int i = 0; i < nx; ++i) {
    for (int j = 0; j < ny; ++j) {
      const double u = nx == 1 ? 0.0 : -1.0 + 2.0 * i / (nx - 1);
      const double v = ny == 1 ? 0.0 : -1.0 + 2.0 * j / (ny - 1);
      pts.emplace_back(fill * half_extents.x() * u, fill * half_extents.y() * v);
    }
  }
  return pts;
}

inline double ContactWeight(const PlanarScene& scene, const Vec3& tip) {
  const Vec2 body = scene.pose.ToBody(tip.head<2>());
  const Vec2 outside = (body.cwiseAbs() - scene.half_extents).cwiseMax(0.0);
  if (outside.norm() > scene.contact_radius) return 0.0;
  return std::clamp((scene.touch_height - tip.z()) / scene.press_band, 0.0, 1.0);
}

/// Quasi-static update. Each tip k with coupling w_k (evaluated at the
/// midpoint of its motion) drags the object by gain·w_k/4·d_k and turns it
/// by gain·w_k/4·(r_k × d_k)/(|r_k|² + ρ²), where d_k is the in-plane tip
/// motion, r_k its lever arm about the object center and ρ the footprint's
/// radius of gyration.
inline PlanarScene Step(const PlanarScene& scene, const FingertipSet& tips) {
  for (const auto& t : tips.tips) {
    if (!t.allFinite()) throw Error(ErrorKind::kInvalidInput, "non-finite fingertip position");
  }
  PlanarScene next = scene;
  next.prev_tips = tips;
  if (!scene.prev_tips) return next;

  const double share = scene.friction_gain / static_cast<double>(FingertipSet::kTips);
  const Vec2 center = scene.pose.Position();
  const double rho_sq = scene.GyrationSq();
  Vec2 dp = Vec2::Zero();
  double dtheta = 0.0;
  for (int k = 0; k < FingertipSet::kTips; ++k) {
    const Vec3& prev = scene.prev_tips->tips[k];
    const Vec3& cur = tips.tips[k];
    const Vec3 mid = 0.5 * (prev + cur);
    const double w = ContactWeight(scene, mid);
    if (w <= 0.0) continue;
    const Vec2 d = (cur - prev).head<2>();
    const Vec2 r = mid.head<2>() - center;
    dp += share * w * d;
    dtheta += share * w * Cross2(r, d) / (r.squaredNorm() + rho_sq);
  }
  next.pose.x += dp.x();
  next.pose.y += dp.y();
  next.pose.theta += dtheta;
  return next;
}

/// Top-down camera: u = offset.x + ppm·x, v = offset.y − ppm·y.
struct SimCamera {
  double pixels_per_meter = 500.0;
  Vec2 offset{320.0, 240.0};
  double height = 0.8;  // camera above the table, for the pinhole equivalent

  SimCamera() = default;
  SimCamera(double ppm, Vec2 off, double h = 0.8) : pixels_per_meter(ppm), offset(off), height(h) {
    if (!(ppm > 0.0)) throw Error(ErrorKind::kInvalidInput, "pixels_per_meter must be positive");
  }

  Vec2 Project(const Vec2& world) const {
    return {offset.x() + pixels_per_meter * world.x(), offset.y() - pixels_per_meter * world.y()};
  }

  // Pinhole model that reproduces Project() for points on the table plane.
  CameraIntrinsics Intrinsics() const {
    return CameraIntrinsics(pixels_per_meter * height, pixels_per_meter * height, offset.x(), offset.y());
  }
  // Base → camera: camera looks straight down from `height`.
  HomTransform BaseToCamera() const {
    Mat3 r = Mat3::Identity();
    r(1, 1) = -1.0;
    r(2, 2) = -1.0;
    return HomTransform(r, Vec3(0.0, 0.0, height));
  }
};

struct OcclusionModel {
  double rate = 0.0;
  Rng* rng = nullptr;
};

inline TrackFrame SynthTracks(const PlanarScene& scene, const SimCamera& cam, double t = 0.0,
                              OcclusionModel occlusion = {}) {
  TrackFrame f;
  f.t = t;
  for (const auto& p : scene.sample_points) {
    f.points.push_back(cam.Project(scene.pose.ToWorld(p)));
    bool vis = true;
    if (occlusion.rate > 0.0 && occlusion.rng) vis = occlusion.rng->Uniform(0.0, 1.0) >= occlusion.rate;
    f.visible.push_back(vis);
  }
  // Keep one point so no frame is fully degenerate.
  if (f.VisibleCount() == 0) f.visible[0] = true;
  return f;
}

enum class TaskKind { kPaperSlide, kBoxRotate };

inline std::string TaskName(TaskKind k) { return k == TaskKind::kPaperSlide ? "paper-slide" : "box-rotate"; }

inline TaskKind ParseTaskKind(const std::string& s) {
  if (s == "paper-slide") return TaskKind::kPaperSlide;
  if (s == "box-rotate") return TaskKind::kBoxRotate;
  throw Error(ErrorKind::kConfig, "unknown preset '" + s + "'");
}

struct TaskPreset {
  TaskKind kind = TaskKind::kPaperSlide;
  std::vector<FingertipSet> script;  // one frame per 1/rate seconds
  double rate = 5.0;
  AxisMask mask = AxisMask::PaperSliding();
  RewardMode reward_mode;
  bool with_rotation = false;
  PlanarScene scene;

  std::string name() const { return TaskName(kind); }

  void Validate() const {
    scene.Validate();
    if (script.size() < 2) throw Error(ErrorKind::kInvalidInput, "preset script too short");
    if (kind == TaskKind::kBoxRotate && !with_rotation) {
      throw Error(ErrorKind::kInvalidInput, "box-rotate requires the rotation term");
    }
  }
};

namespace detail {

inline FingertipSet Tips(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  FingertipSet s;
  s.tips = {a, b, c, d};
  return s;
}

}  // namespace detail

/// Four fingers press on a sheet and drag it to the right (+x).
inline TaskPreset PaperSlidePreset() {
  TaskPreset p;
  p.kind = TaskKind::kPaperSlide;
  p.mask = AxisMask::PaperSliding();
  p.reward_mode = RewardMode::Dense();
  p.with_rotation = false;
  p.scene.half_extents = Vec2(0.10, 0.075);
  p.scene.friction_gain = 0.9;
  p.scene.sample_points = GridSamplePoints(p.scene.half_extents, 4, 3);
  // Symmetric about the sheet's long axis, so the drag is torque free.
  const std::array<Vec2, 4> base = {Vec2(-0.05, -0.045), Vec2(-0.03, 0.045), Vec2(-0.04, -0.015),
                                    Vec2(-0.04, 0.015)};
  const std::vector<double> heights = {0.04, 0.02, -0.015};
  const int slide_steps = 14;
  const double slide = 0.22;
  auto frame = [&](double dx, double z) {
    FingertipSet s;
    for (int k = 0; k < 4; ++k) s.tips[k] = Vec3(base[k].x() + dx, base[k].y(), z);
    return s;
  };
  for (double z : heights) p.script.push_back(frame(0.0, z));
  for (int i = 1; i <= slide_steps; ++i) p.script.push_back(frame(slide * i / slide_steps, -0.015));
  for (double z : {0.02, 0.04, 0.04}) p.script.push_back(frame(slide, z));
  return p;
}

/// Thumb and index press on opposite sides of a box lid and sweep around its
/// center, turning it counter-clockwise; middle and ring stay lifted.
inline TaskPreset BoxRotatePreset() {
  TaskPreset p;
  p.kind = TaskKind::kBoxRotate;
  p.mask = AxisMask::MusicBox();
  p.reward_mode = RewardMode::Sparse(5);
  p.with_rotation = true;
  p.scene.half_extents = Vec2(0.06, 0.06);
  p.scene.friction_gain = 1.0;
  p.scene.sample_points = GridSamplePoints(p.scene.half_extents, 4, 4);
  const double radius = 0.05;
  const double sweep = std::numbers::pi;  // tip sweep; slip leaves the box turning about a quarter of it
  const int rotate_steps = 14;
  const Vec3 middle_park(0.15, 0.05, 0.06);
  const Vec3 ring_park(0.15, -0.05, 0.06);
  auto frame = [&](double phi, double z) {
    return detail::Tips(Vec3(radius * std::cos(phi), radius * std::sin(phi), z),
                        Vec3(-radius * std::cos(phi), -radius * std::sin(phi), z), middle_park, ring_park);
  };
  for (double z : {0.04, 0.02, -0.015}) p.script.push_back(frame(0.0, z));
  for (int i = 1; i <= rotate_steps; ++i) p.script.push_back(frame(sweep * i / rotate_steps, -0.015));
  for (double z : {0.02, 0.04, 0.04}) p.script.push_back(frame(sweep, z));
  return p;
}

inline TaskPreset MakePreset(TaskKind kind) {
  return kind == TaskKind::kPaperSlide ? PaperSlidePreset() : BoxRotatePreset();
}

struct Rollout {
  TrackSet tracks;
  PlanarScene final_scene;
};

// Steps the scene through every frame, synthesizing one track frame after each.
inline Rollout RollOut(const PlanarScene& initial, const FingertipTrajectory& traj, const SimCamera& cam,
                       OcclusionModel occlusion = {}) {
  Rollout out;
  out.tracks.source = TrackSource::kRobot;
  PlanarScene scene = initial;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    scene = Step(scene, traj.frames[i]);
    out.tracks.frames.push_back(SynthTracks(scene, cam, traj.timestamps[i], occlusion));
  }
  out.final_scene = scene;
  return out;
}

struct ExpertDemo {
  FingertipTrajectory fingertips;
  TrackSet tracks;
  PlanarScene final_scene;
};

/// Rolls the preset's scripted hand through the simulator, standing in for
/// the single human video. Occlusion dropout, if any, is drawn from `seed`.
inline ExpertDemo MakeExpertDemo(const TaskPreset& preset, const SimCamera& cam, std::uint64_t seed,
                                 double occlusion_rate = 0.0) {
  preset.Validate();
  ExpertDemo demo;
  for (std::size_t i = 0; i < preset.script.size(); ++i) {
    demo.fingertips.timestamps.push_back(static_cast<double>(i) / preset.rate);
    demo.fingertips.frames.push_back(preset.script[i]);
  }
  Rng rng(seed);
  auto roll = RollOut(preset.scene, demo.fingertips, cam, {occlusion_rate, &rng});
  demo.tracks = std::move(roll.tracks);
  demo.tracks.source = TrackSource::kHuman;
  demo.final_scene = roll.final_scene;
  return demo;
}

/// Constant calibration offset plus smooth per-tip noise (sum of two random
/// sinusoids per axis, peak ≤ noise_amplitude).
inline FingertipTrajectory PerturbCalibration(const FingertipTrajectory& traj, const Vec3& offset,
                                              std::uint64_t seed, double noise_amplitude = 0.0) {
  FingertipTrajectory out = traj;
  Rng rng(seed);
  const double two_pi = 2.0 * std::numbers::pi;
  for (int k = 0; k < FingertipSet::kTips; ++k) {
    for (int a = 0; a < 3; ++a) {
      const double f1 = rng.Uniform(0.1, 0.5);
      const double f2 = rng.Uniform(0.5, 1.0);
      const double p1 = rng.Uniform(0.0, two_pi);
      const double p2 = rng.Uniform(0.0, two_pi);
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double t = out.timestamps[i];
        const double n = noise_amplitude > 0.0
                             ? 0.5 * noise_amplitude * (std::sin(two_pi * f1 * t + p1) + std::sin(two_pi * f2 * t + p2))
                             : 0.0;
        out.frames[i].tips[k][a] += offset[a] + n;
      }
    }
  }
  return out;
}

enum class RewardSource { kHuDOR, kPointOt };

/// Residual-learning environment: replays a (perturbed) fingertip
/// trajectory in the simulator and scores the rollout against the expert
/// tracks with either the trajectory-matching reward or point-set OT.
class SimEnv : public RolloutEnv {
 public:
  struct Options {
    RewardSource source = RewardSource::kHuDOR;
    RewardOptions reward;
    SinkhornOptions ot;
    double occlusion_rate = 0.0;
    std::uint64_t occlusion_seed = 0;
  };

  SimEnv(PlanarScene initial, SimCamera cam, FingertipTrajectory base, TrackSet human, Options opts)
      : initial_(std::move(initial)), cam_(cam), base_(std::move(base)), human_(std::move(human)),
        opts_(opts), occlusion_rng_(opts.occlusion_seed) {
    initial_.Validate();
    if (base_.size() < 2) throw Error(ErrorKind::kInvalidInput, "base trajectory too short");
  }

  std::size_t Horizon() const override { return base_.size(); }
  FingertipSet BaseAction(std::size_t t) const override { return base_.frames[std::min(t, base_.size() - 1)]; }

  PolicyInput Reset() override {
    scene_ = initial_;
    tracks_ = TrackSet{};
    tracks_.source = TrackSource::kRobot;
    t_ = 0;
    start_frame_ = SynthTracks(scene_, cam_, 0.0);
    last_exec_.reset();
    prev_exec_.reset();
    return Observe();
  }

  PolicyInput Step(const FingertipSet& action) override {
    if (t_ >= Horizon()) throw Error(ErrorKind::kInvalidInput, "step past the episode horizon");
    scene_ = ork::Step(scene_, action);
    tracks_.frames.push_back(SynthTracks(scene_, cam_, base_.timestamps[t_],
                                         {opts_.occlusion_rate, &occlusion_rng_}));
    prev_exec_ = last_exec_;
    last_exec_ = action;
    ++t_;
    return Observe();
  }

  std::vector<double> EpisodeRewards() override {
    if (opts_.source == RewardSource::kHuDOR) return ork::EpisodeRewards(tracks_, human_, opts_.reward).rewards;
    const TrackSet robot = tracks_.size() == human_.size() ? tracks_ : ResampleToLength(tracks_, human_.size());
    return ApplyRewardMode(PointOtRewards(robot, human_, opts_.ot).rewards, opts_.reward.mode);
  }

  const PlanarScene& scene() const { return scene_; }
  const PlanarScene& initial_scene() const { return initial_; }
  const TrackSet& tracks() const { return tracks_; }
  const TrackSet& human() const { return human_; }
  const SimCamera& camera() const { return cam_; }
  void set_initial_scene(const PlanarScene& s) { initial_ = s; }
  void set_base(const FingertipTrajectory& b) { base_ = b; }
  const FingertipTrajectory& base() const { return base_; }

 private:
  PolicyInput Observe() const {
    PolicyInput in;
    in.a_r = BaseAction(t_).Flatten();
    if (last_exec_ && prev_exec_) in.ds = last_exec_->Flatten() - prev_exec_->Flatten();
    const TrackFrame& cur = tracks_.empty() ? start_frame_ : tracks_.frames.back();
    const TrackFrame& ref = tracks_.empty() ? start_frame_ : tracks_.frames.front();
    in.centroid = Centroid(cur);
    const Vec2 d = in.centroid - Centroid(ref);
    const bool rot = opts_.reward.with_rotation;
    in.motion = Eigen::VectorXd::Zero(rot ? 3 : 2);
    in.motion[0] = d.x();
    in.motion[1] = d.y();
    if (rot && !tracks_.empty()) in.motion[2] = MeanRotation(cur, ref);
    return in;
  }

  PlanarScene initial_;
  SimCamera cam_;
  FingertipTrajectory base_;
  TrackSet human_;
  Options opts_;
  Rng occlusion_rng_;
  PlanarScene scene_;
  TrackSet tracks_;
  TrackFrame start_frame_;
  std::optional<FingertipSet> last_exec_;
  std::optional<FingertipSet> prev_exec_;
  std::size_t t_ = 0;
};

}  // namespace ork

#endif  // ORK_SIM_HPP_
