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

#ifndef ORK_EXPERIMENT_HPP_
#define ORK_EXPERIMENT_HPP_

#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ork/config.hpp"
#include "ork/objmotion.hpp"
#include "ork/otreward.hpp"
#include "ork/residual.hpp"
#include "ork/sim.hpp"

namespace ork {

// Replaces "preset" placeholders with the preset's own choices.
inline RunConfig ResolvePresetDefaults(RunConfig cfg) {
  cfg.Validate();
  const TaskPreset preset = MakePreset(ParseTaskKind(cfg.preset));
  if (cfg.reward_mode == "preset") {
    cfg.reward_mode = preset.reward_mode.IsSparse() ? "sparse" : "dense";
    if (preset.reward_mode.IsSparse()) cfg.sparse_k = static_cast<int>(preset.reward_mode.sparse_k);
  }
  if (cfg.with_rotation == "preset") cfg.with_rotation = preset.with_rotation ? "true" : "false";
  if (cfg.axis_mask == "preset") cfg.axis_mask = preset.mask.ToString();
  return cfg;
}

inline RewardOptions RewardOptionsFrom(const RunConfig& cfg) {
  RewardOptions r;
  r.mode = cfg.reward_mode == "sparse" ? RewardMode::Sparse(static_cast<std::size_t>(cfg.sparse_k))
                                       : RewardMode::Dense();
  r.with_rotation = cfg.with_rotation == "true";
  r.w_rot = cfg.w_rot;
  r.degenerate = cfg.degenerate == "hold" ? DegeneratePolicy::kHoldPrevious : DegeneratePolicy::kError;
  return r;
}

inline SinkhornOptions SinkhornOptionsFrom(const RunConfig& cfg) {
  return {cfg.ot_eps, cfg.ot_max_iters, cfg.ot_tol};
}

/// Everything derived from a resolved config: the expert demo, the
/// perturbed replay the robot starts from, and the reward/env settings.
struct Scenario {
  RunConfig cfg;
  TaskPreset preset;
  SimCamera cam;
  ExpertDemo expert;
  FingertipTrajectory replay;
  SimEnv::Options env;
  AxisMask mask = AxisMask::All();
  InputScaling scaling;
};

inline Scenario BuildScenario(const RunConfig& raw) {
  Scenario s;
  s.cfg = ResolvePresetDefaults(raw);
  s.preset = MakePreset(ParseTaskKind(s.cfg.preset));
  s.cam = SimCamera(s.cfg.camera_ppm, s.cfg.camera_offset, s.cfg.camera_height);
  const auto seed = static_cast<std::uint64_t>(s.cfg.seed);
  s.expert = MakeExpertDemo(s.preset, s.cam, seed, s.cfg.occlusion_rate);
  s.replay = PerturbCalibration(s.expert.fingertips, s.cfg.perturb_offset, seed, s.cfg.perturb_noise);
  s.env.source = s.cfg.reward == "point-ot" ? RewardSource::kPointOt : RewardSource::kHuDOR;
  s.env.reward = RewardOptionsFrom(s.cfg);
  s.env.ot = SinkhornOptionsFrom(s.cfg);
  s.env.occlusion_rate = s.cfg.occlusion_rate;
  s.env.occlusion_seed = seed + 1;
  s.mask = AxisMask::Parse(s.cfg.axis_mask);
  s.scaling.centroid_center = s.cam.Project(s.preset.scene.pose.Position());
  return s;
}

inline SimEnv MakeEnv(const Scenario& s) {
  return SimEnv(s.preset.scene, s.cam, s.replay, s.expert.tracks, s.env);
}

inline LearnerConfig LearnerConfigFrom(const Scenario& s) {
  LearnerConfig lc;
  lc.input_dim = EncodedInputDim(s.env.reward.with_rotation);
  lc.action_dim = s.mask.ActiveCount();
  lc.hidden = s.cfg.hidden;
  lc.depth = s.cfg.depth;
  lc.gamma = s.cfg.gamma;
  lc.n_step = s.cfg.n_step;
  lc.batch_size = s.cfg.batch_size;
  lc.tau = s.cfg.tau;
  lc.buffer_capacity = static_cast<std::size_t>(s.cfg.buffer_capacity);
  lc.actor_lr = s.cfg.actor_lr;
  lc.critic_lr = s.cfg.critic_lr;
  lc.max_residual = s.cfg.max_residual;
  lc.seed = static_cast<std::uint64_t>(s.cfg.seed);
  return lc;
}

inline OuNoise NoiseFrom(const Scenario& s) {
  return OuNoise(s.mask.ActiveCount(), s.cfg.ou_theta, s.cfg.ou_mu, s.cfg.sigma0, s.cfg.sigma1, s.cfg.decay_steps);
}

inline TrainConfig TrainConfigFrom(const Scenario& s) {
  TrainConfig tc;
  tc.updates_per_episode = s.cfg.updates_per_episode;
  tc.eval_every = s.cfg.eval_every;
  tc.reward_scale = s.cfg.reward_scale;
  tc.scaling = s.scaling;
  return tc;
}

struct RolloutMetrics {
  double displacement = 0.0;  // object x travel, meters
  double rotation = 0.0;      // object heading change, radians
  double ret = 0.0;
  double mean_reward = 0.0;
  std::vector<double> rewards;
  TrackSet tracks;
};

inline RolloutMetrics MetricsOf(const SimEnv& env, const EpisodeRecord& rec) {
  RolloutMetrics m;
  m.displacement = env.scene().pose.x - env.initial_scene().pose.x;
  m.rotation = env.scene().pose.theta - env.initial_scene().pose.theta;
  m.rewards = rec.rewards;
  m.ret = rec.Return();
  m.mean_reward = rec.rewards.empty() ? 0.0 : m.ret / static_cast<double>(rec.rewards.size());
  m.tracks = env.tracks();
  return m;
}

// Noise-free rollout of the current policy.
inline RolloutMetrics Evaluate(SimEnv& env, ResidualLearner& learner, const Scenario& s) {
  const auto rec = RunEpisode(env, learner, nullptr, s.mask, s.scaling);
  return MetricsOf(env, rec);
}

inline RolloutMetrics ExpertMetrics(const Scenario& s) {
  RolloutMetrics m;
  m.displacement = s.expert.final_scene.pose.x - s.preset.scene.pose.x;
  m.rotation = s.expert.final_scene.pose.theta - s.preset.scene.pose.theta;
  m.rewards.assign(s.expert.tracks.size(), 0.0);
  m.tracks = s.expert.tracks;
  return m;
}

// Zero-residual replay of the perturbed trajectory.
inline RolloutMetrics ReplayMetrics(const Scenario& s) {
  SimEnv env = MakeEnv(s);
  ResidualLearner fresh(LearnerConfigFrom(s));
  return Evaluate(env, fresh, s);
}

/// Noise-free rollout with the object moved by `shift` (meters). The replayed
/// trajectory is relocated by the offset measured through the camera, as it
/// would be on hardware.
inline RolloutMetrics EvaluateShifted(const Scenario& s, ResidualLearner& learner, const Vec2& shift) {
  PlanarScene initial = s.preset.scene;
  initial.pose.x += shift.x();
  initial.pose.y += shift.y();
  const Vec2 reference = s.preset.scene.pose.Position();
  const Vec3 offset = SpatialOffset(s.cam.Project(initial.pose.Position()), s.cam.height, s.cam.Intrinsics(),
                                    s.cam.BaseToCamera(), Vec3(reference.x(), reference.y(), 0.0));
  FingertipTrajectory base = s.replay;
  base.frames = ApplyOffset(s.replay.frames, offset);
  SimEnv env = MakeEnv(s);
  env.set_initial_scene(initial);
  env.set_base(base);
  return Evaluate(env, learner, s);
}

struct TrainOutcome {
  TrainingLog log;
  RolloutMetrics expert;
  RolloutMetrics replay;
  RolloutMetrics final_eval;
};

inline TrainOutcome TrainScenario(
    const Scenario& s, ResidualLearner& learner, OuNoise& noise,
    const std::function<void(const EpisodeLog&, const EpisodeRecord&, const SimEnv&)>& on_episode = {}) {
  TrainOutcome out;
  out.expert = ExpertMetrics(s);
  out.replay = ReplayMetrics(s);
  SimEnv env = MakeEnv(s);
  std::function<void(const EpisodeLog&, const EpisodeRecord&)> hook;
  if (on_episode) hook = [&](const EpisodeLog& l, const EpisodeRecord& r) { on_episode(l, r, env); };
  out.log = Train(env, learner, noise, s.mask, s.cfg.episodes, TrainConfigFrom(s), hook);
  out.final_eval = Evaluate(env, learner, s);
  return out;
}

// ---------------------------------------------------------------------------
// Training checkpoint: learner state followed by the exploration process.

inline constexpr char kCheckpointMagic[8] = {'O', 'R', 'K', 'C', 'K', 'P', 'T', '1'};

inline void SaveCheckpoint(std::ostream& out, const ResidualLearner& learner, const OuNoise& noise) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  learner.Save(out);
  ResidualLearner::WriteVec(out, noise.state());
  ResidualLearner::WriteI64(out, noise.step());
}

inline void LoadCheckpoint(std::istream& in, ResidualLearner& learner, OuNoise& noise) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw Error(ErrorKind::kParse, "not a training checkpoint");
  }
  learner.Load(in);
  noise.state() = ResidualLearner::ReadVec(in, noise.dim());
  noise.set_step(ResidualLearner::ReadI64(in));
}

inline void SaveCheckpointFile(const std::string& path, const ResidualLearner& learner, const OuNoise& noise) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  SaveCheckpoint(out, learner, noise);
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path);
}

inline void LoadCheckpointFile(const std::string& path, ResidualLearner& learner, OuNoise& noise) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open checkpoint " + path);
  LoadCheckpoint(in, learner, noise);
}

}  // namespace ork

#endif  // ORK_EXPERIMENT_HPP_
