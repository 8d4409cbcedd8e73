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

// ork: command-line driver for rewards, IK, simulated training and evaluation.
//
//   ork reward    --robot R.jsonl --human H.jsonl [--out DIR]
//   ork ot-reward --robot R.jsonl --human H.jsonl [--set ot_eps=0.05]
//   ork ik        --chain chain.json --target target.json
//   ork train-sim --config configs/paper_slide.cfg --seed 3
//   ork eval      --config run/effective_config.txt --checkpoint run/checkpoint.bin
//   ork demo      --preset box-rotate
//
// Exit codes: 0 ok, 2 usage/config/io, 3 data, 4 numeric.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ork/config.hpp"
#include "ork/experiment.hpp"
#include "ork/kinematics.hpp"
#include "ork/objmotion.hpp"
#include "ork/otreward.hpp"
#include "ork/trackio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr const char* kDefaultOut = "ork_out";

int ExitCodeFor(ork::ErrorKind kind) {
  switch (kind) {
    case ork::ErrorKind::kParse:
    case ork::ErrorKind::kSchema:
    case ork::ErrorKind::kConfig:
    case ork::ErrorKind::kIo:
      return kExitUsage;
    case ork::ErrorKind::kNumeric:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

// Options shared by every subcommand. Direct flags are applied last.
struct CommonArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::optional<std::int64_t> seed;
  std::optional<std::string> out;
  std::vector<std::pair<std::string, std::string>> flags;  // key, value from direct flags
};

void AddCommon(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_file, "key = value config file");
  cmd->add_option("--set", args.sets, "override a config key (key=value), repeatable");
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--out", args.out, "output directory");
}

// A flag that maps onto a config key.
void AddKeyFlag(CLI::App* cmd, CommonArgs& args, const std::string& flag, const std::string& key,
                const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&args, key](const std::string& v) { args.flags.emplace_back(key, v); }, help);
}

ork::RunConfig MergeConfig(const CommonArgs& args) {
  ork::RunConfig cfg;
  if (!args.config_file.empty()) {
    if (!fs::exists(args.config_file)) throw ork::Error(ork::ErrorKind::kIo, "config file not found: " + args.config_file);
    cfg.ApplyFile(args.config_file);
  }
  for (const auto& kv : args.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ork::Error(ork::ErrorKind::kConfig, "--set expects key=value, got '" + kv + "'");
    cfg.Set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& [k, v] : args.flags) cfg.Set(k, v);
  if (args.seed) cfg.seed = *args.seed;
  if (args.out) {
    cfg.out = *args.out;
  } else if (cfg.out.empty()) {
    const char* env = std::getenv("OBJECT_REWARD_KIT_OUT");
    cfg.out = env && *env ? env : kDefaultOut;
  }
  cfg.Validate();
  return cfg;
}

void RequireFile(const std::string& path, const std::string& what) {
  if (path.empty()) throw ork::Error(ork::ErrorKind::kConfig, what + " not given");
  if (!fs::exists(path)) throw ork::Error(ork::ErrorKind::kIo, what + " not found: " + path);
}

fs::path PrepareOut(ork::RunConfig& cfg) {
  const fs::path dir(cfg.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ork::Error(ork::ErrorKind::kIo, "cannot create output directory " + cfg.out + ": " + ec.message());
  std::ofstream(dir / "effective_config.txt") << cfg.ToText();
  return dir;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ork::Error(ork::ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

void WriteJson(const fs::path& path, const json& j) { WriteText(path, j.dump(2) + "\n"); }

std::string Num(double x) { return ork::FormatDouble(x); }

json Summary(const std::vector<double>& r) {
  json j;
  if (r.empty()) {
    j["mean"] = nullptr;
    j["min"] = nullptr;
    j["final"] = nullptr;
    return j;
  }
  double sum = 0.0;
  double lo = r.front();
  for (double x : r) {
    sum += x;
    lo = std::min(lo, x);
  }
  j["mean"] = sum / static_cast<double>(r.size());
  j["min"] = lo;
  j["final"] = r.back();
  return j;
}

std::string MotionCells(const ork::ObjectMotion& m) {
  return fmt::format("{},{},{}", Num(m.d_trans.x()), Num(m.d_trans.y()), m.d_rot ? Num(*m.d_rot) : "");
}

// ---------------------------------------------------------------------------

int CmdReward(const CommonArgs& args) {
  ork::RunConfig cfg = MergeConfig(args);
  RequireFile(cfg.tracks_robot, "robot tracks");
  RequireFile(cfg.tracks_human, "human tracks");
  cfg = ork::ResolvePresetDefaults(cfg);
  const fs::path out = PrepareOut(cfg);

  const auto robot = ork::ScalePixels(ork::LoadTracks(cfg.tracks_robot, ork::TrackSource::kRobot), cfg.pixel_scale);
  const auto human = ork::ScalePixels(ork::LoadTracks(cfg.tracks_human, ork::TrackSource::kHuman), cfg.pixel_scale);
  const auto res = ork::EpisodeRewards(robot, human, ork::RewardOptionsFrom(cfg));

  std::string csv = "t,robot_d_trans_x,robot_d_trans_y,robot_d_rot,human_d_trans_x,human_d_trans_y,human_d_rot,reward\n";
  for (std::size_t i = 0; i < res.rewards.size(); ++i) {
    csv += fmt::format("{},{},{},{}\n", Num(human.frames[i].t), MotionCells(res.robot[i]), MotionCells(res.human[i]),
                       Num(res.rewards[i]));
  }
  WriteText(out / "rewards.csv", csv);
  json summary = Summary(res.rewards);
  summary["frames"] = res.rewards.size();
  summary["mode"] = cfg.reward_mode;
  summary["with_rotation"] = cfg.with_rotation == "true";
  WriteJson(out / "summary.json", summary);
  std::cout << fmt::format("reward: {} frames, mean {}\n", res.rewards.size(), summary["mean"].dump());
  return kExitOk;
}

int CmdOtReward(const CommonArgs& args) {
  ork::RunConfig cfg = MergeConfig(args);
  const bool features = cfg.ot_input == "features";
  const std::string robot_path = features ? cfg.features_robot : cfg.tracks_robot;
  const std::string human_path = features ? cfg.features_human : cfg.tracks_human;
  RequireFile(robot_path, "robot input");
  RequireFile(human_path, "human input");
  cfg = ork::ResolvePresetDefaults(cfg);
  const fs::path out = PrepareOut(cfg);
  const auto opts = ork::SinkhornOptionsFrom(cfg);
  const auto mode = ork::RewardOptionsFrom(cfg).mode;

  ork::OtRewardResult res;
  std::vector<double> times;
  std::string csv;
  if (features) {
    const auto robot = ork::LoadFeatures(robot_path);
    const auto human = ork::LoadFeatures(human_path);
    res = ork::FeatureOtRewards(robot, human, opts);
    times = robot.timestamps;
    csv = "t,reward\n";
  } else {
    const auto robot = ork::ScalePixels(ork::LoadTracks(robot_path, ork::TrackSource::kRobot), cfg.pixel_scale);
    const auto human = ork::ScalePixels(ork::LoadTracks(human_path, ork::TrackSource::kHuman), cfg.pixel_scale);
    res = ork::PointOtRewards(robot, human, opts);
    for (const auto& f : robot.frames) times.push_back(f.t);
    csv = "t,reward\n";
  }
  const auto rewards = ork::ApplyRewardMode(res.rewards, mode);
  for (std::size_t j = 0; j < rewards.size(); ++j) csv += fmt::format("{},{}\n", Num(times[j]), Num(rewards[j]));
  WriteText(out / "rewards.csv", csv);

  json summary = Summary(rewards);
  summary["converged"] = res.sinkhorn.converged;
  summary["iterations"] = res.sinkhorn.iterations;
  summary["marginal_error"] = res.sinkhorn.marginal_error;
  summary["transport_cost"] = (res.cost.array() * res.sinkhorn.plan.array()).sum();
  if (!res.sinkhorn.converged) {
    summary["warning"] = fmt::format("sinkhorn did not converge in {} iterations (marginal error {})",
                                     res.sinkhorn.iterations, res.sinkhorn.marginal_error);
    std::cerr << "warning: " << summary["warning"].get<std::string>() << "\n";
  }
  WriteJson(out / "summary.json", summary);
  std::cout << fmt::format("ot-reward: {} frames, mean {}\n", rewards.size(), summary["mean"].dump());
  return kExitOk;
}

// Target file: {"tips": [[x,y,z], ...]} with one entry per end effector,
// or a flat array of 3K numbers under "tips".
Eigen::VectorXd LoadTarget(const std::string& path, int effectors) {
  std::ifstream in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ork::Error(ork::ErrorKind::kParse, path + ": " + e.what());
  }
  const json& tips = j.is_object() && j.contains("tips") ? j["tips"] : j;
  std::vector<double> flat;
  if (!tips.is_array()) throw ork::Error(ork::ErrorKind::kSchema, path + ": 'tips' must be an array");
  for (const auto& item : tips) {
    if (item.is_array()) {
      const ork::Vec3 v = ork::Vec3FromJson(item, "target tip");
      flat.insert(flat.end(), {v.x(), v.y(), v.z()});
    } else if (item.is_number()) {
      flat.push_back(item.get<double>());
    } else {
      throw ork::Error(ork::ErrorKind::kSchema, path + ": target entries must be numbers or [x,y,z]");
    }
  }
  if (static_cast<int>(flat.size()) != 3 * effectors) {
    throw ork::Error(ork::ErrorKind::kSchema,
                     fmt::format("{}: expected {} target coordinates, got {}", path, 3 * effectors, flat.size()));
  }
  return Eigen::Map<Eigen::VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

int CmdIk(const CommonArgs& args) {
  ork::RunConfig cfg = MergeConfig(args);
  RequireFile(cfg.chain, "chain file");
  RequireFile(cfg.target, "target file");
  const bool inline_q0 = !cfg.q0.empty() && cfg.q0.front() == '[';
  if (!cfg.q0.empty() && !inline_q0) RequireFile(cfg.q0, "initial joint file");
  const fs::path out = PrepareOut(cfg);

  const ork::KinematicChain chain = ork::LoadChain(cfg.chain);
  const Eigen::VectorXd target = LoadTarget(cfg.target, chain.NumEffectors());
  ork::JointVector q0 = ork::JointVector::Zero(chain.NumJoints());
  if (!cfg.q0.empty()) {
    json j;
    try {
      if (inline_q0) {
        j = json::parse(cfg.q0);
      } else {
        std::ifstream in(cfg.q0);
        in >> j;
      }
    } catch (const json::exception& e) {
      throw ork::Error(ork::ErrorKind::kParse, cfg.q0 + ": " + e.what());
    }
    const json& q = j.is_object() && j.contains("q") ? j["q"] : j;
    if (!q.is_array() || static_cast<int>(q.size()) != chain.NumJoints()) {
      throw ork::Error(ork::ErrorKind::kSchema, cfg.q0 + ": expected an array of joint values");
    }
    for (int i = 0; i < chain.NumJoints(); ++i) q0[i] = q[static_cast<std::size_t>(i)].get<double>();
  }
  ork::IkOptions opts;
  opts.lr_arm = cfg.ik_lr_arm;
  opts.lr_hand = cfg.ik_lr_hand;
  opts.max_iters = cfg.ik_max_iters;
  opts.tol = cfg.ik_tol;
  opts.clamp_limits = cfg.ik_clamp;
  const ork::IkResult res = ork::SolveIk(chain, target, q0, opts);

  json j;
  j["q"] = std::vector<double>(res.q.data(), res.q.data() + res.q.size());
  json names = json::array();
  for (const auto& joint : chain.joints()) names.push_back(joint.name);
  j["joint_names"] = names;
  j["residual"] = res.residual;
  j["iterations"] = res.iterations;
  j["converged"] = res.converged;
  const Eigen::VectorXd reached = ork::ForwardKinematicsStacked(chain, res.q);
  j["reached"] = std::vector<double>(reached.data(), reached.data() + reached.size());
  WriteJson(out / "ik_result.json", j);
  std::cout << fmt::format("ik: residual {} after {} iterations{}\n", Num(res.residual), res.iterations,
                           res.converged ? "" : " (not converged)");
  return kExitOk;
}

// Object x (meters) recovered from the tracked centroid.
double ObjectX(const ork::TrackFrame& f, const ork::SimCamera& cam) {
  return (ork::Centroid(f).x() - cam.offset.x()) / cam.pixels_per_meter;
}

void AppendTrajectory(std::string& csv, const std::string& series, const ork::TrackSet& tracks,
                      const ork::SimCamera& cam) {
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const ork::Vec2 c = ork::Centroid(tracks.frames[i]);
    csv += fmt::format("{},{},{},{},{},{}\n", series, i, Num(tracks.frames[i].t), Num(c.x()), Num(c.y()),
                       Num(ObjectX(tracks.frames[i], cam)));
  }
}

json MetricsJson(const ork::RolloutMetrics& m) {
  return {{"displacement", m.displacement},
          {"rotation", m.rotation},
          {"return", m.ret},
          {"mean_reward", m.mean_reward}};
}

int CmdTrainSim(const CommonArgs& args) {
  ork::RunConfig cfg = MergeConfig(args);
  const fs::path out = PrepareOut(cfg);
  const ork::Scenario s = ork::BuildScenario(cfg);
  ork::ResidualLearner learner(ork::LearnerConfigFrom(s));
  ork::OuNoise noise = ork::NoiseFrom(s);

  std::ofstream log(out / "train_log.jsonl", std::ios::binary);
  if (!log) throw ork::Error(ork::ErrorKind::kIo, "cannot write train log");
  std::string curve = "ep,return,mean_reward,sigma,eval_return\n";
  std::string traj = "series,frame,t,centroid_u,centroid_v,object_x\n";
  AppendTrajectory(traj, "human", s.expert.tracks, s.cam);

  const auto outcome = ork::TrainScenario(
      s, learner, noise, [&](const ork::EpisodeLog& e, const ork::EpisodeRecord& rec, const ork::SimEnv& env) {
        json line;
        line["ep"] = e.ep;
        line["return"] = e.ret;
        line["steps"] = e.steps;
        line["sigma"] = e.sigma;
        line["eval_return"] = e.eval_return ? json(*e.eval_return) : json(nullptr);
        log << line.dump() << "\n";
        const double mean = rec.rewards.empty() ? 0.0 : e.ret / static_cast<double>(rec.rewards.size());
        curve += fmt::format("{},{},{},{},{}\n", e.ep, Num(e.ret), Num(mean), Num(e.sigma),
                             e.eval_return ? Num(*e.eval_return) : "");
        if (e.eval_return) AppendTrajectory(traj, fmt::format("ep{}", e.ep), env.tracks(), s.cam);
      });
  log.close();
  AppendTrajectory(traj, "replay", outcome.replay.tracks, s.cam);
  AppendTrajectory(traj, "final", outcome.final_eval.tracks, s.cam);
  WriteText(out / "reward_vs_episode.csv", curve);
  WriteText(out / "object_trajectory.csv", traj);
  ork::SaveCheckpointFile((out / "checkpoint.bin").string(), learner, noise);

  json summary;
  summary["preset"] = s.cfg.preset;
  summary["reward"] = s.cfg.reward;
  summary["episodes"] = outcome.log.episodes.size();
  summary["aborted"] = outcome.log.aborted;
  if (outcome.log.aborted) summary["error"] = outcome.log.error;
  summary["expert"] = MetricsJson(outcome.expert);
  summary["replay"] = MetricsJson(outcome.replay);
  summary["final"] = MetricsJson(outcome.final_eval);
  summary["learner_checksum"] = fmt::format("{:016x}", learner.Checksum());
  WriteJson(out / "summary.json", summary);

  if (outcome.log.aborted) {
    std::cerr << "error: training aborted: " << outcome.log.error << "\n";
    return ExitCodeFor(outcome.log.error_kind);
  }
  std::cout << fmt::format("train-sim: {} episodes, final displacement {} m, rotation {} rad\n",
                           outcome.log.episodes.size(), Num(outcome.final_eval.displacement),
                           Num(outcome.final_eval.rotation));
  return kExitOk;
}

int CmdEval(const CommonArgs& args) {
  ork::RunConfig cfg = MergeConfig(args);
  RequireFile(cfg.checkpoint, "checkpoint");
  const fs::path out = PrepareOut(cfg);
  const ork::Scenario s = ork::BuildScenario(cfg);
  ork::ResidualLearner learner(ork::LearnerConfigFrom(s));
  ork::OuNoise noise = ork::NoiseFrom(s);
  ork::LoadCheckpointFile(cfg.checkpoint, learner, noise);

  const ork::RolloutMetrics expert = ork::ExpertMetrics(s);
  const bool rotation_task = s.preset.kind == ork::TaskKind::kBoxRotate;
  const double expert_score = rotation_task ? std::abs(expert.rotation) : expert.displacement;
  const double threshold = 0.8 * expert_score;

  // Poses are drawn up front so results do not depend on rollout order.
  ork::Rng pose_rng(static_cast<std::uint64_t>(cfg.seed) ^ 0x9e3779b97f4a7c15ull);
  std::vector<ork::Vec2> shifts;
  for (int i = 0; i < cfg.eval_rollouts; ++i) {
    const double dx = pose_rng.Uniform(-cfg.eval_pose_range, cfg.eval_pose_range);
    const double dy = pose_rng.Uniform(-cfg.eval_pose_range, cfg.eval_pose_range);
    shifts.emplace_back(dx, dy);
  }

  std::string csv = "rollout,shift_x,shift_y,displacement,rotation,return,mean_reward,success\n";
  int successes = 0;
  double disp_sum = 0.0;
  double rot_sum = 0.0;
  for (int i = 0; i < cfg.eval_rollouts; ++i) {
    const auto m = ork::EvaluateShifted(s, learner, shifts[static_cast<std::size_t>(i)]);
    const double score = rotation_task ? std::abs(m.rotation) : m.displacement;
    const bool ok = score >= threshold;
    successes += ok ? 1 : 0;
    disp_sum += m.displacement;
    rot_sum += m.rotation;
    csv += fmt::format("{},{},{},{},{},{},{},{}\n", i, Num(shifts[static_cast<std::size_t>(i)].x()),
                       Num(shifts[static_cast<std::size_t>(i)].y()), Num(m.displacement), Num(m.rotation), Num(m.ret),
                       Num(m.mean_reward), ok ? 1 : 0);
  }
  WriteText(out / "eval.csv", csv);
  const double n = std::max(1, cfg.eval_rollouts);
  json summary;
  summary["rollouts"] = cfg.eval_rollouts;
  summary["successes"] = successes;
  summary["success_rate"] = cfg.eval_rollouts > 0 ? successes / n : 0.0;
  summary["metric"] = rotation_task ? "abs_rotation" : "displacement";
  summary["threshold"] = threshold;
  summary["expert"] = MetricsJson(expert);
  summary["mean_displacement"] = disp_sum / n;
  summary["mean_rotation"] = rot_sum / n;
  WriteJson(out / "eval_summary.json", summary);
  std::cout << fmt::format("eval: {}/{} rollouts reached 80% of the expert\n", successes, cfg.eval_rollouts);
  return kExitOk;
}

int CmdDemo(const CommonArgs& args) {
  ork::RunConfig cfg = MergeConfig(args);
  const fs::path out = PrepareOut(cfg);
  const ork::Scenario s = ork::BuildScenario(cfg);
  ork::SaveTracks((out / "expert_tracks.jsonl").string(), s.expert.tracks);
  ork::SaveFingertips((out / "expert_fingertips.jsonl").string(), s.expert.fingertips);
  ork::SaveFingertips((out / "replay_fingertips.jsonl").string(), s.replay);
  const auto replay = ork::ReplayMetrics(s);
  ork::SaveTracks((out / "replay_tracks.jsonl").string(), replay.tracks);
  ork::CalibrationBundle calib;
  calib.h_ow = ork::HomTransform::Identity();
  calib.h_rw = ork::HomTransform::Identity();
  calib.h_rc = s.cam.BaseToCamera();
  WriteJson(out / "calibration.json", ork::CalibrationToJson(calib));
  std::cout << fmt::format("demo: {} frames written to {}\n", s.expert.tracks.size(), out.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"object-reward-kit: object-centric rewards and residual learning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ork 0.1.0");

  CommonArgs args;
  auto* reward = app.add_subcommand("reward", "trajectory-matching reward between robot and human tracks");
  auto* ot = app.add_subcommand("ot-reward", "optimal-transport reward baseline");
  auto* ik = app.add_subcommand("ik", "fingertip inverse kinematics");
  auto* train = app.add_subcommand("train-sim", "train a residual policy in the planar simulator");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint over randomized object poses");
  auto* demo = app.add_subcommand("demo", "write expert and replay files for a preset");
  for (auto* cmd : {reward, ot, ik, train, eval, demo}) AddCommon(cmd, args);
  for (auto* cmd : {reward, ot}) {
    AddKeyFlag(cmd, args, "--robot", "tracks_robot", "robot track JSONL");
    AddKeyFlag(cmd, args, "--human", "tracks_human", "human track JSONL");
    AddKeyFlag(cmd, args, "--mode", "reward_mode", "dense | sparse");
  }
  AddKeyFlag(reward, args, "--with-rotation", "with_rotation", "true | false");
  AddKeyFlag(ot, args, "--robot-features", "features_robot", "robot feature JSONL");
  AddKeyFlag(ot, args, "--human-features", "features_human", "human feature JSONL");
  AddKeyFlag(ot, args, "--eps", "ot_eps", "entropic regularization");
  AddKeyFlag(ik, args, "--chain", "chain", "chain JSON");
  AddKeyFlag(ik, args, "--target", "target", "target fingertip JSON");
  AddKeyFlag(ik, args, "--q0", "q0", "initial joint JSON");
  for (auto* cmd : {train, eval, demo}) AddKeyFlag(cmd, args, "--preset", "preset", "paper-slide | box-rotate");
  AddKeyFlag(train, args, "--episodes", "episodes", "training episodes");
  AddKeyFlag(train, args, "--reward", "reward", "hudor | point-ot");
  AddKeyFlag(eval, args, "--checkpoint", "checkpoint", "checkpoint from train-sim");
  AddKeyFlag(eval, args, "--rollouts", "eval_rollouts", "number of evaluation rollouts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (reward->parsed()) return CmdReward(args);
    if (ot->parsed()) return CmdOtReward(args);
    if (ik->parsed()) return CmdIk(args);
    if (train->parsed()) return CmdTrainSim(args);
    if (eval->parsed()) return CmdEval(args);
    if (demo->parsed()) return CmdDemo(args);
  } catch (const ork::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
