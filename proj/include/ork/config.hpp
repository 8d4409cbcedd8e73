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

#ifndef ORK_CONFIG_HPP_
#define ORK_CONFIG_HPP_

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "ork/error.hpp"
#include "ork/geometry.hpp"
#include "ork/trackio.hpp"

namespace ork {

/// Everything a CLI run needs. Text form is one `key = value` per line,
/// `#` starts a comment; vectors are comma separated.
struct RunConfig {
  // task / scenario
  std::string preset = "paper-slide";
  std::int64_t seed = 1;
  int episodes = 300;
  std::string out;
  Vec3 perturb_offset{0.0, 0.0, 0.03};
  double perturb_noise = 0.001;
  double occlusion_rate = 0.0;
  double camera_ppm = 500.0;  // pixels per meter on the table plane
  Vec2 camera_offset{320.0, 240.0};
  double camera_height = 0.8;

  // reward
  std::string reward = "hudor";       // hudor | point-ot
  std::string reward_mode = "preset";  // preset | dense | sparse
  int sparse_k = 5;
  std::string with_rotation = "preset";  // preset | true | false
  double w_rot = 1.0;
  double reward_scale = 0.001;
  Vec2 pixel_scale{1.0, 1.0};
  std::string degenerate = "error";  // error | hold

  // optimal transport
  std::string ot_input = "points";  // points | features
  double ot_eps = 0.01;
  int ot_max_iters = 1000;
  double ot_tol = 1e-6;

  // learner
  double gamma = 0.99;
  int n_step = 3;
  int batch_size = 256;
  double tau = 0.01;
  std::int64_t buffer_capacity = 100000;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  int hidden = 64;
  int depth = 2;
  double max_residual = 0.02;
  int updates_per_episode = -1;
  std::string axis_mask = "preset";

  // exploration
  double ou_theta = 0.15;
  double ou_mu = 0.0;
  double sigma0 = 0.2;
  double sigma1 = 0.02;
  std::int64_t decay_steps = 20000;

  // evaluation
  int eval_every = 10;
  int eval_rollouts = 10;
  double eval_pose_range = 0.03;

  // files
  std::string tracks_robot;
  std::string tracks_human;
  std::string features_robot;
  std::string features_human;
  std::string chain;
  std::string target;
  std::string q0;
  std::string calibration;
  std::string checkpoint;

  // inverse kinematics
  double ik_lr_arm = 0.002;
  double ik_lr_hand = 0.1;
  int ik_max_iters = 2000;
  double ik_tol = 1e-3;
  bool ik_clamp = true;

  using FieldRef = std::variant<std::string*, std::int64_t*, int*, double*, bool*, Vec2*, Vec3*>;

  std::vector<std::pair<std::string, FieldRef>> Fields() {
    return {{"preset", &preset}, {"seed", &seed}, {"episodes", &episodes}, {"out", &out},
            {"perturb_offset", &perturb_offset}, {"perturb_noise", &perturb_noise},
            {"occlusion_rate", &occlusion_rate}, {"camera_ppm", &camera_ppm},
            {"camera_offset", &camera_offset}, {"camera_height", &camera_height}, {"reward", &reward}, {"reward_mode", &reward_mode},
            {"sparse_k", &sparse_k}, {"with_rotation", &with_rotation}, {"w_rot", &w_rot},
            {"reward_scale", &reward_scale}, {"pixel_scale", &pixel_scale}, {"degenerate", &degenerate},
            {"ot_input", &ot_input}, {"ot_eps", &ot_eps}, {"ot_max_iters", &ot_max_iters},
            {"ot_tol", &ot_tol}, {"gamma", &gamma}, {"n_step", &n_step}, {"batch_size", &batch_size},
            {"tau", &tau}, {"buffer_capacity", &buffer_capacity}, {"actor_lr", &actor_lr},
            {"critic_lr", &critic_lr}, {"hidden", &hidden}, {"depth", &depth},
            {"max_residual", &max_residual}, {"updates_per_episode", &updates_per_episode},
            {"axis_mask", &axis_mask}, {"ou_theta", &ou_theta}, {"ou_mu", &ou_mu}, {"sigma0", &sigma0},
            {"sigma1", &sigma1}, {"decay_steps", &decay_steps}, {"eval_every", &eval_every},
            {"eval_rollouts", &eval_rollouts}, {"eval_pose_range", &eval_pose_range},
            {"tracks_robot", &tracks_robot}, {"tracks_human", &tracks_human},
            {"features_robot", &features_robot}, {"features_human", &features_human}, {"chain", &chain},
            {"target", &target}, {"q0", &q0}, {"calibration", &calibration}, {"checkpoint", &checkpoint},
            {"ik_lr_arm", &ik_lr_arm}, {"ik_lr_hand", &ik_lr_hand}, {"ik_max_iters", &ik_max_iters},
            {"ik_tol", &ik_tol}, {"ik_clamp", &ik_clamp}};
  }

  void Set(const std::string& key, const std::string& value) {
    for (auto& [name, ref] : Fields()) {
      if (name != key) continue;
      std::visit([&](auto* p) { Assign(key, value, p); }, ref);
      return;
    }
    throw Error(ErrorKind::kConfig, "unknown config key '" + key + "'");
  }

  // Canonical text: every key, in declaration order, full precision.
  std::string ToText() {
    std::string text;
    for (auto& [name, ref] : Fields()) {
      text += name + " = " + std::visit([](auto* p) { return Format(*p); }, ref) + "\n";
    }
    return text;
  }

  void Validate() const {
    if (episodes < 0) throw Error(ErrorKind::kConfig, "episodes must be >= 0");
    if (!(ot_eps > 0.0)) throw Error(ErrorKind::kConfig, "ot_eps must be positive");
    if (ot_max_iters < 1) throw Error(ErrorKind::kConfig, "ot_max_iters must be >= 1");
    if (!(ot_tol > 0.0)) throw Error(ErrorKind::kConfig, "ot_tol must be positive");
    if (reward != "hudor" && reward != "point-ot") throw Error(ErrorKind::kConfig, "reward must be hudor or point-ot");
    if (reward_mode != "preset" && reward_mode != "dense" && reward_mode != "sparse") {
      throw Error(ErrorKind::kConfig, "reward_mode must be preset, dense or sparse");
    }
    if (with_rotation != "preset" && with_rotation != "true" && with_rotation != "false") {
      throw Error(ErrorKind::kConfig, "with_rotation must be preset, true or false");
    }
    if (degenerate != "error" && degenerate != "hold") throw Error(ErrorKind::kConfig, "degenerate must be error or hold");
    if (ot_input != "points" && ot_input != "features") throw Error(ErrorKind::kConfig, "ot_input must be points or features");
    if (sparse_k < 1) throw Error(ErrorKind::kConfig, "sparse_k must be >= 1");
    if (!(max_residual > 0.0)) throw Error(ErrorKind::kConfig, "max_residual must be positive");
    if (decay_steps < 1 || !(ou_theta > 0.0)) throw Error(ErrorKind::kConfig, "bad OU schedule");
    if (batch_size < 1 || n_step < 1 || hidden < 1 || depth < 1 || buffer_capacity < 1) {
      throw Error(ErrorKind::kConfig, "learner sizes must be positive");
    }
    if (!(camera_ppm > 0.0) || !(camera_height > 0.0)) throw Error(ErrorKind::kConfig, "camera scale must be positive");
    if (occlusion_rate < 0.0 || occlusion_rate >= 1.0) throw Error(ErrorKind::kConfig, "occlusion_rate must be in [0, 1)");
    if (eval_rollouts < 0) throw Error(ErrorKind::kConfig, "eval_rollouts must be >= 0");
  }

 private:
  static std::string Trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  static std::vector<double> Numbers(const std::string& key, const std::string& v, std::size_t n) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(ParseDouble(key, Trim(item)));
    if (out.size() != n) throw Error(ErrorKind::kConfig, fmt::format("'{}' needs {} comma-separated numbers", key, n));
    return out;
  }

  static double ParseDouble(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw Error(ErrorKind::kConfig, "'" + key + "' expects a number, got '" + v + "'");
    return d;
  }

  static std::int64_t ParseInt(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long i = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0') throw Error(ErrorKind::kConfig, "'" + key + "' expects an integer, got '" + v + "'");
    return i;
  }

  static void Assign(const std::string&, const std::string& v, std::string* p) { *p = v; }
  static void Assign(const std::string& k, const std::string& v, std::int64_t* p) { *p = ParseInt(k, v); }
  static void Assign(const std::string& k, const std::string& v, int* p) { *p = static_cast<int>(ParseInt(k, v)); }
  static void Assign(const std::string& k, const std::string& v, double* p) { *p = ParseDouble(k, v); }
  static void Assign(const std::string& k, const std::string& v, bool* p) {
    if (v == "true" || v == "1") {
      *p = true;
    } else if (v == "false" || v == "0") {
      *p = false;
    } else {
      throw Error(ErrorKind::kConfig, "'" + k + "' expects true or false");
    }
  }
  static void Assign(const std::string& k, const std::string& v, Vec2* p) {
    const auto n = Numbers(k, v, 2);
    *p = Vec2(n[0], n[1]);
  }
  static void Assign(const std::string& k, const std::string& v, Vec3* p) {
    const auto n = Numbers(k, v, 3);
    *p = Vec3(n[0], n[1], n[2]);
  }

  static std::string Format(const std::string& s) { return s; }
  static std::string Format(std::int64_t i) { return std::to_string(i); }
  static std::string Format(int i) { return std::to_string(i); }
  static std::string Format(double d) { return FormatDouble(d); }
  static std::string Format(bool b) { return b ? "true" : "false"; }
  static std::string Format(const Vec2& v) { return FormatDouble(v.x()) + "," + FormatDouble(v.y()); }
  static std::string Format(const Vec3& v) {
    return FormatDouble(v.x()) + "," + FormatDouble(v.y()) + "," + FormatDouble(v.z());
  }

 public:
  // Applies `key = value` lines; later lines win.
  void ApplyText(const std::string& text, const std::string& name = "<config>") {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = Trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw Error(ErrorKind::kConfig, fmt::format("{}:{}: expected key = value", name, lineno));
      }
      Set(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
    }
  }

  void ApplyFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kConfig, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    ApplyText(ss.str(), path);
  }
};

}  // namespace ork

#endif  // ORK_CONFIG_HPP_
