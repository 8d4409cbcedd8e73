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

#ifndef ORK_KINEMATICS_HPP_
#define ORK_KINEMATICS_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ork/error.hpp"
#include "ork/geometry.hpp"

namespace ork {

enum class JointGroup { kArm, kHand };

struct RevoluteJoint {
  std::string name;
  int parent = -1;            // index into joints, -1 = base
  HomTransform offset;        // parent joint frame → this joint frame at q = 0
  Vec3 axis = Vec3::UnitZ();  // unit, expressed in this joint's frame
  double lo = -std::numbers::pi;
  double hi = std::numbers::pi;
  JointGroup group = JointGroup::kArm;
};

struct EndEffector {
  std::string name;
  int parent = -1;
  Vec3 offset = Vec3::Zero();
};

using JointVector = Eigen::VectorXd;

/// Tree of revolute joints with point end-effectors. Joints are stored
/// parent-before-child.
class KinematicChain {
 public:
  KinematicChain() = default;

  KinematicChain(std::vector<RevoluteJoint> joints, std::vector<EndEffector> effectors)
      : joints_(std::move(joints)), effectors_(std::move(effectors)) {
    Validate();
    downstream_.assign(effectors_.size(), std::vector<bool>(joints_.size(), false));
    for (std::size_t e = 0; e < effectors_.size(); ++e) {
      for (int j = effectors_[e].parent; j >= 0; j = joints_[static_cast<std::size_t>(j)].parent) {
        downstream_[e][static_cast<std::size_t>(j)] = true;
      }
    }
  }

  int NumJoints() const { return static_cast<int>(joints_.size()); }
  int NumEffectors() const { return static_cast<int>(effectors_.size()); }
  const std::vector<RevoluteJoint>& joints() const { return joints_; }
  const std::vector<EndEffector>& effectors() const { return effectors_; }

  // True when joint j moves effector e.
  bool Moves(int j, int e) const {
    return downstream_[static_cast<std::size_t>(e)][static_cast<std::size_t>(j)];
  }

  JointVector Clamp(const JointVector& q) const {
    JointVector out = q;
    for (int j = 0; j < NumJoints(); ++j) out[j] = std::clamp(q[j], joints_[j].lo, joints_[j].hi);
    return out;
  }

  bool WithinLimits(const JointVector& q) const {
    for (int j = 0; j < NumJoints(); ++j) {
      if (q[j] < joints_[j].lo || q[j] > joints_[j].hi) return false;
    }
    return true;
  }

 private:
  void Validate() const {
    if (joints_.empty()) throw Error(ErrorKind::kSchema, "chain has no joints");
    if (effectors_.empty()) throw Error(ErrorKind::kSchema, "chain has no end effectors");
    for (std::size_t j = 0; j < joints_.size(); ++j) {
      const auto& jt = joints_[j];
      if (std::abs(jt.axis.norm() - 1.0) > 1e-9) {
        throw Error(ErrorKind::kSchema, "joint '" + jt.name + "' axis is not unit length");
      }
      if (!(jt.lo < jt.hi)) throw Error(ErrorKind::kSchema, "joint '" + jt.name + "' has lo >= hi");
      if (jt.parent >= static_cast<int>(j) || jt.parent < -1) {
        throw Error(ErrorKind::kSchema, "joint '" + jt.name + "' must follow its parent");
      }
    }
    for (const auto& e : effectors_) {
      if (e.parent < 0 || e.parent >= static_cast<int>(joints_.size())) {
        throw Error(ErrorKind::kSchema, "end effector '" + e.name + "' has no valid parent joint");
      }
    }
  }

  std::vector<RevoluteJoint> joints_;
  std::vector<EndEffector> effectors_;
  std::vector<std::vector<bool>> downstream_;
};

struct ChainPose {
  std::vector<HomTransform> frames;  // joint frames after applying q
  std::vector<Vec3> origins;         // joint origins (base coordinates)
  std::vector<Vec3> axes;            // joint axes (base coordinates)
  std::vector<Vec3> effectors;       // end-effector positions
};

inline ChainPose ComputePose(const KinematicChain& chain, const JointVector& q) {
  if (q.size() != chain.NumJoints()) {
    throw Error(ErrorKind::kShape,
                fmt::format("joint vector has {} entries, chain has {}", q.size(), chain.NumJoints()));
  }
  ChainPose pose;
  const auto n = static_cast<std::size_t>(chain.NumJoints());
  pose.frames.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto& jt = chain.joints()[j];
    const HomTransform pre =
        jt.parent < 0 ? jt.offset : pose.frames[static_cast<std::size_t>(jt.parent)] * jt.offset;
    pose.origins.push_back(pre.translation());
    pose.axes.push_back(pre.rotation() * jt.axis);
    pose.frames.push_back(pre * HomTransform::AxisAngle(jt.axis, q[static_cast<Eigen::Index>(j)]));
  }
  for (const auto& e : chain.effectors()) {
    pose.effectors.push_back(pose.frames[static_cast<std::size_t>(e.parent)].Apply(e.offset));
  }
  return pose;
}

// Stacked end-effector positions (3 per effector).
inline Eigen::VectorXd ForwardKinematicsStacked(const KinematicChain& chain, const JointVector& q) {
  const auto pose = ComputePose(chain, q);
  Eigen::VectorXd out(3 * chain.NumEffectors());
  for (int e = 0; e < chain.NumEffectors(); ++e) out.segment<3>(3 * e) = pose.effectors[e];
  return out;
}

inline FingertipSet ForwardKinematics(const KinematicChain& chain, const JointVector& q) {
  if (chain.NumEffectors() != FingertipSet::kTips) {
    throw Error(ErrorKind::kShape, "chain does not have four fingertip effectors");
  }
  const auto pose = ComputePose(chain, q);
  FingertipSet out;
  for (int e = 0; e < FingertipSet::kTips; ++e) out.tips[e] = pose.effectors[e];
  return out;
}

// Positional Jacobian, (3·effectors) × joints: column j is ω_j × (p_e − o_j)
// for effectors downstream of j, zero otherwise.
inline Eigen::MatrixXd Jacobian(const KinematicChain& chain, const JointVector& q) {
  const auto pose = ComputePose(chain, q);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3 * chain.NumEffectors(), chain.NumJoints());
  for (int e = 0; e < chain.NumEffectors(); ++e) {
    for (int j = 0; j < chain.NumJoints(); ++j) {
      if (!chain.Moves(j, e)) continue;
      jac.block<3, 1>(3 * e, j) = pose.axes[j].cross(pose.effectors[e] - pose.origins[j]);
    }
  }
  return jac;
}

struct IkOptions {
  double lr_arm = 0.002;
  double lr_hand = 0.1;  // 50x the arm rate so the hand absorbs most of the correction
  int max_iters = 2000;
  double tol = 1e-3;     // meters, on the stacked fingertip error norm
  bool clamp_limits = true;

  void Validate() const {
    if (!(lr_arm > 0.0) || !(lr_hand > 0.0)) throw Error(ErrorKind::kInvalidInput, "IK step sizes must be positive");
    if (!(tol > 0.0)) throw Error(ErrorKind::kInvalidInput, "IK tolerance must be positive");
    if (max_iters < 0) throw Error(ErrorKind::kInvalidInput, "IK max_iters must be >= 0");
  }
};

struct IkResult {
  JointVector q;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Jacobian-transpose descent on ½‖FK(q) − target‖² with per-group step
/// sizes. A step that would increase the residual is rejected and the step
/// scale halved, so accepted iterates never get worse.
inline IkResult SolveIk(const KinematicChain& chain, const Eigen::VectorXd& target,
                        const JointVector& q0, const IkOptions& opts = {}) {
  opts.Validate();
  if (target.size() != 3 * chain.NumEffectors()) {
    throw Error(ErrorKind::kShape, "IK target size does not match end-effector count");
  }
  if (!q0.allFinite() || !target.allFinite()) {
    throw Error(ErrorKind::kNumeric, "non-finite IK input at iteration 0");
  }
  Eigen::VectorXd lr(chain.NumJoints());
  for (int j = 0; j < chain.NumJoints(); ++j) {
    lr[j] = chain.joints()[j].group == JointGroup::kArm ? opts.lr_arm : opts.lr_hand;
  }
  IkResult res;
  res.q = opts.clamp_limits ? chain.Clamp(q0) : q0;
  Eigen::VectorXd err = ForwardKinematicsStacked(chain, res.q) - target;
  res.residual = err.norm();
  if (!std::isfinite(res.residual)) {
    throw Error(ErrorKind::kNumeric, "non-finite residual at iteration 0");
  }
  double scale = 1.0;
  int it = 0;
  for (; it < opts.max_iters && res.residual >= opts.tol; ++it) {
    const Eigen::VectorXd grad = Jacobian(chain, res.q).transpose() * err;
    JointVector q_next = res.q - scale * lr.cwiseProduct(grad);
    if (opts.clamp_limits) q_next = chain.Clamp(q_next);
    if (!q_next.allFinite()) {
      throw Error(ErrorKind::kNumeric, fmt::format("non-finite joint state at iteration {}", it + 1));
    }
    const Eigen::VectorXd err_next = ForwardKinematicsStacked(chain, q_next) - target;
    const double r_next = err_next.norm();
    if (!std::isfinite(r_next)) {
      throw Error(ErrorKind::kNumeric, fmt::format("non-finite residual at iteration {}", it + 1));
    }
    if (r_next <= res.residual) {
      res.q = q_next;
      err = err_next;
      res.residual = r_next;
      scale = std::min(1.0, 1.5 * scale);
    } else {
      scale *= 0.5;
      if (scale < 1e-12) break;
    }
  }
  res.iterations = it;
  res.converged = res.residual < opts.tol;
  return res;
}

inline IkResult SolveIk(const KinematicChain& chain, const FingertipSet& target, const JointVector& q0,
                        const IkOptions& opts = {}) {
  Eigen::VectorXd t(12);
  t = target.Flatten();
  return SolveIk(chain, t, q0, opts);
}

// ---------------------------------------------------------------------------
// Chain description JSON

inline nlohmann::json ChainToJson(const KinematicChain& chain) {
  nlohmann::json joints = nlohmann::json::array();
  for (const auto& j : chain.joints()) {
    joints.push_back({{"name", j.name},
                      {"parent", j.parent < 0 ? nlohmann::json(nullptr)
                                              : nlohmann::json(chain.joints()[j.parent].name)},
                      {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
                      {"offset", TransformToJson(j.offset)},
                      {"limits", {j.lo, j.hi}},
                      {"group", j.group == JointGroup::kArm ? "arm" : "hand"}});
  }
  nlohmann::json effectors = nlohmann::json::array();
  for (const auto& e : chain.effectors()) {
    effectors.push_back({{"name", e.name},
                         {"parent", chain.joints()[e.parent].name},
                         {"offset", {e.offset.x(), e.offset.y(), e.offset.z()}}});
  }
  return {{"joints", joints}, {"end_effectors", effectors}};
}

inline KinematicChain ChainFromJson(const nlohmann::json& j) {
  try {
    std::map<std::string, int> index;
    std::vector<RevoluteJoint> joints;
    for (const auto& jj : j.at("joints")) {
      RevoluteJoint jt;
      jt.name = jj.at("name").get<std::string>();
      if (jj.contains("parent") && !jj["parent"].is_null()) {
        const auto p = jj["parent"].get<std::string>();
        if (!index.count(p)) throw Error(ErrorKind::kSchema, "unknown or later parent joint '" + p + "'");
        jt.parent = index[p];
      }
      jt.axis = Vec3FromJson(jj.at("axis"), "axis");
      if (jj.contains("offset")) {
        const auto& off = jj["offset"];
        jt.offset = off.is_array() ? HomTransform(Mat3::Identity(), Vec3FromJson(off, "offset"))
                                   : TransformFromJson(off);
      }
      const auto& lim = jj.at("limits");
      if (!lim.is_array() || lim.size() != 2) throw Error(ErrorKind::kSchema, "limits must be [lo, hi]");
      jt.lo = lim[0].get<double>();
      jt.hi = lim[1].get<double>();
      const auto group = jj.value("group", std::string("arm"));
      if (group != "arm" && group != "hand") throw Error(ErrorKind::kSchema, "group must be arm or hand");
      jt.group = group == "arm" ? JointGroup::kArm : JointGroup::kHand;
      if (index.count(jt.name)) throw Error(ErrorKind::kSchema, "duplicate joint '" + jt.name + "'");
      index[jt.name] = static_cast<int>(joints.size());
      joints.push_back(std::move(jt));
    }
    std::vector<EndEffector> effectors;
    for (const auto& ee : j.at("end_effectors")) {
      EndEffector e;
      e.name = ee.at("name").get<std::string>();
      const auto p = ee.at("parent").get<std::string>();
      if (!index.count(p)) throw Error(ErrorKind::kSchema, "unknown effector parent '" + p + "'");
      e.parent = index[p];
      e.offset = Vec3FromJson(ee.at("offset"), "effector offset");
      effectors.push_back(std::move(e));
    }
    return KinematicChain(std::move(joints), std::move(effectors));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kSchema, std::string("chain description: ") + e.what());
  }
}

inline KinematicChain LoadChain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open chain file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path + ": " + e.what());
  }
  return ChainFromJson(j);
}

// Planar two-link arm in the XY plane, unit links, one effector at the tip.
// Both joints default to the hand step size.
inline KinematicChain TwoLinkPlanarChain(double l1 = 1.0, double l2 = 1.0, JointGroup group = JointGroup::kHand) {
  const double pi = std::numbers::pi;
  std::vector<RevoluteJoint> joints(2);
  joints[0] = {"shoulder", -1, HomTransform{}, Vec3::UnitZ(), -pi, pi, group};
  joints[1] = {"elbow", 0, HomTransform::Translation(l1, 0, 0), Vec3::UnitZ(), -pi, pi, group};
  return KinematicChain(std::move(joints), {{"tip", 1, Vec3(l2, 0, 0)}});
}

/// 6-DOF arm with a 16-DOF four-finger hand (thumb, index, middle, ring).
/// Link lengths are plausible for a desk-scale arm and an anthropomorphic hand,
/// not a specific robot.
inline KinematicChain DefaultArmHandChain() {
  const double pi = std::numbers::pi;
  std::vector<RevoluteJoint> j;
  auto add = [&j](std::string name, int parent, HomTransform offset, Vec3 axis, double lo, double hi,
                  JointGroup g) {
    j.push_back({std::move(name), parent, offset, axis, lo, hi, g});
    return static_cast<int>(j.size()) - 1;
  };
  using T = HomTransform;
  const auto arm = JointGroup::kArm;
  const auto hand = JointGroup::kHand;
  int p = add("arm_yaw", -1, T::Translation(0, 0, 0.15), Vec3::UnitZ(), -pi, pi, arm);
  p = add("shoulder_pitch", p, T::Translation(0, 0, 0.12), Vec3::UnitY(), -2.2, 2.2, arm);
  p = add("elbow_pitch", p, T::Translation(0, 0, 0.41), Vec3::UnitY(), -2.5, 2.5, arm);
  p = add("forearm_roll", p, T::Translation(0, 0, 0.20), Vec3::UnitZ(), -pi, pi, arm);
  p = add("wrist_pitch", p, T::Translation(0, 0, 0.20), Vec3::UnitY(), -2.0, 2.0, arm);
  const int wrist = add("wrist_roll", p, T::Translation(0, 0, 0.10), Vec3::UnitZ(), -pi, pi, arm);

  std::vector<EndEffector> tips;
  // Thumb: mounted on the palm side, pointing along the hand's +x at rest.
  {
    const T base = T::AxisAngle(Vec3::UnitY(), pi / 2, Vec3(0.03, -0.025, 0.03));
    int q = add("thumb_0", wrist, base, Vec3::UnitY(), -0.3, 1.5, hand);
    q = add("thumb_1", q, T::Translation(0, 0, 0.02), Vec3::UnitX(), -0.3, 1.2, hand);
    q = add("thumb_2", q, T::Translation(0, 0, 0.05), Vec3::UnitX(), -0.3, 1.7, hand);
    q = add("thumb_3", q, T::Translation(0, 0, 0.05), Vec3::UnitX(), -0.3, 1.8, hand);
    tips.push_back({"thumb_tip", q, Vec3(0, 0, 0.045)});
  }
  const char* names[] = {"index", "middle", "ring"};
  const double spread[] = {0.045, 0.0, -0.045};
  for (int f = 0; f < 3; ++f) {
    const std::string n = names[f];
    int q = add(n + "_0", wrist, T::Translation(spread[f], 0, 0.10), Vec3::UnitY(), -0.5, 0.5, hand);
    q = add(n + "_1", q, T::Translation(0, 0, 0.015), Vec3::UnitX(), -0.3, 1.7, hand);
    q = add(n + "_2", q, T::Translation(0, 0, 0.054), Vec3::UnitX(), -0.3, 1.8, hand);
    q = add(n + "_3", q, T::Translation(0, 0, 0.038), Vec3::UnitX(), -0.3, 1.8, hand);
    tips.push_back({n + "_tip", q, Vec3(0, 0, 0.044)});
  }
  return KinematicChain(std::move(j), std::move(tips));
}

}  // namespace ork

#endif  // ORK_KINEMATICS_HPP_
