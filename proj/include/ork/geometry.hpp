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

#ifndef ORK_GEOMETRY_HPP_
#define ORK_GEOMETRY_HPP_

#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "ork/error.hpp"

namespace ork {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

// Rigid transform stored as rotation + translation. Units: meters, radians.
class HomTransform {
 public:
  static constexpr double kOrthoTol = 1e-9;
  // Inputs further than this from SO(3) are rejected rather than repaired.
  static constexpr double kRepairTol = 1e-3;

  HomTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  HomTransform(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw Error(ErrorKind::kInvalidInput, "transform has non-finite entries");
    }
    const double drift = OrthoDrift(rotation_);
    if (drift > kRepairTol) {
      throw Error(ErrorKind::kInvalidInput,
                  "rotation is not orthonormal (drift " + std::to_string(drift) + ")");
    }
    if (drift > kOrthoTol) rotation_ = Orthonormalize(rotation_);
  }

  static HomTransform Identity() { return {}; }

  static HomTransform Translation(double x, double y, double z) {
    return HomTransform(Mat3::Identity(), Vec3(x, y, z));
  }

  static HomTransform AxisAngle(const Vec3& axis, double angle,
                                const Vec3& translation = Vec3::Zero()) {
    return HomTransform(Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix(),
                        translation);
  }

  static HomTransform RotZ(double angle) { return AxisAngle(Vec3::UnitZ(), angle); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 Apply(const Vec3& p) const { return rotation_ * p + translation_; }

  Eigen::Matrix4d Matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  // max |RᵀR − I| and |det R − 1|.
  static double OrthoDrift(const Mat3& r) {
    const double gram = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    return std::max(gram, std::abs(r.determinant() - 1.0));
  }

  // Nearest rotation in the Frobenius sense (polar factor).
  static Mat3 Orthonormalize(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1.0;
    return u * v.transpose();
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// Result applies b first, then a.
inline HomTransform Compose(const HomTransform& a, const HomTransform& b) {
  return HomTransform(a.rotation() * b.rotation(),
                      a.rotation() * b.translation() + a.translation());
}

inline HomTransform operator*(const HomTransform& a, const HomTransform& b) {
  return Compose(a, b);
}

inline HomTransform Invert(const HomTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return HomTransform(rt, -rt * t.translation());
}

/// Four fingertip positions in one frame, ordered thumb, index, middle, ring.
/// The flattened 12-vector is the retargeted action a_r.
struct FingertipSet {
  static constexpr int kTips = 4;
  static constexpr double kDefaultWorkspace = 1.5;

  std::array<Vec3, kTips> tips{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};

  Vec12 Flatten() const {
    Vec12 out;
    for (int i = 0; i < kTips; ++i) out.segment<3>(3 * i) = tips[i];
    return out;
  }

  static FingertipSet Unflatten(const Vec12& v) {
    FingertipSet s;
    for (int i = 0; i < kTips; ++i) s.tips[i] = v.segment<3>(3 * i);
    return s;
  }

  bool InWorkspace(double half_box = kDefaultWorkspace) const {
    for (const auto& tip : tips) {
      if (!tip.allFinite() || tip.cwiseAbs().maxCoeff() > half_box) return false;
    }
    return true;
  }

  bool operator==(const FingertipSet& other) const { return tips == other.tips; }
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_, double fy_, double cx_, double cy_)
      : fx(fx_), fy(fy_), cx(cx_), cy(cy_) {
    if (!(fx > 0.0) || !(fy > 0.0)) {
      throw Error(ErrorKind::kInvalidInput, "focal lengths must be positive");
    }
  }

  // Pinhole back-projection, no distortion.
  Vec3 Backproject(const Vec2& pixel, double depth) const {
    return depth * Vec3((pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0);
  }
};

// Maps human fingertips from the headset frame into the robot base:
// a_r = H_RW⁻¹ · H_OW · a_o.
inline FingertipSet RetargetFingertips(const HomTransform& h_ow, const HomTransform& h_rw,
                                       const FingertipSet& a_o) {
  const HomTransform chain = Invert(h_rw) * h_ow;
  FingertipSet out;
  for (int i = 0; i < FingertipSet::kTips; ++i) out.tips[i] = chain.Apply(a_o.tips[i]);
  return out;
}

// Offset (robot frame) between an object detected in the camera and its
// reference location in the demonstration. h_rc maps base → camera coordinates.
inline Vec3 SpatialOffset(const Vec2& object_px, double depth, const CameraIntrinsics& k,
                          const HomTransform& h_rc, const Vec3& reference_r) {
  if (!(depth > 0.0) || !std::isfinite(depth)) {
    throw Error(ErrorKind::kInvalidInput, "depth must be positive");
  }
  const Vec3 object_c = k.Backproject(object_px, depth);
  const Vec3 object_r = Invert(h_rc).Apply(object_c);
  return object_r - reference_r;
}

inline std::vector<FingertipSet> ApplyOffset(std::span<const FingertipSet> trajectory,
                                             const Vec3& offset) {
  std::vector<FingertipSet> out(trajectory.begin(), trajectory.end());
  for (auto& frame : out) {
    for (auto& tip : frame.tips) tip += offset;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON: {"rotation": [[r00,r01,r02],[...],[...]], "translation": [x,y,z]}

inline nlohmann::json TransformToJson(const HomTransform& t) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({t.rotation()(r, 0), t.rotation()(r, 1), t.rotation()(r, 2)});
  }
  return {{"rotation", rot},
          {"translation", {t.translation().x(), t.translation().y(), t.translation().z()}}};
}

inline Vec3 Vec3FromJson(const nlohmann::json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorKind::kSchema, what + " must be a 3-element array");
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw Error(ErrorKind::kSchema, what + " entries must be numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

inline HomTransform TransformFromJson(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rotation") || !j.contains("translation")) {
    throw Error(ErrorKind::kSchema, "transform needs 'rotation' and 'translation'");
  }
  const auto& rot = j.at("rotation");
  if (!rot.is_array() || rot.size() != 3) {
    throw Error(ErrorKind::kSchema, "rotation must be 3x3");
  }
  Mat3 r;
  for (int i = 0; i < 3; ++i) r.row(i) = Vec3FromJson(rot[i], "rotation row").transpose();
  return HomTransform(r, Vec3FromJson(j.at("translation"), "translation"));
}

struct CalibrationBundle {
  HomTransform h_ow;
  HomTransform h_rw;
  HomTransform h_rc;
};

inline CalibrationBundle LoadCalibration(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open calibration file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParse, path + ": " + e.what());
  }
  CalibrationBundle bundle;
  for (const char* key : {"H_OW", "H_RW", "H_RC"}) {
    if (!j.contains(key)) throw Error(ErrorKind::kSchema, path + ": missing " + key);
  }
  bundle.h_ow = TransformFromJson(j["H_OW"]);
  bundle.h_rw = TransformFromJson(j["H_RW"]);
  bundle.h_rc = TransformFromJson(j["H_RC"]);
  return bundle;
}

inline nlohmann::json CalibrationToJson(const CalibrationBundle& b) {
  return {{"H_OW", TransformToJson(b.h_ow)},
          {"H_RW", TransformToJson(b.h_rw)},
          {"H_RC", TransformToJson(b.h_rc)}};
}

}  // namespace ork

#endif  // ORK_GEOMETRY_HPP_
