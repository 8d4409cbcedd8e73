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

#ifndef ORK_OTREWARD_HPP_
#define ORK_OTREWARD_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ork/error.hpp"
#include "ork/geometry.hpp"
#include "ork/objmotion.hpp"
#include "ork/trackio.hpp"

namespace ork {

// Rows index the expert (human) trajectory, columns the robot trajectory.
using CostMatrix = Eigen::MatrixXd;
using TransportPlan = Eigen::MatrixXd;

struct FeatureSeries {
  std::vector<double> timestamps;
  std::vector<Eigen::VectorXd> vectors;

  std::size_t size() const { return vectors.size(); }
  Eigen::Index Dim() const { return vectors.empty() ? 0 : vectors.front().size(); }

  void Validate() const {
    for (const auto& v : vectors) {
      if (v.size() != Dim()) throw Error(ErrorKind::kShape, "feature dimension varies");
      if (!v.allFinite()) throw Error(ErrorKind::kInvalidInput, "non-finite feature");
    }
  }
};

inline FeatureSeries ParseFeatures(std::istream& in, const std::string& name = "<stream>") {
  FeatureSeries fs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::IsBlank(line)) continue;
    const std::string where = fmt::format("{}:{}", name, lineno);
    const auto rec = detail::ParseLine(line, name, lineno);
    fs.timestamps.push_back(detail::NumberField(rec, "t", where));
    if (!rec.contains("z") || !rec["z"].is_array()) {
      throw Error(ErrorKind::kParse, where + ": missing array field 'z'");
    }
    Eigen::VectorXd z(static_cast<Eigen::Index>(rec["z"].size()));
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const auto& e = rec["z"][static_cast<std::size_t>(i)];
      if (!e.is_number()) throw Error(ErrorKind::kParse, where + ": 'z' entries must be numbers");
      z[i] = e.get<double>();
    }
    if (!fs.vectors.empty() && z.size() != fs.Dim()) {
      throw Error(ErrorKind::kSchema, where + ": feature dimension differs from first record");
    }
    fs.vectors.push_back(std::move(z));
  }
  if (fs.vectors.empty()) throw Error(ErrorKind::kSchema, name + ": no records");
  return fs;
}

inline FeatureSeries LoadFeatures(const std::string& path) {
  auto in = detail::OpenOrThrow(path);
  return ParseFeatures(in, path);
}

inline void WriteFeatures(std::ostream& out, const FeatureSeries& fs) {
  for (std::size_t i = 0; i < fs.size(); ++i) {
    std::string line = "{\"t\": " + FormatDouble(i < fs.timestamps.size() ? fs.timestamps[i]
                                                                           : double(i)) +
                       ", \"z\": [";
    for (Eigen::Index k = 0; k < fs.vectors[i].size(); ++k) {
      if (k) line += ", ";
      line += FormatDouble(fs.vectors[i][k]);
    }
    line += "]}\n";
    out << line;
  }
}

enum class CostMetric { kSquaredEuclidean, kCosineDistance };

inline CostMatrix ComputeCostMatrix(const FeatureSeries& a, const FeatureSeries& b,
                                    CostMetric metric) {
  a.Validate();
  b.Validate();
  if (a.size() == 0 || b.size() == 0) throw Error(ErrorKind::kInvalidInput, "empty feature series");
  if (a.Dim() != b.Dim()) {
    throw Error(ErrorKind::kShape,
                fmt::format("feature dimensions differ: {} vs {}", a.Dim(), b.Dim()));
  }
  CostMatrix c(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  if (metric == CostMetric::kSquaredEuclidean) {
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      for (Eigen::Index j = 0; j < c.cols(); ++j) {
        c(i, j) = (a.vectors[i] - b.vectors[j]).squaredNorm();
      }
    }
    return c;
  }
  auto norms = [](const FeatureSeries& s) {
    std::vector<double> n;
    for (const auto& v : s.vectors) {
      const double len = v.norm();
      if (!(len > 0.0)) throw Error(ErrorKind::kInvalidInput, "zero vector under cosine distance");
      n.push_back(len);
    }
    return n;
  };
  const auto na = norms(a);
  const auto nb = norms(b);
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const double cs = a.vectors[i].dot(b.vectors[j]) / (na[i] * nb[j]);
      // Clamp rounding so entries stay in [0, 2].
      c(i, j) = std::clamp(1.0 - cs, 0.0, 2.0);
    }
  }
  return c;
}

struct SinkhornOptions {
  double eps = 0.01;
  int max_iters = 1000;
  double tol = 1e-6;
};

struct SinkhornResult {
  TransportPlan plan;
  bool converged = false;
  int iterations = 0;
  double marginal_error = 0.0;  // max |row sum − 1/rows| after the last column update
};

namespace detail {

inline double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

}  // namespace detail

/// Entropic OT with uniform marginals, log-domain updates. Column marginals
/// are exact after every iteration; convergence is judged on row marginals.
inline SinkhornResult Sinkhorn(const CostMatrix& cost, const SinkhornOptions& opts = {}) {
  if (!(opts.eps > 0.0) || !std::isfinite(opts.eps)) {
    throw Error(ErrorKind::kInvalidInput, "eps must be positive");
  }
  if (cost.size() == 0) throw Error(ErrorKind::kInvalidInput, "empty cost matrix");
  if (!cost.allFinite() || cost.minCoeff() < 0.0) {
    throw Error(ErrorKind::kInvalidInput, "cost entries must be finite and non-negative");
  }
  const Eigen::Index n = cost.rows();
  const Eigen::Index m = cost.cols();
  const double eps = opts.eps;
  const double log_a = -std::log(static_cast<double>(n));
  const double log_b = -std::log(static_cast<double>(m));
  const double a = 1.0 / static_cast<double>(n);

  Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd scratch_row(m);
  Eigen::VectorXd scratch_col(n);

  SinkhornResult result;
  double used_eps = eps;
  auto row_error = [&]() {
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row = ((g.array() - cost.row(i).transpose().array() + f[i]) / used_eps).exp().sum();
      err = std::max(err, std::abs(row - a));
    }
    return err;
  };

  auto plan_at = [&](const Eigen::VectorXd& ff, const Eigen::VectorXd& gg) {
    Eigen::MatrixXd p(n, m);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) p(i, j) = std::exp((ff[i] + gg[j] - cost(i, j)) / used_eps);
    }
    return p;
  };
  auto full_error = [&](const Eigen::MatrixXd& p) {
    return std::max((p.rowwise().sum().array() - a).abs().maxCoeff(),
                    (p.colwise().sum().array() - 1.0 / static_cast<double>(m)).abs().maxCoeff());
  };
  // Newton step on the dual with the last column potential pinned (the
  // Hessian is singular along f + c, g - c). Returns false if no step helps.
  auto newton_step = [&]() {
    const Eigen::MatrixXd p = plan_at(f, g);
    const Eigen::VectorXd r = p.rowwise().sum();
    const Eigen::VectorXd c = p.colwise().sum().transpose();
    const Eigen::Index k = n + m - 1;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
    h.topLeftCorner(n, n).diagonal() = r;
    h.topRightCorner(n, m - 1) = p.leftCols(m - 1);
    h.bottomLeftCorner(m - 1, n) = p.leftCols(m - 1).transpose();
    h.bottomRightCorner(m - 1, m - 1).diagonal() = c.head(m - 1);
    Eigen::VectorXd rhs(k);
    rhs.head(n) = Eigen::VectorXd::Constant(n, a) - r;
    rhs.tail(m - 1) = Eigen::VectorXd::Constant(m - 1, 1.0 / static_cast<double>(m)) - c.head(m - 1);
    const Eigen::VectorXd d = used_eps * h.ldlt().solve(rhs);
    if (!d.allFinite()) return false;
    const double before = full_error(p);
    for (double t = 1.0; t > 1e-6; t *= 0.5) {
      Eigen::VectorXd f2 = f + t * d.head(n);
      Eigen::VectorXd g2 = g;
      g2.head(m - 1) += t * d.tail(m - 1);
      const double after = full_error(plan_at(f2, g2));
      if (after < before) {
        f = f2;
        g = g2;
        return true;
      }
    }
    return false;
  };

  // Anneal eps down from the cost scale, warm-starting the potentials;
  // plain iterations at small eps converge only sublinearly.
  const double scale = cost.maxCoeff();
  double stage_eps = std::max(eps, scale);
  // Plain sweeps can stall on near-degenerate costs; after kStall sweeps at
  // the target eps each iteration also takes a Newton step.
  constexpr int kStall = 200;
  int final_sweeps = 0;
  bool use_newton = true;
  int it = 0;
  while (it < opts.max_iters) {
    const bool last = stage_eps <= eps;
    used_eps = stage_eps;
    ++it;
    if (last && use_newton && final_sweeps >= kStall) use_newton = newton_step();
    for (Eigen::Index i = 0; i < n; ++i) {
      scratch_row = (g - cost.row(i).transpose()) / stage_eps;
      f[i] = stage_eps * (log_a - detail::LogSumExp(scratch_row));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
      scratch_col = (f - cost.col(j)) / stage_eps;
      g[j] = stage_eps * (log_b - detail::LogSumExp(scratch_col));
    }
    if (!last) {
      stage_eps = std::max(eps, 0.7 * stage_eps);
      continue;
    }
    ++final_sweeps;
    result.iterations = it;
    result.marginal_error = row_error();
    if (result.marginal_error < opts.tol) {
      result.converged = true;
      break;
    }
  }
  if (result.iterations == 0) {
    result.iterations = it;
    result.marginal_error = opts.max_iters <= 0 ? std::numeric_limits<double>::infinity() : row_error();
  }

  result.plan = plan_at(f, g);
  return result;
}

// Per-robot-step reward: −Σ_i C_ij μ_ij.
inline std::vector<double> OtRewards(const CostMatrix& cost, const TransportPlan& plan) {
  if (cost.rows() != plan.rows() || cost.cols() != plan.cols()) {
    throw Error(ErrorKind::kShape, "cost and plan shapes differ");
  }
  std::vector<double> rewards(static_cast<std::size_t>(cost.cols()));
  for (Eigen::Index j = 0; j < cost.cols(); ++j) {
    rewards[static_cast<std::size_t>(j)] = 0.0 - (cost.col(j).array() * plan.col(j).array()).sum();
  }
  return rewards;
}

struct OtRewardResult {
  std::vector<double> rewards;
  CostMatrix cost;
  SinkhornResult sinkhorn;
};

// Frame feature: points sorted by polar angle (then radius) about the visible
// centroid, occluded points replaced by that centroid, padded with it to
// `slots` points, and flattened to 2·slots values. Independent of tracker
// point indices.
inline Eigen::VectorXd PointFeature(const TrackFrame& frame, std::size_t slots) {
  const Vec2 c = Centroid(frame);
  std::vector<Vec2> pts;
  pts.reserve(slots);
  for (std::size_t i = 0; i < frame.size(); ++i) pts.push_back(frame.visible[i] ? frame.points[i] : c);
  while (pts.size() < slots) pts.push_back(c);
  std::stable_sort(pts.begin(), pts.end(), [&c](const Vec2& p, const Vec2& q) {
    const Vec2 dp = p - c;
    const Vec2 dq = q - c;
    const double ap = std::atan2(dp.y(), dp.x());
    const double aq = std::atan2(dq.y(), dq.x());
    if (ap != aq) return ap < aq;
    return dp.squaredNorm() < dq.squaredNorm();
  });
  Eigen::VectorXd out(static_cast<Eigen::Index>(2 * pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) out.segment<2>(static_cast<Eigen::Index>(2 * i)) = pts[i];
  return out;
}

inline FeatureSeries PointFeatures(const TrackSet& tracks, std::size_t slots) {
  FeatureSeries fs;
  for (const auto& f : tracks.frames) {
    fs.timestamps.push_back(f.t);
    fs.vectors.push_back(PointFeature(f, slots));
  }
  return fs;
}

inline OtRewardResult OtRewardsFromCost(CostMatrix cost, const SinkhornOptions& opts) {
  OtRewardResult out;
  out.sinkhorn = Sinkhorn(cost, opts);
  out.rewards = OtRewards(cost, out.sinkhorn.plan);
  out.cost = std::move(cost);
  return out;
}

inline OtRewardResult PointOtRewards(const TrackSet& robot, const TrackSet& human,
                                     const SinkhornOptions& opts = {}) {
  if (robot.empty() || human.empty()) throw Error(ErrorKind::kInvalidInput, "empty track set");
  const std::size_t slots = std::max(robot.NumPoints(), human.NumPoints());
  return OtRewardsFromCost(ComputeCostMatrix(PointFeatures(human, slots),
                                             PointFeatures(robot, slots),
                                             CostMetric::kSquaredEuclidean),
                           opts);
}

inline OtRewardResult FeatureOtRewards(const FeatureSeries& robot, const FeatureSeries& human,
                                       const SinkhornOptions& opts = {}) {
  return OtRewardsFromCost(ComputeCostMatrix(human, robot, CostMetric::kCosineDistance), opts);
}

// Zeroes all but the last k rewards when `mode` is sparse.
inline std::vector<double> ApplyRewardMode(std::vector<double> rewards, const RewardMode& mode) {
  if (!mode.IsSparse()) return rewards;
  const std::size_t keep = std::min(mode.sparse_k, rewards.size());
  std::fill(rewards.begin(), rewards.end() - static_cast<std::ptrdiff_t>(keep), 0.0);
  return rewards;
}

}  // namespace ork

#endif  // ORK_OTREWARD_HPP_
