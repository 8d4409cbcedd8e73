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

#ifndef ORK_NN_HPP_
#define ORK_NN_HPP_

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ork/error.hpp"

namespace ork {

/// Seeded engine plus normal sampler; both states are serializable so a
/// checkpoint reload continues the exact same stream.
struct Rng {
  std::mt19937_64 engine;
  std::normal_distribution<double> normal{0.0, 1.0};

  explicit Rng(std::uint64_t seed = 0) : engine(seed) {}

  double Normal() { return normal(engine); }
  double Uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
  std::size_t Index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine);
  }

  std::string State() const {
    std::ostringstream os;
    os << engine << ' ' << normal;
    return os.str();
  }
  void SetState(const std::string& s) {
    std::istringstream is(s);
    is >> engine >> normal;
    if (!is) throw Error(ErrorKind::kParse, "corrupt RNG state");
  }
};

// ---------------------------------------------------------------------------
// Fully connected ReLU network, batch-major as columns (features × batch).

struct MlpParams {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  void SetZero() {
    for (auto& m : w) m.setZero();
    for (auto& v : b) v.setZero();
  }

  Eigen::Index Count() const {
    Eigen::Index n = 0;
    for (std::size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
  }

  Eigen::VectorXd Flat() const {
    Eigen::VectorXd out(Count());
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
      out.segment(k, w[l].size()) = Eigen::Map<const Eigen::VectorXd>(w[l].data(), w[l].size());
      k += w[l].size();
      out.segment(k, b[l].size()) = b[l];
      k += b[l].size();
    }
    return out;
  }

  void SetFlat(const Eigen::VectorXd& flat) {
    Eigen::Index k = 0;
    for (std::size_t l = 0; l < w.size(); ++l) {
      Eigen::Map<Eigen::VectorXd>(w[l].data(), w[l].size()) = flat.segment(k, w[l].size());
      k += w[l].size();
      b[l] = flat.segment(k, b[l].size());
      k += b[l].size();
    }
  }
};

class Mlp {
 public:
  struct Cache {
    std::vector<Eigen::MatrixXd> inputs;  // input to each layer
  };

  Mlp() = default;

  // sizes = {in, hidden..., out}. Weights ~ U(±1/sqrt(fan_in)).
  Mlp(const std::vector<int>& sizes, Rng& rng, bool zero_last = false) {
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
      Eigen::MatrixXd w(sizes[l + 1], sizes[l]);
      Eigen::VectorXd b(sizes[l + 1]);
      for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.Uniform(-bound, bound);
      for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = rng.Uniform(-bound, bound);
      params_.w.push_back(std::move(w));
      params_.b.push_back(std::move(b));
    }
    if (zero_last && !params_.w.empty()) {
      params_.w.back().setZero();
      params_.b.back().setZero();
    }
  }

  Eigen::Index InputDim() const { return params_.w.front().cols(); }
  Eigen::Index OutputDim() const { return params_.w.back().rows(); }
  std::size_t NumLayers() const { return params_.w.size(); }

  MlpParams& params() { return params_; }
  const MlpParams& params() const { return params_; }

  Eigen::MatrixXd Forward(const Eigen::MatrixXd& x, Cache* cache = nullptr) const {
    if (cache) cache->inputs.clear();
    Eigen::MatrixXd h = x;
    for (std::size_t l = 0; l < params_.w.size(); ++l) {
      if (cache) cache->inputs.push_back(h);
      Eigen::MatrixXd z = params_.w[l] * h;
      z.colwise() += params_.b[l];
      if (l + 1 < params_.w.size()) z = z.cwiseMax(0.0);
      h = std::move(z);
    }
    return h;
  }

  // Accumulates parameter gradients into `grads` (if given); returns dL/dx.
  Eigen::MatrixXd Backward(const Cache& cache, const Eigen::MatrixXd& dy, MlpParams* grads) const {
    Eigen::MatrixXd d = dy;
    for (std::size_t l = params_.w.size(); l-- > 0;) {
      const auto& in = cache.inputs[l];
      if (grads) {
        grads->w[l].noalias() += d * in.transpose();
        grads->b[l] += d.rowwise().sum();
      }
      d = params_.w[l].transpose() * d;
      // ReLU derivative of the previous layer, read off its output.
      if (l > 0) d = d.cwiseProduct((in.array() > 0.0).cast<double>().matrix());
    }
    return d;
  }

  MlpParams ZeroGrads() const {
    MlpParams g = params_;
    g.SetZero();
    return g;
  }

 private:
  MlpParams params_;
};

class Adam {
 public:
  Adam() = default;
  Adam(const MlpParams& like, double lr) : lr_(lr), m_(like), v_(like) {
    m_.SetZero();
    v_.SetZero();
  }

  void Step(MlpParams& params, const MlpParams& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t l = 0; l < params.w.size(); ++l) {
      Update(params.w[l], grads.w[l], m_.w[l], v_.w[l], c1, c2);
      Update(params.b[l], grads.b[l], m_.b[l], v_.b[l], c1, c2);
    }
  }

  double lr() const { return lr_; }
  std::int64_t steps() const { return t_; }
  MlpParams& m() { return m_; }
  MlpParams& v() { return v_; }
  const MlpParams& m() const { return m_; }
  const MlpParams& v() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  template <typename P, typename G>
  void Update(P& p, const G& g, P& m, P& v, double c1, double c2) {
    m = kBeta1 * m + (1.0 - kBeta1) * g;
    v = kBeta2 * v + (1.0 - kBeta2) * g.cwiseProduct(g);
    p.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
  }

  double lr_ = 1e-3;
  std::int64_t t_ = 0;
  MlpParams m_;
  MlpParams v_;
};

// Target ← (1 − tau)·target + tau·online.
inline void SoftUpdate(MlpParams& target, const MlpParams& online, double tau) {
  for (std::size_t l = 0; l < target.w.size(); ++l) {
    target.w[l] = (1.0 - tau) * target.w[l] + tau * online.w[l];
    target.b[l] = (1.0 - tau) * target.b[l] + tau * online.b[l];
  }
}

}  // namespace ork

#endif  // ORK_NN_HPP_
