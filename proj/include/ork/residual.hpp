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

#ifndef ORK_RESIDUAL_HPP_
#define ORK_RESIDUAL_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ork/error.hpp"
#include "ork/geometry.hpp"
#include "ork/nn.hpp"

namespace ork {

/// Residual policy observation: replayed fingertip target, change in executed
/// fingertips, object centroid (px) and object motion (px, px²).
struct PolicyInput {
  Vec12 a_r = Vec12::Zero();
  Vec12 ds = Vec12::Zero();
  Vec2 centroid = Vec2::Zero();
  Eigen::VectorXd motion = Eigen::VectorXd::Zero(2);

  bool AllFinite() const {
    return a_r.allFinite() && ds.allFinite() && centroid.allFinite() && motion.allFinite();
  }
};

// Brings meters and pixels to O(1) before they reach the networks.
struct InputScaling {
  double a_r = 10.0;
  double ds = 50.0;
  Vec2 centroid_center = Vec2::Zero();
  double centroid = 0.01;
  double trans = 0.01;
  double rot = 0.001;
};

inline int EncodedInputDim(bool with_rotation) { return 12 + 12 + 2 + (with_rotation ? 3 : 2); }

inline Eigen::VectorXd EncodeInput(const PolicyInput& in, const InputScaling& s) {
  if (!in.AllFinite()) throw Error(ErrorKind::kInvalidInput, "policy input has non-finite values");
  Eigen::VectorXd out(26 + in.motion.size());
  out.segment<12>(0) = s.a_r * in.a_r;
  out.segment<12>(12) = s.ds * in.ds;
  out.segment<2>(24) = s.centroid * (in.centroid - s.centroid_center);
  out[26] = s.trans * in.motion[0];
  out[27] = s.trans * in.motion[1];
  if (in.motion.size() > 2) out[28] = s.rot * in.motion[2];
  return out;
}

/// Which of the 12 fingertip axes (X/Y/Z per finger, thumb first) the
/// residual may move.
class AxisMask {
 public:
  enum Axis { kX = 0, kY = 1, kZ = 2 };
  enum Finger { kThumb = 0, kIndex = 1, kMiddle = 2, kRing = 3 };

  explicit AxisMask(const std::array<bool, 12>& active) : active_(active) {
    if (ActiveCount() == 0) throw Error(ErrorKind::kInvalidInput, "axis mask has no active axis");
  }

  static AxisMask All() {
    std::array<bool, 12> a;
    a.fill(true);
    return AxisMask(a);
  }

  static AxisMask Of(std::initializer_list<std::pair<int, int>> finger_axis) {
    std::array<bool, 12> a{};
    for (auto [f, ax] : finger_axis) a[static_cast<std::size_t>(3 * f + ax)] = true;
    return AxisMask(a);
  }

  static AxisMask CardSliding() { return Of({{kThumb, kX}, {kThumb, kY}}); }
  static AxisMask BreadPicking() { return Of({{kThumb, kX}, {kIndex, kX}, {kMiddle, kX}, {kRing, kX}}); }
  static AxisMask MusicBox() {
    return Of({{kThumb, kX}, {kThumb, kY}, {kThumb, kZ}, {kIndex, kX}, {kIndex, kY}, {kIndex, kZ}});
  }
  static AxisMask PaperSliding() {
    return Of({{kThumb, kX}, {kThumb, kZ}, {kIndex, kX}, {kIndex, kZ},
               {kMiddle, kX}, {kMiddle, kZ}, {kRing, kX}, {kRing, kZ}});
  }

  // Parses "1,0,1,..." (12 entries) or a preset name.
  static AxisMask Parse(const std::string& text) {
    if (text == "all") return All();
    if (text == "card-sliding") return CardSliding();
    if (text == "bread-picking") return BreadPicking();
    if (text == "music-box") return MusicBox();
    if (text == "paper-sliding") return PaperSliding();
    std::array<bool, 12> a{};
    std::size_t i = 0;
    for (char c : text) {
      if (c == ',' || c == ' ') continue;
      if ((c != '0' && c != '1') || i >= 12) throw Error(ErrorKind::kConfig, "bad axis mask '" + text + "'");
      a[i++] = c == '1';
    }
    if (i != 12) throw Error(ErrorKind::kConfig, "axis mask needs 12 entries");
    return AxisMask(a);
  }

  std::string ToString() const {
    std::string s;
    for (std::size_t i = 0; i < 12; ++i) {
      if (i) s += ',';
      s += active_[i] ? '1' : '0';
    }
    return s;
  }

  bool active(std::size_t i) const { return active_[i]; }
  int ActiveCount() const { return static_cast<int>(std::count(active_.begin(), active_.end(), true)); }

  std::vector<int> ActiveIndices() const {
    std::vector<int> idx;
    for (int i = 0; i < 12; ++i) {
      if (active_[static_cast<std::size_t>(i)]) idx.push_back(i);
    }
    return idx;
  }

  bool operator==(const AxisMask&) const = default;

 private:
  std::array<bool, 12> active_;
};

inline Vec12 MaskApply(const Vec12& raw, const AxisMask& mask) {
  Vec12 out = raw;
  for (std::size_t i = 0; i < 12; ++i) {
    if (!mask.active(i)) out[static_cast<Eigen::Index>(i)] = 0.0;
  }
  return out;
}

inline FingertipSet ComposeAction(const FingertipSet& a_r, const Vec12& residual) {
  return FingertipSet::Unflatten(a_r.Flatten() + residual);
}

/// Ornstein-Uhlenbeck exploration noise with a linearly decaying scale:
///   x ← x + θ(μ − x) + σ(step)·g,  σ(step) = σ0 → σ1 over decay_steps, then σ1.
class OuNoise {
 public:
  OuNoise() = default;
  OuNoise(int dim, double theta, double mu, double sigma0, double sigma1, std::int64_t decay_steps)
      : state_(Eigen::VectorXd::Constant(dim, mu)),
        theta_(theta), mu_(mu), sigma0_(sigma0), sigma1_(sigma1), decay_steps_(decay_steps) {
    if (!(theta > 0.0)) throw Error(ErrorKind::kInvalidInput, "OU theta must be positive");
    if (decay_steps < 1) throw Error(ErrorKind::kInvalidInput, "OU decay_steps must be >= 1");
    if (dim < 1) throw Error(ErrorKind::kInvalidInput, "OU dimension must be >= 1");
  }

  double Sigma() const {
    const double frac = std::min(1.0, static_cast<double>(step_) / static_cast<double>(decay_steps_));
    return sigma0_ + (sigma1_ - sigma0_) * frac;
  }

  const Eigen::VectorXd& Sample(Rng& rng) {
    const double sigma = Sigma();
    for (Eigen::Index i = 0; i < state_.size(); ++i) {
      state_[i] += theta_ * (mu_ - state_[i]) + sigma * rng.Normal();
    }
    ++step_;
    return state_;
  }

  // Restarts the process at μ; the schedule step is kept.
  void ResetState() { state_.setConstant(mu_); }

  const Eigen::VectorXd& state() const { return state_; }
  Eigen::VectorXd& state() { return state_; }
  std::int64_t step() const { return step_; }
  void set_step(std::int64_t s) { step_ = s; }
  int dim() const { return static_cast<int>(state_.size()); }

 private:
  Eigen::VectorXd state_;
  double theta_ = 0.15;
  double mu_ = 0.0;
  double sigma0_ = 0.2;
  double sigma1_ = 0.02;
  std::int64_t decay_steps_ = 20000;
  std::int64_t step_ = 0;
};

// Inputs are stored already encoded; `last` marks the final step of an
// episode (terminal or not).
struct Transition {
  Eigen::VectorXd input;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_input;
  bool done = false;
  bool last = false;

  bool operator==(const Transition& o) const {
    return input == o.input && action == o.action && reward == o.reward &&
           next_input == o.next_input && done == o.done && last == o.last;
  }
};

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000) : capacity_(capacity) {
    if (capacity == 0) throw Error(ErrorKind::kInvalidInput, "buffer capacity must be positive");
  }

  void Add(Transition t) {
    for (auto* v : {&t.input, &t.action, &t.next_input}) {
      if (!v->allFinite()) throw Error(ErrorKind::kInvalidInput, "non-finite transition");
    }
    if (!std::isfinite(t.reward)) throw Error(ErrorKind::kInvalidInput, "non-finite reward");
    if (data_.size() < capacity_) {
      data_.push_back(std::move(t));
    } else {
      data_[head_] = std::move(t);
    }
    head_ = (head_ + 1) % capacity_;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Logical index: 0 is the oldest stored transition.
  const Transition& At(std::size_t i) const {
    const std::size_t start = data_.size() < capacity_ ? 0 : head_;
    return data_[(start + i) % capacity_];
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Transition> data_;
};

struct LearnerConfig {
  int input_dim = 28;
  int action_dim = 1;
  int hidden = 64;
  int depth = 2;
  double gamma = 0.99;
  int n_step = 3;
  int batch_size = 256;
  double tau = 0.01;
  std::size_t buffer_capacity = 100000;
  double actor_lr = 3e-4;
  double critic_lr = 1e-3;
  double max_residual = 0.02;  // meters per axis
  std::uint64_t seed = 1;
};

struct UpdateSummary {
  bool performed = false;
  std::string status;
  double critic_loss = 0.0;
  double actor_loss = 0.0;
};

/// Deterministic actor with twin critics, n-step TD targets and EMA target
/// critics. The actor's last layer starts at zero, so a fresh learner
/// outputs a zero residual (pure replay).
class ResidualLearner {
 public:
  struct Action {
    Vec12 residual = Vec12::Zero();  // meters, masked
    Eigen::VectorXd normalized;      // active axes in [-1, 1]
  };

  // Training minibatch with precomputed TD targets.
  struct Batch {
    Eigen::MatrixXd inputs;   // input_dim × B
    Eigen::MatrixXd actions;  // action_dim × B
    Eigen::VectorXd targets;  // B
  };

  explicit ResidualLearner(const LearnerConfig& cfg)
      : cfg_(cfg), rng_(cfg.seed), buffer_(cfg.buffer_capacity) {
    if (cfg.input_dim < 1 || cfg.action_dim < 1 || cfg.hidden < 1 || cfg.depth < 1) {
      throw Error(ErrorKind::kInvalidInput, "learner dimensions must be positive");
    }
    if (cfg.n_step < 1 || cfg.batch_size < 1) throw Error(ErrorKind::kInvalidInput, "n_step and batch must be >= 1");
    if (!(cfg.max_residual > 0.0)) throw Error(ErrorKind::kInvalidInput, "max_residual must be positive");
    std::vector<int> actor_sizes{cfg.input_dim};
    std::vector<int> critic_sizes{cfg.input_dim + cfg.action_dim};
    for (int i = 0; i < cfg.depth; ++i) {
      actor_sizes.push_back(cfg.hidden);
      critic_sizes.push_back(cfg.hidden);
    }
    actor_sizes.push_back(cfg.action_dim);
    critic_sizes.push_back(1);
    actor_ = Mlp(actor_sizes, rng_, /*zero_last=*/true);
    critic1_ = Mlp(critic_sizes, rng_, /*zero_last=*/true);
    critic2_ = Mlp(critic_sizes, rng_, /*zero_last=*/true);
    target1_ = critic1_;
    target2_ = critic2_;
    actor_opt_ = Adam(actor_.params(), cfg.actor_lr);
    critic1_opt_ = Adam(critic1_.params(), cfg.critic_lr);
    critic2_opt_ = Adam(critic2_.params(), cfg.critic_lr);
  }

  const LearnerConfig& config() const { return cfg_; }
  ReplayBuffer& buffer() { return buffer_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  Rng& rng() { return rng_; }
  Mlp& actor() { return actor_; }
  Mlp& critic1() { return critic1_; }
  Mlp& critic2() { return critic2_; }
  const Mlp& actor() const { return actor_; }

  // tanh(actor(x)) for a batch of encoded inputs.
  Eigen::MatrixXd PolicyBatch(const Eigen::MatrixXd& x, Mlp::Cache* cache = nullptr) const {
    return actor_.Forward(x, cache).array().tanh().matrix();
  }

  Action Act(const Eigen::VectorXd& input, OuNoise* noise, const AxisMask& mask) {
    if (mask.ActiveCount() != cfg_.action_dim) {
      throw Error(ErrorKind::kShape, "axis mask does not match the learner's action size");
    }
    if (input.size() != cfg_.input_dim || !input.allFinite()) {
      throw Error(ErrorKind::kInvalidInput, "policy input is malformed or non-finite");
    }
    Action out;
    out.normalized = PolicyBatch(input).col(0);
    if (noise) {
      out.normalized += noise->Sample(rng_);
      out.normalized = out.normalized.cwiseMax(-1.0).cwiseMin(1.0);
    }
    const auto idx = mask.ActiveIndices();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out.residual[idx[k]] = cfg_.max_residual * out.normalized[static_cast<Eigen::Index>(k)];
    }
    return out;
  }

  Eigen::VectorXd Q(const Eigen::VectorXd& input, const Eigen::VectorXd& action, int which = 1) const {
    Eigen::VectorXd x(input.size() + action.size());
    x << input, action;
    return (which == 1 ? critic1_ : critic2_).Forward(x).col(0);
  }

  // Samples a batch of n-step returns and builds TD targets against the
  // target critics and the current actor.
  Batch SampleBatch() {
    const int bsz = cfg_.batch_size;
    Batch batch;
    batch.inputs.resize(cfg_.input_dim, bsz);
    batch.actions.resize(cfg_.action_dim, bsz);
    Eigen::MatrixXd next(cfg_.input_dim, bsz);
    Eigen::VectorXd returns(bsz);
    Eigen::VectorXd discounts(bsz);
    for (int b = 0; b < bsz; ++b) {
      const std::size_t i = rng_.Index(buffer_.size());
      const Transition& first = buffer_.At(i);
      batch.inputs.col(b) = first.input;
      batch.actions.col(b) = first.action;
      double ret = 0.0;
      double disc = 1.0;
      for (int k = 0; k < cfg_.n_step; ++k) {
        const Transition& tr = buffer_.At(i + static_cast<std::size_t>(k));
        ret += disc * tr.reward;
        disc *= cfg_.gamma;
        next.col(b) = tr.next_input;
        if (tr.done) {
          disc = 0.0;
          break;
        }
        if (tr.last || i + static_cast<std::size_t>(k) + 1 >= buffer_.size()) break;
      }
      returns[b] = ret;
      discounts[b] = disc;
    }
    Eigen::MatrixXd xn(cfg_.input_dim + cfg_.action_dim, bsz);
    xn.topRows(cfg_.input_dim) = next;
    xn.bottomRows(cfg_.action_dim) = PolicyBatch(next);
    const Eigen::VectorXd q1 = target1_.Forward(xn).row(0).transpose();
    const Eigen::VectorXd q2 = target2_.Forward(xn).row(0).transpose();
    batch.targets = returns + discounts.cwiseProduct(q1.cwiseMin(q2));
    return batch;
  }

  // Σ_critics mean((Q − y)²); gradients accumulated into g1/g2 when given.
  double CriticLoss(const Batch& batch, MlpParams* g1, MlpParams* g2) const {
    const auto bsz = static_cast<double>(batch.targets.size());
    Eigen::MatrixXd x(batch.inputs.rows() + batch.actions.rows(), batch.inputs.cols());
    x << batch.inputs, batch.actions;
    double loss = 0.0;
    const Mlp* critics[2] = {&critic1_, &critic2_};
    MlpParams* grads[2] = {g1, g2};
    for (int c = 0; c < 2; ++c) {
      Mlp::Cache cache;
      const Eigen::RowVectorXd err = critics[c]->Forward(x, &cache).row(0) - batch.targets.transpose();
      loss += err.squaredNorm() / bsz;
      if (grads[c]) critics[c]->Backward(cache, (2.0 / bsz) * err, grads[c]);
    }
    return loss;
  }

  UpdateSummary Update(int batch_count) {
    UpdateSummary s;
    if (buffer_.size() < static_cast<std::size_t>(cfg_.batch_size)) {
      s.status = fmt::format("skipped: buffer holds {} < batch {}", buffer_.size(), cfg_.batch_size);
      return s;
    }
    for (int n = 0; n < batch_count; ++n) {
      const Batch batch = SampleBatch();
      MlpParams g1 = critic1_.ZeroGrads();
      MlpParams g2 = critic2_.ZeroGrads();
      s.critic_loss = CriticLoss(batch, &g1, &g2);
      critic1_opt_.Step(critic1_.params(), g1);
      critic2_opt_.Step(critic2_.params(), g2);
      s.actor_loss = ActorStep(batch.inputs);
      SoftUpdate(target1_.params(), critic1_.params(), cfg_.tau);
      SoftUpdate(target2_.params(), critic2_.params(), cfg_.tau);
    }
    s.performed = batch_count > 0;
    s.status = "ok";
    ++updates_;
    return s;
  }

  // FNV-1a over every learnable parameter.
  std::uint64_t Checksum() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const Mlp* net : {&actor_, &critic1_, &critic2_, &target1_, &target2_}) {
      const Eigen::VectorXd flat = net->params().Flat();
      const auto* bytes = reinterpret_cast<const unsigned char*>(flat.data());
      for (std::size_t i = 0; i < static_cast<std::size_t>(flat.size()) * sizeof(double); ++i) {
        h = (h ^ bytes[i]) * 1099511628211ull;
      }
    }
    return h;
  }

  void Save(std::ostream& out) const {
    out.write(kMagic, sizeof(kMagic));
    WriteI64(out, cfg_.input_dim);
    WriteI64(out, cfg_.action_dim);
    WriteI64(out, cfg_.hidden);
    WriteI64(out, cfg_.depth);
    for (const Mlp* net : {&actor_, &critic1_, &critic2_, &target1_, &target2_}) WriteVec(out, net->params().Flat());
    for (const Adam* opt : {&actor_opt_, &critic1_opt_, &critic2_opt_}) {
      WriteI64(out, opt->steps());
      WriteVec(out, opt->m().Flat());
      WriteVec(out, opt->v().Flat());
    }
    WriteI64(out, updates_);
    WriteString(out, rng_.State());
  }

  void Load(std::istream& in) {
    char magic[sizeof(kMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
      throw Error(ErrorKind::kParse, "not a learner checkpoint");
    }
    if (ReadI64(in) != cfg_.input_dim || ReadI64(in) != cfg_.action_dim || ReadI64(in) != cfg_.hidden ||
        ReadI64(in) != cfg_.depth) {
      throw Error(ErrorKind::kSchema, "checkpoint architecture does not match learner config");
    }
    for (Mlp* net : {&actor_, &critic1_, &critic2_, &target1_, &target2_}) {
      net->params().SetFlat(ReadVec(in, net->params().Count()));
    }
    for (Adam* opt : {&actor_opt_, &critic1_opt_, &critic2_opt_}) {
      opt->set_steps(ReadI64(in));
      opt->m().SetFlat(ReadVec(in, opt->m().Count()));
      opt->v().SetFlat(ReadVec(in, opt->v().Count()));
    }
    updates_ = ReadI64(in);
    rng_.SetState(ReadString(in));
  }

  // Binary helpers, shared with the trainer's checkpoint sections.
  static void WriteI64(std::ostream& out, std::int64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); }
  static std::int64_t ReadI64(std::istream& in) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw Error(ErrorKind::kParse, "truncated checkpoint");
    return v;
  }
  static void WriteVec(std::ostream& out, const Eigen::VectorXd& v) {
    WriteI64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  static Eigen::VectorXd ReadVec(std::istream& in, Eigen::Index expected = -1) {
    const auto n = ReadI64(in);
    if (n < 0 || (expected >= 0 && n != expected)) throw Error(ErrorKind::kSchema, "checkpoint vector size mismatch");
    Eigen::VectorXd v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw Error(ErrorKind::kParse, "truncated checkpoint");
    return v;
  }
  static void WriteString(std::ostream& out, const std::string& s) {
    WriteI64(out, static_cast<std::int64_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  static std::string ReadString(std::istream& in) {
    const auto n = ReadI64(in);
    if (n < 0 || n > (1 << 24)) throw Error(ErrorKind::kParse, "corrupt checkpoint string");
    std::string s(static_cast<std::size_t>(n), '\0');
    in.read(s.data(), n);
    if (!in) throw Error(ErrorKind::kParse, "truncated checkpoint");
    return s;
  }

 private:
  static constexpr char kMagic[8] = {'O', 'R', 'K', 'L', 'R', 'N', '0', '1'};

  // One ascent step on mean(min(Q1, Q2)(s, π(s))); returns the actor loss.
  double ActorStep(const Eigen::MatrixXd& inputs) {
    const auto bsz = inputs.cols();
    Mlp::Cache actor_cache;
    const Eigen::MatrixXd pre = actor_.Forward(inputs, &actor_cache);
    const Eigen::MatrixXd act = pre.array().tanh().matrix();
    Eigen::MatrixXd x(inputs.rows() + act.rows(), bsz);
    x << inputs, act;
    Mlp::Cache c1;
    Mlp::Cache c2;
    const Eigen::RowVectorXd q1 = critic1_.Forward(x, &c1).row(0);
    const Eigen::RowVectorXd q2 = critic2_.Forward(x, &c2).row(0);
    Eigen::RowVectorXd d1 = Eigen::RowVectorXd::Zero(bsz);
    Eigen::RowVectorXd d2 = Eigen::RowVectorXd::Zero(bsz);
    double loss = 0.0;
    for (Eigen::Index b = 0; b < bsz; ++b) {
      // d(−mean min Q)/dQ for whichever critic is smaller.
      if (q1[b] <= q2[b]) {
        d1[b] = -1.0 / static_cast<double>(bsz);
        loss -= q1[b];
      } else {
        d2[b] = -1.0 / static_cast<double>(bsz);
        loss -= q2[b];
      }
    }
    const Eigen::MatrixXd dx = critic1_.Backward(c1, d1, nullptr) + critic2_.Backward(c2, d2, nullptr);
    const Eigen::MatrixXd dact = dx.bottomRows(act.rows());
    const Eigen::MatrixXd dpre = dact.cwiseProduct((1.0 - act.array().square()).matrix());
    MlpParams g = actor_.ZeroGrads();
    actor_.Backward(actor_cache, dpre, &g);
    actor_opt_.Step(actor_.params(), g);
    return loss / static_cast<double>(bsz);
  }

  LearnerConfig cfg_;
  Rng rng_;
  ReplayBuffer buffer_;
  Mlp actor_;
  Mlp critic1_;
  Mlp critic2_;
  Mlp target1_;
  Mlp target2_;
  Adam actor_opt_;
  Adam critic1_opt_;
  Adam critic2_opt_;
  std::int64_t updates_ = 0;
};

// ---------------------------------------------------------------------------
// Training loop

/// Episodic environment driven by a replayed base trajectory. Rewards are
/// produced per step once the episode is complete (sparse and OT rewards
/// need the whole rollout).
class RolloutEnv {
 public:
  virtual ~RolloutEnv() = default;
  virtual std::size_t Horizon() const = 0;
  virtual PolicyInput Reset() = 0;
  virtual FingertipSet BaseAction(std::size_t t) const = 0;
  virtual PolicyInput Step(const FingertipSet& action) = 0;
  virtual std::vector<double> EpisodeRewards() = 0;
};

struct TrainConfig {
  int updates_per_episode = -1;  // -1: one update per env step
  int eval_every = 10;           // 0 disables periodic evaluation
  double reward_scale = 0.001;   // learner sees reward_scale × raw reward
  InputScaling scaling;
};

struct EpisodeLog {
  int ep = 0;
  double ret = 0.0;  // raw (unscaled) return
  std::size_t steps = 0;
  double sigma = 0.0;
  std::optional<double> eval_return;
};

struct TrainingLog {
  std::vector<EpisodeLog> episodes;
  bool aborted = false;
  std::string error;
  ErrorKind error_kind = ErrorKind::kNumeric;
};

struct EpisodeRecord {
  std::vector<Eigen::VectorXd> inputs;   // encoded, horizon + 1
  std::vector<Eigen::VectorXd> actions;  // normalized, horizon
  std::vector<FingertipSet> executed;
  std::vector<double> rewards;           // raw

  double Return() const {
    double r = 0.0;
    for (double x : rewards) r += x;
    return r;
  }
};

inline EpisodeRecord RunEpisode(RolloutEnv& env, ResidualLearner& learner, OuNoise* noise,
                                const AxisMask& mask, const InputScaling& scaling) {
  EpisodeRecord rec;
  if (noise) noise->ResetState();
  PolicyInput obs = env.Reset();
  for (std::size_t t = 0; t < env.Horizon(); ++t) {
    rec.inputs.push_back(EncodeInput(obs, scaling));
    const auto act = learner.Act(rec.inputs.back(), noise, mask);
    rec.actions.push_back(act.normalized);
    rec.executed.push_back(ComposeAction(env.BaseAction(t), act.residual));
    obs = env.Step(rec.executed.back());
  }
  rec.inputs.push_back(EncodeInput(obs, scaling));
  rec.rewards = env.EpisodeRewards();
  if (rec.rewards.size() != env.Horizon()) {
    throw Error(ErrorKind::kShape, "environment returned the wrong number of rewards");
  }
  return rec;
}

inline void StoreEpisode(ResidualLearner& learner, const EpisodeRecord& rec, double reward_scale) {
  const std::size_t h = rec.actions.size();
  for (std::size_t t = 0; t < h; ++t) {
    Transition tr;
    tr.input = rec.inputs[t];
    tr.action = rec.actions[t];
    tr.reward = reward_scale * rec.rewards[t];
    tr.next_input = rec.inputs[t + 1];
    tr.done = t + 1 == h;
    tr.last = tr.done;
    learner.buffer().Add(std::move(tr));
  }
}

/// Runs `episodes` exploration episodes, storing transitions and updating
/// after each. Environment failures end training with a partial log.
inline TrainingLog Train(RolloutEnv& env, ResidualLearner& learner, OuNoise& noise, const AxisMask& mask,
                         int episodes, const TrainConfig& cfg,
                         const std::function<void(const EpisodeLog&, const EpisodeRecord&)>& on_episode = {}) {
  TrainingLog log;
  for (int ep = 0; ep < episodes; ++ep) {
    EpisodeLog entry;
    entry.ep = ep;
    EpisodeRecord rec;
    try {
      entry.sigma = noise.Sigma();
      rec = RunEpisode(env, learner, &noise, mask, cfg.scaling);
      StoreEpisode(learner, rec, cfg.reward_scale);
      const int updates = cfg.updates_per_episode < 0 ? static_cast<int>(rec.actions.size())
                                                      : cfg.updates_per_episode;
      learner.Update(updates);
      entry.ret = rec.Return();
      entry.steps = rec.actions.size();
      if (cfg.eval_every > 0 && ((ep + 1) % cfg.eval_every == 0 || ep + 1 == episodes)) {
        entry.eval_return = RunEpisode(env, learner, nullptr, mask, cfg.scaling).Return();
      }
    } catch (const Error& e) {
      log.aborted = true;
      log.error = e.what();
      log.error_kind = e.kind();
      return log;
    } catch (const std::exception& e) {
      log.aborted = true;
      log.error = e.what();
      return log;
    }
    log.episodes.push_back(entry);
    if (on_episode) on_episode(entry, rec);
  }
  return log;
}

}  // namespace ork

#endif  // ORK_RESIDUAL_HPP_
