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

#include <limits>
#include <sstream>

#include <gtest/gtest.h>

#include "ork/residual.hpp"
#include "test_util.hpp"

namespace ork {
namespace {

using testing::Gen;
using testing::KindOf;

LearnerConfig Small(int input_dim = 4, int action_dim = 2) {
  LearnerConfig cfg;
  cfg.input_dim = input_dim;
  cfg.action_dim = action_dim;
  cfg.hidden = 8;
  cfg.batch_size = 8;
  cfg.seed = 7;
  return cfg;
}

Transition Make(const Eigen::VectorXd& in, const Eigen::VectorXd& act, double r, bool done) {
  Transition t;
  t.input = in;
  t.action = act;
  t.reward = r;
  t.next_input = in;
  t.done = done;
  t.last = done;
  return t;
}

void FillRandom(ResidualLearner& l, Gen& g, int count) {
  const auto& cfg = l.config();
  for (int i = 0; i < count; ++i) {
    Transition t;
    t.input = Eigen::VectorXd::NullaryExpr(cfg.input_dim, [&] { return g.U(-1, 1); });
    t.action = Eigen::VectorXd::NullaryExpr(cfg.action_dim, [&] { return g.U(-1, 1); });
    t.next_input = Eigen::VectorXd::NullaryExpr(cfg.input_dim, [&] { return g.U(-1, 1); });
    t.reward = g.U(-1, 0);
    t.done = i % 4 == 3;
    t.last = t.done;
    l.buffer().Add(t);
  }
}

// Scalar environment: the thumb x residual should track a fixed target.
class ToyEnv : public RolloutEnv {
 public:
  explicit ToyEnv(int fail_at_episode = -1) : fail_at_(fail_at_episode) {}
  std::size_t Horizon() const override { return 4; }
  PolicyInput Reset() override {
    if (++episode_ == fail_at_) throw Error(ErrorKind::kDegenerateFrame, "toy failure");
    rewards_.clear();
    return {};
  }
  FingertipSet BaseAction(std::size_t) const override { return {}; }
  PolicyInput Step(const FingertipSet& a) override {
    rewards_.push_back(-std::abs(a.tips[0].x() - 0.01));
    PolicyInput in;
    in.a_r = a.Flatten();
    return in;
  }
  std::vector<double> EpisodeRewards() override { return rewards_; }

 private:
  int fail_at_;
  int episode_ = -1;
  std::vector<double> rewards_;
};

TEST(OuNoise, FixedPoint) {
  OuNoise n(3, 0.15, 0.0, 0.0, 0.0, 10);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) n.Sample(rng);
  EXPECT_EQ(n.state(), Eigen::VectorXd::Zero(3));
}

TEST(OuNoise, DeterministicRecursion) {
  OuNoise n(1, 0.5, 0.0, 0.0, 0.0, 1);
  n.state()[0] = 1.0;
  Rng rng(1);
  EXPECT_EQ(n.Sample(rng)[0], 0.5);
  EXPECT_EQ(n.Sample(rng)[0], 0.25);
}

TEST(OuNoise, SigmaSchedule) {
  OuNoise n(1, 0.15, 0.0, 0.2, 0.02, 100);
  EXPECT_DOUBLE_EQ(n.Sigma(), 0.2);
  n.set_step(50);
  EXPECT_NEAR(n.Sigma(), 0.11, 1e-15);
  n.set_step(100);
  EXPECT_DOUBLE_EQ(n.Sigma(), 0.02);
  n.set_step(5000);
  EXPECT_DOUBLE_EQ(n.Sigma(), 0.02);
  EXPECT_EQ(KindOf([] { OuNoise(1, 0.0, 0, 0.2, 0.02, 10); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(KindOf([] { OuNoise(1, 0.15, 0, 0.2, 0.02, 0); }), ErrorKind::kInvalidInput);
}

// AR(1): x' = (1−θ)x + σg has stationary variance σ²/(1 − (1−θ)²).
TEST(OuNoiseProperty, StationaryVariance) {
  const double theta = 0.15, sigma = 0.2;
  const double expected = sigma * sigma / (2 * theta - theta * theta);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    OuNoise n(1, theta, 0.0, sigma, sigma, 1);
    Rng rng(seed);
    for (int i = 0; i < 1000; ++i) n.Sample(rng);
    double s = 0, s2 = 0;
    const int steps = 100000;
    for (int i = 0; i < steps; ++i) {
      const double x = n.Sample(rng)[0];
      s += x;
      s2 += x * x;
    }
    const double var = s2 / steps - (s / steps) * (s / steps);
    EXPECT_NEAR(var / expected, 1.0, 0.1) << "seed " << seed;
  }
}

TEST(AxisMask, Presets) {
  EXPECT_EQ(MaskApply(Vec12::Ones(), AxisMask::All()), Vec12::Ones());
  const Vec12 card = MaskApply(Vec12::Ones(), AxisMask::CardSliding());
  EXPECT_EQ((card.array() != 0.0).count(), 2);
  EXPECT_EQ(card[0], 1.0);
  EXPECT_EQ(card[1], 1.0);
  EXPECT_EQ(AxisMask::PaperSliding().ActiveCount(), 8);
  EXPECT_EQ(AxisMask::BreadPicking().ActiveCount(), 4);
  EXPECT_EQ(AxisMask::MusicBox().ActiveCount(), 6);
  EXPECT_EQ(KindOf([] { AxisMask(std::array<bool, 12>{}); }), ErrorKind::kInvalidInput);
}

TEST(AxisMask, Parse) {
  EXPECT_EQ(AxisMask::Parse("card-sliding"), AxisMask::CardSliding());
  const auto m = AxisMask::Parse("1,0,0,0,0,0,0,0,0,0,0,1");
  EXPECT_EQ(m.ActiveIndices(), (std::vector<int>{0, 11}));
  EXPECT_EQ(AxisMask::Parse(m.ToString()), m);
  EXPECT_EQ(KindOf([] { AxisMask::Parse("1,0"); }), ErrorKind::kConfig);
  EXPECT_EQ(KindOf([] { AxisMask::Parse("0,0,0,0,0,0,0,0,0,0,0,0"); }), ErrorKind::kInvalidInput);
  EXPECT_EQ(KindOf([] { AxisMask::Parse("bogus"); }), ErrorKind::kConfig);
}

TEST(ComposeAction, Examples) {
  Gen g(71);
  const FingertipSet a = g.Tips();
  EXPECT_EQ(ComposeAction(a, Vec12::Zero()), a);
  Vec12 r = Vec12::Zero();
  r[0] = 0.01;
  const FingertipSet b = ComposeAction(a, r);
  EXPECT_EQ(b.tips[0].x(), a.tips[0].x() + 0.01);
  EXPECT_EQ(b.tips[1], a.tips[1]);
  const Vec12 any = Vec12::NullaryExpr([&] { return g.U(-0.02, 0.02); });
  EXPECT_LE((ComposeAction(ComposeAction(a, any), -any).Flatten() - a.Flatten()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(EncodeInput, Layout) {
  PolicyInput in;
  EXPECT_EQ(EncodeInput(in, {}).size(), EncodedInputDim(false));
  in.motion = Eigen::Vector3d(1, 2, 3);
  EXPECT_EQ(EncodeInput(in, {}).size(), EncodedInputDim(true));
  in.ds[4] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(KindOf([&] { EncodeInput(in, {}); }), ErrorKind::kInvalidInput);
}

TEST(ReplayBuffer, RingOverwritesOldest) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.Add(Make(Eigen::VectorXd::Constant(1, i), Eigen::VectorXd::Zero(1), -i, false));
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.At(0).input[0], 2.0);
  EXPECT_EQ(buf.At(2).input[0], 4.0);
  EXPECT_EQ(KindOf([] { ReplayBuffer(0); }), ErrorKind::kInvalidInput);
  auto bad = Make(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1), std::numeric_limits<double>::infinity(), false);
  EXPECT_EQ(KindOf([&] { buf.Add(bad); }), ErrorKind::kInvalidInput);
}

TEST(ReplayBuffer, RoundTripIsBitExact) {
  ResidualLearner l(Small());
  Gen g(72);
  FillRandom(l, g, 5);
  Gen g2(72);
  ResidualLearner copy(Small());
  FillRandom(copy, g2, 5);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(l.buffer().At(i), copy.buffer().At(i));
}

TEST(ResidualLearner, FreshActorGivesZeroResidual) {
  ResidualLearner l(Small(4, 2));
  const auto act = l.Act(Eigen::VectorXd::Ones(4), nullptr, AxisMask::CardSliding());
  EXPECT_EQ(act.residual, Vec12::Zero());
  EXPECT_EQ(KindOf([&] { l.Act(Eigen::VectorXd::Ones(4), nullptr, AxisMask::All()); }), ErrorKind::kShape);
  Eigen::VectorXd nan_in = Eigen::VectorXd::Ones(4);
  nan_in[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_EQ(KindOf([&] { l.Act(nan_in, nullptr, AxisMask::CardSliding()); }), ErrorKind::kInvalidInput);
}

TEST(ResidualLearnerProperty, ResidualBoundedAndMasked) {
  auto cfg = Small(4, 8);
  ResidualLearner l(cfg);
  Gen g(73);
  for (auto& w : l.actor().params().w) w = Eigen::MatrixXd::NullaryExpr(w.rows(), w.cols(), [&] { return g.U(-5, 5); });
  OuNoise noise(8, 0.15, 0.0, 3.0, 3.0, 1);
  const auto mask = AxisMask::PaperSliding();
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd in = Eigen::VectorXd::NullaryExpr(4, [&] { return g.U(-10, 10); });
    const auto act = l.Act(in, i % 2 ? &noise : nullptr, mask);
    EXPECT_LE(act.residual.cwiseAbs().maxCoeff(), cfg.max_residual);
    for (int k = 0; k < 12; ++k) {
      if (!mask.active(static_cast<std::size_t>(k))) {
        EXPECT_EQ(act.residual[k], 0.0);
      }
    }
  }
}

TEST(ResidualLearner, ActIsDeterministicWithoutNoise) {
  ResidualLearner a(Small()), b(Small());
  Gen g(74);
  for (auto* l : {&a, &b}) l->actor().params().w.back().setConstant(0.3);
  const Eigen::VectorXd in = Eigen::VectorXd::NullaryExpr(4, [&] { return g.U(-1, 1); });
  EXPECT_EQ(a.Act(in, nullptr, AxisMask::CardSliding()).residual, b.Act(in, nullptr, AxisMask::CardSliding()).residual);
}

TEST(Update, SkipsWhenBufferIsSmall) {
  ResidualLearner l(Small());
  Gen g(75);
  FillRandom(l, g, 7);
  const auto before = l.Checksum();
  const auto s = l.Update(5);
  EXPECT_FALSE(s.performed);
  EXPECT_NE(s.status.find("skipped"), std::string::npos);
  EXPECT_EQ(l.Checksum(), before);
}

TEST(Update, ZeroCriticLossAtInitOnZeroRewardTerminals) {
  ResidualLearner l(Small());
  for (int i = 0; i < 8; ++i) l.buffer().Add(Make(Eigen::VectorXd::Constant(4, i), Eigen::VectorXd::Zero(2), 0, true));
  EXPECT_EQ(l.CriticLoss(l.SampleBatch(), nullptr, nullptr), 0.0);
  EXPECT_EQ(l.Update(1).critic_loss, 0.0);
}

// Episode of rewards 1,2,3,4 with γ = 0.5 and n = 3; critics are zero so
// each target is the truncated discounted sum from its start index.
TEST(SampleBatch, NStepReturns) {
  auto cfg = Small(1, 1);
  cfg.gamma = 0.5;
  cfg.n_step = 3;
  cfg.batch_size = 16;
  ResidualLearner l(cfg);
  const std::vector<double> r{1, 2, 3, 4};
  for (int i = 0; i < 4; ++i) {
    l.buffer().Add(Make(Eigen::VectorXd::Constant(1, i), Eigen::VectorXd::Zero(1), r[i], i == 3));
  }
  const auto batch = l.SampleBatch();
  for (int b = 0; b < 16; ++b) {
    const int i = static_cast<int>(batch.inputs(0, b));
    double expected = 0, disc = 1;
    for (int k = i; k < std::min(4, i + 3); ++k, disc *= 0.5) expected += disc * r[k];
    EXPECT_DOUBLE_EQ(batch.targets[b], expected) << "start " << i;
  }
}

TEST(CriticGradient, MatchesFiniteDifferences) {
  auto cfg = Small(3, 2);
  ResidualLearner l(cfg);
  Gen g(76);
  for (auto* net : {&l.critic1(), &l.critic2()}) {
    net->params().w.back() = Eigen::MatrixXd::NullaryExpr(1, cfg.hidden, [&] { return g.U(-0.5, 0.5); });
  }
  FillRandom(l, g, 8);
  const auto batch = l.SampleBatch();
  MlpParams g1 = l.critic1().ZeroGrads();
  MlpParams g2 = l.critic2().ZeroGrads();
  l.CriticLoss(batch, &g1, &g2);
  const Eigen::VectorXd analytic = g1.Flat();
  Eigen::VectorXd theta = l.critic1().params().Flat();
  Eigen::VectorXd numeric(theta.size());
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd tp = theta, tm = theta;
    tp[i] += h;
    tm[i] -= h;
    l.critic1().params().SetFlat(tp);
    const double lp = l.CriticLoss(batch, nullptr, nullptr);
    l.critic1().params().SetFlat(tm);
    const double lm = l.CriticLoss(batch, nullptr, nullptr);
    numeric[i] = (lp - lm) / (2 * h);
  }
  l.critic1().params().SetFlat(theta);
  EXPECT_LE((analytic - numeric).norm() / analytic.norm(), 1e-4);
}

TEST(Update, SingletonTdConvergesToReward) {
  auto cfg = Small(2, 1);
  ResidualLearner l(cfg);
  const Eigen::VectorXd in = Eigen::Vector2d(0.5, -0.5);
  const Eigen::VectorXd act = Eigen::VectorXd::Constant(1, 0.1);
  for (int i = 0; i < cfg.batch_size; ++i) l.buffer().Add(Make(in, act, -1.0, true));
  for (int i = 0; i < 500; ++i) l.Update(1);
  EXPECT_NEAR(l.Q(in, act, 1)[0], -1.0, 0.05);
  EXPECT_NEAR(l.Q(in, act, 2)[0], -1.0, 0.05);
}

TEST(Update, DeterministicGivenSeedAndBuffer) {
  ResidualLearner a(Small()), b(Small());
  Gen ga(77), gb(77);
  FillRandom(a, ga, 20);
  FillRandom(b, gb, 20);
  a.Update(3);
  b.Update(3);
  EXPECT_EQ(a.Checksum(), b.Checksum());
}

TEST(Checkpoint, ReloadIsExact) {
  ResidualLearner a(Small());
  Gen g(78);
  FillRandom(a, g, 20);
  a.Update(4);
  std::stringstream ss;
  a.Save(ss);
  auto other = Small();
  other.seed = 99;
  ResidualLearner b(other);
  b.Load(ss);
  EXPECT_EQ(a.Checksum(), b.Checksum());
  for (std::size_t i = 0; i < a.buffer().size(); ++i) b.buffer().Add(a.buffer().At(i));
  a.Update(2);
  b.Update(2);
  EXPECT_EQ(a.Checksum(), b.Checksum());

  std::stringstream junk("not a checkpoint");
  EXPECT_EQ(KindOf([&] { b.Load(junk); }), ErrorKind::kParse);
  std::stringstream wrong;
  ResidualLearner(Small(5, 2)).Save(wrong);
  EXPECT_EQ(KindOf([&] { b.Load(wrong); }), ErrorKind::kSchema);
}

TEST(Train, ZeroEpisodes) {
  ResidualLearner l(Small(EncodedInputDim(false), 2));
  const auto before = l.Checksum();
  ToyEnv env;
  OuNoise noise(2, 0.15, 0, 0.2, 0.02, 100);
  const auto log = Train(env, l, noise, AxisMask::CardSliding(), 0, {});
  EXPECT_TRUE(log.episodes.empty());
  EXPECT_FALSE(log.aborted);
  EXPECT_EQ(l.Checksum(), before);
}

TrainingLog RunToy(int episodes, int fail_at = -1) {
  auto cfg = Small(EncodedInputDim(false), 2);
  cfg.batch_size = 16;
  ResidualLearner l(cfg);
  ToyEnv env(fail_at);
  OuNoise noise(2, 0.15, 0, 0.2, 0.02, 100);
  TrainConfig tc;
  tc.eval_every = 2;
  tc.reward_scale = 1.0;
  return Train(env, l, noise, AxisMask::CardSliding(), episodes, tc);
}

TEST(Train, DeterministicLog) {
  const auto a = RunToy(6);
  const auto b = RunToy(6);
  ASSERT_EQ(a.episodes.size(), 6u);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(a.episodes[i].ret, b.episodes[i].ret);
    EXPECT_EQ(a.episodes[i].eval_return, b.episodes[i].eval_return);
    EXPECT_EQ(a.episodes[i].steps, 4u);
  }
  EXPECT_FALSE(a.episodes[0].eval_return.has_value());
  EXPECT_TRUE(a.episodes[1].eval_return.has_value());
  // Zero-initialized actor: the first evaluation is pure replay.
  EXPECT_DOUBLE_EQ(*a.episodes[1].eval_return, -0.04);
}

TEST(Train, EnvFailureKeepsPartialLog) {
  // Reset also runs for the evaluation after episode 1, so call 4 is episode 2.
  const auto log = RunToy(6, 4);
  EXPECT_TRUE(log.aborted);
  EXPECT_EQ(log.error_kind, ErrorKind::kDegenerateFrame);
  EXPECT_EQ(log.episodes.size(), 3u);
}

}  // namespace
}  // namespace ork
