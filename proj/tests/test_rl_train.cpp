// Copyright 2026 The gbdrl Authors
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

#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "gbdrl/rl_train.hpp"
#include "test_support.hpp"

namespace gbdrl {
namespace {

using testing::bits;

TEST(Reward, InfeasibleCostsAlphaBeta) {
  RewardConfig cfg;
  cfg.alpha1 = 2;
  cfg.beta1 = 3;
  const Bounds b{10, 0};
  const RewardBreakdown r = compute_reward(false, b, {5, 0}, b, 0, cfg);
  EXPECT_DOUBLE_EQ(r.total, -6);
  EXPECT_DOUBLE_EQ(r.r_gap, 0);
}

TEST(Reward, TimeIsClippedAtTau) {
  RewardConfig cfg;
  const Bounds b{10, 0};
  EXPECT_DOUBLE_EQ(compute_reward(true, b, b, b, 5.0, cfg).r_time, 1.0);
  EXPECT_DOUBLE_EQ(compute_reward(true, b, b, b, 0.25, cfg).r_time, 0.25);
  EXPECT_DOUBLE_EQ(compute_reward(true, b, b, b, 5.0, cfg).total, 0.5 - 0.1);
}

TEST(Reward, GapHalvingPaysHalf) {
  RewardConfig cfg;
  const RewardBreakdown r = compute_reward(true, {10, 0}, {7, 2}, {10, 0}, 0, cfg);
  EXPECT_DOUBLE_EQ(r.r_gap, 0.5);
  EXPECT_DOUBLE_EQ(r.total, 1.0);
  EXPECT_DOUBLE_EQ(compute_reward(true, {1, 1}, {1, 1}, {1, 1}, 0, cfg).r_gap, 0);
}

TEST(Reward, DecompositionHoldsOnRandomInputs) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int k = 0; k < 200; ++k) {
    RewardConfig cfg;
    cfg.alpha1 = u(rng);
    cfg.alpha2 = u(rng);
    cfg.alpha3 = u(rng);
    cfg.beta1 = u(rng);
    cfg.beta2 = u(rng);
    const Bounds init{u(rng) + 5, -u(rng)}, prev{u(rng) + 3, -u(rng)}, cur{u(rng) + 2, u(rng) - 1};
    const bool feas = k % 3 != 0;
    const RewardBreakdown r = compute_reward(feas, prev, cur, init, u(rng), cfg);
    EXPECT_NEAR(r.total, cfg.alpha1 * r.r_feas + cfg.alpha2 * r.r_gap - cfg.alpha3 * r.r_time, 1e-12);
    EXPECT_GE(r.r_gap, 0);
    EXPECT_LE(r.r_time, cfg.tau);
  }
}

TEST(Reward, ConfigValidation) {
  RewardConfig cfg;
  cfg.gamma_discount = 1.0;
  EXPECT_THROW(cfg.check(), ValidationError);
  cfg = {};
  cfg.alpha2 = -1;
  EXPECT_THROW(GbdEnv(cfg, {}), ValidationError);
}

TEST(Env, CutOffActionFallsBackToSolver) {
  CaseStudyOptions opt;
  opt.x9_demand = 0.5;
  const ProblemInstance inst = testing::nominal(opt);
  GbdEnv env({}, {});
  const BipartiteGraph g0 = env.reset(inst, bits("01000"));
  EXPECT_EQ(g0.con_kind[0], ConstraintNodeKind::kFeasibilityCut);
  EXPECT_DOUBLE_EQ(env.bounds().ubd, 1e6);
  EXPECT_DOUBLE_EQ(env.bounds().lbd, -1e6);
  const StepResult s = env.step(bits("01000"));
  EXPECT_FALSE(s.accepted);
  EXPECT_DOUBLE_EQ(s.reward.r_feas, -1.0);
  EXPECT_EQ(env.iterations(), 1);
  const StepResult t = env.step(bits("11000"));
  EXPECT_FALSE(t.accepted);
  EXPECT_LE(env.bounds().lbd, env.bounds().ubd + 1e-4);
  EXPECT_THROW(env.step({0, 1, 2, 0, 0}), ContractViolation);
}

TEST(Env, ExactMasterActionsReachTheClassicalOptimum) {
  const ProblemInstance inst = testing::nominal();
  const GbdResult ref = solve_classical(inst, bits("01000"));
  GbdEnv env({}, {});
  env.reset(inst, bits("01000"));
  std::vector<BinaryVector> ys;
  while (!env.done()) {
    const MasterResult mr = solve_exact(env.master());
    ys.push_back(mr.y);
    const StepResult s = env.step(mr.y);
    EXPECT_TRUE(s.accepted);
    EXPECT_DOUBLE_EQ(s.reward.r_feas, 0.5);
    EXPECT_NEAR(env.bounds().lbd, mr.mu_b, 1e-12);
    EXPECT_EQ(s.done, env.bounds().gap() <= 1e-4 || env.iterations() >= 50);
  }
  EXPECT_LE(env.bounds().gap(), 1e-4);
  EXPECT_NEAR(env.incumbent(), ref.objective, 1e-9);
  EXPECT_EQ(env.incumbent_y(), ref.y);
  // Same iterates as the classical run.
  for (std::size_t k = 0; k < ys.size() && k + 1 < ref.trace.rows.size(); ++k) EXPECT_EQ(ys[k], ref.trace.rows[k + 1].y);
  EXPECT_THROW(env.step(ys.back()), ContractViolation);
}

TEST(Env, IterationCapEndsEpisode) {
  EnvConfig ecfg;
  ecfg.max_iterations = 1;
  GbdEnv env({}, ecfg);
  const ProblemInstance inst = testing::nominal();
  env.reset(inst, bits("01000"));
  const StepResult s = env.step(bits("10000"));
  EXPECT_TRUE(s.done);
  EXPECT_GT(env.bounds().gap(), 1e-4);
}

TEST(Gae, HandComputedTwoSteps) {
  std::vector<Experience> ep(2);
  ep[0].reward = 1;
  ep[0].value = 0.5;
  ep[0].next_value = 0.5;
  ep[1].reward = 2;
  ep[1].value = 0.5;
  ep[1].done = true;
  compute_gae(ep, 0.9, 0.8);
  EXPECT_NEAR(ep[1].advantage, 1.5, 1e-12);
  EXPECT_NEAR(ep[0].advantage, 0.95 + 0.72 * 1.5, 1e-12);
  EXPECT_NEAR(ep[0].ret, ep[0].advantage + 0.5, 1e-12);
  // A truncated final step bootstraps from next_value.
  ep[1].done = false;
  ep[1].next_value = 1;
  compute_gae(ep, 0.9, 0.8);
  EXPECT_NEAR(ep[1].advantage, 2 + 0.9 - 0.5, 1e-12);
}

PpoLearner learner(int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return {make_network(Architecture::actor(m), rng), make_network(Architecture::critic(m), rng), {}, {}};
}

TEST(Ppo, ZeroAdvantagesLeaveActor) {
  std::mt19937_64 rng(3);
  PpoLearner lr = learner(5, 3);
  const Vector actor0 = lr.actor.theta(), critic0 = lr.critic.theta();
  std::vector<Experience> batch(4);
  for (auto& x : batch) {
    x.graph = testing::random_graph(rng, 5, 3);
    x.action = sample_action(actor_forward(lr.actor, x.graph), rng);
    x.log_prob_old = log_prob(actor_forward(lr.actor, x.graph), x.action);
    x.advantage = 0.7;
    x.ret = 1.0;
  }
  const PpoDiagnostics d = ppo_update(batch, lr, {}, {}, rng);
  EXPECT_FALSE(d.rolled_back);
  EXPECT_EQ(lr.actor.theta(), actor0);
  EXPECT_NE(lr.critic.theta(), critic0);
}

TEST(Ppo, PositiveAdvantageRaisesActionProbability) {
  std::mt19937_64 rng(4);
  PpoLearner lr = learner(5, 4);
  Experience x;
  x.graph = testing::random_graph(rng, 5, 3);
  const Vector p0 = actor_forward(lr.actor, x.graph);
  x.action = sample_action(p0, rng);
  x.log_prob_old = log_prob(p0, x.action);
  x.advantage = 1.0;
  ppo_update({x}, lr, {}, {}, rng);
  EXPECT_GT(log_prob(actor_forward(lr.actor, x.graph), x.action), x.log_prob_old);
  EXPECT_THROW(ppo_update({}, lr, {}, {}, rng), ContractViolation);
}

TEST(Ppo, TwoArmedBanditLearnsTheBetterArm) {
  PpoConfig pcfg;
  pcfg.actor_adam.lr = 3e-2;
  pcfg.critic_adam.lr = 3e-2;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const TwoArmedResult r = train_two_armed(200, seed, {}, pcfg);
    ASSERT_EQ(r.rewards.size(), 200U);
    const double mean = std::accumulate(r.rewards.begin(), r.rewards.end(), 0.0) / 200;
    EXPECT_GE(mean, 0.9) << seed;
    EXPECT_GT(r.final_p, 0.9) << seed;
  }
}

RlConfig short_config() {
  RlConfig cfg;
  cfg.env.deterministic_time = true;
  return cfg;
}

TEST(Training, ZeroEpisodesLeaveWeights) {
  PpoLearner lr = learner(5, 5);
  const Vector a = lr.actor.theta(), c = lr.critic.theta();
  EXPECT_TRUE(train_rl(case_study_sampler(), lr, 0, short_config(), 1).empty());
  EXPECT_EQ(lr.actor.theta(), a);
  EXPECT_EQ(lr.critic.theta(), c);
  EXPECT_THROW(train_rl(case_study_sampler(), lr, -1, short_config(), 1), ValidationError);
}

TEST(Training, BufferLengthMatchesIterations) {
  PpoLearner lr = learner(5, 6);
  const RlConfig cfg = short_config();
  GbdEnv env(cfg.reward, cfg.env);
  std::mt19937_64 rng(6);
  const ProblemInstance inst = testing::nominal();
  EpisodeLog log;
  const std::vector<Experience> ep = rollout(env, inst, lr, cfg, rng, log);
  EXPECT_EQ(static_cast<int>(ep.size()), env.iterations());
  EXPECT_EQ(log.iterations, env.iterations());
  for (std::size_t k = 0; k + 1 < ep.size(); ++k) EXPECT_FALSE(ep[k].done);
  double total = 0;
  for (const auto& x : ep) total += x.reward;
  EXPECT_NEAR(total, log.reward, 1e-9);
}

TEST(Training, ShortRunIsDeterministicAndKeepsBoundsValid) {
  PpoLearner a = learner(5, 7), b = learner(5, 7);
  const RlConfig cfg = short_config();
  std::vector<EpisodeLog> la, lb;
  EXPECT_NO_THROW(la = train_rl(case_study_sampler(), a, 6, cfg, 99));
  EXPECT_NO_THROW(lb = train_rl(case_study_sampler(), b, 6, cfg, 99));
  ASSERT_EQ(la.size(), 6U);
  EXPECT_EQ(a.actor.theta(), b.actor.theta());
  EXPECT_EQ(a.critic.theta(), b.critic.theta());
  for (std::size_t k = 0; k < la.size(); ++k) {
    EXPECT_EQ(la[k].reward, lb[k].reward);
    EXPECT_TRUE(std::isfinite(la[k].reward));
    EXPECT_GE(la[k].iterations, 1);
    EXPECT_LE(la[k].iterations, 50);
  }
}

}  // namespace
}  // namespace gbdrl
