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

// GBD as an episodic environment, and PPO fine-tuning of the actor.
//
// One episode is one GBD run on one instance. Each step the agent proposes
// a full assignment; the master cuts decide whether it is used or replaced
// by the exact master solution.

#ifndef GBDRL_RL_TRAIN_HPP_
#define GBDRL_RL_TRAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "gbdrl/core.hpp"
#include "gbdrl/gbd_engine.hpp"
#include "gbdrl/graph_encode.hpp"
#include "gbdrl/master.hpp"
#include "gbdrl/neuralnet.hpp"
#include "gbdrl/problem.hpp"

namespace gbdrl {

struct RewardConfig {
  double alpha1 = 1.0;
  double alpha2 = 1.0;
  double alpha3 = 0.1;
  double beta1 = 1.0;
  double beta2 = 0.5;
  double tau = 1.0;  // seconds
  double gamma_discount = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;

  void check() const {
    validate(alpha1 >= 0 && alpha2 >= 0 && alpha3 >= 0, "reward weights alpha must be >= 0");
    validate(beta1 >= 0 && beta2 >= 0, "reward weights beta must be >= 0");
    validate(tau >= 0, "tau must be >= 0");
    validate(gamma_discount >= 0 && gamma_discount < 1, "gamma_discount must lie in [0,1)");
    validate(gae_lambda >= 0 && gae_lambda <= 1, "gae_lambda must lie in [0,1]");
    validate(clip_eps > 0, "clip_eps must be > 0");
  }
};

struct Bounds {
  double ubd = 0;
  double lbd = 0;
  double gap() const { return ubd - lbd; }
};

struct RewardBreakdown {
  double r_feas = 0;
  double r_gap = 0;
  double r_time = 0;  // min(t_SP, tau), before weighting
  double total = 0;
};

inline RewardBreakdown compute_reward(bool feasible, const Bounds& prev, const Bounds& cur, const Bounds& init,
                                      double t_sp, const RewardConfig& cfg) {
  RewardBreakdown r;
  r.r_feas = feasible ? cfg.beta2 : -cfg.beta1;
  const double g0 = init.gap();
  if (feasible && g0 != 0 && std::isfinite(g0)) r.r_gap = std::abs((prev.gap() - cur.gap()) / g0);
  r.r_time = std::min(std::max(t_sp, 0.0), cfg.tau);
  r.total = cfg.alpha1 * r.r_feas + cfg.alpha2 * r.r_gap - cfg.alpha3 * r.r_time;
  return r;
}

struct Experience {
  BipartiteGraph graph;
  BinaryVector action;
  double log_prob_old = 0;
  double reward = 0;
  BipartiteGraph next_graph;
  double value = 0;
  double next_value = 0;
  double advantage = 0;
  double ret = 0;
  bool done = false;
};

struct StepResult {
  BipartiteGraph graph;
  RewardBreakdown reward;
  bool done = false;
  /// The proposed action was used as the next assignment.
  bool accepted = false;
  /// Master became infeasible; the episode was cut short.
  bool aborted = false;
};

struct EnvConfig {
  GbdLimits limits;
  int max_iterations = 50;
  /// Initial bounds before the first subproblem.
  double lbd_init = kDefaultMuLo;
  double ubd_init = 1e6;
  bool deterministic_time = false;
  double seconds_per_newton = 2e-5;
};

/// GBD wrapped as an environment. Bounds start at (lbd_init, ubd_init).
/// LBD is the master value at the assignment chosen this step, so it may
/// move down; an accepted action must have a cut estimate within UBD.
class GbdEnv {
 public:
  GbdEnv(RewardConfig rcfg, EnvConfig ecfg) : rcfg_(rcfg), ecfg_(std::move(ecfg)) {
    rcfg_.check();
    validate(ecfg_.max_iterations >= 1, "episode iteration cap must be >= 1");
    validate(ecfg_.lbd_init < ecfg_.ubd_init, "initial bounds must satisfy lbd < ubd");
  }

  /// Starts an episode at y0: solves the first subproblem and returns G_0.
  BipartiteGraph reset(const ProblemInstance& inst, const BinaryVector& y0) {
    inst_ = &inst;
    state_.emplace(inst, y0, ecfg_.limits.mu_lo);
    init_ = {ecfg_.ubd_init, ecfg_.lbd_init};
    cur_ = init_;
    ubd_x_ = ExtendedReal::plus_infinity();
    res_ = GbdResult{};
    iter_ = 0;
    done_ = false;
    solve_at(y0);
    return encode_normalized(*state_);
  }

  StepResult step(const BinaryVector& a) {
    require(inst_ && state_, "env_step before reset");
    require(!done_, "env_step on a finished episode");
    require_binary(a, static_cast<std::size_t>(state_->m()));
    ++iter_;
    const Bounds prev = cur_;
    StepResult out;
    bool feasible = check_feasible(*state_, a);
    ExtendedReal mu_hat = ExtendedReal::minus_infinity();
    if (feasible) {
      mu_hat = eval_candidate_cost(*state_, a);
      // Candidates whose cut estimate exceeds the incumbent are handled like infeasible ones.
      if (mu_hat.is_finite() && mu_hat.value() > cur_.ubd) feasible = false;
    }
    BinaryVector y;
    if (feasible) {
      cur_.lbd = mu_hat.is_finite() ? mu_hat.value() : ecfg_.limits.mu_lo;
      y = a;
    } else {
      const MasterResult mr = solve_exact(*state_, ecfg_.limits.master_method);
      if (!mr.feasible) {
        out.reward = compute_reward(false, prev, prev, init_, 0, rcfg_);
        out.done = out.aborted = done_ = true;
        out.graph = encode_normalized(*state_);
        return out;
      }
      cur_.lbd = mr.mu_b;
      y = mr.y;
    }
    const double t_sp = solve_at(y);
    if (cur_.lbd > cur_.ubd + ecfg_.limits.eps)
      throw ContractViolation("training bounds crossed: LBD " + std::to_string(cur_.lbd) + " > UBD " +
                              std::to_string(cur_.ubd));
    out.accepted = feasible;
    out.reward = compute_reward(feasible, prev, cur_, init_, t_sp, rcfg_);
    out.graph = encode_normalized(*state_);
    out.done = done_ = cur_.gap() <= ecfg_.limits.eps || iter_ >= ecfg_.max_iterations;
    return out;
  }

  const Bounds& bounds() const { return cur_; }
  const Bounds& initial_bounds() const { return init_; }
  int iterations() const { return iter_; }
  bool done() const { return done_; }
  const MasterState& master() const { return *state_; }
  /// Best objective found so far (infinite if none).
  double incumbent() const { return res_.objective; }
  const BinaryVector& incumbent_y() const { return res_.y; }

 private:
  double solve_at(const BinaryVector& y) {
    TraceRow row;
    if (!detail::subproblem_and_cut(*inst_, y, *state_, ecfg_.limits, row, res_, ubd_x_))
      throw NumericalError("subproblem failed at y = " + to_string(y));
    if (ubd_x_.is_finite()) cur_.ubd = std::min(cur_.ubd, ubd_x_.value());
    state_->set_y_prev(y);
    return ecfg_.deterministic_time ? row.sp_newton * ecfg_.seconds_per_newton : row.sp_time;
  }

  RewardConfig rcfg_;
  EnvConfig ecfg_;
  const ProblemInstance* inst_ = nullptr;
  std::optional<MasterState> state_;
  Bounds init_, cur_;
  ExtendedReal ubd_x_ = ExtendedReal::plus_infinity();
  GbdResult res_;
  int iter_ = 0;
  bool done_ = false;
};

/// Fills advantage and ret by generalized advantage estimation. Steps cut
/// off without done bootstrap from next_value.
inline void compute_gae(std::vector<Experience>& ep, double gamma, double lambda) {
  double next_adv = 0;
  for (std::size_t k = ep.size(); k-- > 0;) {
    Experience& e = ep[k];
    const double nonterminal = e.done ? 0.0 : 1.0;
    const bool last = k + 1 == ep.size();
    const double delta = e.reward + gamma * nonterminal * e.next_value - e.value;
    e.advantage = delta + (last ? 0.0 : gamma * lambda * nonterminal * next_adv);
    e.ret = e.advantage + e.value;
    next_adv = e.advantage;
  }
}

struct PpoConfig {
  int epochs = 4;
  int minibatch = 64;
  AdamConfig actor_adam;
  AdamConfig critic_adam;
};

struct PpoDiagnostics {
  double surrogate = 0;
  double value_loss = 0;
  double approx_kl = 0;
  bool rolled_back = false;
};

struct PpoLearner {
  NetParams actor;
  NetParams critic;
  AdamState actor_state;
  AdamState critic_state;
};

inline PpoDiagnostics ppo_update(const std::vector<Experience>& batch, PpoLearner& lr, const RewardConfig& rcfg,
                                 const PpoConfig& pcfg, std::mt19937_64& rng) {
  require(!batch.empty(), "ppo_update needs a nonempty batch");
  validate(pcfg.epochs >= 1 && pcfg.minibatch >= 1, "PPO epochs and minibatch must be >= 1");
  const PpoLearner backup = lr;
  std::vector<double> adv(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) adv[i] = batch[i].advantage;
  if (adv.size() > 1) {
    const double mean = std::accumulate(adv.begin(), adv.end(), 0.0) / static_cast<double>(adv.size());
    double var = 0;
    for (double a : adv) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(adv.size()));
    for (double& a : adv) a = sd > 1e-12 ? (a - mean) / sd : a - mean;
  }

  PpoDiagnostics d;
  long long samples = 0;
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  for (int ep = 0; ep < pcfg.epochs; ++ep) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(pcfg.minibatch)) {
      const std::size_t e = std::min(order.size(), s + static_cast<std::size_t>(pcfg.minibatch));
      const double nb = static_cast<double>(e - s);
      Vector ga = Vector::Zero(lr.actor.size());
      Vector gc = Vector::Zero(lr.critic.size());
      for (std::size_t k = s; k < e; ++k) {
        const std::size_t i = order[k];
        const Experience& x = batch[i];
        GradientTape ta;
        const Vector p = actor_forward(lr.actor, x.graph, &ta);
        const double lp = log_prob(p, x.action);
        const double ratio = std::exp(lp - x.log_prob_old);
        const double clipped = std::clamp(ratio, 1 - rcfg.clip_eps, 1 + rcfg.clip_eps);
        const double surr = std::min(ratio * adv[i], clipped * adv[i]);
        d.surrogate += surr;
        d.approx_kl += x.log_prob_old - lp;
        // The unclipped term carries the gradient only when it is the minimum.
        const double coef = ratio * adv[i] <= clipped * adv[i] ? ratio * adv[i] : 0.0;
        if (coef != 0) ga += backward(lr.actor, ta, -coef / nb * log_prob_logit_gradient(p, x.action));

        GradientTape tc;
        const double v = critic_forward(lr.critic, x.graph, &tc);
        d.value_loss += (v - x.ret) * (v - x.ret);
        gc += backward(lr.critic, tc, Vector::Constant(1, 2 * (v - x.ret) / nb));
        ++samples;
      }
      if (!ga.allFinite() || !gc.allFinite() || !std::isfinite(d.surrogate) || !std::isfinite(d.value_loss)) {
        lr = backup;
        d.rolled_back = true;
        return d;
      }
      adam_step(lr.actor.theta(), ga, lr.actor_state, pcfg.actor_adam);
      adam_step(lr.critic.theta(), gc, lr.critic_state, pcfg.critic_adam);
    }
  }
  if (!lr.actor.theta().allFinite() || !lr.critic.theta().allFinite()) {
    lr = backup;
    d.rolled_back = true;
    return d;
  }
  d.surrogate /= static_cast<double>(samples);
  d.value_loss /= static_cast<double>(samples);
  d.approx_kl /= static_cast<double>(samples);
  return d;
}

struct EpisodeLog {
  int episode = 0;
  double reward = 0;
  double r_feas = 0;
  double r_gap = 0;
  double r_time = 0;
  int iterations = 0;
  int accepted = 0;
  bool converged = false;
  bool aborted = false;
  PpoDiagnostics ppo;
};

struct RlConfig {
  RewardConfig reward;
  EnvConfig env;
  PpoConfig ppo;
};

using InstanceSampler = std::function<ProblemInstance(std::mt19937_64&)>;
using EpisodeCallback = std::function<void(const EpisodeLog&, const PpoLearner&)>;

/// Case Study 1 with freshly sampled coefficients.
inline InstanceSampler case_study_sampler(CaseStudyOptions opt = {}) {
  return [opt](std::mt19937_64& rng) { return build_case_study1(sample_coefficients(rng), opt); };
}

/// Runs one episode with the current actor; fills values and advantages.
inline std::vector<Experience> rollout(GbdEnv& env, const ProblemInstance& inst, const PpoLearner& lr,
                                       const RlConfig& cfg, std::mt19937_64& rng, EpisodeLog& log) {
  std::vector<Experience> ep;
  BipartiteGraph g = env.reset(inst, default_initial_assignment(inst));
  double v = critic_forward(lr.critic, g);
  while (!env.done()) {
    Experience x;
    const Vector p = actor_forward(lr.actor, g);
    x.action = sample_action(p, rng);
    x.log_prob_old = log_prob(p, x.action);
    x.value = v;
    StepResult sr = env.step(x.action);
    x.reward = sr.reward.total;
    // Hitting the iteration cap truncates; it is not terminal for the value target.
    x.done = sr.aborted || env.bounds().gap() <= cfg.env.limits.eps;
    x.graph = std::move(g);
    v = critic_forward(lr.critic, sr.graph);
    x.next_value = x.done ? 0.0 : v;
    x.next_graph = sr.graph;
    log.reward += sr.reward.total;
    log.r_feas += sr.reward.r_feas;
    log.r_gap += sr.reward.r_gap;
    log.r_time += sr.reward.r_time;
    log.accepted += sr.accepted;
    log.aborted = log.aborted || sr.aborted;
    log.converged = x.done && !sr.aborted;
    g = std::move(sr.graph);
    ep.push_back(std::move(x));
  }
  log.iterations = static_cast<int>(ep.size());
  compute_gae(ep, cfg.reward.gamma_discount, cfg.reward.gae_lambda);
  return ep;
}

/// PPO fine-tuning, one update per episode. Deterministic given seed when
/// cfg.env.deterministic_time is set.
inline std::vector<EpisodeLog> train_rl(const InstanceSampler& sampler, PpoLearner& lr, int n_episodes,
                                        const RlConfig& cfg, std::uint64_t seed,
                                        const EpisodeCallback& callback = {}) {
  validate(n_episodes >= 0, "n_episodes must be >= 0");
  require(lr.actor.arch().head == HeadKind::kActor && lr.critic.arch().head == HeadKind::kCritic,
          "train_rl needs an actor and a critic");
  std::mt19937_64 inst_rng(seed);
  std::mt19937_64 act_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  GbdEnv env(cfg.reward, cfg.env);
  std::vector<EpisodeLog> logs;
  for (int k = 0; k < n_episodes; ++k) {
    const ProblemInstance inst = sampler(inst_rng);
    require(inst.m() == lr.actor.arch().m, "sampled instance m differs from the actor's m");
    EpisodeLog log;
    log.episode = k;
    const std::vector<Experience> ep = rollout(env, inst, lr, cfg, act_rng, log);
    if (!ep.empty()) log.ppo = ppo_update(ep, lr, cfg.reward, cfg.ppo, act_rng);
    logs.push_back(log);
    if (callback) callback(log, lr);
  }
  return logs;
}

/// Single-step bandit with two actions; action 1 pays 1, action 0 pays 0.
struct TwoArmedResult {
  std::vector<double> rewards;
  double final_p = 0;
};

inline BipartiteGraph two_armed_graph() {
  BipartiteGraph g;
  g.n_var = 1;
  g.node_features = Vector::Constant(1, 1.0);
  return g;
}

inline TwoArmedResult train_two_armed(int n_episodes, std::uint64_t seed, RewardConfig rcfg = {},
                                      PpoConfig pcfg = {}) {
  std::mt19937_64 rng(seed);
  PpoLearner lr{make_network(Architecture::actor(1), rng), make_network(Architecture::critic(1), rng), {}, {}};
  const BipartiteGraph g = two_armed_graph();
  TwoArmedResult out;
  for (int k = 0; k < n_episodes; ++k) {
    Experience x;
    const Vector p = actor_forward(lr.actor, g);
    x.action = sample_action(p, rng);
    x.log_prob_old = log_prob(p, x.action);
    x.reward = x.action[0] ? 1.0 : 0.0;
    x.value = critic_forward(lr.critic, g);
    x.graph = x.next_graph = g;
    x.done = true;
    std::vector<Experience> ep{x};
    compute_gae(ep, rcfg.gamma_discount, rcfg.gae_lambda);
    ppo_update(ep, lr, rcfg, pcfg, rng);
    out.rewards.push_back(x.reward);
  }
  out.final_p = actor_forward(lr.actor, g)[0];
  return out;
}

}  // namespace gbdrl

#endif  // GBDRL_RL_TRAIN_HPP_
