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

// Acceptance run. Prints one PASS/FAIL line per criterion.
//
//   gbdrl_acceptance [--report FILE] [--expected-fail N]...
//
// Exit status: 0 when every criterion passes or is listed with
// --expected-fail, 1 when any other criterion fails, 2 on an error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gbdrl/brute_force.hpp"
#include "gbdrl/gbdrl.hpp"
#include "test_support.hpp"

namespace gbdrl {
namespace {

// Pinned tolerances and budgets.
constexpr int kTestInstances = 50;
constexpr std::uint64_t kTestSeed = 999;
constexpr double kOracleRelTol = 1e-4;
constexpr double kOracleSeconds = 300;
constexpr double kParityRelGap = 1e-6;
constexpr double kExactSolveRatio = 0.60;
constexpr double kIlAcceptance = 0.60;
constexpr int kCuts = 200;
constexpr double kCutTightTol = 1e-5;
constexpr double kCutSlackTol = 1e-6;
constexpr int kFdGraphs = 20;
constexpr double kFdRelTol = 1e-4;
constexpr double kFdStep = 1e-5;
constexpr int kFuzzTriples = 10000;
constexpr int kIlInstances = 300;
constexpr std::uint64_t kIlSeed = 1;
constexpr int kIlPairs = 1000;
constexpr int kIlEpochs = 50;
constexpr int kRlEpisodes = 1000;
constexpr int kRlWindow = 100;

using Clock = std::chrono::steady_clock;

std::ostringstream report;

bool record(int id, bool pass, const std::string& what, const std::string& detail) {
  std::ostringstream line;
  line << "CRITERION " << id << " " << (pass ? "PASS" : "FAIL") << "  " << what << "  [" << detail << "]";
  std::cout << line.str() << std::endl;
  report << line.str() << "\n";
  return pass;
}

void note(const std::string& s) {
  std::cout << "  " << s << std::endl;
  report << "  " << s << "\n";
}

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double seconds(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::vector<ProblemInstance> test_set() {
  std::mt19937_64 rng(kTestSeed);
  std::vector<ProblemInstance> out;
  for (int i = 0; i < kTestInstances; ++i) out.push_back(build_case_study1(sample_coefficients(rng)));
  return out;
}

std::vector<GbdTrace> run_hybrid(const std::vector<ProblemInstance>& set, const NetParams& actor) {
  std::vector<GbdTrace> out;
  for (const auto& inst : set) out.push_back(solve_hybrid(inst, default_initial_assignment(inst), actor).trace);
  return out;
}

double window_mean(const std::vector<EpisodeLog>& logs, std::size_t begin) {
  double s = 0;
  for (std::size_t k = begin; k < begin + kRlWindow; ++k) s += logs[k].reward;
  return s / kRlWindow;
}

Vector jitter(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

// Sign pattern of every ReLU input.
std::vector<bool> relu_pattern(const GradientTape& tape) {
  std::vector<bool> out;
  for (const auto& c : tape.ecc)
    for (Eigen::Index i = 0; i < c.pre.size(); ++i) out.push_back(c.pre.data()[i] > 0);
  for (const auto& z : tape.dense_pre)
    for (Eigen::Index i = 0; i < z.size(); ++i) out.push_back(z[i] > 0);
  return out;
}

struct FdResult {
  double worst = 0;
  int shrunk = 0;
};

// Central differences; a step that changes the ReLU pattern straddles a
// kink and is retried at a tenth of the size, at most three times.
FdResult fd_error(NetParams net, const BipartiteGraph& g, const Vector& upstream, std::mt19937_64& rng) {
  net.theta() += jitter(rng, net.size());
  GradientTape tape;
  forward_logits(net, g, &tape);
  const std::vector<bool> base = relu_pattern(tape);
  const Vector grad = backward(net, tape, upstream);
  FdResult r;
  for (Eigen::Index i = 0; i < net.size(); ++i) {
    const double keep = net.theta()[i];
    double h = kFdStep, fd = 0;
    for (int attempt = 0; attempt < 4; ++attempt, h /= 10) {
      GradientTape tp, tm;
      net.theta()[i] = keep + h;
      const double fp = upstream.dot(forward_logits(net, g, &tp));
      net.theta()[i] = keep - h;
      const double fm = upstream.dot(forward_logits(net, g, &tm));
      net.theta()[i] = keep;
      fd = (fp - fm) / (2 * h);
      if (relu_pattern(tp) == base && relu_pattern(tm) == base) break;
      if (attempt < 3) ++r.shrunk;
    }
    r.worst = std::max(r.worst, std::abs(grad[i] - fd) / std::max({std::abs(grad[i]), std::abs(fd), 1e-6}));
  }
  return r;
}

struct Trained {
  NetParams il, il_rl, rl_random;
  std::vector<EpisodeLog> il_rl_logs, random_logs;
};

RlConfig rl_config() {
  RlConfig cfg;
  cfg.env.deterministic_time = true;
  return cfg;
}

Trained train_agents(const ExpertDataset& ds) {
  std::mt19937_64 rng(7);
  NetParams il = make_network(Architecture::actor(5), rng);
  BcConfig bc;
  bc.seed = kIlSeed;
  auto t0 = Clock::now();
  const BcReport rep = train_bc(ds.pairs, il, bc);
  note("IL: " + std::to_string(ds.pairs.size()) + " pairs from " + std::to_string(ds.instances) +
       " instances, loss " + fmt(rep.initial_loss) + " -> " + fmt(rep.train_loss.back()) + ", val bit accuracy " +
       fmt(rep.val_bit_accuracy.back()) + " (" + fmt(seconds(t0), 3) + " s)");

  PpoLearner ft{il, make_network(Architecture::critic(5), rng), {}, {}};
  t0 = Clock::now();
  std::vector<EpisodeLog> logs = train_rl(case_study_sampler(), ft, kRlEpisodes, rl_config(), 2);
  note("RL from IL: " + std::to_string(kRlEpisodes) + " episodes (" + fmt(seconds(t0), 3) + " s)");

  std::mt19937_64 rrng(3);
  PpoLearner rnd{make_network(Architecture::actor(5), rrng), make_network(Architecture::critic(5), rrng), {}, {}};
  t0 = Clock::now();
  std::vector<EpisodeLog> rlogs = train_rl(case_study_sampler(), rnd, kRlEpisodes, rl_config(), 4);
  note("RL from random init: " + std::to_string(kRlEpisodes) + " episodes (" + fmt(seconds(t0), 3) + " s)");
  return {il, ft.actor, rnd.actor, std::move(logs), std::move(rlogs)};
}

// 1
bool oracle_equivalence(const std::vector<ProblemInstance>& set, const std::vector<GbdTrace>& classical,
                        double classical_seconds) {
  const auto t0 = Clock::now();
  int converged = 0, matched = 0;
  double worst = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const BruteForceResult bf = brute_force_solve(set[i]);
    converged += classical[i].converged;
    if (!bf.feasible || !classical[i].converged) continue;
    const double rel = std::abs(classical[i].objective - bf.objective) / std::max(1.0, std::abs(bf.objective));
    worst = std::max(worst, rel);
    matched += rel <= kOracleRelTol;
  }
  const double total = classical_seconds + seconds(t0);
  return record(1, converged == kTestInstances && matched == kTestInstances && total < kOracleSeconds,
                "classical GBD matches brute force",
                std::to_string(matched) + "/" + std::to_string(kTestInstances) + " matched, " +
                    std::to_string(converged) + " converged, max rel err " + fmt(worst) + ", " + fmt(total, 3) +
                    " s");
}

// 5
bool duality_suite() {
  std::mt19937_64 rng(5);
  int opt = 0, feas = 0, bad = 0;
  double worst_tight = 0, worst_slack = 0;
  std::uniform_int_distribution<std::uint64_t> code(0, 31);
  while (opt + feas < kCuts) {
    CaseStudyOptions o;
    o.x9_demand = (opt + feas) % 2 == 0 ? 0.0 : 0.75;
    const ProblemInstance inst = build_case_study1(sample_coefficients(rng), o);
    BinaryVector y = binary_from_code(code(rng), 5);
    if (!inst.satisfies_pure_binary(y)) continue;
    const SubproblemSolution s = solve_subproblem(inst, y);
    if (s.status == SubproblemStatus::kFeasible) {
      const OptimalityCut c = make_optimality_cut(s, inst);
      const double d = std::abs(affine_at(c.w, c.beta, y) - s.objective);
      worst_tight = std::max(worst_tight, d);
      bad += d > kCutTightTol;
      ++opt;
    } else {
      const SubproblemSolution f = solve_feasibility(inst, y);
      if (f.status != SubproblemStatus::kInfeasible) {
        ++bad;
        ++feas;
        continue;
      }
      const FeasibilityCut c = make_feasibility_cut(f, inst);
      const double short_by = f.objective - affine_at(c.v, c.gamma, y);
      worst_slack = std::max(worst_slack, short_by);
      bad += short_by > kCutSlackTol;
      ++feas;
    }
  }
  return record(5, bad == 0 && opt > 0 && feas > 0, "optimality cuts tight, feasibility cuts cover slack",
                std::to_string(opt) + " optimality, " + std::to_string(feas) + " feasibility, " +
                    std::to_string(bad) + " bad, max |cut - Z| " + fmt(worst_tight) + ", max slack shortfall " +
                    fmt(worst_slack));
}

// 7
bool gradient_check() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> n_con(2, 6);
  double worst = 0;
  int shrunk = 0;
  for (int k = 0; k < kFdGraphs; ++k) {
    const BipartiteGraph g = normalize(testing::random_graph(rng, 5, n_con(rng), 0.6));
    const NetParams actor = make_network(Architecture::actor(5), rng);
    const NetParams critic = make_network(Architecture::critic(5), rng);
    Vector up(5);
    for (int j = 0; j < 5; ++j) up[j] = jitter(rng, 1)[0] * 10;
    for (const FdResult& r : {fd_error(actor, g, up, rng), fd_error(critic, g, Vector::Ones(1), rng)}) {
      worst = std::max(worst, r.worst);
      shrunk += r.shrunk;
    }
  }
  return record(7, worst <= kFdRelTol, "backward pass agrees with central differences",
                std::to_string(kFdGraphs) + " graphs, default actor and critic, max rel err " + fmt(worst) + ", " +
                    std::to_string(shrunk) + " steps shrunk at ReLU kinks");
}

// 8
bool verifier_fuzz() {
  std::mt19937_64 rng(88);
  const ConfidenceConfig cfg;
  std::uniform_real_distribution<double> u(0.0, 1.0), cost(-20.0, 20.0);
  std::uniform_int_distribution<int> dim(1, 7), pick(0, 9);
  const double special[] = {0.0, cfg.delta1, std::nextafter(cfg.delta1, 1.0), 0.5,
                            std::nextafter(cfg.delta2, 0.0), cfg.delta2, 1.0};
  int infeasible_accepts = 0, over_ubd = 0, threshold_bad = 0, exact_mismatch = 0, accepted = 0;
  for (int k = 0; k < kFuzzTriples; ++k) {
    const int m = dim(rng);
    const MasterState st = testing::random_master_state(rng, m);
    Vector p(m);
    for (int j = 0; j < m; ++j) {
      const int r = pick(rng);
      if (r < 3) p[j] = special[std::uniform_int_distribution<int>(0, 6)(rng)];
      else if (r < 6) p[j] = u(rng) * cfg.delta1 * 1.2;
      else if (r < 9) p[j] = 1 - u(rng) * (1 - cfg.delta2) * 1.2;
      else p[j] = u(rng);
    }
    const ExtendedReal ubd = k % 5 == 0 ? ExtendedReal::plus_infinity() : ExtendedReal::finite(cost(rng));
    const ThresholdResult th = threshold(p, cfg);
    for (int j = 0; j < m; ++j) {
      const auto it = th.fixed.find(j);
      const int want = p[j] <= cfg.delta1 ? 0 : (p[j] >= cfg.delta2 ? 1 : -1);
      const int got = it == th.fixed.end() ? -1 : it->second;
      threshold_bad += want != got;
    }
    const AssignmentOutcome o = confidence_based_assignment(p, st, ubd, cfg);
    const MasterResult ex = solve_exact(st);
    exact_mismatch += (o.mode == AssignmentMode::kMasterInfeasible) != !ex.feasible;
    if (!agent_accepted(o.mode)) continue;
    ++accepted;
    infeasible_accepts += !check_feasible(st, o.y);
    over_ubd += !(o.mu_b <= ubd);
  }
  return record(8, infeasible_accepts == 0 && over_ubd == 0 && threshold_bad == 0 && exact_mismatch == 0,
                "verifier never accepts an unsafe assignment",
                std::to_string(kFuzzTriples) + " triples, " + std::to_string(accepted) + " accepted, " +
                    std::to_string(infeasible_accepts) + " infeasible, " + std::to_string(over_ubd) +
                    " above UBD, " + std::to_string(threshold_bad) + " threshold errors, " +
                    std::to_string(exact_mismatch) + " infeasibility mismatches");
}

// 9
bool learning_progress(const ExpertDataset& ds, const Trained& t) {
  std::vector<ExpertPair> pairs;
  for (const auto& p : ds.pairs) {
    if (static_cast<int>(pairs.size()) >= kIlPairs) break;
    pairs.push_back(p);
  }
  BcConfig bc;
  bc.seed = kIlSeed;
  bc.epochs = kIlEpochs;
  std::mt19937_64 rng(9);
  const NetParams init = make_network(Architecture::actor(5), rng);
  NetParams a = init;
  const BcReport full = train_bc(pairs, a, bc);
  int halved_at = -1;
  for (std::size_t e = 0; e < full.train_loss.size(); ++e)
    if (full.train_loss[e] <= 0.5 * full.initial_loss) {
      halved_at = static_cast<int>(e) + 1;
      break;
    }
  // Same seed, shorter run: the shared prefix must repeat bit for bit.
  NetParams b = init;
  bc.epochs = 3;
  const BcReport prefix = train_bc(pairs, b, bc);
  bool il_det = prefix.initial_loss == full.initial_loss;
  for (std::size_t e = 0; e < prefix.train_loss.size(); ++e) il_det = il_det && prefix.train_loss[e] == full.train_loss[e];

  const double start = window_mean(t.il_rl_logs, 0);
  const double end = window_mean(t.il_rl_logs, kRlEpisodes - kRlWindow);
  // Rebuild the IL+RL starting point and replay the first window.
  PpoLearner again{t.il, {}, {}, {}};
  {
    std::mt19937_64 r2(7);
    make_network(Architecture::actor(5), r2);
    again.critic = make_network(Architecture::critic(5), r2);
  }
  const std::vector<EpisodeLog> replay = train_rl(case_study_sampler(), again, kRlWindow, rl_config(), 2);
  bool rl_det = true;
  for (int k = 0; k < kRlWindow; ++k) rl_det = rl_det && replay[k].reward == t.il_rl_logs[k].reward;
  note("random-init RL window means: start " + fmt(window_mean(t.random_logs, 0)) + ", end " +
       fmt(window_mean(t.random_logs, kRlEpisodes - kRlWindow)));
  return record(9, halved_at > 0 && end >= start && il_det && rl_det, "IL halves BCE, RL reward improves, both deterministic",
                std::to_string(pairs.size()) + " pairs: BCE " + fmt(full.initial_loss) + " -> min " +
                    fmt(*std::min_element(full.train_loss.begin(), full.train_loss.end())) +
                    (halved_at > 0 ? ", halved at epoch " + std::to_string(halved_at) : ", never halved") +
                    "; RL window-100 mean " + fmt(start) + " -> " + fmt(end) + "; IL repeat " +
                    (il_det ? "identical" : "DIFFERS") + ", RL repeat " + (rl_det ? "identical" : "DIFFERS"));
}

// 10
bool degenerate_suite() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) failed.push_back(what);
  };
  const ProblemInstance inst = testing::nominal();
  std::mt19937_64 rng(10);
  const NetParams actor = make_network(Architecture::actor(5), rng);
  auto probs_ok = [](const Vector& p) { return p.allFinite() && p.minCoeff() >= 0 && p.maxCoeff() <= 1; };
  try {
    // Empty cut sets.
    const MasterState empty(inst, testing::bits("01000"));
    const AssignmentOutcome o = confidence_based_assignment(to_real(testing::bits("10100")), empty,
                                                            ExtendedReal::plus_infinity());
    expect(o.mode == AssignmentMode::kFullAccepted && o.mu_b.is_minus_infinity(), "empty cuts: -inf acceptance");
    const MasterResult mr = solve_exact(empty);
    expect(mr.feasible && mr.mu_b == kDefaultMuLo, "empty cuts: exact master at mu_lo");
    expect(probs_ok(actor_forward(actor, encode_normalized(empty))), "empty cuts: actor output");

    // Master infeasible once cuts exclude everything.
    MasterState closed(inst, testing::bits("01000"));
    closed.push(OptimalityCut{Vector::Zero(5), 1.0});
    closed.push(FeasibilityCut{Vector::Zero(5), 1.0});
    for (double p : {0.0, 0.5, 1.0}) {
      const AssignmentOutcome c = confidence_based_assignment(Vector::Constant(5, p), closed, ExtendedReal::finite(5));
      expect(c.mode == AssignmentMode::kMasterInfeasible && c.y.empty(), "closed master: infeasible mode");
    }
    expect(!solve_exact(closed).feasible, "closed master: exact infeasible");
    std::mt19937_64 qrng(4);
    const ProblemInstance base = testing::random_quadratic(qrng, 2);
    ProblemData d = base.data();
    d.K = Matrix(1, 2);
    d.K << -1, 0;
    d.b = Vector::Constant(1, -1);
    d.B.col(0).setConstant(100);
    const ProblemInstance dead(d, base.convex_ptr());
    const GbdResult cr = solve_classical(dead, testing::bits("10"));
    const GbdResult hr = solve_hybrid(dead, testing::bits("10"), make_network(Architecture::actor(2), rng));
    expect(cr.status == GbdStatus::kInfeasible && hr.status == GbdStatus::kInfeasible, "infeasible problem verdict");
    expect(trace_violations(cr.trace).empty() && trace_violations(hr.trace).empty(), "infeasible problem traces");

    // K_O only and K_F only.
    for (int only = 0; only < 2; ++only) {
      for (int k = 0; k < 50; ++k) {
        MasterState st(inst, testing::bits("01000"));
        std::uniform_real_distribution<double> u(-1, 1);
        for (int c = 0; c < 3; ++c) {
          Vector w(5);
          for (int j = 0; j < 5; ++j) w[j] = u(rng);
          if (only == 0) st.push(OptimalityCut{10 * w, 50 + 10 * u(rng)});
          else st.push(FeasibilityCut{w, 0.5 * u(rng)});
        }
        const BipartiteGraph g = encode_normalized(st);
        const Vector p = actor_forward(actor, g);
        expect(probs_ok(p), "single cut kind: actor output");
        const AssignmentOutcome a = confidence_based_assignment(p, st, ExtendedReal::finite(60));
        const bool ex = solve_exact(st).feasible;
        expect((a.mode == AssignmentMode::kMasterInfeasible) == !ex, "single cut kind: infeasibility agrees");
        if (ex) expect(check_feasible(st, a.y), "single cut kind: feasible result");
      }
    }

    // Zero initial gap.
    const RewardConfig rc;
    const RewardBreakdown z = compute_reward(true, {1, 1}, {1, 1}, {1, 1}, 0, rc);
    expect(z.r_gap == 0 && std::isfinite(z.total), "zero gap: r_gap guard");
    const RewardBreakdown z2 = compute_reward(true, {5, 5}, {5, 5}, {5, 5}, 0.1, rc);
    expect(std::isfinite(z2.total), "zero gap: finite total");
    bool rejected = false;
    try {
      EnvConfig ec;
      ec.lbd_init = ec.ubd_init = 0;
      GbdEnv env(rc, ec);
    } catch (const ValidationError&) {
      rejected = true;
    }
    expect(rejected, "zero gap: environment rejects equal initial bounds");
  } catch (const std::exception& e) {
    failed.push_back(std::string("exception: ") + e.what());
  }
  std::string detail = failed.empty() ? "all cases handled" : "";
  for (const auto& f : failed) detail += (detail.empty() ? "" : "; ") + f;
  return record(10, failed.empty(), "degenerate inputs", detail);
}

int run(const std::set<int>& expected_fail, const std::string& report_path) {
  const auto t_all = Clock::now();
  const std::vector<ProblemInstance> set = test_set();
  std::vector<GbdTrace> classical;
  auto t0 = Clock::now();
  for (const auto& inst : set) classical.push_back(solve_classical(inst, default_initial_assignment(inst)).trace);
  const double classical_seconds = seconds(t0);

  std::map<int, bool> pass;
  pass[1] = oracle_equivalence(set, classical, classical_seconds);

  t0 = Clock::now();
  const ExpertDataset ds = generate_expert_dataset(kIlInstances, kIlSeed);
  note("expert data: " + std::to_string(ds.pairs.size()) + " pairs, " + std::to_string(ds.failures) +
       " failed instances (" + fmt(seconds(t0), 3) + " s)");
  const Trained t = train_agents(ds);
  const std::vector<GbdTrace> h_ilrl = run_hybrid(set, t.il_rl), h_il = run_hybrid(set, t.il),
                              h_rnd = run_hybrid(set, t.rl_random);
  const MethodSummary s_ilrl = summarize("il+rl", h_ilrl, classical), s_il = summarize("il", h_il, classical),
                      s_rnd = summarize("rl-random", h_rnd, classical);
  for (const auto* s : {&s_ilrl, &s_il, &s_rnd})
    note(s->method + ": converged " + std::to_string(s->converged) + ", matched " + std::to_string(s->matched) +
         ", exact solves " + std::to_string(s->exact_solves) + " (ratio " + fmt(s->exact_solve_ratio) +
         "), full acceptance " + fmt(s->full_acceptance) + ", confident fraction " + fmt(s->confident_fraction) +
         ", master time change " + fmt(s->master_improvement_pct, 3) + "%, total time change " +
         fmt(s->total_improvement_pct, 3) + "%");

  pass[2] = record(2, s_ilrl.converged == kTestInstances && s_ilrl.matched == kTestInstances,
                   "hybrid IL+RL converges to the classical optimum",
                   std::to_string(s_ilrl.converged) + "/" + std::to_string(kTestInstances) + " converged, " +
                       std::to_string(s_ilrl.matched) + " within rel gap " + fmt(kParityRelGap) + ", mean rel gap " +
                       fmt(s_ilrl.rel_gap.mean));
  int classical_iters = 0;
  for (const auto& c : classical) classical_iters += c.iterations;
  pass[3] = record(3, s_ilrl.exact_solve_ratio <= kExactSolveRatio, "exact master solves reduced",
                   std::to_string(s_ilrl.exact_solves) + " exact solves vs " + std::to_string(classical_iters) +
                       " classical iterations, ratio " + fmt(s_ilrl.exact_solve_ratio) + " (limit " +
                       fmt(kExactSolveRatio) + ")");
  pass[4] = record(4,
                   s_ilrl.full_acceptance >= s_il.full_acceptance && s_il.full_acceptance >= s_rnd.full_acceptance &&
                       s_il.full_acceptance >= kIlAcceptance,
                   "full-assignment acceptance ordering",
                   "il+rl " + fmt(s_ilrl.full_acceptance) + ", il " + fmt(s_il.full_acceptance) + ", rl-random " +
                       fmt(s_rnd.full_acceptance) + " (il floor " + fmt(kIlAcceptance) + ")");
  pass[5] = duality_suite();

  int viol = 0, traces = 0;
  std::string first;
  for (const std::vector<GbdTrace>* group : std::initializer_list<const std::vector<GbdTrace>*>{&classical, &h_ilrl, &h_il, &h_rnd})
    for (const auto& tr : *group) {
      ++traces;
      const auto v = trace_violations(tr);
      viol += static_cast<int>(v.size());
      if (!v.empty() && first.empty()) first = tr.method + ": " + v.front();
    }
  int cviol = 0;
  for (const auto& tr : classical) cviol += static_cast<int>(trace_violations(tr).size());
  pass[6] = record(6, viol == 0, "bound monotonicity in every trace",
                   std::to_string(traces) + " traces, " + std::to_string(viol) + " violations (" +
                       std::to_string(cviol) + " classical)" + (first.empty() ? "" : ", first: " + first));
  pass[7] = gradient_check();
  pass[8] = verifier_fuzz();
  pass[9] = learning_progress(ds, t);
  pass[10] = degenerate_suite();

  int unexpected = 0;
  for (const auto& [id, ok] : pass)
    if (!ok && !expected_fail.count(id)) ++unexpected;
  for (int id : expected_fail)
    note("criterion " + std::to_string(id) + " listed as expected to fail: " + (pass[id] ? "passed" : "failed"));
  note("total " + fmt(seconds(t_all), 4) + " s");
  if (!report_path.empty()) std::ofstream(report_path) << report.str();
  return unexpected == 0 ? 0 : 1;
}

}  // namespace
}  // namespace gbdrl

int main(int argc, char** argv) {
  std::set<int> expected_fail;
  std::string report_path;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expected-fail" && i + 1 < argc) {
      expected_fail.insert(std::stoi(argv[++i]));
    } else if (a == "--report" && i + 1 < argc) {
      report_path = argv[++i];
    } else {
      std::cerr << "usage: gbdrl_acceptance [--report FILE] [--expected-fail N]...\n";
      return 2;
    }
  }
  try {
    return gbdrl::run(expected_fail, report_path);
  } catch (const std::exception& e) {
    std::cerr << "acceptance run aborted: " << e.what() << "\n";
    return 2;
  }
}
