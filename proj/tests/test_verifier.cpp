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

#include <random>

#include "gbdrl/nlp_solver.hpp"
#include "gbdrl/verifier.hpp"
#include "test_support.hpp"

namespace gbdrl {
namespace {

using testing::bits;

const ExtendedReal kInf = ExtendedReal::plus_infinity();

Vector probs(std::initializer_list<double> v) {
  Vector p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

// Nominal master after the cut from y = 01000.
MasterState one_cut_state() {
  const ProblemInstance inst = testing::nominal();
  MasterState st(inst, bits("01000"));
  add_optimality_cut(st, solve_subproblem(inst, bits("01000")), inst);
  return st;
}

TEST(Threshold, BoundariesAreInclusive) {
  const ThresholdResult r = threshold(probs({0.05, 0.1, 0.5, 0.9, 0.95}), {});
  const PartialAssignment expect{{0, 0}, {1, 0}, {3, 1}, {4, 1}};
  EXPECT_EQ(r.fixed, expect);
  EXPECT_EQ(r.free, std::vector<int>{2});
  EXPECT_TRUE(threshold(probs({0.11, 0.89}), {}).fixed.empty());
  EXPECT_THROW(threshold(probs({1.2}), {}), ContractViolation);
  ConfidenceConfig bad{0.6, 0.4};
  EXPECT_THROW(bad.check(), ValidationError);
}

TEST(Assignment, FullAccepted) {
  const MasterState st = one_cut_state();
  const AssignmentOutcome o = confidence_based_assignment(probs({0.99, 0.01, 0.97, 0.02, 0}), st, kInf);
  EXPECT_EQ(o.mode, AssignmentMode::kFullAccepted);
  EXPECT_EQ(o.y, bits("10100"));
  EXPECT_EQ(o.mu_b, eval_candidate_cost(st, bits("10100")));
  EXPECT_EQ(o.exact_solves, 0);
  EXPECT_EQ(o.fixed_count, 5);
}

TEST(Assignment, FullRejectedFeasibility) {
  const MasterState st = one_cut_state();
  const AssignmentOutcome o = confidence_based_assignment(probs({1, 1, 0, 0, 0}), st, kInf);
  EXPECT_EQ(o.mode, AssignmentMode::kFullRejectedFeasibility);
  const MasterResult ex = solve_exact(st);
  EXPECT_EQ(o.y, ex.y);
  EXPECT_EQ(o.mu_b.value(), ex.mu_b);
  EXPECT_EQ(o.exact_solves, 1);
}

TEST(Assignment, FullRejectedCost) {
  const MasterState st = one_cut_state();
  const ExtendedReal ubd = ExtendedReal::finite(eval_candidate_cost(st, bits("10100")).value() - 1);
  const AssignmentOutcome o = confidence_based_assignment(probs({1, 0, 1, 0, 0}), st, ubd);
  EXPECT_EQ(o.mode, AssignmentMode::kFullRejectedCost);
  EXPECT_EQ(o.y, solve_exact(st).y);
  // Equal to UBD is still accepted.
  const ExtendedReal tight = eval_candidate_cost(st, bits("10100"));
  EXPECT_EQ(confidence_based_assignment(probs({1, 0, 1, 0, 0}), st, tight).mode, AssignmentMode::kFullAccepted);
}

TEST(Assignment, NoAssignmentRunsExactMaster) {
  const MasterState st = one_cut_state();
  const AssignmentOutcome o = confidence_based_assignment(Vector::Constant(5, 0.5), st, kInf);
  EXPECT_EQ(o.mode, AssignmentMode::kNoAssignment);
  EXPECT_EQ(o.y, solve_exact(st).y);
  EXPECT_EQ(o.fixed_count, 0);
  EXPECT_EQ(o.reduced_solves, 0);
}

TEST(Assignment, PartialAcceptedAndFallback) {
  const MasterState st = one_cut_state();
  const AssignmentOutcome a = confidence_based_assignment(probs({0.95, 0.5, 0.5, 0.5, 0.5}), st, kInf);
  EXPECT_EQ(a.mode, AssignmentMode::kPartialAccepted);
  EXPECT_EQ(a.y[0], 1);
  const MasterResult red = solve_reduced(st, {{0, 1}});
  EXPECT_EQ(a.y, red.y);
  EXPECT_EQ(a.mu_b.value(), red.mu_b);
  EXPECT_EQ(a.reduced_solves, 1);
  EXPECT_EQ(a.exact_solves, 0);

  // Reduced problem infeasible: y1 = y2 = 1.
  const AssignmentOutcome b = confidence_based_assignment(probs({0.95, 0.95, 0.5, 0.5, 0.5}), st, kInf);
  EXPECT_EQ(b.mode, AssignmentMode::kPartialFallback);
  EXPECT_EQ(b.y, solve_exact(st).y);
  EXPECT_EQ(b.exact_solves, 1);

  // Reduced value above UBD.
  const ExtendedReal ubd = ExtendedReal::finite(red.mu_b - 1);
  EXPECT_EQ(confidence_based_assignment(probs({0.95, 0.5, 0.5, 0.5, 0.5}), st, ubd).mode,
            AssignmentMode::kPartialFallback);
}

TEST(Assignment, MasterInfeasible) {
  Matrix K(2, 1);
  K << 1, -1;
  Vector b(2);
  b << -1, -1;
  const MasterState st(K, b, {0});
  for (double p : {0.0, 0.5, 1.0}) {
    const AssignmentOutcome o = confidence_based_assignment(probs({p}), st, kInf);
    EXPECT_EQ(o.mode, AssignmentMode::kMasterInfeasible);
    EXPECT_TRUE(o.y.empty());
  }
}

TEST(Assignment, NoOptimalityCutsAcceptsAtMinusInfinity) {
  const MasterState st(testing::nominal(), bits("01000"));
  const AssignmentOutcome o =
      confidence_based_assignment(probs({1, 0, 0, 0, 1}), st, ExtendedReal::finite(-1e9));
  EXPECT_EQ(o.mode, AssignmentMode::kFullAccepted);
  EXPECT_EQ(o.mu_b, ExtendedReal::minus_infinity());
}

TEST(Lbd, MonotoneUpdate) {
  EXPECT_EQ(monotone_lbd(ExtendedReal::minus_infinity(), ExtendedReal::finite(3)), ExtendedReal::finite(3));
  EXPECT_EQ(monotone_lbd(ExtendedReal::finite(5), ExtendedReal::finite(3)), ExtendedReal::finite(5));
  EXPECT_EQ(monotone_lbd(ExtendedReal::finite(5), ExtendedReal::minus_infinity()), ExtendedReal::finite(5));
}

TEST(Modes, StringRoundTrip) {
  for (auto m : {AssignmentMode::kFullAccepted, AssignmentMode::kFullRejectedFeasibility,
                 AssignmentMode::kFullRejectedCost, AssignmentMode::kPartialAccepted, AssignmentMode::kPartialFallback,
                 AssignmentMode::kNoAssignment, AssignmentMode::kMasterInfeasible, AssignmentMode::kSolver})
    EXPECT_EQ(assignment_mode_from_string(to_string(m)), m);
  EXPECT_EQ(assignment_mode_from_string("accepted"), std::nullopt);
}

TEST(Assignment, SafetyFuzz) {
  std::mt19937_64 rng(2026);
  std::uniform_real_distribution<double> u(0.0, 1.0), cost(-20.0, 20.0);
  std::uniform_int_distribution<int> dim(1, 7);
  for (int k = 0; k < 2000; ++k) {
    const int m = dim(rng);
    const MasterState st = testing::random_master_state(rng, m);
    Vector p(m);
    for (int j = 0; j < m; ++j) {
      const double r = u(rng);
      p[j] = r < 0.3 ? r / 3 : (r > 0.7 ? 1 - (1 - r) / 3 : r);
    }
    const ExtendedReal ubd = k % 4 == 0 ? kInf : ExtendedReal::finite(cost(rng));
    const AssignmentOutcome o = confidence_based_assignment(p, st, ubd);
    const AssignmentOutcome again = confidence_based_assignment(p, st, ubd);
    EXPECT_EQ(o.mode, again.mode);
    EXPECT_EQ(o.y, again.y);
    const MasterResult ex = solve_exact(st);
    ASSERT_EQ(o.mode == AssignmentMode::kMasterInfeasible, !ex.feasible) << k;
    if (!ex.feasible) continue;
    EXPECT_TRUE(check_feasible(st, o.y)) << k;
    if (agent_accepted(o.mode)) {
      EXPECT_TRUE(o.mu_b <= ubd) << k;
      for (const auto& [j, v] : threshold(p, {}).fixed) EXPECT_EQ(o.y[static_cast<std::size_t>(j)], v) << k;
      const ExtendedReal c = eval_candidate_cost(st, o.y);
      if (c.is_finite()) {
        EXPECT_NEAR(o.mu_b.value(), std::max(c.value(), kDefaultMuLo), 1e-9) << k;
        EXPECT_GE(o.mu_b.value(), ex.mu_b - 1e-9) << k;
      } else {
        EXPECT_TRUE(o.mu_b == ExtendedReal::minus_infinity() || o.mu_b == ExtendedReal::finite(kDefaultMuLo)) << k;
      }
    } else {
      EXPECT_EQ(o.exact_solves, 1) << k;
      EXPECT_EQ(o.mu_b.value(), ex.mu_b) << k;
    }
    EXPECT_EQ(o.fixed_count == m, o.mode == AssignmentMode::kFullAccepted ||
                                      o.mode == AssignmentMode::kFullRejectedCost ||
                                      o.mode == AssignmentMode::kFullRejectedFeasibility)
        << k;
  }
}

}  // namespace
}  // namespace gbdrl
