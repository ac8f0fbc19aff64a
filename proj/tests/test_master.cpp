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

#include "gbdrl/master.hpp"
#include "gbdrl/nlp_solver.hpp"
#include "test_support.hpp"

namespace gbdrl {
namespace {

using testing::bits;
using testing::nominal;

// Reference minimizer written independently of the library's search code.
MasterResult reference_master(const MasterState& st, const PartialAssignment& fixed = {}) {
  MasterResult best;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << st.m()); ++code) {
    const BinaryVector y = binary_from_code(code, st.m());
    bool match = true;
    for (const auto& [j, v] : fixed) match = match && y[static_cast<std::size_t>(j)] == v;
    if (!match) continue;
    bool ok = true;
    for (Eigen::Index t = 0; t < st.K().rows(); ++t) ok = ok && st.K().row(t).dot(to_real(y)) <= st.b()[t] + 1e-9;
    for (const auto& c : st.feas_cuts()) ok = ok && c.v.dot(to_real(y)) + c.gamma <= 1e-9;
    if (!ok) continue;
    double val = st.mu_lo();
    if (!st.opt_cuts().empty()) {
      val = -std::numeric_limits<double>::infinity();
      for (const auto& c : st.opt_cuts()) val = std::max(val, c.w.dot(to_real(y)) + c.beta);
    }
    if (val < best_val - 1e-12) {
      best_val = val;
      best.feasible = true;
      best.y = y;
      best.mu_b = val;
    }
  }
  return best;
}

SubproblemSolution fake_feasible(const ProblemInstance& inst, const Vector& x, const Vector& mu) {
  SubproblemSolution s;
  s.status = SubproblemStatus::kFeasible;
  s.y = BinaryVector(static_cast<std::size_t>(inst.m()), 0);
  s.x = x;
  s.mu = mu;
  s.lambda = Vector::Zero(inst.p());
  return s;
}

TEST(OptimalityCut, ZeroDualsGiveObjectiveCoefficients) {
  const ProblemInstance inst = nominal();
  Vector x(6);
  x << 0.5, 0.5, 0.5, 1, 1, 1;
  const OptimalityCut c = make_optimality_cut(fake_feasible(inst, x, Vector::Zero(12)), inst);
  EXPECT_EQ(c.w, inst.e());
  EXPECT_DOUBLE_EQ(c.beta, inst.convex().objective(x));
}

TEST(OptimalityCut, SingleActiveMultiplier) {
  std::mt19937_64 rng(4);
  const ProblemInstance base = testing::random_quadratic(rng, 3);
  ProblemData d = base.data();
  d.B.setZero();
  d.B(0, 0) = 1;
  const ProblemInstance inst(d, base.convex_ptr());
  Vector mu = Vector::Zero(inst.q());
  mu[0] = 2;
  const Vector x = Vector::Constant(3, 0.1);
  const OptimalityCut c = make_optimality_cut(fake_feasible(inst, x, mu), inst);
  EXPECT_DOUBLE_EQ(c.w[0], inst.e()[0] + 2);
  EXPECT_DOUBLE_EQ(c.w[1], inst.e()[1]);
  EXPECT_DOUBLE_EQ(c.beta, inst.convex().objective(x) + 2 * inst.convex().inequality(x)[0]);
}

TEST(OptimalityCut, RequiresFeasibleSolution) {
  const ProblemInstance inst = nominal();
  SubproblemSolution s;
  s.status = SubproblemStatus::kInfeasible;
  MasterState st(inst, bits("01000"));
  EXPECT_THROW(add_optimality_cut(st, s, inst), ContractViolation);
}

TEST(OptimalityCut, TightAtGeneratingAssignment) {
  const ProblemInstance inst = nominal();
  for (std::uint64_t code = 0; code < 32; ++code) {
    const BinaryVector y = binary_from_code(code, 5);
    if (!inst.satisfies_pure_binary(y)) continue;
    const SubproblemSolution s = solve_subproblem(inst, y);
    ASSERT_EQ(s.status, SubproblemStatus::kFeasible);
    const OptimalityCut c = make_optimality_cut(s, inst);
    EXPECT_NEAR(affine_at(c.w, c.beta, y), s.objective, 1e-5) << to_string(y);
  }
  std::mt19937_64 rng(8);
  for (int k = 0; k < 10; ++k) {
    const ProblemInstance q = testing::random_quadratic(rng, 3, 3, k % 2 == 1);
    for (std::uint64_t code = 0; code < 8; ++code) {
      const BinaryVector y = binary_from_code(code, 3);
      const SubproblemSolution s = solve_subproblem(q, y);
      if (s.status != SubproblemStatus::kFeasible) continue;
      const OptimalityCut c = make_optimality_cut(s, q);
      EXPECT_NEAR(affine_at(c.w, c.beta, y), s.objective, 1e-5);
    }
  }
}

TEST(FeasibilityCut, ZeroDualsRejected) {
  const ProblemInstance inst = nominal();
  SubproblemSolution s;
  s.kind = SubproblemKind::kFeasibility;
  s.status = SubproblemStatus::kInfeasible;
  s.objective = 1.0;
  s.x = Vector::Constant(6, 0.5);
  s.mu = Vector::Zero(12);
  s.lambda = Vector::Zero(0);
  MasterState st(inst, bits("01000"));
  EXPECT_THROW(add_feasibility_cut(st, s, inst), ContractViolation);
  s.objective = 0;
  s.mu[7] = 1;
  EXPECT_THROW(add_feasibility_cut(st, s, inst), ContractViolation);
}

TEST(FeasibilityCut, ViolatedAtGeneratingAssignmentAndExcludesIt) {
  CaseStudyOptions opt;
  opt.x9_demand = 0.5;
  const ProblemInstance inst = nominal(opt);
  const BinaryVector y = bits("01010");
  const SubproblemSolution f = solve_feasibility(inst, y);
  ASSERT_EQ(f.status, SubproblemStatus::kInfeasible);
  MasterState st(inst, y);
  EXPECT_TRUE(check_feasible(st, y));
  add_feasibility_cut(st, f, inst);
  const FeasibilityCut& c = st.feas_cuts().back();
  EXPECT_GT(affine_at(c.v, c.gamma, y), 0.0);
  EXPECT_GE(affine_at(c.v, c.gamma, y), f.objective - 1e-6);
  EXPECT_FALSE(check_feasible(st, y));
  // Assignments with y3 = 1 have zero slack, so the cut never removes them.
  EXPECT_TRUE(check_feasible(st, bits("01110")));
  EXPECT_TRUE(check_feasible(st, bits("10100")));
}

TEST(CheckFeasible, PureBinaryRows) {
  MasterState st(nominal(), bits("01000"));
  EXPECT_TRUE(check_feasible(st, bits("01000")));
  EXPECT_TRUE(check_feasible(st, bits("10101")));
  EXPECT_FALSE(check_feasible(st, bits("00100")));
  EXPECT_FALSE(check_feasible(st, bits("11000")));
  EXPECT_FALSE(check_feasible(st, bits("01011")));
  st.push(OptimalityCut{Vector::Constant(5, 1e6), 1e6});
  EXPECT_TRUE(check_feasible(st, bits("01000")));
}

TEST(CandidateCost, EmptyConstantAndMax) {
  MasterState st(nominal(), bits("01000"));
  EXPECT_TRUE(eval_candidate_cost(st, bits("01000")).is_minus_infinity());
  st.push(OptimalityCut{Vector::Zero(5), 7});
  for (std::uint64_t code = 0; code < 32; ++code)
    EXPECT_EQ(eval_candidate_cost(st, binary_from_code(code, 5)), ExtendedReal::finite(7));
  Vector w(5);
  w << 3, -2, 5, 0, 1;
  st.push(OptimalityCut{w, 4});
  for (std::uint64_t code = 0; code < 32; ++code) {
    const BinaryVector y = binary_from_code(code, 5);
    EXPECT_DOUBLE_EQ(eval_candidate_cost(st, y).value(), std::max(7.0, w.dot(to_real(y)) + 4));
  }
}

TEST(SolveExact, NoCutsReturnsFirstFeasibleAtFloor) {
  MasterState st(nominal(), bits("01000"), -123.0);
  const MasterResult r = solve_exact(st);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(to_string(r.y), "01000");
  EXPECT_DOUBLE_EQ(r.mu_b, -123.0);
  const MasterResult bb = solve_exact(st, MasterMethod::kBranchAndBound);
  EXPECT_EQ(bb.y, r.y);
  EXPECT_DOUBLE_EQ(bb.mu_b, r.mu_b);
}

TEST(SolveExact, AfterFirstCutMatchesEnumeration) {
  const ProblemInstance inst = nominal();
  MasterState st(inst, bits("01000"));
  add_optimality_cut(st, solve_subproblem(inst, bits("01000")), inst);
  const MasterResult r = solve_exact(st);
  const MasterResult ref = reference_master(st);
  ASSERT_TRUE(r.feasible);
  EXPECT_EQ(r.y, ref.y);
  EXPECT_NEAR(r.mu_b, ref.mu_b, 1e-9);
  EXPECT_NEAR(r.mu_b, eval_candidate_cost(st, r.y).value(), 1e-9);
}

TEST(SolveExact, AllAssignmentsCutOff) {
  MasterState st(nominal(), bits("01000"));
  st.push(FeasibilityCut{Vector::Zero(5), 1.0});
  EXPECT_FALSE(solve_exact(st).feasible);
  EXPECT_FALSE(solve_exact(st, MasterMethod::kBranchAndBound).feasible);
  EXPECT_FALSE(solve_reduced(st, {{0, 1}}).feasible);
}

TEST(SolveReduced, CompleteEmptyAndConflictingFixings) {
  const ProblemInstance inst = nominal();
  MasterState st(inst, bits("01000"));
  add_optimality_cut(st, solve_subproblem(inst, bits("01000")), inst);
  add_optimality_cut(st, solve_subproblem(inst, bits("10110")), inst);
  const BinaryVector full = bits("10101");
  PartialAssignment all;
  for (int j = 0; j < 5; ++j) all[j] = full[static_cast<std::size_t>(j)];
  const MasterResult one = solve_reduced(st, all);
  ASSERT_TRUE(one.feasible);
  EXPECT_EQ(one.y, full);
  EXPECT_DOUBLE_EQ(one.mu_b, eval_candidate_cost(st, full).value());

  const MasterResult none = solve_reduced(st, {});
  const MasterResult exact = solve_exact(st);
  EXPECT_EQ(none.y, exact.y);
  EXPECT_DOUBLE_EQ(none.mu_b, exact.mu_b);

  EXPECT_FALSE(solve_reduced(st, {{0, 1}, {1, 1}}).feasible);
  EXPECT_FALSE(solve_reduced(st, {{0, 0}, {1, 0}}).feasible);
  EXPECT_THROW(solve_reduced(st, {{5, 1}}), ContractViolation);
  EXPECT_THROW(solve_reduced(st, {{0, 2}}), ContractViolation);
}

TEST(SolveReduced, FixedBitsOfCutGeneratingAssignment) {
  CaseStudyOptions opt;
  opt.x9_demand = 0.5;
  const ProblemInstance inst = nominal(opt);
  MasterState st(inst, bits("01000"));
  for (const auto* ys : {"01000", "01001", "01010", "10000", "10001", "10010"})
    add_feasibility_cut(st, solve_feasibility(inst, bits(ys)), inst);
  // Every completion with y3 = 0 has been cut off.
  EXPECT_FALSE(solve_reduced(st, {{2, 0}}).feasible);
  EXPECT_TRUE(solve_reduced(st, {{2, 1}}).feasible);
}

TEST(MasterProperties, RandomStatesAgreeAcrossMethods) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> mdist(1, 12), bit(0, 1), coin(0, 3);
  for (int k = 0; k < 300; ++k) {
    const int m = mdist(rng);
    const MasterState st = testing::random_master_state(rng, m);
    PartialAssignment fixed;
    for (int j = 0; j < m; ++j)
      if (coin(rng) == 0) fixed[j] = bit(rng);
    const MasterResult ref = reference_master(st, fixed);
    const MasterResult en = solve_reduced(st, fixed, MasterMethod::kEnumerate);
    const MasterResult bb = solve_reduced(st, fixed, MasterMethod::kBranchAndBound);
    ASSERT_EQ(en.feasible, ref.feasible) << k;
    ASSERT_EQ(bb.feasible, ref.feasible) << k;
    if (!ref.feasible) continue;
    EXPECT_EQ(en.y, ref.y) << k;
    EXPECT_EQ(bb.y, ref.y) << k;
    EXPECT_NEAR(en.mu_b, ref.mu_b, 1e-9);
    EXPECT_NEAR(bb.mu_b, ref.mu_b, 1e-9);
    if (!st.opt_cuts().empty()) EXPECT_NEAR(en.mu_b, eval_candidate_cost(st, en.y).value(), 1e-9);
  }
}

TEST(MasterProperties, OptimalValueNondecreasingAsCutsGrow) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 6;
    MasterState st(Matrix::Zero(0, m), Vector::Zero(0), BinaryVector(m, 0));
    double prev = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 12; ++k) {
      if (k % 4 == 3) {
        FeasibilityCut c{Vector(m), 0.2 * u(rng) - 0.3};
        for (int j = 0; j < m; ++j) c.v[j] = u(rng);
        st.push(c);
      } else {
        OptimalityCut c{Vector(m), 10 * u(rng)};
        for (int j = 0; j < m; ++j) c.w[j] = 5 * u(rng);
        st.push(c);
      }
      const MasterResult r = solve_exact(st);
      if (!r.feasible) break;
      EXPECT_GE(r.mu_b, prev - 1e-12);
      prev = r.mu_b;
    }
  }
}

TEST(CutDump, RoundTripAndSchemaChecks) {
  std::mt19937_64 rng(3);
  const MasterState st = testing::random_master_state(rng, 4, 3, 3, 1);
  const nlohmann::json doc = cuts_to_json(st);
  const MasterState back = cuts_from_json(doc, st.K(), st.b(), st.y_prev());
  ASSERT_EQ(back.history(), st.history());
  for (std::size_t i = 0; i < st.opt_cuts().size(); ++i) {
    EXPECT_EQ(back.opt_cuts()[i].w, st.opt_cuts()[i].w);
    EXPECT_EQ(back.opt_cuts()[i].beta, st.opt_cuts()[i].beta);
  }
  nlohmann::json bad = doc;
  bad["schema_version"] = 99;
  EXPECT_THROW(cuts_from_json(bad, st.K(), st.b(), st.y_prev()), SchemaError);
  bad = doc;
  bad["m"] = 7;
  EXPECT_THROW(cuts_from_json(bad, st.K(), st.b(), st.y_prev()), SchemaError);
}

}  // namespace
}  // namespace gbdrl
