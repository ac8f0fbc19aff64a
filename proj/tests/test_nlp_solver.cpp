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

#include <cmath>
#include <random>

#include "gbdrl/master.hpp"
#include "gbdrl/nlp_solver.hpp"
#include "golden_values.hpp"
#include "test_support.hpp"

namespace gbdrl {
namespace {

using testing::bits;

TEST(Subproblem, GoldenValuesForEveryCase) {
  for (const auto& gc : golden::kCases) {
    CaseStudyOptions opt;
    opt.x9_demand = gc.x9_demand;
    const ProblemInstance inst = build_case_study1({gc.c}, opt);
    for (const auto& e : gc.values) {
      const SubproblemSolution s = solve_subproblem(inst, bits(e.y));
      if (std::isnan(e.z)) {
        EXPECT_EQ(s.status, SubproblemStatus::kInfeasible) << e.y;
      } else {
        ASSERT_EQ(s.status, SubproblemStatus::kFeasible) << e.y;
        EXPECT_NEAR(s.objective, e.z, 1e-6 * std::abs(e.z)) << e.y;
      }
    }
  }
}

TEST(Subproblem, NominalY10110) {
  const SubproblemSolution s = solve_subproblem(testing::nominal(), bits("10110"));
  ASSERT_EQ(s.status, SubproblemStatus::kFeasible);
  EXPECT_NEAR(s.objective, 82.12988210307579, 1e-6 * 82.13);
  EXPECT_LE(s.max_violation, 1e-6);
  EXPECT_GE(s.mu.minCoeff(), 0.0);
  EXPECT_GT(s.iterations, 0);
}

TEST(Subproblem, FeasibleResultsRespectTolerance) {
  const ProblemInstance inst = testing::nominal();
  for (std::uint64_t code = 0; code < 32; ++code) {
    const BinaryVector y = binary_from_code(code, 5);
    const SubproblemSolution s = solve_subproblem(inst, y);
    ASSERT_NE(s.status, SubproblemStatus::kNumericalFailure) << to_string(y);
    if (s.status != SubproblemStatus::kFeasible) continue;
    EXPECT_LE(s.max_violation, 1e-6) << to_string(y);
    EXPECT_TRUE(((s.x - inst.x_lo()).array() >= 0).all() && ((inst.x_hi() - s.x).array() >= 0).all());
    EXPECT_NEAR(s.objective, inst.objective(s.x, y), 1e-12);
  }
}

TEST(Subproblem, KktStationarityOnNominal) {
  const ProblemInstance inst = testing::nominal();
  for (const auto* ys : {"01110", "10100", "01001"}) {
    const BinaryVector y = bits(ys);
    const SubproblemSolution s = solve_subproblem(inst, y);
    ASSERT_EQ(s.status, SubproblemStatus::kFeasible);
    const ConvexPart& cp = inst.convex();
    const Vector g = cp.inequality(s.x) + inst.B() * to_real(y);
    // Complementary slackness, scaled by the multiplier size.
    for (Eigen::Index i = 0; i < g.size(); ++i) EXPECT_LE(std::abs(s.mu[i] * g[i]), 1e-4) << ys << " row " << i;
  }
}

TEST(Subproblem, InfeasibleWithX9Demand) {
  CaseStudyOptions opt;
  opt.x9_demand = 0.5;
  const ProblemInstance inst = testing::nominal(opt);
  int infeasible = 0;
  for (std::uint64_t code = 0; code < 32; ++code) {
    const BinaryVector y = binary_from_code(code, 5);
    if (!inst.satisfies_pure_binary(y)) continue;
    const SubproblemSolution s = solve_subproblem(inst, y);
    EXPECT_EQ(s.status == SubproblemStatus::kInfeasible, y[2] == 0) << to_string(y);
    if (s.status != SubproblemStatus::kInfeasible) continue;
    ++infeasible;
    const SubproblemSolution f = solve_feasibility(inst, y);
    ASSERT_EQ(f.status, SubproblemStatus::kInfeasible);
    EXPECT_GT(f.objective, 1e-6);
    const FeasibilityCut cut = make_feasibility_cut(f, inst);
    EXPECT_GE(affine_at(cut.v, cut.gamma, y), f.objective - 1e-6) << to_string(y);
  }
  EXPECT_EQ(infeasible, 6);
}

TEST(Feasibility, ZeroSlackWhenSubproblemFeasible) {
  const ProblemInstance inst = testing::nominal();
  for (const auto* ys : {"01110", "10000", "10101"}) {
    const SubproblemSolution f = solve_feasibility(inst, bits(ys));
    EXPECT_EQ(f.status, SubproblemStatus::kFeasible) << ys;
    EXPECT_LE(f.objective, 1e-6);
    EXPECT_GE(f.objective, 0.0);
    EXPECT_THROW(make_feasibility_cut(f, inst), ContractViolation);
  }
}

TEST(Subproblem, QuadraticFamilyNotBeatenBySampledFeasiblePoints) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int feasible_runs = 0, infeasible_runs = 0;
  for (int k = 0; k < 20; ++k) {
    const ProblemInstance inst = testing::random_quadratic(rng, 3);
    for (std::uint64_t code = 0; code < 8; ++code) {
      const BinaryVector y = binary_from_code(code, 3);
      const SubproblemSolution s = solve_subproblem(inst, y);
      ASSERT_NE(s.status, SubproblemStatus::kNumericalFailure);
      const SubproblemSolution f = solve_feasibility(inst, y);
      EXPECT_GE(f.objective, -1e-12);
      if (s.status == SubproblemStatus::kInfeasible) {
        ++infeasible_runs;
        EXPECT_GT(f.objective, 1e-6);
        continue;
      }
      ++feasible_runs;
      EXPECT_LE(f.objective, 1e-6);
      for (int t = 0; t < 200; ++t) {
        Vector x(3);
        for (int j = 0; j < 3; ++j) x[j] = u(rng);
        const Vector g = inst.convex().inequality(x) + inst.B() * to_real(y);
        if (g.maxCoeff() <= 0) EXPECT_GE(inst.objective(x, y), s.objective - 1e-6);
      }
    }
  }
  EXPECT_GT(feasible_runs, 0);
  EXPECT_GT(infeasible_runs, 0);
}

TEST(Subproblem, EqualityRowsAreSatisfied) {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 10; ++k) {
    const ProblemInstance inst = testing::random_quadratic(rng, 2, 2, true);
    for (std::uint64_t code = 0; code < 4; ++code) {
      const BinaryVector y = binary_from_code(code, 2);
      const SubproblemSolution s = solve_subproblem(inst, y);
      ASSERT_NE(s.status, SubproblemStatus::kNumericalFailure);
      if (s.status == SubproblemStatus::kFeasible) EXPECT_LE(s.max_eq_violation, 1e-6);
    }
  }
}

TEST(Subproblem, RejectsNonBinaryInput) {
  EXPECT_THROW(solve_subproblem(testing::nominal(), {0, 1, 2, 0, 0}), ContractViolation);
  EXPECT_THROW(solve_subproblem(testing::nominal(), {0, 1}), ContractViolation);
}

}  // namespace
}  // namespace gbdrl
