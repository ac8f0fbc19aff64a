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

// Reference solver: enumerate every y allowed by K y <= b and solve S(y).

#ifndef GBDRL_BRUTE_FORCE_HPP_
#define GBDRL_BRUTE_FORCE_HPP_

#include <cstdint>
#include <limits>
#include <vector>

#include "gbdrl/core.hpp"
#include "gbdrl/nlp_solver.hpp"
#include "gbdrl/problem.hpp"

namespace gbdrl {

struct BruteForceResult {
  bool feasible = false;
  BinaryVector y;
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  /// Every enumerated y that passed K y <= b, with its subproblem outcome.
  std::vector<SubproblemSolution> evaluated;
};

inline BruteForceResult brute_force_solve(const ProblemInstance& inst, const NlpOptions& opt = {}) {
  validate(inst.m() <= 20, "enumeration guard: brute force needs m <= 20");
  BruteForceResult res;
  const std::uint64_t total = std::uint64_t{1} << inst.m();
  for (std::uint64_t code = 0; code < total; ++code) {
    BinaryVector y = binary_from_code(code, inst.m());
    if (!inst.satisfies_pure_binary(y)) continue;
    SubproblemSolution sol = solve_subproblem(inst, y, opt);
    if (sol.status == SubproblemStatus::kNumericalFailure)
      throw NumericalError("subproblem solver failed at y=" + to_string(y));
    if (sol.status == SubproblemStatus::kFeasible && sol.objective < res.objective) {
      res.feasible = true;
      res.y = y;
      res.x = sol.x;
      res.objective = sol.objective;
    }
    res.evaluated.push_back(std::move(sol));
  }
  return res;
}

}  // namespace gbdrl

#endif  // GBDRL_BRUTE_FORCE_HPP_
