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

// Deployment-time screening of agent proposals before they reach the
// subproblem: confident bits are fixed, the result is checked against the
// feasibility cuts and the incumbent, and the exact master takes over on
// any rejection.

#ifndef GBDRL_VERIFIER_HPP_
#define GBDRL_VERIFIER_HPP_

#include <optional>
#include <string>
#include <vector>

#include "gbdrl/core.hpp"
#include "gbdrl/master.hpp"

namespace gbdrl {

struct ConfidenceConfig {
  double delta1 = 0.10;
  double delta2 = 0.90;

  void check() const {
    validate(0 <= delta1 && delta1 <= delta2 && delta2 <= 1, "confidence thresholds need 0 <= delta1 <= delta2 <= 1");
  }
};

enum class AssignmentMode {
  kFullAccepted,
  kFullRejectedFeasibility,
  kFullRejectedCost,
  kPartialAccepted,
  kPartialFallback,
  kNoAssignment,
  kMasterInfeasible,
  /// Classical GBD: no agent involved.
  kSolver,
};

inline const char* to_string(AssignmentMode m) {
  switch (m) {
    case AssignmentMode::kFullAccepted: return "full_accepted";
    case AssignmentMode::kFullRejectedFeasibility: return "full_rejected_feasibility";
    case AssignmentMode::kFullRejectedCost: return "full_rejected_cost";
    case AssignmentMode::kPartialAccepted: return "partial_accepted";
    case AssignmentMode::kPartialFallback: return "partial_fallback";
    case AssignmentMode::kNoAssignment: return "no_assignment";
    case AssignmentMode::kMasterInfeasible: return "master_infeasible";
    default: return "solver";
  }
}

inline std::optional<AssignmentMode> assignment_mode_from_string(const std::string& s) {
  for (auto m : {AssignmentMode::kFullAccepted, AssignmentMode::kFullRejectedFeasibility,
                 AssignmentMode::kFullRejectedCost, AssignmentMode::kPartialAccepted, AssignmentMode::kPartialFallback,
                 AssignmentMode::kNoAssignment, AssignmentMode::kMasterInfeasible, AssignmentMode::kSolver})
    if (s == to_string(m)) return m;
  return std::nullopt;
}

inline bool agent_accepted(AssignmentMode m) {
  return m == AssignmentMode::kFullAccepted || m == AssignmentMode::kPartialAccepted;
}

struct AssignmentOutcome {
  BinaryVector y;
  /// Minus infinity only for a full assignment accepted with K_O empty.
  ExtendedReal mu_b = ExtendedReal::minus_infinity();
  AssignmentMode mode = AssignmentMode::kNoAssignment;
  int fixed_count = 0;
  int exact_solves = 0;
  int reduced_solves = 0;
};

struct ThresholdResult {
  PartialAssignment fixed;
  std::vector<int> free;
};

inline ThresholdResult threshold(const Vector& p, const ConfidenceConfig& cfg) {
  ThresholdResult r;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    require(p[i] >= 0 && p[i] <= 1, "probabilities must lie in [0,1]");
    if (p[i] <= cfg.delta1)
      r.fixed[static_cast<int>(i)] = 0;
    else if (p[i] >= cfg.delta2)
      r.fixed[static_cast<int>(i)] = 1;
    else
      r.free.push_back(static_cast<int>(i));
  }
  return r;
}

inline ExtendedReal monotone_lbd(const ExtendedReal& lbd_prev, const ExtendedReal& mu_b) { return max(lbd_prev, mu_b); }

inline AssignmentOutcome confidence_based_assignment(const Vector& p, const MasterState& state, const ExtendedReal& ubd,
                                                     const ConfidenceConfig& cfg = {},
                                                     MasterMethod method = MasterMethod::kAuto) {
  cfg.check();
  require(p.size() == state.m(), "probability vector must have length m");
  const ThresholdResult th = threshold(p, cfg);
  AssignmentOutcome out;
  out.fixed_count = static_cast<int>(th.fixed.size());

  auto exact = [&](AssignmentMode mode) {
    ++out.exact_solves;
    const MasterResult r = solve_exact(state, method);
    if (!r.feasible) {
      out.mode = AssignmentMode::kMasterInfeasible;
      out.y.clear();
      return;
    }
    out.mode = mode;
    out.y = r.y;
    out.mu_b = ExtendedReal::finite(r.mu_b);
  };

  if (th.free.empty()) {
    BinaryVector y(static_cast<std::size_t>(state.m()));
    for (const auto& [j, v] : th.fixed) y[static_cast<std::size_t>(j)] = v;
    if (!check_feasible(state, y)) {
      exact(AssignmentMode::kFullRejectedFeasibility);
      return out;
    }
    const ExtendedReal mu_hat = eval_candidate_cost(state, y);
    if (mu_hat <= ubd) {
      out.mode = AssignmentMode::kFullAccepted;
      out.y = std::move(y);
      out.mu_b = mu_hat;
    } else {
      exact(AssignmentMode::kFullRejectedCost);
    }
    return out;
  }
  if (th.fixed.empty()) {
    exact(AssignmentMode::kNoAssignment);
    return out;
  }
  ++out.reduced_solves;
  const MasterResult r = solve_reduced(state, th.fixed, method);
  if (!r.feasible) {
    exact(AssignmentMode::kPartialFallback);
    return out;
  }
  const ExtendedReal mu_bar = ExtendedReal::finite(r.mu_b);
  if (mu_bar <= ubd) {
    out.mode = AssignmentMode::kPartialAccepted;
    out.y = r.y;
    out.mu_b = mu_bar;
  } else {
    exact(AssignmentMode::kPartialFallback);
  }
  return out;
}

}  // namespace gbdrl

#endif  // GBDRL_VERIFIER_HPP_
