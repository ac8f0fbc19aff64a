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

// Benders master problem over the binaries:
//
//   min mu_b  s.t.  mu_b >= w_k y + beta_k   (k in K_O)
//                   v_k y + gamma_k <= 0     (k in K_F)
//                   K y <= b,  y in {0,1}^m
//
// Because mu_b is an epigraph variable, M is min over y of a max of affine
// functions. Small m is enumerated; larger m goes through a best-first
// branch and bound whose node bound is the interval minimum of each cut.

#ifndef GBDRL_MASTER_HPP_
#define GBDRL_MASTER_HPP_

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbdrl/core.hpp"
#include "gbdrl/nlp_solver.hpp"
#include "gbdrl/problem.hpp"

namespace gbdrl {

inline constexpr double kMasterTol = 1e-9;
inline constexpr double kDefaultMuLo = -1e6;
inline constexpr int kCutDumpSchema = 1;

/// mu_b >= w y + beta.
struct OptimalityCut {
  Vector w;
  double beta = 0;
};

/// v y + gamma <= 0.
struct FeasibilityCut {
  Vector v;
  double gamma = 0;
};

enum class CutKind { kOptimality, kFeasibility };

inline const char* to_string(CutKind k) { return k == CutKind::kOptimality ? "optimality" : "feasibility"; }

/// Fixed bits of a partial assignment, index -> 0/1.
using PartialAssignment = std::map<int, int>;

class MasterState {
 public:
  MasterState(Matrix K, Vector b, BinaryVector y_prev, double mu_lo = kDefaultMuLo)
      : K_(std::move(K)), b_(std::move(b)), y_prev_(std::move(y_prev)), mu_lo_(mu_lo) {
    m_ = static_cast<int>(K_.cols());
    validate(K_.rows() == b_.size(), "K rows must match b");
    require_binary(y_prev_, static_cast<std::size_t>(m_));
  }

  MasterState(const ProblemInstance& inst, BinaryVector y_prev, double mu_lo = kDefaultMuLo)
      : MasterState(inst.K(), inst.b(), std::move(y_prev), mu_lo) {}

  int m() const { return m_; }
  const Matrix& K() const { return K_; }
  const Vector& b() const { return b_; }
  double mu_lo() const { return mu_lo_; }
  const BinaryVector& y_prev() const { return y_prev_; }
  void set_y_prev(BinaryVector y) {
    require_binary(y, static_cast<std::size_t>(m_));
    y_prev_ = std::move(y);
  }

  const std::vector<OptimalityCut>& opt_cuts() const { return opt_; }
  const std::vector<FeasibilityCut>& feas_cuts() const { return feas_; }
  /// Insertion order across both lists: (kind, index within its list).
  const std::vector<std::pair<CutKind, int>>& history() const { return history_; }
  std::size_t num_cuts() const { return opt_.size() + feas_.size(); }

  int push(OptimalityCut c) {
    require(c.w.size() == m_ && c.w.allFinite() && std::isfinite(c.beta), "optimality cut must be finite, length m");
    opt_.push_back(std::move(c));
    history_.emplace_back(CutKind::kOptimality, static_cast<int>(opt_.size() - 1));
    return static_cast<int>(opt_.size() - 1);
  }

  int push(FeasibilityCut c) {
    require(c.v.size() == m_ && c.v.allFinite() && std::isfinite(c.gamma), "feasibility cut must be finite, length m");
    require(c.v.cwiseAbs().maxCoeff() > 0 || c.gamma != 0, "all-zero feasibility cut");
    feas_.push_back(std::move(c));
    history_.emplace_back(CutKind::kFeasibility, static_cast<int>(feas_.size() - 1));
    return static_cast<int>(feas_.size() - 1);
  }

 private:
  Matrix K_;
  Vector b_;
  BinaryVector y_prev_;
  double mu_lo_;
  int m_ = 0;
  std::vector<OptimalityCut> opt_;
  std::vector<FeasibilityCut> feas_;
  std::vector<std::pair<CutKind, int>> history_;
};

// Affine value in a fixed summation order so that every code path that
// evaluates a cut at the same y produces the same double.
inline double affine_at(const Vector& w, double c, const BinaryVector& y) {
  double v = c;
  for (std::size_t j = 0; j < y.size(); ++j)
    if (y[j]) v += w[static_cast<Eigen::Index>(j)];
  return v;
}

inline OptimalityCut make_optimality_cut(const SubproblemSolution& sol, const ProblemInstance& inst) {
  require(sol.status == SubproblemStatus::kFeasible, "optimality cut needs a feasible subproblem solution");
  const ConvexPart& cp = inst.convex();
  OptimalityCut cut;
  cut.w = inst.e() + inst.B().transpose() * sol.mu;
  cut.beta = cp.objective(sol.x) + sol.mu.dot(cp.inequality(sol.x));
  if (inst.p() > 0) {
    cut.w += inst.A().transpose() * sol.lambda;
    cut.beta += sol.lambda.dot(cp.equality(sol.x));
  }
  return cut;
}

inline FeasibilityCut make_feasibility_cut(const SubproblemSolution& sol, const ProblemInstance& inst,
                                           double tol_feas = 1e-6) {
  require(sol.kind == SubproblemKind::kFeasibility, "feasibility cut needs a slack-problem solution");
  require(sol.objective > tol_feas, "slack problem has zero slack; no feasibility cut needed");
  const ConvexPart& cp = inst.convex();
  FeasibilityCut cut;
  cut.v = inst.B().transpose() * sol.mu;
  cut.gamma = sol.mu.dot(cp.inequality(sol.x));
  if (inst.p() > 0) {
    cut.v += inst.A().transpose() * sol.lambda;
    cut.gamma += sol.lambda.dot(cp.equality(sol.x));
  }
  return cut;
}

inline int add_optimality_cut(MasterState& state, const SubproblemSolution& sol, const ProblemInstance& inst) {
  return state.push(make_optimality_cut(sol, inst));
}

inline int add_feasibility_cut(MasterState& state, const SubproblemSolution& sol, const ProblemInstance& inst,
                               double tol_feas = 1e-6) {
  return state.push(make_feasibility_cut(sol, inst, tol_feas));
}

/// Pure-binary rows and feasibility cuts only.
inline bool check_feasible(const MasterState& state, const BinaryVector& y) {
  require_binary(y, static_cast<std::size_t>(state.m()));
  for (Eigen::Index t = 0; t < state.K().rows(); ++t) {
    double lhs = 0;
    for (int j = 0; j < state.m(); ++j)
      if (y[static_cast<std::size_t>(j)]) lhs += state.K()(t, j);
    if (lhs > state.b()[t] + kMasterTol) return false;
  }
  for (const auto& c : state.feas_cuts())
    if (affine_at(c.v, c.gamma, y) > kMasterTol) return false;
  return true;
}

/// max_k (w_k y + beta_k); minus infinity when K_O is empty.
inline ExtendedReal eval_candidate_cost(const MasterState& state, const BinaryVector& y) {
  require_binary(y, static_cast<std::size_t>(state.m()));
  if (state.opt_cuts().empty()) return ExtendedReal::minus_infinity();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : state.opt_cuts()) best = std::max(best, affine_at(c.w, c.beta, y));
  return ExtendedReal::finite(best);
}

struct MasterResult {
  bool feasible = false;
  BinaryVector y;
  double mu_b = 0;
  /// Leaves evaluated (enumeration) or nodes popped (branch and bound).
  std::int64_t work = 0;
};

enum class MasterMethod { kAuto, kEnumerate, kBranchAndBound };

namespace detail {

inline double master_cost(const MasterState& state, const BinaryVector& y) {
  if (state.opt_cuts().empty()) return state.mu_lo();
  return eval_candidate_cost(state, y).value();
}

inline MasterResult enumerate_master(const MasterState& state, const PartialAssignment& fixed) {
  const int m = state.m();
  validate(m <= 20, "enumeration guard: m must be <= 20");
  MasterResult best;
  const std::uint64_t total = std::uint64_t{1} << m;
  for (std::uint64_t code = 0; code < total; ++code) {
    BinaryVector y = binary_from_code(code, m);
    bool match = true;
    for (const auto& [j, v] : fixed)
      if (y[static_cast<std::size_t>(j)] != v) match = false;
    if (!match) continue;
    ++best.work;
    if (!check_feasible(state, y)) continue;
    const double cost = master_cost(state, y);
    // Strict improvement keeps the lexicographically smallest minimizer.
    if (!best.feasible || cost < best.mu_b) {
      best.feasible = true;
      best.mu_b = cost;
      best.y = std::move(y);
    }
  }
  return best;
}

struct BbNode {
  double bound;
  BinaryVector prefix;  // bits 0..depth-1 decided
};

struct BbOrder {
  bool operator()(const BbNode& a, const BbNode& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.prefix.size() != b.prefix.size()) return a.prefix.size() < b.prefix.size();
    return a.prefix > b.prefix;
  }
};

// Interval minimum of c0 + w.y over completions of the prefix, honoring fixed bits.
inline double interval_min(const Vector& w, double c0, const BinaryVector& prefix, const std::vector<int>& fix) {
  double v = c0;
  const std::size_t m = fix.size();
  for (std::size_t j = 0; j < m; ++j) {
    const double wj = w[static_cast<Eigen::Index>(j)];
    if (j < prefix.size()) {
      if (prefix[j]) v += wj;
    } else if (fix[j] >= 0) {
      if (fix[j]) v += wj;
    } else {
      v += std::min(0.0, wj);
    }
  }
  return v;
}

inline MasterResult branch_and_bound_master(const MasterState& state, const PartialAssignment& fixed) {
  const int m = state.m();
  std::vector<int> fix(static_cast<std::size_t>(m), -1);
  for (const auto& [j, v] : fixed) fix[static_cast<std::size_t>(j)] = v;

  auto node_bound = [&](const BinaryVector& prefix, bool& prune) {
    prune = false;
    for (Eigen::Index t = 0; t < state.K().rows(); ++t) {
      const Vector row = state.K().row(t).transpose();
      if (interval_min(row, -state.b()[t], prefix, fix) > kMasterTol) prune = true;
    }
    for (const auto& c : state.feas_cuts())
      if (interval_min(c.v, c.gamma, prefix, fix) > kMasterTol) prune = true;
    if (state.opt_cuts().empty()) return state.mu_lo();
    double lb = -std::numeric_limits<double>::infinity();
    for (const auto& c : state.opt_cuts()) lb = std::max(lb, interval_min(c.w, c.beta, prefix, fix));
    return lb;
  };

  MasterResult best;
  std::priority_queue<BbNode, std::vector<BbNode>, BbOrder> open;
  bool prune = false;
  const double root = node_bound({}, prune);
  if (!prune) open.push({root, {}});
  while (!open.empty()) {
    BbNode node = open.top();
    open.pop();
    ++best.work;
    if (best.feasible) {
      if (node.bound > best.mu_b) break;
      // Equal bound: only a lexicographically smaller completion could win.
      if (node.bound == best.mu_b &&
          std::lexicographical_compare(best.y.begin(), best.y.begin() + static_cast<std::ptrdiff_t>(node.prefix.size()),
                                       node.prefix.begin(), node.prefix.end()))
        continue;
    }
    if (static_cast<int>(node.prefix.size()) == m) {
      if (!check_feasible(state, node.prefix)) continue;
      const double cost = master_cost(state, node.prefix);
      if (!best.feasible || cost < best.mu_b || (cost == best.mu_b && node.prefix < best.y)) {
        best.feasible = true;
        best.mu_b = cost;
        best.y = node.prefix;
      }
      continue;
    }
    const std::size_t j = node.prefix.size();
    for (int v = 0; v <= 1; ++v) {
      if (fix[j] >= 0 && fix[j] != v) continue;
      BinaryVector child = node.prefix;
      child.push_back(v);
      const double lb = node_bound(child, prune);
      if (prune) continue;
      if (best.feasible && lb > best.mu_b) continue;
      open.push({lb, std::move(child)});
    }
  }
  return best;
}

}  // namespace detail

inline MasterResult solve_reduced(const MasterState& state, const PartialAssignment& fixed,
                                  MasterMethod method = MasterMethod::kAuto) {
  for (const auto& [j, v] : fixed) {
    require(j >= 0 && j < state.m(), "fixed index out of range");
    require(v == 0 || v == 1, "fixed value must be 0 or 1");
  }
  if (method == MasterMethod::kAuto) method = state.m() <= 20 ? MasterMethod::kEnumerate : MasterMethod::kBranchAndBound;
  return method == MasterMethod::kEnumerate ? detail::enumerate_master(state, fixed)
                                            : detail::branch_and_bound_master(state, fixed);
}

inline MasterResult solve_exact(const MasterState& state, MasterMethod method = MasterMethod::kAuto) {
  return solve_reduced(state, {}, method);
}

// Cut dump: ordered records in insertion order.

inline nlohmann::json cuts_to_json(const MasterState& state) {
  nlohmann::json doc;
  doc["schema_version"] = kCutDumpSchema;
  doc["kind"] = "gbd_cuts";
  doc["m"] = state.m();
  doc["mu_lo"] = state.mu_lo();
  doc["cuts"] = nlohmann::json::array();
  for (const auto& [kind, idx] : state.history()) {
    nlohmann::json rec;
    rec["kind"] = to_string(kind);
    if (kind == CutKind::kOptimality) {
      rec["coefficients"] = to_std(state.opt_cuts()[static_cast<std::size_t>(idx)].w);
      rec["constant"] = state.opt_cuts()[static_cast<std::size_t>(idx)].beta;
    } else {
      rec["coefficients"] = to_std(state.feas_cuts()[static_cast<std::size_t>(idx)].v);
      rec["constant"] = state.feas_cuts()[static_cast<std::size_t>(idx)].gamma;
    }
    doc["cuts"].push_back(std::move(rec));
  }
  return doc;
}

/// Replays a cut dump into a fresh state built over (K, b).
inline MasterState cuts_from_json(const nlohmann::json& doc, const Matrix& K, const Vector& b,
                                  const BinaryVector& y_prev) {
  if (!doc.is_object() || doc.value("kind", "") != "gbd_cuts")
    throw SchemaError("not a cut dump");
  if (doc.value("schema_version", -1) != kCutDumpSchema) throw SchemaError("unsupported cut dump schema_version");
  MasterState state(K, b, y_prev, doc.value("mu_lo", kDefaultMuLo));
  if (doc.at("m").get<int>() != state.m()) throw SchemaError("cut dump m does not match the instance");
  for (const auto& rec : doc.at("cuts")) {
    const std::vector<double> coef = rec.at("coefficients").get<std::vector<double>>();
    if (static_cast<int>(coef.size()) != state.m()) throw SchemaError("cut coefficient vector has wrong length");
    const std::string kind = rec.at("kind").get<std::string>();
    if (kind == "optimality")
      state.push(OptimalityCut{from_std(coef), rec.at("constant").get<double>()});
    else if (kind == "feasibility")
      state.push(FeasibilityCut{from_std(coef), rec.at("constant").get<double>()});
    else
      throw SchemaError("unknown cut kind '" + kind + "'");
  }
  return state;
}

}  // namespace gbdrl

#endif  // GBDRL_MASTER_HPP_
