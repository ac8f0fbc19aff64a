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

// The decomposition loop, classical and agent-assisted.
//
// Classical: subproblem at y^k, one cut, exact master for y^{k+1}, LBD from
// the master. Hybrid: subproblem, cut, encode, actor probabilities,
// confidence-based assignment, LBD <- max(LBD, mu_b).

#ifndef GBDRL_GBD_ENGINE_HPP_
#define GBDRL_GBD_ENGINE_HPP_

#include <chrono>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gbdrl/core.hpp"
#include "gbdrl/graph_encode.hpp"
#include "gbdrl/master.hpp"
#include "gbdrl/neuralnet.hpp"
#include "gbdrl/nlp_solver.hpp"
#include "gbdrl/problem.hpp"
#include "gbdrl/verifier.hpp"

namespace gbdrl {

inline constexpr int kTraceSchema = 1;

struct GbdLimits {
  double eps = 1e-4;
  int max_iterations = 100;
  double max_seconds = 300;
  double mu_lo = kDefaultMuLo;
  MasterMethod master_method = MasterMethod::kAuto;
  NlpOptions nlp;
};

enum class GbdStatus { kConverged, kIterationLimit, kTimeLimit, kInfeasible, kSolverFailure };

inline const char* to_string(GbdStatus s) {
  switch (s) {
    case GbdStatus::kConverged: return "converged";
    case GbdStatus::kIterationLimit: return "iteration_limit";
    case GbdStatus::kTimeLimit: return "time_limit";
    case GbdStatus::kInfeasible: return "infeasible";
    default: return "solver_failure";
  }
}

struct TraceRow {
  int iter = 0;
  /// Assignment sent to the subproblem this iteration.
  BinaryVector y;
  SubproblemStatus sp_status = SubproblemStatus::kFeasible;
  CutKind cut = CutKind::kOptimality;
  double sp_objective = 0;
  int sp_newton = 0;
  ExtendedReal ubd = ExtendedReal::plus_infinity();
  ExtendedReal lbd = ExtendedReal::minus_infinity();
  AssignmentMode mode = AssignmentMode::kSolver;
  int fixed_count = 0;
  int exact_solves = 0;
  int reduced_solves = 0;
  double master_time = 0;
  double sp_time = 0;
};

struct GbdTrace {
  std::string method;  // "classical" or "hybrid"
  double eps = 1e-4;
  std::vector<TraceRow> rows;
  GbdStatus status = GbdStatus::kIterationLimit;
  bool converged = false;
  double objective = 0;
  BinaryVector y_best;
  int iterations = 0;
  double total_time = 0;

  int exact_master_solves() const {
    int s = 0;
    for (const auto& r : rows) s += r.exact_solves;
    return s;
  }
  double master_time() const {
    double s = 0;
    for (const auto& r : rows) s += r.master_time;
    return s;
  }
  int count(AssignmentMode m) const {
    int c = 0;
    for (const auto& r : rows) c += r.mode == m;
    return c;
  }
};

struct GbdResult {
  GbdStatus status = GbdStatus::kIterationLimit;
  BinaryVector y;
  Vector x;
  double objective = std::numeric_limits<double>::infinity();
  GbdTrace trace;
  /// Final master state (cuts), for dumps and replay.
  std::optional<MasterState> master;
};

/// Maps the current master state (already encoded) to probabilities.
using Policy = std::function<Vector(const MasterState&, const BipartiteGraph&)>;

/// Called after every iteration's cut with the state the next decision sees.
using IterationObserver = std::function<void(const MasterState&, const TraceRow&)>;

inline Policy actor_policy(const NetParams& actor) {
  return [&actor](const MasterState&, const BipartiteGraph& g) { return actor_forward(actor, g); };
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct SubproblemStep {
  SubproblemSolution sol;
  bool ok = true;
};

// Solves S(y); on infeasibility solves F(y). Appends the cut and updates the incumbent.
inline bool subproblem_and_cut(const ProblemInstance& inst, const BinaryVector& y, MasterState& state,
                               const GbdLimits& lim, TraceRow& row, GbdResult& res, ExtendedReal& ubd) {
  SubproblemSolution sol = solve_subproblem(inst, y, lim.nlp);
  row.sp_time = sol.wall_time;
  row.sp_newton = sol.iterations;
  row.sp_status = sol.status;
  if (sol.status == SubproblemStatus::kNumericalFailure) return false;
  if (sol.status == SubproblemStatus::kFeasible) {
    add_optimality_cut(state, sol, inst);
    row.cut = CutKind::kOptimality;
    row.sp_objective = sol.objective;
    if (!ubd.is_finite() || sol.objective < ubd.value()) {
      ubd = ExtendedReal::finite(sol.objective);
      res.y = y;
      res.x = sol.x;
      res.objective = sol.objective;
    }
    return true;
  }
  SubproblemSolution fsol = solve_feasibility(inst, y, lim.nlp);
  row.sp_time += fsol.wall_time;
  row.sp_newton += fsol.iterations;
  if (fsol.status != SubproblemStatus::kInfeasible) return false;
  add_feasibility_cut(state, fsol, inst, lim.nlp.tol_feas);
  row.cut = CutKind::kFeasibility;
  row.sp_objective = fsol.objective;
  return true;
}

inline GbdResult run_gbd(const ProblemInstance& inst, const BinaryVector& y0, const GbdLimits& lim,
                         const Policy* policy, const ConfidenceConfig& cfg, const IterationObserver& observer) {
  require_binary(y0, static_cast<std::size_t>(inst.m()));
  require(inst.satisfies_pure_binary(y0), "initial assignment violates K y <= b");
  cfg.check();
  const auto t0 = std::chrono::steady_clock::now();
  GbdResult res;
  res.trace.method = policy ? "hybrid" : "classical";
  res.trace.eps = lim.eps;
  MasterState state(inst, y0, lim.mu_lo);
  ExtendedReal ubd = ExtendedReal::plus_infinity();
  ExtendedReal lbd = ExtendedReal::minus_infinity();
  BinaryVector y = y0;
  res.status = GbdStatus::kIterationLimit;
  for (int k = 0; k < lim.max_iterations; ++k) {
    if (bound_gap(ubd, lbd) <= lim.eps) {
      res.status = GbdStatus::kConverged;
      break;
    }
    if (detail::seconds_since(t0) > lim.max_seconds) {
      res.status = GbdStatus::kTimeLimit;
      break;
    }
    TraceRow row;
    row.iter = k;
    row.y = y;
    if (!subproblem_and_cut(inst, y, state, lim, row, res, ubd)) {
      res.status = GbdStatus::kSolverFailure;
      row.ubd = ubd;
      row.lbd = lbd;
      res.trace.rows.push_back(row);
      break;
    }
    state.set_y_prev(y);
    const auto tm = std::chrono::steady_clock::now();
    if (!policy) {
      row.mode = AssignmentMode::kSolver;
      row.exact_solves = 1;
      const MasterResult mr = solve_exact(state, lim.master_method);
      row.master_time = detail::seconds_since(tm);
      if (!mr.feasible) {
        row.mode = AssignmentMode::kMasterInfeasible;
      } else {
        y = mr.y;
        lbd = monotone_lbd(lbd, ExtendedReal::finite(mr.mu_b));
      }
    } else {
      const BipartiteGraph g = encode_normalized(state);
      const Vector p = (*policy)(state, g);
      const AssignmentOutcome out = confidence_based_assignment(p, state, ubd, cfg, lim.master_method);
      row.master_time = detail::seconds_since(tm);
      row.mode = out.mode;
      row.fixed_count = out.fixed_count;
      row.exact_solves = out.exact_solves;
      row.reduced_solves = out.reduced_solves;
      if (out.mode != AssignmentMode::kMasterInfeasible) {
        y = out.y;
        lbd = monotone_lbd(lbd, out.mu_b);
      }
    }
    row.ubd = ubd;
    row.lbd = lbd;
    res.trace.rows.push_back(row);
    if (observer) observer(state, row);
    if (row.mode == AssignmentMode::kMasterInfeasible) {
      // No y left to try: the incumbent is optimal if one exists.
      res.status = ubd.is_finite() ? GbdStatus::kConverged : GbdStatus::kInfeasible;
      if (ubd.is_finite()) lbd = ubd;
      break;
    }
  }
  if (res.status == GbdStatus::kIterationLimit && bound_gap(ubd, lbd) <= lim.eps)
    res.status = GbdStatus::kConverged;
  res.trace.status = res.status;
  res.trace.converged = res.status == GbdStatus::kConverged;
  res.trace.objective = res.objective;
  res.trace.y_best = res.y;
  res.trace.iterations = static_cast<int>(res.trace.rows.size());
  res.trace.total_time = detail::seconds_since(t0);
  res.master = std::move(state);
  return res;
}

}  // namespace detail

/// Lexicographically smallest y with K y <= b.
inline BinaryVector default_initial_assignment(const ProblemInstance& inst) {
  auto y = first_pure_binary_feasible(inst);
  if (!y) throw ValidationError("no binary assignment satisfies K y <= b");
  return *y;
}

inline GbdResult solve_classical(const ProblemInstance& inst, const BinaryVector& y0, const GbdLimits& lim = {},
                                 const IterationObserver& observer = {}) {
  return detail::run_gbd(inst, y0, lim, nullptr, ConfidenceConfig{}, observer);
}

inline GbdResult solve_hybrid(const ProblemInstance& inst, const BinaryVector& y0, const Policy& policy,
                              const ConfidenceConfig& cfg = {}, const GbdLimits& lim = {},
                              const IterationObserver& observer = {}) {
  return detail::run_gbd(inst, y0, lim, &policy, cfg, observer);
}

inline GbdResult solve_hybrid(const ProblemInstance& inst, const BinaryVector& y0, const NetParams& actor,
                              const ConfidenceConfig& cfg = {}, const GbdLimits& lim = {}) {
  require(actor.arch().head == HeadKind::kActor && actor.arch().m == inst.m(),
          "actor weights do not match the instance's binary count");
  return solve_hybrid(inst, y0, actor_policy(actor), cfg, lim);
}

// Trace files: a header line, one line per iteration, one result line.

inline nlohmann::json extended_to_json(const ExtendedReal& v) {
  if (v.is_finite()) return v.value();
  return v.to_string();
}

inline ExtendedReal extended_from_json(const nlohmann::json& j) {
  if (j.is_number()) return ExtendedReal::finite(j.get<double>());
  const std::string s = j.get<std::string>();
  if (s == "-inf") return ExtendedReal::minus_infinity();
  if (s == "+inf") return ExtendedReal::plus_infinity();
  throw SchemaError("bad bound value '" + s + "'");
}

inline void write_trace(std::ostream& os, const GbdTrace& t, const std::string& manifest_digest = "") {
  nlohmann::json head = {{"type", "header"},        {"schema_version", kTraceSchema}, {"kind", "gbd_trace"},
                         {"method", t.method},      {"eps", t.eps},                   {"manifest", manifest_digest}};
  os << head.dump() << '\n';
  for (const auto& r : t.rows) {
    nlohmann::json j = {{"type", "iteration"},
                        {"iter", r.iter},
                        {"y", to_string(r.y)},
                        {"sp_status", to_string(r.sp_status)},
                        {"cut", to_string(r.cut)},
                        {"sp_objective", r.sp_objective},
                        {"sp_newton", r.sp_newton},
                        {"ubd", extended_to_json(r.ubd)},
                        {"lbd", extended_to_json(r.lbd)},
                        {"mode", to_string(r.mode)},
                        {"fixed_count", r.fixed_count},
                        {"exact_solves", r.exact_solves},
                        {"reduced_solves", r.reduced_solves},
                        {"master_time", r.master_time},
                        {"sp_time", r.sp_time}};
    os << j.dump() << '\n';
  }
  nlohmann::json tail = {{"type", "result"},       {"status", to_string(t.status)}, {"converged", t.converged},
                         {"objective", t.converged || std::isfinite(t.objective) ? nlohmann::json(t.objective)
                                                                                 : nlohmann::json("+inf")},
                         {"y", to_string(t.y_best)}, {"iterations", t.iterations}, {"total_time", t.total_time}};
  os << tail.dump() << '\n';
}

inline BinaryVector binary_from_string(const std::string& s) {
  BinaryVector y;
  for (char c : s) {
    if (c != '0' && c != '1') throw SchemaError("binary string contains '" + std::string(1, c) + "'");
    y.push_back(c - '0');
  }
  return y;
}

inline GbdTrace read_trace(std::istream& is) {
  GbdTrace t;
  std::string line;
  bool header = false, result = false;
  auto status_from = [](const std::string& s) {
    for (auto st : {GbdStatus::kConverged, GbdStatus::kIterationLimit, GbdStatus::kTimeLimit, GbdStatus::kInfeasible,
                    GbdStatus::kSolverFailure})
      if (s == to_string(st)) return st;
    throw SchemaError("unknown status '" + s + "'");
  };
  auto sp_from = [](const std::string& s) {
    for (auto st : {SubproblemStatus::kFeasible, SubproblemStatus::kInfeasible, SubproblemStatus::kNumericalFailure})
      if (s == to_string(st)) return st;
    throw SchemaError("unknown subproblem status '" + s + "'");
  };
  try {
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      const nlohmann::json j = nlohmann::json::parse(line);
      const std::string type = j.at("type").get<std::string>();
      if (type == "header") {
        if (j.at("kind").get<std::string>() != "gbd_trace") throw SchemaError("not a trace file");
        if (j.at("schema_version").get<int>() != kTraceSchema) throw SchemaError("unsupported trace schema_version");
        t.method = j.at("method").get<std::string>();
        t.eps = j.at("eps").get<double>();
        header = true;
      } else if (type == "iteration") {
        if (!header) throw SchemaError("trace iteration before header");
        TraceRow r;
        r.iter = j.at("iter").get<int>();
        r.y = binary_from_string(j.at("y").get<std::string>());
        r.sp_status = sp_from(j.at("sp_status").get<std::string>());
        r.cut = j.at("cut").get<std::string>() == "optimality" ? CutKind::kOptimality : CutKind::kFeasibility;
        r.sp_objective = j.at("sp_objective").get<double>();
        r.sp_newton = j.at("sp_newton").get<int>();
        r.ubd = extended_from_json(j.at("ubd"));
        r.lbd = extended_from_json(j.at("lbd"));
        auto mode = assignment_mode_from_string(j.at("mode").get<std::string>());
        if (!mode) throw SchemaError("unknown assignment mode");
        r.mode = *mode;
        r.fixed_count = j.at("fixed_count").get<int>();
        r.exact_solves = j.at("exact_solves").get<int>();
        r.reduced_solves = j.at("reduced_solves").get<int>();
        r.master_time = j.at("master_time").get<double>();
        r.sp_time = j.at("sp_time").get<double>();
        t.rows.push_back(std::move(r));
      } else if (type == "result") {
        t.status = status_from(j.at("status").get<std::string>());
        t.converged = j.at("converged").get<bool>();
        const auto& obj = j.at("objective");
        t.objective = obj.is_number() ? obj.get<double>() : std::numeric_limits<double>::infinity();
        t.y_best = binary_from_string(j.at("y").get<std::string>());
        t.iterations = j.at("iterations").get<int>();
        t.total_time = j.at("total_time").get<double>();
        result = true;
      } else {
        throw SchemaError("unknown trace row type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("malformed trace: ") + e.what());
  }
  if (!header || !result) throw SchemaError("trace is missing its header or result row");
  return t;
}

/// Bound bookkeeping violations in a trace; empty when the trace is sound.
inline std::vector<std::string> trace_violations(const GbdTrace& t) {
  std::vector<std::string> v;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const TraceRow& r = t.rows[i];
    if (i > 0) {
      if (t.rows[i - 1].ubd < r.ubd) v.push_back("UBD increased at iteration " + std::to_string(r.iter));
      if (r.lbd < t.rows[i - 1].lbd) v.push_back("LBD decreased at iteration " + std::to_string(r.iter));
    }
    if (r.ubd.is_finite() && r.lbd.is_finite() && r.lbd.value() > r.ubd.value() + t.eps)
      v.push_back("LBD exceeds UBD + eps at iteration " + std::to_string(r.iter));
    if (r.ubd.is_finite() && r.lbd.is_plus_infinity()) v.push_back("LBD is +inf at iteration " + std::to_string(r.iter));
  }
  if (t.converged && !t.rows.empty()) {
    const TraceRow& last = t.rows.back();
    if (!(last.mode == AssignmentMode::kMasterInfeasible) && !(bound_gap(last.ubd, last.lbd) <= t.eps))
      v.push_back("trace marked converged with gap above eps");
  }
  return v;
}

}  // namespace gbdrl

#endif  // GBDRL_GBD_ENGINE_HPP_
