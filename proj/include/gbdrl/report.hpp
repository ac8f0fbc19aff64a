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

// Comparison reports. Everything here is a fold over traces: the same
// numbers come back when the traces are re-read from disk.

#ifndef GBDRL_REPORT_HPP_
#define GBDRL_REPORT_HPP_

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gbdrl/gbd_engine.hpp"
#include "gbdrl/verifier.hpp"

namespace gbdrl {

struct MeanStd {
  double mean = 0;
  double std = 0;
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  for (double x : v) r.std += (x - r.mean) * (x - r.mean);
  r.std = std::sqrt(r.std / static_cast<double>(v.size()));
  return r;
}

inline double relative_gap(double f, double f_ref) { return std::abs(f - f_ref) / std::max(1.0, std::abs(f_ref)); }

inline constexpr AssignmentMode kAllModes[] = {
    AssignmentMode::kSolver,           AssignmentMode::kFullAccepted,          AssignmentMode::kFullRejectedFeasibility,
    AssignmentMode::kFullRejectedCost, AssignmentMode::kPartialAccepted,       AssignmentMode::kPartialFallback,
    AssignmentMode::kNoAssignment,     AssignmentMode::kMasterInfeasible};

struct MethodSummary {
  std::string method;
  int instances = 0;
  int converged = 0;
  MeanStd master_time, total_time;
  double master_improvement_pct = 0;
  double total_improvement_pct = 0;
  MeanStd rel_gap;
  /// Instances whose objective is within 1e-6 (relative) of the reference.
  int matched = 0;
  int iterations = 0;
  int exact_solves = 0;
  /// Exact master solves over the reference method's total iterations.
  double exact_solve_ratio = 0;
  /// FullAccepted iterations over all iterations.
  double full_acceptance = 0;
  /// Variables fixed by confident probabilities over all variable decisions.
  double confident_fraction = 0;
  std::map<AssignmentMode, double> mode_freq;
  int trace_violations = 0;
};

/// traces[i] are the runs of one method, index-aligned with `reference`.
inline MethodSummary summarize(const std::string& method, const std::vector<GbdTrace>& traces,
                               const std::vector<GbdTrace>& reference) {
  require(traces.size() == reference.size(), "method and reference trace counts differ");
  MethodSummary s;
  s.method = method;
  s.instances = static_cast<int>(traces.size());
  std::vector<double> mt, tt, gaps, rmt, rtt;
  int ref_iters = 0;
  long long fixed = 0, decisions = 0;
  std::map<AssignmentMode, int> modes;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const GbdTrace& t = traces[i];
    const GbdTrace& r = reference[i];
    s.converged += t.converged;
    mt.push_back(t.master_time());
    tt.push_back(t.total_time);
    rmt.push_back(r.master_time());
    rtt.push_back(r.total_time);
    if (t.converged && r.converged) {
      const double g = relative_gap(t.objective, r.objective);
      gaps.push_back(g);
      s.matched += g <= 1e-6;
    }
    s.iterations += t.iterations;
    ref_iters += r.iterations;
    s.exact_solves += t.exact_master_solves();
    for (const auto& row : t.rows) {
      ++modes[row.mode];
      fixed += row.fixed_count;
      decisions += static_cast<long long>(row.y.size());
    }
    s.trace_violations += !gbdrl::trace_violations(t).empty();
  }
  s.master_time = mean_std(mt);
  s.total_time = mean_std(tt);
  s.rel_gap = mean_std(gaps);
  const double rm = mean_std(rmt).mean, rt = mean_std(rtt).mean;
  s.master_improvement_pct = rm > 0 ? 100.0 * (rm - s.master_time.mean) / rm : 0.0;
  s.total_improvement_pct = rt > 0 ? 100.0 * (rt - s.total_time.mean) / rt : 0.0;
  s.exact_solve_ratio = ref_iters > 0 ? static_cast<double>(s.exact_solves) / ref_iters : 0.0;
  for (auto m : kAllModes) s.mode_freq[m] = s.iterations ? static_cast<double>(modes[m]) / s.iterations : 0.0;
  s.full_acceptance = s.mode_freq[AssignmentMode::kFullAccepted];
  s.confident_fraction = decisions ? static_cast<double>(fixed) / static_cast<double>(decisions) : 0.0;
  return s;
}

inline std::string summary_csv(const std::vector<MethodSummary>& rows) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "method,instances,converged,master_time_mean,master_time_std,total_time_mean,total_time_std,"
        "master_improvement_pct,total_improvement_pct,rel_gap_mean,rel_gap_std,matched,iterations,exact_solves,"
        "exact_solve_ratio,full_acceptance,confident_fraction,trace_violations";
  for (auto m : kAllModes) os << ",freq_" << to_string(m);
  os << '\n';
  for (const auto& s : rows) {
    os << s.method << ',' << s.instances << ',' << s.converged << ',' << s.master_time.mean << ','
       << s.master_time.std << ',' << s.total_time.mean << ',' << s.total_time.std << ','
       << s.master_improvement_pct << ',' << s.total_improvement_pct << ',' << s.rel_gap.mean << ','
       << s.rel_gap.std << ',' << s.matched << ',' << s.iterations << ',' << s.exact_solves << ','
       << s.exact_solve_ratio << ',' << s.full_acceptance << ',' << s.confident_fraction << ','
       << s.trace_violations;
    for (auto m : kAllModes) os << ',' << s.mode_freq.at(m);
    os << '\n';
  }
  return os.str();
}

struct GapCurve {
  int median_iterations = 0;
  int instances = 0;
  std::vector<double> median_gap;
};

inline double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Per-iteration median of UBD - LBD over the runs whose iteration count
/// equals the (lower) median count. Iterations with an infinite bound are NaN.
inline GapCurve median_gap_curve(const std::vector<GbdTrace>& traces) {
  GapCurve c;
  if (traces.empty()) return c;
  std::vector<int> its;
  for (const auto& t : traces) its.push_back(t.iterations);
  std::sort(its.begin(), its.end());
  c.median_iterations = its[(its.size() - 1) / 2];
  std::vector<const GbdTrace*> sel;
  for (const auto& t : traces)
    if (t.iterations == c.median_iterations) sel.push_back(&t);
  c.instances = static_cast<int>(sel.size());
  for (int k = 0; k < c.median_iterations; ++k) {
    std::vector<double> g;
    for (const auto* t : sel) {
      const TraceRow& r = t->rows[static_cast<std::size_t>(k)];
      if (r.ubd.is_finite() && r.lbd.is_finite()) g.push_back(r.ubd.value() - r.lbd.value());
    }
    c.median_gap.push_back(median_of(g));
  }
  return c;
}

inline std::string curves_csv(const std::vector<std::pair<std::string, GapCurve>>& curves) {
  std::ostringstream os;
  os << std::setprecision(10) << "method,iteration,median_gap,instances\n";
  for (const auto& [m, c] : curves)
    for (std::size_t k = 0; k < c.median_gap.size(); ++k)
      os << m << ',' << k << ',' << c.median_gap[k] << ',' << c.instances << '\n';
  return os.str();
}

}  // namespace gbdrl

#endif  // GBDRL_REPORT_HPP_
