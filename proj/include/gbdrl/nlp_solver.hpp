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

// Fixed-y subproblems. Both S(y) and the slack problem F(y) are solved as
// one elastic barrier program over (x, s):
//
//   min  w_f * f(x) + rho * sum_i s_i
//   s.t. g_i(x) + (B y)_i <= s_i,  s_i >= 0,  h(x) + A y = 0,  x in X
//
// F(y) is exactly w_f = 0, rho = 1 (s plays the role of alpha). S(y) uses
// w_f = 1 and a large rho, so the program always has a strict interior even
// when S(y) itself has none (x pinned to a bound by a switched-off unit).
// Multipliers are recovered as mu_i = 1 / (t * slack_i), lambda = nu / t.

#ifndef GBDRL_NLP_SOLVER_HPP_
#define GBDRL_NLP_SOLVER_HPP_

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>

#include "gbdrl/core.hpp"
#include "gbdrl/problem.hpp"

namespace gbdrl {

enum class SubproblemStatus { kFeasible, kInfeasible, kNumericalFailure };
enum class SubproblemKind { kOptimality, kFeasibility };

inline const char* to_string(SubproblemStatus s) {
  switch (s) {
    case SubproblemStatus::kFeasible: return "feasible";
    case SubproblemStatus::kInfeasible: return "infeasible";
    default: return "numerical_failure";
  }
}

struct SubproblemSolution {
  SubproblemKind kind = SubproblemKind::kOptimality;
  SubproblemStatus status = SubproblemStatus::kNumericalFailure;
  BinaryVector y;
  Vector x;
  /// Z(y) for a feasible S(y); total slack otherwise.
  double objective = 0;
  Vector lambda;
  Vector mu;
  int iterations = 0;
  double wall_time = 0;
  /// max_i g_i(x) + (B y)_i and max |h(x) + A y| at the returned x.
  double max_violation = 0;
  double max_eq_violation = 0;
};

struct NlpOptions {
  double tol_feas = 1e-6;
  double tol_comp = 1e-5;
  double t_initial = 1.0;
  double t_factor = 10.0;
  /// Stop when (number of barrier terms) / t falls to this value.
  double duality_gap = 1e-8;
  int max_newton_per_stage = 200;
  double armijo = 1e-4;
  double backtrack = 0.5;
  double newton_tol = 1e-10;
  /// Elastic penalty for S(y); must exceed the largest KKT multiplier.
  double elastic_penalty = 1e4;
  std::optional<Vector> warm_start;
  /// Line-delimited iterate log, one JSON object per Newton step.
  std::ostream* log = nullptr;
};

namespace detail {

struct BarrierResult {
  Vector x, s, lambda, mu;
  int iterations = 0;
  bool converged = false;
};

class ElasticBarrier {
 public:
  ElasticBarrier(const ProblemInstance& inst, const BinaryVector& y, double objective_weight,
                 double slack_penalty, const NlpOptions& opt)
      : inst_(inst), cp_(inst.convex()), opt_(opt), wf_(objective_weight), rho_(slack_penalty) {
    const Vector yr = to_real(y);
    by_ = inst.B() * yr;
    ay_ = inst.p() > 0 ? Vector(inst.A() * yr) : Vector::Zero(0);
    n_ = inst.n();
    q_ = inst.q();
    p_ = inst.p();
    nterms_ = 2 * q_ + 2 * n_ + inst.l();
  }

  BarrierResult solve() {
    Vector x = inst_.x_interior();
    if (opt_.warm_start && opt_.warm_start->size() == n_ &&
        ((*opt_.warm_start - inst_.x_lo()).array() > 1e-12).all() &&
        ((inst_.x_hi() - *opt_.warm_start).array() > 1e-12).all() &&
        (inst_.l() == 0 || ((inst_.d() - inst_.E() * *opt_.warm_start).array() > 1e-12).all()))
      x = *opt_.warm_start;
    const Vector g0 = cp_.inequality(x) + by_;
    Vector s(q_);
    for (int i = 0; i < q_; ++i) s[i] = std::max(0.0, g0[i]) + 1.0;
    Vector nu = Vector::Zero(p_);

    BarrierResult res;
    // Start where the slack penalty weighs about as much as the barrier.
    double t = std::min(opt_.t_initial, 1.0 / rho_);
    bool last_stage_converged = false;
    while (true) {
      last_stage_converged = center(x, s, nu, t, res.iterations);
      if (nterms_ / t <= opt_.duality_gap) break;
      t *= opt_.t_factor;
    }
    // Refresh nu at the final point so lambda matches the returned x.
    Vector dx, ds, nu_final;
    if (p_ > 0 && newton_direction(x, s, t, dx, ds, nu_final)) nu = nu_final;

    res.x = x;
    res.s = s;
    res.lambda = nu / t;
    const Vector g = cp_.inequality(x) + by_;
    res.mu.resize(q_);
    for (int i = 0; i < q_; ++i) res.mu[i] = 1.0 / (t * (s[i] - g[i]));
    res.converged = last_stage_converged && x.allFinite() && res.mu.allFinite() && res.lambda.allFinite();
    return res;
  }

 private:
  double phi(const Vector& x, const Vector& s, double t) const {
    const Vector g = cp_.inequality(x) + by_;
    double val = t * rho_ * s.sum();
    if (wf_ != 0) val += t * wf_ * cp_.objective(x);
    for (int i = 0; i < q_; ++i) {
      const double sig = s[i] - g[i];
      if (!(sig > 0) || !(s[i] > 0)) return std::numeric_limits<double>::infinity();
      val -= std::log(sig) + std::log(s[i]);
    }
    for (int j = 0; j < n_; ++j) {
      const double a = x[j] - inst_.x_lo()[j], b = inst_.x_hi()[j] - x[j];
      if (!(a > 0) || !(b > 0)) return std::numeric_limits<double>::infinity();
      val -= std::log(a) + std::log(b);
    }
    if (inst_.l() > 0) {
      const Vector eps = inst_.d() - inst_.E() * x;
      for (Eigen::Index k = 0; k < eps.size(); ++k) {
        if (!(eps[k] > 0)) return std::numeric_limits<double>::infinity();
        val -= std::log(eps[k]);
      }
    }
    return std::isfinite(val) ? val : std::numeric_limits<double>::infinity();
  }

  // Gradient in x and s at (x, s).
  void gradient(const Vector& x, const Vector& s, double t, Vector& gx, Vector& gs) const {
    const Vector g = cp_.inequality(x) + by_;
    const Matrix jg = cp_.inequality_jacobian(x);
    Vector inv_sig(q_);
    for (int i = 0; i < q_; ++i) inv_sig[i] = 1.0 / (s[i] - g[i]);
    gx = jg.transpose() * inv_sig;
    if (wf_ != 0) gx += t * wf_ * cp_.objective_gradient(x);
    for (int j = 0; j < n_; ++j) gx[j] += -1.0 / (x[j] - inst_.x_lo()[j]) + 1.0 / (inst_.x_hi()[j] - x[j]);
    if (inst_.l() > 0) {
      const Vector eps = inst_.d() - inst_.E() * x;
      gx += inst_.E().transpose() * eps.cwiseInverse();
    }
    gs.resize(q_);
    for (int i = 0; i < q_; ++i) gs[i] = t * rho_ - inv_sig[i] - 1.0 / s[i];
  }

  // Newton step with s eliminated through its diagonal block.
  bool newton_direction(const Vector& x, const Vector& s, double t, Vector& dx, Vector& ds,
                        Vector& nu) const {
    const Vector g = cp_.inequality(x) + by_;
    const Matrix jg = cp_.inequality_jacobian(x);
    Vector gx, gs;
    gradient(x, s, t, gx, gs);
    Vector sig(q_), inv_sig(q_);
    for (int i = 0; i < q_; ++i) {
      sig[i] = s[i] - g[i];
      inv_sig[i] = 1.0 / sig[i];
    }
    Matrix hxx = cp_.inequality_hessian(x, inv_sig);
    if (wf_ != 0) hxx += t * wf_ * cp_.objective_hessian(x);
    Vector red(q_), wgt(q_);
    for (int i = 0; i < q_; ++i) {
      const double den = sig[i] * sig[i] + s[i] * s[i];
      red[i] = 1.0 / den;
      wgt[i] = s[i] * s[i] / den;
    }
    hxx += jg.transpose() * red.asDiagonal() * jg;
    for (int j = 0; j < n_; ++j) {
      const double a = x[j] - inst_.x_lo()[j], b = inst_.x_hi()[j] - x[j];
      hxx(j, j) += 1.0 / (a * a) + 1.0 / (b * b);
    }
    if (inst_.l() > 0) {
      const Vector eps = inst_.d() - inst_.E() * x;
      hxx += inst_.E().transpose() * eps.cwiseInverse().cwiseAbs2().asDiagonal() * inst_.E();
    }
    const Vector rhs = -gx - jg.transpose() * wgt.cwiseProduct(gs);
    Eigen::LDLT<Matrix> ldlt(hxx);
    const bool ldlt_ok = ldlt.info() == Eigen::Success;
    auto hsolve = [&](const Matrix& r) -> Matrix {
      Matrix z = ldlt_ok ? Matrix(ldlt.solve(r)) : Matrix();
      if (!ldlt_ok || !z.allFinite()) z = hxx.fullPivLu().solve(r);
      return z;
    };
    if (p_ == 0) {
      dx = hsolve(rhs);
      nu = Vector::Zero(0);
    } else {
      // Schur complement on the p x p block; the full KKT matrix is badly
      // scaled once t is large.
      const Matrix jh = cp_.equality_jacobian(x);
      const Vector rp = cp_.equality(x) + ay_;
      const Vector hr = hsolve(rhs);
      const Matrix hj = hsolve(jh.transpose());
      const Matrix schur = jh * hj;
      nu = schur.fullPivLu().solve(jh * hr + rp);
      dx = hr - hj * nu;
    }
    const Vector jdx = jg * dx;
    ds.resize(q_);
    for (int i = 0; i < q_; ++i)
      ds[i] = (-gs[i] * sig[i] * sig[i] * s[i] * s[i] + s[i] * s[i] * jdx[i]) /
              (sig[i] * sig[i] + s[i] * s[i]);
    return dx.allFinite() && ds.allFinite() && nu.allFinite();
  }

  double max_linear_step(const Vector& x, const Vector& s, const Vector& dx, const Vector& ds) const {
    double amax = 1.0;
    auto limit = [&amax](double v, double dv) {
      if (dv < 0) amax = std::min(amax, 0.99 * (-v / dv));
    };
    for (int i = 0; i < q_; ++i) limit(s[i], ds[i]);
    for (int j = 0; j < n_; ++j) {
      limit(x[j] - inst_.x_lo()[j], dx[j]);
      limit(inst_.x_hi()[j] - x[j], -dx[j]);
    }
    if (inst_.l() > 0) {
      const Vector eps = inst_.d() - inst_.E() * x;
      const Vector deps = -(inst_.E() * dx);
      for (Eigen::Index k = 0; k < eps.size(); ++k) limit(eps[k], deps[k]);
    }
    return amax;
  }

  // h is affine, so the least-norm correction lands exactly on h(x) + A y = 0.
  // Skipped if it would leave the barrier domain.
  void restore_equalities(Vector& x, const Vector& s, double t) const {
    if (p_ == 0) return;
    const Vector rp = cp_.equality(x) + ay_;
    if (rp.lpNorm<Eigen::Infinity>() == 0) return;
    const Matrix jh = cp_.equality_jacobian(x);
    const Vector corr = jh.transpose() * (jh * jh.transpose()).fullPivLu().solve(rp);
    const Vector xc = x - corr;
    if (std::isfinite(phi(xc, s, t))) x = xc;
  }

  double eq_residual(const Vector& x) const {
    if (p_ == 0) return 0;
    return (cp_.equality(x) + ay_).lpNorm<Eigen::Infinity>();
  }

  bool center(Vector& x, Vector& s, Vector& nu, double t, int& iterations) const {
    for (int k = 0; k < opt_.max_newton_per_stage; ++k) {
      Vector dx, ds, nu_new;
      if (!newton_direction(x, s, t, dx, ds, nu_new)) return false;
      Vector gx, gs;
      gradient(x, s, t, gx, gs);
      const double slope = gx.dot(dx) + gs.dot(ds);
      const double decrement = -slope;
      const double rp = eq_residual(x);
      const double phi0 = phi(x, s, t);
      // At large t the decrement stalls at rounding level of t * f (or of phi itself).
      const double floor = std::max({opt_.newton_tol, 1e-16 * t * rho_, 1e-15 * std::abs(phi0)});
      if (rp <= 1e-12 && decrement * 0.5 <= floor) {
        nu = nu_new;
        return true;
      }
      double alpha = max_linear_step(x, s, dx, ds);
      bool accepted = false;
      for (int ls = 0; ls < 60; ++ls) {
        const Vector xt = x + alpha * dx;
        const Vector st = s + alpha * ds;
        const double pt = phi(xt, st, t);
        const bool ok = rp > 1e-12 ? std::isfinite(pt)
                                   : (std::isfinite(pt) && pt <= phi0 + opt_.armijo * alpha * slope);
        if (ok) {
          x = xt;
          s = st;
          restore_equalities(x, s, t);
          accepted = true;
          break;
        }
        alpha *= opt_.backtrack;
      }
      ++iterations;
      nu = nu_new;
      if (opt_.log) {
        *opt_.log << "{\"t\":" << t << ",\"iter\":" << iterations << ",\"phi\":" << phi0
                  << ",\"decrement\":" << decrement << ",\"step\":" << (accepted ? alpha : 0.0)
                  << ",\"eq_residual\":" << rp << "}\n";
      }
      if (!accepted) {
        // No progress possible at double precision; converged iff the
        // decrement is already negligible relative to phi.
        return rp <= 1e-9 && decrement * 0.5 <= 1e-6 * std::max(1.0, std::abs(phi0));
      }
    }
    return false;
  }

  const ProblemInstance& inst_;
  const ConvexPart& cp_;
  const NlpOptions& opt_;
  double wf_, rho_;
  Vector by_, ay_;
  int n_ = 0, q_ = 0, p_ = 0, nterms_ = 0;
};

inline void fill_violation(const ProblemInstance& inst, const BinaryVector& y, SubproblemSolution& sol) {
  const Vector yr = to_real(y);
  const Vector g = inst.convex().inequality(sol.x) + inst.B() * yr;
  sol.max_violation = g.size() ? g.maxCoeff() : -std::numeric_limits<double>::infinity();
  sol.max_eq_violation =
      inst.p() > 0 ? (inst.convex().equality(sol.x) + inst.A() * yr).lpNorm<Eigen::Infinity>() : 0.0;
}

}  // namespace detail

/// Solve S(y). Feasible results satisfy every row to tol_feas; Infeasible
/// tells the caller to build a feasibility cut from solve_feasibility.
inline SubproblemSolution solve_subproblem(const ProblemInstance& inst, const BinaryVector& y,
                                           const NlpOptions& opt = {}) {
  require_binary(y, static_cast<std::size_t>(inst.m()));
  const auto start = std::chrono::steady_clock::now();
  detail::ElasticBarrier barrier(inst, y, 1.0, opt.elastic_penalty, opt);
  detail::BarrierResult r = barrier.solve();
  SubproblemSolution sol;
  sol.kind = SubproblemKind::kOptimality;
  sol.y = y;
  sol.x = r.x;
  sol.lambda = r.lambda;
  sol.mu = r.mu.cwiseMax(0.0);
  sol.iterations = r.iterations;
  detail::fill_violation(inst, y, sol);
  if (!r.converged) {
    sol.status = SubproblemStatus::kNumericalFailure;
    sol.objective = std::numeric_limits<double>::quiet_NaN();
  } else if (sol.max_violation <= opt.tol_feas && sol.max_eq_violation <= opt.tol_feas) {
    sol.status = SubproblemStatus::kFeasible;
    sol.objective = inst.objective(sol.x, y);
  } else {
    sol.status = SubproblemStatus::kInfeasible;
    sol.objective = r.s.sum();
  }
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

/// Solve F(y): min sum(alpha) s.t. G_i(x, y) <= alpha_i, alpha >= 0.
/// Status reports whether S(y) is feasible (objective <= tol_feas).
inline SubproblemSolution solve_feasibility(const ProblemInstance& inst, const BinaryVector& y,
                                            const NlpOptions& opt = {}) {
  require_binary(y, static_cast<std::size_t>(inst.m()));
  const auto start = std::chrono::steady_clock::now();
  detail::ElasticBarrier barrier(inst, y, 0.0, 1.0, opt);
  detail::BarrierResult r = barrier.solve();
  SubproblemSolution sol;
  sol.kind = SubproblemKind::kFeasibility;
  sol.y = y;
  sol.x = r.x;
  sol.lambda = r.lambda;
  sol.mu = r.mu.cwiseMax(0.0);
  sol.iterations = r.iterations;
  sol.objective = r.s.sum();
  detail::fill_violation(inst, y, sol);
  if (!r.converged)
    sol.status = SubproblemStatus::kNumericalFailure;
  else
    sol.status = sol.objective <= opt.tol_feas ? SubproblemStatus::kFeasible : SubproblemStatus::kInfeasible;
  sol.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

}  // namespace gbdrl

#endif  // GBDRL_NLP_SOLVER_HPP_
