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

// Convex MINLPs whose binaries enter linearly:
//
//   min  f(x) + e'y
//   s.t. h(x) + A y  = 0
//        g(x) + B y <= 0
//        K y <= b
//        E x <= d,  x_lo <= x <= x_hi,  y in {0,1}^m
//
// plus the synthesis-style benchmark family used throughout the tests.

#ifndef GBDRL_PROBLEM_HPP_
#define GBDRL_PROBLEM_HPP_

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gbdrl/core.hpp"

namespace gbdrl {

/// Smooth convex functions of x. Implementations must be re-entrant.
///
/// Hessians default to central differences of the analytic gradients;
/// override them when closed forms are cheap.
class ConvexPart {
 public:
  virtual ~ConvexPart() = default;

  virtual std::string_view kind() const = 0;
  virtual int num_x() const = 0;
  virtual int num_equalities() const { return 0; }
  virtual int num_inequalities() const = 0;

  virtual double objective(const Vector& x) const = 0;
  virtual Vector objective_gradient(const Vector& x) const = 0;
  virtual Matrix objective_hessian(const Vector& x) const {
    return fd_hessian([this](const Vector& z) { return objective_gradient(z); }, x);
  }

  // h is affine, so no curvature term is ever needed for it.
  virtual Vector equality(const Vector& x) const {
    (void)x;
    return Vector::Zero(num_equalities());
  }
  virtual Matrix equality_jacobian(const Vector& x) const {
    (void)x;
    return Matrix::Zero(num_equalities(), num_x());
  }

  virtual Vector inequality(const Vector& x) const = 0;
  virtual Matrix inequality_jacobian(const Vector& x) const = 0;

  /// sum_i weights[i] * hess g_i(x)
  virtual Matrix inequality_hessian(const Vector& x, const Vector& weights) const {
    return fd_hessian(
        [this, &weights](const Vector& z) {
          return Vector(inequality_jacobian(z).transpose() * weights);
        },
        x);
  }

 protected:
  template <typename Grad>
  static Matrix fd_hessian(Grad&& grad, const Vector& x) {
    const Eigen::Index n = x.size();
    Matrix hess(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
      Vector xp = x, xm = x;
      xp[j] += step;
      xm[j] -= step;
      hess.col(j) = (grad(xp) - grad(xm)) / (2.0 * step);
    }
    return 0.5 * (hess + hess.transpose());
  }
};

/// Data of the linear-in-y part; the nonlinear part lives in a ConvexPart.
struct ProblemData {
  int m = 0;  // binaries
  Vector e;   // m
  Matrix A;   // p x m
  Matrix B;   // q x m
  Matrix K;   // s x m
  Vector b;   // s
  Vector x_lo, x_hi;
  Matrix E;  // l x n
  Vector d;  // l
  /// Strict interior point of X; defaults to the box midpoint.
  std::optional<Vector> x_interior;
};

/// Objective coefficients on y1..y5 for the benchmark family.
struct CaseStudyCoefficients {
  std::array<int, 5> c{};

  static constexpr int kMaxC14 = 39;
  static constexpr int kMaxC5 = 7;

  bool in_range() const {
    for (int i = 0; i < 4; ++i)
      if (c[static_cast<std::size_t>(i)] < 1 || c[static_cast<std::size_t>(i)] > kMaxC14) return false;
    return c[4] >= 1 && c[4] <= kMaxC5;
  }

  static CaseStudyCoefficients nominal() { return {{5, 8, 6, 10, 6}}; }

  friend bool operator==(const CaseStudyCoefficients&, const CaseStudyCoefficients&) = default;
};

class ProblemInstance {
 public:
  ProblemInstance(ProblemData data, std::shared_ptr<const ConvexPart> convex)
      : data_(std::move(data)), convex_(std::move(convex)) {
    validate(convex_ != nullptr, "problem instance requires a convex part");
    const int m = data_.m;
    const int n = convex_->num_x();
    const int p = convex_->num_equalities();
    const int q = convex_->num_inequalities();
    validate(m >= 1, "problem needs at least one binary variable");
    validate(n >= 1, "problem needs at least one continuous variable");
    if (data_.A.size() == 0) data_.A = Matrix::Zero(p, m);
    if (data_.B.size() == 0) data_.B = Matrix::Zero(q, m);
    if (data_.K.size() == 0 && data_.b.size() == 0) {
      data_.K = Matrix::Zero(0, m);
      data_.b = Vector::Zero(0);
    }
    if (data_.E.size() == 0 && data_.d.size() == 0) {
      data_.E = Matrix::Zero(0, n);
      data_.d = Vector::Zero(0);
    }
    validate(data_.e.size() == m, "e must have length m");
    validate(data_.A.rows() == p && data_.A.cols() == m, "A must be p x m");
    validate(data_.B.rows() == q && data_.B.cols() == m, "B must be q x m");
    validate(data_.K.cols() == m && data_.K.rows() == data_.b.size(), "K must be s x m and b length s");
    validate(data_.x_lo.size() == n && data_.x_hi.size() == n, "x bounds must have length n");
    validate(data_.E.cols() == n && data_.E.rows() == data_.d.size(), "E must be l x n and d length l");
    for (int j = 0; j < n; ++j) {
      validate(std::isfinite(data_.x_lo[j]) && std::isfinite(data_.x_hi[j]),
               "x bounds must be finite (cap unbounded entries)");
      validate(data_.x_lo[j] < data_.x_hi[j], "x bounds must satisfy lo < hi");
    }
    if (!data_.x_interior) data_.x_interior = 0.5 * (data_.x_lo + data_.x_hi);
    const Vector& x0 = *data_.x_interior;
    validate(x0.size() == n, "interior point must have length n");
    validate(((x0 - data_.x_lo).array() > 0).all() && ((data_.x_hi - x0).array() > 0).all(),
             "interior point must lie strictly inside the box");
    if (data_.E.rows() > 0)
      validate(((data_.d - data_.E * x0).array() > 0).all(), "interior point must satisfy E x < d strictly");
    validate(convex_->inequality(x0).size() == q, "g has wrong length");
    validate(convex_->equality(x0).size() == p, "h has wrong length");
    validate(convex_->objective_gradient(x0).size() == n, "grad f has wrong length");
  }

  int m() const { return data_.m; }
  int n() const { return convex_->num_x(); }
  int p() const { return convex_->num_equalities(); }
  int q() const { return convex_->num_inequalities(); }
  int s() const { return static_cast<int>(data_.K.rows()); }
  int l() const { return static_cast<int>(data_.E.rows()); }

  const Vector& e() const { return data_.e; }
  const Matrix& A() const { return data_.A; }
  const Matrix& B() const { return data_.B; }
  const Matrix& K() const { return data_.K; }
  const Vector& b() const { return data_.b; }
  const Vector& x_lo() const { return data_.x_lo; }
  const Vector& x_hi() const { return data_.x_hi; }
  const Matrix& E() const { return data_.E; }
  const Vector& d() const { return data_.d; }
  const Vector& x_interior() const { return *data_.x_interior; }
  const ConvexPart& convex() const { return *convex_; }
  std::shared_ptr<const ConvexPart> convex_ptr() const { return convex_; }
  const ProblemData& data() const { return data_; }

  /// F(x, y) = f(x) + e'y
  double objective(const Vector& x, const BinaryVector& y) const {
    return convex_->objective(x) + data_.e.dot(to_real(y));
  }

  bool satisfies_pure_binary(const BinaryVector& y, double tol = 1e-9) const {
    if (s() == 0) return true;
    const Vector lhs = data_.K * to_real(y);
    return ((lhs - data_.b).array() <= tol).all();
  }

  const std::optional<CaseStudyCoefficients>& coefficients() const { return coefficients_; }
  void set_coefficients(const CaseStudyCoefficients& c) { coefficients_ = c; }

 private:
  ProblemData data_;
  std::shared_ptr<const ConvexPart> convex_;
  std::optional<CaseStudyCoefficients> coefficients_;
};

/// Midpoint convexity test on random pairs from the box. Returns the first
/// failing description, or nullopt when every sample passes.
inline std::optional<std::string> midpoint_convexity_violation(const ProblemInstance& inst,
                                                               std::uint64_t seed = 7,
                                                               int pairs = 100, double tol = 1e-9) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const ConvexPart& cp = inst.convex();
  const int n = inst.n();
  auto sample = [&] {
    Vector x(n);
    for (int j = 0; j < n; ++j) x[j] = inst.x_lo()[j] + unit(rng) * (inst.x_hi()[j] - inst.x_lo()[j]);
    return x;
  };
  for (int k = 0; k < pairs; ++k) {
    const Vector x1 = sample();
    const Vector x2 = sample();
    const Vector xm = 0.5 * (x1 + x2);
    const double fm = cp.objective(xm);
    const double fa = 0.5 * (cp.objective(x1) + cp.objective(x2));
    if (fm > fa + tol) return "objective fails midpoint convexity at sample " + std::to_string(k);
    const Vector gm = cp.inequality(xm);
    const Vector ga = 0.5 * (cp.inequality(x1) + cp.inequality(x2));
    for (Eigen::Index i = 0; i < gm.size(); ++i)
      if (gm[i] > ga[i] + tol) return "g_" + std::to_string(i) + " fails midpoint convexity";
    const Vector hm = cp.equality(xm);
    const Vector ha = 0.5 * (cp.equality(x1) + cp.equality(x2));
    for (Eigen::Index i = 0; i < hm.size(); ++i)
      if (std::abs(hm[i] - ha[i]) > tol) return "h_" + std::to_string(i) + " is not affine";
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Benchmark family: five binaries, six continuous variables
// x = (x3, x5, x9, x11, x13, x16), twelve nonlinear/linear rows.

class CaseStudy1Convex final : public ConvexPart {
 public:
  static constexpr int kN = 6;
  static constexpr int kQ = 12;
  enum Var { kX3 = 0, kX5, kX9, kX11, kX13, kX16 };

  std::string_view kind() const override { return "case_study1"; }
  int num_x() const override { return kN; }
  int num_inequalities() const override { return kQ; }

  double objective(const Vector& x) const override {
    return -10 * x[kX3] - 15 * x[kX5] - 15 * x[kX9] + 15 * x[kX11] + 5 * x[kX13] - 20 * x[kX16] +
           std::exp(x[kX3]) + std::exp(x[kX5] / 1.2) - 60 * std::log(x[kX11] + x[kX13] + 1) + 140;
  }

  Vector objective_gradient(const Vector& x) const override {
    const double r = 60.0 / (x[kX11] + x[kX13] + 1);
    Vector gr(kN);
    gr << -10 + std::exp(x[kX3]), -15 + std::exp(x[kX5] / 1.2) / 1.2, -15, 15 - r, 5 - r, -20;
    return gr;
  }

  Matrix objective_hessian(const Vector& x) const override {
    Matrix hs = Matrix::Zero(kN, kN);
    const double u = x[kX11] + x[kX13] + 1;
    hs(kX3, kX3) = std::exp(x[kX3]);
    hs(kX5, kX5) = std::exp(x[kX5] / 1.2) / 1.44;
    const double c = 60.0 / (u * u);
    hs(kX11, kX11) = hs(kX11, kX13) = hs(kX13, kX11) = hs(kX13, kX13) = c;
    return hs;
  }

  Vector inequality(const Vector& x) const override {
    Vector g(kQ);
    g << -std::log(x[kX11] + x[kX13] + 1),                                  // E2
        -x[kX3] - x[kX5] - 2 * x[kX9] + x[kX11] + 2 * x[kX16],              // E3
        -x[kX3] - x[kX5] - 0.75 * x[kX9] + x[kX11] + 2 * x[kX16],           // E4
        x[kX9] - x[kX16],                                                   // E5
        2 * x[kX9] - x[kX11] - 2 * x[kX16],                                 // E6
        -0.5 * x[kX11] + x[kX13],                                           // E7
        0.2 * x[kX11] - x[kX13],                                            // E8
        std::exp(x[kX3]) - 1,                                               // E9
        std::exp(x[kX5] / 1.2) - 1,                                         // E10
        1.25 * x[kX9],                                                      // E11
        x[kX11] + x[kX13],                                                  // E12
        -2 * x[kX9] + 2 * x[kX16];                                          // E13
    return g;
  }

  Matrix inequality_jacobian(const Vector& x) const override {
    Matrix jac = Matrix::Zero(kQ, kN);
    const double u = x[kX11] + x[kX13] + 1;
    jac(0, kX11) = jac(0, kX13) = -1.0 / u;
    jac.row(1) << -1, -1, -2, 1, 0, 2;
    jac.row(2) << -1, -1, -0.75, 1, 0, 2;
    jac.row(3) << 0, 0, 1, 0, 0, -1;
    jac.row(4) << 0, 0, 2, -1, 0, -2;
    jac.row(5) << 0, 0, 0, -0.5, 1, 0;
    jac.row(6) << 0, 0, 0, 0.2, -1, 0;
    jac(7, kX3) = std::exp(x[kX3]);
    jac(8, kX5) = std::exp(x[kX5] / 1.2) / 1.2;
    jac(9, kX9) = 1.25;
    jac(10, kX11) = jac(10, kX13) = 1;
    jac(11, kX9) = -2;
    jac(11, kX16) = 2;
    return jac;
  }

  Matrix inequality_hessian(const Vector& x, const Vector& w) const override {
    Matrix hs = Matrix::Zero(kN, kN);
    const double u = x[kX11] + x[kX13] + 1;
    const double c = w[0] / (u * u);
    hs(kX11, kX11) = hs(kX11, kX13) = hs(kX13, kX11) = hs(kX13, kX13) = c;
    hs(kX3, kX3) = w[7] * std::exp(x[kX3]);
    hs(kX5, kX5) = w[8] * std::exp(x[kX5] / 1.2) / 1.44;
    return hs;
  }
};

struct CaseStudyOptions {
  double big_u = 10.0;
  /// Finite cap for x11 and x13, which have no upper bound in the model.
  double box_cap = 10.0;
  /// Optional lower bound on x9 (a "demand" on the x9 stream). Positive
  /// values make every y with y3 = 0 infeasible, which exercises
  /// feasibility cuts.
  double x9_demand = 0.0;
};

inline ProblemInstance build_case_study1(const CaseStudyCoefficients& c,
                                         const CaseStudyOptions& opt = {}) {
  validate(c.in_range(), "case study coefficients out of range (c1..c4 in [1,39], c5 in [1,7])");
  validate(opt.box_cap > 0 && opt.big_u > 0, "box cap and U must be positive");
  validate(opt.x9_demand >= 0 && opt.x9_demand < 2, "x9 demand must lie in [0, 2)");
  constexpr int m = 5, n = CaseStudy1Convex::kN, q = CaseStudy1Convex::kQ;
  ProblemData d;
  d.m = m;
  d.e = Vector(m);
  for (int j = 0; j < m; ++j) d.e[j] = c.c[static_cast<std::size_t>(j)];
  d.A = Matrix::Zero(0, m);
  d.B = Matrix::Zero(q, m);
  // E9..E13 carry -U y_j; rows are E2..E13 in order.
  for (int j = 0; j < m; ++j) d.B(7 + j, j) = -opt.big_u;
  d.K = Matrix(3, m);
  d.K << 1, 1, 0, 0, 0,  //
      -1, -1, 0, 0, 0,   //
      0, 0, 0, 1, 1;
  d.b = Vector(3);
  d.b << 1, -1, 1;
  d.x_lo = Vector::Zero(n);
  d.x_lo[CaseStudy1Convex::kX9] = opt.x9_demand;
  d.x_hi = Vector(n);
  d.x_hi << 2, 2, 2, opt.box_cap, opt.box_cap, 3;
  d.E = Matrix::Zero(0, n);
  d.d = Vector::Zero(0);
  ProblemInstance inst(std::move(d), std::make_shared<CaseStudy1Convex>());
  inst.set_coefficients(c);
  return inst;
}

/// c1..c4 uniform on {1..39}, c5 uniform on {1..7}.
template <typename Rng>
CaseStudyCoefficients sample_coefficients(Rng& rng) {
  std::uniform_int_distribution<int> wide(1, CaseStudyCoefficients::kMaxC14);
  std::uniform_int_distribution<int> narrow(1, CaseStudyCoefficients::kMaxC5);
  CaseStudyCoefficients c;
  for (int i = 0; i < 4; ++i) c.c[static_cast<std::size_t>(i)] = wide(rng);
  c.c[4] = narrow(rng);
  return c;
}

/// Lexicographically smallest y with K y <= b, or nullopt. Enumeration guard m <= 20.
inline std::optional<BinaryVector> first_pure_binary_feasible(const ProblemInstance& inst) {
  validate(inst.m() <= 20, "enumeration guard: m must be <= 20");
  const std::uint64_t total = std::uint64_t{1} << inst.m();
  for (std::uint64_t code = 0; code < total; ++code) {
    BinaryVector y = binary_from_code(code, inst.m());
    if (inst.satisfies_pure_binary(y)) return y;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Quadratic family used by property tests: f = 1/2 x'Qx + c'x + c0,
// g_i = 1/2 x'P_i x + a_i'x + r_i, h = H x - h0.

class QuadraticConvex final : public ConvexPart {
 public:
  Matrix Q;
  Vector c;
  double c0 = 0;
  std::vector<Matrix> P;
  Matrix Ag;  // q x n linear parts
  Vector r;
  Matrix H;  // p x n
  Vector h0;

  std::string_view kind() const override { return "quadratic"; }
  int num_x() const override { return static_cast<int>(c.size()); }
  int num_equalities() const override { return static_cast<int>(H.rows()); }
  int num_inequalities() const override { return static_cast<int>(r.size()); }

  double objective(const Vector& x) const override { return 0.5 * x.dot(Q * x) + c.dot(x) + c0; }
  Vector objective_gradient(const Vector& x) const override { return Q * x + c; }
  Matrix objective_hessian(const Vector&) const override { return Q; }
  Vector equality(const Vector& x) const override { return H * x - h0; }
  Matrix equality_jacobian(const Vector&) const override { return H; }
  Vector inequality(const Vector& x) const override {
    Vector g = Ag * x + r;
    for (std::size_t i = 0; i < P.size(); ++i) g[static_cast<Eigen::Index>(i)] += 0.5 * x.dot(P[i] * x);
    return g;
  }
  Matrix inequality_jacobian(const Vector& x) const override {
    Matrix jac = Ag;
    for (std::size_t i = 0; i < P.size(); ++i) jac.row(static_cast<Eigen::Index>(i)) += (P[i] * x).transpose();
    return jac;
  }
  Matrix inequality_hessian(const Vector& x, const Vector& w) const override {
    Matrix hs = Matrix::Zero(x.size(), x.size());
    for (std::size_t i = 0; i < P.size(); ++i) hs += w[static_cast<Eigen::Index>(i)] * P[i];
    return hs;
  }
};

}  // namespace gbdrl

#endif  // GBDRL_PROBLEM_HPP_
