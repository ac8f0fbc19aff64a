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

// Shared vocabulary types: dense vectors, binary assignments, tagged
// extended reals for bounds, and the exception hierarchy.

#ifndef GBDRL_CORE_HPP_
#define GBDRL_CORE_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gbdrl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Assignment of the complicating binaries; every entry is 0 or 1.
using BinaryVector = std::vector<int>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data (dimensions, ranges, bounds).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or a solver that failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A persisted document does not match the expected schema or descriptor.
class SchemaError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractViolation(what);
}

inline void validate(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

/// A real number that may also be one of the two infinities.
///
/// Infinities are tags, not IEEE values: arithmetic must go through
/// value(), which throws on a sentinel, so a serialized -inf can never
/// silently satisfy a cost comparison.
class ExtendedReal {
 public:
  enum class Kind : std::uint8_t { kNegInf, kFinite, kPosInf };

  constexpr ExtendedReal() = default;

  static ExtendedReal finite(double v) {
    if (!std::isfinite(v)) throw NumericalError("ExtendedReal::finite given non-finite value");
    ExtendedReal r;
    r.kind_ = Kind::kFinite;
    r.value_ = v;
    return r;
  }
  static constexpr ExtendedReal minus_infinity() {
    ExtendedReal r;
    r.kind_ = Kind::kNegInf;
    return r;
  }
  static constexpr ExtendedReal plus_infinity() {
    ExtendedReal r;
    r.kind_ = Kind::kPosInf;
    return r;
  }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Kind::kFinite; }
  bool is_minus_infinity() const { return kind_ == Kind::kNegInf; }
  bool is_plus_infinity() const { return kind_ == Kind::kPosInf; }

  double value() const {
    if (kind_ != Kind::kFinite) throw ContractViolation("arithmetic on an infinite bound sentinel");
    return value_;
  }

  /// IEEE view for reporting only.
  double to_double() const {
    switch (kind_) {
      case Kind::kNegInf: return -std::numeric_limits<double>::infinity();
      case Kind::kPosInf: return std::numeric_limits<double>::infinity();
      default: return value_;
    }
  }

  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.kind_ != b.kind_) return false;
    return a.kind_ != Kind::kFinite || a.value_ == b.value_;
  }
  friend bool operator<(const ExtendedReal& a, const ExtendedReal& b) {
    if (a.kind_ != b.kind_) return static_cast<int>(a.kind_) < static_cast<int>(b.kind_);
    return a.kind_ == Kind::kFinite && a.value_ < b.value_;
  }
  friend bool operator<=(const ExtendedReal& a, const ExtendedReal& b) { return !(b < a); }
  friend bool operator>(const ExtendedReal& a, const ExtendedReal& b) { return b < a; }
  friend bool operator>=(const ExtendedReal& a, const ExtendedReal& b) { return !(a < b); }

  std::string to_string() const {
    if (kind_ == Kind::kNegInf) return "-inf";
    if (kind_ == Kind::kPosInf) return "+inf";
    std::ostringstream os;
    os.precision(17);
    os << value_;
    return os.str();
  }

 private:
  Kind kind_ = Kind::kFinite;
  double value_ = 0.0;
};

inline ExtendedReal max(const ExtendedReal& a, const ExtendedReal& b) { return a < b ? b : a; }
inline ExtendedReal min(const ExtendedReal& a, const ExtendedReal& b) { return b < a ? b : a; }

/// UBD - LBD; +inf whenever either bound is still a sentinel.
inline double bound_gap(const ExtendedReal& ubd, const ExtendedReal& lbd) {
  if (!ubd.is_finite() || !lbd.is_finite()) return std::numeric_limits<double>::infinity();
  return ubd.value() - lbd.value();
}

inline Vector to_real(const BinaryVector& y) {
  Vector v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v[static_cast<Eigen::Index>(i)] = y[i];
  return v;
}

inline bool is_binary(const BinaryVector& y) {
  for (int v : y)
    if (v != 0 && v != 1) return false;
  return true;
}

inline void require_binary(const BinaryVector& y, std::size_t m) {
  require(y.size() == m, "binary vector has length " + std::to_string(y.size()) +
                             ", expected " + std::to_string(m));
  require(is_binary(y), "binary vector contains a value other than 0/1");
}

/// Assignment with index `code` in lexicographic order (y[0] most significant).
inline BinaryVector binary_from_code(std::uint64_t code, int m) {
  BinaryVector y(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) y[static_cast<std::size_t>(j)] = static_cast<int>((code >> (m - 1 - j)) & 1U);
  return y;
}

inline std::string to_string(const BinaryVector& y) {
  std::string s;
  s.reserve(y.size());
  for (int v : y) s.push_back(v ? '1' : '0');
  return s;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector from_std(std::span<const double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

}  // namespace gbdrl

#endif  // GBDRL_CORE_HPP_
