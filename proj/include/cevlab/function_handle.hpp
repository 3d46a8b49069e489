#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cevlab {

using ScalarFn = std::function<double(double)>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Interval with open/closed ends; either end may be infinite.
struct Domain {
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = true;
  bool hi_open = true;

  bool contains(double t) const;
  /// Points strictly inside the domain used for construction-time checks:
  /// uniform on bounded domains, geometric towards an infinite end.
  std::vector<double> probe_grid(std::size_t n) const;

  static Domain real() { return {}; }
  static Domain positive() { return {0.0, kInf, true, true}; }
  static Domain above(double lo, bool open = true) { return {lo, kInf, open, true}; }
};

/// Everything needed to build a FunctionHandle.
struct FunctionSpec {
  std::string name;
  std::vector<double> params;
  Domain domain;
  ScalarFn eval;
  ScalarFn inverse;     ///< exact inverse, empty when the family has none
  ScalarFn derivative;  ///< empty when unavailable
  ScalarFn log_eval;    ///< log f(t) evaluated without overflow, empty when unavailable
  bool monotone = false;  ///< nondecreasing on the domain
  /// lim f(t) as t approaches domain.hi, when known in closed form (may be +-inf).
  std::optional<double> limit_hi;
};

/// A named, parameterized scalar function with a declared domain.
///
/// Construction checks the declared properties: a monotone handle must be nondecreasing
/// on a 1000-point probe grid, and an exact inverse must round-trip to
/// 1e-9 * max(1, |t|). Handles are immutable and cheap to copy.
class FunctionHandle {
 public:
  explicit FunctionHandle(FunctionSpec spec);

  double operator()(double t) const { return spec_.eval(t); }
  double eval(double t) const { return spec_.eval(t); }
  double log_eval(double t) const;

  const std::string& name() const { return spec_.name; }
  const std::vector<double>& params() const { return spec_.params; }
  const Domain& domain() const { return spec_.domain; }
  bool monotone() const { return spec_.monotone; }

  bool has_inverse() const { return static_cast<bool>(spec_.inverse); }
  double inverse(double y) const;
  bool has_derivative() const { return static_cast<bool>(spec_.derivative); }
  double derivative(double t) const;
  bool has_log_eval() const { return static_cast<bool>(spec_.log_eval); }
  std::optional<double> limit_hi() const { return spec_.limit_hi; }

  const FunctionSpec& spec() const { return spec_; }

 private:
  FunctionSpec spec_;
};

// Combinators. Names compose so reports stay readable.

/// f(g(t)); domain of g, inverse when both have one.
FunctionHandle compose(const FunctionHandle& f, const FunctionHandle& g);
/// c * f(t).
FunctionHandle scale(double c, const FunctionHandle& f);
/// t -> value.
FunctionHandle constant(double value, Domain domain = Domain::real());

}  // namespace cevlab
