#pragma once

#include <functional>
#include <span>

namespace cevlab::quad {

using Integrand = std::function<double(double)>;

/// Default absolute tolerance for every adaptive integral in the library.
inline constexpr double kAbsTol = 1e-10;

/// Adaptive Gauss-Kronrod (61-point) on [a, b]; either end may be infinite.
/// Throws NumericalError when the error estimate exceeds abs_tol.
double integrate(const Integrand& f, double a, double b, double abs_tol = kAbsTol);

enum class Rule { GaussKronrod, TanhSinh };

/// As integrate(), but the interval is first split at every breakpoint inside (a, b).
/// Use this for integrands with kinks or jumps at known locations; TanhSinh also copes
/// with integrable endpoint singularities on each piece.
double integrate_split(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                       double abs_tol = kAbsTol, Rule rule = Rule::GaussKronrod);

/// Double-exponential rule for finite intervals with integrable endpoint singularities.
double integrate_singular(const Integrand& f, double a, double b, double abs_tol = kAbsTol);

}  // namespace cevlab::quad
