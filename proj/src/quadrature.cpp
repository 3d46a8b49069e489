#include "cevlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "cevlab/error.hpp"

namespace cevlab::quad {

namespace {

constexpr unsigned kMaxDepth = 20;

void check(double value, double error, double l1, double abs_tol, const char* where) {
  if (!std::isfinite(value)) throw NumericalError(std::string(where) + ": non-finite integral");
  // Accept either the absolute target or a relative one when the integral is large.
  if (error > std::max(abs_tol, 1e-12 * l1)) {
    std::ostringstream msg;
    msg << where << ": error estimate " << error << " exceeds tolerance " << abs_tol << " (L1 " << l1 << ")";
    throw NumericalError(msg.str());
  }
}

}  // namespace

double integrate(const Integrand& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  using Rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  double error = 0.0;
  double l1 = 0.0;
  double value = Rule::integrate(f, a, b, 0, 0.0, &error, &l1);
  if (error > 0.5 * abs_tol) {
    // Boost's target is relative to the L1 norm; translate the absolute target so that
    // tiny pieces do not chase rounding noise down to the depth limit.
    const double rel = std::max(1e-13, 0.5 * abs_tol / std::max(l1, 1e-300));
    value = Rule::integrate(f, a, b, kMaxDepth, rel, &error, &l1);
  }
  check(value, error, l1, abs_tol, "quad::integrate");
  return value;
}

double integrate_split(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                       double abs_tol, Rule rule) {
  std::vector<double> cuts{a};
  for (double p : breakpoints) {
    if (p > a && p < b) cuts.push_back(p);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const double piece_tol = abs_tol / static_cast<double>(cuts.size());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += rule == Rule::TanhSinh ? integrate_singular(f, cuts[i], cuts[i + 1], piece_tol)
                                    : integrate(f, cuts[i], cuts[i + 1], piece_tol);
  }
  return total;
}

double integrate_singular(const Integrand& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  boost::math::quadrature::tanh_sinh<double> rule;
  double error = 0.0;
  double l1 = 0.0;
  const double value = rule.integrate(f, a, b, 1e-13, &error, &l1);
  check(value, error, l1, abs_tol, "quad::integrate_singular");
  return value;
}

}  // namespace cevlab::quad
