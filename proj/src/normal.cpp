#include "cevlab/normal.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "cevlab/error.hpp"

namespace cevlab::normal {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Above this point erfc underflows into subnormals; switch to the tail series.
constexpr double kSeriesCut = 35.0;

// sf(x) = pdf(x) / x * tail_series(x) for large x.
double tail_series(double x) {
  const double r = 1.0 / (x * x);
  return 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
}

double log_sf_series(double x) {
  return -0.5 * x * x - std::log(x) - kLogSqrt2Pi + std::log(tail_series(x));
}

}  // namespace

double pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double sf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double log_sf(double x) {
  if (x > kSeriesCut) return log_sf_series(x);
  if (x < -5.0) return std::log1p(-sf(-x));
  return std::log(sf(x));
}

double isf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal::isf: p must lie in (0, 1)");
  return std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double b(double t) {
  if (!(t > 1.0)) throw DomainError("normal::b: t must exceed 1");
  if (std::isinf(t)) return std::numeric_limits<double>::infinity();
  return isf(1.0 / t);
}

double b_asymptotic(double t) {
  if (!(t > 1.0)) throw DomainError("normal::b_asymptotic: t must exceed 1");
  const double s = std::log(t);
  const double r = std::sqrt(2.0 * s);
  return r - 0.5 * (std::log(s) + std::log(4.0 * std::numbers::pi)) / r;
}

double a(double t) {
  if (!(t > 1.0)) throw DomainError("normal::a: t must exceed 1");
  return 1.0 / std::sqrt(2.0 * std::log(t));
}

double b_inverse(double y) { return std::exp(-log_sf(y)); }

double inverse_mills(double x) {
  if (x > kSeriesCut) return x / tail_series(x);
  return std::exp(-0.5 * x * x - kLogSqrt2Pi - log_sf(x));
}

}  // namespace cevlab::normal
