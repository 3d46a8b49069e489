#pragma once

// Standard normal helpers that stay accurate deep in the upper tail.

namespace cevlab::normal {

double pdf(double x);
double cdf(double x);
/// Survival function 1 - cdf(x), computed without cancellation.
double sf(double x);
/// log(1 - cdf(x)); finite for every finite x.
double log_sf(double x);
/// Inverse survival function: the x with sf(x) = p, for p in (0, 1).
double isf(double p);

/// b(t) = (1/(1-N))^{<-}(t) = isf(1/t), t > 1.
double b(double t);
/// Two-term expansion sqrt(2 log t) - (log log t + log 4pi) / (2 sqrt(2 log t)).
double b_asymptotic(double t);
/// a(t) = 1 / sqrt(2 log t).
double a(double t);
/// b^{<-}(y) = 1 / sf(y).
double b_inverse(double y);
/// Inverse Mills ratio pdf(x) / sf(x); the derivative of -log sf.
double inverse_mills(double x);

}  // namespace cevlab::normal
