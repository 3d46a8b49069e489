#include "cevlab/rv_toolkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "cevlab/error.hpp"
#include "cevlab/quadrature.hpp"

namespace cevlab {

namespace {

constexpr double kResidualTol = 5e-2;
constexpr double kCauchyTol = 1e-3;

double interior_point(const Domain& d) {
  const bool lo = std::isfinite(d.lo);
  const bool hi = std::isfinite(d.hi);
  if (lo && hi) return 0.5 * (d.lo + d.hi);
  if (lo) return d.lo + std::max(1.0, std::abs(d.lo));
  if (hi) return d.hi - std::max(1.0, std::abs(d.hi));
  return 0.0;
}

[[noreturn]] void above_range(const FunctionHandle& u, double t) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "left_continuous_inverse: inverse undefined above range (" << u.name() << ", t=" << t << ")";
  throw DomainError(msg.str());
}

// A sequence of distances to a target limit "vanishes" when it is already tiny, or when
// it keeps shrinking over the last grid points and has lost a quarter of its size.
bool shrinking(const std::vector<double>& dev) {
  const std::size_t n = dev.size();
  if (n < 2 || !std::isfinite(dev.front()) || !std::isfinite(dev.back())) return false;
  const std::size_t from = n >= 4 ? n - 4 : 0;
  for (std::size_t i = from + 1; i < n; ++i) {
    if (!(dev[i] <= dev[i - 1] * (1.0 + 1e-12))) return false;
  }
  return dev.back() <= 0.75 * dev.front();
}

bool vanishes(const std::vector<double>& dev, double c) {
  if (dev.empty()) return false;
  if (dev.back() <= kCauchyTol) return true;
  return shrinking(dev) && dev.back() <= 0.25 * std::max(1.0, std::abs(std::log(c)));
}

void check_grid(std::span<const double> t_grid) {
  if (t_grid.size() < 4) throw DomainError("t_grid needs at least 4 points");
  for (std::size_t i = 1; i < t_grid.size(); ++i) {
    if (!(t_grid[i] > t_grid[i - 1])) throw DomainError("t_grid must be strictly increasing");
  }
}

bool has_name_prefix(const FunctionHandle& f, std::string_view prefix) {
  return f.name().rfind(prefix, 0) == 0;
}

}  // namespace

double left_continuous_inverse(const FunctionHandle& u, double t) {
  if (!u.monotone()) {
    throw DomainError("left_continuous_inverse: '" + u.name() + "' is not flagged monotone");
  }
  const Domain& d = u.domain();
  if (u.limit_hi() && t > *u.limit_hi()) above_range(u, t);

  if (u.has_inverse()) {
    const double y = u.inverse(t);
    if (std::isnan(y)) above_range(u, t);
    return std::max(y, d.lo);
  }

  const double x0 = interior_point(d);
  double step = std::max(1.0, std::abs(x0));

  // Upper bracket: u(hi) >= t.
  double hi = x0;
  for (int k = 0; !(u(hi) >= t); ++k) {
    if (k > 2000) above_range(u, t);
    if (std::isfinite(d.hi)) {
      const double next = d.hi - (d.hi - x0) * std::ldexp(1.0, -(k + 1));
      if (next == hi || k > 60) {
        if (!d.hi_open && u(d.hi) >= t) {
          hi = d.hi;
          break;
        }
        above_range(u, t);
      }
      hi = next;
    } else {
      hi += step;
      step *= 2.0;
      if (!std::isfinite(hi)) above_range(u, t);
    }
  }

  // Lower bracket: u(lo) < t, or the domain's lower end when u >= t everywhere.
  double lo = std::min(x0, hi);
  step = std::max(1.0, std::abs(lo));
  for (int k = 0; u(lo) >= t; ++k) {
    if (std::isfinite(d.lo)) {
      const double next = d.lo + (lo - d.lo) * 0.5;
      if (next == lo || k > 1100) return d.lo;
      lo = next;
    } else {
      lo -= step;
      step *= 2.0;
      if (!std::isfinite(lo)) return -kInf;
    }
  }

  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (u(mid) >= t) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

FunctionHandle inverse_function(const FunctionHandle& u) {
  if (!u.monotone()) throw DomainError("inverse_function: '" + u.name() + "' is not flagged monotone");
  const Domain& d = u.domain();
  FunctionSpec s;
  s.name = u.name() + "^-1";
  s.params = u.params();
  double lo = -kInf;
  if (std::isfinite(d.lo)) {
    const double v = u(d.lo);
    if (!std::isnan(v)) lo = v;
  }
  const double hi = u.limit_hi().value_or(kInf);
  s.domain = {lo, hi, true, true};
  if (u.has_inverse()) {
    s.eval = [u](double y) { return u.inverse(y); };
  } else {
    s.eval = [u](double y) { return left_continuous_inverse(u, y); };
  }
  s.inverse = [u](double x) { return u(x); };
  s.monotone = true;
  s.limit_hi = d.hi;
  return FunctionHandle(std::move(s));
}

LimitEstimate limit_at_infinity(const FunctionHandle& f) {
  if (f.limit_hi()) {
    const double v = *f.limit_hi();
    return {std::isfinite(v), v, "closed-form"};
  }
  std::vector<double> v;
  for (int k = 4; k <= 12; ++k) v.push_back(f(std::pow(10.0, k)));
  if (!std::isfinite(v.back())) return {false, v.back() > 0 ? kInf : -kInf, "divergent"};

  std::vector<double> aitken;
  for (std::size_t i = 0; i + 2 < v.size(); ++i) {
    const double d1 = v[i + 1] - v[i];
    const double d2 = v[i + 2] - 2.0 * v[i + 1] + v[i];
    aitken.push_back(d2 == 0.0 ? v[i + 2] : v[i] - d1 * d1 / d2);
  }
  const double last = aitken.back();
  const double prev = aitken[aitken.size() - 2];
  if (std::abs(last - prev) <= 1e-6 * std::max(1.0, std::abs(last))) return {true, last, "aitken"};

  const double d_first = v[1] - v[0];
  const double d_last = v.back() - v[v.size() - 2];
  if (std::abs(d_last) >= 0.5 * std::abs(d_first)) {
    return {false, d_last > 0 ? kInf : -kInf, "divergent"};
  }
  throw NumericalError("limit_at_infinity: '" + f.name() + "' neither settles nor diverges on 1e4..1e12");
}

std::string to_string(PsiClass c) {
  switch (c) {
    case PsiClass::ProductCase: return "ProductCase";
    case PsiClass::ScaleOnly: return "ScaleOnly";
    case PsiClass::Full: return "Full";
  }
  return "?";
}

std::string to_string(VariationKind k) {
  switch (k) {
    case VariationKind::RV: return "RV";
    case VariationKind::PiPlus: return "PiPlus";
    case VariationKind::PiMinus: return "PiMinus";
    case VariationKind::Gamma: return "Gamma";
    case VariationKind::Neither: return "Neither";
  }
  return "?";
}

NormingPair::NormingPair(FunctionHandle alpha_, FunctionHandle beta_, PsiClass psi_class_, double rho_,
                         double k_)
    : alpha(std::move(alpha_)), beta(std::move(beta_)), psi_class(psi_class_), rho(rho_), k(k_) {
  for (double t : alpha.domain().probe_grid(200)) {
    if (!(alpha(t) > 0.0)) {
      std::ostringstream msg;
      msg << "NormingPair: alpha '" << alpha.name() << "' is not positive at t=" << t;
      throw DomainError(msg.str());
    }
  }
  if (psi_class == PsiClass::ProductCase && (rho != 0.0 || k != 0.0)) {
    throw DomainError("NormingPair: ProductCase requires rho = 0 and k = 0");
  }
}

std::vector<double> default_t_grid() { return {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8}; }

PsiEstimate estimate_psi_limits(const FunctionHandle& alpha, const FunctionHandle& beta, double c,
                                std::span<const double> t_grid) {
  if (!(c > 0.0)) throw DomainError("estimate_psi_limits: c must be positive");
  check_grid(t_grid);
  PsiEstimate est;
  for (double t : t_grid) {
    const double a_t = alpha(t);
    const double a_tc = alpha(t * c);
    if (!(a_t > 0.0) || !(a_tc > 0.0)) {
      std::ostringstream msg;
      msg << "estimate_psi_limits: alpha(t) <= 0 at t=" << (a_t > 0.0 ? t * c : t);
      throw DomainError(msg.str());
    }
    est.t.push_back(t);
    est.psi1_path.push_back(a_tc / a_t);
    est.psi2_path.push_back((beta(t * c) - beta(t)) / a_t);
  }
  const std::size_t n = est.t.size();
  est.psi1 = est.psi1_path[n - 1];
  est.psi2 = est.psi2_path[n - 1];
  const double d1 = std::abs(est.psi1_path[n - 1] - est.psi1_path[n - 2]);
  const double d2 = std::abs(est.psi2_path[n - 1] - est.psi2_path[n - 2]);
  est.converged = d1 < kCauchyTol * std::abs(est.psi1) && d2 < kCauchyTol * std::max(1.0, std::abs(est.psi2));
  return est;
}

PsiEstimate estimate_psi_limits(const NormingPair& np, double c, std::span<const double> t_grid) {
  return estimate_psi_limits(np.alpha, np.beta, c, t_grid);
}

NormingClassification classify_norming(const FunctionHandle& alpha, const FunctionHandle& beta,
                                       std::span<const double> t_grid, std::span<const double> c_grid) {
  NormingClassification out;
  out.c_grid.assign(c_grid.begin(), c_grid.end());
  if (c_grid.empty()) throw DomainError("classify_norming: empty c_grid");

  bool psi1_trivial = true;
  bool psi2_trivial = true;
  for (double c : c_grid) {
    if (!(c > 0.0) || c == 1.0) throw DomainError("classify_norming: c must be positive and != 1");
    auto est = estimate_psi_limits(alpha, beta, c, t_grid);
    std::vector<double> dev1;
    std::vector<double> dev2;
    for (std::size_t i = 0; i < est.t.size(); ++i) {
      dev1.push_back(std::abs(est.psi1_path[i] - 1.0));
      dev2.push_back(std::abs(est.psi2_path[i]));
    }
    psi1_trivial = psi1_trivial && vanishes(dev1, c);
    psi2_trivial = psi2_trivial && vanishes(dev2, c);
    out.evidence.push_back(std::move(est));
  }

  if (psi1_trivial && psi2_trivial) {
    out.psi_class = PsiClass::ProductCase;
    return out;
  }

  if (!psi1_trivial) {
    std::vector<double> rhos;
    for (std::size_t i = 0; i < c_grid.size(); ++i) {
      const auto& est = out.evidence[i];
      const auto n = est.psi1_path.size();
      const double step = std::abs(est.psi1_path[n - 1] - est.psi1_path[n - 2]);
      if (!(step < kCauchyTol * est.psi1)) {
        out.note = "scaling ratio alpha(tc)/alpha(t) did not settle on the t grid";
        return out;
      }
      rhos.push_back(std::log(est.psi1) / std::log(c_grid[i]));
    }
    const auto [lo, hi] = std::minmax_element(rhos.begin(), rhos.end());
    if (*hi - *lo > 1e-2) {
      out.note = "log psi1(c) / log c is not constant across c";
      return out;
    }
    out.rho = std::accumulate(rhos.begin(), rhos.end(), 0.0) / static_cast<double>(rhos.size());
    if (std::abs(out.rho) < 1e-9) out.rho = 0.0;
  }

  if (psi2_trivial) {
    out.psi_class = PsiClass::ScaleOnly;
    return out;
  }

  std::vector<double> ks;
  for (std::size_t i = 0; i < c_grid.size(); ++i) {
    const auto& est = out.evidence[i];
    const auto n = est.psi2_path.size();
    const double step = std::abs(est.psi2_path[n - 1] - est.psi2_path[n - 2]);
    if (!(step < kCauchyTol * std::max(1.0, std::abs(est.psi2)))) {
      out.note = "centering ratio (beta(tc)-beta(t))/alpha(t) did not settle on the t grid";
      return out;
    }
    const double c = c_grid[i];
    const double shape = out.rho == 0.0 ? std::log(c) : (std::pow(c, out.rho) - 1.0) / out.rho;
    ks.push_back(est.psi2 / shape);
  }
  const auto [lo, hi] = std::minmax_element(ks.begin(), ks.end());
  const double k = std::accumulate(ks.begin(), ks.end(), 0.0) / static_cast<double>(ks.size());
  if (*hi - *lo > 1e-2 * std::max(1.0, std::abs(k))) {
    out.note = "psi2(c) does not follow k (c^rho - 1)/rho across c";
    return out;
  }
  out.k = k;
  out.psi_class = PsiClass::Full;
  return out;
}

NormingClassification classify_norming(const NormingPair& np, std::span<const double> t_grid,
                                       std::span<const double> c_grid) {
  return classify_norming(np.alpha, np.beta, t_grid, c_grid);
}

VariationClass classify_variation(const FunctionHandle& u, std::span<const double> t_grid,
                                  std::span<const double> x_grid) {
  check_grid(t_grid);
  if (x_grid.empty()) throw DomainError("classify_variation: empty x_grid");
  VariationClass out;
  std::vector<double> pi_res;

  for (double t : t_grid) {
    VariationEvidence ev;
    ev.t = t;

    const double lu_t = u.log_eval(t);
    double p_sum = 0.0;
    std::vector<double> lr;
    for (double x : x_grid) {
      lr.push_back(u.log_eval(t * x) - lu_t);
      p_sum += lr.back() / std::log(x);
    }
    ev.index = p_sum / static_cast<double>(x_grid.size());
    ev.rv_residual = 0.0;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      const double r = std::abs(std::expm1(lr[i] - ev.index * std::log(x_grid[i])));
      ev.rv_residual = std::isfinite(r) ? std::max(ev.rv_residual, r) : kInf;
    }
    if (!std::isfinite(ev.index)) ev.rv_residual = kInf;

    const double u_t = u(t);
    const double a_hat = u(t * std::numbers::e) - u_t;
    ev.pi_residual = 0.0;
    for (double x : x_grid) {
      const double r = std::abs((u(t * x) - u_t) / a_hat - std::log(x));
      ev.pi_residual = std::isfinite(r) ? std::max(ev.pi_residual, r) : kInf;
    }
    if (!(a_hat != 0.0) || !std::isfinite(a_hat)) ev.pi_residual = kInf;
    pi_res.push_back(ev.pi_residual);
    out.evidence.push_back(ev);
  }

  const auto& last = out.evidence.back();
  const auto& prev = out.evidence[out.evidence.size() - 2];
  const bool rv = last.index > 1e-2 && last.rv_residual <= kResidualTol &&
                  std::abs(last.index - prev.index) <= kResidualTol * last.index;
  if (rv) {
    out.kind = VariationKind::RV;
    out.index = last.index;
    return out;
  }

  if (last.pi_residual <= kResidualTol || shrinking(pi_res)) {
    const double t_last = last.t;
    const bool up = u(t_last * std::numbers::e) > u(t_last);
    out.kind = up ? VariationKind::PiPlus : VariationKind::PiMinus;
    out.index = up ? 1.0 : -1.0;
    FunctionSpec aux;
    aux.name = "aux[" + u.name() + "]";
    aux.domain = u.domain();
    aux.eval = [u, up](double t) {
      const double d = u(t * std::numbers::e) - u(t);
      return up ? d : -d;
    };
    out.aux = FunctionHandle(std::move(aux));
  }
  return out;
}

VariationClass classify_h_log(const FunctionHandle& h, std::span<const double> t_grid,
                              std::span<const double> x_grid) {
  return classify_variation(compose(h, parse_function("log")), t_grid, x_grid);
}

VariationClass test_pi_varying(const FunctionHandle& f, const FunctionHandle& aux,
                               std::span<const double> t_grid, std::span<const double> x_grid) {
  check_grid(t_grid);
  VariationClass out;
  std::vector<double> res;
  for (double t : t_grid) {
    VariationEvidence ev;
    ev.t = t;
    const double f_t = f(t);
    const double a_t = aux(t);
    double k_sum = 0.0;
    std::vector<double> ratio;
    for (double x : x_grid) {
      ratio.push_back((f(t * x) - f_t) / a_t);
      k_sum += ratio.back() / std::log(x);
    }
    ev.index = k_sum / static_cast<double>(x_grid.size());
    ev.rv_residual = std::numeric_limits<double>::quiet_NaN();
    ev.pi_residual = 0.0;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      const double r = std::abs(ratio[i] - ev.index * std::log(x_grid[i]));
      ev.pi_residual = std::isfinite(r) ? std::max(ev.pi_residual, r) : kInf;
    }
    res.push_back(ev.pi_residual);
    out.evidence.push_back(ev);
  }
  const auto& last = out.evidence.back();
  if ((last.pi_residual <= kResidualTol || shrinking(res)) && std::abs(last.index) > 1e-9) {
    out.kind = last.index > 0 ? VariationKind::PiPlus : VariationKind::PiMinus;
    out.index = last.index;
    out.aux = aux;
  }
  return out;
}

VariationClass test_gamma_varying(const FunctionHandle& v, const FunctionHandle& f,
                                  std::span<const double> t_grid, std::span<const double> x_grid) {
  check_grid(t_grid);
  VariationClass out;
  std::vector<double> res;
  for (double t : t_grid) {
    VariationEvidence ev;
    ev.t = t;
    ev.index = 1.0;
    ev.rv_residual = std::numeric_limits<double>::quiet_NaN();
    const double lv_t = v.log_eval(t);
    const double f_t = f(t);
    ev.pi_residual = 0.0;
    for (double x : x_grid) {
      const double r = std::abs(std::expm1(v.log_eval(t + x * f_t) - lv_t - x));
      ev.pi_residual = std::isfinite(r) ? std::max(ev.pi_residual, r) : kInf;
    }
    res.push_back(ev.pi_residual);
    out.evidence.push_back(ev);
  }
  if (out.evidence.back().pi_residual <= kResidualTol || shrinking(res)) {
    out.kind = VariationKind::Gamma;
    out.index = 1.0;
    out.aux = f;
  }
  return out;
}

bool looks_slowly_varying(const FunctionHandle& g) {
  // Local index log(g(10t)/g(t)) / log 10 must be near zero and falling.
  auto index = [&g](double t) { return std::abs(std::log(g(10.0 * t) / g(t))) / std::numbers::ln10; };
  const double i6 = index(1e6);
  const double i12 = index(1e12);
  if (!std::isfinite(i6) || !std::isfinite(i12)) return false;
  return i12 <= 1e-9 || (i12 < 0.6 * i6 && i12 < 0.2);
}

bool looks_self_neglecting(const FunctionHandle& f) {
  auto drift = [&f](double t) {
    const double ft = f(t);
    return std::abs(f(t + ft) / ft - 1.0);
  };
  const double r2 = drift(1e2);
  const double r4 = drift(1e4);
  return std::isfinite(r2) && std::isfinite(r4) && r4 <= r2 + 1e-15 && r4 < 0.1;
}

FunctionHandle pi_builder(const FunctionHandle& g) {
  if (!looks_slowly_varying(g)) throw DomainError("pi_builder: '" + g.name() + "' does not look slowly varying");

  FunctionSpec s;
  s.name = "pi:" + g.name();
  s.params = g.params();
  s.monotone = true;
  s.limit_hi = kInf;

  if (has_name_prefix(g, "const:")) {
    const double c = g.params().at(0);
    if (!(c > 0.0)) throw DomainError("pi_builder: constant auxiliary must be positive");
    s.domain = Domain::real();
    s.eval = [c](double x) { return c * x; };
    s.inverse = [c](double y) { return y / c; };
    s.derivative = [c](double) { return c; };
  } else if (g.name() == "log") {
    s.domain = Domain::above(0.0, false);
    s.eval = [](double x) { return 0.5 * x * x; };
    s.inverse = [](double y) { return y >= 0.0 ? std::sqrt(2.0 * y) : 0.0; };
    s.derivative = [](double x) { return x; };
  } else if (has_name_prefix(g, "logpow:")) {
    const double p = g.params().at(0);
    s.domain = Domain::above(0.0, false);
    s.eval = [p](double x) { return std::pow(x, p + 1.0) / (p + 1.0); };
    s.inverse = [p](double y) { return y >= 0.0 ? std::pow((p + 1.0) * y, 1.0 / (p + 1.0)) : 0.0; };
    s.derivative = [p](double x) { return std::pow(x, p); };
  } else if (g.name() == "loglog") {
    // g(e^u) = log u; h(x) = x log x - x, increasing where log x >= 0.
    s.domain = Domain::above(1.0, false);
    s.eval = [](double x) { return x * std::log(x) - x; };
    s.derivative = [](double x) { return std::log(x); };
  } else {
    // e^u overflows past ~709, which bounds the generic domain.
    s.domain = {0.0, 700.0, false, false};
    auto integrand = [g](double u) {
      const double v = g(std::exp(u));
      if (!(v > 0.0)) throw DomainError("pi_builder: g(e^u) must be positive on the integration path");
      return v;
    };
    s.eval = [integrand](double x) { return quad::integrate(integrand, 0.0, x); };
    s.derivative = [g](double x) { return g(std::exp(x)); };
  }
  return FunctionHandle(std::move(s));
}

FunctionHandle gamma_builder(const FunctionHandle& f) {
  if (!looks_self_neglecting(f)) {
    throw DomainError("gamma_builder: '" + f.name() + "' does not look self-neglecting");
  }

  ScalarFn log_h;
  ScalarFn inverse;
  if (has_name_prefix(f, "const:")) {
    const double c = f.params().at(0);
    if (!(c > 0.0)) throw DomainError("gamma_builder: f must be positive");
    log_h = [c](double x) { return (x - 1.0) / c; };
    inverse = [c](double y) { return 1.0 + c * std::log(y); };
  } else if (has_name_prefix(f, "pow:")) {
    const double q = f.params().at(0);
    const double e = 1.0 - q;
    log_h = [e](double x) { return (std::pow(x, e) - 1.0) / e; };
    inverse = [e](double y) {
      const double base = 1.0 + e * std::log(y);
      return base > 0.0 ? std::pow(base, 1.0 / e) : 1.0;
    };
  } else {
    auto integrand = [f](double u) {
      const double v = f(u);
      if (!(v > 0.0)) throw DomainError("gamma_builder: f must be positive on the integration path");
      return 1.0 / v;
    };
    log_h = [integrand](double x) { return quad::integrate(integrand, 1.0, x); };
  }

  FunctionSpec s;
  s.name = "gamma:" + f.name();
  s.params = f.params();
  s.domain = Domain::above(1.0, false);
  s.eval = [log_h](double x) { return std::exp(log_h(x)); };
  s.log_eval = log_h;
  s.inverse = inverse;
  s.derivative = [log_h, f](double x) { return std::exp(log_h(x)) / f(x); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

}  // namespace cevlab
