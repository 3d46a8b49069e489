#include "cevlab/function_handle.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cevlab/error.hpp"

namespace cevlab {

namespace {

constexpr std::size_t kProbePoints = 1000;

std::string join_name(const std::string& outer, const std::string& inner) {
  return outer + "(" + inner + ")";
}

}  // namespace

bool Domain::contains(double t) const {
  const bool above_lo = lo_open ? t > lo : t >= lo;
  const bool below_hi = hi_open ? t < hi : t <= hi;
  return above_lo && below_hi;
}

std::vector<double> Domain::probe_grid(std::size_t n) const {
  std::vector<double> grid;
  grid.reserve(n);
  const double denom = static_cast<double>(n + 1);
  if (std::isfinite(lo) && std::isfinite(hi)) {
    for (std::size_t i = 1; i <= n; ++i) grid.push_back(lo + (hi - lo) * static_cast<double>(i) / denom);
  } else if (std::isfinite(lo)) {
    // lo + scale * 10^u for u in (-3, 6).
    const double s = std::max(1.0, std::abs(lo));
    for (std::size_t i = 1; i <= n; ++i) {
      grid.push_back(lo + s * std::pow(10.0, -3.0 + 9.0 * static_cast<double>(i) / denom));
    }
  } else if (std::isfinite(hi)) {
    const double s = std::max(1.0, std::abs(hi));
    for (std::size_t i = n; i >= 1; --i) {
      grid.push_back(hi - s * std::pow(10.0, -3.0 + 9.0 * static_cast<double>(i) / denom));
    }
  } else {
    for (std::size_t i = 1; i <= n; ++i) grid.push_back(-30.0 + 60.0 * static_cast<double>(i) / denom);
  }
  return grid;
}

FunctionHandle::FunctionHandle(FunctionSpec spec) : spec_(std::move(spec)) {
  if (!spec_.eval) throw DomainError("FunctionHandle '" + spec_.name + "': missing eval");
  const auto grid = spec_.domain.probe_grid(kProbePoints);

  if (spec_.monotone) {
    double prev = -kInf;
    for (double t : grid) {
      const double v = spec_.eval(t);
      if (std::isnan(v)) continue;
      // Relative slack absorbs rounding in otherwise flat stretches.
      if (v < prev - 1e-12 * std::max(1.0, std::abs(prev))) {
        std::ostringstream msg;
        msg << "FunctionHandle '" << spec_.name << "': flagged monotone but decreases near t=" << t;
        throw DomainError(msg.str());
      }
      prev = std::max(prev, v);
    }
  }

  if (spec_.inverse) {
    for (double t : grid) {
      const double v = spec_.eval(t);
      if (!std::isfinite(v)) continue;
      const double back = spec_.inverse(v);
      if (!std::isfinite(back)) continue;
      if (std::abs(back - t) > 1e-9 * std::max(1.0, std::abs(t))) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "FunctionHandle '" << spec_.name << "': inverse round-trip failed at t=" << t
            << " (got " << back << ")";
        throw DomainError(msg.str());
      }
    }
  }
}

double FunctionHandle::log_eval(double t) const {
  if (spec_.log_eval) return spec_.log_eval(t);
  return std::log(spec_.eval(t));
}

double FunctionHandle::inverse(double y) const {
  if (!spec_.inverse) throw DomainError("FunctionHandle '" + spec_.name + "' has no exact inverse");
  return spec_.inverse(y);
}

double FunctionHandle::derivative(double t) const {
  if (!spec_.derivative) throw DomainError("FunctionHandle '" + spec_.name + "' has no derivative");
  return spec_.derivative(t);
}

FunctionHandle compose(const FunctionHandle& f, const FunctionHandle& g) {
  FunctionSpec s;
  s.name = join_name(f.name(), g.name());
  s.params = f.params();
  s.params.insert(s.params.end(), g.params().begin(), g.params().end());
  s.domain = g.domain();
  // Pull a finite lower end of f back through an increasing g.
  if (std::isfinite(f.domain().lo) && g.monotone() && g.has_inverse()) {
    const double pulled = g.inverse(f.domain().lo);
    if (std::isfinite(pulled) && pulled > s.domain.lo) {
      s.domain.lo = pulled;
      s.domain.lo_open = f.domain().lo_open;
    }
  }
  s.eval = [f, g](double t) { return f(g(t)); };
  // Monotone nondecreasing is preserved when both parts are nondecreasing.
  s.monotone = f.monotone() && g.monotone();
  if (f.has_inverse() && g.has_inverse()) {
    s.inverse = [f, g](double y) { return g.inverse(f.inverse(y)); };
  }
  if (f.has_derivative() && g.has_derivative()) {
    s.derivative = [f, g](double t) { return f.derivative(g(t)) * g.derivative(t); };
  }
  if (f.name() == "log" && g.has_log_eval()) {
    // log(g(t)) straight from g's log form avoids overflow of g.
    s.eval = [g](double t) { return g.log_eval(t); };
  } else if (f.has_log_eval()) {
    s.log_eval = [f, g](double t) { return f.log_eval(g(t)); };
  }
  if (g.limit_hi() && f.limit_hi() && std::isinf(*g.limit_hi()) && *g.limit_hi() > 0 &&
      std::isinf(f.domain().hi)) {
    s.limit_hi = f.limit_hi();
  }
  return FunctionHandle(std::move(s));
}

FunctionHandle scale(double c, const FunctionHandle& f) {
  FunctionSpec s;
  std::ostringstream name;
  name << c << "*" << f.name();
  s.name = name.str();
  s.params = f.params();
  s.domain = f.domain();
  s.eval = [c, f](double t) { return c * f(t); };
  s.monotone = f.monotone() && c >= 0.0;
  if (f.has_inverse() && c != 0.0) s.inverse = [c, f](double y) { return f.inverse(y / c); };
  if (f.has_derivative()) s.derivative = [c, f](double t) { return c * f.derivative(t); };
  if (c > 0.0 && (f.has_log_eval())) {
    s.log_eval = [c, f](double t) { return std::log(c) + f.log_eval(t); };
  }
  if (f.limit_hi()) s.limit_hi = c == 0.0 ? 0.0 : c * *f.limit_hi();
  return FunctionHandle(std::move(s));
}

FunctionHandle constant(double value, Domain domain) {
  FunctionSpec s;
  std::ostringstream name;
  name << "const:" << value;
  s.name = name.str();
  s.params = {value};
  s.domain = domain;
  s.eval = [value](double) { return value; };
  s.derivative = [](double) { return 0.0; };
  s.monotone = true;
  s.limit_hi = value;
  return FunctionHandle(std::move(s));
}

}  // namespace cevlab
