#include "cevlab/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "cevlab/error.hpp"
#include "cevlab/normal.hpp"

namespace cevlab::zoo {

namespace {

constexpr double kTailMass = 1e-7;

std::string fmt(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

void check_theta(double theta, const char* who) {
  if (!(theta > 0.0 && theta < 1.0)) {
    throw DomainError(std::string(who) + ": theta must lie in (0, 1), got " + fmt(theta));
  }
}

void check_p(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(who) + ": p must lie in (0, 1), got " + fmt(p));
}

/// R(a) = nu([0,a] x (1,inf]) for the logistic exponent.
double logistic_r(double theta, double a) {
  if (!(a > 0.0)) return 0.0;
  if (std::isinf(a)) return 1.0;
  if (a <= 1.0) return std::expm1(theta * std::log1p(std::pow(a, 1.0 / theta))) / a;
  return std::exp(theta * std::log1p(std::pow(a, -1.0 / theta))) - 1.0 / a;
}

/// One logistic pair with Pareto margins.
Pair logistic_pair(double theta, Stream& s) {
  const double u = std::numbers::pi * s.uniform();
  const double e = s.exponential();
  const double log_a = (theta / (1.0 - theta)) * std::log(std::sin(theta * u)) +
                       std::log(std::sin((1.0 - theta) * u)) - std::log(std::sin(u)) / (1.0 - theta);
  const double log_s = ((1.0 - theta) / theta) * (log_a - std::log(e));
  auto pareto = [&](double log_frechet) { return -1.0 / std::expm1(-std::exp(-log_frechet)); };
  const double x = pareto(theta * (log_s - std::log(s.exponential())));
  const double y = pareto(theta * (log_s - std::log(s.exponential())));
  return {x, y};
}

Standardizer pareto_standardizer(std::string note = "") {
  Standardizer st = standardize_y(parse_function("pareto_cdf"), 1.0);
  st.provenance.note = std::move(note);
  return st;
}

FunctionHandle zero_on_positive() { return constant(0.0, Domain::positive()); }

ScalarFn normal_limit(double rho) {
  const double s = std::sqrt(1.0 - rho * rho);
  return [s](double x) { return normal::cdf(x / s); };
}

void check_rho(double rho, const char* who) {
  if (!(std::abs(rho) < 1.0)) throw DomainError(std::string(who) + ": |rho| must be < 1, got " + fmt(rho));
}

std::map<std::string, double> parse_params(const std::string& rest, const std::string& spec,
                                           const std::vector<std::string>& keys) {
  std::map<std::string, double> out;
  if (rest.empty()) return out;
  std::stringstream stream(rest);
  std::size_t position = 0;
  for (std::string part; std::getline(stream, part, ','); ++position) {
    const auto eq = part.find('=');
    std::string key;
    std::string value;
    if (eq == std::string::npos) {
      if (position >= keys.size()) throw SpecError("too many parameters in model spec '" + spec + "'");
      key = keys[position];
      value = part;
    } else {
      key = part.substr(0, eq);
      value = part.substr(eq + 1);
    }
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw SpecError("unknown parameter '" + key + "' in model spec '" + spec + "'");
    }
    try {
      std::size_t used = 0;
      out[key] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::exception&) {
      throw SpecError("bad value '" + value + "' for '" + key + "' in model spec '" + spec + "'");
    }
  }
  return out;
}

double get(const std::map<std::string, double>& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

Pairs ConditionalModel::sample_standardized(std::size_t n, std::uint64_t seed, Exec exec, int workers) const {
  Pairs pts = sampler(n, seed, exec, workers);
  const FunctionHandle& map = y_standardizer.map;
  for (auto& p : pts) p[1] = map(p[1]);
  return pts;
}

LogisticDependence::LogisticDependence(double theta) : theta_(theta) { check_theta(theta, "LogisticDependence"); }

double LogisticDependence::exponent(double x, double y) const {
  return std::pow(std::pow(x, -1.0 / theta_) + std::pow(y, -1.0 / theta_), theta_);
}

double logistic_nu_rect(double theta, double x, double y) {
  if (!(theta > 0.0 && theta <= 1.0)) throw DomainError("logistic_nu_rect: theta must lie in (0, 1]");
  if (!(y > 0.0)) throw DomainError("logistic_nu_rect: y must be positive");
  if (x < 0.0) throw DomainError("logistic_nu_rect: x must be nonnegative");
  if (theta == 1.0) return x > 0.0 ? 1.0 / y : 0.0;
  // Homogeneity of order -1 reduces the rectangle to y = 1.
  return logistic_r(theta, x / y) / y;
}

Pairs sample_logistic_pareto(double theta, std::size_t n, std::uint64_t seed, Exec exec, int workers) {
  check_theta(theta, "sample_logistic_pareto");
  return generate<Pair>(n, seed, exec, workers, [theta](Stream& s) { return logistic_pair(theta, s); });
}

Pairs sample_bivariate_normal(double rho, std::size_t n, std::uint64_t seed, Exec exec, int workers) {
  check_rho(rho, "sample_bivariate_normal");
  const double c = std::sqrt(1.0 - rho * rho);
  return generate<Pair>(n, seed, exec, workers, [rho, c](Stream& s) {
    const double n1 = s.normal();
    const double n2 = s.normal();
    return Pair{c * n1 + rho * n2, n2};
  });
}

ConditionalModel bvn_model(double rho) {
  check_rho(rho, "bvn_model");
  const double sd = std::sqrt(1.0 - rho * rho);
  NormingPair np(constant(1.0, Domain::above(1.0)), scale(rho, parse_function("normal_b")), PsiClass::ProductCase);
  ConditionalModel m{"bvn:" + fmt(rho),
                     [rho](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
                       return sample_bivariate_normal(rho, n, seed, exec, workers);
                     },
                     np,
                     standardize_y(parse_function("normal_cdf"), 0.0),
                     normal_limit(rho),
                     false,
                     {-6.0 * sd, 6.0 * sd},
                     std::nullopt,
                     std::nullopt};
  m.density = [rho, sd](double x, double y) {
    if (!(y > 1.0)) return 0.0;
    const double b = normal::b(y);
    return normal::pdf((x - rho * b) / sd) / (sd * y * y);
  };
  return m;
}

ConditionalModel bvn_exponential_margin_model(double rho) {
  if (!(rho > 0.0 && rho < 1.0)) {
    throw DomainError("bvn_exponential_margin_model: rho must lie in (0, 1), got " + fmt(rho));
  }
  const double sd = std::sqrt(1.0 - rho * rho);
  // Centre at rho E[N2 | N2 > b(t)] = rho lambda(b(t)).
  const FunctionHandle mills = parse_function("mills");
  const FunctionHandle centre = scale(rho, compose(mills, parse_function("normal_b")));
  NormingPair np(compose(mills, centre), compose(parse_function("normal_neglogsf"), centre),
                 PsiClass::ProductCase);
  return {"bvn-exp:" + fmt(rho),
          [rho](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
            Pairs pts = sample_bivariate_normal(rho, n, seed, exec, workers);
            for (auto& p : pts) p[0] = -normal::log_sf(p[0]);
            return pts;
          },
          np,
          standardize_y(parse_function("normal_cdf"), 0.0),
          normal_limit(rho),
          false,
          {-6.0 * sd, 6.0 * sd},
          std::nullopt,
          std::nullopt};
}

ConditionalModel mixture_model(MixtureKind kind, double p, double theta) {
  check_theta(theta, "mixture_model");
  if (kind != MixtureKind::PiLogIII) check_p(p, "mixture_model");

  // Mixed pair with transform h applied to the light coordinate.
  auto make_sampler = [theta](std::function<double(double)> h, bool reciprocal_x) -> Sampler {
    return [theta, h, reciprocal_x](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
      return generate<Pair>(n, seed, exec, workers, [&](Stream& s) {
        const bool b = s.coin();
        const Pair uv = logistic_pair(theta, s);
        Pair out = b ? Pair{uv[0], h(uv[1])} : Pair{h(uv[0]), uv[1]};
        if (reciprocal_x) out[0] = 1.0 / out[0];
        return out;
      });
    };
  };
  const double low_dep = std::pow(kTailMass / theta, theta / (1.0 - theta));
  const Standardizer st = pareto_standardizer("t P[Y > t] -> 1/2");

  switch (kind) {
    case MixtureKind::PowerI: {
      NormingPair np(parse_function("pow:" + fmt(p)), zero_on_positive(), PsiClass::ScaleOnly, p);
      return {"mix1:p=" + fmt(p) + ",theta=" + fmt(theta),
              make_sampler([p](double v) { return std::pow(v, p); }, false),
              np,
              st,
              [p, theta](double x) { return x > 0.0 ? logistic_r(theta, std::pow(x, 1.0 / p)) : 0.0; },
              true,
              {0.0, std::pow(1.0 / kTailMass, p)},
              std::nullopt,
              std::nullopt};
    }
    case MixtureKind::ReciprocalII: {
      const FunctionHandle h = parse_function("pow:" + fmt(-p));
      NormingPair np(h, h, PsiClass::Full, -p, -p);
      return {"mix2:p=" + fmt(p) + ",theta=" + fmt(theta),
              make_sampler([p](double v) { return std::pow(v, p); }, true),
              np,
              st,
              [p, theta](double x) {
                if (!(x > -1.0)) return 0.0;
                return 1.0 - logistic_r(theta, std::pow(1.0 + x, -1.0 / p));
              },
              true,
              {-1.0 + std::pow(kTailMass, p), std::pow(low_dep, -p) - 1.0},
              std::nullopt,
              std::nullopt};
    }
    case MixtureKind::PiLogIII: {
      NormingPair np(constant(1.0, Domain::positive()), parse_function("log"), PsiClass::Full, 0.0, 1.0);
      return {"mix3:theta=" + fmt(theta),
              make_sampler([](double v) { return std::log(v); }, false),
              np,
              st,
              [theta](double x) { return logistic_r(theta, std::exp(x)); },
              true,
              {std::log(low_dep), std::log(1.0 / kTailMass)},
              std::nullopt,
              std::nullopt};
    }
  }
  throw DomainError("mixture_model: unknown kind");
}

ConditionalModel logistic_model(double theta) {
  check_theta(theta, "logistic_model");
  return {"logistic:theta=" + fmt(theta),
          [theta](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
            return sample_logistic_pareto(theta, n, seed, exec, workers);
          },
          naive_norming(),
          pareto_standardizer(),
          [theta](double x) { return logistic_r(theta, x); },
          false,
          {0.0, 1.0 / kTailMass},
          std::nullopt,
          std::nullopt};
}

ConditionalModel mu_star_model(const spectral::SpectralMeasure& s) {
  const spectral::MuStar m(s);
  const std::string label = s.family().empty() ? spectral::to_string(s.representation()) : s.family();
  return {"mustar:" + label,
          [m](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
            return spectral::sample_polar(m, n, seed, exec, workers);
          },
          naive_norming(),
          pareto_standardizer("t P[Y > t] = 1/|S| for t >= 1"),
          [m](double x) {
            if (x < 0.0) return 0.0;
            return x == 0.0 ? m.s().moment0(0.0) : m.h_star(x);
          },
          false,
          {0.0, 10.0 / kTailMass},
          std::nullopt,
          m};
}

ConditionalModel product_model() {
  NormingPair np(constant(1.0, Domain::positive()), zero_on_positive(), PsiClass::ProductCase);
  ConditionalModel m{"product",
                     [](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
                       return generate<Pair>(n, seed, exec, workers, [](Stream& s) {
                         const double x = s.normal();
                         return Pair{x, s.pareto()};
                       });
                     },
                     np,
                     pareto_standardizer(),
                     [](double x) { return normal::cdf(x); },
                     false,
                     {-6.0, 6.0},
                     std::nullopt,
                     std::nullopt};
  m.density = [](double x, double y) { return y > 1.0 ? normal::pdf(x) / (y * y) : 0.0; };
  return m;
}

ConditionalModel with_coordinate_change(const ConditionalModel& base, const CoordinateChange& cc) {
  if (!cc.admissible) throw DomainError("with_coordinate_change: " + cc.h.name() + " is not admissible: " + cc.note);
  ConditionalModel m = base;
  m.name = base.name + "|h=" + cc.h.name();
  m.sampler = [inner = base.sampler, h = cc.h](std::size_t n, std::uint64_t seed, Exec exec, int workers) {
    Pairs pts = inner(n, seed, exec, workers);
    for (auto& p : pts) p[0] = h(p[0]);
    return pts;
  };
  m.norming = NormingPair(cc.alpha2, cc.beta2, base.norming.psi_class, base.norming.rho, base.norming.k);
  m.limit_cdf = cc.limit_cdf;
  m.support = {cc.chi(base.support.first), cc.chi(base.support.second)};
  m.density.reset();
  m.mu_star.reset();
  return m;
}

NormingPair naive_norming() { return NormingPair(parse_function("pow:1"), zero_on_positive(), PsiClass::ScaleOnly, 1.0); }

std::vector<std::string> model_names() {
  return {"bvn", "bvn-exp", "logistic", "mix1", "mix2", "mix3", "mustar", "product"};
}

ConditionalModel parse_model(std::string_view spec_view) {
  const std::string spec(spec_view);
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (head == "bvn" || head == "bvn-exp") {
    const auto params = parse_params(rest, spec, {"rho"});
    const double rho = get(params, "rho", 0.5);
    return head == "bvn" ? bvn_model(rho) : bvn_exponential_margin_model(rho);
  }
  if (head == "mix1" || head == "mix2") {
    const auto params = parse_params(rest, spec, {"p", "theta"});
    const auto kind = head == "mix1" ? MixtureKind::PowerI : MixtureKind::ReciprocalII;
    return mixture_model(kind, get(params, "p", 0.5), get(params, "theta", 0.5));
  }
  if (head == "mix3") {
    const auto params = parse_params(rest, spec, {"theta"});
    return mixture_model(MixtureKind::PiLogIII, 0.0, get(params, "theta", 0.5));
  }
  if (head == "logistic") {
    const auto params = parse_params(rest, spec, {"theta"});
    return logistic_model(get(params, "theta", 0.5));
  }
  if (head == "mustar") {
    const std::string inner = rest.empty() ? "uniform" : rest;
    ConditionalModel m = mu_star_model(spectral::parse_spectral(inner));
    m.name = "mustar:" + inner;
    return m;
  }
  if (head == "product" && rest.empty()) return product_model();

  std::string known;
  for (const auto& n : model_names()) known += (known.empty() ? "" : ", ") + n;
  throw SpecError("unknown model '" + spec + "'; known: " + known);
}

}  // namespace cevlab::zoo
