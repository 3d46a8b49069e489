#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "cevlab/error.hpp"
#include "cevlab/normal.hpp"
#include "cevlab/rv_toolkit.hpp"

namespace cevlab {

namespace {

using Builder = std::function<FunctionHandle(const std::vector<double>&)>;

struct Family {
  std::size_t arity;
  std::string help;
  Builder build;
};

std::string label(const std::string& family, const std::vector<double>& params) {
  std::ostringstream out;
  out << family;
  for (std::size_t i = 0; i < params.size(); ++i) out << (i == 0 ? ":" : ",") << params[i];
  return out.str();
}

FunctionHandle make_pow(double p) {
  FunctionSpec s;
  s.name = label("pow", {p});
  s.params = {p};
  s.domain = Domain::positive();
  s.eval = [p](double t) { return std::pow(t, p); };
  s.log_eval = [p](double t) { return p * std::log(t); };
  s.derivative = [p](double t) { return p * std::pow(t, p - 1.0); };
  if (p != 0.0) s.inverse = [p](double y) { return std::pow(y, 1.0 / p); };
  s.monotone = p >= 0.0;
  s.limit_hi = p > 0.0 ? kInf : (p < 0.0 ? 0.0 : 1.0);
  return FunctionHandle(std::move(s));
}

FunctionHandle make_log() {
  FunctionSpec s;
  s.name = "log";
  s.domain = Domain::positive();
  s.eval = [](double t) { return std::log(t); };
  s.inverse = [](double y) { return std::exp(y); };
  s.derivative = [](double t) { return 1.0 / t; };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_logpow(double p) {
  if (!(p > 0.0)) throw SpecError("logpow: exponent must be positive");
  FunctionSpec s;
  s.name = label("logpow", {p});
  s.params = {p};
  s.domain = Domain::above(1.0, false);
  s.eval = [p](double t) { return std::pow(std::log(t), p); };
  s.inverse = [p](double y) { return std::exp(std::pow(y, 1.0 / p)); };
  s.derivative = [p](double t) { return p * std::pow(std::log(t), p - 1.0) / t; };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_loglog() {
  FunctionSpec s;
  s.name = "loglog";
  s.domain = Domain::above(1.0);
  s.eval = [](double t) { return std::log(std::log(t)); };
  s.inverse = [](double y) { return std::exp(std::exp(y)); };
  s.derivative = [](double t) { return 1.0 / (t * std::log(t)); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_exp() {
  FunctionSpec s;
  s.name = "exp";
  s.domain = Domain::real();
  s.eval = [](double t) { return std::exp(t); };
  s.log_eval = [](double t) { return t; };
  s.inverse = [](double y) { return std::log(y); };
  s.derivative = [](double t) { return std::exp(t); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_identity(const std::string& name, Domain domain) {
  FunctionSpec s;
  s.name = name;
  s.domain = domain;
  s.eval = [](double t) { return t; };
  s.inverse = [](double y) { return y; };
  s.derivative = [](double) { return 1.0; };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_affine(const std::string& name, double slope, double shift) {
  FunctionSpec s;
  s.name = name;
  s.domain = Domain::real();
  s.eval = [slope, shift](double t) { return slope * t + shift; };
  if (slope != 0.0) s.inverse = [slope, shift](double y) { return (y - shift) / slope; };
  s.derivative = [slope](double) { return slope; };
  s.monotone = slope >= 0.0;
  if (slope > 0.0) s.limit_hi = kInf;
  if (slope < 0.0) s.limit_hi = -kInf;
  if (slope == 0.0) s.limit_hi = shift;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_recip() {
  FunctionSpec s;
  s.name = "recip";
  s.domain = Domain::positive();
  s.eval = [](double t) { return 1.0 / t; };
  s.inverse = [](double y) { return 1.0 / y; };
  s.derivative = [](double t) { return -1.0 / (t * t); };
  s.limit_hi = 0.0;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_exp_b() {
  FunctionSpec s;
  s.name = "exp_b";
  s.domain = Domain::above(1.0, false);
  s.eval = [](double t) { return std::log(t); };
  s.inverse = [](double y) { return std::exp(y); };
  s.derivative = [](double t) { return 1.0 / t; };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_normal_b() {
  FunctionSpec s;
  s.name = "normal_b";
  s.domain = Domain::above(1.0);
  s.eval = [](double t) { return normal::b(t); };
  s.inverse = [](double y) { return normal::b_inverse(y); };
  s.derivative = [](double t) {
    const double y = normal::b(t);
    return 1.0 / (t * t * normal::pdf(y));
  };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_normal_b_asym() {
  FunctionSpec s;
  s.name = "normal_b_asym";
  s.domain = Domain::above(std::exp(1.0));
  s.eval = [](double t) { return normal::b_asymptotic(t); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_normal_binv() {
  FunctionSpec s;
  s.name = "normal_binv";
  // Below -5 the value is within ~1e-7 of 1 and rounding swamps the inverse.
  s.domain = Domain::above(-5.0);
  s.eval = [](double y) { return normal::b_inverse(y); };
  s.log_eval = [](double y) { return -normal::log_sf(y); };
  s.inverse = [](double t) { return t > 1.0 ? normal::b(t) : -kInf; };
  s.derivative = [](double y) { return normal::inverse_mills(y) * normal::b_inverse(y); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_normal_neglogsf() {
  FunctionSpec s;
  s.name = "normal_neglogsf";
  s.domain = Domain::real();
  s.eval = [](double y) { return -normal::log_sf(y); };
  s.inverse = [](double v) {
    if (!(v > 0.0)) return -kInf;
    // sf(y) = e^{-v}; for sf near 1 go through the lower tail to keep precision.
    const double p = std::exp(-v);
    if (p > 0.5) {
      const double q = -std::expm1(-v);
      return q > 0.0 ? -normal::isf(q) : -kInf;
    }
    return normal::isf(p);
  };
  s.derivative = [](double y) { return normal::inverse_mills(y); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_mills() {
  FunctionSpec s;
  s.name = "mills";
  s.domain = Domain::real();
  s.eval = [](double y) { return normal::inverse_mills(y); };
  s.monotone = true;
  s.limit_hi = kInf;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_log_gap(double c) {
  FunctionSpec s;
  s.name = label("log_gap", {c});
  s.params = {c};
  s.domain = Domain::above(1.0);
  s.eval = [c](double t) { return c - 1.0 / std::log(t); };
  s.inverse = [c](double y) { return y < c ? std::exp(1.0 / (c - y)) : kInf; };
  s.derivative = [](double t) {
    const double l = std::log(t);
    return 1.0 / (t * l * l);
  };
  s.monotone = true;
  s.limit_hi = c;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_exp_gap(double c) {
  FunctionSpec s;
  s.name = label("exp_gap", {c});
  s.params = {c};
  s.domain = Domain::above(0.0, false);
  s.eval = [c](double t) { return c - std::exp(-t); };
  s.derivative = [](double t) { return std::exp(-t); };
  s.monotone = true;
  s.limit_hi = c;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_pareto_cdf() {
  FunctionSpec s;
  s.name = "pareto_cdf";
  s.domain = Domain::above(1.0, false);
  s.eval = [](double y) { return 1.0 - 1.0 / y; };
  s.inverse = [](double u) { return u < 1.0 ? 1.0 / (1.0 - u) : kInf; };
  s.monotone = true;
  s.limit_hi = 1.0;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_exp_cdf() {
  FunctionSpec s;
  s.name = "exp_cdf";
  s.domain = Domain::above(0.0, false);
  s.eval = [](double y) { return -std::expm1(-y); };
  s.monotone = true;
  s.limit_hi = 1.0;
  return FunctionHandle(std::move(s));
}

FunctionHandle make_normal_cdf() {
  FunctionSpec s;
  s.name = "normal_cdf";
  s.domain = Domain::real();
  s.eval = [](double y) { return normal::cdf(y); };
  s.monotone = true;
  s.limit_hi = 1.0;
  return FunctionHandle(std::move(s));
}

const std::map<std::string, Family>& families() {
  static const std::map<std::string, Family> table = {
      {"id", {0, "identity", [](const auto&) { return make_identity("id", Domain::real()); }}},
      {"pow", {1, "pow:p  t^p on (0,inf)", [](const auto& p) { return make_pow(p[0]); }}},
      {"log", {0, "natural log", [](const auto&) { return make_log(); }}},
      {"logpow", {1, "logpow:p  (log t)^p on [1,inf)", [](const auto& p) { return make_logpow(p[0]); }}},
      {"loglog", {0, "log log t on (1,inf)", [](const auto&) { return make_loglog(); }}},
      {"exp", {0, "e^t", [](const auto&) { return make_exp(); }}},
      {"const", {1, "const:c", [](const auto& p) { return constant(p[0]); }}},
      {"mul", {1, "mul:c  c*t", [](const auto& p) { return make_affine(label("mul", p), p[0], 0.0); }}},
      {"add", {1, "add:c  t+c", [](const auto& p) { return make_affine(label("add", p), 1.0, p[0]); }}},
      {"neg", {0, "-t", [](const auto&) { return make_affine("neg", -1.0, 0.0); }}},
      {"recip", {0, "1/t on (0,inf)", [](const auto&) { return make_recip(); }}},
      {"pareto_b", {0, "Pareto norming b(t)=t", [](const auto&) {
         return make_identity("pareto_b", Domain::above(1.0, false));
       }}},
      {"exp_b", {0, "exponential norming b(t)=log t", [](const auto&) { return make_exp_b(); }}},
      {"normal_b", {0, "normal norming (1/(1-N))^{<-}(t)", [](const auto&) { return make_normal_b(); }}},
      {"normal_b_asym", {0, "two-term expansion of normal_b", [](const auto&) { return make_normal_b_asym(); }}},
      {"normal_binv", {0, "1/(1-N(y))", [](const auto&) { return make_normal_binv(); }}},
      {"normal_neglogsf", {0, "-log(1-N(y)) = log normal_binv", [](const auto&) { return make_normal_neglogsf(); }}},
      {"mills", {0, "inverse Mills ratio n(y)/(1-N(y))", [](const auto&) { return make_mills(); }}},
      {"log_gap", {1, "log_gap:c  c - 1/log t", [](const auto& p) { return make_log_gap(p[0]); }}},
      {"exp_gap", {1, "exp_gap:c  c - e^{-t}", [](const auto& p) { return make_exp_gap(p[0]); }}},
      {"pareto_cdf", {0, "standard Pareto cdf", [](const auto&) { return make_pareto_cdf(); }}},
      {"exp_cdf", {0, "unit exponential cdf", [](const auto&) { return make_exp_cdf(); }}},
      {"normal_cdf", {0, "standard normal cdf", [](const auto&) { return make_normal_cdf(); }}},
  };
  return table;
}

std::string known_list() {
  std::string out;
  for (const auto& name : function_names()) out += (out.empty() ? "" : ", ") + name;
  return out;
}

double parse_number(const std::string& text, std::string_view spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw SpecError("bad numeric parameter '" + text + "' in function spec '" + std::string(spec) + "'");
  }
}

}  // namespace

std::vector<std::string> function_names() {
  std::vector<std::string> names;
  for (const auto& [name, family] : families()) names.push_back(name);
  names.insert(names.end(), {"compose", "gamma", "pi"});
  std::sort(names.begin(), names.end());
  return names;
}

FunctionHandle parse_function(std::string_view spec) {
  const std::string text(spec);
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);

  if (head == "compose") {
    std::vector<std::string> parts;
    std::stringstream stream(rest);
    for (std::string part; std::getline(stream, part, ',');) parts.push_back(part);
    if (parts.size() < 2) throw SpecError("compose needs at least two functions: '" + text + "'");
    FunctionHandle result = parse_function(parts.back());
    for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) result = compose(parse_function(*it), result);
    return result;
  }
  if (head == "pi") return pi_builder(parse_function(rest));
  if (head == "gamma") return gamma_builder(parse_function(rest));

  const auto found = families().find(head);
  if (found == families().end()) {
    throw SpecError("unknown function '" + head + "'; known: " + known_list());
  }
  std::vector<double> params;
  if (!rest.empty()) {
    std::stringstream stream(rest);
    for (std::string part; std::getline(stream, part, ',');) params.push_back(parse_number(part, spec));
  }
  if (params.size() != found->second.arity) {
    throw SpecError("function '" + head + "' expects " + std::to_string(found->second.arity) +
                    " parameter(s): " + found->second.help);
  }
  return found->second.build(params);
}

}  // namespace cevlab
