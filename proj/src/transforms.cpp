#include "cevlab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cevlab/error.hpp"

namespace cevlab {

namespace {

constexpr double kIndexTol = 5e-2;
constexpr double kSideProbe = 1e6;

std::vector<double> default_x_grid() { return {0.5, 2.0, 10.0}; }

FunctionHandle identity_handle() { return parse_function("id"); }

FunctionHandle make_handle(std::string name, Domain domain, ScalarFn eval, bool monotone,
                           ScalarFn inverse = {}, std::optional<double> limit_hi = std::nullopt) {
  FunctionSpec s;
  s.name = std::move(name);
  s.domain = domain;
  s.eval = std::move(eval);
  s.inverse = std::move(inverse);
  s.monotone = monotone;
  s.limit_hi = limit_hi;
  return FunctionHandle(std::move(s));
}

double finite_beta_infinity(const FunctionHandle& beta, const std::string& who) {
  const LimitEstimate lim = limit_at_infinity(beta);
  if (!lim.finite) throw DomainError(who + ": beta(inf) is not finite for '" + beta.name() + "'");
  return lim.value;
}

/// +1 when beta approaches beta(inf) from above, -1 from below.
double approach_side(const FunctionHandle& beta, double beta_inf, const std::string& who) {
  const double gap = beta(kSideProbe) - beta_inf;
  if (gap == 0.0 || !std::isfinite(gap)) {
    throw DomainError(who + ": beta(inf) - beta vanishes numerically at t=1e6, so the transformed "
                           "centering is not regularly varying");
  }
  return gap > 0.0 ? 1.0 : -1.0;
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

nlohmann::json variation_json(const VariationClass& v) {
  nlohmann::json j;
  j["kind"] = to_string(v.kind);
  j["index"] = v.index;
  if (v.aux) j["aux"] = v.aux->name();
  nlohmann::json ev = nlohmann::json::array();
  for (const auto& e : v.evidence) {
    ev.push_back({{"t", e.t}, {"index", e.index}, {"rv_residual", e.rv_residual}, {"pi_residual", e.pi_residual}});
  }
  j["evidence"] = ev;
  return j;
}

/// Ratio |beta|/alpha tends to zero along the grid.
bool beta_negligible(const NormingPair& np, std::span<const double> t_grid) {
  std::vector<double> r;
  for (double t : t_grid) r.push_back(std::abs(np.beta(t)) / np.alpha(t));
  const double last = r.back();
  if (!std::isfinite(last)) return false;
  if (last <= 1e-3) return true;
  if (r.size() < 4) return false;
  for (std::size_t i = r.size() - 3; i < r.size(); ++i) {
    if (r[i] > r[i - 1]) return false;
  }
  return last <= 0.25 * r.front() && last < 0.1;
}

}  // namespace

std::string to_string(StandardizerDirection d) {
  switch (d) {
    case StandardizerDirection::YMarginal: return "Y_marginal";
    case StandardizerDirection::XCaseI: return "X_case_i";
    case StandardizerDirection::XCaseII: return "X_case_ii";
    case StandardizerDirection::XCaseIII: return "X_case_iii";
  }
  return "?";
}

nlohmann::json Standardizer::to_json() const {
  nlohmann::json j;
  j["direction"] = to_string(direction);
  j["map"] = map.name();
  j["case"] = provenance.case_label;
  j["beta_infinity"] = provenance.beta_infinity ? nlohmann::json(*provenance.beta_infinity) : nlohmann::json();
  if (!provenance.note.empty()) j["note"] = provenance.note;
  return j;
}

Standardizer standardize_y(const FunctionHandle& F, double gamma) {
  auto checked = [&](double expected, const char* map_spec) {
    if (std::abs(gamma - expected) > 1e-12) {
      throw DomainError("standardize_y: '" + F.name() + "' is in the domain of attraction of gamma=" +
                        fmt(expected) + ", not " + fmt(gamma));
    }
    return Standardizer{StandardizerDirection::YMarginal, parse_function(map_spec),
                        {"registry:" + F.name(), std::nullopt, ""}};
  };
  if (F.name() == "pareto_cdf") return checked(1.0, "id");
  if (F.name() == "exp_cdf") return checked(0.0, "exp");
  if (F.name() == "normal_cdf") return checked(0.0, "normal_binv");

  if (!F.monotone()) throw DomainError("standardize_y: '" + F.name() + "' is not a distribution function");
  const auto top = F.limit_hi();
  if (!top || std::abs(*top - 1.0) > 1e-12) {
    throw DomainError("standardize_y: '" + F.name() + "' has no registry inverse and no declared upper limit 1");
  }
  FunctionHandle map = make_handle(
      "1/(1-" + F.name() + ")", F.domain(),
      [F](double y) {
        const double s = 1.0 - F(y);
        return s > 0.0 ? 1.0 / s : kInf;
      },
      true, {}, kInf);
  return {StandardizerDirection::YMarginal, map, {"generic", std::nullopt, "gamma not checked"}};
}

Standardizer standardize_x(const NormingPair& np) {
  switch (np.psi_class) {
    case PsiClass::ProductCase:
      throw DomainError("standardize_x: standardization impossible for a product-form limit");
    case PsiClass::Full: {
      if (!np.beta.monotone()) {
        throw DomainError("standardize_x: beta '" + np.beta.name() + "' is not monotone; rectify it first");
      }
      const auto direction = np.rho > 0.0   ? StandardizerDirection::XCaseI
                             : np.rho == 0.0 ? StandardizerDirection::XCaseII
                                             : StandardizerDirection::XCaseIII;
      Provenance prov{"full:beta-inverse", std::nullopt, ""};
      if (np.rho < 0.0) prov.beta_infinity = finite_beta_infinity(np.beta, "standardize_x");
      return {direction, inverse_function(np.beta), prov};
    }
    case PsiClass::ScaleOnly: {
      if (np.rho > 0.0) {
        if (!np.alpha.monotone()) throw DomainError("standardize_x: alpha '" + np.alpha.name() + "' is not monotone");
        return {StandardizerDirection::XCaseI, inverse_function(np.alpha), {"scale-only:alpha-inverse", std::nullopt, ""}};
      }
      if (np.rho == 0.0) throw DomainError("standardize_x: scale-only pair with rho = 0 is a product case");
      const double b_inf = finite_beta_infinity(np.beta, "standardize_x");
      const FunctionHandle alpha = np.alpha;
      const FunctionHandle recip_alpha =
          make_handle("1/" + alpha.name(), alpha.domain(), [alpha](double t) { return 1.0 / alpha(t); }, true,
                      {}, kInf);
      const FunctionHandle inv = inverse_function(recip_alpha);
      // X sits on the low side of beta(inf) unless beta shows otherwise.
      const double gap = np.beta(kSideProbe) - b_inf;
      const double sigma = gap > 0.0 ? 1.0 : -1.0;
      Domain d = sigma < 0.0 ? Domain{-kInf, b_inf, true, true} : Domain{b_inf, kInf, true, true};
      std::string note = sigma < 0.0 ? "" : "X above beta(inf): map is decreasing";
      FunctionHandle map = make_handle(
          "(1/" + alpha.name() + ")^-1(1/|beta(inf)-x|)", d,
          [inv, b_inf, sigma](double x) { return inv(1.0 / (sigma * (x - b_inf))); }, sigma < 0.0);
      return {StandardizerDirection::XCaseIII, map, {"scale-only:negative-rho", b_inf, note}};
    }
  }
  throw DomainError("standardize_x: unknown class");
}

NegativeRhoReduction reduce_negative_rho(const NormingPair& np) {
  const std::string who = "reduce_negative_rho";
  if (!(np.rho < 0.0)) throw DomainError(who + ": needs rho < 0, got " + fmt(np.rho));
  const double b_inf = finite_beta_infinity(np.beta, who);
  const double sigma = approach_side(np.beta, b_inf, who);
  const double r = std::abs(np.rho);
  const FunctionHandle beta = np.beta;

  const auto grid = default_t_grid();
  for (double t : grid) {
    const double gap = sigma * (beta(t) - b_inf);
    if (!(gap > 0.0) || !std::isfinite(1.0 / gap)) {
      throw DomainError(who + ": 1/(beta(inf) - beta) overflows at t=" + fmt(t) + "; not regularly varying");
    }
  }

  FunctionHandle beta_tilde = make_handle(
      "1/(|rho|(beta(inf)-" + beta.name() + "))", beta.domain(),
      [beta, b_inf, sigma, r](double t) { return 1.0 / (r * sigma * (beta(t) - b_inf)); }, false);
  VariationClass ev = classify_variation(beta_tilde, grid, default_x_grid());
  if (ev.kind != VariationKind::RV || std::abs(ev.index - r) > kIndexTol) {
    throw DomainError(who + ": transformed centering '" + beta_tilde.name() +
                      "' is not regularly varying with index " + fmt(r) + " (classified " +
                      to_string(ev.kind) + ", index " + fmt(ev.index) + ")");
  }
  FunctionHandle transform = make_handle(
      sigma > 0.0 ? "1/(x-" + fmt(b_inf) + ")" : "1/(" + fmt(b_inf) + "-x)",
      sigma > 0.0 ? Domain{b_inf, kInf, true, true} : Domain{-kInf, b_inf, true, true},
      [b_inf, sigma](double x) { return 1.0 / (sigma * (x - b_inf)); }, sigma < 0.0);
  NormingPair pair(beta_tilde, constant(0.0, beta.domain()), PsiClass::ScaleOnly, r, 0.0);
  return {transform, beta_tilde, pair, b_inf, sigma, ev};
}

Rectification rectify_beta(const NormingPair& np, PiSign sign) {
  const std::string who = "rectify_beta";
  if (np.rho != 0.0) throw DomainError(who + ": needs rho = 0, got " + fmt(np.rho));
  const auto grid = default_t_grid();
  const auto xs = default_x_grid();

  if (sign == PiSign::Minus) {
    NormingPair flipped(np.alpha, scale(-1.0, np.beta), np.psi_class, 0.0, -np.k);
    Rectification inner = rectify_beta(flipped, PiSign::Plus);
    const FunctionHandle t_inner = inner.transform;
    inner.transform = make_handle(t_inner.name() + "(-x)", Domain::real(),
                                  [t_inner](double x) { return t_inner(-x); }, false);
    inner.case_label = "negated+" + inner.case_label;
    return inner;
  }

  VariationClass pi = test_pi_varying(np.beta, np.alpha, grid, xs);
  if (pi.kind != VariationKind::PiPlus) {
    throw DomainError(who + ": beta '" + np.beta.name() + "' is not Pi+ varying with auxiliary '" +
                      np.alpha.name() + "' (classified " + to_string(pi.kind) + ")");
  }
  const LimitEstimate lim = limit_at_infinity(np.beta);
  if (!lim.finite) {
    return {identity_handle(), np, "identity", std::nullopt, pi};
  }

  const double b_inf = lim.value;
  const FunctionHandle beta = np.beta;
  const FunctionHandle alpha = np.alpha;
  FunctionHandle beta_t = make_handle(
      "1/(" + fmt(b_inf) + "-" + beta.name() + ")", beta.domain(),
      [beta, b_inf](double t) { return 1.0 / (b_inf - beta(t)); }, beta.monotone(), {}, kInf);
  FunctionHandle alpha_t = make_handle(
      alpha.name() + "/(" + fmt(b_inf) + "-" + beta.name() + ")^2", alpha.domain(),
      [alpha, beta, b_inf](double t) {
        const double gap = b_inf - beta(t);
        return alpha(t) / (gap * gap);
      },
      false);
  FunctionHandle transform = make_handle(
      "1/(" + fmt(b_inf) + "-x)", Domain{-kInf, b_inf, true, true},
      [b_inf](double x) { return 1.0 / (b_inf - x); }, true);
  VariationClass ev = test_pi_varying(beta_t, alpha_t, grid, xs);
  if (ev.kind != VariationKind::PiPlus) {
    throw DomainError(who + ": rectified centering '" + beta_t.name() + "' fails the Pi+ test");
  }
  NormingPair pair(alpha_t, beta_t, np.psi_class, 0.0, np.k);
  return {transform, pair, "reciprocal-gap", b_inf, ev};
}

double CoordinateChange::chi_inverse(double x) const {
  if (!admissible) throw DomainError("chi_inverse: coordinate change is not admissible");
  if (rv_index == 0.0) return x;
  if (x <= -1.0) return -kInf;
  return std::log1p(x) / (rv_index * alpha_infinity);
}

nlohmann::json CoordinateChange::to_json(std::span<const double> xs) const {
  nlohmann::json j;
  j["h"] = h.name();
  j["alpha2"] = alpha2.name();
  j["beta2"] = beta2.name();
  j["chi"] = chi.name();
  j["admissible"] = admissible;
  j["case"] = coord_case;
  j["beta_small"] = beta_small;
  j["rv_index"] = rv_index;
  j["alpha_infinity"] = alpha_infinity;
  j["variation"] = variation_json(variation);
  if (!note.empty()) j["note"] = note;
  if (admissible && limit_cdf && !xs.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (double x : xs) rows.push_back({{"x", x}, {"H2", limit_cdf(x)}});
    j["limit"] = rows;
  }
  return j;
}

CoordinateChange change_coordinates(const FunctionHandle& h, const NormingPair& np, ScalarFn mu_limit,
                                    std::span<const double> t_grid_in, std::span<const double> x_grid_in) {
  const std::string who = "change_coordinates";
  if (!h.monotone()) throw DomainError(who + ": h '" + h.name() + "' is not flagged monotone");
  const std::vector<double> t_default = default_t_grid();
  const std::vector<double> x_default = default_x_grid();
  const std::span<const double> t_grid = t_grid_in.empty() ? std::span<const double>(t_default) : t_grid_in;
  const std::span<const double> x_grid = x_grid_in.empty() ? std::span<const double>(x_default) : x_grid_in;

  const FunctionHandle alpha = np.alpha;
  const FunctionHandle beta = np.beta;
  FunctionHandle beta2 = compose(h, beta);
  FunctionHandle alpha2_pi = make_handle(
      h.name() + "(alpha+beta)-" + h.name() + "(beta)", beta.domain(),
      [h, alpha, beta](double t) {
        const double b = beta(t);
        return h(alpha(t) + b) - h(b);
      },
      false);

  const bool small = beta_negligible(np, t_grid);
  const LimitEstimate beta_lim = limit_at_infinity(beta);
  if (!small && (beta_lim.finite || beta_lim.value < 0.0)) {
    throw DomainError(who + ": beta '" + beta.name() + "' must increase to infinity (rectify it first)");
  }

  CoordinateChange out{h, alpha2_pi, beta2, constant(0.0), false, {}, "A", small, 0.0, 1.0, "", {}};

  VariationClass v;
  const LimitEstimate alpha_lim = limit_at_infinity(alpha);
  const bool case_a = alpha_lim.finite && alpha_lim.value > 0.0;
  if (small) {
    out.coord_case = "beta-small";
    out.note = "beta = o(alpha): h classified directly through h o log";
    v = classify_h_log(h, t_grid, x_grid);
    if (case_a) out.alpha_infinity = alpha_lim.value;
  } else if (case_a) {
    out.coord_case = "A";
    out.alpha_infinity = alpha_lim.value;
    v = classify_h_log(h, t_grid, x_grid);
  } else {
    out.coord_case = "B";
    FunctionHandle f = compose(alpha, inverse_function(beta));
    if (!looks_self_neglecting(f)) {
      out.note = "alpha o beta^{<-} is not self-neglecting";
      out.variation.kind = VariationKind::Neither;
      return out;
    }
    FunctionHandle H = gamma_builder(f);
    FunctionHandle V = compose(h, inverse_function(H));
    v = classify_variation(V, t_grid, x_grid);
  }
  out.variation = v;

  switch (v.kind) {
    case VariationKind::RV: {
      const double p = v.index;
      const double a = out.alpha_infinity;
      out.admissible = true;
      out.rv_index = p;
      out.alpha2 = beta2;
      std::ostringstream name;
      name << "exp(" << p * a << "y)-1";
      out.chi = make_handle(
          name.str(), Domain::real(), [p, a](double y) { return std::expm1(p * a * y); }, true);
      break;
    }
    case VariationKind::PiPlus:
      out.admissible = true;
      out.chi = identity_handle();
      break;
    case VariationKind::PiMinus:
      out.note += (out.note.empty() ? "" : "; ") + std::string("h is Pi- varying: the new units reverse order");
      break;
    default:
      out.note += (out.note.empty() ? "" : "; ") + std::string("h is neither regularly nor Pi-varying");
      break;
  }
  if (out.admissible && mu_limit) {
    const CoordinateChange snapshot = out;
    out.limit_cdf = [snapshot, mu_limit](double x) {
      const double u = snapshot.chi_inverse(x);
      if (u == -kInf) return 0.0;
      return mu_limit(u);
    };
  }
  return out;
}

}  // namespace cevlab
