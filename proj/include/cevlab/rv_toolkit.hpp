#pragma once

// Regular-variation toolkit: function registry, left-continuous inverses, numerical
// detection of the scaling/centering limits of a norming pair, and builders for
// Pi-varying and Gamma-varying functions.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cevlab/function_handle.hpp"

namespace cevlab {

// ---------------------------------------------------------------------------
// Registry

/// Parses a function spec such as "pow:0.5", "log", "normal_b",
/// "compose:log,normal_binv" (applied right to left), "pi:log" or "gamma:pow:-1".
/// Throws SpecError with the list of known families on an unknown name.
FunctionHandle parse_function(std::string_view spec);

/// Sorted family names accepted by parse_function.
std::vector<std::string> function_names();

// ---------------------------------------------------------------------------
// Inverses and limits

/// inf{y : u(y) >= t}. Uses u's exact inverse when present, otherwise bisection to an
/// absolute tolerance of 1e-12 on y with brackets grown geometrically from the domain
/// interior. Throws DomainError when u is not flagged monotone or t exceeds sup u.
double left_continuous_inverse(const FunctionHandle& u, double t);

/// y -> inf{x : u(x) >= y} as a handle, using u's exact inverse when it has one. The
/// domain runs from u at its lower end to sup u.
FunctionHandle inverse_function(const FunctionHandle& u);

struct LimitEstimate {
  bool finite = false;
  double value = kInf;
  std::string method;  ///< "closed-form", "aitken" or "divergent"
};

/// lim f(t) as t -> infinity: closed form when the handle declares one, otherwise
/// Aitken extrapolation of f(10^k), k = 4..12, accepted when successive extrapolants agree
/// to 1e-6. Throws NumericalError when neither finiteness nor divergence is evident.
LimitEstimate limit_at_infinity(const FunctionHandle& f);

// ---------------------------------------------------------------------------
// Norming pairs

/// Shape of (psi1, psi2): ProductCase (psi1 == 1, psi2 == 0), ScaleOnly (psi2 == 0,
/// psi1 = c^rho) or Full (psi2 = k (c^rho - 1)/rho, or k log c when rho == 0).
enum class PsiClass { ProductCase, ScaleOnly, Full };

std::string to_string(PsiClass c);

/// Scaling alpha(t) > 0 and centering beta(t) of X given Y > t, with class metadata.
struct NormingPair {
  NormingPair(FunctionHandle alpha, FunctionHandle beta, PsiClass psi_class, double rho = 0.0,
              double k = 0.0);

  FunctionHandle alpha;
  FunctionHandle beta;
  PsiClass psi_class;
  double rho;
  double k;
};

/// Geometric grid 10^2, 10^3, ..., 10^8.
std::vector<double> default_t_grid();

struct PsiEstimate {
  double psi1 = 0.0;
  double psi2 = 0.0;
  bool converged = false;
  std::vector<double> t;
  std::vector<double> psi1_path;  ///< alpha(tc)/alpha(t) along t
  std::vector<double> psi2_path;  ///< (beta(tc)-beta(t))/alpha(t) along t
};

/// Evaluates the scaling and centering ratios along t_grid and reports the values at
/// the largest t. converged is set when the last two grid values agree to 1e-3
/// (relative, or absolute for psi2 near zero).
PsiEstimate estimate_psi_limits(const NormingPair& np, double c, std::span<const double> t_grid);
PsiEstimate estimate_psi_limits(const FunctionHandle& alpha, const FunctionHandle& beta, double c,
                                std::span<const double> t_grid);

struct NormingClassification {
  std::optional<PsiClass> psi_class;  ///< empty when the ratios do not settle
  double rho = 0.0;
  double k = 0.0;
  std::vector<double> c_grid;
  std::vector<PsiEstimate> evidence;  ///< one entry per c
  std::string note;

  bool classified() const { return psi_class.has_value(); }
};

/// Classifies (alpha, beta) from numerical psi limits.
///
/// A ratio counts as having reached its trivial limit (psi1 -> 1, psi2 -> 0) when it is
/// within 1e-3 at the largest t, or when its distance to the limit decreases
/// monotonically over the last grid points and has shrunk by at least 25% over the
/// grid. The second route catches the logarithmically slow normal-tail cases.
NormingClassification classify_norming(const FunctionHandle& alpha, const FunctionHandle& beta,
                                       std::span<const double> t_grid,
                                       std::span<const double> c_grid);
NormingClassification classify_norming(const NormingPair& np, std::span<const double> t_grid,
                                       std::span<const double> c_grid);

// ---------------------------------------------------------------------------
// Variation classes

enum class VariationKind { RV, PiPlus, PiMinus, Gamma, Neither };

std::string to_string(VariationKind k);

struct VariationEvidence {
  double t = 0.0;
  double index = 0.0;        ///< fitted RV index at this t
  double rv_residual = 0.0;  ///< max_x |u(tx)/u(t) - x^p| / x^p
  double pi_residual = 0.0;  ///< max_x residual of the Pi (or Gamma) defining limit
};

struct VariationClass {
  VariationKind kind = VariationKind::Neither;
  double index = 0.0;  ///< p for RV, k for Pi (1 when the auxiliary is estimated)
  std::optional<FunctionHandle> aux;
  std::vector<VariationEvidence> evidence;
};

/// Tests u for RV_p (p > 0) first, then for Pi with auxiliary a(t) = u(te) - u(t).
/// RV requires residual <= 5e-2 and an index that is stable across the last two grid
/// points; Pi requires residual <= 5e-2 or residuals shrinking across t_grid.
VariationClass classify_variation(const FunctionHandle& u, std::span<const double> t_grid,
                                  std::span<const double> x_grid);

/// classify_variation applied to h o log.
VariationClass classify_h_log(const FunctionHandle& h, std::span<const double> t_grid,
                              std::span<const double> x_grid);

/// Checks (f(tx) - f(t))/aux(t) -> k log x for a supplied auxiliary function.
/// Returns PiPlus (k > 0), PiMinus (k < 0) or Neither.
VariationClass test_pi_varying(const FunctionHandle& f, const FunctionHandle& aux,
                               std::span<const double> t_grid, std::span<const double> x_grid);

/// Checks V(t + x f(t)) / V(t) -> e^x. Returns Gamma or Neither.
VariationClass test_gamma_varying(const FunctionHandle& v, const FunctionHandle& f,
                                  std::span<const double> t_grid, std::span<const double> x_grid);

bool looks_slowly_varying(const FunctionHandle& g);
bool looks_self_neglecting(const FunctionHandle& f);

// ---------------------------------------------------------------------------
// Builders

/// h(x) = int_0^x g(e^u) du, so that h o log is Pi-varying with auxiliary g.
/// Closed form for g in {const, log, (log)^p, log log}; tanh-sinh quadrature otherwise.
FunctionHandle pi_builder(const FunctionHandle& g);

/// H(x) = exp(int_1^x du / f(u)), a Gamma-varying function with auxiliary f; H(1) = 1.
/// Closed form for constant and power f; Gauss-Kronrod otherwise. The handle carries
/// log_eval, which stays finite long after H itself overflows.
FunctionHandle gamma_builder(const FunctionHandle& f);

}  // namespace cevlab
