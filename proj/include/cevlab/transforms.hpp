#pragma once

// Marginal standardization, reduction of the negative-index and Pi-varying centering
// cases, and the change-of-units construction with its admissibility diagnosis.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cevlab/function_handle.hpp"
#include "cevlab/rv_toolkit.hpp"
#include "json.hpp"

namespace cevlab {

enum class StandardizerDirection { YMarginal, XCaseI, XCaseII, XCaseIII };

std::string to_string(StandardizerDirection d);

struct Provenance {
  std::string case_label;
  std::optional<double> beta_infinity;
  std::string note;
};

struct Standardizer {
  StandardizerDirection direction;
  FunctionHandle map;
  Provenance provenance;

  nlohmann::json to_json() const;
};

/// map = b^{<-} = 1/(1-F) for a distribution F in the domain of attraction of G_gamma.
/// Registry families (pareto_cdf, exp_cdf, normal_cdf) get exact maps and their gamma is
/// checked; any other monotone F with sup F = 1 is accepted as is.
Standardizer standardize_y(const FunctionHandle& F, double gamma);

/// The X-standardizing map for a non-product norming pair:
/// Full -> beta^{<-}; ScaleOnly with rho > 0 -> alpha^{<-};
/// ScaleOnly with rho < 0 -> x -> (1/alpha)^{<-}(1/(beta(inf) - x)).
/// Throws DomainError for ProductCase ("standardization impossible").
Standardizer standardize_x(const NormingPair& np);

struct NegativeRhoReduction {
  FunctionHandle transform;   ///< x -> 1/(sigma (x - beta(inf)))
  FunctionHandle beta_tilde;  ///< 1/(|rho| sigma (beta(t) - beta(inf))), regularly varying
  NormingPair pair;           ///< (|rho| beta_tilde, 0), ScaleOnly with index |rho|
  double beta_infinity;
  double sigma;               ///< side from which beta approaches beta(inf)
  VariationClass evidence;
};

/// Reduces rho < 0 to rho > 0. Throws DomainError when rho >= 0, when beta(inf) is not
/// finite, or when beta_tilde fails the regular-variation test.
NegativeRhoReduction reduce_negative_rho(const NormingPair& np);

struct Rectification {
  FunctionHandle transform;  ///< map applied to X
  NormingPair pair;          ///< beta increasing to infinity
  std::string case_label;    ///< "identity", "reciprocal-gap", with "negated+" prefix for Pi-
  std::optional<double> beta_infinity;
  VariationClass evidence;   ///< Pi test of the output beta against the output alpha
};

enum class PiSign { Plus, Minus };

/// Turns a rho = 0 pair with beta in Pi+(alpha) or Pi-(alpha) into one whose beta
/// increases to infinity. Throws DomainError when beta is not Pi-varying with
/// auxiliary alpha.
Rectification rectify_beta(const NormingPair& np, PiSign sign);

struct CoordinateChange {
  FunctionHandle h;
  FunctionHandle alpha2;
  FunctionHandle beta2;
  FunctionHandle chi;
  bool admissible = false;
  VariationClass variation;
  std::string coord_case;           ///< "A", "B" or "beta-small"
  bool beta_small = false;          ///< beta = o(alpha): h classified directly
  double rv_index = 0.0;            ///< p of the RV branch; 0 for Pi
  double alpha_infinity = 1.0;      ///< limit of alpha in case A
  std::string note;
  ScalarFn limit_cdf;               ///< x -> H(chi^{<-}(x)); empty when inadmissible

  double chi_inverse(double x) const;
  nlohmann::json to_json(std::span<const double> xs = {}) const;
};

/// Builds units h(X) with centering h(beta) and diagnoses admissibility.
///
/// Case A (alpha tends to a positive constant) classifies h o log; case B requires
/// alpha o beta^{<-} to be self-neglecting and classifies h o H^{<-} with H built by
/// gamma_builder. A regularly varying branch scales by alpha2 = h o beta and uses
/// chi(y) = e^{p a y} - 1; a Pi branch scales by h(alpha + beta) - h(beta) and uses
/// chi(y) = y. Throws DomainError when h is not monotone or beta neither increases to
/// infinity nor is o(alpha).
CoordinateChange change_coordinates(const FunctionHandle& h, const NormingPair& np,
                                    ScalarFn mu_limit,
                                    std::span<const double> t_grid = {},
                                    std::span<const double> x_grid = {});

}  // namespace cevlab
