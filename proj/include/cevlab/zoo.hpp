#pragma once

// Worked examples as executable conditional models: bivariate normal (raw and with
// exponential X margin), heavy-tailed mixtures built on a logistic dependence base,
// a polar pair sampled from a spectral measure, and an independent product toy.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cevlab/function_handle.hpp"
#include "cevlab/parallel.hpp"
#include "cevlab/rv_toolkit.hpp"
#include "cevlab/spectral.hpp"
#include "cevlab/transforms.hpp"

namespace cevlab::zoo {

using Pair = std::array<double, 2>;
using Pairs = std::vector<Pair>;
using Sampler = std::function<Pairs(std::size_t n, std::uint64_t seed, Exec exec, int workers)>;
/// Joint density of (X, Y*) with Y* the standardized second coordinate.
using JointDensity = std::function<double(double x, double y)>;

struct ConditionalModel {
  std::string name;
  Sampler sampler;               ///< raw (X, Y); apply y_standardizer to reach Y*
  NormingPair norming;           ///< in the Y* scale
  Standardizer y_standardizer;
  ScalarFn limit_cdf;            ///< H(x), the limit of P[(X - beta(t))/alpha(t) <= x | Y* > t]
  bool degenerate_under_naive_scaling = false;
  std::pair<double, double> support;  ///< H within 1e-6 of 0 and 1 at these ends
  std::optional<JointDensity> density;
  /// Limit measure of the standardized pair, when its spectral measure is known.
  std::optional<spectral::MuStar> mu_star;

  /// Samples and standardizes the second coordinate.
  Pairs sample_standardized(std::size_t n, std::uint64_t seed, Exec exec = Exec::Parallel,
                            int workers = 0) const;
};

// ---------------------------------------------------------------------------
// Logistic dependence

/// Exponent V(x, y) = (x^{-1/theta} + y^{-1/theta})^theta, theta in (0, 1).
class LogisticDependence {
 public:
  explicit LogisticDependence(double theta);
  double theta() const { return theta_; }
  double exponent(double x, double y) const;

 private:
  double theta_;
};

/// nu([0,x] x (y,inf]) = V(x, y) - 1/x, evaluated without cancellation. theta = 1 is
/// accepted here and gives 1/y.
double logistic_nu_rect(double theta, double x, double y);

/// Pairs (U, V) with exact standard Pareto margins and logistic joint tail. A positive
/// stable frailty S (Laplace transform e^{-s^theta}) drawn by Kanter's method gives
/// Frechet pairs (S/E_i)^theta, which are then mapped to Pareto by their CDF.
Pairs sample_logistic_pareto(double theta, std::size_t n, std::uint64_t seed, Exec exec = Exec::Parallel,
                             int workers = 0);

// ---------------------------------------------------------------------------
// Models

/// (X, Y) = (sqrt(1-rho^2) N1 + rho N2, N2). Throws DomainError unless |rho| < 1.
Pairs sample_bivariate_normal(double rho, std::size_t n, std::uint64_t seed, Exec exec = Exec::Parallel,
                              int workers = 0);

/// alpha = 1, beta = rho b(t) with the exact normal quantile b, limit N(x/sqrt(1-rho^2)).
ConditionalModel bvn_model(double rho);

/// X moved to exponential margin by -log(1 - N(X)). With u(t) = rho lambda(b(t)) and
/// lambda the inverse Mills ratio: alpha = lambda(u), beta = -log(1 - N(u)). Since
/// lambda(b) - b -> 0 this is equivalent to centring at rho b(t), with a smaller bias at
/// moderate t. Throws DomainError unless 0 < rho < 1.
ConditionalModel bvn_exponential_margin_model(double rho);

enum class MixtureKind { PowerI, ReciprocalII, PiLogIII };

/// Mixtures (X, Y) = B (U1, h(V1)) + (1-B) (h(U2), V2) over a logistic base with fair B.
/// I: h = t^p, norming (t^p, 0). II: the same pair with X replaced by 1/X, norming
/// (t^{-p}, t^{-p}). III: h = log, norming (1, log t). The limit is the conditional law
/// given Y > t, so the factor 1/2 of the joint limit cancels against t P[Y > t] -> 1/2.
ConditionalModel mixture_model(MixtureKind kind, double p, double theta);

/// Logistic base (U, V) itself: norming (t, 0), limit nu([0,x] x (1,inf]).
ConditionalModel logistic_model(double theta);

/// Polar pair (R W, R (1-W)) for a normalized spectral measure: norming (t, 0), limit H*.
ConditionalModel mu_star_model(const spectral::SpectralMeasure& s);

/// X standard normal independent of Y standard Pareto: norming (1, 0), limit N(x).
ConditionalModel product_model();

/// The model with X replaced by h(X), normed by (alpha2, beta2) and compared with
/// H(chi^{<-}(x)). Throws DomainError when the change is inadmissible.
ConditionalModel with_coordinate_change(const ConditionalModel& base, const CoordinateChange& cc);

/// (t, 0): the naive scaling X/t, which degenerates for the mixtures.
NormingPair naive_norming();

/// Parses "bvn:0.5", "bvn-exp:0.5", "mix1:p=0.5,theta=0.5", "mix2:p=0.5,theta=0.5",
/// "mix3:theta=0.5", "logistic:theta=0.5", "mustar:<spectral spec>" and "product".
/// Throws SpecError on an unknown name, listing known models.
ConditionalModel parse_model(std::string_view spec);
std::vector<std::string> model_names();

}  // namespace cevlab::zoo
