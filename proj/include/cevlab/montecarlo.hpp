#pragma once

// Verification harness: exceedance sets, empirical conditional CDFs, KS distances,
// threshold studies, random norming, factorization, degeneracy and density scaling.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cevlab/parallel.hpp"
#include "cevlab/zoo.hpp"
#include "json.hpp"

namespace cevlab::mc {

using zoo::Pair;
using zoo::Pairs;

inline constexpr int kSchemaVersion = 1;
inline constexpr std::size_t kKsGridPoints = 512;

/// Observations whose standardized second coordinate exceeds t.
struct ExceedanceSet {
  double t = 0.0;
  Pairs pairs;
  std::string source;
  std::uint64_t seed = 0;
  std::size_t n_total = 0;

  std::size_t size() const { return pairs.size(); }
};

/// Keeps the pairs with y > t. Throws DomainError if t is not finite.
ExceedanceSet exceedances_above(const Pairs& sample, double t, std::string source, std::uint64_t seed);

/// t = empirical (1-p) quantile of the second coordinate (order statistic n - floor(n p)),
/// then exceedances_above(t). Throws DomainError unless 0 < p < 1 and n p >= 1.
ExceedanceSet exceedances_at_prob(const Pairs& sample, double p, std::string source, std::uint64_t seed);

/// (x_i - beta(t)) / alpha(t) for every exceedance, in storage order.
std::vector<double> normalized_x(const ExceedanceSet& es, const NormingPair& np);

/// Fraction of normalized exceedances at or below each grid value. Throws DomainError
/// when fewer than 50 exceedances are available.
std::vector<double> empirical_conditional_cdf(const ExceedanceSet& es, const NormingPair& np,
                                              std::span<const double> xs);
/// Same, for precomputed values.
std::vector<double> empirical_cdf(std::vector<double> values, std::span<const double> xs);

/// Empirical quantiles of values at 512 probabilities evenly spaced from 0.1% to 99.9%.
/// Spacing in probability keeps every cell's empirical jump near 1/512, so the gap term
/// of ks_distance stays small for heavy-tailed values too.
std::vector<double> ks_grid(std::vector<double> values, std::size_t points = kKsGridPoints);

/// Midpoints between consecutive jump locations, plus one point beyond each end. Both a
/// step limit and its empirical counterpart are flat between these points, so the grid
/// supremum there is the full supremum.
std::vector<double> atom_grid(std::vector<double> locations);

struct KsDistance {
  double grid_sup = 0.0;  ///< max over grid points of |F_hat - H|
  double gap = 0.0;       ///< max over grid cells of min(jump of F_hat, jump of H)
  /// min(1, grid_sup + gap): bounds the supremum over the whole grid span for monotone
  /// F_hat and H.
  double value() const { return grid_sup + gap < 1.0 ? grid_sup + gap : 1.0; }
};

/// Compares empirical and limit CDF values on a common grid.
KsDistance ks_distance(std::span<const double> empirical, std::span<const double> limit);

/// Exact sup_x |F_n(x) - H(x)| for the empirical CDF of values. H's left limits are taken
/// one ulp below each sample point, which is exact for continuous H and for steps that
/// sit on sample values.
double ks_one_sample(std::vector<double> values, const ScalarFn& cdf);

/// Two-sample Kolmogorov-Smirnov statistic (exact supremum).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// ---------------------------------------------------------------------------

struct ThresholdRow {
  double exceed_prob = 0.0;
  double t = 0.0;
  std::size_t count = 0;
  double ks = 0.0;
  double noise_band = 0.0;  ///< 2 / sqrt(n p)
  double factorization_stat = 0.0;
  bool degenerate = false;
};

struct VerificationReport {
  std::string model;
  std::string norming;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double ks_tolerance = 0.0;
  std::vector<ThresholdRow> rows;
  bool degenerate = false;
  bool ks_trend_ok = true;  ///< KS nonincreasing up to the noise band
  bool passed = false;      ///< final KS within tolerance, trend ok, not degenerate
  std::vector<std::string> notes;

  std::vector<double> thresholds() const;
  std::vector<double> ks() const;
  std::vector<std::size_t> exceed_counts() const;

  nlohmann::json to_json() const;
  /// Header plus one row per threshold: t,count,ks,degenerate,factorization_stat.
  std::string to_csv() const;
};

struct StudyOptions {
  std::optional<NormingPair> norming;  ///< replaces the model's norming (negative controls)
  std::optional<double> ks_tolerance;  ///< default: 0.1 for normal-tail models, 0.05 otherwise
  Exec exec = Exec::Parallel;
  int workers = 0;
};

/// KS tolerance used when none is given: twice as loose for the logarithmically slow
/// normal-tail models.
double default_ks_tolerance(const zoo::ConditionalModel& model);

/// Draws n standardized pairs once and, for each exceedance probability (decreasing,
/// each >= 20/n), compares the empirical conditional CDF with the model's limit by the
/// exact one-sample KS statistic.
VerificationReport convergence_study(const zoo::ConditionalModel& model, std::span<const double> exceed_probs,
                                     std::size_t n, std::uint64_t seed, const StudyOptions& options = {});

// ---------------------------------------------------------------------------

struct RandomNormingReport {
  std::string model;
  std::string form;  ///< "X*/Y" or "(X-beta(Y))/alpha(Y)"
  double t = 0.0;
  std::size_t count = 0;
  /// Exact one-sample KS, or for an atomic G the supremum over atom_grid. Sample ratios
  /// land within rounding of the atoms, so the exact statistic would count rounding as
  /// discrepancy.
  double ks = 0.0;
  std::string method;  ///< "exact" or "atom-grid"
  nlohmann::json to_json() const;
};

/// Randomly normed X among exceedances of the (1-p) quantile of Y*. Uses X*/Y against G
/// when the model carries its spectral measure, otherwise (X - beta(Y*))/alpha(Y*)
/// against H for product-case models. Throws DomainError for any other model.
RandomNormingReport random_norming_check(const zoo::ConditionalModel& model, double exceed_prob, std::size_t n,
                                         std::uint64_t seed, Exec exec = Exec::Parallel, int workers = 0);

/// X*/Y for n raw polar draws from mu* itself, conditioned on Y > 1.
RandomNormingReport random_norming_check(const spectral::MuStar& m, std::size_t n, std::uint64_t seed,
                                         Exec exec = Exec::Parallel, int workers = 0);

/// Splits exceedances into equal-count bins of y and returns the largest two-sample KS
/// between bins of normed_x. Throws DomainError with fewer than 200 exceedances or any
/// bin below 30 points.
double factorization_test(const ExceedanceSet& es, std::span<const double> normed_x, std::size_t bins = 4);

struct DegeneracyResult {
  bool degenerate = false;
  double shrink = 1.0;  ///< IQR at the lowest threshold over IQR at the highest
  std::vector<double> t;
  std::vector<double> iqr;
  std::vector<double> median;
  std::string note;
  nlohmann::json to_json() const;
};

/// IQR and median of normalized X at thresholds t, t sqrt(10), 10 t, ... inside es while
/// at least 100 exceedances remain. Degenerate when the IQR shrinks by 5x or more over a
/// range of at least one decade and the median settles (its last step is no larger than
/// its first). Throws DomainError below 100 exceedances.
DegeneracyResult degeneracy_diagnostic(const ExceedanceSet& es, const NormingPair& np);

struct DensityScalingReport {
  std::vector<double> t_grid;
  std::vector<double> u_grid;
  std::vector<double> v_grid;
  /// slices[k][i * v_grid.size() + j] = t^2 alpha(t) f(alpha(t) u_i + beta(t), t v_j).
  std::vector<std::vector<double>> slices;
  std::vector<double> cauchy;      ///< sup distance between consecutive slices
  bool cauchy_decreasing = false;
  std::vector<double> mass_error;  ///< |v^2 int g(u, v) du - 1| at the largest t, per v
  nlohmann::json to_json() const;
};

/// Evaluates the scaled joint density on the grid. Throws DomainError when the model has
/// no closed-form density.
DensityScalingReport density_scaling_check(const zoo::ConditionalModel& model, std::span<const double> t_grid,
                                           std::span<const double> u_grid, std::span<const double> v_grid);

struct AsymptoticIndependenceReport {
  std::string model;
  double t = 0.0;
  double joint = 0.0;       ///< t P[X > t, Y* > t]
  double marginal_x = 0.0;  ///< t P[X > t]
  double marginal_y = 0.0;  ///< t P[Y* > t]
  bool asymptotically_independent = false;
  nlohmann::json to_json() const;
};

/// Joint and marginal tail statistics at t = n q on the standardized sample. The joint
/// statistic below `tolerance` counts as asymptotic independence.
AsymptoticIndependenceReport asymptotic_independence_check(const zoo::ConditionalModel& model, std::size_t n,
                                                           std::uint64_t seed, double q = 1e-3,
                                                           double tolerance = 0.05, Exec exec = Exec::Parallel,
                                                           int workers = 0);

}  // namespace cevlab::mc
