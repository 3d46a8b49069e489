#include "cevlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "cevlab/error.hpp"
#include "cevlab/quadrature.hpp"

namespace cevlab::mc {

namespace {

constexpr std::size_t kMinCdfCount = 50;
constexpr std::size_t kMinFactorizationCount = 200;
constexpr std::size_t kMinBinCount = 30;
constexpr std::size_t kMinDegeneracyCount = 100;
constexpr double kShrinkFactor = 5.0;

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::string describe(const NormingPair& np) {
  return "alpha=" + np.alpha.name() + ", beta=" + np.beta.name() + ", class=" + to_string(np.psi_class);
}

}  // namespace

ExceedanceSet exceedances_above(const Pairs& sample, double t, std::string source, std::uint64_t seed) {
  if (!std::isfinite(t)) throw DomainError("exceedances_above: threshold must be finite");
  ExceedanceSet es;
  es.t = t;
  es.source = std::move(source);
  es.seed = seed;
  es.n_total = sample.size();
  for (const auto& p : sample) {
    if (p[1] > t) es.pairs.push_back(p);
  }
  return es;
}

ExceedanceSet exceedances_at_prob(const Pairs& sample, double p, std::string source, std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("exceedances_at_prob: p must lie in (0, 1)");
  const std::size_t n = sample.size();
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * p));
  if (k < 1 || k >= n) throw DomainError("exceedances_at_prob: n p must be at least 1");
  std::vector<double> ys(n);
  std::transform(sample.begin(), sample.end(), ys.begin(), [](const Pair& q) { return q[1]; });
  const auto idx = static_cast<std::ptrdiff_t>(n - k - 1);
  std::nth_element(ys.begin(), ys.begin() + idx, ys.end());
  return exceedances_above(sample, ys[static_cast<std::size_t>(idx)], std::move(source), seed);
}

std::vector<double> normalized_x(const ExceedanceSet& es, const NormingPair& np) {
  const double a = np.alpha(es.t);
  const double b = np.beta(es.t);
  std::vector<double> out;
  out.reserve(es.size());
  for (const auto& p : es.pairs) out.push_back((p[0] - b) / a);
  return out;
}

std::vector<double> empirical_cdf(std::vector<double> values, std::span<const double> xs) {
  std::sort(values.begin(), values.end());
  const auto m = static_cast<double>(values.size());
  std::vector<double> out;
  out.reserve(xs.size());
  for (double x : xs) {
    const auto below = std::upper_bound(values.begin(), values.end(), x) - values.begin();
    out.push_back(static_cast<double>(below) / m);
  }
  return out;
}

std::vector<double> empirical_conditional_cdf(const ExceedanceSet& es, const NormingPair& np,
                                              std::span<const double> xs) {
  if (es.size() < kMinCdfCount) {
    throw DomainError("empirical_conditional_cdf: " + std::to_string(es.size()) +
                      " exceedances, need at least " + std::to_string(kMinCdfCount));
  }
  return empirical_cdf(normalized_x(es, np), xs);
}

std::vector<double> ks_grid(std::vector<double> values, std::size_t points) {
  if (values.empty()) throw DomainError("ks_grid: no values");
  if (points < 2) throw DomainError("ks_grid: need at least two points");
  std::sort(values.begin(), values.end());
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = quantile_sorted(values, 0.001 + 0.998 * f);
  }
  return grid;
}

std::vector<double> atom_grid(std::vector<double> locations) {
  std::sort(locations.begin(), locations.end());
  locations.erase(std::unique(locations.begin(), locations.end()), locations.end());
  if (locations.empty()) throw DomainError("atom_grid: no atoms");
  std::vector<double> grid{locations.front() - 1.0};
  for (std::size_t i = 1; i < locations.size(); ++i) grid.push_back(0.5 * (locations[i - 1] + locations[i]));
  grid.push_back(locations.back() + 1.0);
  return grid;
}

double ks_one_sample(std::vector<double> values, const ScalarFn& cdf) {
  if (values.empty()) throw DomainError("ks_one_sample: no values");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double d = 0.0;
  std::size_t i = 0;
  while (i < values.size()) {
    const double v = values[i];
    std::size_t j = i;
    while (j < values.size() && values[j] == v) ++j;
    const double below = cdf(std::nextafter(v, -std::numeric_limits<double>::infinity()));
    d = std::max({d, std::abs(static_cast<double>(i) / n - below), std::abs(static_cast<double>(j) / n - cdf(v))});
    i = j;
  }
  return d;
}

KsDistance ks_distance(std::span<const double> empirical, std::span<const double> limit) {
  if (empirical.size() != limit.size()) throw DomainError("ks_distance: grids differ in length");
  KsDistance d;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    d.grid_sup = std::max(d.grid_sup, std::abs(empirical[i] - limit[i]));
    if (i > 0) {
      const double jump_e = empirical[i] - empirical[i - 1];
      const double jump_h = limit[i] - limit[i - 1];
      d.gap = std::max(d.gap, std::min(std::abs(jump_e), std::abs(jump_h)));
    }
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = static_cast<double>(a.size());
  const auto nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

// ---------------------------------------------------------------------------

std::vector<double> VerificationReport::thresholds() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.t);
  return out;
}

std::vector<double> VerificationReport::ks() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.ks);
  return out;
}

std::vector<std::size_t> VerificationReport::exceed_counts() const {
  std::vector<std::size_t> out;
  for (const auto& r : rows) out.push_back(r.count);
  return out;
}

nlohmann::json VerificationReport::to_json() const {
  nlohmann::json j;
  j["schema"] = kSchemaVersion;
  j["model"] = model;
  j["norming"] = norming;
  j["seed"] = seed;
  j["n"] = n;
  j["ks_tolerance"] = ks_tolerance;
  nlohmann::json probs = nlohmann::json::array();
  nlohmann::json ts = nlohmann::json::array();
  nlohmann::json ks_values = nlohmann::json::array();
  nlohmann::json counts = nlohmann::json::array();
  nlohmann::json bands = nlohmann::json::array();
  nlohmann::json fact = nlohmann::json::array();
  nlohmann::json degen = nlohmann::json::array();
  for (const auto& r : rows) {
    probs.push_back(r.exceed_prob);
    ts.push_back(r.t);
    ks_values.push_back(r.ks);
    counts.push_back(r.count);
    bands.push_back(r.noise_band);
    fact.push_back(number_or_null(r.factorization_stat));
    degen.push_back(r.degenerate);
  }
  j["exceed_probs"] = probs;
  j["thresholds"] = ts;
  j["ks"] = ks_values;
  j["exceed_counts"] = counts;
  j["noise_band"] = bands;
  j["factorization_stat"] = fact;
  j["degenerate_by_threshold"] = degen;
  j["degenerate"] = degenerate;
  j["ks_trend_ok"] = ks_trend_ok;
  j["passed"] = passed;
  j["notes"] = notes;
  return j;
}

std::string VerificationReport::to_csv() const {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,count,ks,degenerate,factorization_stat\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.count << ',' << r.ks << ',' << (r.degenerate ? 1 : 0) << ',';
    if (std::isfinite(r.factorization_stat)) out << r.factorization_stat;
    out << '\n';
  }
  return out.str();
}

double default_ks_tolerance(const zoo::ConditionalModel& model) {
  return model.name.rfind("bvn", 0) == 0 ? 0.1 : 0.05;
}

VerificationReport convergence_study(const zoo::ConditionalModel& model, std::span<const double> exceed_probs,
                                     std::size_t n, std::uint64_t seed, const StudyOptions& options) {
  if (exceed_probs.empty()) throw DomainError("convergence_study: no exceedance probabilities");
  for (std::size_t i = 0; i < exceed_probs.size(); ++i) {
    const double p = exceed_probs[i];
    if (!(p < 1.0) || p * static_cast<double>(n) < 20.0) {
      throw DomainError("convergence_study: each probability must lie in [20/n, 1)");
    }
    if (i > 0 && !(p < exceed_probs[i - 1])) throw DomainError("convergence_study: probabilities must decrease");
  }
  const NormingPair np = options.norming.value_or(model.norming);

  VerificationReport report;
  report.model = model.name;
  report.norming = describe(np);
  report.seed = seed;
  report.n = n;
  report.ks_tolerance = options.ks_tolerance.value_or(default_ks_tolerance(model));

  const Pairs sample = model.sample_standardized(n, seed, options.exec, options.workers);
  for (double p : exceed_probs) {
    const ExceedanceSet es = exceedances_at_prob(sample, p, model.name, seed);
    ThresholdRow row;
    row.exceed_prob = p;
    row.t = es.t;
    row.count = es.size();
    row.noise_band = 2.0 / std::sqrt(static_cast<double>(n) * p);
    if (es.size() < kMinCdfCount) {
      throw DomainError("convergence_study: " + std::to_string(es.size()) + " exceedances at p=" +
                        std::to_string(p) + ", need at least " + std::to_string(kMinCdfCount));
    }
    const std::vector<double> z = normalized_x(es, np);
    row.ks = ks_one_sample(z, model.limit_cdf);
    row.factorization_stat = std::numeric_limits<double>::quiet_NaN();
    if (es.size() >= kMinFactorizationCount) row.factorization_stat = factorization_test(es, z);
    if (es.size() >= kMinDegeneracyCount) row.degenerate = degeneracy_diagnostic(es, np).degenerate;
    report.rows.push_back(row);
  }

  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].ks > report.rows[i - 1].ks + report.rows[i].noise_band) {
      report.ks_trend_ok = false;
      report.notes.push_back("KS rises beyond the noise band between p=" +
                             std::to_string(report.rows[i - 1].exceed_prob) + " and p=" +
                             std::to_string(report.rows[i].exceed_prob));
    }
  }
  report.degenerate = report.rows.front().degenerate;
  if (report.degenerate) report.notes.push_back("normalized X degenerates as the threshold grows");
  const double final_ks = report.rows.back().ks;
  if (final_ks > report.ks_tolerance) {
    report.notes.push_back("final KS " + std::to_string(final_ks) + " exceeds tolerance " +
                           std::to_string(report.ks_tolerance));
  }
  report.passed = final_ks <= report.ks_tolerance && report.ks_trend_ok && !report.degenerate;
  return report;
}

// ---------------------------------------------------------------------------

nlohmann::json RandomNormingReport::to_json() const {
  return {{"schema", kSchemaVersion}, {"model", model}, {"form", form},    {"t", t},
          {"count", count},           {"ks", ks},       {"method", method}};
}

namespace {

RandomNormingReport random_norming_from(std::string model, std::string form, const ExceedanceSet& es,
                                        const std::vector<double>& values, const ScalarFn& limit,
                                        const std::vector<double>& jumps) {
  if (values.size() < kMinCdfCount) {
    throw DomainError("random_norming_check: " + std::to_string(values.size()) + " exceedances, need at least " +
                      std::to_string(kMinCdfCount));
  }
  RandomNormingReport r;
  r.model = std::move(model);
  r.form = std::move(form);
  r.t = es.t;
  r.count = es.size();
  if (jumps.empty()) {
    r.ks = ks_one_sample(values, limit);
    r.method = "exact";
  } else {
    const std::vector<double> grid = atom_grid(jumps);
    const std::vector<double> emp = empirical_cdf(values, grid);
    std::vector<double> lim(grid.size());
    std::transform(grid.begin(), grid.end(), lim.begin(), limit);
    r.ks = ks_distance(emp, lim).grid_sup;
    r.method = "atom-grid";
  }
  return r;
}

/// Jump locations w/(1-w) of G for an atomic spectral measure; empty for densities.
std::vector<double> g_jumps(const spectral::MuStar& m) {
  std::vector<double> out;
  if (m.s().representation() == spectral::Representation::Density) return out;
  for (const auto& a : m.s().atom_list()) out.push_back(a.w / (1.0 - a.w));
  return out;
}

std::vector<double> ratios(const ExceedanceSet& es) {
  std::vector<double> out;
  out.reserve(es.size());
  for (const auto& p : es.pairs) out.push_back(p[0] / p[1]);
  return out;
}

}  // namespace

RandomNormingReport random_norming_check(const zoo::ConditionalModel& model, double exceed_prob, std::size_t n,
                                         std::uint64_t seed, Exec exec, int workers) {
  const bool standardized = model.mu_star.has_value();
  const bool product = model.norming.psi_class == PsiClass::ProductCase;
  if (!standardized && !product) {
    throw DomainError("random_norming_check: '" + model.name +
                      "' is neither standardized with a known spectral measure nor a product case");
  }
  const Pairs sample = model.sample_standardized(n, seed, exec, workers);
  const ExceedanceSet es = exceedances_at_prob(sample, exceed_prob, model.name, seed);
  if (standardized) {
    const spectral::MuStar& m = *model.mu_star;
    return random_norming_from(model.name, "X*/Y", es, ratios(es),
                               [&m](double x) { return x < 0.0 ? 0.0 : m.g_random_norm(x); }, g_jumps(m));
  }
  std::vector<double> values;
  values.reserve(es.size());
  for (const auto& p : es.pairs) values.push_back((p[0] - model.norming.beta(p[1])) / model.norming.alpha(p[1]));
  return random_norming_from(model.name, "(X-beta(Y))/alpha(Y)", es, values, model.limit_cdf, {});
}

RandomNormingReport random_norming_check(const spectral::MuStar& m, std::size_t n, std::uint64_t seed, Exec exec,
                                         int workers) {
  const spectral::MuStarSample draw = spectral::sample_from_mu_star(m, n, seed, exec, workers);
  ExceedanceSet es;
  es.t = 1.0;
  es.pairs = draw.points;
  es.source = "mu*";
  es.seed = seed;
  es.n_total = n;
  return random_norming_from("mu*", "X*/Y", es, ratios(es),
                             [&m](double x) { return x < 0.0 ? 0.0 : m.g_random_norm(x); }, g_jumps(m));
}

double factorization_test(const ExceedanceSet& es, std::span<const double> normed_x, std::size_t bins) {
  if (normed_x.size() != es.size()) throw DomainError("factorization_test: normed_x does not match the exceedances");
  if (es.size() < kMinFactorizationCount) {
    throw DomainError("factorization_test: " + std::to_string(es.size()) + " exceedances, need at least " +
                      std::to_string(kMinFactorizationCount));
  }
  if (bins < 2) throw DomainError("factorization_test: need at least two bins");
  std::vector<std::size_t> order(es.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return es.pairs[a][1] < es.pairs[b][1]; });
  std::vector<std::vector<double>> groups(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t lo = b * order.size() / bins;
    const std::size_t hi = (b + 1) * order.size() / bins;
    if (hi - lo < kMinBinCount) {
      throw DomainError("factorization_test: bin " + std::to_string(b) + " holds " + std::to_string(hi - lo) +
                        " points, need at least " + std::to_string(kMinBinCount));
    }
    for (std::size_t k = lo; k < hi; ++k) groups[b].push_back(normed_x[order[k]]);
  }
  double stat = 0.0;
  for (std::size_t a = 0; a < bins; ++a) {
    for (std::size_t b = a + 1; b < bins; ++b) stat = std::max(stat, ks_two_sample(groups[a], groups[b]));
  }
  return stat;
}

nlohmann::json DegeneracyResult::to_json() const {
  return {{"degenerate", degenerate}, {"shrink", shrink}, {"t", t}, {"iqr", iqr}, {"median", median}, {"note", note}};
}

DegeneracyResult degeneracy_diagnostic(const ExceedanceSet& es, const NormingPair& np) {
  if (es.size() < kMinDegeneracyCount) {
    throw DomainError("degeneracy_diagnostic: " + std::to_string(es.size()) + " exceedances, need at least " +
                      std::to_string(kMinDegeneracyCount));
  }
  DegeneracyResult r;
  const double step = std::sqrt(10.0);
  for (double t = es.t;; t *= step) {
    const double a = np.alpha(t);
    const double b = np.beta(t);
    std::vector<double> z;
    for (const auto& p : es.pairs) {
      if (p[1] > t) z.push_back((p[0] - b) / a);
    }
    if (z.size() < kMinDegeneracyCount) break;
    std::sort(z.begin(), z.end());
    r.t.push_back(t);
    r.iqr.push_back(quantile_sorted(z, 0.75) - quantile_sorted(z, 0.25));
    r.median.push_back(quantile_sorted(z, 0.5));
  }
  if (r.t.size() < 3) {
    r.note = "less than one decade of thresholds with 100 exceedances";
    return r;
  }
  r.shrink = r.iqr.back() > 0.0 ? r.iqr.front() / r.iqr.back() : std::numeric_limits<double>::infinity();
  const double first_step = std::abs(r.median[1] - r.median[0]);
  const double last_step = std::abs(r.median.back() - r.median[r.median.size() - 2]);
  const bool settles = last_step <= first_step;
  r.degenerate = r.shrink >= kShrinkFactor && settles;
  if (r.degenerate) r.note = "IQR shrinks by " + std::to_string(r.shrink) + "x while the median settles";
  return r;
}

nlohmann::json DensityScalingReport::to_json() const {
  return {{"schema", kSchemaVersion}, {"t", t_grid},       {"u", u_grid},
          {"v", v_grid},              {"cauchy", cauchy}, {"cauchy_decreasing", cauchy_decreasing},
          {"mass_error", mass_error}};
}

DensityScalingReport density_scaling_check(const zoo::ConditionalModel& model, std::span<const double> t_grid,
                                           std::span<const double> u_grid, std::span<const double> v_grid) {
  if (!model.density) throw DomainError("density_scaling_check: '" + model.name + "' has no closed-form density");
  if (t_grid.size() < 2) throw DomainError("density_scaling_check: need at least two thresholds");
  const auto& f = *model.density;
  const NormingPair& np = model.norming;
  auto scaled = [&](double t, double u, double v) {
    const double a = np.alpha(t);
    return t * t * a * f(a * u + np.beta(t), t * v);
  };

  DensityScalingReport r;
  r.t_grid.assign(t_grid.begin(), t_grid.end());
  r.u_grid.assign(u_grid.begin(), u_grid.end());
  r.v_grid.assign(v_grid.begin(), v_grid.end());
  for (double t : t_grid) {
    std::vector<double> slice;
    slice.reserve(u_grid.size() * v_grid.size());
    for (double u : u_grid) {
      for (double v : v_grid) slice.push_back(scaled(t, u, v));
    }
    r.slices.push_back(std::move(slice));
  }
  for (std::size_t k = 1; k < r.slices.size(); ++k) {
    double d = 0.0;
    for (std::size_t i = 0; i < r.slices[k].size(); ++i) d = std::max(d, std::abs(r.slices[k][i] - r.slices[k - 1][i]));
    r.cauchy.push_back(d);
  }
  r.cauchy_decreasing = true;
  for (std::size_t k = 1; k < r.cauchy.size(); ++k) r.cauchy_decreasing = r.cauchy_decreasing && r.cauchy[k] < r.cauchy[k - 1];

  const double t_max = t_grid.back();
  for (double v : v_grid) {
    const double mass = quad::integrate([&](double u) { return v * v * scaled(t_max, u, v); }, -kInf, kInf, 1e-9);
    r.mass_error.push_back(std::abs(mass - 1.0));
  }
  return r;
}

nlohmann::json AsymptoticIndependenceReport::to_json() const {
  return {{"schema", kSchemaVersion},
          {"model", model},
          {"t", t},
          {"joint", joint},
          {"marginal_x", marginal_x},
          {"marginal_y", marginal_y},
          {"asymptotically_independent", asymptotically_independent}};
}

AsymptoticIndependenceReport asymptotic_independence_check(const zoo::ConditionalModel& model, std::size_t n,
                                                           std::uint64_t seed, double q, double tolerance, Exec exec,
                                                           int workers) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("asymptotic_independence_check: q must lie in (0, 1)");
  const Pairs sample = model.sample_standardized(n, seed, exec, workers);
  const double t = static_cast<double>(n) * q;
  std::size_t joint = 0;
  std::size_t mx = 0;
  std::size_t my = 0;
  for (const auto& p : sample) {
    const bool bx = p[0] > t;
    const bool by = p[1] > t;
    joint += bx && by;
    mx += bx;
    my += by;
  }
  const double scale_factor = t / static_cast<double>(n);
  AsymptoticIndependenceReport r;
  r.model = model.name;
  r.t = t;
  r.joint = scale_factor * static_cast<double>(joint);
  r.marginal_x = scale_factor * static_cast<double>(mx);
  r.marginal_y = scale_factor * static_cast<double>(my);
  r.asymptotically_independent = r.joint < tolerance;
  return r;
}

}  // namespace cevlab::mc
