// Acceptance run: one PASS/FAIL line per criterion, then a summary. Exit code 0 only when
// every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cevlab/montecarlo.hpp"
#include "cevlab/normal.hpp"
#include "cevlab/rv_toolkit.hpp"
#include "cevlab/spectral.hpp"
#include "cevlab/transforms.hpp"
#include "cevlab/zoo.hpp"
#include "json.hpp"

using namespace cevlab;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  json fingerprint;  ///< every number the verdict rests on
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  ///< seconds; 0 when none is stated
  std::function<Outcome(int workers)> run;
};

std::string num(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

const std::vector<double> kProbs{1e-1, 1e-2, 1e-3};
constexpr std::size_t kBigN = 2000000;
constexpr std::uint64_t kSeed = 7;

Outcome uniform_closed_form(int) {
  const spectral::MuStar m(spectral::parse_spectral("uniform"));
  double err = 0.0;
  json values = json::array();
  for (double x : {0.1, 1.0, 3.0, 10.0}) {
    const double h = m.h_star(x);
    values.push_back(h);
    err = std::max(err, std::abs(h - x / (1.0 + x)));
  }
  const double rect = m.rect(1.0, 1.0);
  values.push_back(rect);
  err = std::max(err, std::abs(rect - 0.5));
  return {err <= 1e-9, "max |H* - x/(1+x)|, |mu(1,1) - 1/2| = " + num(err) + " (<= 1e-9)", values};
}

/// 100 seeded cases cycling through random atoms, uniform, beta and pole densities.
Outcome fubini_consistency(int) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, u01(rng)); };
  double err = 0.0;
  json values = json::array();
  for (int i = 0; i < 100; ++i) {
    spectral::SpectralMeasure s = spectral::parse_spectral("uniform");
    switch (i % 4) {
      case 0: {
        std::vector<spectral::Atom> atoms;
        for (int k = 0; k < 5; ++k) atoms.push_back({0.98 * u01(rng), 0.1 + 2.0 * u01(rng)});
        s = spectral::validate_normalization(spectral::SpectralMeasure::atoms(atoms));
        break;
      }
      case 1:
        break;
      case 2:
        s = spectral::beta(0.5 + 3.0 * u01(rng), 0.5 + 3.0 * u01(rng));
        break;
      default:
        s = spectral::pole(1.1 + 0.8 * u01(rng));
    }
    const spectral::MuStar m(s);
    const double x = log_uniform(0.05, 20.0);
    const double y = log_uniform(0.05, 20.0);
    const double a = m.rect(x, y);
    const double b = m.rect_fubini(x, y);
    values.push_back(json::array({a, b}));
    err = std::max(err, std::abs(a - b));
  }
  return {err <= 1e-6, "max |mu_rect - mu_rect_fubini| over 100 cases = " + num(err) + " (<= 1e-6)", values};
}

Outcome homogeneity(int) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> xy(0.1, 10.0);
  const std::vector<std::string> specs{"uniform", "beta:2,3", "atoms:0.25:1,0.75:1", "pole:1.5"};
  double err = 0.0;
  json values = json::array();
  for (int i = 0; i < 20; ++i) {
    const spectral::MuStar m(spectral::parse_spectral(specs[i % specs.size()]));
    const double x = xy(rng);
    const double y = xy(rng);
    const double base = m.rect(x, y);
    for (double c : {0.5, 2.0, 10.0}) {
      const double scaled = m.rect(c * x, c * y);
      values.push_back(scaled);
      err = std::max(err, std::abs(scaled - base / c));
    }
  }
  return {err <= 1e-8, "max |mu(cx,cy) - mu(x,y)/c| = " + num(err) + " (<= 1e-8)", values};
}

Outcome sampler_oracle(int workers) {
  const spectral::MuStar m(spectral::parse_spectral("uniform"));
  const auto sample = spectral::sample_from_mu_star(m, 1000000, 42, Exec::Parallel, workers);
  std::vector<double> xs;
  xs.reserve(sample.points.size());
  for (const auto& p : sample.points) xs.push_back(p[0]);
  const double ks = mc::ks_one_sample(xs, [&m](double x) { return x < 0.0 ? 0.0 : m.h_star(x); });
  return {ks < 5e-3, "KS(empirical H*, x/(1+x)) = " + num(ks) + " (< 5e-3), accepted " +
                         std::to_string(sample.points.size()),
          {ks, sample.points.size()}};
}

Outcome random_norming(int workers) {
  const auto uniform =
      mc::random_norming_check(spectral::MuStar(spectral::parse_spectral("uniform")), 100000, kSeed, Exec::Parallel,
                               workers);
  const auto atoms = mc::random_norming_check(spectral::MuStar(spectral::parse_spectral("atoms:0.25:1,0.75:1")),
                                              100000, kSeed, Exec::Parallel, workers);
  const bool pass = uniform.ks < 0.02 && atoms.ks < 0.02;
  return {pass, "KS(X*/Y, G): uniform " + num(uniform.ks) + ", two atoms " + num(atoms.ks) + " (< 0.02)",
          {uniform.to_json(), atoms.to_json()}};
}

Outcome study(const std::string& spec, double tol, int workers, bool need_trend) {
  const auto model = zoo::parse_model(spec);
  mc::StudyOptions o;
  o.workers = workers;
  o.ks_tolerance = tol;
  const auto r = mc::convergence_study(model, kProbs, kBigN, kSeed, o);
  const auto ks = r.ks();
  const bool pass = ks.back() <= tol && (!need_trend || r.ks_trend_ok);
  std::string detail = "KS at p=1e-1,1e-2,1e-3: " + num(ks[0]) + ", " + num(ks[1]) + ", " + num(ks[2]) +
                       " (final <= " + num(tol) + ")";
  if (need_trend) detail += r.ks_trend_ok ? ", trend within noise band" : ", trend VIOLATED";
  return {pass, detail, r.to_json()};
}

Outcome bivariate_normal(int workers) { return study("bvn:0.5", 0.1, workers, true); }

Outcome exponential_margin(int workers) { return study("bvn-exp:0.5", 0.1, workers, false); }

Outcome mixture_one(int workers) {
  Outcome o = study("mix1:p=0.5,theta=0.5", 0.05, workers, false);
  const double nu = zoo::logistic_nu_rect(0.5, 1.0, 1.0);
  const double err = std::abs(nu - (std::sqrt(2.0) - 1.0));
  o.pass = o.pass && err <= 1e-12;
  o.detail += "; |nu(1/2,1,1) - (sqrt2 - 1)| = " + num(err) + " (<= 1e-12)";
  o.fingerprint["nu"] = nu;
  return o;
}

Outcome independence(int workers) {
  const auto mix = mc::asymptotic_independence_check(zoo::parse_model("mix1:p=0.5,theta=0.5"), kBigN, kSeed, 1e-3,
                                                     0.05, Exec::Parallel, workers);
  const auto base = mc::asymptotic_independence_check(zoo::parse_model("logistic:theta=0.5"), kBigN, kSeed, 1e-3,
                                                      0.05, Exec::Parallel, workers);
  const double target = 2.0 - std::sqrt(2.0);
  const bool pass = mix.joint < 0.05 && std::abs(base.joint - target) <= 0.05;
  return {pass,
          "mixture I joint " + num(mix.joint) + " (< 0.05); logistic joint " + num(base.joint) + " (in " +
              num(target) + " +- 0.05)",
          {mix.to_json(), base.to_json()}};
}

Outcome negative_controls(int workers) {
  const auto mix = zoo::parse_model("mix1:p=0.5,theta=0.5");
  mc::StudyOptions naive;
  naive.workers = workers;
  naive.norming = zoo::naive_norming();
  const auto r1 = mc::convergence_study(mix, kProbs, kBigN, kSeed, naive);

  const auto bvn = zoo::parse_model("bvn:0.5");
  mc::StudyOptions wrong;
  wrong.workers = workers;
  wrong.norming = NormingPair(constant(1.0, Domain::above(1.0)), constant(0.0, Domain::above(1.0)),
                              PsiClass::ProductCase);
  const auto r2 = mc::convergence_study(bvn, kProbs, kBigN, kSeed, wrong);
  const auto ks = r2.ks();
  const double min_ks = *std::min_element(ks.begin(), ks.end());
  const bool pass = r1.degenerate && !r1.passed && min_ks > 0.2 && !r2.passed;
  return {pass,
          std::string("naive mixture degenerate=") + (r1.degenerate ? "yes" : "no") + " flagged=" +
              (r1.passed ? "no" : "yes") + "; bvn with beta=0 min KS " + num(min_ks) + " (> 0.2) flagged=" +
              (r2.passed ? "no" : "yes"),
          {r1.to_json(), r2.to_json()}};
}

Outcome coordinate_change(int workers) {
  const auto g = default_t_grid();
  const std::vector<double> xg{0.5, 2.0, 10.0};
  const auto pi = classify_h_log(parse_function("pi:log"), g, xg);
  const auto rv = classify_h_log(parse_function("exp"), g, xg);
  const auto neither = classify_h_log(parse_function("normal_binv"), g, xg);
  const bool classes = pi.kind == VariationKind::PiPlus && rv.kind == VariationKind::RV &&
                       std::abs(rv.index - 1.0) < 1e-6 && neither.kind == VariationKind::Neither;

  const auto bvn = zoo::parse_model("bvn:0.5");
  const auto cc = change_coordinates(parse_function("exp"), bvn.norming, bvn.limit_cdf);
  double limit_err = 0.0;
  for (double x = -0.9; x <= 10.0; x += 0.1) {
    limit_err = std::max(limit_err, std::abs(cc.limit_cdf(x) - normal::cdf(std::log1p(x) / std::sqrt(0.75))));
  }
  const auto model = zoo::with_coordinate_change(bvn, cc);
  mc::StudyOptions o;
  o.workers = workers;
  o.ks_tolerance = 0.1;
  const auto r = mc::convergence_study(model, kProbs, kBigN, kSeed, o);
  const double ks = r.ks().back();
  const bool pass = classes && cc.admissible && limit_err <= 1e-12 && ks <= 0.1;
  return {pass,
          "h_log classes " + to_string(pi.kind) + "/" + to_string(rv.kind) + "/" + to_string(neither.kind) +
              " (expect PiPlus/RV/Neither); h=exp admissible=" + (cc.admissible ? "yes" : "no") +
              ", |H2 - N(log(1+x)/s)| = " + num(limit_err) + ", KS " + num(ks) + " (<= 0.1)",
          {r.to_json(), limit_err}};
}

Outcome density_scaling(int) {
  const std::vector<double> t{1e2, 1e3, 1e4};
  std::vector<double> u;
  for (int i = -40; i <= 40; ++i) u.push_back(0.1 * i);
  const std::vector<double> v{1.0, 2.0, 5.0};
  const auto r = mc::density_scaling_check(zoo::parse_model("bvn:0.5"), t, u, v);
  const double mass = *std::max_element(r.mass_error.begin(), r.mass_error.end());
  const bool pass = r.cauchy_decreasing && mass <= 1e-6;
  return {pass,
          "slice distances " + num(r.cauchy[0]) + " -> " + num(r.cauchy[1]) +
              (r.cauchy_decreasing ? " decreasing" : " NOT decreasing") + "; max |int v^2 g du - 1| = " +
              num(mass) + " (<= 1e-6)",
          r.to_json()};
}

void print_line(bool pass, int id, const std::string& title, const std::string& detail, double seconds,
                double limit) {
  std::printf("%s  C%-2d %-34s %s [%.2fs", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str(), seconds);
  if (limit > 0) std::printf(" / limit %.0fs", limit);
  std::printf("]\n");
  std::fflush(stdout);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "uniform spectral closed form", 1, uniform_closed_form},
      {2, "Fubini consistency", 10, fubini_consistency},
      {3, "homogeneity of mu*", 1, homogeneity},
      {4, "mu* sampler oracle", 10, sampler_oracle},
      {5, "random norming", 10, random_norming},
      {6, "bivariate normal convergence", 60, bivariate_normal},
      {7, "exponential-margin bvn", 60, exponential_margin},
      {8, "mixture I conditional limit", 60, mixture_one},
      {9, "asymptotic independence dichotomy", 0, independence},
      {10, "degeneracy negative controls", 0, negative_controls},
      {11, "coordinate-change admissibility", 0, coordinate_change},
      {12, "density scaling", 0, density_scaling},
  };

  int failures = 0;
  std::vector<std::string> fingerprints;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run(0);
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what(), json()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit <= 0 || seconds < c.time_limit;
    const bool pass = o.pass && in_time;
    if (!in_time) o.detail += "; runtime over limit";
    print_line(pass, c.id, c.title, o.detail, seconds, c.time_limit);
    failures += pass ? 0 : 1;
    fingerprints.push_back(o.fingerprint.dump());
  }

  // Rerun everything with a single worker and with three workers; every number must match.
  const auto start = std::chrono::steady_clock::now();
  std::vector<int> mismatched;
  for (int workers : {1, 3}) {
    for (std::size_t i = 0; i < criteria.size(); ++i) {
      std::string again;
      try {
        again = criteria[i].run(workers).fingerprint.dump();
      } catch (const std::exception& e) {
        again = e.what();
      }
      if (again != fingerprints[i]) mismatched.push_back(criteria[i].id);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string detail = "criteria 1-12 rerun with 1 and 3 workers against the default run: ";
  if (mismatched.empty()) {
    detail += "all bit-identical";
  } else {
    detail += "mismatch in";
    for (int id : mismatched) detail += " C" + std::to_string(id);
  }
  print_line(mismatched.empty(), 13, "determinism and worker invariance", detail, seconds, 0);
  failures += mismatched.empty() ? 0 : 1;

  std::printf("%d of 13 criteria passed\n", 13 - failures);
  return failures == 0 ? 0 : 1;
}
