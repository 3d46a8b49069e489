#include <gtest/gtest.h>

#include <cmath>

#include "cevlab/error.hpp"
#include "cevlab/montecarlo.hpp"
#include "cevlab/normal.hpp"

using namespace cevlab;
using namespace cevlab::mc;

TEST(Ks, IdenticalAndExtremeMismatch) {
  const std::vector<double> a{0.1, 0.4, 0.9};
  EXPECT_EQ(ks_distance(a, a).grid_sup, 0.0);
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(i / 100.0);
  const std::vector<double> zeros(1000, 0.0);
  std::vector<double> uniform_cdf(grid);
  const auto d = ks_distance(empirical_cdf(zeros, grid), uniform_cdf);
  EXPECT_NEAR(d.value(), 1.0, 0.011);
  EXPECT_EQ(ks_two_sample({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_NEAR(ks_two_sample({1, 2}, {3, 4}), 1.0, 1e-15);
}

TEST(Ks, DkwSanity) {
  const auto u = generate<double>(10000, 17, Exec::Parallel, 0, [](Stream& s) { return s.uniform(); });
  const auto grid = ks_grid(u);
  EXPECT_LT(ks_distance(empirical_cdf(u, grid), grid).value(), 0.02);
  EXPECT_TRUE(std::is_sorted(grid.begin(), grid.end()));
}

TEST(Exceedances, CountMatchesProbability) {
  const auto m = zoo::parse_model("product");
  const auto sample = m.sample_standardized(100000, 3);
  for (double p : {0.1, 0.01, 0.001}) {
    const auto es = exceedances_at_prob(sample, p, "product", 3);
    EXPECT_EQ(es.size(), static_cast<std::size_t>(std::floor(100000 * p)));
    for (const auto& q : es.pairs) EXPECT_GT(q[1], es.t);
  }
  EXPECT_THROW(exceedances_at_prob(sample, 1e-6, "product", 3), DomainError);
  const auto small = exceedances_at_prob(sample, 2e-4, "product", 3);
  EXPECT_THROW(empirical_conditional_cdf(small, m.norming, std::vector<double>{0.0}), DomainError);
}

TEST(Factorization, IndependentAndCoupled) {
  const auto m = zoo::parse_model("product");
  const auto es = exceedances_at_prob(m.sample_standardized(400000, 8), 0.01, "product", 8);
  const auto normed = normalized_x(es, m.norming);
  const double bound = 4.0 * std::sqrt(1.0 / (es.size() / 4.0));
  EXPECT_LT(factorization_test(es, normed), bound);
  std::vector<double> coupled;
  for (const auto& q : es.pairs) coupled.push_back(q[1] / es.t);
  EXPECT_GT(factorization_test(es, coupled), 0.9);
}

TEST(Factorization, MixtureUnderRandomNormingIsFlat) {
  const auto m = zoo::parse_model("mix1");
  const auto es = exceedances_at_prob(m.sample_standardized(1000000, 5), 0.002, "mix1", 5);
  std::vector<double> ratio;
  for (const auto& q : es.pairs) ratio.push_back(q[0] * q[0] / q[1]);
  EXPECT_LT(factorization_test(es, ratio), 4.0 * std::sqrt(1.0 / (es.size() / 4.0)));
}

TEST(Degeneracy, NaiveScalingFlaggedOnlyForMixture) {
  const auto mix = zoo::parse_model("mix1");
  const auto sample = mix.sample_standardized(1000000, 12);
  const auto es = exceedances_at_prob(sample, 0.01, "mix1", 12);
  EXPECT_TRUE(degeneracy_diagnostic(es, zoo::naive_norming()).degenerate);
  EXPECT_FALSE(degeneracy_diagnostic(es, mix.norming).degenerate);
  const auto bvn = zoo::parse_model("bvn:0.5");
  const auto eb = exceedances_at_prob(bvn.sample_standardized(1000000, 12), 0.01, "bvn", 12);
  EXPECT_FALSE(degeneracy_diagnostic(eb, bvn.norming).degenerate);
}

TEST(RandomNorming, SpectralSamples) {
  EXPECT_LT(random_norming_check(spectral::MuStar(spectral::parse_spectral("uniform")), 100000, 7).ks, 0.02);
  const auto two = random_norming_check(spectral::MuStar(spectral::parse_spectral("atoms:0.25:1,0.75:1")), 100000, 7);
  EXPECT_EQ(two.method, "atom-grid");
  EXPECT_LT(two.ks, 0.02);
  const auto axis = random_norming_check(spectral::MuStar(spectral::parse_spectral("atoms:0:1")), 20000, 7);
  EXPECT_LT(axis.ks, 1e-12);
}

TEST(RandomNorming, ProductCaseModel) {
  const auto r = random_norming_check(zoo::parse_model("bvn:0.5"), 1e-2, 200000, 4);
  EXPECT_EQ(r.form, "(X-beta(Y))/alpha(Y)");
  EXPECT_LT(r.ks, 0.1);
  EXPECT_THROW(random_norming_check(zoo::parse_model("mix1"), 1e-2, 200000, 4), DomainError);
}

TEST(Convergence, WrongCenteringIsFlagged) {
  const auto bvn = zoo::parse_model("bvn:0.5");
  StudyOptions o;
  o.norming = NormingPair(constant(1.0, Domain::above(1.0)), constant(0.0, Domain::above(1.0)),
                          PsiClass::ProductCase);
  const std::vector<double> probs{0.1, 0.01};
  const auto r = convergence_study(bvn, probs, 200000, 3, o);
  for (double k : r.ks()) EXPECT_GT(k, 0.2);
  EXPECT_FALSE(r.passed);
}

TEST(Convergence, ReportSerialization) {
  const std::vector<double> probs{0.1, 0.01};
  const auto r = convergence_study(zoo::parse_model("product"), probs, 200000, 2);
  const auto j = r.to_json();
  EXPECT_EQ(j["schema"], kSchemaVersion);
  EXPECT_EQ(j["ks"].size(), 2u);
  const std::string csv = r.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,count,ks,degenerate,factorization_stat");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_TRUE(r.passed);
  const std::vector<double> bad{0.5, 1e-6};
  EXPECT_THROW(convergence_study(zoo::parse_model("product"), bad, 50000, 2), DomainError);
}

TEST(DensityScaling, ProductExactAndNormalConverging) {
  const std::vector<double> t{1e2, 1e3, 1e4};
  const std::vector<double> u{-2.0, -0.5, 0.0, 1.0, 2.5};
  const std::vector<double> v{1.0, 2.0, 5.0};
  const auto product = density_scaling_check(zoo::parse_model("product"), t, u, v);
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      EXPECT_NEAR(product.slices[0][i * v.size() + j], normal::pdf(u[i]) / (v[j] * v[j]), 1e-12);
    }
  }
  const auto bvn = density_scaling_check(zoo::parse_model("bvn:0.5"), t, u, v);
  EXPECT_TRUE(bvn.cauchy_decreasing);
  for (double e : bvn.mass_error) EXPECT_LT(e, 1e-6);
  EXPECT_THROW(density_scaling_check(zoo::parse_model("mix1"), t, u, v), DomainError);
}

TEST(AsymptoticIndependence, MixtureVersusLogistic) {
  const auto mix = asymptotic_independence_check(zoo::parse_model("mix1"), 1000000, 3);
  EXPECT_TRUE(mix.asymptotically_independent);
  EXPECT_NEAR(mix.marginal_y, 0.5, 0.08);
  const auto base = asymptotic_independence_check(zoo::parse_model("logistic:theta=0.5"), 1000000, 3);
  EXPECT_FALSE(base.asymptotically_independent);
  EXPECT_NEAR(base.joint, 2.0 - std::sqrt(2.0), 0.08);
}

TEST(Ks, EmpiricalCdfIsMonotoneInUnitInterval) {
  const auto v = generate<double>(5000, 2, Exec::Serial, 1, [](Stream& s) { return s.normal(); });
  std::vector<double> grid;
  for (int i = -50; i <= 50; ++i) grid.push_back(0.1 * i);
  const auto f = empirical_cdf(v, grid);
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_GE(f[i], 0.0);
    EXPECT_LE(f[i], 1.0);
    if (i > 0) EXPECT_GE(f[i], f[i - 1]);
  }
}

TEST(Ks, DkwFailureRateOverRepetitions) {
  // Exceedances of an independent pair: the normed X is exactly N(0,1) at every threshold.
  const auto m = zoo::parse_model("product");
  const double delta = 1e-2;
  int failures = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto es = exceedances_at_prob(m.sample_standardized(20000, derive_seed(77, rep)), 0.05, "product", rep);
    const double bound = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(es.size())));
    failures += ks_one_sample(normalized_x(es, m.norming), normal::cdf) > bound;
  }
  EXPECT_LE(failures, 1);
}

TEST(Convergence, SameSeedSameReport) {
  const std::vector<double> probs{0.1, 0.01};
  const auto m = zoo::parse_model("bvn-exp");
  EXPECT_EQ(convergence_study(m, probs, 100000, 9).to_json().dump(),
            convergence_study(m, probs, 100000, 9).to_json().dump());
  EXPECT_NE(convergence_study(m, probs, 100000, 9).to_json().dump(),
            convergence_study(m, probs, 100000, 10).to_json().dump());
}

TEST(Ks, DkwFailureRateMatchesKolmogorovTail) {
  const auto m = zoo::parse_model("product");
  const double delta = 1e-2;
  const int reps = 2000;
  int failures = 0;
  for (std::uint64_t rep = 0; rep < reps; ++rep) {
    const auto es = exceedances_at_prob(m.sample_standardized(20000, derive_seed(77, rep)), 0.05, "product", rep);
    const double bound = std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(es.size())));
    failures += ks_one_sample(normalized_x(es, m.norming), normal::cdf) > bound;
  }
  EXPECT_LE(failures / static_cast<double>(reps), delta + 3.0 * std::sqrt(delta / reps));
}
