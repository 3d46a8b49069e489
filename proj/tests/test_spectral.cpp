#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cevlab/error.hpp"
#include "cevlab/montecarlo.hpp"
#include "cevlab/spectral.hpp"
#include "oracles.hpp"

using namespace cevlab;
using namespace cevlab::spectral;

namespace {

SpectralMeasure random_atoms(std::mt19937_64& rng, int count) {
  std::uniform_real_distribution<double> u(0.0, 0.98);
  std::uniform_real_distribution<double> m(0.1, 2.0);
  std::vector<Atom> atoms;
  for (int i = 0; i < count; ++i) atoms.push_back({u(rng), m(rng)});
  return validate_normalization(SpectralMeasure::atoms(atoms));
}

}  // namespace

TEST(Normalization, UniformBecomesTwo) {
  const SpectralMeasure s = validate_normalization(uniform());
  EXPECT_NEAR(s.density_at(0.3), 2.0, 1e-12);
  EXPECT_NEAR(s.scale_factor(), 2.0, 1e-12);
  EXPECT_NEAR(s.first_moment_complement(), 1.0, 1e-12);
}

TEST(Normalization, AtomCases) {
  const SpectralMeasure single = validate_normalization(SpectralMeasure::atoms({{0.0, 1.0}}));
  EXPECT_DOUBLE_EQ(single.scale_factor(), 1.0);
  const SpectralMeasure two = validate_normalization(SpectralMeasure::atoms({{0.0, 2.0}, {0.5, 4.0}}));
  EXPECT_NEAR(two.scale_factor(), 0.25, 1e-15);
  EXPECT_NEAR(two.atom_list()[1].mass, 1.0, 1e-15);
}

TEST(Normalization, RejectsZeroMass) {
  EXPECT_THROW(validate_normalization(SpectralMeasure::atoms({})), DomainError);
}

TEST(MuRect, ClosedFormValues) {
  const MuStar u(parse_spectral("uniform"));
  EXPECT_NEAR(u.rect(1.0, 1.0), 0.5, 1e-12);
  EXPECT_NEAR(u.rect(2.0, 1.0), 2.0 / 3.0, 1e-12);
  const MuStar axis(parse_spectral("atoms:0:1"));
  for (double x : {0.1, 1.0, 50.0}) EXPECT_NEAR(axis.rect(x, 2.0), 0.5, 1e-15);
}

TEST(MuRect, DensityFamiliesMatchHighPrecision) {
  const MuStar b(parse_spectral("beta:2,3"));
  EXPECT_NEAR(b.h_star(1.0), oracle::kBeta23HStar1, 1e-9);
  EXPECT_NEAR(b.h_star(3.0), oracle::kBeta23HStar3, 1e-9);
  EXPECT_NEAR(b.rect(2.0, 0.5), oracle::kBeta23Rect_2_half, 1e-9);
  EXPECT_NEAR(b.g_random_norm(1.0), oracle::kBeta23G1, 1e-9);
  const MuStar p(parse_spectral("pole:1.5"));
  EXPECT_NEAR(p.h_star(1.0), oracle::kPoleHStar1, 1e-9);
  EXPECT_NEAR(p.rect(2.0, 3.0), oracle::kPoleRect_2_3, 1e-9);
  EXPECT_NEAR(p.g_random_norm(2.0), oracle::kPoleG2, 1e-9);
}

TEST(MuRect, FubiniAgreesOnAtomsAndDensities) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> xy(0.05, 20.0);
  for (int rep = 0; rep < 5; ++rep) {
    const MuStar m(random_atoms(rng, 5));
    for (int i = 0; i < 20; ++i) {
      const double x = xy(rng);
      const double y = xy(rng);
      EXPECT_NEAR(m.rect_fubini(x, y), m.rect(x, y), 1e-6);
    }
  }
  for (const char* spec : {"uniform", "beta:2,3", "beta:0.5,0.5", "table:64:beta:2,3"}) {
    const MuStar m(parse_spectral(spec));
    for (double x : {0.2, 1.0, 7.0}) {
      for (double y : {0.3, 1.0, 4.0}) EXPECT_NEAR(m.rect_fubini(x, y), m.rect(x, y), 1e-6) << spec;
    }
  }
  EXPECT_NEAR(MuStar(parse_spectral("atoms:0:1")).rect_fubini(1.0, 1.0), 1.0, 1e-9);
}

TEST(MuRect, HomogeneousOfDegreeMinusOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xy(0.1, 10.0);
  for (const char* spec : {"uniform", "beta:2,3", "atoms:0.25:1,0.75:1"}) {
    const MuStar m(parse_spectral(spec));
    for (int i = 0; i < 20; ++i) {
      const double x = xy(rng);
      const double y = xy(rng);
      for (double c : {0.5, 2.0, 10.0}) EXPECT_NEAR(m.rect(c * x, c * y), m.rect(x, y) / c, 1e-8) << spec;
    }
  }
}

TEST(MuRect, MonotoneInBothArguments) {
  const MuStar m(parse_spectral("beta:2,3"));
  double prev = 0.0;
  for (double x = 0.1; x < 20.0; x *= 1.5) {
    const double v = m.rect(x, 1.0);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
  prev = m.rect(1.0, 0.1);
  for (double y = 0.15; y < 20.0; y *= 1.5) {
    const double v = m.rect(1.0, y);
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
}

TEST(HStar, UniformIsPareto) {
  const MuStar m(parse_spectral("uniform"));
  for (double x : {0.1, 1.0, 3.0, 10.0}) EXPECT_NEAR(m.h_star(x), x / (1.0 + x), 1e-9);
  EXPECT_NEAR(MuStar(parse_spectral("atoms:0:1")).h_star(0.7), 1.0, 1e-15);
}

TEST(RandomNormLimit, UniformClosedForm) {
  const MuStar m(parse_spectral("uniform"));
  for (double x : {0.01, 1.0, 4.0}) EXPECT_NEAR(m.g_random_norm(x), 1.0 - std::pow(1.0 + x, -2.0), 1e-12);
  EXPECT_NEAR(m.g_random_norm(1e-300), 0.0, 1e-12);
  EXPECT_NEAR(MuStar(parse_spectral("atoms:0:1")).g_random_norm(0.3), 1.0, 1e-15);
}

TEST(Sampler, AtomAtZeroGivesAxisPoints) {
  const auto sample = sample_from_mu_star(MuStar(parse_spectral("atoms:0:1")), 10000, 3);
  ASSERT_FALSE(sample.points.empty());
  for (const auto& p : sample.points) {
    EXPECT_EQ(p[0], 0.0);
    EXPECT_GT(p[1], 1.0);
  }
}

TEST(Sampler, UniformMatchesHStarAtModerateN) {
  const MuStar m(parse_spectral("uniform"));
  const auto sample = sample_from_mu_star(m, 400000, 42);
  std::vector<double> xs;
  for (const auto& p : sample.points) xs.push_back(p[0]);
  const auto grid = mc::ks_grid(xs);
  std::vector<double> lim;
  for (double x : grid) lim.push_back(m.h_star(x));
  EXPECT_LT(mc::ks_distance(mc::empirical_cdf(xs, grid), lim).value(), 1e-2);
  EXPECT_NEAR(sample.acceptance_rate(), 0.5, 5e-3);
}

TEST(Serialization, JsonRoundTrip) {
  for (const char* spec : {"uniform", "beta:2,3", "atoms:0.25:1,0.75:1", "pole:1.5"}) {
    const SpectralMeasure s = parse_spectral(spec);
    const SpectralMeasure back = SpectralMeasure::from_json(s.to_json());
    EXPECT_EQ(back.to_json(), s.to_json()) << spec;
    EXPECT_NEAR(MuStar(back).rect(1.5, 0.7), MuStar(s).rect(1.5, 0.7), 1e-14) << spec;
  }
}

TEST(Registry, NamesAndErrors) {
  const auto names = spectral_names();
  EXPECT_NE(std::find(names.begin(), names.end(), "uniform"), names.end());
  EXPECT_NE(std::find(names.begin(), names.end(), "atoms"), names.end());
  EXPECT_THROW(parse_spectral("unifrom"), SpecError);
  EXPECT_THROW(MuStar{uniform()}, DomainError);
}

TEST(Properties, LimitsReachOneAndGIsMonotone) {
  for (const char* spec : {"uniform", "beta:2,3", "beta:0.5,0.5", "pole:1.5", "atoms:0.25:1,0.75:1"}) {
    const MuStar m(parse_spectral(spec));
    const std::string name(spec);
    if (name.rfind("beta", 0) == 0 || name == "uniform") EXPECT_NEAR(m.h_star(1e6), 1.0, 1e-3) << spec;
    EXPECT_NEAR(m.g_random_norm(1e9), 1.0, 1e-3) << spec;
    double prev = 0.0;
    for (double x = 1e-3; x < 1e4; x *= 1.2) {
      const double g = m.g_random_norm(x);
      EXPECT_GE(g, prev) << spec;
      prev = g;
    }
  }
}

TEST(Properties, InfiniteMassPoleTailDecaysAsPower) {
  // S(dw) ~ (1-w)^-gamma near 1 puts a tail of order x^(1-gamma) on H*.
  const MuStar m(parse_spectral("pole:1.5"));
  EXPECT_NEAR(m.h_star(1e12), 1.0, 1e-5);
  EXPECT_NEAR((1.0 - m.h_star(1e8)) / (1.0 - m.h_star(1e6)), 0.1, 1e-3);
}

TEST(Properties, SamplerWithinDkwBound) {
  const MuStar m(parse_spectral("beta:2,3"));
  const auto sample = sample_from_mu_star(m, 200000, 13);
  std::vector<double> xs;
  for (const auto& p : sample.points) xs.push_back(p[0]);
  const double n = static_cast<double>(xs.size());
  const double bound = 3.0 * std::sqrt(std::log(2.0 / 1e-3) / (2.0 * n));
  EXPECT_LT(mc::ks_one_sample(xs, [&m](double x) { return x < 0.0 ? 0.0 : m.h_star(x); }), bound);
}
