#include "patmom/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace patmom;
using namespace patmom_tests;

namespace {
const std::string kDataDir = PATMOM_DATA_DIR;
}

TEST(BruteForce, IidTwoLetterMean) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("AB", ab);
  MarkovModel m = make_iid(ab, {0.5, 0.5});
  auto r = brute_force_moments(m, p, 5, 4);
  EXPECT_NEAR(r.g[0], 1.0, 1e-14);
  EXPECT_NEAR(r.g[1], 1.0, 1e-14);          // 4 positions x 1/4
  EXPECT_NEAR(r.g[2], 3.0 / 16.0, 1e-14);   // pairs of non-adjacent slots
  EXPECT_NEAR(r.pmf.total(), 1.0, 1e-14);
}

TEST(BruteForce, DeterministicSequence) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("AA", ab);
  MarkovModel m = make_iid(ab, {1.0, 0.0});
  auto r = brute_force_moments(m, p, 4, 4);
  // N = 3 almost surely: g_j = C(3, j)
  EXPECT_NEAR(r.g[1], 3.0, 1e-14);
  EXPECT_NEAR(r.g[2], 3.0, 1e-14);
  EXPECT_NEAR(r.g[3], 1.0, 1e-14);
  EXPECT_NEAR(r.g[4], 0.0, 1e-14);
  ASSERT_GE(r.pmf.n_max(), 3);
  EXPECT_NEAR(r.pmf.p[3], 1.0, 1e-14);
}

TEST(BruteForce, RejectsHugeInstances) {
  Alphabet dna = Alphabet::dna();
  Pattern p = parse_pattern("AC", dna, iupac_codes());
  MarkovModel m = make_iid(dna, {0.25, 0.25, 0.25, 0.25});
  EXPECT_THROW(brute_force_moments(m, p, 20, 2), std::invalid_argument);
}

TEST(BruteForce, HeterogeneousWeights) {
  Alphabet ab("AB");
  std::mt19937_64 rng(31);
  auto pi1 = random_stochastic_rows(rng, 2, 2);
  auto pi2 = random_stochastic_rows(rng, 2, 2);
  MarkovModel m = make_heterogeneous(ab, 1, {0.5, 0.5}, {{{2, 4}, pi1}, {{5, 8}, pi2}});
  Pattern p = parse_pattern("AB", ab);
  auto r = brute_force_moments(m, p, 8, 2);
  EXPECT_NEAR(r.pmf.total(), 1.0, 1e-12);
  // cross-check the text weights against the shared helper
  double g1 = 0;
  for (const auto& t : all_texts(ab, 8))
    g1 += text_prob(m, t) * static_cast<double>(count_occurrences_naive(t, p));
  EXPECT_NEAR(r.g[1], g1, 1e-12);
}

TEST(ExactPmfDp, MatchesBruteForce) {
  std::mt19937_64 rng(321);
  Alphabet ab("AB");
  for (int rep = 0; rep < 10; ++rep) {
    int d = rep % 2;
    int ell = 6 + rep % 5;
    Pattern p = random_pattern(rng, ab, d + 1);
    MarkovModel m = random_model(rng, ab, d);
    auto brute = brute_force_moments(m, p, ell, 2);
    ExactPmf dp = exact_pmf_dp(embed(build_dfa(p, d), m, ell), ell);
    for (int n = 0; n <= brute.pmf.n_max(); ++n)
      ASSERT_NEAR(dp.p[n], brute.pmf.p[n], 1e-12) << "n=" << n << " rep=" << rep;
  }
}

TEST(ExactPmfDp, AutoCapAndMomentAgreement) {
  MarkovModel m = parse_model_file(kDataDir + "/ecoli.mm");
  Pattern p = parse_pattern("GCTGGT", m.alphabet, iupac_codes());
  EmbeddedChain ch = embed(build_dfa(p, 1), m, 4000);
  ExactPmf pmf = exact_pmf_dp(ch);
  EXPECT_NEAR(pmf.total(), 1.0, 1e-12);
  auto g_dp = factorial_terms_from_pmf(pmf.p, 4);
  auto g_alg = factorial_terms_power(ch, 4);
  for (int j = 0; j <= 4; ++j)
    EXPECT_NEAR(g_dp[j], g_alg[j], 1e-9 * std::max(1.0, std::fabs(g_alg[j])));
}

TEST(ExactPmfDp, PointMassForDeterministicChain) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("AA", ab);
  MarkovModel m = make_iid(ab, {1.0, 0.0});
  ExactPmf pmf = exact_pmf_dp(embed(build_dfa(p, 0), m, 4), 4);
  EXPECT_NEAR(pmf.p[3], 1.0, 1e-14);
}

TEST(ExactPmfDp, LowCapRaises) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("A", ab);
  MarkovModel m = make_iid(ab, {0.9, 0.1});
  EXPECT_THROW(exact_pmf_dp(embed(build_dfa(p, 0), m, 30), 2), std::runtime_error);
}

TEST(MonteCarlo, DeterministicGivenSeed) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("AB", ab);
  MarkovModel m = make_iid(ab, {0.5, 0.5});
  McMoments a = monte_carlo(m, p, 200, 500, 42);
  McMoments b = monte_carlo(m, p, 200, 500, 42);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  McMoments c = monte_carlo(m, p, 200, 500, 43);
  EXPECT_NE(a.mean, c.mean);
}

TEST(MonteCarlo, IidMeanWithinFourSe) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("AB", ab);
  MarkovModel m = make_iid(ab, {0.5, 0.5});
  McMoments r = monte_carlo(m, p, 1000, 20000, 7);
  double want = 999.0 / 4.0;
  EXPECT_NEAR(r.mean, want, 4 * r.se_mean);
}

TEST(MonteCarlo, EcoliMeanMatchesPowerAlgorithm) {
  MarkovModel m = parse_model_file(kDataDir + "/ecoli.mm");
  Pattern p = parse_pattern("GCTGGT", m.alphabet, iupac_codes());
  McMoments mc = monte_carlo(m, p, 400000, 10000, 20240817);
  auto g = factorial_terms_power(embed(build_dfa(p, 1), m, 400000), 2);
  auto ms = moment_set_from_factorial(g);
  EXPECT_NEAR(mc.mean, ms.mean(), 4 * mc.se_mean);
}
