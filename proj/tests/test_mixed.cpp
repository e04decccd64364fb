#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "patmom/moments.hpp"
#include "patmom/oracle.hpp"
#include "support.hpp"

using namespace patmom;
using namespace patmom_tests;

namespace {

// exhaustive mixed factorial terms: sum over all texts of the product of
// falling-factorial counts, model-weighted
double brute_mixed(const MarkovModel& m, const Pattern& w1, const Pattern& w2, int ell,
                   int k1, int k2) {
  double acc = 0;
  for (const auto& t : all_texts(m.alphabet, ell)) {
    double n1 = static_cast<double>(count_occurrences_naive(t, w1));
    double n2 = static_cast<double>(count_occurrences_naive(t, w2));
    acc += text_prob(m, t) * binomial_real(n1, k1) * binomial_real(n2, k2);
  }
  return acc;
}

}  // namespace

TEST(MixedTerms, SixteenTextInstance) {
  Alphabet ab("AB");
  Pattern w1 = parse_pattern("AA", ab), w2 = parse_pattern("BB", ab);
  MarkovModel m = make_iid(ab, {0.5, 0.5});
  TwoPatternChain ch = embed_two(build_two_pattern_dfa(w1, w2, 0), m, 4);
  auto mx = mixed_factorial_terms(ch, 1, 1);
  // E[N1 N2] over the 16 equiprobable texts: only AABB and BBAA hit both
  EXPECT_NEAR(mx.at(1, 1), 0.125, 1e-12);
  EXPECT_NEAR(mx.at(1, 1), brute_mixed(m, w1, w2, 4, 1, 1), 1e-12);
  EXPECT_NEAR(mx.at(0, 0), 1.0, 1e-12);
}

TEST(MixedTerms, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(321);
  Alphabet ab("AB");
  for (int rep = 0; rep < 6; ++rep) {
    int d = rep % 2;
    int ell = 5 + rep;
    MarkovModel m = random_model(rng, ab, d);
    Pattern w1 = parse_pattern(d == 0 ? "AA" : "AAB", ab);
    Pattern w2 = parse_pattern(d == 0 ? "BB" : "BBA", ab);
    TwoPatternChain ch = embed_two(build_two_pattern_dfa(w1, w2, d), m, ell);
    auto mx = mixed_factorial_terms(ch, 2, 2);
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; b <= 2; ++b)
        ASSERT_NEAR(mx.at(a, b), brute_mixed(m, w1, w2, ell, a, b), 1e-11)
            << "rep " << rep << " (" << a << "," << b << ")";
  }
}

TEST(MixedTerms, MarginalizesToSinglePattern) {
  Alphabet ab("AB");
  std::mt19937_64 rng(77);
  MarkovModel m = random_model(rng, ab, 0);
  Pattern w1 = parse_pattern("AA", ab), w2 = parse_pattern("BB", ab);
  const int ell = 30;
  TwoPatternChain ch2 = embed_two(build_two_pattern_dfa(w1, w2, 0), m, ell);
  auto mx = mixed_factorial_terms(ch2, 3, 0);
  auto g1 = factorial_terms_power(embed(build_dfa(w1, 0), m, ell), 3);
  for (int j = 0; j <= 3; ++j)
    ASSERT_NEAR(mx.at(j, 0), g1[j], 1e-10 * std::max(1.0, std::fabs(g1[j])));
}

TEST(MixedTerms, CovarianceWithinMonteCarloError) {
  Alphabet ab("AB");
  std::mt19937_64 rng(20240817);
  MarkovModel m = random_model(rng, ab, 0);
  Pattern w1 = parse_pattern("AA", ab), w2 = parse_pattern("BB", ab);
  const int ell = 60;
  TwoPatternChain ch = embed_two(build_two_pattern_dfa(w1, w2, 0), m, ell);
  auto mx = mixed_factorial_terms(ch, 1, 1);
  double cov = mx.at(1, 1) - mx.at(1, 0) * mx.at(0, 1);

  // batch-means Monte Carlo with DFA counting
  Dfa d1 = build_dfa(w1, 0), d2 = build_dfa(w2, 0);
  std::mt19937_64 sim(99);
  auto uniform = [&sim]() { return (sim() >> 11) * 0x1.0p-53; };
  const auto& pi = m.blocks[0].pi;
  const int batches = 100, per_batch = 10000;
  std::vector<double> batch_cov(batches);
  for (int b = 0; b < batches; ++b) {
    double s1 = 0, s2 = 0, s12 = 0;
    for (int r = 0; r < per_batch; ++r) {
      int q1 = d1.start, q2 = d2.start;
      long long n1 = 0, n2 = 0;
      for (int i = 0; i < ell; ++i) {
        double u = uniform();
        int a = u >= pi[0] ? 1 : 0;
        q1 = d1.next(q1, a);
        q2 = d2.next(q2, a);
        n1 += d1.is_final(q1);
        n2 += d2.is_final(q2);
      }
      s1 += n1;
      s2 += n2;
      s12 += static_cast<double>(n1) * n2;
    }
    batch_cov[b] = s12 / per_batch - (s1 / per_batch) * (s2 / per_batch);
  }
  double mean = 0;
  for (double c : batch_cov) mean += c;
  mean /= batches;
  double var = 0;
  for (double c : batch_cov) var += (c - mean) * (c - mean);
  var /= (batches - 1);
  double se = std::sqrt(var / batches);
  EXPECT_NEAR(cov, mean, 4 * se);
}

TEST(MixedTerms, CapEnforced) {
  Alphabet ab("AB");
  MarkovModel m = make_iid(ab, {0.5, 0.5});
  TwoPatternChain ch = embed_two(
      build_two_pattern_dfa(parse_pattern("AA", ab), parse_pattern("BB", ab), 0), m, 6);
  EXPECT_THROW(mixed_factorial_terms(ch, 5, 4), std::invalid_argument);
  EXPECT_NO_THROW(mixed_factorial_terms(ch, 5, 4, 9));
}
