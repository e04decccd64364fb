#include "patmom/gram_charlier.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "patmom/oracle.hpp"
#include "support.hpp"

using namespace patmom;
using namespace patmom_tests;

namespace {

std::vector<double> poisson_terms(double lambda, int k) {
  std::vector<double> g(k + 1);
  double t = 1.0;
  for (int j = 0; j <= k; ++j) {
    g[j] = t;
    t *= lambda / (j + 1);
  }
  return g;
}

// closed coefficient forms by order, transcribed independently of the
// series summation in the implementation
double closed_form_coeff(int k, const std::vector<double>& g) {
  double g1 = g[1];
  switch (k) {
    case 2: return g[2] - g1 * g1 / 2;
    case 3: return -g[3] + g1 * g[2] - std::pow(g1, 3) / 3;
    case 4:
      return g[4] - g1 * g[3] + g1 * g1 * g[2] / 2 - std::pow(g1, 4) / 8;
    case 5:
      return -g[5] + g1 * g[4] - g1 * g1 * g[3] / 2 + std::pow(g1, 3) * g[2] / 6 -
             std::pow(g1, 5) / 30;
    case 6:
      return g[6] - g1 * g[5] + g1 * g1 * g[4] / 2 - std::pow(g1, 3) * g[3] / 6 +
             std::pow(g1, 4) * g[2] / 24 - std::pow(g1, 6) / 144;
    default: return 0;
  }
}

}  // namespace

TEST(LambdaPolyTable, LowOrders) {
  auto t = lambda_poly_table(4);
  EXPECT_EQ(t[0][0].c, (std::vector<double>{1}));
  EXPECT_EQ(t[1][0].c, (std::vector<double>{0, 1}));
  EXPECT_EQ(t[2][0].c, (std::vector<double>{0, 1, 1}));   // lambda + lambda^2
  // P_k^k is the scalar (-1)^k k!
  for (int k = 0; k <= 4; ++k) {
    double sign = k % 2 == 0 ? 1.0 : -1.0;
    EXPECT_NEAR(t[k][k].eval(0.37), sign * factorial_real(k), 1e-12);
    EXPECT_NEAR(t[k][k].eval(5.0), sign * factorial_real(k), 1e-12);
  }
  EXPECT_THROW(lambda_poly_table(17), std::invalid_argument);
}

TEST(LambdaPolyTable, ZeroOrderDifferencesVanish) {
  // sum_i Delta^j psi(i) telescopes to zero for j >= 1
  auto t = lambda_poly_table(3);
  for (int j = 1; j <= 3; ++j) EXPECT_NEAR(t[0][j].eval(1.3), 0.0, 1e-15);
}

TEST(GramCharlierCoeffs, SecondCoefficientClosedForm) {
  std::vector<double> g{1.0, 0.8, 0.5, 0.2, 0.05};
  auto spec = gram_charlier_coeffs(g, 4);
  EXPECT_NEAR(spec.c[2], g[2] - g[1] * g[1] / 2, 1e-14);
  EXPECT_DOUBLE_EQ(spec.c[0], 1.0);
  EXPECT_NEAR(spec.c[1], 0.0, 1e-15);
}

TEST(GramCharlierCoeffs, PoissonInputVanishes) {
  for (double lambda : {0.4, 2.0, 7.5}) {
    auto spec = gram_charlier_coeffs(poisson_terms(lambda, 6), 6);
    for (int j = 1; j <= 6; ++j) EXPECT_NEAR(spec.c_series[j], 0.0, 1e-12) << j;
  }
}

TEST(GramCharlierCoeffs, ClosedFormsMatchSeries) {
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> g(7);
    g[0] = 1.0;
    for (int j = 1; j <= 6; ++j) g[j] = u(rng);
    auto spec = gram_charlier_coeffs(g, 6);
    for (int k = 2; k <= 6; ++k)
      ASSERT_NEAR(spec.c_series[k], closed_form_coeff(k, g), 1e-12) << "k=" << k;
  }
}

TEST(GramCharlierCoeffs, SeriesRouteAgreesWithMomentSystemSolve) {
  // independent triangular solve of sum_j c_j P_k^j(lambda) = m'_k
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> g(5);
    g[0] = 1.0;
    g[1] = 0.5 + u(rng);
    for (int j = 2; j <= 4; ++j) g[j] = u(rng) * g[j - 1];
    auto spec = gram_charlier_coeffs(g, 4);
    double lambda = g[1];
    auto table = lambda_poly_table(4);
    auto raw = raw_from_factorial(g);
    std::vector<double> c(5, 0.0);
    c[0] = 1.0;
    for (int k = 1; k <= 4; ++k) {
      double acc = raw[k];
      for (int j = 0; j < k; ++j) acc -= c[j] * table[k][j].eval(lambda);
      c[k] = acc / table[k][k].eval(lambda);
    }
    for (int k = 0; k <= 4; ++k)
      ASSERT_NEAR(spec.c_series[k], c[k], 1e-10 * std::max(1.0, std::fabs(c[k])));
    for (int k = 0; k <= 4; ++k) EXPECT_TRUE(spec.reliable[k]);
  }
}

TEST(GramCharlierCoeffs, CatastrophicCancellationIsZeroedOut) {
  // exact Poisson terms at a large mean: the order-8 summation cancels about
  // sixteen digits, far past the guard
  auto spec = gram_charlier_coeffs(poisson_terms(70.0, 8), 8);
  bool any_dropped = false;
  for (int j = 2; j <= 8; ++j)
    if (!spec.reliable[j]) {
      any_dropped = true;
      EXPECT_DOUBLE_EQ(spec.c[j], 0.0);
    }
  EXPECT_TRUE(any_dropped);
  EXPECT_FALSE(spec.warnings.empty());
}

TEST(GramCharlierCoeffs, Validation) {
  EXPECT_THROW(gram_charlier_coeffs({1.0, 0.0, 0.0}, 2), std::invalid_argument);
  EXPECT_THROW(gram_charlier_coeffs({1.0, 0.5}, 3), std::invalid_argument);
}

TEST(GramCharlierPmf, OrderZeroIsPoisson) {
  auto spec = gram_charlier_coeffs(poisson_terms(3.2, 2), 0);
  for (long long n = 0; n <= 20; ++n)
    EXPECT_NEAR(gram_charlier_pmf(n, spec), poisson_pmf(n, 3.2), 1e-16);
}

TEST(GramCharlierPmf, SumsToOneForAnyCoefficients) {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int rep = 0; rep < 10; ++rep) {
    GramCharlierSpec spec;
    spec.lambda = 0.5 + 6.0 * (rep / 10.0);
    spec.order = 5;
    spec.c = {1.0, u(rng), u(rng), u(rng), u(rng), u(rng)};
    spec.reliable.assign(6, 1);
    long long hi =
        static_cast<long long>(spec.lambda + 20 * std::sqrt(spec.lambda) + 50);
    double total = 0;
    for (long long n = 0; n <= hi; ++n) total += gram_charlier_pmf(n, spec);
    EXPECT_NEAR(total, 1.0, 1e-10);
  }
}

// A Poisson base needs a rare pattern (occurrence variance close to the
// mean); common patterns like AB on a short uniform chain are far too
// under-dispersed for any low series order.
TEST(GramCharlierPmf, OrderFourMatchesExactNearTheMean) {
  Alphabet ab("AB");
  Pattern p = parse_pattern("AAAB", ab);
  MarkovModel m = make_iid(ab, {0.25, 0.75});
  EmbeddedChain ch = embed(build_dfa(p, 0), m, 300);
  ExactPmf exact = exact_pmf_dp(ch);
  auto g = factorial_terms_full(ch, 4);
  auto spec = gram_charlier_coeffs(g, 4);
  int mode = 0;
  for (int n = 0; n <= exact.n_max(); ++n)
    if (exact.p[n] > exact.p[mode]) mode = n;
  double rel4 = std::fabs(gram_charlier_pmf(mode, spec) / exact.p[mode] - 1);
  double rel0 = std::fabs(poisson_pmf(mode, spec.lambda) / exact.p[mode] - 1);
  EXPECT_LT(rel4, 1e-4);
  EXPECT_LT(rel4, rel0);
}
