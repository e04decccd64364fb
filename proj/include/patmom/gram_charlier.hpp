#ifndef PATMOM_GRAM_CHARLIER_HPP
#define PATMOM_GRAM_CHARLIER_HPP

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "patmom/combinatorics.hpp"
#include "patmom/moments.hpp"

namespace patmom {

// Polynomial in the Poisson parameter.
struct LambdaPoly {
  std::vector<double> c;   // c[i] multiplies lambda^i

  double eval(double lambda) const {
    double acc = 0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * lambda + c[i];
    return acc;
  }

  LambdaPoly derivative() const {
    LambdaPoly d;
    if (c.size() <= 1) {
      d.c = {0.0};
      return d;
    }
    d.c.resize(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) d.c[i - 1] = static_cast<double>(i) * c[i];
    return d;
  }
};

// Moment sums of the Poisson difference series, as polynomials:
// table[k][j] evaluates sum_i i^k Delta^j psi(i).  Built from
// P_{k+1}^0 = lambda (P_k^0 + dP_k^0) and P_k^{j+1} = -dP_k^j.
inline std::vector<std::vector<LambdaPoly>> lambda_poly_table(int max_order) {
  if (max_order < 0 || max_order > 16)
    throw std::invalid_argument("lambda poly table capped at order 16");
  std::vector<std::vector<LambdaPoly>> t(
      max_order + 1, std::vector<LambdaPoly>(max_order + 1));
  t[0][0].c = {1.0};
  for (int k = 0; k < max_order; ++k) {
    LambdaPoly d = t[k][0].derivative();
    LambdaPoly next;
    next.c.assign(t[k][0].c.size() + 1, 0.0);
    for (size_t i = 0; i < t[k][0].c.size(); ++i) next.c[i + 1] += t[k][0].c[i];
    for (size_t i = 0; i < d.c.size(); ++i) next.c[i + 1] += d.c[i];
    t[k + 1][0] = std::move(next);
  }
  for (int k = 0; k <= max_order; ++k)
    for (int j = 0; j < max_order; ++j) {
      LambdaPoly d = t[k][j].derivative();
      for (double& v : d.c) v = -v;
      t[k][j + 1] = std::move(d);
    }
  return t;
}

// Poisson-based correction series.  c[j] weights the j-th finite difference
// of the Poisson pmf; coefficients judged numerically unreliable are zeroed
// and flagged.
struct GramCharlierSpec {
  double lambda = 0;
  int order = 0;
  std::vector<double> c;          // after the reliability guard
  std::vector<double> c_series;   // raw series values before zeroing
  std::vector<uint8_t> reliable;
  std::vector<std::string> warnings;
};

struct GramCharlierOptions {
  double agree_rtol = 1e-6;    // max relative disagreement between the two routes
  double cancel_cap = 1e8;     // max (largest term / result) cancellation magnitude
};

// Coefficients from the factorial terms.  With lambda = g_1 (the default)
// the closed series c_k = -((k-1)/k!) g_1^k + sum_j (-1)^j g_1^(k-j) g_j/(k-j)!
// applies; each coefficient is recomputed by solving the moment system
// sum_j c_j P_k^j(lambda) = m'_k and flagged unreliable when the routes
// disagree or the summation cancels catastrophically.
inline GramCharlierSpec gram_charlier_coeffs(const std::vector<double>& g, int order,
                                             std::optional<double> lambda_opt = {},
                                             const GramCharlierOptions& opt = {}) {
  if (order < 0) throw std::invalid_argument("negative series order");
  if (static_cast<int>(g.size()) <= order)
    throw std::invalid_argument("series of order " + std::to_string(order) +
                                " needs factorial terms up to that order");
  if (g.empty() || std::fabs(g[0] - 1.0) > 1e-6)
    throw std::invalid_argument("factorial terms must start with g_0 = 1");

  GramCharlierSpec spec;
  spec.order = order;
  const double g1 = g.size() > 1 ? g[1] : 0.0;
  spec.lambda = lambda_opt.value_or(g1);
  if (spec.lambda <= 0) throw std::invalid_argument("Poisson parameter must be positive");
  const bool mean_matched = !lambda_opt || *lambda_opt == g1;

  spec.c.assign(order + 1, 0.0);
  spec.c_series.assign(order + 1, 0.0);
  spec.reliable.assign(order + 1, 1);
  spec.c[0] = spec.c_series[0] = 1.0;
  if (order == 0) return spec;

  // independent route: triangular solve of the moment system
  auto table = lambda_poly_table(order);
  std::vector<double> raw = raw_from_factorial(
      std::vector<double>(g.begin(), g.begin() + order + 1));
  std::vector<double> solve(order + 1, 0.0);
  std::vector<double> solve_cancel(order + 1, 0.0);
  solve[0] = 1.0;
  for (int k = 1; k <= order; ++k) {
    double acc = raw[k];
    double biggest = std::fabs(acc);
    for (int j = 0; j < k; ++j) {
      double term = solve[j] * table[k][j].eval(spec.lambda);
      biggest = std::max(biggest, std::fabs(term));
      acc -= term;
    }
    solve[k] = acc / table[k][k].eval(spec.lambda);
    solve_cancel[k] = std::fabs(solve[k]) > 0
                          ? biggest / (std::fabs(acc))
                          : (biggest > 0 ? opt.cancel_cap * 2 : 1.0);
  }

  for (int k = 1; k <= order; ++k) {
    double value, cancel;
    if (mean_matched) {
      double biggest = 0;
      double acc = -(k - 1) / factorial_real(k) * std::pow(g1, k);
      biggest = std::fabs(acc);
      for (int j = 2; j <= k; ++j) {
        double term = (j % 2 == 0 ? 1.0 : -1.0) * std::pow(g1, k - j) * g[j] /
                      factorial_real(k - j);
        biggest = std::max(biggest, std::fabs(term));
        acc += term;
      }
      value = acc;
      cancel = std::fabs(acc) > 0 ? biggest / std::fabs(acc)
                                  : (biggest > 0 ? opt.cancel_cap * 2 : 1.0);
    } else {
      value = solve[k];
      cancel = solve_cancel[k];
    }
    spec.c_series[k] = value;
    spec.c[k] = value;

    bool ok = cancel <= opt.cancel_cap;
    if (ok && mean_matched) {
      double scale = std::max({std::fabs(value), std::fabs(solve[k]), 1e-300});
      ok = std::fabs(value - solve[k]) <= opt.agree_rtol * scale ||
           std::fabs(value - solve[k]) < 1e-14;
    }
    if (!ok) {
      spec.reliable[k] = 0;
      spec.c[k] = 0.0;
      std::ostringstream msg;
      msg << "coefficient c_" << k << " judged unreliable (cancellation " << cancel
          << "); dropped";
      spec.warnings.push_back(msg.str());
    }
  }
  return spec;
}

inline double poisson_pmf(long long n, double lambda) {
  if (n < 0) return 0.0;
  return std::exp(-lambda + static_cast<double>(n) * std::log(lambda) -
                  std::lgamma(static_cast<double>(n) + 1.0));
}

// j-th finite difference of the Poisson pmf at n (difference in n, with
// psi(i) = 0 for i < 0).
inline double poisson_diff(long long n, int j, double lambda) {
  double acc = 0;
  for (int t = 0; t <= j; ++t) {
    if (n - t < 0) break;
    double sign = t % 2 == 0 ? 1.0 : -1.0;
    acc += sign * binomial_real(j, t) * poisson_pmf(n - t, lambda);
  }
  return acc;
}

inline double gram_charlier_pmf(long long n, const GramCharlierSpec& spec) {
  if (n < 0) throw std::invalid_argument("negative count");
  double acc = 0;
  for (int j = 0; j <= spec.order; ++j) {
    if (spec.c[j] == 0) continue;
    acc += spec.c[j] * poisson_diff(n, j, spec.lambda);
  }
  return acc;
}

}  // namespace patmom

#endif  // PATMOM_GRAM_CHARLIER_HPP
