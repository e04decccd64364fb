#ifndef PATMOM_COMBINATORICS_HPP
#define PATMOM_COMBINATORICS_HPP

#include <stdexcept>
#include <vector>

namespace patmom {

// C(n, j) for possibly huge real n, evaluated as a product so that
// sequence lengths up to 1e9 stay inside double range for j <= 16.
inline double binomial_real(double n, int j) {
  if (j < 0) return 0.0;
  double r = 1.0;
  for (int t = 1; t <= j; ++t) r *= (n - j + t) / t;
  return r;
}

inline double factorial_real(int k) {
  double r = 1.0;
  for (int t = 2; t <= k; ++t) r *= t;
  return r;
}

// Stirling numbers of the second kind, S(n, k) for 0 <= n, k <= kmax.
inline std::vector<std::vector<double>> stirling2_table(int kmax) {
  if (kmax < 0 || kmax > 16)
    throw std::invalid_argument("stirling table capped at order 16");
  std::vector<std::vector<double>> s(kmax + 1, std::vector<double>(kmax + 1, 0.0));
  s[0][0] = 1.0;
  for (int n = 1; n <= kmax; ++n)
    for (int k = 1; k <= n; ++k) s[n][k] = k * s[n - 1][k] + s[n - 1][k - 1];
  return s;
}

}  // namespace patmom

#endif  // PATMOM_COMBINATORICS_HPP
