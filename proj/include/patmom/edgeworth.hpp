#ifndef PATMOM_EDGEWORTH_HPP
#define PATMOM_EDGEWORTH_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "patmom/moments.hpp"

namespace patmom {

// Probabilists' Hermite polynomial H_k as a coefficient list (x^0..x^k),
// built by H_k = x H_{k-1} - H_{k-1}'.
inline std::vector<double> hermite(int k) {
  if (k < 0 || k > 20) throw std::invalid_argument("hermite order out of range 0..20");
  std::vector<double> h{1.0};
  for (int n = 1; n <= k; ++n) {
    std::vector<double> next(n + 1, 0.0);
    for (int i = 0; i < n; ++i) {
      next[i + 1] += h[i];                       // x * H_{n-1}
      if (i >= 1) next[i - 1] -= i * h[i];       // - H_{n-1}'
    }
    h = std::move(next);
  }
  return h;
}

inline double polyval(const std::vector<double>& coeffs, double x) {
  double acc = 0;
  for (size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
  return acc;
}

// Non-negative integer solutions of k_1 + 2 k_2 + ... + s k_s = s,
// with r = sum of the k_m per solution.
struct PartitionSet {
  int s = 0;
  std::vector<std::vector<int>> solutions;
  std::vector<int> r;
};

inline PartitionSet diophantine_partitions(int s) {
  if (s < 1 || s > 12) throw std::invalid_argument("partition order out of range 1..12");
  PartitionSet out;
  out.s = s;
  std::vector<int> k(s, 0);
  // choose multiplicities from the largest part downward
  auto rec = [&](auto&& self, int m, int remaining) -> void {
    if (m == 0) {
      if (remaining == 0) {
        out.solutions.push_back(k);
        int r = 0;
        for (int v : k) r += v;
        out.r.push_back(r);
      }
      return;
    }
    for (int c = 0; c * m <= remaining; ++c) {
      k[m - 1] = c;
      self(self, m - 1, remaining - c * m);
    }
    k[m - 1] = 0;
  };
  rec(rec, s, s);
  return out;
}

// Scaled cumulants S_k = kappa_k / sigma^(2k-2) for k = 3..order+2.
struct EdgeworthSpec {
  int order = 0;
  double sigma = 0;
  std::vector<double> scaled;   // index k holds S_k; entries below 3 unused

  double s(int k) const { return scaled[k]; }
};

inline EdgeworthSpec edgeworth_spec(const MomentSet& m, int order) {
  if (order < 0) throw std::invalid_argument("negative expansion order");
  if (order > 6) throw std::invalid_argument("expansion order capped at 6");
  if (m.order < order + 2)
    throw std::invalid_argument("expansion of order " + std::to_string(order) +
                                " needs cumulants up to " + std::to_string(order + 2));
  EdgeworthSpec spec;
  spec.order = order;
  if (m.cumulants[2] <= 0) throw std::domain_error("degenerate distribution: zero variance");
  spec.sigma = std::sqrt(m.cumulants[2]);
  spec.scaled.assign(order + 3, 0.0);
  for (int k = 3; k <= order + 2; ++k)
    spec.scaled[k] = m.cumulants[k] / std::pow(spec.sigma, 2 * k - 2);
  return spec;
}

// Density of the standardized variable: the Gaussian density times the
// partition-indexed Hermite correction series.
inline double edgeworth_density(double x, const EdgeworthSpec& spec) {
  static const double inv_sqrt_2pi = 0.39894228040143267794;
  const double z = std::exp(-0.5 * x * x) * inv_sqrt_2pi;

  // Hermite values by the three-term recurrence, up to degree 3 * order
  const int max_deg = 3 * spec.order;
  std::vector<double> h(max_deg + 1);
  h[0] = 1.0;
  if (max_deg >= 1) h[1] = x;
  for (int n = 2; n <= max_deg; ++n) h[n] = x * h[n - 1] - (n - 1) * h[n - 2];

  double corr = 1.0;
  double sig_pow = 1.0;
  for (int s = 1; s <= spec.order; ++s) {
    sig_pow *= spec.sigma;
    PartitionSet parts = diophantine_partitions(s);
    double inner = 0;
    for (size_t p = 0; p < parts.solutions.size(); ++p) {
      double prod = 1.0;
      for (int m = 1; m <= s; ++m) {
        int km = parts.solutions[p][m - 1];
        if (km == 0) continue;
        prod /= factorial_real(km);
        prod *= std::pow(spec.s(m + 2) / factorial_real(m + 2), km);
      }
      inner += h[s + 2 * parts.r[p]] * prod;
    }
    corr += sig_pow * inner;
  }
  return z * corr;
}

// Pointwise pmf approximation: the density of the standardized count
// evaluated at the standardized lattice point, divided by sigma.  No
// continuity correction is applied.
inline double edgeworth_pmf(long long n, const MomentSet& m, int order) {
  EdgeworthSpec spec = edgeworth_spec(m, order);
  double z = (static_cast<double>(n) - m.cumulants[1]) / spec.sigma;
  return edgeworth_density(z, spec) / spec.sigma;
}

}  // namespace patmom

#endif  // PATMOM_EDGEWORTH_HPP
