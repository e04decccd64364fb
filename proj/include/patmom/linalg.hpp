#ifndef PATMOM_LINALG_HPP
#define PATMOM_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace patmom {

// Row-compressed sparse matrix over a square state space.
struct SparseMatrix {
  int n = 0;
  std::vector<int> ptr;      // size n+1
  std::vector<int> idx;
  std::vector<double> val;

  // y = M x
  void mul_vec(const double* x, double* y) const {
    for (int r = 0; r < n; ++r) {
      double acc = 0;
      for (int k = ptr[r]; k < ptr[r + 1]; ++k) acc += val[k] * x[idx[k]];
      y[r] = acc;
    }
  }

  // y = x M
  void vec_mul(const double* x, double* y) const {
    for (int c = 0; c < n; ++c) y[c] = 0;
    for (int r = 0; r < n; ++r) {
      double xr = x[r];
      if (xr == 0) continue;
      for (int k = ptr[r]; k < ptr[r + 1]; ++k) y[idx[k]] += xr * val[k];
    }
  }

  std::vector<double> row_sums() const {
    std::vector<double> s(n, 0.0);
    for (int r = 0; r < n; ++r)
      for (int k = ptr[r]; k < ptr[r + 1]; ++k) s[r] += val[k];
    return s;
  }

  std::vector<double> dense() const {
    std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r)
      for (int k = ptr[r]; k < ptr[r + 1]; ++k)
        m[static_cast<size_t>(r) * n + idx[k]] += val[k];
    return m;
  }
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

namespace detail {

// C += A * B for dense row-major dim x dim matrices
inline void dense_mul_acc(std::vector<double>& c, const std::vector<double>& a,
                          const std::vector<double>& b, int dim) {
  for (int i = 0; i < dim; ++i) {
    const double* arow = a.data() + static_cast<size_t>(i) * dim;
    double* crow = c.data() + static_cast<size_t>(i) * dim;
    for (int t = 0; t < dim; ++t) {
      double av = arow[t];
      if (av == 0) continue;
      const double* brow = b.data() + static_cast<size_t>(t) * dim;
      for (int j = 0; j < dim; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace detail

}  // namespace patmom

#endif  // PATMOM_LINALG_HPP
