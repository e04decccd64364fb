#ifndef PATMOM_TRUNCATED_POLY_HPP
#define PATMOM_TRUNCATED_POLY_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "patmom/linalg.hpp"

namespace patmom {

// Polynomial in one variable kept to a fixed degree cap; arithmetic drops
// every term above the cap.
class TruncatedPoly {
 public:
  explicit TruncatedPoly(int max_degree) : c_(static_cast<size_t>(max_degree) + 1, 0.0) {
    if (max_degree < 0) throw std::invalid_argument("negative degree cap");
  }

  static TruncatedPoly constant(double v, int max_degree) {
    TruncatedPoly p(max_degree);
    p.c_[0] = v;
    return p;
  }

  int max_degree() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int d) const { return c_[d]; }
  double& operator[](int d) { return c_[d]; }

  TruncatedPoly& operator+=(const TruncatedPoly& o) {
    if (o.c_.size() != c_.size()) throw std::invalid_argument("degree cap mismatch");
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }

  friend TruncatedPoly operator+(TruncatedPoly a, const TruncatedPoly& b) { return a += b; }

  friend TruncatedPoly operator*(const TruncatedPoly& a, const TruncatedPoly& b) {
    if (a.c_.size() != b.c_.size()) throw std::invalid_argument("degree cap mismatch");
    TruncatedPoly r(a.max_degree());
    for (int i = 0; i <= a.max_degree(); ++i) {
      if (a.c_[i] == 0) continue;
      for (int j = 0; i + j <= a.max_degree(); ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return r;
  }

  double eval(double y) const {
    double acc = 0;
    for (int d = max_degree(); d >= 0; --d) acc = acc * y + c_[d];
    return acc;
  }

 private:
  std::vector<double> c_;
};

// Square matrix of truncated polynomials, stored per degree as dense
// row-major matrices.
struct TruncatedPolyMatrix {
  int dim = 0;
  int max_degree = 0;
  std::vector<std::vector<double>> deg;   // deg[c]: dim*dim

  static TruncatedPolyMatrix identity(int dim, int max_degree) {
    TruncatedPolyMatrix m;
    m.dim = dim;
    m.max_degree = max_degree;
    m.deg.assign(max_degree + 1, std::vector<double>(static_cast<size_t>(dim) * dim, 0.0));
    for (int i = 0; i < dim; ++i) m.deg[0][static_cast<size_t>(i) * dim + i] = 1.0;
    return m;
  }

  // degree-0 part A, degree-1 part B (A + yB)
  static TruncatedPolyMatrix linear(const SparseMatrix& a, const SparseMatrix& b,
                                    int max_degree) {
    TruncatedPolyMatrix m;
    m.dim = a.n;
    m.max_degree = max_degree;
    m.deg.assign(max_degree + 1,
                 std::vector<double>(static_cast<size_t>(a.n) * a.n, 0.0));
    m.deg[0] = a.dense();
    if (max_degree >= 1) m.deg[1] = b.dense();
    return m;
  }

  TruncatedPoly entry(int r, int c) const {
    TruncatedPoly p(max_degree);
    for (int d = 0; d <= max_degree; ++d) p[d] = deg[d][static_cast<size_t>(r) * dim + c];
    return p;
  }

  std::vector<double> eval(double y) const {
    std::vector<double> m(static_cast<size_t>(dim) * dim, 0.0);
    double yc = 1.0;
    for (int d = 0; d <= max_degree; ++d) {
      for (size_t i = 0; i < m.size(); ++i) m[i] += yc * deg[d][i];
      yc *= y;
    }
    return m;
  }
};

// Entry-wise truncated product: degree-c coefficient of (p,q) is the sum of
// A_a(p,r) B_b(r,q) over a + b = c, a,b <= cap.
inline TruncatedPolyMatrix truncated_matmul(const TruncatedPolyMatrix& a,
                                            const TruncatedPolyMatrix& b, int max_degree) {
  if (a.dim != b.dim) throw std::invalid_argument("dimension mismatch");
  TruncatedPolyMatrix c;
  c.dim = a.dim;
  c.max_degree = max_degree;
  c.deg.assign(max_degree + 1,
               std::vector<double>(static_cast<size_t>(a.dim) * a.dim, 0.0));
  for (int total = 0; total <= max_degree; ++total)
    for (int i = 0; i <= total; ++i) {
      if (i > a.max_degree || total - i > b.max_degree) continue;
      detail::dense_mul_acc(c.deg[total], a.deg[i], b.deg[total - i], a.dim);
    }
  return c;
}

inline TruncatedPolyMatrix truncated_matpow(TruncatedPolyMatrix base, long long e,
                                            int max_degree) {
  if (e < 0) throw std::invalid_argument("negative exponent");
  TruncatedPolyMatrix acc = TruncatedPolyMatrix::identity(base.dim, max_degree);
  while (e > 0) {
    if (e & 1) acc = truncated_matmul(acc, base, max_degree);
    e >>= 1;
    if (e) base = truncated_matmul(base, base, max_degree);
  }
  return acc;
}

}  // namespace patmom

#endif  // PATMOM_TRUNCATED_POLY_HPP
