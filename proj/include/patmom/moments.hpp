#ifndef PATMOM_MOMENTS_HPP
#define PATMOM_MOMENTS_HPP

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "patmom/combinatorics.hpp"
#include "patmom/embedding.hpp"
#include "patmom/linalg.hpp"
#include "patmom/truncated_poly.hpp"

namespace patmom {

// ---------------------------------------------------------------------------
// Factorial moment terms.  g_k is the degree-k coefficient of
//   g(y) = mu * prod_i (T_i + y Q_i) * ones
// so that E[N!/(N-k)!] = k! g_k.
// ---------------------------------------------------------------------------

namespace detail {

// y += T v + Q w in one sweep of T's rows, using the final-column mask
// (Q rows are the final-column part of T rows).
inline void fused_t_q_mul(const SparseMatrix& t, const std::vector<uint8_t>& final_col,
                          const double* v, const double* w, double* y) {
  for (int r = 0; r < t.n; ++r) {
    double acc = 0;
    for (int k = t.ptr[r]; k < t.ptr[r + 1]; ++k) {
      int c = t.idx[k];
      acc += t.val[k] * (v[c] + (final_col[c] ? w[c] : 0.0));
    }
    y[r] = acc;
  }
}

}  // namespace detail

// Backward recursion over the whole sequence; handles heterogeneous models.
// Time O(len * k * s * L), workspace O(k * L).
inline std::vector<double> factorial_terms_full(const EmbeddedChain& ch, int k) {
  if (k < 0) throw std::invalid_argument("negative moment order");
  const int dim = ch.dim();
  const long long n = ch.num_transitions();

  // tail[j]: degree-j coefficient of the remaining product applied to ones
  std::vector<std::vector<double>> tail(k + 1, std::vector<double>(dim, 0.0));
  tail[0].assign(dim, 1.0);
  if (k >= 1) {
    std::vector<double> ones(dim, 1.0);
    ch.matrices_at(n).Q.mul_vec(ones.data(), tail[1].data());
  }

  std::vector<double> scratch(dim);
  for (long long i = n - 1; i >= 1; --i) {
    const ChainMatrices& m = ch.matrices_at(i);
    for (int j = k; j >= 1; --j) {
      detail::fused_t_q_mul(m.T, ch.final_state, tail[j].data(), tail[j - 1].data(),
                            scratch.data());
      tail[j].swap(scratch);
    }
  }

  std::vector<double> g(k + 1);
  for (int j = 0; j <= k; ++j) g[j] = dot(ch.mu, tail[j]);
  return g;
}

// Truncated power of (T + yQ) by binary decomposition of the exponent.
// Homogeneous models only.  Time O(k^2 L^3 log len).
inline std::vector<double> factorial_terms_power(const EmbeddedChain& ch, int k) {
  if (!ch.homogeneous())
    throw std::invalid_argument("power requires homogeneous model");
  if (k < 0) throw std::invalid_argument("negative moment order");
  const int dim = ch.dim();
  const auto& m = ch.blocks[0];
  TruncatedPolyMatrix base = TruncatedPolyMatrix::linear(m.T, m.Q, k);
  TruncatedPolyMatrix pw = truncated_matpow(std::move(base), ch.num_transitions(), k);

  std::vector<double> g(k + 1, 0.0);
  for (int j = 0; j <= k; ++j) {
    double acc = 0;
    for (int r = 0; r < dim; ++r) {
      double rowsum = 0;
      for (int c = 0; c < dim; ++c) rowsum += pw.deg[j][static_cast<size_t>(r) * dim + c];
      acc += ch.mu[r] * rowsum;
    }
    g[j] = acc;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Partial recursion: finite differences of the forward coefficient vectors
// converge geometrically, so the recursion can stop at a pivot index and
// extrapolate to the full length with binomial weights.
// ---------------------------------------------------------------------------

enum class UpdateRule { Difference, Matrix, Combined };

inline const char* to_string(UpdateRule r) {
  switch (r) {
    case UpdateRule::Difference: return "diff";
    case UpdateRule::Matrix: return "matrix";
    default: return "combined";
  }
}

struct PartialTable {
  int max_order = 0;    // highest moment order k
  int max_diff = 0;     // highest difference order j (max_order + 1)
  long long alpha = 0;  // pivot index the table is evaluated at
  int dim = 0;
  // diff[k][j]: the j-th finite difference of the order-k vector at alpha
  std::vector<std::vector<std::vector<double>>> diff;
  // decay[k][i] = inf-norm of the (k+1)-th difference at index i, i = 0..alpha
  std::vector<std::vector<double>> decay;

  // Least-squares slope of log10 decay per step over the geometric segment;
  // crude estimate of log10 of the chain's second eigenvalue magnitude.
  double decay_slope(int k) const {
    const auto& c = decay[k];
    std::vector<std::pair<double, double>> pts;
    for (size_t i = 1; i < c.size(); ++i)
      if (c[i] > 1e-13 && c[i] < 0.5 * (c[1] > 0 ? c[1] : 1.0))
        pts.emplace_back(double(i), std::log10(c[i]));
    if (pts.size() < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [x, y] : pts) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double denom = pts.size() * sxx - sx * sx;
    return denom == 0 ? 0.0 : (pts.size() * sxy - sx * sy) / denom;
  }
};

namespace detail {

// Incremental sweep of the difference table, two index slices at a time.
// Workspace O(K^2 L).
class PartialRecursion {
 public:
  PartialRecursion(const EmbeddedChain& ch, int max_order, UpdateRule rule)
      : ch_(ch),
        rule_(rule),
        max_order_(max_order),
        max_diff_(max_order + 1),
        dim_(ch.dim()) {
    if (!ch.homogeneous())
      throw std::invalid_argument("partial recursion requires homogeneous model");
    prev_ = make_slice();
    cur_ = make_slice();
    decay_.assign(max_order_ + 1, {});
    scratch_.resize(dim_);
    scratch2_.resize(dim_);
    fill_slice(0);
    record_decay();
  }

  long long position() const { return i_; }

  void advance(long long steps) {
    for (long long t = 0; t < steps; ++t) {
      prev_.swap(cur_);
      ++i_;
      fill_slice(i_);
      record_decay();
    }
  }

  double residual(int k) const { return decay_[k].back(); }

  PartialTable table() const {
    PartialTable t;
    t.max_order = max_order_;
    t.max_diff = max_diff_;
    t.alpha = i_;
    t.dim = dim_;
    t.diff = cur_;
    t.decay = decay_;
    return t;
  }

 private:
  using Slice = std::vector<std::vector<std::vector<double>>>;

  Slice make_slice() const {
    return Slice(max_order_ + 1,
                 std::vector<std::vector<double>>(max_diff_ + 1,
                                                  std::vector<double>(dim_, 0.0)));
  }

  void fill_slice(long long i) {
    const auto& m = ch_.blocks[0];
    // order 0: exact closed forms
    cur_[0][0].assign(dim_, 1.0);
    for (int j = 1; j <= max_diff_; ++j) {
      if (i <= j - 1) {
        double v = (i % 2 == 0 ? 1.0 : -1.0) * binomial_real(j - 1, static_cast<int>(i));
        cur_[0][j].assign(dim_, v);
      } else {
        cur_[0][j].assign(dim_, 0.0);
      }
    }
    // difference order 0: plain forward recursion
    for (int k = 1; k <= max_order_; ++k) {
      if (i == 0) {
        cur_[k][0].assign(dim_, 0.0);
      } else {
        fused_t_q_mul(m.T, ch_.final_state, prev_[k][0].data(), prev_[k - 1][0].data(),
                      cur_[k][0].data());
      }
    }
    // the two update rules agree in exact arithmetic; numerically the
    // smaller-norm candidate is kept when combining
    for (int k = 1; k <= max_order_; ++k) {
      for (int j = 1; j <= max_diff_; ++j) {
        if (i == 0) {
          cur_[k][j].assign(dim_, 0.0);
          continue;
        }
        switch (rule_) {
          case UpdateRule::Difference:
            diff_update(k, j, cur_[k][j]);
            break;
          case UpdateRule::Matrix:
            matrix_update(k, j, cur_[k][j]);
            break;
          case UpdateRule::Combined: {
            diff_update(k, j, scratch_);
            matrix_update(k, j, scratch2_);
            cur_[k][j] = inf_norm(scratch_) < inf_norm(scratch2_) ? scratch_ : scratch2_;
            break;
          }
        }
      }
    }
  }

  void diff_update(int k, int j, std::vector<double>& out) {
    for (int r = 0; r < dim_; ++r) out[r] = cur_[k][j - 1][r] - prev_[k][j - 1][r];
  }

  void matrix_update(int k, int j, std::vector<double>& out) {
    fused_t_q_mul(ch_.blocks[0].T, ch_.final_state, prev_[k][j].data(),
                  prev_[k - 1][j].data(), out.data());
  }

  void record_decay() {
    for (int k = 0; k <= max_order_; ++k) decay_[k].push_back(inf_norm(cur_[k][k + 1]));
  }

  const EmbeddedChain& ch_;
  UpdateRule rule_;
  int max_order_, max_diff_, dim_;
  long long i_ = 0;
  Slice prev_, cur_;
  std::vector<std::vector<double>> decay_;
  std::vector<double> scratch_, scratch2_;
};

}  // namespace detail

// Fills the difference table at a fixed pivot, recording the decay
// diagnostic along the way.  Time O(alpha * K^2 * s * L).
inline PartialTable partial_recursion_table(const EmbeddedChain& ch, int max_order,
                                            long long alpha,
                                            UpdateRule rule = UpdateRule::Combined) {
  if (alpha < 0) throw std::invalid_argument("negative pivot");
  if (alpha > ch.num_transitions())
    throw std::invalid_argument("pivot beyond the sequence length");
  detail::PartialRecursion rec(ch, max_order, rule);
  rec.advance(alpha);
  return rec.table();
}

struct PartialOptions {
  std::optional<long long> alpha;   // fixed pivot; otherwise auto-grown
  double threshold = 1e-12;         // auto mode residual target
  long long cap = 0;                // auto mode pivot cap; 0 = 10 * k * L
  UpdateRule rule = UpdateRule::Combined;
};

struct PartialResult {
  std::vector<double> g;
  long long alpha = 0;
  bool threshold_met = true;
  std::vector<double> residual;         // per order: ||D_k^{k+1}(alpha)||inf
  std::vector<double> error_estimate;   // per order: C(n - alpha, k) * residual
  PartialTable table;
};

// Extrapolates the factorial terms from the pivot: the order-k vector at
// full length is the pivot value plus binomially weighted differences.
// Auto mode starts the pivot at max(2k, 4L) and doubles it until the top
// order's residual drops below the threshold or the cap is reached.
inline PartialResult factorial_terms_partial(const EmbeddedChain& ch, int k,
                                             const PartialOptions& opt = {}) {
  if (k < 0) throw std::invalid_argument("negative moment order");
  const long long n = ch.num_transitions();
  detail::PartialRecursion rec(ch, k, opt.rule);

  long long alpha;
  if (opt.alpha) {
    alpha = *opt.alpha;
    if (alpha < 0 || alpha > n)
      throw std::invalid_argument("pivot outside 0..len-order");
    if (alpha < n && alpha < 2ll * k)
      throw std::invalid_argument("pivot must be at least twice the moment order");
    rec.advance(alpha);
  } else {
    long long cap = opt.cap > 0 ? opt.cap : std::max<long long>(10ll * k * ch.dim(), 1);
    cap = std::min(cap, n);
    long long target = std::min<long long>(std::max<long long>(2 * k, 4ll * ch.dim()), cap);
    while (true) {
      rec.advance(target - rec.position());
      if (rec.residual(k) < opt.threshold || rec.position() >= cap) break;
      target = std::min(cap, target * 2);
    }
    alpha = rec.position();
  }

  PartialResult out;
  out.table = rec.table();
  out.alpha = alpha;
  out.g.resize(k + 1);
  out.residual.resize(k + 1);
  out.error_estimate.resize(k + 1);
  const double m = static_cast<double>(n - alpha);
  std::vector<double> f(ch.dim());
  for (int order = 0; order <= k; ++order) {
    // backward-difference Newton extrapolation: the j-th difference at the
    // pivot advances m steps with weight C(m + j - 1, j)
    f = out.table.diff[order][0];
    for (int j = 1; j <= order; ++j) {
      double w = binomial_real(m + j - 1, j);
      const auto& d = out.table.diff[order][j];
      for (int r = 0; r < ch.dim(); ++r) f[r] += w * d[r];
    }
    out.g[order] = dot(ch.mu, f);
    out.residual[order] = out.table.decay[order].back();
    // first neglected Newton term, plus the extrapolated rounding floor of
    // the kept differences (each difference pass can double absolute noise)
    double tail = binomial_real(m + order, order + 1) * out.residual[order];
    double noise = binomial_real(m + order - 1, order) *
                   std::ldexp(2.3e-16, order) * inf_norm(out.table.diff[order][0]);
    out.error_estimate[order] = 2 * tail + noise;
  }
  out.threshold_met = out.residual[k] < opt.threshold || alpha == n;
  return out;
}

// ---------------------------------------------------------------------------
// Moment conversions.
// ---------------------------------------------------------------------------

// Raw moments from factorial terms: E[N^k] = sum_j S2(k,j) j! g_j.
inline std::vector<double> raw_from_factorial(const std::vector<double>& g) {
  if (g.empty() || std::fabs(g[0] - 1.0) > 1e-6)
    throw std::invalid_argument("factorial terms must start with g_0 = 1");
  const int k = static_cast<int>(g.size()) - 1;
  auto s2 = stirling2_table(k);
  std::vector<double> raw(k + 1, 0.0);
  raw[0] = 1.0;
  for (int n = 1; n <= k; ++n) {
    double fact = 1.0;
    for (int j = 1; j <= n; ++j) {
      fact *= j;
      raw[n] += s2[n][j] * fact * g[j];
    }
  }
  return raw;
}

inline std::vector<double> centered_from_raw(const std::vector<double>& raw) {
  const int k = static_cast<int>(raw.size()) - 1;
  std::vector<double> c(k + 1, 0.0);
  c[0] = 1.0;
  if (k == 0) return c;
  const double mean = raw[1];
  for (int n = 2; n <= k; ++n) {
    double acc = 0;
    for (int j = 0; j <= n; ++j)
      acc += binomial_real(n, n - j) * raw[j] * std::pow(-mean, n - j);
    c[n] = acc;
  }
  return c;
}

// Cumulants via kappa_k = m'_k - sum_{l<k} C(k-1, l-1) kappa_l m'_{k-l}.
inline std::vector<double> cumulants_from_raw(const std::vector<double>& raw) {
  const int k = static_cast<int>(raw.size()) - 1;
  std::vector<double> kap(k + 1, 0.0);
  for (int n = 1; n <= k; ++n) {
    double acc = raw[n];
    for (int l = 1; l < n; ++l)
      acc -= binomial_real(n - 1, l - 1) * kap[l] * raw[n - l];
    kap[n] = acc;
  }
  return kap;
}

struct MomentSet {
  int order = 0;
  std::vector<double> g;
  std::vector<double> raw;
  std::vector<double> centered;
  std::vector<double> cumulants;

  double mean() const {
    require(1);
    return raw[1];
  }
  double variance() const {
    require(2);
    return cumulants[2];
  }
  double stddev() const { return std::sqrt(std::max(0.0, variance())); }
  double skewness() const {
    require(3);
    check_spread();
    return cumulants[3] / std::pow(cumulants[2], 1.5);
  }
  double excess_kurtosis() const {
    require(4);
    check_spread();
    return cumulants[4] / (cumulants[2] * cumulants[2]);
  }

 private:
  void require(int k) const {
    if (order < k) throw std::logic_error("moment order " + std::to_string(k) +
                                          " not computed");
  }
  void check_spread() const {
    if (cumulants[2] <= 0) throw std::domain_error("degenerate distribution: zero variance");
  }
};

inline MomentSet moment_set_from_factorial(std::vector<double> g) {
  MomentSet m;
  m.order = static_cast<int>(g.size()) - 1;
  m.raw = raw_from_factorial(g);
  m.centered = centered_from_raw(m.raw);
  m.cumulants = cumulants_from_raw(m.raw);
  m.g = std::move(g);
  return m;
}

// Factorial terms of an explicit pmf; test and oracle helper.
inline std::vector<double> factorial_terms_from_pmf(const std::vector<double>& pmf, int k) {
  std::vector<double> g(k + 1, 0.0);
  for (size_t n = 0; n < pmf.size(); ++n)
    for (int j = 0; j <= k; ++j)
      g[j] += pmf[n] * binomial_real(static_cast<double>(n), j);
  return g;
}

// ---------------------------------------------------------------------------
// Mixed factorial terms for two patterns (homogeneous models): coefficients
// of mu (T + y1 Q1 + y2 Q2)^(len-d) ones, so that
// E[N1!/(N1-k1)! * N2!/(N2-k2)!] = k1! k2! coeff(k1, k2).
// ---------------------------------------------------------------------------

struct MixedFactorialTerms {
  int k1 = 0, k2 = 0;
  std::vector<double> coeff;   // (k1+1) x (k2+1), row-major in the first index

  double at(int a, int b) const { return coeff[static_cast<size_t>(a) * (k2 + 1) + b]; }
};

namespace detail {

struct BivarPolyMatrix {
  int dim = 0, k1 = 0, k2 = 0;
  std::vector<std::vector<double>> deg;   // deg[a*(k2+1)+b]: dim*dim

  const std::vector<double>& at(int a, int b) const { return deg[a * (k2 + 1) + b]; }
  std::vector<double>& at(int a, int b) { return deg[a * (k2 + 1) + b]; }
};

inline BivarPolyMatrix bivar_identity(int dim, int k1, int k2) {
  BivarPolyMatrix m;
  m.dim = dim;
  m.k1 = k1;
  m.k2 = k2;
  m.deg.assign((k1 + 1) * (k2 + 1), std::vector<double>(static_cast<size_t>(dim) * dim, 0.0));
  for (int i = 0; i < dim; ++i) m.at(0, 0)[static_cast<size_t>(i) * dim + i] = 1.0;
  return m;
}

inline BivarPolyMatrix bivar_mul(const BivarPolyMatrix& x, const BivarPolyMatrix& y) {
  BivarPolyMatrix c;
  c.dim = x.dim;
  c.k1 = x.k1;
  c.k2 = x.k2;
  c.deg.assign(x.deg.size(), std::vector<double>(static_cast<size_t>(x.dim) * x.dim, 0.0));
  for (int a1 = 0; a1 <= x.k1; ++a1)
    for (int b1 = 0; b1 <= x.k2; ++b1)
      for (int a2 = 0; a1 + a2 <= x.k1; ++a2)
        for (int b2 = 0; b1 + b2 <= x.k2; ++b2)
          dense_mul_acc(c.at(a1 + a2, b1 + b2), x.at(a1, b1), y.at(a2, b2), x.dim);
  return c;
}

}  // namespace detail

inline MixedFactorialTerms mixed_factorial_terms(const TwoPatternChain& ch, int k1, int k2,
                                                 int max_total = 8) {
  if (k1 < 0 || k2 < 0) throw std::invalid_argument("negative moment order");
  if (k1 + k2 > max_total)
    throw std::invalid_argument("combined order exceeds the cap of " +
                                std::to_string(max_total));
  const int dim = ch.dim();
  detail::BivarPolyMatrix base;
  base.dim = dim;
  base.k1 = k1;
  base.k2 = k2;
  base.deg.assign((k1 + 1) * (k2 + 1),
                  std::vector<double>(static_cast<size_t>(dim) * dim, 0.0));
  base.at(0, 0) = ch.T.dense();
  if (k1 >= 1) base.at(1, 0) = ch.Q1.dense();
  if (k2 >= 1) base.at(0, 1) = ch.Q2.dense();

  detail::BivarPolyMatrix acc = detail::bivar_identity(dim, k1, k2);
  long long e = ch.num_transitions();
  while (e > 0) {
    if (e & 1) acc = detail::bivar_mul(acc, base);
    e >>= 1;
    if (e) base = detail::bivar_mul(base, base);
  }

  MixedFactorialTerms out;
  out.k1 = k1;
  out.k2 = k2;
  out.coeff.assign(static_cast<size_t>(k1 + 1) * (k2 + 1), 0.0);
  for (int a = 0; a <= k1; ++a)
    for (int b = 0; b <= k2; ++b) {
      const auto& m = acc.at(a, b);
      double sum = 0;
      for (int r = 0; r < dim; ++r) {
        double rowsum = 0;
        for (int c = 0; c < dim; ++c) rowsum += m[static_cast<size_t>(r) * dim + c];
        sum += ch.mu[r] * rowsum;
      }
      out.coeff[static_cast<size_t>(a) * (k2 + 1) + b] = sum;
    }
  return out;
}

}  // namespace patmom

#endif  // PATMOM_MOMENTS_HPP
