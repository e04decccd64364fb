#ifndef PATMOM_ORACLE_HPP
#define PATMOM_ORACLE_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "patmom/dfa.hpp"
#include "patmom/embedding.hpp"
#include "patmom/markov_model.hpp"
#include "patmom/moments.hpp"
#include "patmom/pattern.hpp"

namespace patmom {

inline constexpr const char* kMonteCarloRng = "mt19937_64";

struct ExactPmf {
  std::vector<double> p;   // p[n] for n = 0..n_max

  int n_max() const { return static_cast<int>(p.size()) - 1; }

  double total() const {
    double s = 0;
    for (double v : p) s += v;
    return s;
  }

  double mean() const {
    double m = 0;
    for (size_t n = 0; n < p.size(); ++n) m += static_cast<double>(n) * p[n];
    return m;
  }
};

struct BruteForceResult {
  std::vector<double> g;   // factorial terms 0..k
  ExactPmf pmf;
};

namespace detail {

inline const MarkovModel::Block& model_block_at(const MarkovModel& model, long long pos) {
  for (const auto& b : model.blocks)
    if (pos >= b.lo && pos <= b.hi) return b;
  throw std::invalid_argument("model schedule does not cover position " +
                              std::to_string(pos));
}

}  // namespace detail

// Exhaustive enumeration of all texts, weighted by the model.  Counts come
// from the naive suffix scan, so this path shares nothing with the
// embedding machinery.
inline BruteForceResult brute_force_moments(const MarkovModel& model,
                                            const Pattern& pattern, int ell, int k) {
  if (!(pattern.alphabet == model.alphabet))
    throw std::invalid_argument("pattern and model alphabets differ");
  const int s = model.alphabet.size();
  const int d = model.order;
  if (ell <= d) throw std::invalid_argument("sequence length must exceed the model order");
  double texts = std::pow(static_cast<double>(s), ell);
  if (texts > double(1 << 24)) throw std::invalid_argument("instance too large to enumerate");

  std::vector<const MarkovModel::Block*> block_of(ell + 1, nullptr);
  for (int pos = d + 1; pos <= ell; ++pos)
    block_of[pos] = &detail::model_block_at(model, pos);

  BruteForceResult out;
  out.g.assign(k + 1, 0.0);
  out.pmf.p.assign(ell + 1, 0.0);

  std::vector<int> text(ell, 0);
  std::string chars(ell, model.alphabet.symbol(0));
  while (true) {
    // model probability of this text
    double prob;
    if (d == 0) {
      prob = 1.0;
    } else {
      long long code = 0;
      for (int i = 0; i < d; ++i) code = code * s + text[i];
      prob = model.nu[code];
    }
    long long ctx = 0;
    for (int i = 0; i < d; ++i) ctx = ctx * s + text[i];
    const long long ctx_mod = model.context_count() / (d > 0 ? s : 1);
    for (int pos = d + 1; pos <= ell && prob > 0; ++pos) {
      prob *= model.pi_at(*block_of[pos], ctx, text[pos - 1]);
      if (d > 0) ctx = (ctx % ctx_mod) * s + text[pos - 1];
    }
    if (prob > 0) {
      long long n = count_occurrences_naive(chars, pattern);
      out.pmf.p[n] += prob;
      for (int j = 0; j <= k; ++j)
        out.g[j] += prob * binomial_real(static_cast<double>(n), j);
    }
    // odometer step
    int i = ell - 1;
    while (i >= 0 && text[i] == s - 1) {
      text[i] = 0;
      chars[i] = model.alphabet.symbol(0);
      --i;
    }
    if (i < 0) break;
    ++text[i];
    chars[i] = model.alphabet.symbol(text[i]);
  }
  while (out.pmf.p.size() > 1 && out.pmf.p.back() == 0) out.pmf.p.pop_back();
  return out;
}

// Exact distribution of the count by dynamic programming over
// (occurrences so far, chain state): v_n <- v_n P + v_{n-1} Q per position.
// n_cap = 0 sizes the cap from the chain's first two moments.
inline ExactPmf exact_pmf_dp(const EmbeddedChain& ch, long long n_cap = 0) {
  if (n_cap <= 0) {
    auto m = moment_set_from_factorial(factorial_terms_full(ch, 2));
    n_cap = static_cast<long long>(std::ceil(m.mean() + 20 * m.stddev())) + 50;
  }
  n_cap = std::min(n_cap, ch.num_transitions());
  const int dim = ch.dim();
  std::vector<std::vector<double>> v(n_cap + 1, std::vector<double>(dim, 0.0));
  v[0] = ch.mu;
  long long reached = 0;   // highest occupied count so far
  std::vector<double> pv(dim), qv(dim);
  for (long long i = 1; i <= ch.num_transitions(); ++i) {
    const ChainMatrices& m = ch.matrices_at(i);
    long long top = std::min(reached + 1, n_cap);
    for (long long n = top; n >= 0; --n) {
      m.P.vec_mul(v[n].data(), pv.data());
      if (n > 0) {
        m.Q.vec_mul(v[n - 1].data(), qv.data());
        for (int r = 0; r < dim; ++r) pv[r] += qv[r];
      }
      v[n].swap(pv);
    }
    reached = top;
  }
  ExactPmf pmf;
  pmf.p.resize(n_cap + 1);
  double total = 0;
  for (long long n = 0; n <= n_cap; ++n) {
    double sum = 0;
    for (double x : v[n]) sum += x;
    pmf.p[n] = sum;
    total += sum;
  }
  if (1.0 - total > 1e-12)
    throw std::runtime_error("probability mass above the count cap; raise n_cap");
  return pmf;
}

struct McMoments {
  long long reps = 0;
  std::uint64_t seed = 0;
  double mean = 0, variance = 0, skewness = 0, ekurtosis = 0;
  double se_mean = 0, se_variance = 0, se_skewness = 0, se_ekurtosis = 0;
};

// Samples texts from the model and counts occurrences with the automaton.
// Uniform variates come from explicit 53-bit conversion so streams are
// identical across platforms for a fixed seed.
inline McMoments monte_carlo(const MarkovModel& model, const Pattern& pattern,
                             long long ell, long long reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("need at least one repetition");
  if (!(pattern.alphabet == model.alphabet))
    throw std::invalid_argument("pattern and model alphabets differ");
  const int s = model.alphabet.size();
  const int d = model.order;
  if (ell <= d) throw std::invalid_argument("sequence length must exceed the model order");
  Dfa dfa = build_dfa(pattern, d);

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return (rng() >> 11) * 0x1.0p-53; };
  auto sample_row = [&](const double* row, int n) {
    double u = uniform();
    double acc = 0;
    for (int i = 0; i < n - 1; ++i) {
      acc += row[i];
      if (u < acc) return i;
    }
    return n - 1;
  };

  std::vector<const MarkovModel::Block*> segs;   // block per position d+1..ell
  std::vector<long long> seg_end;
  {
    long long pos = d + 1;
    while (pos <= ell) {
      const auto& b = detail::model_block_at(model, pos);
      segs.push_back(&b);
      seg_end.push_back(std::min(b.hi, ell));
      pos = seg_end.back() + 1;
    }
  }

  // cumulative rows per block for branch-free categorical draws
  std::vector<std::vector<double>> cum(segs.size());
  for (size_t b = 0; b < segs.size(); ++b) {
    const auto& pi = segs[b]->pi;
    cum[b].resize(pi.size());
    for (size_t r = 0; r < pi.size() / s; ++r) {
      double acc = 0;
      for (int c = 0; c < s; ++c) {
        acc += pi[r * s + c];
        cum[b][r * s + c] = acc;
      }
    }
  }

  const long long ctx_count = model.context_count();
  // the state's history label is exactly the transition context, so the
  // per-step context bookkeeping reduces to a table lookup
  std::vector<long long> state_ctx(dfa.num_states, 0);
  if (d > 0)
    for (int q = 0; q < dfa.num_states; ++q)
      if (dfa.labeled[q]) {
        long long code = 0;
        for (char c : dfa.d_label[q]) code = code * s + model.alphabet.index_of(c);
        state_ctx[q] = code;
      }

  std::vector<double> counts(reps);
  std::vector<int> first(d);
  for (long long rep = 0; rep < reps; ++rep) {
    long long ctx = sample_row(model.nu.data(), static_cast<int>(ctx_count));
    int state = dfa.start;
    if (d > 0) {
      // feed the sampled context through the automaton, most significant first
      long long c = ctx;
      for (int i = d - 1; i >= 0; --i) {
        first[i] = static_cast<int>(c % s);
        c /= s;
      }
      for (int a : first) state = dfa.next(state, a);
    }
    long long n = 0;
    size_t seg = 0;
    for (long long pos = d + 1; pos <= ell; ++pos) {
      if (pos > seg_end[seg]) ++seg;
      const double* row = cum[seg].data() + static_cast<size_t>(state_ctx[state]) * s;
      double u = uniform();
      int a = 0;
      for (int i = 0; i < s - 1; ++i) a += u >= row[i];
      state = dfa.next(state, a);
      n += dfa.is_final(state);
    }
    counts[rep] = static_cast<double>(n);
  }

  McMoments out;
  out.reps = reps;
  out.seed = seed;
  double mean = 0;
  for (double c : counts) mean += c;
  mean /= reps;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double c : counts) {
    double e = c - mean;
    m2 += e * e;
    m3 += e * e * e;
    m4 += e * e * e * e;
  }
  m2 /= reps;
  m3 /= reps;
  m4 /= reps;
  out.mean = mean;
  out.variance = m2 * reps / std::max<long long>(reps - 1, 1);
  out.skewness = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
  out.ekurtosis = m2 > 0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  out.se_mean = std::sqrt(m2 / reps);
  out.se_variance = std::sqrt(std::max(0.0, m4 - m2 * m2) / reps);
  // normal-theory approximations for the shape statistics
  out.se_skewness = std::sqrt(6.0 / reps);
  out.se_ekurtosis = std::sqrt(24.0 / reps);
  return out;
}

}  // namespace patmom

#endif  // PATMOM_ORACLE_HPP
