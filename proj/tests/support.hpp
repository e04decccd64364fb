// Shared helpers for the test suites: exhaustive text enumeration and
// reproducible random instances.
#ifndef PATMOM_TESTS_SUPPORT_HPP
#define PATMOM_TESTS_SUPPORT_HPP

#include <random>
#include <set>
#include <string>
#include <vector>

#include "patmom/markov_model.hpp"
#include "patmom/pattern.hpp"

namespace patmom_tests {

inline void all_texts_rec(const patmom::Alphabet& a, int n, std::string& cur,
                          std::vector<std::string>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (int i = 0; i < a.size(); ++i) {
    cur.push_back(a.symbol(i));
    all_texts_rec(a, n - 1, cur, out);
    cur.pop_back();
  }
}

inline std::vector<std::string> all_texts(const patmom::Alphabet& a, int n) {
  std::vector<std::string> out;
  std::string cur;
  all_texts_rec(a, n, cur, out);
  return out;
}

inline patmom::Pattern random_pattern(std::mt19937_64& rng, const patmom::Alphabet& alphabet,
                                      int min_len, int max_len = 4, int max_words = 3) {
  std::uniform_int_distribution<int> nwords(1, max_words), len(min_len, max_len),
      sym(0, alphabet.size() - 1);
  std::set<std::string> words;
  int n = nwords(rng);
  while (static_cast<int>(words.size()) < n) {
    std::string w;
    int l = len(rng);
    for (int i = 0; i < l; ++i) w.push_back(alphabet.symbol(sym(rng)));
    words.insert(w);
  }
  std::string joined;
  for (const auto& w : words) {
    if (!joined.empty()) joined.push_back('|');
    joined += w;
  }
  return patmom::parse_pattern(joined, alphabet);
}

inline std::vector<double> random_stochastic_rows(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::vector<double> m(static_cast<size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    double sum = 0;
    for (int c = 0; c < cols; ++c) {
      m[static_cast<size_t>(r) * cols + c] = u(rng);
      sum += m[static_cast<size_t>(r) * cols + c];
    }
    for (int c = 0; c < cols; ++c) m[static_cast<size_t>(r) * cols + c] /= sum;
  }
  return m;
}

inline patmom::MarkovModel random_model(std::mt19937_64& rng, const patmom::Alphabet& alphabet,
                                        int order) {
  long long ctx = 1;
  for (int i = 0; i < order; ++i) ctx *= alphabet.size();
  std::vector<double> nu = random_stochastic_rows(rng, 1, static_cast<int>(ctx));
  std::vector<double> pi =
      random_stochastic_rows(rng, static_cast<int>(ctx), alphabet.size());
  return patmom::make_homogeneous(alphabet, order, std::move(nu), std::move(pi));
}

// Model probability of a concrete text (any schedule).
inline double text_prob(const patmom::MarkovModel& model, const std::string& text) {
  const int s = model.alphabet.size();
  const int d = model.order;
  double prob = 1.0;
  long long ctx = 0;
  for (int i = 0; i < d; ++i) ctx = ctx * s + model.alphabet.index_of(text[i]);
  if (d > 0) prob = model.nu[ctx];
  long long ctx_mod = 1;
  for (int i = 0; i < d - 1; ++i) ctx_mod *= s;
  for (size_t pos = d + 1; pos <= text.size(); ++pos) {
    const patmom::MarkovModel::Block* blk = nullptr;
    for (const auto& b : model.blocks)
      if (static_cast<long long>(pos) >= b.lo && static_cast<long long>(pos) <= b.hi) {
        blk = &b;
        break;
      }
    int a = model.alphabet.index_of(text[pos - 1]);
    prob *= model.pi_at(*blk, ctx, a);
    if (d > 0) ctx = (ctx % ctx_mod) * s + a;
  }
  return prob;
}

}  // namespace patmom_tests

#endif  // PATMOM_TESTS_SUPPORT_HPP
