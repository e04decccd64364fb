#ifndef PATMOM_EMBEDDING_HPP
#define PATMOM_EMBEDDING_HPP

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "patmom/dfa.hpp"
#include "patmom/linalg.hpp"
#include "patmom/markov_model.hpp"

namespace patmom {

// First-order chain over the automaton states reachable by at least d
// letters.  T is the transition matrix, split as T = P + Q where Q holds
// exactly the transitions entering final (counting) states.  Heterogeneous
// models get one matrix block per schedule range; transition index i runs
// from 1 to seq_len - order_d and drives position i + order_d.
struct ChainMatrices {
  SparseMatrix T, P, Q;
};

struct EmbeddedChain {
  int order_d = 0;
  long long seq_len = 0;
  std::vector<int> states;            // chain index -> DFA state id
  std::vector<double> mu;             // starting distribution at time d
  std::vector<uint8_t> final_state;   // per chain index
  std::vector<ChainMatrices> blocks;
  std::vector<std::array<long long, 2>> ranges;   // transition-index [lo,hi] per block

  int dim() const { return static_cast<int>(states.size()); }
  long long num_transitions() const { return seq_len - order_d; }
  bool homogeneous() const { return blocks.size() == 1; }

  const ChainMatrices& matrices_at(long long i) const {
    for (size_t b = 0; b < ranges.size(); ++b)
      if (i >= ranges[b][0] && i <= ranges[b][1]) return blocks[b];
    throw std::out_of_range("transition index outside the schedule");
  }
};

// Two-pattern variant with the counting transitions split by which pattern
// the target state completes.
struct TwoPatternChain {
  int order_d = 0;
  long long seq_len = 0;
  std::vector<int> states;
  std::vector<double> mu;
  SparseMatrix T, P, Q1, Q2;

  int dim() const { return static_cast<int>(states.size()); }
  long long num_transitions() const { return seq_len - order_d; }
};

namespace detail {

// Chain states: automaton states reachable by words of length >= d, i.e.
// the closure of the depth-d frontier.
inline std::vector<int> chain_states(const Dfa& dfa) {
  const int s = dfa.alphabet.size();
  std::set<int> frontier{dfa.start};
  for (int step = 0; step < dfa.order_d; ++step) {
    std::set<int> next;
    for (int q : frontier)
      for (int a = 0; a < s; ++a) next.insert(dfa.next(q, a));
    frontier = std::move(next);
  }
  std::set<int> reach = frontier;
  std::vector<int> stack(frontier.begin(), frontier.end());
  while (!stack.empty()) {
    int q = stack.back();
    stack.pop_back();
    for (int a = 0; a < s; ++a) {
      int t = dfa.next(q, a);
      if (reach.insert(t).second) stack.push_back(t);
    }
  }
  return {reach.begin(), reach.end()};
}

inline std::vector<double> starting_distribution(const Dfa& dfa, const MarkovModel& model,
                                                 const std::vector<int>& index_of,
                                                 int dim) {
  std::vector<double> mu(dim, 0.0);
  if (model.order == 0) {
    mu[index_of[dfa.start]] = 1.0;
    return mu;
  }
  const int s = dfa.alphabet.size();
  // walk all length-d words; code enumeration follows the lexicographic
  // layout of nu
  std::vector<int> word(model.order, 0);
  for (long long code = 0; code < model.context_count(); ++code) {
    long long c = code;
    for (int i = model.order - 1; i >= 0; --i) {
      word[i] = static_cast<int>(c % s);
      c /= s;
    }
    int q = dfa.start;
    for (int a : word) q = dfa.next(q, a);
    mu[index_of[q]] += model.nu[code];
  }
  return mu;
}

struct SparseBuilder {
  std::vector<int> ptr{0};
  std::vector<int> idx;
  std::vector<double> val;

  void push_row(const std::map<int, double>& entries) {
    for (auto& [c, v] : entries) {
      if (v == 0) continue;
      idx.push_back(c);
      val.push_back(v);
    }
    ptr.push_back(static_cast<int>(idx.size()));
  }

  SparseMatrix take(int n) {
    return SparseMatrix{n, std::move(ptr), std::move(idx), std::move(val)};
  }
};

inline long long label_code(const Dfa& dfa, const std::string& label) {
  long long code = 0;
  for (char c : label) code = code * dfa.alphabet.size() + dfa.alphabet.index_of(c);
  return code;
}

template <class KindOf>
inline void build_block(const Dfa& dfa, const MarkovModel& model,
                        const MarkovModel::Block& mb, const std::vector<int>& states,
                        const std::vector<int>& index_of, KindOf kind_of,
                        SparseMatrix* t_out, std::vector<SparseMatrix*> q_out,
                        SparseMatrix* p_out) {
  const int s = dfa.alphabet.size();
  const int dim = static_cast<int>(states.size());
  SparseBuilder bt, bp;
  std::vector<SparseBuilder> bq(q_out.size());
  std::map<int, double> row, prow;
  std::vector<std::map<int, double>> qrow(q_out.size());
  for (int r = 0; r < dim; ++r) {
    int q = states[r];
    long long ctx = model.order == 0 ? 0 : label_code(dfa, dfa.d_label[q]);
    row.clear();
    prow.clear();
    for (auto& m : qrow) m.clear();
    for (int a = 0; a < s; ++a) {
      int tgt = index_of[dfa.next(q, a)];
      double p = model.pi_at(mb, ctx, a);
      row[tgt] += p;
      int kind = kind_of(dfa.next(q, a));
      if (kind == 0)
        prow[tgt] += p;
      else
        qrow[kind - 1][tgt] += p;
    }
    bt.push_row(row);
    bp.push_row(prow);
    for (size_t k = 0; k < bq.size(); ++k) bq[k].push_row(qrow[k]);
  }
  *t_out = bt.take(dim);
  *p_out = bp.take(dim);
  for (size_t k = 0; k < q_out.size(); ++k) *q_out[k] = bq[k].take(dim);
}

inline void check_embed_inputs(const Dfa& dfa, const MarkovModel& model, long long ell) {
  if (dfa.order_d != model.order)
    throw std::invalid_argument("automaton order does not match model order");
  if (!(dfa.alphabet == model.alphabet))
    throw std::invalid_argument("automaton and model alphabets differ");
  if (ell <= model.order)
    throw std::invalid_argument("sequence length must exceed the model order");
}

}  // namespace detail

// Optimal embedding of the pattern problem: the automaton run over a
// model-generated sequence is a first-order chain on the trimmed state set,
// with mu(p) the nu-mass of the length-d words reaching p and
// T(p,q) the context-row transition probability summed over the symbols
// leading p to q.
inline EmbeddedChain embed(const Dfa& dfa, const MarkovModel& model, long long ell) {
  detail::check_embed_inputs(dfa, model, ell);
  EmbeddedChain ch;
  ch.order_d = model.order;
  ch.seq_len = ell;
  ch.states = detail::chain_states(dfa);

  std::vector<int> index_of(dfa.num_states, -1);
  for (size_t i = 0; i < ch.states.size(); ++i) {
    if (!dfa.labeled[ch.states[i]])
      throw std::logic_error("chain state lacks a history label");
    index_of[ch.states[i]] = static_cast<int>(i);
  }

  ch.mu = detail::starting_distribution(dfa, model, index_of, ch.dim());
  ch.final_state.resize(ch.dim());
  for (int i = 0; i < ch.dim(); ++i) ch.final_state[i] = dfa.final_kind[ch.states[i]] != 0;

  auto kind_of = [&](int q) { return dfa.final_kind[q] != 0 ? 1 : 0; };
  const long long last = ell - model.order;   // transition indexes 1..last
  long long expect = 1;
  for (const auto& mb : model.blocks) {
    long long lo = mb.lo - model.order;
    long long hi = mb.hi == std::numeric_limits<long long>::max()
                       ? last
                       : mb.hi - model.order;
    if (lo > last) break;
    if (lo != expect)
      throw std::invalid_argument("model schedule does not cover the sequence");
    hi = std::min(hi, last);
    ChainMatrices cm;
    detail::build_block(dfa, model, mb, ch.states, index_of, kind_of, &cm.T, {&cm.Q},
                        &cm.P);
    ch.blocks.push_back(std::move(cm));
    ch.ranges.push_back({lo, hi});
    expect = hi + 1;
  }
  if (expect != last + 1)
    throw std::invalid_argument("model schedule does not cover the sequence");
  return ch;
}

inline TwoPatternChain embed_two(const Dfa& dfa, const MarkovModel& model, long long ell) {
  detail::check_embed_inputs(dfa, model, ell);
  if (!model.homogeneous)
    throw std::invalid_argument("two-pattern embedding requires a homogeneous model");
  TwoPatternChain ch;
  ch.order_d = model.order;
  ch.seq_len = ell;
  ch.states = detail::chain_states(dfa);
  std::vector<int> index_of(dfa.num_states, -1);
  for (size_t i = 0; i < ch.states.size(); ++i) index_of[ch.states[i]] = static_cast<int>(i);
  ch.mu = detail::starting_distribution(dfa, model, index_of, ch.dim());
  auto kind_of = [&](int q) { return static_cast<int>(dfa.final_kind[q]); };
  detail::build_block(dfa, model, model.blocks[0], ch.states, index_of, kind_of, &ch.T,
                      {&ch.Q1, &ch.Q2}, &ch.P);
  return ch;
}

}  // namespace patmom

#endif  // PATMOM_EMBEDDING_HPP
