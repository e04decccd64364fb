#ifndef PATMOM_DFA_HPP
#define PATMOM_DFA_HPP

#include <cstdint>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patmom/pattern.hpp"

namespace patmom {

// Deterministic automaton recognizing all texts that end with a pattern
// occurrence, with enough history to key order-d transition probabilities:
// every state reachable by d or more letters determines the last d letters
// read (its history label) uniquely.
//
// States are dense ids 0..num_states-1 with the start fixed at 0.
// final_kind is 0 for non-final states, 1 for final states, and 2 for
// final states of the second pattern in two-pattern builds.
struct Dfa {
  Alphabet alphabet;
  int order_d = 0;
  int num_states = 0;
  int start = 0;
  std::vector<uint8_t> final_kind;
  std::vector<int> delta;             // num_states x alphabet size, row-major
  std::vector<std::string> d_label;   // history; "" when unreachable by >= d letters
  std::vector<uint8_t> labeled;       // explicit flag (all true when d == 0)

  int next(int state, int sym) const {
    return delta[static_cast<size_t>(state) * alphabet.size() + sym];
  }

  bool is_final(int state) const { return final_kind[state] != 0; }

  // Runs the automaton over a text, returning the end state.
  int run(int state, std::string_view text) const {
    for (char c : text) {
      int a = alphabet.index_of(c);
      if (a < 0) throw std::invalid_argument("text symbol outside alphabet");
      state = next(state, a);
    }
    return state;
  }

  std::vector<int> finals() const {
    std::vector<int> f;
    for (int q = 0; q < num_states; ++q)
      if (final_kind[q]) f.push_back(q);
    return f;
  }
};

namespace detail {

struct FlatAutomaton {
  int num_states = 0;
  int start = 0;
  std::vector<int> delta;        // num_states x s
  std::vector<uint8_t> kind;     // bit 1: pattern 1 ends here, bit 2: pattern 2
};

// Aho-Corasick automaton over the word set with failure closure; accepting
// states are those whose closed output set is non-empty, so the automaton
// recognizes all texts ending with a word occurrence.
inline FlatAutomaton aho_corasick(const std::vector<std::vector<int>>& words,
                                  const std::vector<uint8_t>& word_kind, int s) {
  std::vector<std::vector<int>> child(1, std::vector<int>(s, -1));
  std::vector<uint8_t> kind(1, 0);
  for (size_t w = 0; w < words.size(); ++w) {
    int node = 0;
    for (int a : words[w]) {
      if (child[node][a] < 0) {
        child[node][a] = static_cast<int>(child.size());
        child.emplace_back(s, -1);
        kind.push_back(0);
      }
      node = child[node][a];
    }
    kind[node] |= word_kind[w];
  }

  const int n = static_cast<int>(child.size());
  FlatAutomaton ac;
  ac.num_states = n;
  ac.delta.assign(static_cast<size_t>(n) * s, 0);
  ac.kind = std::move(kind);
  std::vector<int> fail(n, 0);
  std::queue<int> bfs;
  for (int a = 0; a < s; ++a) {
    int c = child[0][a];
    if (c >= 0) {
      ac.delta[a] = c;
      fail[c] = 0;
      bfs.push(c);
    } else {
      ac.delta[a] = 0;
    }
  }
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    ac.kind[u] |= ac.kind[fail[u]];
    for (int a = 0; a < s; ++a) {
      int c = child[u][a];
      int via_fail = ac.delta[static_cast<size_t>(fail[u]) * s + a];
      if (c < 0) {
        ac.delta[static_cast<size_t>(u) * s + a] = via_fail;
      } else {
        ac.delta[static_cast<size_t>(u) * s + a] = c;
        fail[c] = via_fail;
        bfs.push(c);
      }
    }
  }
  return ac;
}

// Hopcroft partition refinement: coarsest congruence of the transition
// structure refining the given initial partition.  Class ids in `initial`
// must be dense.  Returns one dense class id per state.
inline std::vector<int> refine_partition(int n, int s, const std::vector<int>& delta,
                                         const std::vector<int>& initial,
                                         int* out_num_classes = nullptr) {
  // predecessor lists per symbol, CSR layout
  std::vector<std::vector<int>> pred_ptr(s), pred(s);
  for (int a = 0; a < s; ++a) pred_ptr[a].assign(n + 1, 0);
  for (int p = 0; p < n; ++p)
    for (int a = 0; a < s; ++a) ++pred_ptr[a][delta[static_cast<size_t>(p) * s + a] + 1];
  for (int a = 0; a < s; ++a) {
    for (int q = 0; q < n; ++q) pred_ptr[a][q + 1] += pred_ptr[a][q];
    pred[a].resize(pred_ptr[a][n]);
  }
  {
    std::vector<std::vector<int>> cursor(s);
    for (int a = 0; a < s; ++a) cursor[a] = pred_ptr[a];
    for (int p = 0; p < n; ++p)
      for (int a = 0; a < s; ++a) {
        int q = delta[static_cast<size_t>(p) * s + a];
        pred[a][cursor[a][q]++] = p;
      }
  }

  int nblocks = 0;
  for (int q = 0; q < n; ++q) nblocks = std::max(nblocks, initial[q] + 1);

  std::vector<int> elems(n), pos(n), blk(initial);
  std::vector<int> bfirst(n), bpast(n), moved(n, 0);
  {
    std::vector<int> cnt(nblocks, 0);
    for (int q = 0; q < n; ++q) ++cnt[initial[q]];
    int acc = 0;
    for (int b = 0; b < nblocks; ++b) {
      bfirst[b] = acc;
      acc += cnt[b];
      bpast[b] = bfirst[b];
    }
    for (int q = 0; q < n; ++q) {
      int b = initial[q];
      elems[bpast[b]] = q;
      pos[q] = bpast[b]++;
    }
  }

  std::vector<std::pair<int, int>> work;
  std::vector<uint8_t> inwork(static_cast<size_t>(n) * s, 0);
  for (int b = 0; b < nblocks; ++b)
    for (int a = 0; a < s; ++a) {
      work.emplace_back(b, a);
      inwork[static_cast<size_t>(b) * s + a] = 1;
    }

  std::vector<int> touched, splitter;
  while (!work.empty()) {
    auto [A, a] = work.back();
    work.pop_back();
    inwork[static_cast<size_t>(A) * s + a] = 0;

    // snapshot: the move phase below may reorder A itself
    splitter.assign(elems.begin() + bfirst[A], elems.begin() + bpast[A]);
    touched.clear();
    for (int q : splitter) {
      for (int k = pred_ptr[a][q]; k < pred_ptr[a][q + 1]; ++k) {
        int p = pred[a][k];
        int b = blk[p];
        if (moved[b] == 0) touched.push_back(b);
        int i = pos[p], j = bfirst[b] + moved[b];
        std::swap(elems[i], elems[j]);
        pos[elems[i]] = i;
        pos[elems[j]] = j;
        ++moved[b];
      }
    }

    for (int b : touched) {
      int m = moved[b];
      moved[b] = 0;
      int size = bpast[b] - bfirst[b];
      if (m == size) continue;
      int nb = nblocks++;
      if (m <= size - m) {
        bfirst[nb] = bfirst[b];
        bpast[nb] = bfirst[b] + m;
        bfirst[b] += m;
      } else {
        bfirst[nb] = bfirst[b] + m;
        bpast[nb] = bpast[b];
        bpast[b] = bfirst[b] + m;
      }
      for (int idx = bfirst[nb]; idx < bpast[nb]; ++idx) blk[elems[idx]] = nb;
      // nb is the smaller half; it always enters the worklist
      for (int c = 0; c < s; ++c) {
        work.emplace_back(nb, c);
        inwork[static_cast<size_t>(nb) * s + c] = 1;
      }
    }
  }

  if (out_num_classes) *out_num_classes = nblocks;
  return blk;
}

struct LabeledAutomaton {
  FlatAutomaton fa;
  std::vector<std::string> label;   // last-d-letters history ("" if shorter)
};

// Quotient of a flat automaton by a state-class map.
inline FlatAutomaton quotient(const FlatAutomaton& fa, int s, const std::vector<int>& cls,
                              int num_classes) {
  FlatAutomaton q;
  q.num_states = num_classes;
  q.start = cls[fa.start];
  q.delta.assign(static_cast<size_t>(num_classes) * s, -1);
  q.kind.assign(num_classes, 0);
  for (int p = 0; p < fa.num_states; ++p) {
    int c = cls[p];
    q.kind[c] = fa.kind[p];
    for (int a = 0; a < s; ++a)
      q.delta[static_cast<size_t>(c) * s + a] = cls[fa.delta[static_cast<size_t>(p) * s + a]];
  }
  return q;
}

// Product with the last-d-letters tracker, restricted to reachable pairs.
inline LabeledAutomaton history_product(const FlatAutomaton& fa, int s, int d,
                                        const Alphabet& alphabet) {
  LabeledAutomaton out;
  std::map<std::pair<int, std::string>, int> id;
  std::vector<std::pair<int, std::string>> states;
  auto intern = [&](int q, const std::string& h) {
    auto [it, fresh] = id.try_emplace({q, h}, static_cast<int>(states.size()));
    if (fresh) states.emplace_back(q, h);
    return it->second;
  };
  intern(fa.start, "");
  for (size_t i = 0; i < states.size(); ++i) {
    auto [q, h] = states[i];
    for (int a = 0; a < s; ++a) {
      std::string h2 = h + alphabet.symbol(a);
      if (static_cast<int>(h2.size()) > d) h2.erase(0, h2.size() - d);
      intern(fa.delta[static_cast<size_t>(q) * s + a], h2);
    }
  }
  const int n = static_cast<int>(states.size());
  out.fa.num_states = n;
  out.fa.start = 0;
  out.fa.delta.assign(static_cast<size_t>(n) * s, -1);
  out.fa.kind.resize(n);
  out.label.resize(n);
  for (int i = 0; i < n; ++i) {
    auto [q, h] = states[i];
    out.fa.kind[i] = fa.kind[q];
    out.label[i] = static_cast<int>(h.size()) == d ? h : std::string();
    for (int a = 0; a < s; ++a) {
      std::string h2 = h + alphabet.symbol(a);
      if (static_cast<int>(h2.size()) > d) h2.erase(0, h2.size() - d);
      out.fa.delta[static_cast<size_t>(i) * s + a] =
          id.at({fa.delta[static_cast<size_t>(q) * s + a], h2});
    }
  }
  return out;
}

// Refines by (kind, history label), then absorbs classes of short-history
// states into behaviour-identical labeled classes.  Short-history states
// have no label constraint, so such merges preserve non-ambiguity; they are
// what makes the automaton minimal (the bare start of a single-word pattern
// typically coincides with one of its labeled siblings).
inline Dfa minimize_labeled(const LabeledAutomaton& la, int s, int d,
                            const Alphabet& alphabet) {
  const int n = la.fa.num_states;
  std::vector<int> initial(n);
  {
    std::map<std::pair<int, std::string>, int> key;
    for (int q = 0; q < n; ++q) {
      auto [it, fresh] =
          key.try_emplace({la.fa.kind[q], la.label[q]}, static_cast<int>(key.size()));
      initial[q] = it->second;
    }
  }
  int nc = 0;
  std::vector<int> cls = refine_partition(n, s, la.fa.delta, initial, &nc);

  std::vector<int> rep(nc, -1);
  for (int q = 0; q < n; ++q)
    if (rep[cls[q]] < 0) rep[cls[q]] = q;

  std::vector<int> target(nc);
  for (int c = 0; c < nc; ++c) target[c] = c;
  auto find = [&](int c) {
    while (target[c] != c) c = target[c];
    return c;
  };

  std::vector<uint8_t> live(nc, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int e = 0; e < nc; ++e) {
      if (!live[e] || !la.label[rep[e]].empty()) continue;
      for (int x = 0; x < nc; ++x) {
        if (!live[x] || la.label[rep[x]].empty()) continue;
        if (la.fa.kind[rep[x]] != la.fa.kind[rep[e]]) continue;
        bool match = true;
        for (int a = 0; a < s && match; ++a) {
          int te = find(cls[la.fa.delta[static_cast<size_t>(rep[e]) * s + a]]);
          int tx = find(cls[la.fa.delta[static_cast<size_t>(rep[x]) * s + a]]);
          match = te == tx;
        }
        if (match) {
          target[e] = x;
          live[e] = 0;
          changed = true;
          break;
        }
      }
    }
  }

  // renumber live classes breadth-first from the start class
  int start_class = find(cls[la.fa.start]);
  std::vector<int> order;
  std::vector<int> newid(nc, -1);
  order.push_back(start_class);
  newid[start_class] = 0;
  for (size_t i = 0; i < order.size(); ++i) {
    int c = order[i];
    for (int a = 0; a < s; ++a) {
      int t = find(cls[la.fa.delta[static_cast<size_t>(rep[c]) * s + a]]);
      if (newid[t] < 0) {
        newid[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
    }
  }

  Dfa dfa;
  dfa.alphabet = alphabet;
  dfa.order_d = d;
  dfa.num_states = static_cast<int>(order.size());
  dfa.start = 0;
  dfa.final_kind.resize(dfa.num_states);
  dfa.delta.assign(static_cast<size_t>(dfa.num_states) * s, -1);
  dfa.d_label.resize(dfa.num_states);
  dfa.labeled.resize(dfa.num_states);
  for (int i = 0; i < dfa.num_states; ++i) {
    int c = order[i];
    int r = rep[c];
    dfa.final_kind[i] = la.fa.kind[r];
    dfa.d_label[i] = la.label[r];
    dfa.labeled[i] = d == 0 ? 1 : !la.label[r].empty();
    for (int a = 0; a < s; ++a)
      dfa.delta[static_cast<size_t>(i) * s + a] =
          newid[find(cls[la.fa.delta[static_cast<size_t>(r) * s + a]])];
  }
  return dfa;
}

inline Dfa build_dfa_impl(const std::vector<const Pattern*>& patterns, int d) {
  const Alphabet& alphabet = patterns[0]->alphabet;
  const int s = alphabet.size();
  std::vector<std::vector<int>> words;
  std::vector<uint8_t> word_kind;
  for (size_t p = 0; p < patterns.size(); ++p) {
    if (!(patterns[p]->alphabet == alphabet))
      throw std::invalid_argument("patterns use different alphabets");
    for (const auto& w : patterns[p]->words) {
      if (static_cast<int>(w.size()) <= d)
        throw std::invalid_argument("pattern word not longer than the model order");
      std::vector<int> ids;
      ids.reserve(w.size());
      for (char c : w) ids.push_back(alphabet.index_of(c));
      words.push_back(std::move(ids));
      word_kind.push_back(static_cast<uint8_t>(1u << p));
    }
  }

  FlatAutomaton ac = aho_corasick(words, word_kind, s);
  for (int q = 0; q < ac.num_states; ++q)
    if (ac.kind[q] == 3)
      throw std::invalid_argument(
          "patterns cannot share final states: some position ends both");

  // language-level minimization first keeps the history product small
  std::vector<int> initial(ac.kind.begin(), ac.kind.end());
  int nc = 0;
  std::vector<int> cls = refine_partition(ac.num_states, s, ac.delta, initial, &nc);
  FlatAutomaton min1 = quotient(ac, s, cls, nc);

  LabeledAutomaton la;
  if (d == 0) {
    la.fa = std::move(min1);
    la.label.assign(la.fa.num_states, "");
  } else {
    la = history_product(min1, s, d, alphabet);
  }
  return minimize_labeled(la, s, d, alphabet);
}

}  // namespace detail

// Builds the minimal automaton for the pattern with unambiguous d-letter
// history labels.  Pipeline: Aho-Corasick with failure closure, Hopcroft
// minimization, product with the last-d-letters tracker, and a second
// refinement pass keyed by (final?, history).
inline Dfa build_dfa(const Pattern& pattern, int d) {
  if (pattern.words.empty()) throw std::invalid_argument("empty pattern");
  if (d < 0) throw std::invalid_argument("negative order");
  return detail::build_dfa_impl({&pattern}, d);
}

// Same construction for a pair of patterns whose counts are tracked
// separately: final states carry kind 1 or 2.  States that would have to
// count both patterns at once are rejected.
inline Dfa build_two_pattern_dfa(const Pattern& first, const Pattern& second, int d) {
  if (first.words.empty() || second.words.empty())
    throw std::invalid_argument("empty pattern");
  return detail::build_dfa_impl({&first, &second}, d);
}

// One line per state: id<TAB>final?<TAB>d_label<TAB>succ_0,...,succ_{s-1},
// preceded by header comments carrying the alphabet and order.
inline std::string dfa_dump(const Dfa& dfa) {
  std::ostringstream out;
  out << "# alphabet: " << dfa.alphabet.symbols << "\n";
  out << "# order: " << dfa.order_d << "\n";
  for (int q = 0; q < dfa.num_states; ++q) {
    out << q << '\t' << int(dfa.final_kind[q]) << '\t' << dfa.d_label[q] << '\t';
    for (int a = 0; a < dfa.alphabet.size(); ++a) {
      if (a) out << ',';
      out << dfa.next(q, a);
    }
    out << '\n';
  }
  return out.str();
}

inline Dfa parse_dfa_dump(const std::string& text) {
  Dfa dfa;
  std::istringstream in(text);
  std::string line;
  bool have_alphabet = false, have_order = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string key;
      ls >> key;
      if (key == "alphabet:") {
        std::string syms;
        ls >> syms;
        dfa.alphabet = Alphabet(syms);
        have_alphabet = true;
      } else if (key == "order:") {
        ls >> dfa.order_d;
        have_order = true;
      }
      continue;
    }
    if (!have_alphabet || !have_order)
      throw std::invalid_argument("dfa dump lacks alphabet/order header");
    std::vector<std::string> fields;
    size_t from = 0;
    for (int f = 0; f < 3; ++f) {
      size_t tab = line.find('\t', from);
      if (tab == std::string::npos) throw std::invalid_argument("malformed dfa dump line");
      fields.push_back(line.substr(from, tab - from));
      from = tab + 1;
    }
    fields.push_back(line.substr(from));
    int id = std::stoi(fields[0]);
    if (id != dfa.num_states) throw std::invalid_argument("dfa dump states out of order");
    ++dfa.num_states;
    dfa.final_kind.push_back(static_cast<uint8_t>(std::stoi(fields[1])));
    dfa.d_label.push_back(fields[2]);
    dfa.labeled.push_back(dfa.order_d == 0 ? 1 : !fields[2].empty());
    std::istringstream ss(fields[3]);
    std::string tok;
    int cnt = 0;
    while (std::getline(ss, tok, ',')) {
      dfa.delta.push_back(std::stoi(tok));
      ++cnt;
    }
    if (cnt != dfa.alphabet.size())
      throw std::invalid_argument("dfa dump successor count mismatch");
  }
  for (int t : dfa.delta)
    if (t < 0 || t >= dfa.num_states) throw std::invalid_argument("dfa dump successor out of range");
  return dfa;
}

}  // namespace patmom

#endif  // PATMOM_DFA_HPP
