#include "patmom/dfa.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "patmom/pattern.hpp"

using namespace patmom;

namespace {

// Every length-n text over the alphabet, recursively.
void all_texts(const Alphabet& a, int n, std::string& cur, std::vector<std::string>& out) {
  if (n == 0) {
    out.push_back(cur);
    return;
  }
  for (int i = 0; i < a.size(); ++i) {
    cur.push_back(a.symbol(i));
    all_texts(a, n - 1, cur, out);
    cur.pop_back();
  }
}

long long dfa_count(const Dfa& dfa, const std::string& text) {
  int q = dfa.start;
  long long n = 0;
  for (char c : text) {
    q = dfa.next(q, dfa.alphabet.index_of(c));
    n += dfa.is_final(q);
  }
  return n;
}

Pattern random_pattern(std::mt19937_64& rng, const Alphabet& alphabet, int min_len) {
  std::uniform_int_distribution<int> nwords(1, 3), len(min_len, 4),
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
  return parse_pattern(joined, alphabet);
}

}  // namespace

TEST(BuildDfa, SingleWordTableSizes) {
  Pattern p = parse_pattern("GCTGGT", Alphabet::dna(), iupac_codes());
  Dfa dfa = build_dfa(p, 1);
  EXPECT_EQ(dfa.num_states, 9);

  Pattern q = parse_pattern("GNTGNNGG", Alphabet::dna(), iupac_codes());
  EXPECT_EQ(q.words.size(), 64u);
  Dfa dfa2 = build_dfa(q, 1);
  EXPECT_EQ(dfa2.num_states, 28);
}

TEST(BuildDfa, TinyLanguageCheck) {
  Pattern p = parse_pattern("AB", Alphabet("AB"));
  Dfa dfa = build_dfa(p, 0);
  EXPECT_EQ(dfa.num_states, 3);
  EXPECT_TRUE(dfa.is_final(dfa.run(dfa.start, "AAB")));
  EXPECT_FALSE(dfa.is_final(dfa.run(dfa.start, "ABA")));
}

TEST(BuildDfa, RejectsShortWords) {
  Pattern p = parse_pattern("AB", Alphabet("AB"));
  EXPECT_THROW(build_dfa(p, 2), std::invalid_argument);
}

TEST(BuildDfa, LanguageMatchesNaiveCountExhaustively) {
  std::mt19937_64 rng(20240817);
  Alphabet ab("AB");
  for (int rep = 0; rep < 12; ++rep) {
    int d = rep % 2;
    Pattern p = random_pattern(rng, ab, d + 1);
    Dfa dfa = build_dfa(p, d);
    for (int n = 1; n <= 9; ++n) {
      std::vector<std::string> texts;
      std::string cur;
      all_texts(ab, n, cur, texts);
      for (const auto& t : texts)
        ASSERT_EQ(dfa_count(dfa, t), count_occurrences_naive(t, p))
            << "text " << t << " rep " << rep;
    }
  }
}

TEST(BuildDfa, CrossOracleOnRandomDnaTexts) {
  std::mt19937_64 rng(7);
  Alphabet dna = Alphabet::dna();
  Pattern p = parse_pattern("GNTGNNGG", dna, iupac_codes());
  Dfa dfa = build_dfa(p, 1);
  std::uniform_int_distribution<int> sym(0, 3), len(1, 60);
  for (int rep = 0; rep < 1000; ++rep) {
    std::string t;
    int n = len(rng);
    for (int i = 0; i < n; ++i) t.push_back(dna.symbol(sym(rng)));
    ASSERT_EQ(dfa_count(dfa, t), count_occurrences_naive(t, p));
  }
}

TEST(BuildDfa, HistoryLabelConsistency) {
  std::mt19937_64 rng(99);
  Alphabet ab("AB");
  for (int rep = 0; rep < 8; ++rep) {
    int d = 1 + rep % 2;
    Pattern p = random_pattern(rng, ab, d + 1);
    Dfa dfa = build_dfa(p, d);
    std::vector<std::string> words;
    std::string cur;
    all_texts(ab, d, cur, words);
    // delta(p, u) must carry label u for every state p and length-d word u
    for (int q = 0; q < dfa.num_states; ++q)
      for (const auto& u : words) EXPECT_EQ(dfa.d_label[dfa.run(q, u)], u);
  }
}

TEST(BuildDfa, EveryStateReachable) {
  Pattern p = parse_pattern("GCTGGNGG", Alphabet::dna(), iupac_codes());
  Dfa dfa = build_dfa(p, 1);
  std::set<int> seen{dfa.start};
  std::vector<int> stack{dfa.start};
  while (!stack.empty()) {
    int q = stack.back();
    stack.pop_back();
    for (int a = 0; a < dfa.alphabet.size(); ++a)
      if (seen.insert(dfa.next(q, a)).second) stack.push_back(dfa.next(q, a));
  }
  EXPECT_EQ(static_cast<int>(seen.size()), dfa.num_states);
}

TEST(BuildDfa, MinimizationIdempotent) {
  std::mt19937_64 rng(3);
  Alphabet ab("AB");
  for (int rep = 0; rep < 10; ++rep) {
    int d = rep % 3;
    Pattern p = random_pattern(rng, ab, d + 1);
    Dfa dfa = build_dfa(p, d);
    // feed the built automaton back through the constrained minimizer
    detail::LabeledAutomaton la;
    la.fa.num_states = dfa.num_states;
    la.fa.start = dfa.start;
    la.fa.delta = dfa.delta;
    la.fa.kind.assign(dfa.final_kind.begin(), dfa.final_kind.end());
    la.label = dfa.d_label;
    Dfa again = detail::minimize_labeled(la, ab.size(), d, ab);
    EXPECT_EQ(again.num_states, dfa.num_states) << "rep " << rep;
  }
}

TEST(DfaDump, RoundTrips) {
  Pattern p = parse_pattern("AB|BA", Alphabet("AB"));
  Dfa dfa = build_dfa(p, 1);
  std::string dump = dfa_dump(dfa);
  Dfa back = parse_dfa_dump(dump);
  EXPECT_EQ(back.num_states, dfa.num_states);
  EXPECT_EQ(back.delta, dfa.delta);
  EXPECT_EQ(back.final_kind, dfa.final_kind);
  EXPECT_EQ(back.d_label, dfa.d_label);
  EXPECT_EQ(back.order_d, dfa.order_d);
}

TEST(TwoPatternDfa, SplitsFinals) {
  Alphabet ab("AB");
  Dfa dfa = build_two_pattern_dfa(parse_pattern("AA", ab), parse_pattern("BB", ab), 0);
  bool has1 = false, has2 = false;
  for (int q = 0; q < dfa.num_states; ++q) {
    if (dfa.final_kind[q] == 1) has1 = true;
    if (dfa.final_kind[q] == 2) has2 = true;
  }
  EXPECT_TRUE(has1);
  EXPECT_TRUE(has2);
}

TEST(TwoPatternDfa, RejectsSimultaneousEndings) {
  Alphabet ab("AB");
  // every AAB occurrence ends an AB occurrence at the same position
  EXPECT_THROW(
      build_two_pattern_dfa(parse_pattern("AB", ab), parse_pattern("AAB", ab), 0),
      std::invalid_argument);
}
