#ifndef PATMOM_PATTERN_HPP
#define PATMOM_PATTERN_HPP

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace patmom {

// Ordered alphabet of distinct single-character symbols, cardinality >= 2.
struct Alphabet {
  std::string symbols;

  Alphabet() = default;

  explicit Alphabet(std::string syms) : symbols(std::move(syms)) {
    if (symbols.size() < 2)
      throw std::invalid_argument("alphabet needs at least 2 symbols");
    std::string sorted = symbols;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("alphabet has duplicate symbols");
  }

  int size() const { return static_cast<int>(symbols.size()); }

  int index_of(char c) const {
    auto p = symbols.find(c);
    return p == std::string::npos ? -1 : static_cast<int>(p);
  }

  char symbol(int i) const { return symbols[static_cast<size_t>(i)]; }

  bool operator==(const Alphabet&) const = default;

  static Alphabet dna() { return Alphabet("ACGT"); }
};

// Degenerate symbol -> set of plain symbols it stands for.
using DegeneracyMap = std::map<char, std::string>;

// IUPAC nucleotide codes over ACGT (N = any letter).
inline const DegeneracyMap& iupac_codes() {
  static const DegeneracyMap codes = {
      {'R', "AG"},  {'Y', "CT"},  {'S', "CG"},  {'W', "AT"},
      {'K', "GT"},  {'M', "AC"},  {'B', "CGT"}, {'D', "AGT"},
      {'H', "ACT"}, {'V', "ACG"}, {'N', "ACGT"}};
  return codes;
}

// Finite word set over an alphabet. Words are unique and sorted.
struct Pattern {
  Alphabet alphabet;
  std::vector<std::string> words;
  int min_len = 0;
  int max_len = 0;

  bool contains(std::string_view w) const {
    return std::binary_search(words.begin(), words.end(), w);
  }
};

namespace detail {

inline constexpr size_t kMaxExpandedWords = size_t{1} << 20;

inline void expand_alternative(std::string_view alt, const Alphabet& alphabet,
                               const DegeneracyMap& codes,
                               std::set<std::string>& out) {
  if (alt.empty()) throw std::invalid_argument("pattern has an empty alternative");
  std::vector<std::string> partial{""};
  for (char c : alt) {
    std::string options;
    if (alphabet.index_of(c) >= 0) {
      options.push_back(c);
    } else if (auto it = codes.find(c); it != codes.end()) {
      options = it->second;
      if (options.empty())
        throw std::invalid_argument(std::string("degeneracy code '") + c +
                                    "' expands to nothing");
      for (char o : options)
        if (alphabet.index_of(o) < 0)
          throw std::invalid_argument(std::string("degeneracy code '") + c +
                                      "' expands outside the alphabet");
    } else {
      throw std::invalid_argument(std::string("unknown pattern character '") + c + "'");
    }
    if (partial.size() * options.size() > kMaxExpandedWords)
      throw std::invalid_argument("pattern expansion too large");
    std::vector<std::string> next;
    next.reserve(partial.size() * options.size());
    for (const auto& w : partial)
      for (char o : options) next.push_back(w + o);
    partial = std::move(next);
  }
  out.insert(partial.begin(), partial.end());
}

}  // namespace detail

// Parse a pattern specification into its finite word set.  The text is
// either a single word that may use degenerate symbols (expanded eagerly
// into the cartesian product) or a `|`-separated list of such words.
inline Pattern parse_pattern(std::string_view text, const Alphabet& alphabet,
                             const DegeneracyMap& codes = {}) {
  if (text.empty()) throw std::invalid_argument("empty pattern");
  std::set<std::string> words;
  size_t start = 0;
  while (true) {
    size_t bar = text.find('|', start);
    std::string_view alt = text.substr(
        start, bar == std::string_view::npos ? std::string_view::npos : bar - start);
    detail::expand_alternative(alt, alphabet, codes, words);
    if (bar == std::string_view::npos) break;
    start = bar + 1;
  }
  if (words.empty()) throw std::invalid_argument("pattern expands to no words");
  Pattern p;
  p.alphabet = alphabet;
  p.words.assign(words.begin(), words.end());
  p.min_len = static_cast<int>(p.words.front().size());
  p.max_len = 0;
  for (const auto& w : p.words) {
    p.min_len = std::min<int>(p.min_len, static_cast<int>(w.size()));
    p.max_len = std::max<int>(p.max_len, static_cast<int>(w.size()));
  }
  return p;
}

// Number of positions i such that some word of the pattern is a suffix of
// text[0..i].  Overlapping occurrences count; several words ending at the
// same position count once.  Reference counter used by the test oracles.
inline long long count_occurrences_naive(std::string_view text, const Pattern& pattern) {
  long long count = 0;
  for (size_t i = 1; i <= text.size(); ++i) {
    for (const auto& w : pattern.words) {
      if (w.size() <= i &&
          text.compare(i - w.size(), w.size(), w) == 0) {
        ++count;
        break;
      }
    }
  }
  return count;
}

}  // namespace patmom

#endif  // PATMOM_PATTERN_HPP
