#ifndef PATMOM_MARKOV_MODEL_HPP
#define PATMOM_MARKOV_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "patmom/pattern.hpp"

namespace patmom {

// Order-d Markov source: starting distribution over length-d contexts and
// one transition matrix (homogeneous) or a per-position schedule of them.
// Matrix rows are s^d contexts in lexicographic alphabet order, columns the
// s next symbols.  Rows are renormalized on ingestion; deviations beyond
// 1e-3 are kept as warnings.
struct MarkovModel {
  struct Block {
    long long lo = 0;              // first sequence position this matrix drives
    long long hi = 0;              // last position; max() when open-ended
    std::vector<double> pi;        // s^d x s row-major
  };

  Alphabet alphabet;
  int order = 0;
  std::vector<double> nu;          // size s^d; {1} when order == 0
  std::vector<Block> blocks;
  bool homogeneous = true;
  std::vector<std::string> warnings;

  long long context_count() const {
    long long c = 1;
    for (int i = 0; i < order; ++i) c *= alphabet.size();
    return c;
  }

  double pi_at(const Block& b, long long ctx, int sym) const {
    return b.pi[static_cast<size_t>(ctx) * alphabet.size() + sym];
  }
};

namespace detail {

inline constexpr double kRenormWarnTol = 1e-3;

inline void normalize_row(double* row, int n, const std::string& what,
                          std::vector<std::string>& warnings) {
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    if (row[i] < 0) throw std::invalid_argument(what + " has a negative probability");
    sum += row[i];
  }
  if (sum <= 0) throw std::invalid_argument(what + " sums to zero");
  if (std::fabs(sum - 1.0) > kRenormWarnTol) {
    std::ostringstream msg;
    msg << what << " sums to " << sum << "; renormalized";
    warnings.push_back(msg.str());
  }
  for (int i = 0; i < n; ++i) row[i] /= sum;
}

inline long long context_code(const Alphabet& alphabet, std::string_view ctx) {
  long long code = 0;
  for (char c : ctx) {
    int a = alphabet.index_of(c);
    if (a < 0) throw std::invalid_argument("context label outside alphabet");
    code = code * alphabet.size() + a;
  }
  return code;
}

}  // namespace detail

inline MarkovModel make_homogeneous(const Alphabet& alphabet, int order,
                                    std::vector<double> nu, std::vector<double> pi) {
  MarkovModel m;
  m.alphabet = alphabet;
  m.order = order;
  const long long ctx = m.context_count();
  if (order == 0) {
    if (nu.empty()) nu = {1.0};
  }
  if (static_cast<long long>(nu.size()) != ctx)
    throw std::invalid_argument("starting distribution has wrong size");
  if (static_cast<long long>(pi.size()) != ctx * alphabet.size())
    throw std::invalid_argument("transition matrix has wrong size");
  detail::normalize_row(nu.data(), static_cast<int>(nu.size()), "starting distribution",
                        m.warnings);
  for (long long r = 0; r < ctx; ++r)
    detail::normalize_row(pi.data() + r * alphabet.size(), alphabet.size(),
                          "pi row " + std::to_string(r), m.warnings);
  m.nu = std::move(nu);
  m.blocks.push_back({order + 1, std::numeric_limits<long long>::max(), std::move(pi)});
  m.homogeneous = true;
  return m;
}

inline MarkovModel make_iid(const Alphabet& alphabet, std::vector<double> probs) {
  std::vector<double> pi = probs;
  return make_homogeneous(alphabet, 0, {1.0}, std::move(pi));
}

inline MarkovModel make_heterogeneous(
    const Alphabet& alphabet, int order, std::vector<double> nu,
    std::vector<std::pair<std::pair<long long, long long>, std::vector<double>>> schedule) {
  if (schedule.empty()) throw std::invalid_argument("empty schedule");
  MarkovModel m;
  m.alphabet = alphabet;
  m.order = order;
  const long long ctx = m.context_count();
  if (order == 0 && nu.empty()) nu = {1.0};
  if (static_cast<long long>(nu.size()) != ctx)
    throw std::invalid_argument("starting distribution has wrong size");
  detail::normalize_row(nu.data(), static_cast<int>(nu.size()), "starting distribution",
                        m.warnings);
  m.nu = std::move(nu);
  long long expect = order + 1;
  for (auto& [range, pi] : schedule) {
    auto [lo, hi] = range;
    if (lo != expect)
      throw std::invalid_argument("schedule has a coverage gap at position " +
                                  std::to_string(expect));
    if (hi < lo) throw std::invalid_argument("schedule range ends before it starts");
    if (static_cast<long long>(pi.size()) != ctx * alphabet.size())
      throw std::invalid_argument("transition matrix has wrong size");
    for (long long r = 0; r < ctx; ++r)
      detail::normalize_row(pi.data() + r * alphabet.size(), alphabet.size(),
                            "pi[" + std::to_string(lo) + ".." + std::to_string(hi) +
                                "] row " + std::to_string(r),
                            m.warnings);
    m.blocks.push_back({lo, hi, std::move(pi)});
    expect = hi + 1;
  }
  m.homogeneous = false;
  return m;
}

// Text format:
//   alphabet: ACGT
//   order: 1
//   nu:                # one "LABEL prob" line per context; optional if order 0
//   A 1
//   ...
//   pi:                # s^d rows of s floats; or repeated pi[lo..hi]: blocks
//   0.30 0.21 0.22 0.27
//   ...
// '#' starts a comment.  Missing nu labels default to probability 0.
inline MarkovModel parse_model(std::istream& in) {
  Alphabet alphabet;
  bool have_alphabet = false;
  int order = -1;
  std::vector<std::pair<std::string, double>> nu_entries;
  struct RawBlock {
    long long lo, hi;
    std::vector<double> pi;
    bool ranged;
  };
  std::vector<RawBlock> raw;
  enum class Section { None, Nu, Pi } section = Section::None;

  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;

    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument("model line " + std::to_string(lineno) + ": " + msg);
    };

    if (tok == "alphabet:") {
      std::string syms;
      if (!(ls >> syms)) fail("missing alphabet symbols");
      alphabet = Alphabet(syms);
      have_alphabet = true;
      section = Section::None;
    } else if (tok == "order:") {
      if (!(ls >> order) || order < 0) fail("bad order");
      section = Section::None;
    } else if (tok == "nu:") {
      section = Section::Nu;
    } else if (tok == "pi:" || (tok.rfind("pi[", 0) == 0 && tok.back() == ':')) {
      if (!have_alphabet || order < 0) fail("pi block before alphabet/order");
      RawBlock b{order + 1, std::numeric_limits<long long>::max(), {}, false};
      if (tok != "pi:") {
        // pi[lo..hi]:
        std::string inside = tok.substr(3, tok.size() - 5);
        auto dots = inside.find("..");
        if (dots == std::string::npos || tok[tok.size() - 2] != ']')
          fail("malformed pi range; expected pi[lo..hi]:");
        try {
          b.lo = std::stoll(inside.substr(0, dots));
          b.hi = std::stoll(inside.substr(dots + 2));
        } catch (const std::exception&) {
          fail("malformed pi range bounds");
        }
        b.ranged = true;
      }
      raw.push_back(std::move(b));
      section = Section::Pi;
    } else if (section == Section::Nu) {
      double p;
      if (!(ls >> p)) fail("malformed nu entry");
      nu_entries.emplace_back(tok, p);
    } else if (section == Section::Pi) {
      if (!have_alphabet) fail("pi data before alphabet");
      std::istringstream row(line);
      double v;
      int cnt = 0;
      while (row >> v) {
        raw.back().pi.push_back(v);
        ++cnt;
      }
      if (cnt != alphabet.size()) fail("pi row has wrong number of entries");
    } else {
      fail("unexpected content '" + tok + "'");
    }
  }

  if (!have_alphabet) throw std::invalid_argument("model lacks an alphabet line");
  if (order < 0) throw std::invalid_argument("model lacks an order line");
  if (raw.empty()) throw std::invalid_argument("model lacks a pi block");

  long long ctx = 1;
  for (int i = 0; i < order; ++i) ctx *= alphabet.size();

  std::vector<double> nu(static_cast<size_t>(ctx), 0.0);
  if (nu_entries.empty()) {
    if (order > 0) throw std::invalid_argument("model of positive order lacks a nu block");
    nu = {1.0};
  } else {
    std::vector<bool> seen(static_cast<size_t>(ctx), false);
    for (auto& [label, p] : nu_entries) {
      if (static_cast<int>(label.size()) != order)
        throw std::invalid_argument("nu label '" + label + "' has wrong length");
      long long code = detail::context_code(alphabet, label);
      if (seen[code]) throw std::invalid_argument("duplicate nu label '" + label + "'");
      seen[code] = true;
      nu[code] = p;
    }
  }

  for (auto& b : raw)
    if (static_cast<long long>(b.pi.size()) != ctx * alphabet.size())
      throw std::invalid_argument("pi block has " +
                                  std::to_string(b.pi.size() / alphabet.size()) +
                                  " rows; expected " + std::to_string(ctx));

  if (raw.size() == 1 && !raw[0].ranged)
    return make_homogeneous(alphabet, order, std::move(nu), std::move(raw[0].pi));

  std::vector<std::pair<std::pair<long long, long long>, std::vector<double>>> schedule;
  for (auto& b : raw) {
    if (!b.ranged)
      throw std::invalid_argument("cannot mix plain pi: with ranged pi blocks");
    schedule.push_back({{b.lo, b.hi}, std::move(b.pi)});
  }
  return make_heterogeneous(alphabet, order, std::move(nu), std::move(schedule));
}

inline MarkovModel parse_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file " + path);
  return parse_model(in);
}

}  // namespace patmom

#endif  // PATMOM_MARKOV_MODEL_HPP
