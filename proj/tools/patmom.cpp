// patmom: moments of pattern counts in Markov-generated sequences, with
// Edgeworth / Gram-Charlier pmf approximations, exact-pmf and simulation
// oracles, and automaton inspection.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "patmom/patmom.hpp"

using namespace patmom;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string log10_or_inf(double v) {
  if (v <= 0) return "-inf";
  return fmt(std::log10(v));
}

struct Output {
  std::ofstream file;
  std::ostream* os = &std::cout;

  void open(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file " + path);
    os = &file;
  }
  std::ostream& out() { return *os; }
};

void report_warnings(const MarkovModel& model) {
  for (const auto& w : model.warnings) std::cerr << "warning: " << w << "\n";
}

MarkovModel load_model(const std::string& path) {
  MarkovModel m = parse_model_file(path);
  report_warnings(m);
  return m;
}

Pattern load_pattern(const std::string& text, const Alphabet& alphabet) {
  DegeneracyMap codes;
  if (alphabet == Alphabet::dna()) codes = iupac_codes();
  return parse_pattern(text, alphabet, codes);
}

struct MomentsConfig {
  std::string model_path, pattern, algorithm = "auto", format = "table", out_path;
  long long len = 0;
  int k = 4;
  std::optional<long long> alpha;
  double threshold = 1e-12;
  int cutoff = 200;   // dimension beyond which auto prefers the partial recursion
};

int run_moments(const MomentsConfig& cfg) {
  MarkovModel model = load_model(cfg.model_path);
  Pattern pattern = load_pattern(cfg.pattern, model.alphabet);
  Dfa dfa = build_dfa(pattern, model.order);
  EmbeddedChain chain = embed(dfa, model, cfg.len);

  std::string alg = cfg.algorithm;
  if (alg == "auto") {
    if (!model.homogeneous)
      alg = "full";
    else
      alg = chain.dim() > cfg.cutoff ? "partial" : "power";
  }
  if ((alg == "power" || alg == "partial") && !model.homogeneous)
    throw std::invalid_argument(alg + " requires homogeneous model");

  auto t0 = std::chrono::steady_clock::now();
  std::vector<double> g;
  std::optional<PartialResult> partial;
  if (alg == "full") {
    g = factorial_terms_full(chain, cfg.k);
  } else if (alg == "power") {
    g = factorial_terms_power(chain, cfg.k);
  } else if (alg == "partial") {
    PartialOptions opt;
    opt.alpha = cfg.alpha;
    opt.threshold = cfg.threshold;
    partial = factorial_terms_partial(chain, cfg.k, opt);
    g = partial->g;
    if (!partial->threshold_met)
      std::cerr << "warning: residual threshold not met at pivot " << partial->alpha
                << " (residual " << fmt(partial->residual[cfg.k]) << ", error estimate "
                << fmt(partial->error_estimate[cfg.k]) << ")\n";
  } else {
    throw std::invalid_argument("unknown algorithm '" + alg + "'");
  }
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  Output o;
  o.open(cfg.out_path);
  if (cfg.k == 0) {
    o.out() << "g_0 = " << fmt(g[0]) << "\n";
    return 0;
  }
  MomentSet ms = moment_set_from_factorial(g);
  bool shape_ok = cfg.k >= 2 && ms.cumulants[2] > 0;

  if (cfg.format == "tsv") {
    o.out() << "# patmom moments\n";
    o.out() << "# model: " << cfg.model_path << "\n";
    o.out() << "# pattern: " << cfg.pattern << "\n";
    o.out() << "# len: " << cfg.len << "\tk: " << cfg.k << "\talgorithm: " << alg << "\n";
    if (partial)
      o.out() << "# pivot: " << partial->alpha
              << "\tresidual: " << fmt(partial->residual[cfg.k])
              << "\terror_estimate: " << fmt(partial->error_estimate[cfg.k]) << "\n";
    o.out() << "pattern\tL\texpectation";
    if (cfg.k >= 2) o.out() << "\tstd_dev";
    if (cfg.k >= 3) o.out() << "\tskewness";
    if (cfg.k >= 4) o.out() << "\tekurtosis";
    o.out() << "\n" << cfg.pattern << "\t" << chain.dim() << "\t" << fmt(ms.mean());
    if (cfg.k >= 2) o.out() << "\t" << fmt(ms.stddev());
    if (cfg.k >= 3) o.out() << "\t" << (shape_ok ? fmt(ms.skewness()) : "nan");
    if (cfg.k >= 4) o.out() << "\t" << (shape_ok ? fmt(ms.excess_kurtosis()) : "nan");
    o.out() << "\n";
  } else {
    o.out() << "pattern     L  expectation";
    if (cfg.k >= 2) o.out() << "  std.dev";
    if (cfg.k >= 3) o.out() << "  skewness";
    if (cfg.k >= 4) o.out() << "  ekurtosis";
    o.out() << "  time(s)\n";
    o.out() << cfg.pattern << "  " << chain.dim() << "  " << fmt6(ms.mean());
    if (cfg.k >= 2) o.out() << "  " << fmt6(ms.stddev());
    if (cfg.k >= 3) o.out() << "  " << (shape_ok ? fmt6(ms.skewness()) : "nan");
    if (cfg.k >= 4) o.out() << "  " << (shape_ok ? fmt6(ms.excess_kurtosis()) : "nan");
    char t[32];
    std::snprintf(t, sizeof(t), "%.3f", seconds);
    o.out() << "  " << t << "\n";
    if (partial)
      o.out() << "pivot " << partial->alpha << ", residual "
              << fmt6(partial->residual[cfg.k]) << ", error estimate "
              << fmt6(partial->error_estimate[cfg.k]) << "\n";
  }
  return 0;
}

struct ApproxConfig {
  std::string model_path, pattern, family = "gaussian", orders = "", range, out_path;
  long long len = 0;
  long long ncap = 0;
  bool no_exact = false;
};

int run_approx(const ApproxConfig& cfg) {
  MarkovModel model = load_model(cfg.model_path);
  Pattern pattern = load_pattern(cfg.pattern, model.alphabet);
  EmbeddedChain chain = embed(build_dfa(pattern, model.order), model, cfg.len);

  std::vector<int> orders;
  {
    std::string spec = cfg.orders.empty() ? (cfg.family == "poisson" ? "0,4" : "0,3")
                                          : cfg.orders;
    std::istringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) orders.push_back(std::stoi(tok));
    if (orders.empty()) throw std::invalid_argument("no approximation orders given");
  }
  int max_order = *std::max_element(orders.begin(), orders.end());

  int k;
  if (cfg.family == "gaussian")
    k = std::max(2, max_order + 2);
  else if (cfg.family == "poisson")
    k = std::max(1, max_order);
  else
    throw std::invalid_argument("family must be gaussian or poisson");

  std::vector<double> g = model.homogeneous ? factorial_terms_power(chain, k)
                                            : factorial_terms_full(chain, k);
  MomentSet ms = moment_set_from_factorial(g);

  std::optional<ExactPmf> exact;
  if (!cfg.no_exact) exact = exact_pmf_dp(chain, cfg.ncap);

  long long lo, hi;
  if (!cfg.range.empty()) {
    auto dots = cfg.range.find("..");
    if (dots == std::string::npos)
      throw std::invalid_argument("range must look like lo..hi");
    lo = std::stoll(cfg.range.substr(0, dots));
    hi = std::stoll(cfg.range.substr(dots + 2));
  } else {
    double sd = ms.stddev();
    lo = std::max<long long>(0, static_cast<long long>(std::floor(ms.mean() - 6 * sd)));
    hi = static_cast<long long>(std::ceil(ms.mean() + 6 * sd));
  }
  if (exact) hi = std::min<long long>(hi, exact->n_max());

  std::vector<GramCharlierSpec> gc;
  if (cfg.family == "poisson") {
    for (int s : orders) {
      gc.push_back(gram_charlier_coeffs(g, s));
      for (const auto& w : gc.back().warnings)
        std::cerr << "warning: order " << s << ": " << w << "\n";
    }
  }

  Output o;
  o.open(cfg.out_path);
  o.out() << "# patmom approx\n";
  o.out() << "# model: " << cfg.model_path << "\n";
  o.out() << "# pattern: " << cfg.pattern << "\tlen: " << cfg.len
          << "\tfamily: " << cfg.family << "\n";
  o.out() << "n";
  if (exact) o.out() << "\texact";
  for (int s : orders) {
    o.out() << "\tapprox_s" << s;
    if (exact) o.out() << "\tlog10_relerr_s" << s;
  }
  o.out() << "\n";
  for (long long n = lo; n <= hi; ++n) {
    o.out() << n;
    if (exact) o.out() << "\t" << fmt(exact->p[n]);
    for (size_t i = 0; i < orders.size(); ++i) {
      double approx = cfg.family == "gaussian" ? edgeworth_pmf(n, ms, orders[i])
                                               : gram_charlier_pmf(n, gc[i]);
      o.out() << "\t" << fmt(approx);
      if (exact) {
        double e = exact->p[n];
        o.out() << "\t" << (e > 0 ? log10_or_inf(std::fabs(approx - e) / e) : "nan");
      }
    }
    o.out() << "\n";
  }
  return 0;
}

struct ScanConfig {
  std::string model_path, pattern, rule = "combined", out_path;
  int max_order = 9;
  long long imax = 100;
};

int run_scan(const ScanConfig& cfg) {
  MarkovModel model = load_model(cfg.model_path);
  if (!model.homogeneous)
    throw std::invalid_argument("stability-scan requires homogeneous model");
  Pattern pattern = load_pattern(cfg.pattern, model.alphabet);
  // any length beyond the scan window works: the table only runs to imax
  EmbeddedChain chain =
      embed(build_dfa(pattern, model.order), model, cfg.imax + model.order + 1);

  UpdateRule rule;
  if (cfg.rule == "diff")
    rule = UpdateRule::Difference;
  else if (cfg.rule == "matrix")
    rule = UpdateRule::Matrix;
  else if (cfg.rule == "combined")
    rule = UpdateRule::Combined;
  else
    throw std::invalid_argument("rule must be diff, matrix or combined");

  PartialTable table = partial_recursion_table(chain, cfg.max_order, cfg.imax, rule);

  Output o;
  o.open(cfg.out_path);
  o.out() << "# patmom stability-scan\n";
  o.out() << "# model: " << cfg.model_path << "\n";
  o.out() << "# pattern: " << cfg.pattern << "\tK: " << cfg.max_order
          << "\timax: " << cfg.imax << "\trule: " << cfg.rule << "\n";
  o.out() << "k\ti\tlog10_norm\trule\n";
  for (int k = 1; k <= cfg.max_order; ++k)
    for (long long i = 1; i <= cfg.imax; ++i)
      o.out() << k << "\t" << i << "\t" << log10_or_inf(table.decay[k][i]) << "\t"
              << cfg.rule << "\n";
  return 0;
}

struct DfaConfig {
  std::string model_path, alphabet, pattern, out_path;
  int order = -1;
};

int run_dfa(const DfaConfig& cfg) {
  Alphabet alphabet;
  int order = cfg.order;
  if (!cfg.model_path.empty()) {
    MarkovModel model = load_model(cfg.model_path);
    alphabet = model.alphabet;
    if (order < 0) order = model.order;
  } else if (!cfg.alphabet.empty()) {
    alphabet = Alphabet(cfg.alphabet);
    if (order < 0) throw std::invalid_argument("--order is required with --alphabet");
  } else {
    throw std::invalid_argument("need --model or --alphabet");
  }
  Pattern pattern = load_pattern(cfg.pattern, alphabet);
  Dfa dfa = build_dfa(pattern, order);
  Output o;
  o.open(cfg.out_path);
  o.out() << dfa_dump(dfa);
  return 0;
}

struct PmfConfig {
  std::string model_path, pattern, out_path;
  long long len = 0, ncap = 0;
};

int run_pmf(const PmfConfig& cfg) {
  MarkovModel model = load_model(cfg.model_path);
  Pattern pattern = load_pattern(cfg.pattern, model.alphabet);
  EmbeddedChain chain = embed(build_dfa(pattern, model.order), model, cfg.len);
  ExactPmf pmf = exact_pmf_dp(chain, cfg.ncap);
  Output o;
  o.open(cfg.out_path);
  o.out() << "# patmom pmf\n";
  o.out() << "# model: " << cfg.model_path << "\tpattern: " << cfg.pattern
          << "\tlen: " << cfg.len << "\n";
  o.out() << "n\tp\n";
  for (int n = 0; n <= pmf.n_max(); ++n) o.out() << n << "\t" << fmt(pmf.p[n]) << "\n";
  return 0;
}

struct SimConfig {
  std::string model_path, pattern, format = "table", out_path;
  long long len = 0, reps = 10000;
  std::uint64_t seed = 1;
};

int run_simulate(const SimConfig& cfg) {
  MarkovModel model = load_model(cfg.model_path);
  Pattern pattern = load_pattern(cfg.pattern, model.alphabet);
  McMoments mc = monte_carlo(model, pattern, cfg.len, cfg.reps, cfg.seed);
  Output o;
  o.open(cfg.out_path);
  if (cfg.format == "tsv") {
    o.out() << "# patmom simulate\n";
    o.out() << "# reps: " << mc.reps << "\tseed: " << mc.seed
            << "\trng: " << kMonteCarloRng << "\n";
    o.out() << "stat\testimate\tstd_error\n";
    o.out() << "mean\t" << fmt(mc.mean) << "\t" << fmt(mc.se_mean) << "\n";
    o.out() << "variance\t" << fmt(mc.variance) << "\t" << fmt(mc.se_variance) << "\n";
    o.out() << "skewness\t" << fmt(mc.skewness) << "\t" << fmt(mc.se_skewness) << "\n";
    o.out() << "ekurtosis\t" << fmt(mc.ekurtosis) << "\t" << fmt(mc.se_ekurtosis) << "\n";
  } else {
    o.out() << "reps " << mc.reps << ", seed " << mc.seed << ", rng " << kMonteCarloRng
            << "\n";
    o.out() << "mean       " << fmt6(mc.mean) << "  (se " << fmt6(mc.se_mean) << ")\n";
    o.out() << "variance   " << fmt6(mc.variance) << "  (se " << fmt6(mc.se_variance)
            << ")\n";
    o.out() << "skewness   " << fmt6(mc.skewness) << "  (se " << fmt6(mc.se_skewness)
            << ")\n";
    o.out() << "ekurtosis  " << fmt6(mc.ekurtosis) << "  (se " << fmt6(mc.se_ekurtosis)
            << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moments of pattern counts in Markov sequences"};
  app.require_subcommand(1);

  MomentsConfig mo;
  auto* c_mo = app.add_subcommand("moments", "first k moments of a pattern count");
  c_mo->add_option("--model", mo.model_path, "model file")->required();
  c_mo->add_option("--pattern", mo.pattern, "pattern text")->required();
  c_mo->add_option("--len", mo.len, "sequence length")->required();
  c_mo->add_option("-k,--order", mo.k, "number of moments")->capture_default_str();
  c_mo->add_option("--algorithm", mo.algorithm, "auto|full|power|partial")
      ->capture_default_str();
  c_mo->add_option("--alpha", mo.alpha, "partial-recursion pivot (default: auto)");
  c_mo->add_option("--threshold", mo.threshold, "partial-recursion residual target")
      ->capture_default_str();
  c_mo->add_option("--cutoff", mo.cutoff,
                   "auto: switch to partial above this state count")
      ->capture_default_str();
  c_mo->add_option("--format", mo.format, "table|tsv")->capture_default_str();
  c_mo->add_option("--out", mo.out_path, "output file (default stdout)");

  ApproxConfig ap;
  auto* c_ap = app.add_subcommand("approx", "pmf approximations against the exact pmf");
  c_ap->add_option("--model", ap.model_path, "model file")->required();
  c_ap->add_option("--pattern", ap.pattern, "pattern text")->required();
  c_ap->add_option("--len", ap.len, "sequence length")->required();
  c_ap->add_option("--family", ap.family, "gaussian|poisson")->capture_default_str();
  c_ap->add_option("--orders", ap.orders, "comma-separated expansion orders");
  c_ap->add_option("--range", ap.range, "count range lo..hi");
  c_ap->add_option("--ncap", ap.ncap, "exact pmf count cap (default: auto)");
  c_ap->add_flag("--no-exact", ap.no_exact, "skip the exact pmf columns");
  c_ap->add_option("--out", ap.out_path, "output file (default stdout)");

  ScanConfig sc;
  auto* c_sc =
      app.add_subcommand("stability-scan", "decay of the difference-table residuals");
  c_sc->add_option("--model", sc.model_path, "model file")->required();
  c_sc->add_option("--pattern", sc.pattern, "pattern text")->required();
  c_sc->add_option("-K,--max-order", sc.max_order, "largest moment order")
      ->capture_default_str();
  c_sc->add_option("--imax", sc.imax, "last recursion index")->capture_default_str();
  c_sc->add_option("--rule", sc.rule, "diff|matrix|combined")->capture_default_str();
  c_sc->add_option("--out", sc.out_path, "output file (default stdout)");

  DfaConfig df;
  auto* c_df = app.add_subcommand("dfa", "dump the pattern automaton");
  c_df->add_option("--model", df.model_path, "model file (for alphabet and order)");
  c_df->add_option("--alphabet", df.alphabet, "alphabet symbols");
  c_df->add_option("--order", df.order, "history order d");
  c_df->add_option("--pattern", df.pattern, "pattern text")->required();
  c_df->add_option("--out", df.out_path, "output file (default stdout)");

  PmfConfig pm;
  auto* c_pm = app.add_subcommand("pmf", "exact count distribution");
  c_pm->add_option("--model", pm.model_path, "model file")->required();
  c_pm->add_option("--pattern", pm.pattern, "pattern text")->required();
  c_pm->add_option("--len", pm.len, "sequence length")->required();
  c_pm->add_option("--ncap", pm.ncap, "count cap (default: auto)");
  c_pm->add_option("--out", pm.out_path, "output file (default stdout)");

  SimConfig si;
  auto* c_si = app.add_subcommand("simulate", "Monte Carlo moment estimates");
  c_si->add_option("--model", si.model_path, "model file")->required();
  c_si->add_option("--pattern", si.pattern, "pattern text")->required();
  c_si->add_option("--len", si.len, "sequence length")->required();
  c_si->add_option("--reps", si.reps, "number of repetitions")->capture_default_str();
  c_si->add_option("--seed", si.seed, "random seed")->capture_default_str();
  c_si->add_option("--format", si.format, "table|tsv")->capture_default_str();
  c_si->add_option("--out", si.out_path, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_mo->parsed()) return run_moments(mo);
    if (c_ap->parsed()) return run_approx(ap);
    if (c_sc->parsed()) return run_scan(sc);
    if (c_df->parsed()) return run_dfa(df);
    if (c_pm->parsed()) return run_pmf(pm);
    if (c_si->parsed()) return run_simulate(si);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
