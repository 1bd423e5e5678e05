// Reference checks for the laboratory, one verdict line per check.
// Fixed seeds, single worker. The exit status is the number of failures.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "inferlab/canon.hpp"
#include "inferlab/evaluate.hpp"
#include "inferlab/genctl.hpp"
#include "inferlab/mathutil.hpp"
#include "inferlab/patterns.hpp"
#include "inferlab/procedures.hpp"
#include "inferlab/relevance.hpp"

using namespace inferlab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int g_failures = 0;

std::string strf(const char* spec, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, spec);
  std::vsnprintf(buf, sizeof buf, spec, ap);
  va_end(ap);
  return buf;
}

void verdict(int idx, bool pass, const char* label,
             const std::string& detail) {
  std::printf("C%02d %s  %s%s%s\n", idx, pass ? "PASS" : "FAIL", label,
              detail.empty() ? "" : "  |  ", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double two_sample_ks(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::fabs(double(i) / a.size() - double(j) / b.size()));
  }
  return d;
}

// every maximal run of 'o' must start right after "bb"
bool orange_preceded_by_blue(const std::string& s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != 'o') continue;
    if (i > 0 && s[i - 1] == 'o') continue;
    if (i < 2) return false;
    if (s[i - 1] != 'b' || s[i - 2] != 'b') return false;
  }
  return true;
}

Scenario pvalue_scenario(double weight) {
  return Scenario{two_point(0.0, 1.0, weight), NoiseSpec{BetaPValue{0.02, 1.35}},
                  StructuralModel{PValueChannel{}}, 1};
}

const Procedure kPThreshold{TestProc{PThresholdTest{0.05}}};
const TargetProblem kPTarget{DataValue{PValue{0.049}}, std::nullopt};

MatchSpec lr_match(double tau) {
  return MatchSpec{StatisticId{AbsLogLR{0.02, 1.35}}, tau,
                   Metric::FoldedLogDiff};
}

// ---------------------------------------------------------------- checks ---

void c01_likelihood_ratio() {
  double v = lr(0.049, 0.02, 1.35);
  verdict(1, std::fabs(v - 0.38) <= 0.005,
          "likelihood ratio at the borderline p-value",
          strf("lr(0.049)=%.6f, want 0.38 +- 0.005", v));
}

void c02_open_matching_recovers_level() {
  bool ok = true;
  std::string detail;
  for (double w : {0.0, 0.25, 0.5, 1.0}) {
    ErrorReport rep =
        conditional_error(pvalue_scenario(w), kPThreshold, lr_match(kInf),
                          kPTarget, 1000000, SeedSpec{9002, 0});
    if (std::fabs(rep.estimate - 0.05) > 3.0 * rep.mc_se) ok = false;
    detail += strf("w=%.2f:%.5f(se %.5f) ", w, rep.estimate, rep.mc_se);
  }
  verdict(2, ok, "open-tolerance error equals the level for every mixture",
          detail);
}

void c03_alternative_miss_rate() {
  Scenario s = pvalue_scenario(1.0);
  ControlGenerator gen(s, SeedSpec{9003, 0});
  const std::uint64_t n = 1000000;
  std::uint64_t high = 0;
  for (std::uint64_t i = 0; i < n; ++i) {
    high += (std::get<PValue>(gen.problem(i).data()).value > 0.05);
  }
  double f = double(high) / double(n);
  double se = std::sqrt(f * (1.0 - f) / double(n));
  verdict(3, std::fabs(f - 0.05) <= 3.0 * se,
          "alternative p-values exceed the cutoff at the level's rate",
          strf("fraction=%.5f se=%.5f", f, se));
}

void c04_sensitivity_band() {
  std::vector<PriorSpec> family{
      two_point(0.0, 1.0, 0.5), two_point(0.0, 1.0, 0.0),
      two_point(0.0, 1.0, 0.25), two_point(0.0, 1.0, 0.75),
      two_point(0.0, 1.0, 1.0)};
  std::vector<double> grid;
  for (int i = 1; i <= 20; ++i) grid.push_back(0.1 * i);
  grid.push_back(kInf);
  SensitivityBand band = sensitivity_band(
      pvalue_scenario(0.5), kPThreshold, StatisticId{AbsLogLR{0.02, 1.35}},
      grid, family, kPTarget, 1000000, SeedSpec{9004, 0});

  // open tolerance: the band collapses
  const BandRow& open = band.rows.back();
  double open_width = open.err_max - open.err_min;
  bool ok_open = open_width < 4.0 * std::sqrt(2.0) * open.mc_se;

  // width nondecreasing as the tolerance shrinks from 2.0 to 0.1
  bool ok_mono = true;
  for (std::size_t k = 19; k >= 1; --k) {
    double w_tight = band.rows[k - 1].err_max - band.rows[k - 1].err_min;
    double w_loose = band.rows[k].err_max - band.rows[k].err_min;
    double slack = 3.0 * std::sqrt(2.0) *
                   (band.rows[k - 1].mc_se + band.rows[k].mc_se);
    if (w_tight < w_loose - slack) ok_mono = false;
  }
  std::string widths;
  for (std::size_t k : {19u, 14u, 12u, 9u, 4u, 0u}) {
    widths += strf("tau=%.1f:%.4f ", band.rows[k].tau,
                   band.rows[k].err_max - band.rows[k].err_min);
  }

  // extremes sit at the mixture-weight endpoints
  bool ok_ends = true;
  for (double tau : {0.5, 1.5}) {
    double est[5], se[5];
    const double ws[5] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (int i = 0; i < 5; ++i) {
      ErrorReport rep =
          conditional_error(pvalue_scenario(ws[i]), kPThreshold, lr_match(tau),
                            kPTarget, 200000, SeedSpec{9005, 0});
      est[i] = rep.estimate;
      se[i] = rep.mc_se;
    }
    double lo = std::min(est[0], est[4]);
    double hi = std::max(est[0], est[4]);
    double end_se = se[0] + se[4];
    for (int i = 1; i < 4; ++i) {
      if (est[i] < lo - 2.0 * (se[i] + end_se)) ok_ends = false;
      if (est[i] > hi + 2.0 * (se[i] + end_se)) ok_ends = false;
    }
  }

  // nominal curve against the numeric-integration values
  static const double kNominal[20] = {
      0.458962333583, 0.429657691077, 0.411743251813, 0.396902761503,
      0.383484565193, 0.370946963997, 0.359064821720, 0.347731326528,
      0.336892007276, 0.324250812132, 0.308058344437, 0.292548935302,
      0.277692357843, 0.263466433275, 0.249854995504, 0.236846305367,
      0.224431811098, 0.212605181959, 0.201361561943, 0.190697003426};
  bool ok_nominal = true;
  double worst_pull = 0.0;
  for (int k = 0; k < 20; ++k) {
    double pull = std::fabs(band.rows[std::size_t(k)].err_nominal -
                            kNominal[k]) /
                  band.rows[std::size_t(k)].mc_se;
    worst_pull = std::max(worst_pull, pull);
    if (pull > 3.0) ok_nominal = false;
  }

  verdict(4, ok_open && ok_mono && ok_ends && ok_nominal,
          "prior-sensitivity band over the tolerance grid",
          strf("open_width=%.5f(%s) monotone=%s[%s] endpoints=%s "
               "nominal_worst_pull=%.2fse(%s)",
               open_width, ok_open ? "ok" : "FAIL", ok_mono ? "ok" : "FAIL",
               widths.c_str(), ok_ends ? "ok" : "FAIL", worst_pull,
               ok_nominal ? "ok" : "FAIL"));
}

void c05_diagnostic_errors() {
  bool ok = true;
  std::string detail;
  const Procedure predict{TestProc{DiagnosticPredict{}}};
  const TargetProblem positive{DataValue{TestResults{{1}}}, std::nullopt};
  for (int k = 0; k <= 10; ++k) {
    double pi = double(k) / 10.0;
    Scenario s{two_point(0.0, 1.0, pi), NoiseSpec{BernoulliChannel{0.9, 0.9}},
               StructuralModel{DiagnosticTest{}}, 1};

    MatchSpec open{StatisticId{SampleSize{}}};
    ErrorReport uncond = conditional_error(s, predict, open, positive, 400000,
                                           SeedSpec{9006, std::uint64_t(k)});
    if (std::fabs(uncond.estimate - 0.10) > 3.0 * uncond.mc_se) {
      ok = false;
      detail += strf("uncond pi=%.1f:%.4f ", pi, uncond.estimate);
    }

    MatchSpec on_positive{StatisticId{TestResult{}}, 0.0,
                          Metric::ExactEquality};
    ErrorReport cond =
        conditional_error(s, predict, on_positive, positive, 400000,
                          SeedSpec{9007, std::uint64_t(k)});
    if (k == 0) {
      if (cond.estimate != 1.0) ok = false;
    } else if (k == 10) {
      if (cond.estimate != 0.0) ok = false;
    } else {
      double bayes = (1.0 - pi) * 0.1 / ((1.0 - pi) * 0.1 + pi * 0.9);
      if (std::fabs(cond.estimate - bayes) > 3.0 * cond.mc_se) {
        ok = false;
        detail += strf("cond pi=%.1f:%.4f want %.4f ", pi, cond.estimate,
                       bayes);
      }
    }
  }
  verdict(5, ok, "diagnostic error flat overall, Bayes given a positive",
          detail.empty() ? "11 prevalence points" : detail);
}

void c06_pivot_coverage() {
  const MatchSpec open{StatisticId{SampleSize{}}};
  const TargetProblem target{DataValue{RealSeq{{1.0, 1.0, 1.0, 1.0, 1.0}}},
                             std::nullopt};
  auto coverage = [&](const PriorSpec& prior, const Procedure& proc,
                      std::uint64_t stream) {
    Scenario s{prior, NoiseSpec{UnitMeanExponential{}},
               StructuralModel{Multiplicative{}}, 5};
    ErrorReport rep = conditional_error(s, proc, open, target, 1000000,
                                        SeedSpec{9008, stream});
    return std::pair<double, double>(1.0 - rep.estimate, rep.mc_se);
  };

  const Procedure pivot{IntervalProc{MultiplicativePivotLower{0.95, 0.0}}};
  bool ok = true;
  std::string detail;
  std::uint64_t stream = 0;
  for (const PriorSpec& prior :
       {point_mass(0.1), point_mass(100.0), gaussian_prior(5.0, 2.0)}) {
    auto [cov, se] = coverage(prior, pivot, stream++);
    if (std::fabs(cov - 0.95) > 3.0 * se) ok = false;
    detail += strf("pivot:%.4f ", cov);
  }

  const Procedure fixed_buffer{IntervalProc{AdditiveLower{1.0}}};
  auto [cov_small, se_a] = coverage(point_mass(1.0), fixed_buffer, stream++);
  auto [cov_large, se_b] = coverage(point_mass(100.0), fixed_buffer, stream++);
  double spread = std::fabs(cov_small - cov_large);
  if (spread <= 0.2) ok = false;
  detail += strf("additive spread=%.3f", spread);
  verdict(6, ok, "scale pivot holds its level where a fixed buffer drifts",
          detail);
}

void c07_power_curve() {
  bool ok = true;
  double size = power_curve(norm_quantile(0.975), 10, {0.0})[0].power;
  if (std::fabs(size - 0.05) > 1e-12) ok = false;

  double t2_unit = worst_case_type2(1.96, 10, 1.0);
  if (std::fabs(t2_unit - 0.115) > 0.001) ok = false;

  // as the floor vanishes the miss rate climbs to one minus the size
  double prev = t2_unit;
  bool climbing = true;
  double last = 0.0;
  for (double theta : {0.5, 0.25, 0.1, 0.05, 0.01, 0.001}) {
    last = worst_case_type2(1.96, 10, theta);
    if (last < prev) climbing = false;
    prev = last;
  }
  if (!climbing || std::fabs(last - 0.95) > 1e-3) ok = false;
  verdict(7, ok, "test size exact, miss rate matches and saturates",
          strf("size=%.12f type2(1)=%.6f type2(0.001)=%.6f", size, t2_unit,
               last));
}

void c08_partial_matching() {
  Eigen::MatrixXd x = seeded_design(20, 3, 11);
  Eigen::VectorXd x0 = x.row(0).transpose();
  PartialMatchReport narrow = partial_match_decomposition(
      x, x0, GaussianPrior{0.0, 1.0}, 10000, SeedSpec{9009, 0});
  double worst = 0.0;
  for (double r : narrow.identity_residuals) worst = std::max(worst, r);
  bool ok = worst < 1e-9;

  double h_const = leverage(ones_design(7), Eigen::VectorXd::Ones(1));
  if (std::fabs(h_const - 1.0 / 7.0) > 1e-12) ok = false;

  PartialMatchReport wide = partial_match_decomposition(
      x, x0, GaussianPrior{5.0, 10.0}, 10000, SeedSpec{9009, 0});
  double crit = 1.6276 * std::sqrt(2.0 / 10000.0);
  double ks_free = two_sample_ks(narrow.f_samples, wide.f_samples);
  double ks_bayes = two_sample_ks(narrow.b_samples, wide.b_samples);
  if (!(ks_free < crit && ks_bayes > crit)) ok = false;

  verdict(8, ok, "decomposition identity, constant-design leverage, prior swap",
          strf("residual=%.2e h0=%.6f ks_free=%.4f ks_bayes=%.4f crit=%.4f",
               worst, h_const, ks_free, ks_bayes, crit));
}

void c09_population_decomposition() {
  // exact explained-variance identity on random populations
  bool ok_ident = true;
  for (int rep = 0; rep < 100; ++rep) {
    FinitePopulation pop;
    rng::Engine g = rng::engine_for(SeedSpec{9010, std::uint64_t(rep)}, 0);
    std::size_t depth = 1 + std::size_t(rng::u01(g) * 3.0);
    std::size_t n = 20 + std::size_t(rng::u01(g) * 200.0);
    for (std::size_t i = 0; i < n; ++i) {
      PopRecord rec;
      for (std::size_t d = 0; d < depth; ++d) {
        rec.covariates.push_back(int(rng::u01(g) * 3.0));
      }
      rec.outcome = rng::normal(g) + 2.0 * rec.covariates[0];
      pop.records.push_back(rec);
    }
    double mu = 0.0;
    for (const auto& rec : pop.records) mu += rec.outcome;
    mu /= double(n);
    double var = 0.0;
    for (const auto& rec : pop.records) {
      var += (rec.outcome - mu) * (rec.outcome - mu);
    }
    var /= double(n);
    for (std::size_t r = 0; r <= depth; ++r) {
      std::map<std::vector<double>, std::pair<double, int>> groups;
      for (const auto& rec : pop.records) {
        std::vector<double> key(rec.covariates.begin(),
                                rec.covariates.begin() + r);
        groups[key].first += rec.outcome;
        groups[key].second += 1;
      }
      double mse = 0.0;
      for (const auto& rec : pop.records) {
        std::vector<double> key(rec.covariates.begin(),
                                rec.covariates.begin() + r);
        double gm = groups[key].first / groups[key].second;
        mse += (rec.outcome - gm) * (rec.outcome - gm);
      }
      mse /= double(n);
      double gain = anova_gain(pop, r);
      if (std::fabs(gain - (var - mse)) > 1e-12 * std::max(1.0, var)) {
        ok_ident = false;
      }
    }
  }

  // an uninformative covariate must cost more than it explains
  int negative = 0;
  for (int rep = 0; rep < 100; ++rep) {
    FinitePopulation pop;
    rng::Engine g = rng::engine_for(SeedSpec{9011, std::uint64_t(rep)}, 0);
    for (int i = 0; i < 200; ++i) {
      PopRecord rec;
      rec.covariates = {i % 4};
      rec.outcome = rng::normal(g);
      pop.records.push_back(rec);
    }
    TradeoffEstimate est =
        tradeoff_estimate(pop, 20, 0, 400, SeedSpec{9012, std::uint64_t(rep)});
    negative += (est.net < 0.0);
  }
  verdict(9, ok_ident && negative >= 95,
          "variance split exact, uninformative matching nets a loss",
          strf("identity=%s net<0 in %d/100", ok_ident ? "ok" : "FAIL",
               negative));
}

void c10_block_patterns() {
  BlockModel pixels = fit_block_model(SymbolSequence{"bbooggbbg"}, 1);
  bool ok = pixels.block_frequencies.at("b") == 4.0 / 9.0 &&
            pixels.block_frequencies.at("g") == 3.0 / 9.0 &&
            pixels.block_frequencies.at("o") == 2.0 / 9.0;

  BlockModel blocks = fit_block_model(SymbolSequence{"bbooggbbg"}, 4);
  ok = ok && blocks.block_frequencies.size() == 2 &&
       blocks.block_frequencies.at("bboo") == 0.5 &&
       blocks.block_frequencies.at("ggbb") == 0.5;

  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    SymbolSequence s =
        simulate_sequence(blocks, 16, SeedSpec{9013, std::uint64_t(i)});
    if (!orange_preceded_by_blue(s.symbols)) ++violations;
  }
  ok = ok && violations == 0;
  verdict(10, ok, "exact block frequencies, orange always follows blue",
          strf("violations=%d/10000", violations));
}

void c11_minimax_risk() {
  const CanonBundle* bundle = find_canon("minimax_coin");
  std::uint64_t n =
      (bundle && bundle->coin_flips) ? *bundle->coin_flips : 25;
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(double(i) / 100.0);
  std::vector<RiskPoint> curve = minimax_risk_curve(n, grid);
  double lo = kInf, hi = -kInf;
  for (const RiskPoint& p : curve) {
    lo = std::min(lo, p.minimax_risk);
    hi = std::max(hi, p.minimax_risk);
  }
  bool ok = (hi - lo) / hi < 1e-10;
  const RiskPoint& mid = curve[50];
  const RiskPoint& origin = curve[0];
  ok = ok && mid.mean_risk > mid.minimax_risk &&
       origin.mean_risk < origin.minimax_risk;
  verdict(11, ok, "shrunken coin estimate has flat risk, mean does not",
          strf("n=%llu flatness=%.2e mean(0.5)=%.5f vs %.5f",
               static_cast<unsigned long long>(n), (hi - lo) / hi,
               mid.mean_risk, mid.minimax_risk));
}

void c12_shrinkage_and_loo() {
  // prevalence error falls like the square root of the panel size
  const double pi = 0.3, sens = 0.9, spec = 0.9;
  const double q = pi * sens + (1.0 - pi) * (1.0 - spec);
  rng::Engine g = rng::engine_for(SeedSpec{9014, 0}, 0);
  std::vector<double> log_n, log_err;
  for (int n : {100, 1000, 10000, 100000}) {
    const int panels = 400;
    double mse = 0.0;
    for (int p = 0; p < panels; ++p) {
      std::vector<int> results(std::size_t(n), 0);
      for (int i = 0; i < n; ++i) results[std::size_t(i)] = (rng::u01(g) < q);
      double est = eb_prevalence(results, sens, spec);
      mse += (est - pi) * (est - pi);
    }
    log_n.push_back(std::log(double(n)));
    log_err.push_back(0.5 * std::log(mse / panels));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    mx += log_n[i];
    my += log_err[i];
  }
  mx /= double(log_n.size());
  my /= double(log_err.size());
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < log_n.size(); ++i) {
    num += (log_n[i] - mx) * (log_err[i] - my);
    den += (log_n[i] - mx) * (log_n[i] - mx);
  }
  double slope = num / den;
  bool ok = std::fabs(slope + 0.5) <= 0.1;

  // the one-pass cross-validation errors equal brute-force refits
  Eigen::MatrixXd x = seeded_design(25, 3, 13);
  Eigen::VectorXd y(25);
  for (int i = 0; i < 25; ++i) {
    y(i) = 2.0 + 0.5 * x(i, 1) - 1.5 * x(i, 2) + rng::normal(g);
  }
  LooCvResult res = loo_cv_error(x, y);
  double worst = 0.0;
  for (int i = 0; i < 25; ++i) {
    Eigen::MatrixXd xr(24, 3);
    Eigen::VectorXd yr(24);
    int row = 0;
    for (int j = 0; j < 25; ++j) {
      if (j == i) continue;
      xr.row(row) = x.row(j);
      yr(row) = y(j);
      ++row;
    }
    Eigen::VectorXd beta = xr.colPivHouseholderQr().solve(yr);
    double direct = y(i) - x.row(i).dot(beta);
    worst = std::max(worst, std::fabs(res.errors[std::size_t(i)] - direct));
  }
  ok = ok && worst < 1e-10;
  verdict(12, ok, "root-n error decay and exact leave-one-out shortcut",
          strf("slope=%.3f loo_gap=%.2e", slope, worst));
}

}  // namespace

int main() {
  std::printf("reference checks, fixed seeds, single worker\n");
  c01_likelihood_ratio();
  c02_open_matching_recovers_level();
  c03_alternative_miss_rate();
  c04_sensitivity_band();
  c05_diagnostic_errors();
  c06_pivot_coverage();
  c07_power_curve();
  c08_partial_matching();
  c09_population_decomposition();
  c10_block_patterns();
  c11_minimax_risk();
  c12_shrinkage_and_loo();
  std::printf("passed %d/12\n", 12 - g_failures);
  return g_failures;
}
