#include "inferlab/canon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "inferlab/errors.hpp"
#include "inferlab/genctl.hpp"
#include "inferlab/mathutil.hpp"

namespace inferlab {

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double v = lo + step * i;
    if (v > hi + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

Scenario make_scenario(PriorSpec prior, NoiseSpec noise,
                       StructuralModel structure, std::size_t n) {
  Scenario s;
  s.prior = std::move(prior);
  s.noise = std::move(noise);
  s.structure = std::move(structure);
  s.n = n;
  return s;
}

std::vector<PriorSpec> two_point_family(double v0, double v1,
                                        std::vector<double> weights) {
  std::vector<PriorSpec> family;
  family.reserve(weights.size());
  for (double w : weights) family.push_back(two_point(v0, v1, w));
  return family;
}

std::vector<CanonBundle> build_catalog() {
  std::vector<CanonBundle> out;

  {
    CanonBundle b;
    b.id = "two_labs";
    b.title = "one measurement from one of two labs with very different noise";
    b.default_op = "error";
    b.scenario = make_scenario(
        gaussian_prior(0.0, 3.0),
        NoiseSpec{TwoLabMixture{1.0, 100.0, 0.5}}, StructuralModel{Additive{}},
        1);
    b.procedure = Procedure{IntervalProc{ZInterval{0.95}}};
    b.match = MatchSpec{StatisticId{LabAssignment{}}, 0.0,
                        Metric::ExactEquality};
    b.target = TargetProblem{LabMeasurements{{0.7}, {1}}, std::nullopt};
    b.default_count = 200000;
    b.notes =
        "Lab sds 1 and 100; the unit-sd z interval covers only when the "
        "draw came from lab 1. Lab assignment is ancillary, so conditioning "
        "on it costs no robustness.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "single_measurement";
    b.title = "estimating a location from one noisy measurement";
    b.default_op = "error";
    b.scenario = make_scenario(point_mass(0.0), NoiseSpec{StdNormal{}},
                               StructuralModel{Additive{}}, 1);
    b.procedure = Procedure{PointEst{SampleMeanEst{}}};
    b.match =
        MatchSpec{StatisticId{RawValue{}}, 0.05, Metric::AbsoluteDiff};
    b.target = TargetProblem{RealSeq{{1.5}}, std::nullopt};
    b.loss_kind = LossKind::AbsError;
    b.default_count = 400000;
    b.notes =
        "Matching on the measurement itself pins the conditional error to "
        "|target - prior center|: relevant but fully prior-driven.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "winners_curse";
    b.title = "marker panel with selection by a two-sided z threshold";
    b.default_op = "curse";
    b.scenario = make_scenario(point_mass(0.0), NoiseSpec{StdNormal{}},
                               StructuralModel{MarkerPanel{100, 10, 0.05}},
                               10);
    b.procedure = Procedure{PointEst{PlugInMarkerEst{}}};
    b.match = MatchSpec{StatisticId{SelectedSet{}}, 0.0,
                        Metric::ExactEquality};
    double z = norm_quantile(1.0 - 0.05 / 2.0);
    MarkerEstimates target_panel;
    target_panel.estimates = {0.3, -0.4, 2.5, 0.1, -0.2,
                              0.6, -0.8, 0.9, -0.5, 0.2};
    target_panel.z_threshold = z;
    b.target = TargetProblem{std::move(target_panel), std::nullopt};
    b.default_count = 200000;
    b.notes =
        "Ten markers, unit-se estimates, selection when |z| clears the "
        "two-sided 5% threshold. Selected estimates overstate magnitude.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "pvalue_matching";
    b.title = "p-value testing with equal-precision relevance matching";
    b.default_op = "band";
    b.scenario = make_scenario(two_point(0.0, 1.0, 0.5),
                               NoiseSpec{BetaPValue{0.02, 1.35}},
                               StructuralModel{PValueChannel{}}, 1);
    b.procedure = Procedure{TestProc{PThresholdTest{0.05}}};
    b.match = MatchSpec{StatisticId{AbsLogLR{0.02, 1.35}}, 0.5,
                        Metric::FoldedLogDiff};
    b.target = TargetProblem{PValue{0.049}, std::nullopt};
    b.default_count = 1000000;
    b.prior_family =
        two_point_family(0.0, 1.0, {0.5, 0.0, 0.25, 0.75, 1.0});
    b.default_grid = grid(0.1, 2.0, 0.1);
    b.notes =
        "Observed p = 0.049 against the Beta(0.02, 1.35) alternative; "
        "reject at 5%. The band sweeps the null/alternative weight; its "
        "extremes sit at the weight endpoints.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "diagnostic_test";
    b.title = "predicting disease from one imperfect diagnostic test";
    b.default_op = "error";
    b.scenario = make_scenario(two_point(0.0, 1.0, 0.5),
                               NoiseSpec{BernoulliChannel{0.9, 0.9}},
                               StructuralModel{DiagnosticTest{}}, 1);
    b.procedure = Procedure{TestProc{DiagnosticPredict{}}};
    b.match = MatchSpec{StatisticId{TestResult{}}, 0.0,
                        Metric::ExactEquality};
    b.target = TargetProblem{TestResults{{1}}, std::nullopt};
    b.default_count = 1000000;
    b.prior_family = two_point_family(
        0.0, 1.0, {0.5, 0.0, 0.1, 0.2, 0.3, 0.4, 0.6, 0.7, 0.8, 0.9, 1.0});
    b.notes =
        "Sensitivity and specificity 0.9; unconditional error is 10% for "
        "every prevalence, conditional-on-positive error runs 0% to 100%.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "battery_pivot";
    b.title = "lower-bounding a battery life from multiplicative noise";
    b.default_op = "error";
    b.scenario = make_scenario(point_mass(10.0),
                               NoiseSpec{UnitMeanExponential{}},
                               StructuralModel{Multiplicative{}}, 5);
    b.procedure = Procedure{IntervalProc{MultiplicativePivotLower{0.95}}};
    b.match = MatchSpec{StatisticId{SampleSize{}}, 0.0,
                        Metric::ExactEquality};
    b.target =
        TargetProblem{RealSeq{{12.1, 8.4, 9.7, 11.3, 10.2}}, std::nullopt};
    b.default_count = 1000000;
    b.notes =
        "theta' > mean / c with c the 0.95 quantile of the mean of 5 "
        "unit-exponential draws; misses 5% of controls under any prior. An "
        "additive buffer has no such invariance.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "ztest_power";
    b.title = "two-sided z test of a zero mean and its power curve";
    b.default_op = "power";
    b.scenario = make_scenario(point_mass(1.0), NoiseSpec{StdNormal{}},
                               StructuralModel{Additive{}}, 10);
    b.procedure = Procedure{TestProc{ZTest{1.96}}};
    b.match = MatchSpec{StatisticId{SampleSize{}}, 0.0,
                        Metric::ExactEquality};
    b.target = TargetProblem{
        RealSeq{{0.8, 1.3, 0.2, 1.9, 0.7, 1.1, 0.4, 1.6, 0.9, 1.2}},
        std::nullopt};
    b.default_count = 1000000;
    b.default_grid = grid(0.0, 3.0, 0.05);
    b.notes =
        "Reject when sqrt(n) |mean| > 1.96 with n = 10. Exact normal power; "
        "Type II is 95% near zero and 11.5% at theta = 1.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "regression_partial";
    b.title = "regression target matched on all but its own outcome";
    b.default_op = "partial";
    Eigen::MatrixXd x = seeded_design(20, 3, 11);
    LinearRegression lrs;
    lrs.design = x;
    lrs.target_covariates = x.row(0).transpose();
    b.scenario = make_scenario(gaussian_prior(0.0, 1.0),
                               NoiseSpec{StdNormal{}},
                               StructuralModel{std::move(lrs)}, 20);
    b.default_count = 10000;
    b.notes =
        "20 x 3 design, intercept plus seeded standard-normal covariates, "
        "target point = first row. The free component carries weight h0.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "minimax_coin";
    b.title = "constant-risk binomial estimation versus the sample mean";
    b.default_op = "risk";
    b.coin_flips = 4;
    b.default_grid = grid(0.0, 1.0, 0.01);
    b.notes =
        "Exact binomial risk over the probability grid; no simulation. The "
        "shrunk estimator trades the endpoints for the middle.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "empirical_bayes";
    b.title = "estimating prevalence from the test results themselves";
    b.default_op = "eb";
    b.scenario = make_scenario(two_point(0.0, 1.0, 0.3),
                               NoiseSpec{BernoulliChannel{0.9, 0.9}},
                               StructuralModel{DiagnosticTest{}}, 200);
    b.default_count = 1000;
    b.notes =
        "200 patients, true prevalence 0.3, sensitivity = specificity = "
        "0.9; method-of-moments inversion of the positive fraction.";
    out.push_back(std::move(b));
  }

  {
    CanonBundle b;
    b.id = "loo_cv";
    b.title = "leave-one-out prediction error for a regression fit";
    b.default_op = "loo";
    Eigen::MatrixXd x = seeded_design(30, 3, 7);
    LinearRegression lrs;
    lrs.design = x;
    lrs.target_covariates = x.row(0).transpose();
    b.scenario = make_scenario(gaussian_prior(0.0, 1.0),
                               NoiseSpec{StdNormal{}},
                               StructuralModel{std::move(lrs)}, 30);
    b.default_count = 1;
    b.notes =
        "30 x 3 seeded design; each point predicted by the fit that "
        "excludes it, via the hat-matrix identity.";
    out.push_back(std::move(b));
  }

  return out;
}

}  // namespace

const std::vector<CanonBundle>& canon_catalog() {
  static const std::vector<CanonBundle> catalog = build_catalog();
  return catalog;
}

const CanonBundle* find_canon(const std::string& id) {
  for (const auto& b : canon_catalog()) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

// ------------------------------------------------------------ z-test power --

std::vector<PowerPoint> power_curve(double critical, std::size_t n,
                                    const std::vector<double>& theta_grid) {
  if (n == 0) throw std::domain_error("need at least one observation");
  double root_n = std::sqrt(static_cast<double>(n));
  std::vector<PowerPoint> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    double shift = root_n * theta;
    double power =
        norm_cdf(-critical - shift) + 1.0 - norm_cdf(critical - shift);
    out.push_back(PowerPoint{theta, power});
  }
  return out;
}

double worst_case_type2(double critical, std::size_t n,
                        double magnitude_floor) {
  if (!(magnitude_floor > 0.0)) {
    throw std::domain_error("magnitude floor must be positive");
  }
  double shift = std::sqrt(static_cast<double>(n)) * magnitude_floor;
  return norm_cdf(critical - shift) - norm_cdf(-critical - shift);
}

// ------------------------------------------------------- minimax analysis ---

std::vector<RiskPoint> minimax_risk_curve(
    std::uint64_t n, const std::vector<double>& theta_grid) {
  if (n == 0) throw std::domain_error("need at least one flip");
  auto nd = static_cast<double>(n);

  std::vector<double> log_choose(n + 1);
  for (std::uint64_t x = 0; x <= n; ++x) {
    log_choose[x] = std::lgamma(nd + 1.0) -
                    std::lgamma(static_cast<double>(x) + 1.0) -
                    std::lgamma(nd - static_cast<double>(x) + 1.0);
  }

  std::vector<RiskPoint> out;
  out.reserve(theta_grid.size());
  for (double theta : theta_grid) {
    RiskPoint pt;
    pt.theta = theta;
    for (std::uint64_t x = 0; x <= n; ++x) {
      double xd = static_cast<double>(x);
      double pmf;
      if (theta <= 0.0) {
        pmf = x == 0 ? 1.0 : 0.0;
      } else if (theta >= 1.0) {
        pmf = x == n ? 1.0 : 0.0;
      } else {
        pmf = std::exp(log_choose[x] + xd * std::log(theta) +
                       (nd - xd) * std::log1p(-theta));
      }
      double em = minimax_binomial_estimate(x, n) - theta;
      double es = xd / nd - theta;
      pt.minimax_risk += pmf * em * em;
      pt.mean_risk += pmf * es * es;
    }
    out.push_back(pt);
  }
  return out;
}

// -------------------------------------------------------- empirical Bayes ---

double eb_prevalence(const std::vector<int>& results, double sensitivity,
                     double specificity) {
  if (results.empty()) throw std::domain_error("no test results");
  double denom = sensitivity + specificity - 1.0;
  if (std::abs(denom) < 1e-12) {
    throw std::domain_error(
        "sensitivity + specificity = 1 leaves the prevalence unidentified");
  }
  double positive = 0.0;
  for (int r : results) positive += r != 0 ? 1.0 : 0.0;
  double frac = positive / static_cast<double>(results.size());
  double raw = (frac - (1.0 - specificity)) / denom;
  return std::clamp(raw, 0.0, 1.0);
}

// ------------------------------------------------------- cross validation ---

LooCvResult loo_cv_error(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& outcomes) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (outcomes.size() != n) {
    throw std::domain_error("outcome length must match the design rows");
  }
  if (n <= k + 1) {
    throw std::domain_error(
        "need more observations than coefficients plus one");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < k) {
    throw std::domain_error("design is not full column rank");
  }
  Eigen::VectorXd beta = qr.solve(outcomes);
  Eigen::VectorXd resid = outcomes - design * beta;

  // Leverages via the R factor: h_ii = |R^{-T} P' x_i|^2.
  Eigen::MatrixXd r = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::MatrixXd t = qr.colsPermutation().transpose() * design.transpose();
  r.transpose().triangularView<Eigen::Lower>().solveInPlace(t);

  LooCvResult out;
  out.errors.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double h = t.col(i).squaredNorm();
    if (1.0 - h <= 1e-12) {
      throw std::domain_error("removing record " + std::to_string(i) +
                              " leaves a rank-deficient design");
    }
    double e = resid(i) / (1.0 - h);
    out.errors[static_cast<std::size_t>(i)] = e;
    out.mean_squared += e * e;
  }
  out.mean_squared /= static_cast<double>(n);
  return out;
}

// ---------------------------------------------------------- winner's curse --

std::vector<MarkerCurse> winners_curse_report(const Scenario& panel_template,
                                              const PriorSpec& prior,
                                              std::uint64_t count,
                                              SeedSpec seed) {
  const auto* panel = std::get_if<MarkerPanel>(&panel_template.structure.v);
  if (!panel) {
    throw ValidationError("winner's curse needs a marker panel scenario");
  }
  if (count == 0) throw ValidationError("control count must be positive");
  Scenario s = panel_template;
  s.prior = prior;
  ControlGenerator gen(s, seed);

  std::vector<MomentSums> bias(panel->n_markers);
  for (std::uint64_t i = 0; i < count; ++i) {
    ControlProblem p = gen.problem(i);
    const auto& d = std::get<MarkerEstimates>(p.data());
    for (std::size_t m = 0; m < d.estimates.size(); ++m) {
      if (std::abs(d.estimates[m]) > d.z_threshold) {
        bias[m].add(std::abs(d.estimates[m]) - std::abs(p.truth()[m]));
      }
    }
  }

  std::vector<MarkerCurse> out(panel->n_markers);
  for (std::size_t m = 0; m < out.size(); ++m) {
    out[m].marker = m;
    out[m].selected = bias[m].n;
    out[m].selection_rate =
        static_cast<double>(bias[m].n) / static_cast<double>(count);
    if (bias[m].n == 0) {
      out[m].missing = true;
      out[m].conditional_bias = std::numeric_limits<double>::quiet_NaN();
      out[m].mc_se = std::numeric_limits<double>::quiet_NaN();
    } else {
      out[m].conditional_bias = bias[m].mean();
      out[m].mc_se = bias[m].se();
    }
  }
  return out;
}

}  // namespace inferlab
