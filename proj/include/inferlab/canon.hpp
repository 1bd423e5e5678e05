// The catalog of worked scenario bundles, the z-test power analysis, the
// minimax-binomial risk comparison, and the empirical-Bayes / leave-one-out
// methods.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inferlab/distmodel.hpp"
#include "inferlab/procedures.hpp"
#include "inferlab/relevance.hpp"
#include "inferlab/rng.hpp"

namespace inferlab {

// ----------------------------------------------------------------- catalog --

struct CanonBundle {
  std::string id;     // snake_case name used by the CLI
  std::string title;  // one-line description
  std::string default_op;  // operation `canon run` performs
  std::optional<Scenario> scenario;  // absent only for the exact analyses
  std::optional<Procedure> procedure;
  std::optional<MatchSpec> match;
  std::optional<TargetProblem> target;
  std::uint64_t default_count = 100000;
  SeedSpec default_seed{20260819, 0};
  // Prior family a sensitivity band sweeps; the first member is nominal.
  std::vector<PriorSpec> prior_family;
  std::vector<double> default_grid;  // tau grid (band) or theta grid (power)
  std::optional<LossKind> loss_kind;  // overrides the procedure default
  std::optional<std::uint64_t> coin_flips;  // minimax analysis sample size
  std::string notes;  // documented defaults behind the reference numbers
};

const std::vector<CanonBundle>& canon_catalog();
const CanonBundle* find_canon(const std::string& id);

// ------------------------------------------------------------ z-test power --

struct PowerPoint {
  double theta = 0.0;
  double power = 0.0;
};

// Exact power of the test rejecting when sqrt(n) |mean| > critical, under
// additive standard-normal errors: one point per grid value.
std::vector<PowerPoint> power_curve(double critical, std::size_t n,
                                    const std::vector<double>& theta_grid);

// Largest Type II error over alternatives with |theta| >= magnitude_floor;
// by monotonicity this is the Type II error at the floor itself.
double worst_case_type2(double critical, std::size_t n,
                        double magnitude_floor);

// ------------------------------------------------------- minimax analysis ---

struct RiskPoint {
  double theta = 0.0;
  double minimax_risk = 0.0;  // exact squared-error risk of the estimator
  double mean_risk = 0.0;     // exact risk of the sample proportion
};

// Exact binomial(n) squared-error risk along the theta grid.
std::vector<RiskPoint> minimax_risk_curve(std::uint64_t n,
                                          const std::vector<double>& theta_grid);

// -------------------------------------------------------- empirical Bayes ---

// Method-of-moments prevalence estimate from diagnostic results, clamped to
// [0, 1]. Throws when sensitivity + specificity = 1 (prevalence drops out).
double eb_prevalence(const std::vector<int>& results, double sensitivity,
                     double specificity);

// ------------------------------------------------------- cross validation ---

struct LooCvResult {
  std::vector<double> errors;  // y_i minus the prediction fit without i
  double mean_squared = 0.0;
};

// Leave-one-out regression errors via the hat-matrix identity
// e_i = r_i / (1 - h_ii), equal to n separate refits.
LooCvResult loo_cv_error(const Eigen::MatrixXd& design,
                         const Eigen::VectorXd& outcomes);

// ---------------------------------------------------------- winner's curse --

struct MarkerCurse {
  std::size_t marker = 0;
  std::uint64_t selected = 0;        // panels where the marker was selected
  double selection_rate = 0.0;
  double conditional_bias = 0.0;     // mean |estimate| - |truth| when selected
  double mc_se = 0.0;
  bool missing = false;              // never selected in `count` panels
};

// Simulates marker panels from the template scenario with the given prior
// and reports each marker's selection rate and the upward bias of its
// estimate's magnitude conditional on selection.
std::vector<MarkerCurse> winners_curse_report(const Scenario& panel_template,
                                              const PriorSpec& prior,
                                              std::uint64_t count,
                                              SeedSpec seed);

}  // namespace inferlab
