// Conditional error rates over relevant control subsets, prior-sensitivity
// bands, the finite-population gain/loss decomposition, and the analytic
// partial-matching analysis for the Gaussian linear model.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "inferlab/distmodel.hpp"
#include "inferlab/procedures.hpp"
#include "inferlab/relevance.hpp"
#include "inferlab/rng.hpp"

namespace inferlab {

// --------------------------------------------------------- error reports ---

struct ErrorReport {
  double estimate = 0.0;  // mean loss over accepted controls
  double mc_se = 0.0;
  std::uint64_t accepted = 0;
  std::uint64_t generated = 0;
  double acceptance_rate = 0.0;
};

// One JSON object with exactly the five report fields, in declaration order.
void write_error_report(std::ostream& os, const ErrorReport& r);

// Streams `count` controls from the scenario, keeps those the match spec
// accepts against the target, and averages the procedure's loss over them.
// Deterministic given (seed, threads). Throws EmptyRelevantSet when nothing
// is accepted; ValidationError when the scenario or match spec is unsound.
ErrorReport conditional_error(const Scenario& s, const Procedure& proc,
                              const MatchSpec& m, const TargetProblem& target,
                              std::uint64_t count, SeedSpec seed,
                              int threads = 1,
                              std::optional<LossKind> kind = std::nullopt);

// ------------------------------------------------------ sensitivity bands ---

struct BandRow {
  double tau = 0.0;
  double err_min = 0.0;
  double err_max = 0.0;
  double err_nominal = 0.0;  // the first family member's estimate
  double mc_se = 0.0;        // Monte Carlo se of the nominal estimate
  std::uint64_t accepted_min = 0;  // smallest accepted count across the family
  std::uint64_t missing_cells = 0;  // cells whose relevant set was empty
};

struct SensitivityBand {
  std::vector<double> tau_grid;
  std::vector<BandRow> rows;  // one per grid value, same order
};

// CSV with header tau,err_min,err_max,err_nominal,mc_se,accepted_min.
// Missing values print as nan.
void write_band_csv(std::ostream& os, const SensitivityBand& band);

// Conditional error per (tau, prior) cell over the declared prior family;
// min/max/nominal per tau. The scenario template's prior is replaced by each
// family member in turn. Controls are streamed once per family member and
// shared across the tau grid, which is equivalent to per-cell runs because
// acceptance only thresholds the same statistic distance.
SensitivityBand sensitivity_band(const Scenario& s_template,
                                 const Procedure& proc,
                                 const StatisticId& statistic,
                                 const std::vector<double>& tau_grid,
                                 const std::vector<PriorSpec>& prior_family,
                                 const TargetProblem& target,
                                 std::uint64_t count, SeedSpec seed,
                                 int threads = 1, Metric metric = Metric::FoldedLogDiff);

// ---------------------------------------------- finite-population ANOVA ----

struct PopRecord {
  std::vector<int> covariates;  // nested labels, coarsest first
  double outcome = 0.0;
};

struct FinitePopulation {
  std::vector<PopRecord> records;
};

// Ave over the population of (subgroup mean at level r - grand mean)^2,
// where a record's level-r subgroup shares its first r covariate labels.
// Equals Ave[(y - mu)^2] - Ave[(y - mu_r)^2] exactly.
double anova_gain(const FinitePopulation& pop, std::size_t r);

struct TradeoffEstimate {
  double gain = 0.0;  // Ave[(mu_r - mu_{r+1})^2], exact
  double loss = 0.0;  // estimation-noise increase from matching one level deeper
  double net = 0.0;   // gain - loss
  std::uint64_t flagged_replications = 0;  // trials hitting an empty subgroup
};

// Gain in relevance vs loss in robustness from matching on covariate level
// r+1 instead of r, with the loss estimated by re-drawing without-replacement
// trials of the given size.
TradeoffEstimate tradeoff_estimate(const FinitePopulation& pop,
                                   std::size_t trial_size, std::size_t r,
                                   std::size_t replications, SeedSpec seed);

// ---------------------------------------------------- partial matching -----

struct PartialMatchReport {
  double h0 = 0.0;                        // leverage of the target point
  std::vector<double> b_samples;          // Bayesian component draws
  std::vector<double> f_samples;          // prior-free component draws
  std::vector<double> identity_residuals; // per-draw identity error
};

// Leverage x0' (X'X)^{-1} x0. Throws on a rank-deficient design.
double leverage(const Eigen::MatrixXd& design, const Eigen::VectorXd& x0);

// Simulates controls matched on every outcome except the first (Gaussian
// conditioning, no rejection), and splits the target-point estimation error
// into (1-h0) * B' + h0 * F'. The synthetic target outcomes depend only on
// the seed, never on the prior, so F' samples can be compared across priors.
PartialMatchReport partial_match_decomposition(const Eigen::MatrixXd& design,
                                               const Eigen::VectorXd& x0,
                                               const GaussianPrior& prior,
                                               std::uint64_t count,
                                               SeedSpec seed);

}  // namespace inferlab
