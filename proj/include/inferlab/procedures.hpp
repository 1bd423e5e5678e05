// Decision rules under evaluation: point estimators, interval procedures,
// and tests, together with their losses and the pivot machinery that makes
// the multiplicative lower bound prior-free.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "inferlab/distmodel.hpp"

namespace inferlab {

// ------------------------------------------------------------- procedures ---

struct SampleMeanEst {
  friend bool operator==(const SampleMeanEst&, const SampleMeanEst&) = default;
};

// The constant-risk binomial estimator (x + sqrt(n)/2) / (n + sqrt(n)).
struct MinimaxBinomialEst {
  friend bool operator==(const MinimaxBinomialEst&,
                         const MinimaxBinomialEst&) = default;
};

// Report each marker's raw estimate as the estimate of its effect.
struct PlugInMarkerEst {
  friend bool operator==(const PlugInMarkerEst&,
                         const PlugInMarkerEst&) = default;
};

struct PointEst {
  std::variant<SampleMeanEst, MinimaxBinomialEst, PlugInMarkerEst> rule;
  friend bool operator==(const PointEst&, const PointEst&) = default;
};

// One-sided interval (mean - buffer, inf). Coverage depends on the truth.
struct AdditiveLower {
  double buffer = 1.0;
  friend bool operator==(const AdditiveLower&, const AdditiveLower&) = default;
};

// One-sided interval (mean / c, inf) where c is the level-quantile of the
// mean of n noise draws. c must be resolved against a scenario before the
// rule can be applied; see resolve_procedure.
struct MultiplicativePivotLower {
  double level = 0.95;
  double resolved_c = 0.0;  // 0 = not yet resolved
  friend bool operator==(const MultiplicativePivotLower&,
                         const MultiplicativePivotLower&) = default;
};

// Two-sided mean +- z / sqrt(n) under unit-variance additive noise.
struct ZInterval {
  double level = 0.95;
  friend bool operator==(const ZInterval&, const ZInterval&) = default;
};

struct IntervalProc {
  std::variant<AdditiveLower, MultiplicativePivotLower, ZInterval> rule;
  friend bool operator==(const IntervalProc&, const IntervalProc&) = default;
};

struct PThresholdTest {
  double alpha = 0.05;
  friend bool operator==(const PThresholdTest&,
                         const PThresholdTest&) = default;
};

// Reject when sqrt(n) |mean| exceeds the critical value.
struct ZTest {
  double critical = 1.96;
  friend bool operator==(const ZTest&, const ZTest&) = default;
};

// Predict sick iff the single test result is positive.
struct DiagnosticPredict {
  friend bool operator==(const DiagnosticPredict&,
                         const DiagnosticPredict&) = default;
};

struct TestProc {
  std::variant<PThresholdTest, ZTest, DiagnosticPredict> rule;
  friend bool operator==(const TestProc&, const TestProc&) = default;
};

struct Procedure {
  std::variant<PointEst, IntervalProc, TestProc> v;
  friend bool operator==(const Procedure&, const Procedure&) = default;
};

std::string procedure_name(const Procedure& p);

// -------------------------------------------------------------- decisions ---

struct Estimate {
  double value = 0.0;
};

struct EstimateVec {
  std::vector<double> values;
};

struct IntervalDecision {
  double lo = 0.0;
  double hi = 0.0;
};

struct TestDecision {
  bool reject = false;
};

using Decision =
    std::variant<Estimate, EstimateVec, IntervalDecision, TestDecision>;

enum class LossKind { SquaredError, AbsError, Miss, TestError };

struct LossValue {
  double delta = 0.0;
  LossKind kind = LossKind::SquaredError;
};

// -------------------------------------------------------------- operations --

// Runs the rule on the data. Throws std::domain_error on a shape mismatch
// or an unresolved pivot constant.
Decision apply(const Procedure& proc, const DataValue& data);

// Scores a decision against the truth. Intervals always score Miss and
// tests TestError; point estimates default to SquaredError unless kind says
// AbsError.
LossValue loss(const Procedure& proc, const Decision& dec,
               const std::vector<double>& truth,
               std::optional<LossKind> kind = std::nullopt);

// The level-quantile of the mean of n independent draws from the noise law.
// Closed form where one exists, otherwise a cached fixed-seed Monte Carlo
// quantile. The noise must be positive with unit mean.
double pivot_c(const NoiseSpec& noise, std::size_t n, double level);

// Lower bound mean(data) / c. Prior-free: c depends only on noise and n.
double pivot_bound(const std::vector<double>& data, const NoiseSpec& noise,
                   double level);

double minimax_binomial_estimate(std::uint64_t successes, std::uint64_t n);

// Fills in whatever the rule needs from the scenario (currently the pivot
// constant c). Validates rule / scenario compatibility.
Procedure resolve_procedure(const Procedure& proc, const Scenario& s);

}  // namespace inferlab
