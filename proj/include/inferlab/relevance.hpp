// Statistics of a problem's data and the matching predicates that select the
// relevant subset of controls. A statistic is either a real number or a set
// of indices; a MatchSpec pairs a statistic with a tolerance and a metric.
#pragma once

#include <cstdint>
#include <limits>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "inferlab/distmodel.hpp"

namespace inferlab {

// ------------------------------------------------------------- statistics ---

struct SampleSize {
  friend bool operator==(const SampleSize&, const SampleSize&) = default;
};

struct SampleMean {
  friend bool operator==(const SampleMean&, const SampleMean&) = default;
};

// Which measurements came from lab 1, as an index set.
struct LabAssignment {
  friend bool operator==(const LabAssignment&, const LabAssignment&) = default;
};

// |log LR| of a p-value against the Beta(a, b) alternative. Folded so that a
// likelihood ratio of 1/2 is as far from 1 as a ratio of 2.
struct AbsLogLR {
  double a = 1.0;
  double b = 1.0;
  friend bool operator==(const AbsLogLR&, const AbsLogLR&) = default;
};

// The measurement itself; only defined when the data carry a single value.
struct RawValue {
  friend bool operator==(const RawValue&, const RawValue&) = default;
};

// Indices of markers whose |estimate| clears the panel's z threshold.
struct SelectedSet {
  friend bool operator==(const SelectedSet&, const SelectedSet&) = default;
};

// The single diagnostic outcome, 1 = positive.
struct TestResult {
  friend bool operator==(const TestResult&, const TestResult&) = default;
};

// Fraction of measurements assigned to lab 1.
struct CovariateBalance {
  friend bool operator==(const CovariateBalance&,
                         const CovariateBalance&) = default;
};

struct StatisticId {
  std::variant<SampleSize, SampleMean, LabAssignment, AbsLogLR, RawValue,
               SelectedSet, TestResult, CovariateBalance>
      v;
  friend bool operator==(const StatisticId&, const StatisticId&) = default;
};

std::string statistic_name(const StatisticId& id);

using IndexSet = std::set<std::size_t>;
using StatValue = std::variant<double, IndexSet>;

// Evaluates the statistic on raw data. Throws std::domain_error naming the
// statistic and the data shape when the statistic is undefined there.
StatValue extract_statistic(const DataValue& d, const StatisticId& id);
// Same, but real-valued statistics are memoized on the problem.
StatValue extract_statistic(const ControlProblem& p, const StatisticId& id);
StatValue extract_statistic(const TargetProblem& p, const StatisticId& id);

// --------------------------------------------------------------- matching ---

enum class Metric { AbsoluteDiff, FoldedLogDiff, ExactEquality };

struct MatchSpec {
  StatisticId statistic;
  double tolerance = std::numeric_limits<double>::infinity();
  Metric metric = Metric::AbsoluteDiff;
  friend bool operator==(const MatchSpec&, const MatchSpec&) = default;
};

// Distance between two statistic values under a metric. ExactEquality maps
// to 0 / infinity; FoldedLogDiff compares log magnitudes (values that are
// already folded logs, i.e. AbsLogLR, are compared directly).
double metric_distance(const StatValue& a, const StatValue& b, Metric metric,
                       const StatisticId& id);

// True iff the control's statistic is within tolerance of the target's.
bool accept(const ControlProblem& p, const TargetProblem& target,
            const MatchSpec& m);

// ------------------------------------------------- likelihood-ratio tools ---

// Density ratio of Beta(a, b) against the uniform null at p. Diverges at the
// boundary for a < 1 or b < 1, so p must lie strictly inside (0, 1).
double lr(double p, double a, double b);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// The set {p' in (0,1) : | |log lr(p')| - |log lr(p_obs)| | <= tau } as
// sorted, pairwise disjoint closed intervals. tau = infinity gives (0, 1).
std::vector<Interval> equal_precision_region(double p_obs, double tau,
                                             double a, double b);

}  // namespace inferlab
