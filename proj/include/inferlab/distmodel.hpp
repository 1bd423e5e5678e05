#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

// Declarative descriptions of priors, noise laws, structural models, and
// problems. Everything here is immutable data; sampling lives in genctl.

namespace inferlab {

// ---------------------------------------------------------------- priors ---

struct PointMass {
  double value = 0.0;
  friend bool operator==(const PointMass&, const PointMass&) = default;
};

struct TwoPoint {
  double value0 = 0.0;
  double value1 = 1.0;
  double weight1 = 0.5;  // probability of value1
  friend bool operator==(const TwoPoint&, const TwoPoint&) = default;
};

struct GaussianPrior {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const GaussianPrior&, const GaussianPrior&) = default;
};

struct UniformGrid {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t points = 2;
  friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

struct MixtureComponent;

struct FiniteMixture {
  std::vector<MixtureComponent> components;
  friend bool operator==(const FiniteMixture&, const FiniteMixture&);
};

struct PriorSpec {
  std::variant<PointMass, TwoPoint, GaussianPrior, UniformGrid, FiniteMixture>
      v;
  friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

struct MixtureComponent {
  PriorSpec prior;
  double weight = 0.0;
  friend bool operator==(const MixtureComponent&,
                         const MixtureComponent&) = default;
};

inline bool operator==(const FiniteMixture& a, const FiniteMixture& b) {
  return a.components == b.components;
}

PriorSpec point_mass(double value);
PriorSpec two_point(double v0, double v1, double w1);
PriorSpec gaussian_prior(double mean, double sd);
PriorSpec uniform_grid(double lo, double hi, std::size_t points);

// ----------------------------------------------------------------- noise ---

struct StdNormal {
  friend bool operator==(const StdNormal&, const StdNormal&) = default;
};

struct UnitMeanExponential {
  friend bool operator==(const UnitMeanExponential&,
                         const UnitMeanExponential&) = default;
};

// exp(sigma Z - sigma^2/2); the mean is exactly 1 for every sigma.
struct UnitMeanLogNormal {
  double sigma = 1.0;
  friend bool operator==(const UnitMeanLogNormal&,
                         const UnitMeanLogNormal&) = default;
};

// Law of the p-value under the alternative; Beta(1,1) is the uniform null.
struct BetaPValue {
  double a = 1.0;
  double b = 1.0;
  friend bool operator==(const BetaPValue&, const BetaPValue&) = default;
};

struct BernoulliChannel {
  double sensitivity = 0.9;  // P(positive | sick)
  double specificity = 0.9;  // P(negative | healthy)
  friend bool operator==(const BernoulliChannel&,
                         const BernoulliChannel&) = default;
};

struct TwoLabMixture {
  double sd_lab1 = 1.0;
  double sd_lab2 = 1.0;
  double prob_lab1 = 0.5;
  friend bool operator==(const TwoLabMixture&, const TwoLabMixture&) = default;
};

// Discrete noise over real support values (a point mass at 1 is the
// degenerate multiplicative noise).
struct Categorical {
  std::vector<double> values;
  std::vector<double> probs;
  friend bool operator==(const Categorical&, const Categorical&) = default;
};

struct NoiseSpec {
  std::variant<StdNormal, UnitMeanExponential, UnitMeanLogNormal, BetaPValue,
               BernoulliChannel, TwoLabMixture, Categorical>
      v;
  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

// ------------------------------------------------------------- structure ---

struct Additive {
  friend bool operator==(const Additive&, const Additive&) = default;
};

struct Multiplicative {
  friend bool operator==(const Multiplicative&, const Multiplicative&) = default;
};

struct LinearRegression {
  Eigen::MatrixXd design;            // n x k, full column rank
  Eigen::VectorXd target_covariates; // x0, length k
  friend bool operator==(const LinearRegression& a, const LinearRegression& b) {
    return a.design.rows() == b.design.rows() &&
           a.design.cols() == b.design.cols() &&
           a.target_covariates.size() == b.target_covariates.size() &&
           a.design == b.design && a.target_covariates == b.target_covariates;
  }
};

struct PValueChannel {
  friend bool operator==(const PValueChannel&, const PValueChannel&) = default;
};

struct DiagnosticTest {
  friend bool operator==(const DiagnosticTest&, const DiagnosticTest&) = default;
};

struct MarkerPanel {
  std::size_t n_subjects = 1;
  std::size_t n_markers = 1;
  double selection_threshold = 0.05;  // two-sided p-value cut
  friend bool operator==(const MarkerPanel&, const MarkerPanel&) = default;
};

struct StructuralModel {
  std::variant<Additive, Multiplicative, LinearRegression, PValueChannel,
               DiagnosticTest, MarkerPanel>
      v;
  friend bool operator==(const StructuralModel&,
                         const StructuralModel&) = default;
};

// -------------------------------------------------------------- scenario ---

struct Scenario {
  PriorSpec prior;
  NoiseSpec noise;
  StructuralModel structure;
  std::size_t n = 1;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Returns every invariant violation; an empty list means the scenario is
// valid. Violations are data, not failures.
std::vector<std::string> validate_scenario(const Scenario& s);

// ------------------------------------------------------------ data values ---

struct RealSeq {
  std::vector<double> values;
  friend bool operator==(const RealSeq&, const RealSeq&) = default;
};

struct LabMeasurements {
  std::vector<double> values;
  std::vector<int> labs;  // 1 or 2, parallel to values
  friend bool operator==(const LabMeasurements&,
                         const LabMeasurements&) = default;
};

struct PValue {
  double value = 0.5;
  friend bool operator==(const PValue&, const PValue&) = default;
};

struct TestResults {
  std::vector<int> results;  // 1 = positive, 0 = negative
  friend bool operator==(const TestResults&, const TestResults&) = default;
};

struct RegressionOutcomes {
  std::vector<double> values;
  friend bool operator==(const RegressionOutcomes&,
                         const RegressionOutcomes&) = default;
};

struct MarkerEstimates {
  std::vector<double> estimates;
  double z_threshold = 1.96;  // |estimate| above this is "selected"
  friend bool operator==(const MarkerEstimates&,
                         const MarkerEstimates&) = default;
};

using DataValue = std::variant<RealSeq, LabMeasurements, PValue, TestResults,
                               RegressionOutcomes, MarkerEstimates>;

std::size_t data_size(const DataValue& d);
std::string data_shape_name(const DataValue& d);

// -------------------------------------------------------------- problems ---

// One simulated (D', theta') pair. truth has one entry for scalar estimands
// and one entry per marker for panel scenarios. The stats cache is
// write-once per key and safe to probe from concurrent workers.
class ControlProblem {
 public:
  ControlProblem() = default;
  ControlProblem(DataValue data, std::vector<double> truth)
      : data_(std::move(data)), truth_(std::move(truth)) {}

  ControlProblem(const ControlProblem& o) : data_(o.data_), truth_(o.truth_) {
    std::lock_guard<std::mutex> lock(o.mu_);
    cache_ = o.cache_;
  }
  ControlProblem& operator=(const ControlProblem& o) {
    if (this != &o) {
      data_ = o.data_;
      truth_ = o.truth_;
      std::lock_guard<std::mutex> lock(o.mu_);
      cache_ = o.cache_;
    }
    return *this;
  }

  const DataValue& data() const { return data_; }
  const std::vector<double>& truth() const { return truth_; }
  double scalar_truth() const;

  // Returns the cached value for key, or computes, stores, and returns it.
  template <typename Fn>
  double stat_cached(std::uint64_t key, Fn&& compute) const {
    {
      std::lock_guard<std::mutex> lock(mu_);
      for (const auto& [k, v] : cache_) {
        if (k == key) return v;
      }
    }
    double value = compute();
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [k, v] : cache_) {
      if (k == key) return v;  // another worker got here first
    }
    cache_.emplace_back(key, value);
    return value;
  }

 private:
  DataValue data_;
  std::vector<double> truth_;
  mutable std::vector<std::pair<std::uint64_t, double>> cache_;
  mutable std::mutex mu_;
};

struct TargetProblem {
  DataValue data;
  std::optional<double> known_truth;  // only for synthetic self-tests
};

}  // namespace inferlab
