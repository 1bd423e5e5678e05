#include "inferlab/distmodel.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace inferlab {

PriorSpec point_mass(double value) { return PriorSpec{PointMass{value}}; }

PriorSpec two_point(double v0, double v1, double w1) {
  return PriorSpec{TwoPoint{v0, v1, w1}};
}

PriorSpec gaussian_prior(double mean, double sd) {
  return PriorSpec{GaussianPrior{mean, sd}};
}

PriorSpec uniform_grid(double lo, double hi, std::size_t points) {
  return PriorSpec{UniformGrid{lo, hi, points}};
}

namespace {

constexpr double kWeightTol = 1e-12;

void check_prior(const PriorSpec& p, std::vector<std::string>& out) {
  if (const auto* tp = std::get_if<TwoPoint>(&p.v)) {
    if (!(tp->weight1 >= 0.0 && tp->weight1 <= 1.0)) {
      out.push_back("two-point weight must lie in [0,1]");
    }
  } else if (const auto* g = std::get_if<GaussianPrior>(&p.v)) {
    if (!(g->sd > 0.0)) out.push_back("gaussian prior sd must be positive");
  } else if (const auto* u = std::get_if<UniformGrid>(&p.v)) {
    if (!(u->lo < u->hi)) out.push_back("uniform grid needs lo < hi");
    if (u->points < 1) out.push_back("uniform grid needs at least one point");
  } else if (const auto* m = std::get_if<FiniteMixture>(&p.v)) {
    if (m->components.empty()) {
      out.push_back("mixture has no components");
      return;
    }
    double total = 0.0;
    for (const auto& c : m->components) {
      if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
        out.push_back("mixture weight must lie in [0,1]");
      }
      total += c.weight;
      check_prior(c.prior, out);
    }
    if (std::abs(total - 1.0) > kWeightTol) {
      out.push_back("mixture weights must sum to 1");
    }
  }
}

// True when every draw from the prior is strictly positive. Gaussian priors
// count as positive-support here because multiplicative scenarios sample
// them truncated to (0, inf); see genctl.
bool prior_positive_support(const PriorSpec& p) {
  if (const auto* pm = std::get_if<PointMass>(&p.v)) return pm->value > 0.0;
  if (const auto* tp = std::get_if<TwoPoint>(&p.v)) {
    return tp->value0 > 0.0 && tp->value1 > 0.0;
  }
  if (std::holds_alternative<GaussianPrior>(p.v)) return true;
  if (const auto* u = std::get_if<UniformGrid>(&p.v)) return u->lo > 0.0;
  if (const auto* m = std::get_if<FiniteMixture>(&p.v)) {
    for (const auto& c : m->components) {
      if (c.weight > 0.0 && !prior_positive_support(c.prior)) return false;
    }
    return true;
  }
  return false;
}

// True when the prior's support is contained in {0,1} (hypothesis-label
// priors for the p-value and diagnostic channels).
bool prior_binary_support(const PriorSpec& p) {
  auto is01 = [](double v) { return v == 0.0 || v == 1.0; };
  if (const auto* pm = std::get_if<PointMass>(&p.v)) return is01(pm->value);
  if (const auto* tp = std::get_if<TwoPoint>(&p.v)) {
    return is01(tp->value0) && is01(tp->value1);
  }
  if (const auto* m = std::get_if<FiniteMixture>(&p.v)) {
    for (const auto& c : m->components) {
      if (c.weight > 0.0 && !prior_binary_support(c.prior)) return false;
    }
    return true;
  }
  return false;
}

void check_noise(const NoiseSpec& n, std::vector<std::string>& out) {
  if (const auto* ln = std::get_if<UnitMeanLogNormal>(&n.v)) {
    if (!(ln->sigma > 0.0)) out.push_back("log-normal sigma must be positive");
  } else if (const auto* bp = std::get_if<BetaPValue>(&n.v)) {
    if (!(bp->a > 0.0 && bp->b > 0.0)) {
      out.push_back("beta p-value parameters must be positive");
    }
  } else if (const auto* bc = std::get_if<BernoulliChannel>(&n.v)) {
    if (!(bc->sensitivity >= 0.0 && bc->sensitivity <= 1.0 &&
          bc->specificity >= 0.0 && bc->specificity <= 1.0)) {
      out.push_back("channel probabilities must lie in [0,1]");
    }
  } else if (const auto* tl = std::get_if<TwoLabMixture>(&n.v)) {
    if (!(tl->sd_lab1 > 0.0 && tl->sd_lab2 > 0.0)) {
      out.push_back("lab standard deviations must be positive");
    }
    if (!(tl->prob_lab1 >= 0.0 && tl->prob_lab1 <= 1.0)) {
      out.push_back("lab assignment probability must lie in [0,1]");
    }
  } else if (const auto* c = std::get_if<Categorical>(&n.v)) {
    if (c->values.empty() || c->values.size() != c->probs.size()) {
      out.push_back("categorical noise needs matching values and probs");
      return;
    }
    double total = 0.0;
    for (double p : c->probs) {
      if (!(p >= 0.0 && p <= 1.0)) {
        out.push_back("categorical probabilities must lie in [0,1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > kWeightTol) {
      out.push_back("categorical probabilities must sum to 1");
    }
  }
}

bool categorical_positive_unit_mean(const Categorical& c) {
  double mean = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (!(c.values[i] > 0.0)) return false;
    mean += c.values[i] * c.probs[i];
  }
  return std::abs(mean - 1.0) <= kWeightTol;
}

// Real-valued noise usable on the additive scale.
bool noise_real_valued(const NoiseSpec& n) {
  return std::holds_alternative<StdNormal>(n.v) ||
         std::holds_alternative<UnitMeanExponential>(n.v) ||
         std::holds_alternative<UnitMeanLogNormal>(n.v) ||
         std::holds_alternative<TwoLabMixture>(n.v) ||
         std::holds_alternative<Categorical>(n.v);
}

bool noise_positive_unit_mean(const NoiseSpec& n) {
  if (std::holds_alternative<UnitMeanExponential>(n.v)) return true;
  if (std::holds_alternative<UnitMeanLogNormal>(n.v)) return true;
  if (const auto* c = std::get_if<Categorical>(&n.v)) {
    return categorical_positive_unit_mean(*c);
  }
  return false;
}

}  // namespace

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> out;
  check_prior(s.prior, out);
  check_noise(s.noise, out);
  if (s.n < 1) out.push_back("sample size must be at least 1");

  if (std::holds_alternative<Additive>(s.structure.v)) {
    if (!noise_real_valued(s.noise)) {
      out.push_back("additive model requires real-valued noise");
    }
  } else if (std::holds_alternative<Multiplicative>(s.structure.v)) {
    if (!noise_positive_unit_mean(s.noise)) {
      out.push_back("multiplicative model requires positive unit-mean noise");
    }
    if (!prior_positive_support(s.prior)) {
      out.push_back("multiplicative model requires a prior with support > 0");
    }
  } else if (const auto* lr = std::get_if<LinearRegression>(&s.structure.v)) {
    if (lr->design.rows() < 1 || lr->design.cols() < 1) {
      out.push_back("design must be nonempty");
    } else {
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lr->design);
      if (qr.rank() < lr->design.cols()) out.push_back("design not full rank");
    }
    if (lr->target_covariates.size() != lr->design.cols()) {
      out.push_back("target covariates length must equal design columns");
    }
    if (!std::holds_alternative<StdNormal>(s.noise.v)) {
      out.push_back("linear regression requires standard normal errors");
    }
    if (static_cast<std::size_t>(lr->design.rows()) != s.n) {
      out.push_back("sample size must equal design rows");
    }
  } else if (std::holds_alternative<PValueChannel>(s.structure.v)) {
    if (!std::holds_alternative<BetaPValue>(s.noise.v)) {
      out.push_back(
          "p-value channel requires a beta p-value law for the alternative");
    }
    if (!prior_binary_support(s.prior)) {
      out.push_back("p-value channel requires a prior supported on {0,1}");
    }
    if (s.n != 1) out.push_back("p-value channel carries a single p-value");
  } else if (std::holds_alternative<DiagnosticTest>(s.structure.v)) {
    if (!std::holds_alternative<BernoulliChannel>(s.noise.v)) {
      out.push_back("diagnostic test requires a bernoulli channel");
    }
    if (!prior_binary_support(s.prior)) {
      out.push_back("diagnostic test requires a prior supported on {0,1}");
    }
  } else if (const auto* mp = std::get_if<MarkerPanel>(&s.structure.v)) {
    if (!(mp->selection_threshold > 0.0 && mp->selection_threshold < 1.0)) {
      out.push_back("selection threshold must lie in (0,1)");
    }
    if (mp->n_markers < 1) out.push_back("panel needs at least one marker");
    if (mp->n_subjects < 1) out.push_back("panel needs at least one subject");
    if (!std::holds_alternative<StdNormal>(s.noise.v)) {
      out.push_back("marker panel requires standard normal estimate noise");
    }
    if (s.n != mp->n_markers) {
      out.push_back("sample size must equal the number of markers");
    }
  }
  return out;
}

std::size_t data_size(const DataValue& d) {
  return std::visit(
      [](const auto& v) -> std::size_t {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RealSeq>) return v.values.size();
        if constexpr (std::is_same_v<T, LabMeasurements>)
          return v.values.size();
        if constexpr (std::is_same_v<T, PValue>) return 1;
        if constexpr (std::is_same_v<T, TestResults>) return v.results.size();
        if constexpr (std::is_same_v<T, RegressionOutcomes>)
          return v.values.size();
        if constexpr (std::is_same_v<T, MarkerEstimates>)
          return v.estimates.size();
      },
      d);
}

std::string data_shape_name(const DataValue& d) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RealSeq>) return "real sequence";
        if constexpr (std::is_same_v<T, LabMeasurements>)
          return "lab measurements";
        if constexpr (std::is_same_v<T, PValue>) return "p-value";
        if constexpr (std::is_same_v<T, TestResults>) return "test results";
        if constexpr (std::is_same_v<T, RegressionOutcomes>)
          return "regression outcomes";
        if constexpr (std::is_same_v<T, MarkerEstimates>)
          return "marker estimates";
      },
      d);
}

double ControlProblem::scalar_truth() const {
  if (truth_.size() != 1) {
    throw std::domain_error("scalar truth requested for vector estimand");
  }
  return truth_[0];
}

}  // namespace inferlab
