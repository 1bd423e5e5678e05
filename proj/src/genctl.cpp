#include "inferlab/genctl.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "inferlab/errors.hpp"
#include "inferlab/mathutil.hpp"

namespace inferlab {

namespace {

std::size_t sample_index(const std::vector<double>& probs, rng::Engine& g) {
  double u = rng::u01(g);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  return probs.size() - 1;
}

}  // namespace

Eigen::MatrixXd ones_design(std::size_t rows) {
  if (rows == 0) throw std::domain_error("design needs at least one row");
  return Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(rows), 1);
}

Eigen::MatrixXd seeded_design(std::size_t rows, std::size_t cols,
                              std::uint64_t seed) {
  if (rows == 0 || cols == 0) {
    throw std::domain_error("design needs at least one row and one column");
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  rng::Engine g = rng::engine_for(SeedSpec{seed, 0x5EEDED}, 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < x.cols(); ++j) x(i, j) = rng::normal(g);
  }
  return x;
}

double sample_prior(const PriorSpec& prior, rng::Engine& g) {
  if (const auto* pm = std::get_if<PointMass>(&prior.v)) return pm->value;
  if (const auto* tp = std::get_if<TwoPoint>(&prior.v)) {
    return rng::u01(g) < tp->weight1 ? tp->value1 : tp->value0;
  }
  if (const auto* gp = std::get_if<GaussianPrior>(&prior.v)) {
    return gp->mean + gp->sd * rng::normal(g);
  }
  if (const auto* ug = std::get_if<UniformGrid>(&prior.v)) {
    if (ug->points == 1) return ug->lo;
    std::uint64_t i = g() % ug->points;
    return ug->lo + (ug->hi - ug->lo) * static_cast<double>(i) /
                        static_cast<double>(ug->points - 1);
  }
  const auto& mix = std::get<FiniteMixture>(prior.v);
  double u = rng::u01(g);
  double acc = 0.0;
  for (const auto& c : mix.components) {
    acc += c.weight;
    if (u < acc) return sample_prior(c.prior, g);
  }
  return sample_prior(mix.components.back().prior, g);
}

double sample_prior_positive(const PriorSpec& prior, rng::Engine& g) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    double v = sample_prior(prior, g);
    if (v > 0.0) return v;
  }
  throw std::domain_error(
      "prior puts essentially no mass on (0, inf); cannot draw a positive "
      "truth");
}

double sample_real_noise(const NoiseSpec& noise, rng::Engine& g) {
  if (std::holds_alternative<StdNormal>(noise.v)) return rng::normal(g);
  if (std::holds_alternative<UnitMeanExponential>(noise.v)) {
    return rng::exponential(g);
  }
  if (const auto* ln = std::get_if<UnitMeanLogNormal>(&noise.v)) {
    return rng::lognormal_unit(g, ln->sigma);
  }
  if (const auto* c = std::get_if<Categorical>(&noise.v)) {
    return c->values[sample_index(c->probs, g)];
  }
  throw std::domain_error("noise law is not real-valued on this scale");
}

ControlGenerator::ControlGenerator(Scenario scenario, SeedSpec seed)
    : scenario_(std::move(scenario)), seed_(seed) {
  auto violations = validate_scenario(scenario_);
  if (!violations.empty()) {
    throw ValidationError("invalid scenario: " + violations.front());
  }
  if (const auto* mp = std::get_if<MarkerPanel>(&scenario_.structure.v)) {
    marker_z_threshold_ = norm_quantile(1.0 - mp->selection_threshold / 2.0);
  }
}

ControlProblem ControlGenerator::problem(std::uint64_t index) const {
  rng::Engine g = rng::engine_for(seed_, index);
  const std::size_t n = scenario_.n;

  if (std::holds_alternative<Additive>(scenario_.structure.v)) {
    if (const auto* tl = std::get_if<TwoLabMixture>(&scenario_.noise.v)) {
      double theta = sample_prior(scenario_.prior, g);
      LabMeasurements d;
      d.values.reserve(n);
      d.labs.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        int lab = rng::u01(g) < tl->prob_lab1 ? 1 : 2;
        double sd = lab == 1 ? tl->sd_lab1 : tl->sd_lab2;
        d.labs.push_back(lab);
        d.values.push_back(theta + sd * rng::normal(g));
      }
      return ControlProblem(std::move(d), {theta});
    }
    double theta = sample_prior(scenario_.prior, g);
    RealSeq d;
    d.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      d.values.push_back(theta + sample_real_noise(scenario_.noise, g));
    }
    return ControlProblem(std::move(d), {theta});
  }

  if (std::holds_alternative<Multiplicative>(scenario_.structure.v)) {
    double theta = sample_prior_positive(scenario_.prior, g);
    RealSeq d;
    d.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      d.values.push_back(theta * sample_real_noise(scenario_.noise, g));
    }
    return ControlProblem(std::move(d), {theta});
  }

  if (std::holds_alternative<PValueChannel>(scenario_.structure.v)) {
    const auto& bp = std::get<BetaPValue>(scenario_.noise.v);
    double theta = sample_prior(scenario_.prior, g);
    double p = theta == 0.0 ? rng::u01_open(g) : rng::beta_draw(g, bp.a, bp.b);
    return ControlProblem(PValue{p}, {theta});
  }

  if (std::holds_alternative<DiagnosticTest>(scenario_.structure.v)) {
    const auto& ch = std::get<BernoulliChannel>(scenario_.noise.v);
    double theta = sample_prior(scenario_.prior, g);
    TestResults d;
    d.results.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      double p_pos = theta == 1.0 ? ch.sensitivity : 1.0 - ch.specificity;
      d.results.push_back(rng::u01(g) < p_pos ? 1 : 0);
    }
    return ControlProblem(std::move(d), {theta});
  }

  if (const auto* lr = std::get_if<LinearRegression>(&scenario_.structure.v)) {
    const auto k = lr->design.cols();
    std::vector<double> beta(static_cast<std::size_t>(k));
    for (auto& b : beta) b = sample_prior(scenario_.prior, g);
    RegressionOutcomes d;
    d.values.reserve(n);
    for (Eigen::Index i = 0; i < lr->design.rows(); ++i) {
      double mean = 0.0;
      for (Eigen::Index j = 0; j < k; ++j) {
        mean += lr->design(i, j) * beta[static_cast<std::size_t>(j)];
      }
      d.values.push_back(mean + rng::normal(g));
    }
    return ControlProblem(std::move(d), std::move(beta));
  }

  const auto& mp = std::get<MarkerPanel>(scenario_.structure.v);
  std::vector<double> effects(mp.n_markers);
  for (auto& e : effects) e = sample_prior(scenario_.prior, g);
  MarkerEstimates d;
  d.z_threshold = marker_z_threshold_;
  d.estimates.reserve(mp.n_markers);
  for (double e : effects) d.estimates.push_back(e + rng::normal(g));
  return ControlProblem(std::move(d), std::move(effects));
}

std::vector<ControlProblem> simulate_controls(const Scenario& s,
                                              std::uint64_t count,
                                              SeedSpec seed) {
  ControlGenerator gen(s, seed);
  std::vector<ControlProblem> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(gen.problem(i));
  return out;
}

Scenario plugin_scenario(const Scenario& s, double estimate) {
  if (std::holds_alternative<Multiplicative>(s.structure.v) &&
      estimate <= 0.0) {
    throw std::domain_error(
        "plug-in estimate must be positive for a multiplicative model");
  }
  Scenario out = s;
  out.prior = point_mass(estimate);
  return out;
}

namespace {

void dump_data(std::ostream& os, const DataValue& d) {
  std::visit(
      [&os](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, RealSeq> ||
                      std::is_same_v<T, RegressionOutcomes>) {
          for (std::size_t i = 0; i < v.values.size(); ++i) {
            os << (i ? "\t" : "") << v.values[i];
          }
        } else if constexpr (std::is_same_v<T, LabMeasurements>) {
          for (std::size_t i = 0; i < v.values.size(); ++i) {
            os << (i ? "\t" : "") << v.values[i] << ":" << v.labs[i];
          }
        } else if constexpr (std::is_same_v<T, PValue>) {
          os << v.value;
        } else if constexpr (std::is_same_v<T, TestResults>) {
          for (std::size_t i = 0; i < v.results.size(); ++i) {
            os << (i ? "\t" : "") << v.results[i];
          }
        } else if constexpr (std::is_same_v<T, MarkerEstimates>) {
          for (std::size_t i = 0; i < v.estimates.size(); ++i) {
            os << (i ? "\t" : "") << v.estimates[i];
          }
        }
      },
      d);
}

}  // namespace

void dump_problems(std::ostream& os, const Scenario& s, std::uint64_t count,
                   SeedSpec seed) {
  ControlGenerator gen(s, seed);
  for (std::uint64_t i = 0; i < count; ++i) {
    ControlProblem p = gen.problem(i);
    for (std::size_t j = 0; j < p.truth().size(); ++j) {
      os << (j ? "\t" : "") << p.truth()[j];
    }
    os << "\t|\t";
    dump_data(os, p.data());
    os << "\n";
  }
}

}  // namespace inferlab
