#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "inferlab/distmodel.hpp"
#include "inferlab/rng.hpp"

// Turns a Scenario into a reproducible stream of control problems. Each
// problem is a pure function of (scenario, seed, index), so any worker can
// generate any index range and reproduce a single-threaded sweep exactly.

namespace inferlab {

class ControlGenerator {
 public:
  // Throws ValidationError naming the first violation if the scenario is
  // invalid.
  ControlGenerator(Scenario scenario, SeedSpec seed);

  const Scenario& scenario() const { return scenario_; }
  const SeedSpec& seed() const { return seed_; }

  ControlProblem problem(std::uint64_t index) const;

 private:
  Scenario scenario_;
  SeedSpec seed_;
  double marker_z_threshold_ = 0.0;  // resolved once for panel scenarios
};

// Materializes `count` problems (indices 0..count-1). Prefer the generator
// for large sweeps; this is for small audits and dumps.
std::vector<ControlProblem> simulate_controls(const Scenario& s,
                                              std::uint64_t count,
                                              SeedSpec seed);

// Returns s with the prior collapsed to PointMass(estimate): the plug-in /
// parametric-bootstrap control population.
Scenario plugin_scenario(const Scenario& s, double estimate);

// One problem per line: truth values, then a tab, then data values.
void dump_problems(std::ostream& os, const Scenario& s, std::uint64_t count,
                   SeedSpec seed);

// Sampling primitives shared with evaluate (prior draws for band sweeps).
// Design-matrix constructors for regression scenarios. The first row doubles
// as the target covariate row.
Eigen::MatrixXd ones_design(std::size_t rows);
// Intercept column plus standard-normal entries, reproducible from the seed.
Eigen::MatrixXd seeded_design(std::size_t rows, std::size_t cols,
                              std::uint64_t seed);

double sample_prior(const PriorSpec& prior, rng::Engine& g);
// Rejection-samples until positive; used by multiplicative structures.
double sample_prior_positive(const PriorSpec& prior, rng::Engine& g);
double sample_real_noise(const NoiseSpec& noise, rng::Engine& g);

}  // namespace inferlab
