#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "inferlab/distmodel.hpp"
#include "inferlab/genctl.hpp"

using namespace inferlab;

namespace {

bool has_issue(const std::vector<std::string>& issues, const char* needle) {
  for (const auto& s : issues) {
    if (s.find(needle) != std::string::npos) return true;
  }
  return false;
}

// one-sample Kolmogorov-Smirnov statistic against Uniform(0,1)
double ks_uniform(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  double n = double(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    d = std::max(d, std::fabs((i + 1) / n - xs[i]));
    d = std::max(d, std::fabs(xs[i] - i / n));
  }
  return d;
}

}  // namespace

TEST_CASE("scenarios built from identical fields compare equal") {
  Scenario a{two_point(0.0, 1.0, 0.5), NoiseSpec{BetaPValue{0.02, 1.35}},
             StructuralModel{PValueChannel{}}, 1};
  Scenario b{two_point(0.0, 1.0, 0.5), NoiseSpec{BetaPValue{0.02, 1.35}},
             StructuralModel{PValueChannel{}}, 1};
  CHECK(a == b);
  b.prior = two_point(0.0, 1.0, 0.25);
  CHECK(a != b);
}

TEST_CASE("prior factories and equality") {
  CHECK(point_mass(3.0) == point_mass(3.0));
  CHECK(point_mass(3.0) != point_mass(4.0));
  CHECK(gaussian_prior(0.0, 1.0) != gaussian_prior(0.0, 2.0));
  CHECK(uniform_grid(0.0, 1.0, 11) == uniform_grid(0.0, 1.0, 11));
}

TEST_CASE("validation flags structural mismatches") {
  Scenario bad{point_mass(1.0), NoiseSpec{StdNormal{}},
               StructuralModel{Multiplicative{}}, 5};
  auto issues = validate_scenario(bad);
  CHECK(has_issue(issues, "multiplicative model requires positive unit-mean noise"));

  Eigen::MatrixXd deficient(4, 2);
  deficient << 1, 2, 2, 4, 3, 6, 4, 8;  // second column is 2x the first
  LinearRegression reg;
  reg.design = deficient;
  reg.target_covariates = deficient.row(0).transpose();
  Scenario bad2{gaussian_prior(0.0, 1.0), NoiseSpec{StdNormal{}},
                StructuralModel{reg}, 4};
  CHECK(has_issue(validate_scenario(bad2), "design not full rank"));

  Scenario ok{point_mass(10.0), NoiseSpec{UnitMeanExponential{}},
              StructuralModel{Multiplicative{}}, 5};
  CHECK(validate_scenario(ok).empty());
}

TEST_CASE("unit-mean noise laws average to one") {
  rng::Engine g = rng::engine_for(SeedSpec{11, 0}, 0);
  const int n = 1000000;
  for (NoiseSpec noise : {NoiseSpec{UnitMeanExponential{}},
                          NoiseSpec{UnitMeanLogNormal{0.8}}}) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = sample_real_noise(noise, g);
      CHECK(x > 0.0);
      s += x;
      s2 += x * x;
    }
    double mean = s / n;
    double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(std::fabs(mean - 1.0) < 5.0 * sd / std::sqrt(double(n)));
  }
}

TEST_CASE("flat beta p-values are uniform") {
  // a Beta(1,1) alternative makes the p-value channel emit uniform draws
  Scenario s{two_point(0.0, 1.0, 1.0), NoiseSpec{BetaPValue{1.0, 1.0}},
             StructuralModel{PValueChannel{}}, 1};
  ControlGenerator gen(s, SeedSpec{12, 0});
  std::vector<double> xs(100000);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = std::get<PValue>(gen.problem(i).data()).value;
  }
  // 1% asymptotic critical value: 1.6276 / sqrt(n)
  CHECK(ks_uniform(std::move(xs)) < 1.6276 / std::sqrt(100000.0));
}

TEST_CASE("data shapes report their sizes") {
  CHECK(data_size(DataValue{RealSeq{{1.0, 2.0, 3.0}}}) == 3);
  CHECK(data_size(DataValue{PValue{0.5}}) == 1);
  LabMeasurements lm;
  lm.values = {0.7, 0.2};
  lm.labs = {1, 2};
  CHECK(data_size(DataValue{lm}) == 2);
  CHECK(data_shape_name(DataValue{PValue{0.5}}) == "p-value");
}

TEST_CASE("two-lab noise uses both labs") {
  rng::Engine g = rng::engine_for(SeedSpec{13, 0}, 0);
  Scenario s{point_mass(0.0), NoiseSpec{TwoLabMixture{1.0, 100.0, 0.5}},
             StructuralModel{Additive{}}, 1};
  ControlGenerator gen(s, SeedSpec{13, 0});
  int lab1 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    ControlProblem p = gen.problem(i);
    const auto& lm = std::get<LabMeasurements>(p.data());
    REQUIRE(lm.labs.size() == 1);
    lab1 += (lm.labs[0] == 1);
  }
  double frac = double(lab1) / n;
  CHECK(std::fabs(frac - 0.5) < 4.0 * std::sqrt(0.25 / n));
}
