#include <doctest.h>

#include <cmath>
#include <vector>

#include "inferlab/genctl.hpp"
#include "inferlab/mathutil.hpp"
#include "inferlab/procedures.hpp"

using namespace inferlab;

namespace {

// exact squared-error risk of an estimator under Binomial(n, theta)
template <typename Est>
double binomial_risk(std::uint64_t n, double theta, Est est) {
  double risk = 0.0;
  for (std::uint64_t x = 0; x <= n; ++x) {
    double logp = std::lgamma(double(n + 1)) - std::lgamma(double(x + 1)) -
                  std::lgamma(double(n - x + 1));
    if (x > 0) logp += double(x) * std::log(theta);
    if (x < n) logp += double(n - x) * std::log1p(-theta);
    if (theta == 0.0) logp = (x == 0) ? 0.0 : -1e300;
    if (theta == 1.0) logp = (x == n) ? 0.0 : -1e300;
    double d = est(x, n) - theta;
    risk += std::exp(logp) * d * d;
  }
  return risk;
}

}  // namespace

TEST_CASE("minimax binomial point values") {
  CHECK(minimax_binomial_estimate(2, 4) == doctest::Approx(0.5));
  CHECK(minimax_binomial_estimate(0, 4) == doctest::Approx(1.0 / 6.0));
  CHECK(minimax_binomial_estimate(4, 4) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("minimax binomial risk is constant, sample mean is not") {
  const std::uint64_t n = 4;
  double mm_min = 1e300, mm_max = -1e300;
  for (int i = 0; i <= 100; ++i) {
    double theta = i / 100.0;
    double r = binomial_risk(n, theta, [](std::uint64_t x, std::uint64_t m) {
      return minimax_binomial_estimate(x, m);
    });
    mm_min = std::min(mm_min, r);
    mm_max = std::max(mm_max, r);
  }
  CHECK((mm_max - mm_min) / mm_max < 1e-10);
  // closed form n / (4 (n + sqrt n)^2)
  CHECK(mm_max == doctest::Approx(1.0 / 36.0).epsilon(1e-12));

  auto mean_est = [](std::uint64_t x, std::uint64_t m) {
    return double(x) / double(m);
  };
  CHECK(binomial_risk(n, 0.5, mean_est) > mm_max);
  CHECK(binomial_risk(n, 0.0, mean_est) < mm_min);
}

TEST_CASE("pivot constant closed forms") {
  // single exponential draw: c solves F(c) = level
  CHECK(pivot_c(NoiseSpec{UnitMeanExponential{}}, 1, 0.95) ==
        doctest::Approx(-std::log(0.05)).epsilon(1e-12));
  CHECK(pivot_c(NoiseSpec{UnitMeanExponential{}}, 1, 0.5) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // unit-mean lognormal: quantile of exp(sigma Z - sigma^2/2)
  double sigma = 0.5;
  CHECK(pivot_c(NoiseSpec{UnitMeanLogNormal{sigma}}, 1, 0.95) ==
        doctest::Approx(std::exp(sigma * norm_quantile(0.95) -
                                 sigma * sigma / 2.0))
            .epsilon(1e-10));
  CHECK_THROWS(pivot_c(NoiseSpec{UnitMeanExponential{}}, 1, 0.0));
  CHECK_THROWS(pivot_c(NoiseSpec{StdNormal{}}, 1, 0.95));
}

TEST_CASE("monte carlo pivot constant approximates the gamma quantile") {
  // mean of 5 unit exponentials ~ Gamma(5, rate 5); its 0.95 quantile is
  // 9.15352.../5 from the gamma distribution.
  double c = pivot_c(NoiseSpec{UnitMeanExponential{}}, 5, 0.95);
  CHECK(c == doctest::Approx(9.153519 / 5.0).epsilon(2e-3));
  // cached: second call returns the identical constant
  CHECK(pivot_c(NoiseSpec{UnitMeanExponential{}}, 5, 0.95) == c);
}

TEST_CASE("pivot bound divides the mean by the constant") {
  std::vector<double> data{12.1, 8.4, 9.7, 11.3, 10.2};
  double mean = (12.1 + 8.4 + 9.7 + 11.3 + 10.2) / 5.0;
  double c = pivot_c(NoiseSpec{UnitMeanExponential{}}, 5, 0.95);
  CHECK(pivot_bound(data, NoiseSpec{UnitMeanExponential{}}, 0.95) ==
        doctest::Approx(mean / c).epsilon(1e-12));
  CHECK_THROWS(pivot_bound({1.0, -2.0}, NoiseSpec{UnitMeanExponential{}},
                           0.95));
}

TEST_CASE("apply runs each family of rules") {
  DataValue seq{RealSeq{{1.0, 2.0, 3.0}}};

  Decision d = inferlab::apply(Procedure{PointEst{SampleMeanEst{}}}, seq);
  CHECK(std::get<Estimate>(d).value == doctest::Approx(2.0));

  d = inferlab::apply(Procedure{IntervalProc{AdditiveLower{1.5}}}, seq);
  CHECK(std::get<IntervalDecision>(d).lo == doctest::Approx(0.5));

  d = inferlab::apply(Procedure{IntervalProc{ZInterval{0.95}}}, seq);
  auto zint = std::get<IntervalDecision>(d);
  double half = norm_quantile(0.975) / std::sqrt(3.0);
  CHECK(zint.lo == doctest::Approx(2.0 - half));
  CHECK(zint.hi == doctest::Approx(2.0 + half));

  d = inferlab::apply(Procedure{TestProc{ZTest{1.96}}}, seq);
  CHECK(std::get<TestDecision>(d).reject == (std::sqrt(3.0) * 2.0 > 1.96));

  d = inferlab::apply(Procedure{TestProc{PThresholdTest{0.05}}},
            DataValue{PValue{0.049}});
  CHECK(std::get<TestDecision>(d).reject);

  TestResults tr;
  tr.results = {1};
  d = inferlab::apply(Procedure{TestProc{DiagnosticPredict{}}}, DataValue{tr});
  CHECK(std::get<TestDecision>(d).reject);

  // unresolved pivot cannot run
  CHECK_THROWS_AS(inferlab::apply(Procedure{IntervalProc{MultiplicativePivotLower{}}},
                        seq),
                  std::domain_error);
}

TEST_CASE("resolve fills in the pivot constant") {
  Scenario s{point_mass(10.0), NoiseSpec{UnitMeanExponential{}},
             StructuralModel{Multiplicative{}}, 5};
  Procedure raw{IntervalProc{MultiplicativePivotLower{0.95, 0.0}}};
  Procedure ready = resolve_procedure(raw, s);
  const auto& mp = std::get<MultiplicativePivotLower>(
      std::get<IntervalProc>(ready.v).rule);
  CHECK(mp.resolved_c ==
        doctest::Approx(pivot_c(s.noise, 5, 0.95)).epsilon(1e-12));
  DataValue seq{RealSeq{{12.1, 8.4, 9.7, 11.3, 10.2}}};
  auto iv = std::get<IntervalDecision>(inferlab::apply(ready, seq));
  CHECK(iv.lo == doctest::Approx(10.34 / mp.resolved_c));
}

TEST_CASE("losses score against the truth") {
  Procedure mean{PointEst{SampleMeanEst{}}};
  Decision est = Estimate{2.0};
  LossValue sq = loss(mean, est, {3.0});
  CHECK(sq.kind == LossKind::SquaredError);
  CHECK(sq.delta == doctest::Approx(1.0));
  LossValue ab = loss(mean, est, {3.0}, LossKind::AbsError);
  CHECK(ab.kind == LossKind::AbsError);
  CHECK(ab.delta == doctest::Approx(1.0));

  Procedure lower{IntervalProc{AdditiveLower{1.0}}};
  LossValue hit = loss(lower, IntervalDecision{1.5, 1e300}, {2.0});
  CHECK(hit.kind == LossKind::Miss);
  CHECK(hit.delta == 0.0);
  LossValue miss = loss(lower, IntervalDecision{2.5, 1e300}, {2.0});
  CHECK(miss.delta == 1.0);

  Procedure test{TestProc{ZTest{1.96}}};
  // truth zero: rejecting is the error
  CHECK(loss(test, TestDecision{true}, {0.0}).delta == 1.0);
  CHECK(loss(test, TestDecision{false}, {0.0}).delta == 0.0);
  CHECK(loss(test, TestDecision{false}, {1.0}).delta == 1.0);
}

TEST_CASE("z test rejects exactly when zero leaves the z interval") {
  rng::Engine g = rng::engine_for(SeedSpec{31, 0}, 0);
  Procedure test{TestProc{ZTest{norm_quantile(0.975)}}};
  Procedure interval{IntervalProc{ZInterval{0.95}}};
  for (int trial = 0; trial < 500; ++trial) {
    RealSeq seq;
    int n = 1 + int(rng::u01(g) * 8);
    for (int i = 0; i < n; ++i) {
      seq.values.push_back(3.0 * rng::normal(g));
    }
    DataValue d{seq};
    bool rejected = std::get<TestDecision>(inferlab::apply(test, d)).reject;
    auto iv = std::get<IntervalDecision>(inferlab::apply(interval, d));
    bool zero_outside = (0.0 < iv.lo) || (0.0 > iv.hi);
    CHECK(rejected == zero_outside);
  }
}

TEST_CASE("additive lower bound coverage decays with the scale") {
  // multiplicative truth: coverage of (mean - b, inf) falls as theta grows
  auto coverage = [](double theta) {
    Scenario s{point_mass(theta), NoiseSpec{UnitMeanExponential{}},
               StructuralModel{Multiplicative{}}, 5};
    ControlGenerator gen(s, SeedSpec{32, 0});
    Procedure lower{IntervalProc{AdditiveLower{1.0}}};
    const int n = 100000;
    int covered = 0;
    for (int i = 0; i < n; ++i) {
      ControlProblem p = gen.problem(i);
      auto iv = std::get<IntervalDecision>(inferlab::apply(lower, p.data()));
      covered += (iv.lo <= p.scalar_truth());
    }
    return double(covered) / n;
  };
  double c1 = coverage(1.0);
  double c10 = coverage(10.0);
  double c100 = coverage(100.0);
  CHECK(c1 > c10);
  CHECK(c10 > c100);
  CHECK(c1 - c100 > 0.2);
}

TEST_CASE("procedure names are stable") {
  CHECK(procedure_name(Procedure{PointEst{SampleMeanEst{}}}) == "sample_mean");
  CHECK(procedure_name(Procedure{IntervalProc{MultiplicativePivotLower{}}}) ==
        "pivot_lower");
  CHECK(procedure_name(Procedure{TestProc{ZTest{}}}) == "z_test");
}
