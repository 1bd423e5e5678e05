#include <doctest.h>

#include <cmath>
#include <string>

#include "inferlab/errors.hpp"
#include "inferlab/scenario_config.hpp"

using namespace inferlab;

TEST_CASE("a full scenario config resolves every field") {
  const char* text =
      "# comment\n"
      "prior = two_point(0, 1, 0.5)\n"
      "noise = beta_pvalue(0.02, 1.35)\n"
      "structure = pvalue_channel\n"
      "n = 1\n"
      "procedure = p_threshold(0.05)\n"
      "match = abs_log_lr(tau=0.5)\n"
      "target = pvalue(0.049)\n"
      "count = 250000\n"
      "seed = 7\n"
      "op = band\n"
      "tau_grid = 0.1:2.0:0.1\n";
  ParsedConfig cfg = parse_config_text(text);
  REQUIRE(cfg.scenario.has_value());
  CHECK(cfg.scenario->prior == two_point(0.0, 1.0, 0.5));
  CHECK(cfg.scenario->n == 1);
  CHECK(cfg.count == 250000);
  REQUIRE(cfg.seed.has_value());
  CHECK(cfg.seed->root_seed == 7);
  CHECK(cfg.op == "band");
  REQUIRE(cfg.match.has_value());
  // the beta alternative's shape flows into the matching statistic
  const auto& stat = std::get<AbsLogLR>(cfg.match->statistic.v);
  CHECK(stat.a == doctest::Approx(0.02));
  CHECK(stat.b == doctest::Approx(1.35));
  CHECK(cfg.match->tolerance == doctest::Approx(0.5));
  CHECK(cfg.match->metric == Metric::FoldedLogDiff);
  REQUIRE(cfg.tau_grid.has_value());
  REQUIRE(cfg.tau_grid->size() == 20);
  CHECK(cfg.tau_grid->front() == doctest::Approx(0.1));
  CHECK(cfg.tau_grid->back() == doctest::Approx(2.0));
}

TEST_CASE("parse errors cite their line") {
  try {
    parse_config_text("prior = point_mass(0)\nwibble = 3\n");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    CHECK(std::string(e.what()).find("wibble") != std::string::npos);
  }

  CHECK_THROWS_AS(parse_config_text("count = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("prior = two_point(0, 1\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_config_text("prior = point_mass(0)\nprior = point_mass(1)\n"),
      ConfigError);
  // scenario keys must come as a complete group
  CHECK_THROWS_AS(parse_config_text("prior = point_mass(0)\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), IoError);
}

TEST_CASE("tau grids are inclusive within float slack") {
  auto grid = parse_tau_grid("0:2:0.1");
  CHECK(grid.size() == 21);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == doctest::Approx(2.0).epsilon(1e-12));

  auto coarse = parse_tau_grid("0:1:0.3");
  REQUIRE(coarse.size() == 4);  // 0, 0.3, 0.6, 0.9
  CHECK(coarse.back() == doctest::Approx(0.9));

  auto singleton = parse_tau_grid("0.5:0.5:1");
  REQUIRE(singleton.size() == 1);
  CHECK(singleton[0] == 0.5);

  CHECK_THROWS_AS(parse_tau_grid("1:0:0.1"), ConfigError);
  CHECK_THROWS_AS(parse_tau_grid("0:1:0"), ConfigError);
  CHECK_THROWS_AS(parse_tau_grid("0:1"), ConfigError);
  CHECK_THROWS_AS(parse_tau_grid("a:b:c"), ConfigError);
}

TEST_CASE("match specs respect their statistic kinds") {
  ParsedConfig cfg = parse_config_text(
      "prior = point_mass(0)\n"
      "noise = two_lab(1, 100, 0.5)\n"
      "structure = additive\n"
      "match = lab_assignment\n");
  REQUIRE(cfg.match.has_value());
  CHECK(cfg.match->metric == Metric::ExactEquality);

  // tau is meaningless for set-valued statistics
  CHECK_THROWS_AS(parse_config_text("prior = point_mass(0)\n"
                                    "noise = two_lab(1, 100, 0.5)\n"
                                    "structure = additive\n"
                                    "match = lab_assignment(tau=0.5)\n"),
                  ConfigError);

  // abs_log_lr without arguments needs a beta noise to inherit from
  CHECK_THROWS_AS(parse_config_text("prior = point_mass(0)\n"
                                    "noise = std_normal\n"
                                    "structure = additive\n"
                                    "match = abs_log_lr\n"),
                  ConfigError);
}

TEST_CASE("populations and pattern inputs parse") {
  ParsedConfig cfg = parse_config_text(
      "population = nested_gaussian(64, 2, 9)\n"
      "trial_size = 16\n"
      "replications = 500\n"
      "op = tradeoff\n");
  REQUIRE(cfg.population.has_value());
  CHECK(cfg.population->records.size() == 64);
  CHECK(cfg.population->records[0].covariates.size() == 2);
  CHECK(cfg.trial_size == 16);
  CHECK(cfg.replications == 500);

  ParsedConfig pat = parse_config_text(
      "sequence = bbooggbbg\n"
      "block_length = 4\n"
      "min_length = 16\n"
      "count = 3\n"
      "op = patterns\n");
  CHECK(pat.sequence == "bbooggbbg");
  CHECK(pat.block_length == 4);
  CHECK(pat.min_length == 16);
}

TEST_CASE("describe reports the resolved pieces deterministically") {
  const char* text =
      "prior = two_point(0, 1, 0.5)\n"
      "noise = bernoulli_channel(0.9, 0.9)\n"
      "structure = diagnostic_test\n"
      "n = 1\n"
      "procedure = diagnostic_predict\n"
      "match = test_result\n"
      "target = test_results(1)\n"
      "op = error\n";
  ParsedConfig cfg = parse_config_text(text);
  std::string a = describe(cfg);
  std::string b = describe(parse_config_text(text));
  CHECK(a == b);
  CHECK(a.find("BernoulliChannel(0.9, 0.9)") != std::string::npos);
  CHECK(a.find("TwoPoint(0, 1, 0.5)") != std::string::npos);
  CHECK(a.find("validation: ok") != std::string::npos);

  // invalid combinations surface as issues, not exceptions
  ParsedConfig bad = parse_config_text(
      "prior = point_mass(1)\n"
      "noise = std_normal\n"
      "structure = multiplicative\n");
  std::string report = describe(bad);
  CHECK(report.find("issue") != std::string::npos);
}

TEST_CASE("procedures parse with their parameters") {
  ParsedConfig cfg = parse_config_text(
      "prior = point_mass(10)\n"
      "noise = unit_exponential\n"
      "structure = multiplicative\n"
      "n = 5\n"
      "procedure = pivot_lower(0.95)\n"
      "match = sample_size\n"
      "target = real_seq(12.1, 8.4, 9.7, 11.3, 10.2)\n");
  REQUIRE(cfg.procedure.has_value());
  const auto& mp = std::get<MultiplicativePivotLower>(
      std::get<IntervalProc>(cfg.procedure->v).rule);
  CHECK(mp.level == doctest::Approx(0.95));
  REQUIRE(cfg.match.has_value());
  CHECK(cfg.match->metric == Metric::ExactEquality);
  CHECK_THROWS_AS(parse_config_text("prior = point_mass(0)\n"
                                    "noise = std_normal\n"
                                    "structure = additive\n"
                                    "procedure = sample_mean(3)\n"),
                  ConfigError);
}
