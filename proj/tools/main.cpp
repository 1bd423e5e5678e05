// Command-line front door: runs evaluations, bands, and catalog bundles from
// scenario config files, writing plot-ready CSV / JSON / text artifacts.
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "inferlab/canon.hpp"
#include "inferlab/errors.hpp"
#include "inferlab/evaluate.hpp"
#include "inferlab/genctl.hpp"
#include "inferlab/mathutil.hpp"
#include "inferlab/patterns.hpp"
#include "inferlab/procedures.hpp"
#include "inferlab/relevance.hpp"
#include "inferlab/scenario_config.hpp"

using namespace inferlab;

namespace {

struct Options {
  std::string scenario_path;
  std::string canon_id;
  std::string op;
  std::optional<std::uint64_t> count;
  std::optional<std::uint64_t> seed;
  std::string tau_grid_text;
  std::string out_path;
  std::string format;
  int threads = 1;
};

std::string fmt_num(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string csv_num(double v) { return fmt_num("%.12g", v); }

// JSON has no inf/nan literals; both map to null.
std::string json_num(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt_num("%.17g", v);
}

// ------------------------------------------------------------- source load --

ParsedConfig bundle_config(const CanonBundle& b) {
  ParsedConfig cfg;
  cfg.scenario = b.scenario;
  cfg.procedure = b.procedure;
  cfg.match = b.match;
  cfg.target = b.target;
  cfg.count = b.default_count;
  cfg.seed = b.default_seed;
  cfg.op = b.default_op;
  if (!b.default_grid.empty()) cfg.tau_grid = b.default_grid;
  if (!b.prior_family.empty()) cfg.prior_family = b.prior_family;
  cfg.loss_kind = b.loss_kind;
  return cfg;
}

ParsedConfig load_source(const Options& o, const CanonBundle** bundle_out) {
  bool has_file = !o.scenario_path.empty();
  bool has_canon = !o.canon_id.empty();
  if (has_file == has_canon) {
    throw ConfigError("pass exactly one of --scenario FILE or --canon ID");
  }
  if (has_canon) {
    const CanonBundle* b = find_canon(o.canon_id);
    if (!b) {
      throw ConfigError("unknown canon id '" + o.canon_id +
                        "'; see `inferlab canon list`");
    }
    *bundle_out = b;
    return bundle_config(*b);
  }
  *bundle_out = nullptr;
  return parse_config_file(o.scenario_path);
}

// --------------------------------------------------------------- defaults --

SeedSpec resolve_seed(const Options& o, const ParsedConfig& cfg) {
  if (o.seed) return SeedSpec{*o.seed, 0};
  if (cfg.seed) return *cfg.seed;
  if (const char* env = std::getenv("INFERLAB_SEED")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw ConfigError("INFERLAB_SEED is not an unsigned integer");
    }
    return SeedSpec{static_cast<std::uint64_t>(v), 0};
  }
  return SeedSpec{20260819, 0};
}

std::uint64_t resolve_count(const Options& o, const ParsedConfig& cfg,
                            std::uint64_t fallback) {
  if (o.count) {
    if (*o.count == 0) throw ConfigError("--count must be >= 1");
    return *o.count;
  }
  if (cfg.count) return *cfg.count;
  return fallback;
}

std::optional<std::vector<double>> resolve_grid(const Options& o,
                                                const ParsedConfig& cfg) {
  if (!o.tau_grid_text.empty()) return parse_tau_grid(o.tau_grid_text);
  if (cfg.tau_grid) return cfg.tau_grid;
  return std::nullopt;
}

std::string pick_format(const std::string& requested,
                        const std::string& fallback,
                        std::initializer_list<const char*> allowed,
                        const char* op) {
  std::string f = requested.empty() ? fallback : requested;
  for (const char* a : allowed) {
    if (f == a) return f;
  }
  throw ConfigError(std::string("op ") + op + " does not support --format " +
                    f);
}

const Scenario& need_scenario(const ParsedConfig& cfg, const char* op) {
  if (!cfg.scenario) {
    throw ConfigError(std::string("op ") + op +
                      " needs a scenario (prior, noise, structure)");
  }
  std::vector<std::string> issues = validate_scenario(*cfg.scenario);
  if (!issues.empty()) {
    throw ValidationError("invalid scenario: " + issues.front());
  }
  return *cfg.scenario;
}

// ------------------------------------------------------------------ output --

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to stdout");
    return;
  }
  std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open output file: " + tmp);
    out << content;
    out.flush();
    if (!out) {
      std::remove(tmp.c_str());
      throw IoError("failed writing output file: " + tmp);
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("cannot move output into place: " + path);
  }
}

// -------------------------------------------------------------- operations --

std::string op_error(const ParsedConfig& cfg, SeedSpec seed,
                     std::uint64_t count, int threads,
                     const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "error");
  if (!cfg.procedure) throw ConfigError("op error needs a procedure");
  if (!cfg.match) throw ConfigError("op error needs a match rule");
  if (!cfg.target) throw ConfigError("op error needs a target");
  ErrorReport rep = conditional_error(s, *cfg.procedure, *cfg.match,
                                      *cfg.target, count, seed, threads,
                                      cfg.loss_kind);
  std::ostringstream os;
  if (fmt == "json") {
    write_error_report(os, rep);
  } else if (fmt == "csv") {
    os << "estimate,mc_se,accepted,generated,acceptance_rate\n"
       << csv_num(rep.estimate) << "," << csv_num(rep.mc_se) << ","
       << rep.accepted << "," << rep.generated << ","
       << csv_num(rep.acceptance_rate) << "\n";
  } else {
    os << "estimate: " << csv_num(rep.estimate) << "\n"
       << "mc_se: " << csv_num(rep.mc_se) << "\n"
       << "accepted: " << rep.accepted << "\n"
       << "generated: " << rep.generated << "\n"
       << "acceptance_rate: " << csv_num(rep.acceptance_rate) << "\n";
  }
  return os.str();
}

// The band sweeps the declared family plus, for every TwoPoint member, its
// weight-0 and weight-1 endpoint variants. The nominal prior stays first.
std::vector<PriorSpec> with_two_point_endpoints(std::vector<PriorSpec> fam) {
  std::vector<PriorSpec> extra;
  for (const PriorSpec& p : fam) {
    if (const TwoPoint* tp = std::get_if<TwoPoint>(&p.v)) {
      for (double w : {0.0, 1.0}) {
        TwoPoint e = *tp;
        e.weight1 = w;
        extra.push_back(PriorSpec{e});
      }
    }
  }
  for (const PriorSpec& e : extra) {
    if (std::find(fam.begin(), fam.end(), e) == fam.end()) fam.push_back(e);
  }
  return fam;
}

std::string op_band(const ParsedConfig& cfg, SeedSpec seed,
                    std::uint64_t count, int threads,
                    const std::optional<std::vector<double>>& grid,
                    const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "band");
  if (!cfg.procedure) throw ConfigError("op band needs a procedure");
  if (!cfg.match) throw ConfigError("op band needs a match rule");
  if (!cfg.target) throw ConfigError("op band needs a target");
  if (!grid) throw ConfigError("op band needs a tau grid (--tau-grid)");
  std::vector<PriorSpec> family =
      cfg.prior_family ? *cfg.prior_family
                       : std::vector<PriorSpec>{s.prior};
  family = with_two_point_endpoints(std::move(family));
  SensitivityBand band =
      sensitivity_band(s, *cfg.procedure, cfg.match->statistic, *grid, family,
                       *cfg.target, count, seed, threads, cfg.match->metric);
  bool all_missing = !band.rows.empty();
  for (const BandRow& row : band.rows) {
    if (row.missing_cells < family.size()) all_missing = false;
  }
  if (all_missing) throw EmptyRelevantSet(static_cast<long long>(count));
  std::ostringstream os;
  if (fmt == "csv") {
    write_band_csv(os, band);
  } else {
    os << "[";
    for (std::size_t i = 0; i < band.rows.size(); ++i) {
      const BandRow& r = band.rows[i];
      os << (i ? ",\n " : "\n ") << "{\"tau\": " << json_num(r.tau)
         << ", \"err_min\": " << json_num(r.err_min)
         << ", \"err_max\": " << json_num(r.err_max)
         << ", \"err_nominal\": " << json_num(r.err_nominal)
         << ", \"mc_se\": " << json_num(r.mc_se)
         << ", \"accepted_min\": " << r.accepted_min
         << ", \"missing_cells\": " << r.missing_cells << "}";
    }
    os << "\n]\n";
  }
  return os.str();
}

std::string op_power(const ParsedConfig& cfg,
                     const std::optional<std::vector<double>>& grid,
                     const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "power");
  if (!cfg.procedure) throw ConfigError("op power needs a z_test procedure");
  const TestProc* tp = std::get_if<TestProc>(&cfg.procedure->v);
  const ZTest* zt = tp ? std::get_if<ZTest>(&tp->rule) : nullptr;
  if (!zt) throw ConfigError("op power needs a z_test procedure");
  if (!grid) throw ConfigError("op power needs a theta grid (--tau-grid)");
  std::vector<PowerPoint> curve = power_curve(zt->critical, s.n, *grid);
  std::ostringstream os;
  if (fmt == "csv") {
    os << "theta,power\n";
    for (const PowerPoint& p : curve) {
      os << csv_num(p.theta) << "," << csv_num(p.power) << "\n";
    }
  } else {
    os << "[";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      os << (i ? ",\n " : "\n ") << "{\"theta\": " << json_num(curve[i].theta)
         << ", \"power\": " << json_num(curve[i].power) << "}";
    }
    os << "\n]\n";
  }
  return os.str();
}

std::string op_risk(const ParsedConfig& cfg, const CanonBundle* bundle,
                    const std::optional<std::vector<double>>& grid,
                    const std::string& fmt) {
  std::uint64_t n = 0;
  if (bundle && bundle->coin_flips) {
    n = *bundle->coin_flips;
  } else if (cfg.coin_flips) {
    n = *cfg.coin_flips;
  } else if (cfg.scenario) {
    n = cfg.scenario->n;
  } else {
    throw ConfigError("op risk needs a coin_flips line or a scenario");
  }
  std::vector<double> thetas =
      grid ? *grid : parse_tau_grid("0:1:0.01");
  std::vector<RiskPoint> curve = minimax_risk_curve(n, thetas);
  std::ostringstream os;
  if (fmt == "csv") {
    os << "theta,minimax_risk,mean_risk\n";
    for (const RiskPoint& p : curve) {
      os << csv_num(p.theta) << "," << csv_num(p.minimax_risk) << ","
         << csv_num(p.mean_risk) << "\n";
    }
  } else {
    os << "[";
    for (std::size_t i = 0; i < curve.size(); ++i) {
      os << (i ? ",\n " : "\n ") << "{\"theta\": " << json_num(curve[i].theta)
         << ", \"minimax_risk\": " << json_num(curve[i].minimax_risk)
         << ", \"mean_risk\": " << json_num(curve[i].mean_risk) << "}";
    }
    os << "\n]\n";
  }
  return os.str();
}

std::string op_curse(const ParsedConfig& cfg, SeedSpec seed,
                     std::uint64_t count, const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "curse");
  std::vector<MarkerCurse> report =
      winners_curse_report(s, s.prior, count, seed);
  std::ostringstream os;
  if (fmt == "csv") {
    os << "marker,selected,selection_rate,conditional_bias,mc_se,missing\n";
    for (const MarkerCurse& m : report) {
      os << m.marker << "," << m.selected << "," << csv_num(m.selection_rate)
         << "," << csv_num(m.conditional_bias) << "," << csv_num(m.mc_se)
         << "," << (m.missing ? 1 : 0) << "\n";
    }
  } else if (fmt == "json") {
    os << "[";
    for (std::size_t i = 0; i < report.size(); ++i) {
      const MarkerCurse& m = report[i];
      os << (i ? ",\n " : "\n ") << "{\"marker\": " << m.marker
         << ", \"selected\": " << m.selected
         << ", \"selection_rate\": " << json_num(m.selection_rate)
         << ", \"conditional_bias\": " << json_num(m.conditional_bias)
         << ", \"mc_se\": " << json_num(m.mc_se)
         << ", \"missing\": " << (m.missing ? "true" : "false") << "}";
    }
    os << "\n]\n";
  } else {
    for (const MarkerCurse& m : report) {
      os << "marker " << m.marker << ": selected " << m.selected << " ("
         << csv_num(m.selection_rate * 100.0) << "%)";
      if (m.missing) {
        os << ", never selected\n";
      } else {
        os << ", conditional bias " << csv_num(m.conditional_bias) << " +- "
           << csv_num(m.mc_se) << "\n";
      }
    }
  }
  return os.str();
}

std::string op_partial(const ParsedConfig& cfg, SeedSpec seed,
                       std::uint64_t count, const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "partial");
  const LinearRegression* reg = std::get_if<LinearRegression>(&s.structure.v);
  if (!reg) {
    throw ConfigError("op partial needs a linear_regression structure");
  }
  const GaussianPrior* gp = std::get_if<GaussianPrior>(&s.prior.v);
  if (!gp) throw ConfigError("op partial needs a gaussian prior");
  PartialMatchReport rep = partial_match_decomposition(
      reg->design, reg->target_covariates, *gp, count, seed);
  std::ostringstream os;
  if (fmt == "csv") {
    os << "h0,b,f,identity_residual\n";
    for (std::size_t i = 0; i < rep.b_samples.size(); ++i) {
      os << csv_num(rep.h0) << "," << csv_num(rep.b_samples[i]) << ","
         << csv_num(rep.f_samples[i]) << ","
         << csv_num(rep.identity_residuals[i]) << "\n";
    }
  } else if (fmt == "json") {
    auto arr = [&os](const char* name, const std::vector<double>& v) {
      os << "\"" << name << "\": [";
      for (std::size_t i = 0; i < v.size(); ++i) {
        os << (i ? ", " : "") << json_num(v[i]);
      }
      os << "]";
    };
    os << "{\"h0\": " << json_num(rep.h0) << ", ";
    arr("b", rep.b_samples);
    os << ", ";
    arr("f", rep.f_samples);
    os << ", ";
    arr("identity_residuals", rep.identity_residuals);
    os << "}\n";
  } else {
    MomentSums b;
    MomentSums f;
    double max_resid = 0.0;
    for (std::size_t i = 0; i < rep.b_samples.size(); ++i) {
      b.add(rep.b_samples[i]);
      f.add(rep.f_samples[i]);
      max_resid = std::max(max_resid, std::fabs(rep.identity_residuals[i]));
    }
    os << "h0: " << csv_num(rep.h0) << "\n"
       << "draws: " << rep.b_samples.size() << "\n"
       << "b mean: " << csv_num(b.mean())
       << ", sd: " << csv_num(std::sqrt(b.variance())) << "\n"
       << "f mean: " << csv_num(f.mean())
       << ", sd: " << csv_num(std::sqrt(f.variance())) << "\n"
       << "max identity residual: " << csv_num(max_resid) << "\n";
  }
  return os.str();
}

std::string op_eb(const ParsedConfig& cfg, SeedSpec seed, std::uint64_t count,
                  const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "eb");
  const BernoulliChannel* chan = std::get_if<BernoulliChannel>(&s.noise.v);
  if (!chan || !std::holds_alternative<DiagnosticTest>(s.structure.v)) {
    throw ConfigError("op eb needs a diagnostic_test scenario");
  }
  const TwoPoint* tp = std::get_if<TwoPoint>(&s.prior.v);
  if (!tp || tp->value0 != 0.0 || tp->value1 != 1.0) {
    throw ConfigError("op eb needs a two_point(0, 1, w) prior");
  }
  // Each subject is an independent unit problem; scenario n is the panel
  // size, count the number of panels.
  Scenario unit = s;
  unit.n = 1;
  ControlGenerator gen(unit, seed);
  std::size_t panel = s.n;
  std::ostringstream rows;
  MomentSums est_sums;
  double sq_err_sum = 0.0;
  for (std::uint64_t p = 0; p < count; ++p) {
    std::vector<int> results;
    results.reserve(panel);
    for (std::size_t j = 0; j < panel; ++j) {
      ControlProblem prob = gen.problem(p * panel + j);
      results.push_back(std::get<TestResults>(prob.data()).results.at(0));
    }
    double est = eb_prevalence(results, chan->sensitivity, chan->specificity);
    est_sums.add(est);
    double err = est - tp->weight1;
    sq_err_sum += err * err;
    if (fmt == "csv") rows << p << "," << csv_num(est) << "\n";
  }
  double rmse = std::sqrt(sq_err_sum / static_cast<double>(count));
  std::ostringstream os;
  if (fmt == "csv") {
    os << "panel,estimate\n" << rows.str();
  } else if (fmt == "json") {
    os << "{\"panels\": " << count << ", \"panel_size\": " << panel
       << ", \"true_prevalence\": " << json_num(tp->weight1)
       << ", \"mean_estimate\": " << json_num(est_sums.mean())
       << ", \"sd_estimate\": " << json_num(std::sqrt(est_sums.variance()))
       << ", \"rmse\": " << json_num(rmse) << "}\n";
  } else {
    os << "panels: " << count << "\n"
       << "panel_size: " << panel << "\n"
       << "true_prevalence: " << csv_num(tp->weight1) << "\n"
       << "mean_estimate: " << csv_num(est_sums.mean()) << "\n"
       << "sd_estimate: " << csv_num(std::sqrt(est_sums.variance())) << "\n"
       << "rmse: " << csv_num(rmse) << "\n";
  }
  return os.str();
}

std::string op_loo(const ParsedConfig& cfg, SeedSpec seed,
                   const std::string& fmt) {
  const Scenario& s = need_scenario(cfg, "loo");
  const LinearRegression* reg = std::get_if<LinearRegression>(&s.structure.v);
  if (!reg) throw ConfigError("op loo needs a linear_regression structure");
  ControlGenerator gen(s, seed);
  ControlProblem prob = gen.problem(0);
  const auto& outcomes = std::get<RegressionOutcomes>(prob.data()).values;
  Eigen::VectorXd y(static_cast<Eigen::Index>(outcomes.size()));
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = outcomes[i];
  }
  LooCvResult loo = loo_cv_error(reg->design, y);
  std::ostringstream os;
  if (fmt == "csv") {
    os << "index,error\n";
    for (std::size_t i = 0; i < loo.errors.size(); ++i) {
      os << i << "," << csv_num(loo.errors[i]) << "\n";
    }
  } else if (fmt == "json") {
    os << "{\"errors\": [";
    for (std::size_t i = 0; i < loo.errors.size(); ++i) {
      os << (i ? ", " : "") << json_num(loo.errors[i]);
    }
    os << "], \"mean_squared\": " << json_num(loo.mean_squared) << "}\n";
  } else {
    os << "records: " << loo.errors.size() << "\n"
       << "mean_squared: " << csv_num(loo.mean_squared) << "\n";
  }
  return os.str();
}

std::string op_anova(const ParsedConfig& cfg, const std::string& fmt) {
  if (!cfg.population) {
    throw ConfigError("op anova needs a population line");
  }
  const FinitePopulation& pop = *cfg.population;
  std::size_t depth = pop.records.front().covariates.size();
  std::vector<std::size_t> levels;
  if (cfg.level) {
    levels.push_back(*cfg.level);
  } else {
    for (std::size_t r = 0; r <= depth; ++r) levels.push_back(r);
  }
  std::ostringstream os;
  if (fmt == "csv") {
    os << "level,gain\n";
    for (std::size_t r : levels) {
      os << r << "," << csv_num(anova_gain(pop, r)) << "\n";
    }
  } else if (fmt == "json") {
    os << "[";
    for (std::size_t i = 0; i < levels.size(); ++i) {
      os << (i ? ",\n " : "\n ") << "{\"level\": " << levels[i]
         << ", \"gain\": " << json_num(anova_gain(pop, levels[i])) << "}";
    }
    os << "\n]\n";
  } else {
    for (std::size_t r : levels) {
      os << "level " << r << ": gain " << csv_num(anova_gain(pop, r)) << "\n";
    }
  }
  return os.str();
}

std::string op_tradeoff(const ParsedConfig& cfg, SeedSpec seed,
                        const std::string& fmt) {
  if (!cfg.population) {
    throw ConfigError("op tradeoff needs a population line");
  }
  if (!cfg.trial_size) {
    throw ConfigError("op tradeoff needs a trial_size line");
  }
  std::size_t r = cfg.level.value_or(0);
  std::size_t reps = cfg.replications.value_or(1000);
  TradeoffEstimate t =
      tradeoff_estimate(*cfg.population, *cfg.trial_size, r, reps, seed);
  std::ostringstream os;
  if (fmt == "csv") {
    os << "gain,loss,net,flagged_replications\n"
       << csv_num(t.gain) << "," << csv_num(t.loss) << "," << csv_num(t.net)
       << "," << t.flagged_replications << "\n";
  } else if (fmt == "json") {
    os << "{\"gain\": " << json_num(t.gain)
       << ", \"loss\": " << json_num(t.loss)
       << ", \"net\": " << json_num(t.net)
       << ", \"flagged_replications\": " << t.flagged_replications << "}\n";
  } else {
    os << "gain: " << csv_num(t.gain) << "\n"
       << "loss: " << csv_num(t.loss) << "\n"
       << "net: " << csv_num(t.net) << "\n"
       << "flagged_replications: " << t.flagged_replications << "\n";
  }
  return os.str();
}

std::string op_patterns(const ParsedConfig& cfg, SeedSpec seed,
                        std::uint64_t count, const std::string& fmt) {
  if (!cfg.sequence) throw ConfigError("op patterns needs a sequence line");
  if (!cfg.block_length) {
    throw ConfigError("op patterns needs a block_length line");
  }
  SymbolSequence seq{*cfg.sequence};
  BlockModel model = fit_block_model(seq, *cfg.block_length);
  std::size_t min_length = cfg.min_length.value_or(seq.length());
  std::vector<std::string> sims;
  for (std::uint64_t i = 0; i < count; ++i) {
    sims.push_back(
        simulate_sequence(model, min_length, SeedSpec{seed.root_seed, i})
            .symbols);
  }
  std::ostringstream os;
  if (fmt == "csv") {
    os << "block,frequency\n";
    for (const auto& [block, freq] : model.block_frequencies) {
      os << block << "," << csv_num(freq) << "\n";
    }
  } else if (fmt == "json") {
    os << "{\"block_length\": " << model.block_length
       << ", \"frequencies\": {";
    bool first = true;
    for (const auto& [block, freq] : model.block_frequencies) {
      os << (first ? "" : ", ") << "\"" << block << "\": " << json_num(freq);
      first = false;
    }
    os << "}, \"simulated\": [";
    for (std::size_t i = 0; i < sims.size(); ++i) {
      os << (i ? ", " : "") << "\"" << sims[i] << "\"";
    }
    os << "]}\n";
  } else {
    os << "block_length: " << model.block_length << "\n";
    for (const auto& [block, freq] : model.block_frequencies) {
      os << block << ": " << csv_num(freq) << "\n";
    }
    for (const std::string& sim : sims) {
      os << "simulated: " << sim << "\n";
    }
  }
  return os.str();
}

// -------------------------------------------------------------- dispatch ---

int do_run(const Options& o) {
  const CanonBundle* bundle = nullptr;
  ParsedConfig cfg = load_source(o, &bundle);

  std::string op = !o.op.empty() ? o.op : cfg.op.value_or(std::string());
  if (op == "canon-run") {
    if (!bundle) throw ConfigError("--op canon-run needs --canon");
    op = bundle->default_op;
  }
  if (op.empty()) throw ConfigError("no operation selected; pass --op");

  if (o.threads < 1 || o.threads > 256) {
    throw ConfigError("--threads must be in 1..256");
  }
  SeedSpec seed = resolve_seed(o, cfg);
  std::optional<std::vector<double>> grid = resolve_grid(o, cfg);

  std::string content;
  if (op == "error") {
    std::string fmt = pick_format(o.format, "json", {"json", "csv", "text"},
                                  "error");
    content = op_error(cfg, seed, resolve_count(o, cfg, 100000), o.threads,
                       fmt);
  } else if (op == "band") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json"}, "band");
    content = op_band(cfg, seed, resolve_count(o, cfg, 100000), o.threads,
                      grid, fmt);
  } else if (op == "power") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json"}, "power");
    content = op_power(cfg, grid, fmt);
  } else if (op == "risk") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json"}, "risk");
    content = op_risk(cfg, bundle, grid, fmt);
  } else if (op == "curse") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json", "text"},
                                  "curse");
    content = op_curse(cfg, seed, resolve_count(o, cfg, 100000), fmt);
  } else if (op == "partial") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json", "text"},
                                  "partial");
    content = op_partial(cfg, seed, resolve_count(o, cfg, 10000), fmt);
  } else if (op == "eb") {
    std::string fmt = pick_format(o.format, "text", {"text", "csv", "json"},
                                  "eb");
    content = op_eb(cfg, seed, resolve_count(o, cfg, 1000), fmt);
  } else if (op == "loo") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json", "text"},
                                  "loo");
    content = op_loo(cfg, seed, fmt);
  } else if (op == "anova") {
    std::string fmt = pick_format(o.format, "text", {"text", "csv", "json"},
                                  "anova");
    content = op_anova(cfg, fmt);
  } else if (op == "tradeoff") {
    std::string fmt = pick_format(o.format, "text", {"text", "csv", "json"},
                                  "tradeoff");
    content = op_tradeoff(cfg, seed, fmt);
  } else if (op == "patterns") {
    std::string fmt = pick_format(o.format, "csv", {"csv", "json", "text"},
                                  "patterns");
    content = op_patterns(cfg, seed, resolve_count(o, cfg, 0), fmt);
  } else {
    throw ConfigError("unknown op '" + op + "'");
  }
  write_output(o.out_path, content);
  return 0;
}

int do_describe(const Options& o) {
  const CanonBundle* bundle = nullptr;
  ParsedConfig cfg = load_source(o, &bundle);
  std::ostringstream os;
  if (bundle) {
    os << "canon: " << bundle->id << "\n"
       << "title: " << bundle->title << "\n"
       << "default_op: " << bundle->default_op << "\n";
    if (!bundle->notes.empty()) os << "notes: " << bundle->notes << "\n";
  }
  os << describe(cfg);
  write_output(o.out_path, os.str());
  if (cfg.scenario && !validate_scenario(*cfg.scenario).empty()) return 3;
  return 0;
}

int do_canon_list(const Options& o) {
  std::ostringstream os;
  for (const CanonBundle& b : canon_catalog()) {
    os << b.id << "\t" << b.default_op << "\t" << b.title << "\n";
  }
  write_output(o.out_path, os.str());
  return 0;
}

void add_run_options(CLI::App* cmd, Options& o, bool with_sources) {
  if (with_sources) {
    cmd->add_option("--scenario", o.scenario_path, "scenario config file");
    cmd->add_option("--canon", o.canon_id, "canon bundle id");
  }
  cmd->add_option("--op", o.op,
                  "operation: error, band, anova, tradeoff, partial, "
                  "patterns, power, canon-run (bundles also: curse, risk, "
                  "eb, loo)");
  cmd->add_option("--count", o.count, "number of simulated control problems");
  cmd->add_option("--seed", o.seed, "root seed (default from INFERLAB_SEED)");
  cmd->add_option("--tau-grid", o.tau_grid_text,
                  "grid lo:hi:step, endpoints inclusive");
  cmd->add_option("--out", o.out_path, "output file (default stdout)");
  cmd->add_option("--format", o.format, "output format: csv, json, text")
      ->check(CLI::IsMember({"csv", "json", "text"}));
  cmd->add_option("--threads", o.threads, "worker count (default 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulation laboratory for individualized inference"};
  app.require_subcommand(1);

  Options o;
  CLI::App* run = app.add_subcommand(
      "run", "run an operation from a config file or canon bundle");
  add_run_options(run, o, true);

  CLI::App* desc = app.add_subcommand(
      "describe", "print the resolved configuration; no simulation");
  desc->add_option("--scenario", o.scenario_path, "scenario config file");
  desc->add_option("--canon", o.canon_id, "canon bundle id");
  desc->add_option("--out", o.out_path, "output file (default stdout)");

  CLI::App* canon =
      app.add_subcommand("canon", "worked scenario bundle catalog");
  canon->require_subcommand(1);
  CLI::App* canon_list = canon->add_subcommand("list", "list bundle ids");
  canon_list->add_option("--out", o.out_path, "output file (default stdout)");
  CLI::App* canon_run = canon->add_subcommand("run", "run a bundle by id");
  canon_run->add_option("id", o.canon_id, "bundle id")->required();
  add_run_options(canon_run, o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error[2]: " << e.what() << "\n";
    return 2;
  }

  try {
    if (run->parsed()) return do_run(o);
    if (desc->parsed()) return do_describe(o);
    if (canon_list->parsed()) return do_canon_list(o);
    if (canon_run->parsed()) return do_run(o);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error[2]: config: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error[3]: validation: " << e.what() << "\n";
    return 3;
  } catch (const EmptyRelevantSet& e) {
    std::cerr << "error[4]: " << e.what() << "\n";
    return 4;
  } catch (const IoError& e) {
    std::cerr << "error[5]: io: " << e.what() << "\n";
    return 5;
  } catch (const std::domain_error& e) {
    std::cerr << "error[3]: validation: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error[3]: validation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error[1]: " << e.what() << "\n";
    return 1;
  }
}
