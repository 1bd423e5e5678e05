#include "inferlab/scenario_config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "inferlab/errors.hpp"
#include "inferlab/genctl.hpp"

namespace inferlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// ------------------------------------------------------- value expressions --

// `two_point(0, 1, 0.5)` parses to head "two_point" with three number
// arguments; `marker_estimates(values(...), z=1.96)` mixes positional and
// keyword arguments. A bare identifier is a zero-argument call.
struct Expr {
  std::string head;
  bool is_number = false;
  double number = 0.0;
  std::vector<std::pair<std::string, Expr>> args;  // first: keyword or ""
};

class LineParser {
 public:
  LineParser(const std::string& text, int line) : s_(text), line_(line) {}

  Expr parse_value() {
    Expr e = parse_expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return e;
  }

  std::vector<Expr> parse_value_list() {
    std::vector<Expr> out;
    out.push_back(parse_expr());
    skip_ws();
    while (pos_ < s_.size() && s_[pos_] == ',') {
      ++pos_;
      out.push_back(parse_expr());
      skip_ws();
    }
    if (pos_ != s_.size()) fail("unexpected trailing text");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(line_, msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  bool at_ident() const {
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
  }

  std::string read_ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_')) {
      ++pos_;
    }
    return s_.substr(start, pos_ - start);
  }

  Expr parse_expr() {
    skip_ws();
    if (pos_ >= s_.size()) fail("expected a value");
    char c = s_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      Expr e;
      e.head = read_ident();
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '(') {
        ++pos_;
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ')') {
          ++pos_;
          return e;
        }
        for (;;) {
          e.args.push_back(parse_arg());
          skip_ws();
          if (pos_ >= s_.size()) fail("missing ')'");
          if (s_[pos_] == ',') {
            ++pos_;
            continue;
          }
          if (s_[pos_] == ')') {
            ++pos_;
            break;
          }
          fail("expected ',' or ')'");
        }
      }
      return e;
    }
    if (c == '-' || c == '+' || c == '.' ||
        std::isdigit(static_cast<unsigned char>(c))) {
      const char* start = s_.c_str() + pos_;
      char* end = nullptr;
      double v = std::strtod(start, &end);
      if (end == start) fail("expected a number");
      pos_ += static_cast<std::size_t>(end - start);
      Expr e;
      e.is_number = true;
      e.number = v;
      return e;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  std::pair<std::string, Expr> parse_arg() {
    skip_ws();
    std::size_t save = pos_;
    if (at_ident()) {
      std::string id = read_ident();
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == '=') {
        ++pos_;
        return {id, parse_expr()};
      }
      pos_ = save;
    }
    return {std::string(), parse_expr()};
  }

  const std::string& s_;
  int line_;
  std::size_t pos_ = 0;
};

// ------------------------------------------------------------- converters --

double num_of(const Expr& e, int line) {
  if (e.is_number) return e.number;
  if (e.args.empty() && e.head == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(line, "expected a number");
}

void check_positional(const Expr& e, std::size_t arity, int line) {
  if (e.args.size() != arity) {
    throw ConfigError(line, e.head + " expects " + std::to_string(arity) +
                                (arity == 1 ? " argument" : " arguments"));
  }
  for (const auto& [key, value] : e.args) {
    if (!key.empty()) {
      throw ConfigError(line,
                        e.head + ": unexpected keyword argument '" + key + "'");
    }
  }
}

double num_arg(const Expr& e, std::size_t i, int line) {
  return num_of(e.args[i].second, line);
}

std::size_t to_size(const Expr& e, int line) {
  double v = num_of(e, line);
  if (!(v >= 0.0) || v != std::floor(v) || v > 9.0e15) {
    throw ConfigError(line, "expected a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

std::size_t size_arg(const Expr& e, std::size_t i, int line) {
  return to_size(e.args[i].second, line);
}

std::vector<double> number_list(const Expr& e, const char* expected_head,
                                int line) {
  if (e.is_number || e.head != expected_head) {
    throw ConfigError(line, std::string("expected ") + expected_head + "(...)");
  }
  std::vector<double> out;
  out.reserve(e.args.size());
  for (const auto& [key, value] : e.args) {
    if (!key.empty()) {
      throw ConfigError(line, std::string(expected_head) +
                                  ": unexpected keyword argument '" + key +
                                  "'");
    }
    out.push_back(num_of(value, line));
  }
  return out;
}

PriorSpec to_prior(const Expr& e, int line) {
  if (e.is_number) throw ConfigError(line, "expected a prior expression");
  if (e.head == "point_mass") {
    check_positional(e, 1, line);
    return point_mass(num_arg(e, 0, line));
  }
  if (e.head == "two_point") {
    check_positional(e, 3, line);
    return two_point(num_arg(e, 0, line), num_arg(e, 1, line),
                     num_arg(e, 2, line));
  }
  if (e.head == "gaussian") {
    check_positional(e, 2, line);
    return gaussian_prior(num_arg(e, 0, line), num_arg(e, 1, line));
  }
  if (e.head == "uniform_grid") {
    check_positional(e, 3, line);
    return uniform_grid(num_arg(e, 0, line), num_arg(e, 1, line),
                        size_arg(e, 2, line));
  }
  if (e.head == "mixture") {
    if (e.args.size() < 2 || e.args.size() % 2 != 0) {
      throw ConfigError(line, "mixture expects (prior, weight) pairs");
    }
    FiniteMixture mix;
    for (std::size_t i = 0; i < e.args.size(); i += 2) {
      if (!e.args[i].first.empty() || !e.args[i + 1].first.empty()) {
        throw ConfigError(line, "mixture takes no keyword arguments");
      }
      MixtureComponent c;
      c.prior = to_prior(e.args[i].second, line);
      c.weight = num_of(e.args[i + 1].second, line);
      mix.components.push_back(std::move(c));
    }
    return PriorSpec{std::move(mix)};
  }
  throw ConfigError(line, "unknown prior '" + e.head + "'");
}

NoiseSpec to_noise(const Expr& e, int line) {
  if (e.is_number) throw ConfigError(line, "expected a noise expression");
  if (e.head == "std_normal") {
    check_positional(e, 0, line);
    return NoiseSpec{StdNormal{}};
  }
  if (e.head == "unit_exponential") {
    check_positional(e, 0, line);
    return NoiseSpec{UnitMeanExponential{}};
  }
  if (e.head == "unit_lognormal") {
    check_positional(e, 1, line);
    return NoiseSpec{UnitMeanLogNormal{num_arg(e, 0, line)}};
  }
  if (e.head == "beta_pvalue") {
    check_positional(e, 2, line);
    return NoiseSpec{BetaPValue{num_arg(e, 0, line), num_arg(e, 1, line)}};
  }
  if (e.head == "bernoulli_channel") {
    check_positional(e, 2, line);
    return NoiseSpec{
        BernoulliChannel{num_arg(e, 0, line), num_arg(e, 1, line)}};
  }
  if (e.head == "two_lab") {
    check_positional(e, 3, line);
    return NoiseSpec{TwoLabMixture{num_arg(e, 0, line), num_arg(e, 1, line),
                                   num_arg(e, 2, line)}};
  }
  if (e.head == "categorical") {
    check_positional(e, 2, line);
    Categorical cat;
    cat.values = number_list(e.args[0].second, "values", line);
    cat.probs = number_list(e.args[1].second, "probs", line);
    if (cat.values.empty() || cat.values.size() != cat.probs.size()) {
      throw ConfigError(line,
                        "categorical needs matching nonempty values and probs");
    }
    return NoiseSpec{std::move(cat)};
  }
  throw ConfigError(line, "unknown noise '" + e.head + "'");
}

Eigen::MatrixXd to_design(const Expr& e, int line) {
  if (e.is_number) throw ConfigError(line, "expected a design expression");
  if (e.head == "ones") {
    check_positional(e, 1, line);
    return ones_design(size_arg(e, 0, line));
  }
  if (e.head == "seeded") {
    check_positional(e, 3, line);
    return seeded_design(size_arg(e, 0, line), size_arg(e, 1, line),
                         static_cast<std::uint64_t>(size_arg(e, 2, line)));
  }
  throw ConfigError(line, "unknown design '" + e.head +
                              "' (use ones(rows) or seeded(rows, cols, seed))");
}

StructuralModel to_structure(const Expr& e, int line) {
  if (e.is_number) throw ConfigError(line, "expected a structure expression");
  if (e.head == "additive") {
    check_positional(e, 0, line);
    return StructuralModel{Additive{}};
  }
  if (e.head == "multiplicative") {
    check_positional(e, 0, line);
    return StructuralModel{Multiplicative{}};
  }
  if (e.head == "pvalue_channel") {
    check_positional(e, 0, line);
    return StructuralModel{PValueChannel{}};
  }
  if (e.head == "diagnostic_test") {
    check_positional(e, 0, line);
    return StructuralModel{DiagnosticTest{}};
  }
  if (e.head == "marker_panel") {
    check_positional(e, 3, line);
    MarkerPanel panel;
    panel.n_subjects = size_arg(e, 0, line);
    panel.n_markers = size_arg(e, 1, line);
    panel.selection_threshold = num_arg(e, 2, line);
    return StructuralModel{panel};
  }
  if (e.head == "linear_regression") {
    check_positional(e, 1, line);
    LinearRegression reg;
    reg.design = to_design(e.args[0].second, line);
    if (reg.design.rows() == 0) {
      throw ConfigError(line, "linear_regression needs at least one row");
    }
    reg.target_covariates = reg.design.row(0).transpose();
    return StructuralModel{std::move(reg)};
  }
  throw ConfigError(line, "unknown structure '" + e.head + "'");
}

Procedure to_procedure(const Expr& e, int line) {
  if (e.is_number) throw ConfigError(line, "expected a procedure expression");
  if (e.head == "sample_mean") {
    check_positional(e, 0, line);
    return Procedure{PointEst{SampleMeanEst{}}};
  }
  if (e.head == "minimax_binomial") {
    check_positional(e, 0, line);
    return Procedure{PointEst{MinimaxBinomialEst{}}};
  }
  if (e.head == "plug_in_marker") {
    check_positional(e, 0, line);
    return Procedure{PointEst{PlugInMarkerEst{}}};
  }
  if (e.head == "additive_lower") {
    check_positional(e, 1, line);
    return Procedure{IntervalProc{AdditiveLower{num_arg(e, 0, line)}}};
  }
  if (e.head == "pivot_lower") {
    check_positional(e, 1, line);
    return Procedure{
        IntervalProc{MultiplicativePivotLower{num_arg(e, 0, line), 0.0}}};
  }
  if (e.head == "z_interval") {
    check_positional(e, 1, line);
    return Procedure{IntervalProc{ZInterval{num_arg(e, 0, line)}}};
  }
  if (e.head == "p_threshold") {
    check_positional(e, 1, line);
    return Procedure{TestProc{PThresholdTest{num_arg(e, 0, line)}}};
  }
  if (e.head == "z_test") {
    check_positional(e, 1, line);
    return Procedure{TestProc{ZTest{num_arg(e, 0, line)}}};
  }
  if (e.head == "diagnostic_predict") {
    check_positional(e, 0, line);
    return Procedure{TestProc{DiagnosticPredict{}}};
  }
  throw ConfigError(line, "unknown procedure '" + e.head + "'");
}

std::vector<int> int_list(const Expr& e, const char* expected_head, int line) {
  std::vector<double> raw = number_list(e, expected_head, line);
  std::vector<int> out;
  out.reserve(raw.size());
  for (double v : raw) {
    if (v != std::floor(v) || std::fabs(v) > 1e9) {
      throw ConfigError(line,
                        std::string(expected_head) + " entries are integers");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

TargetProblem to_target(const Expr& e, int line) {
  if (e.is_number) throw ConfigError(line, "expected a target expression");
  TargetProblem t;
  if (e.head == "pvalue") {
    check_positional(e, 1, line);
    t.data = PValue{num_arg(e, 0, line)};
    return t;
  }
  if (e.head == "real_seq" || e.head == "regression_outcomes") {
    std::vector<double> vals =
        number_list(e, e.head.c_str(), line);
    if (vals.empty()) {
      throw ConfigError(line, e.head + " needs at least one value");
    }
    if (e.head == "real_seq") {
      t.data = RealSeq{std::move(vals)};
    } else {
      t.data = RegressionOutcomes{std::move(vals)};
    }
    return t;
  }
  if (e.head == "test_results") {
    std::vector<int> results = int_list(e, "test_results", line);
    if (results.empty()) {
      throw ConfigError(line, "test_results needs at least one result");
    }
    for (int r : results) {
      if (r != 0 && r != 1) {
        throw ConfigError(line, "test results are 0 or 1");
      }
    }
    t.data = TestResults{std::move(results)};
    return t;
  }
  if (e.head == "lab_measurements") {
    check_positional(e, 2, line);
    LabMeasurements lab;
    lab.values = number_list(e.args[0].second, "values", line);
    lab.labs = int_list(e.args[1].second, "labs", line);
    if (lab.values.empty() || lab.values.size() != lab.labs.size()) {
      throw ConfigError(line,
                        "lab_measurements needs matching values and labs");
    }
    t.data = std::move(lab);
    return t;
  }
  if (e.head == "marker_estimates") {
    MarkerEstimates m;
    bool saw_values = false;
    for (const auto& [key, value] : e.args) {
      if (key.empty()) {
        m.estimates = number_list(value, "values", line);
        saw_values = true;
      } else if (key == "z") {
        m.z_threshold = num_of(value, line);
      } else {
        throw ConfigError(
            line, "marker_estimates: unexpected keyword argument '" + key +
                      "'");
      }
    }
    if (!saw_values || m.estimates.empty()) {
      throw ConfigError(line, "marker_estimates needs values(...)");
    }
    t.data = std::move(m);
    return t;
  }
  throw ConfigError(line, "unknown target '" + e.head + "'");
}

MatchSpec to_match(const Expr& e, int line,
                   const std::optional<NoiseSpec>& noise) {
  if (e.is_number) throw ConfigError(line, "expected a match expression");
  std::vector<const Expr*> positional;
  std::optional<double> tau;
  std::optional<std::string> metric;
  for (const auto& [key, value] : e.args) {
    if (key.empty()) {
      positional.push_back(&value);
    } else if (key == "tau") {
      tau = num_of(value, line);
    } else if (key == "metric") {
      if (value.is_number || !value.args.empty()) {
        throw ConfigError(line, "metric must be a name");
      }
      metric = value.head;
    } else {
      throw ConfigError(line, "unknown match option '" + key + "'");
    }
  }

  const std::string& name = e.head;
  StatisticId id;
  bool set_valued = false;
  bool discrete = false;
  if (name == "sample_size") {
    id.v = SampleSize{};
    discrete = true;
  } else if (name == "sample_mean") {
    id.v = SampleMean{};
  } else if (name == "lab_assignment") {
    id.v = LabAssignment{};
    set_valued = true;
  } else if (name == "abs_log_lr") {
    AbsLogLR st;
    if (positional.size() == 2) {
      st.a = num_of(*positional[0], line);
      st.b = num_of(*positional[1], line);
    } else if (positional.empty()) {
      const BetaPValue* beta =
          noise ? std::get_if<BetaPValue>(&noise->v) : nullptr;
      if (!beta) {
        throw ConfigError(
            line, "abs_log_lr needs (a, b) unless the noise is beta_pvalue");
      }
      st.a = beta->a;
      st.b = beta->b;
    } else {
      throw ConfigError(line, "abs_log_lr takes 0 or 2 positional arguments");
    }
    id.v = st;
    positional.clear();
  } else if (name == "raw_value") {
    id.v = RawValue{};
  } else if (name == "selected_set") {
    id.v = SelectedSet{};
    set_valued = true;
  } else if (name == "test_result") {
    id.v = TestResult{};
    discrete = true;
  } else if (name == "covariate_balance") {
    id.v = CovariateBalance{};
  } else {
    throw ConfigError(line, "unknown statistic '" + name + "'");
  }
  if (!positional.empty()) {
    throw ConfigError(line, name + " takes no positional arguments");
  }

  MatchSpec m;
  m.statistic = id;
  if (set_valued) {
    if (tau) {
      throw ConfigError(line, "tau does not apply to set-valued statistics");
    }
    if (metric && *metric != "exact") {
      throw ConfigError(line, "set-valued statistics admit only metric=exact");
    }
    m.metric = Metric::ExactEquality;
    return m;
  }
  if (metric) {
    if (*metric == "exact") {
      m.metric = Metric::ExactEquality;
    } else if (*metric == "abs_diff") {
      m.metric = Metric::AbsoluteDiff;
    } else if (*metric == "folded_log") {
      m.metric = Metric::FoldedLogDiff;
    } else {
      throw ConfigError(line, "unknown metric '" + *metric + "'");
    }
  } else if (tau) {
    m.metric = name == "abs_log_lr" ? Metric::FoldedLogDiff
                                    : Metric::AbsoluteDiff;
  } else if (discrete) {
    m.metric = Metric::ExactEquality;
  } else {
    m.metric = name == "abs_log_lr" ? Metric::FoldedLogDiff
                                    : Metric::AbsoluteDiff;
  }
  if (m.metric == Metric::ExactEquality && tau) {
    throw ConfigError(line, "tau does not apply to metric=exact");
  }
  if (tau) m.tolerance = *tau;
  return m;
}

// Deterministic synthetic population: labels are fair coin flips per level,
// the outcome adds 1/(level+1) per set label plus standard normal noise.
// The `independent` variant withholds the effect of the deepest level.
FinitePopulation build_population(const std::string& kind, std::size_t records,
                                  std::size_t depth, std::uint64_t seed,
                                  int line) {
  if (records == 0 || depth == 0) {
    throw ConfigError(line, "population needs records >= 1 and depth >= 1");
  }
  bool independent_last = kind == "nested_gaussian_independent";
  FinitePopulation pop;
  pop.records.reserve(records);
  for (std::size_t i = 0; i < records; ++i) {
    rng::Engine g = rng::engine_for(SeedSpec{seed, 0xF1D0}, i);
    PopRecord rec;
    rec.covariates.resize(depth);
    double shift = 0.0;
    for (std::size_t l = 0; l < depth; ++l) {
      int label = static_cast<int>(g() & 1u);
      rec.covariates[l] = label;
      bool counts = !independent_last || l + 1 < depth;
      if (counts && label == 1) shift += 1.0 / static_cast<double>(l + 1);
    }
    rec.outcome = shift + rng::normal(g);
    pop.records.push_back(std::move(rec));
  }
  return pop;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool is_key(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  }
  return std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_';
}

const char* const kKnownKeys[] = {
    "prior",      "noise",      "structure",    "n",
    "procedure",  "match",      "target",       "count",
    "seed",       "op",         "tau_grid",     "priors",
    "loss",       "sequence",   "block_length", "min_length",
    "population", "trial_size", "level",        "replications",
    "coin_flips",
};

bool known_key(const std::string& key) {
  for (const char* k : kKnownKeys) {
    if (key == k) return true;
  }
  return false;
}

}  // namespace

std::vector<double> parse_tau_grid(const std::string& text, int line) {
  auto bad = [&]() -> ConfigError {
    return ConfigError(line, "expected lo:hi:step, got '" + text + "'");
  };
  std::size_t c1 = text.find(':');
  std::size_t c2 = c1 == std::string::npos ? std::string::npos
                                           : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos ||
      text.find(':', c2 + 1) != std::string::npos) {
    throw bad();
  }
  double parts[3];
  const std::string pieces[3] = {trim(text.substr(0, c1)),
                                 trim(text.substr(c1 + 1, c2 - c1 - 1)),
                                 trim(text.substr(c2 + 1))};
  for (int i = 0; i < 3; ++i) {
    if (pieces[i].empty()) throw bad();
    char* end = nullptr;
    parts[i] = std::strtod(pieces[i].c_str(), &end);
    if (end != pieces[i].c_str() + pieces[i].size() || !std::isfinite(parts[i]))
      throw bad();
  }
  double lo = parts[0];
  double hi = parts[1];
  double step = parts[2];
  if (!(step > 0.0)) throw ConfigError(line, "grid step must be positive");
  if (hi < lo - 1e-9) {
    throw ConfigError(line, "grid upper bound is below the lower bound");
  }
  if ((hi - lo) / step > 1e6) {
    throw ConfigError(line, "grid has more than 1e6 points");
  }
  std::vector<double> out;
  for (int i = 0;; ++i) {
    double v = lo + step * i;
    if (v > hi + 1e-9) break;
    out.push_back(v);
  }
  return out;
}

ParsedConfig parse_config_text(const std::string& text) {
  struct RawLine {
    int line = 0;
    std::string value;
  };
  std::map<std::string, RawLine> kv;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::string t = trim(raw);
    if (t.empty()) continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(lineno, "expected key = value");
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (!is_key(key)) throw ConfigError(lineno, "expected key = value");
    if (!known_key(key)) throw ConfigError(lineno, "unknown key '" + key + "'");
    if (value.empty()) {
      throw ConfigError(lineno, "missing value for '" + key + "'");
    }
    if (!kv.emplace(key, RawLine{lineno, value}).second) {
      throw ConfigError(lineno, "duplicate key '" + key + "'");
    }
  }

  ParsedConfig cfg;
  auto get = [&](const char* key) -> const RawLine* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  auto expr_of = [](const RawLine& r) {
    return LineParser(r.value, r.line).parse_value();
  };

  std::optional<NoiseSpec> noise;
  if (const RawLine* r = get("noise")) noise = to_noise(expr_of(*r), r->line);

  const RawLine* prior_line = get("prior");
  const RawLine* structure_line = get("structure");
  bool wants_scenario =
      prior_line || noise || structure_line || get("n") != nullptr;
  if (wants_scenario) {
    const char* missing = nullptr;
    if (!prior_line) missing = "prior";
    if (!noise) missing = "noise";
    if (!structure_line) missing = "structure";
    if (missing) {
      throw ConfigError("scenario needs prior, noise, and structure; missing '" +
                        std::string(missing) + "'");
    }
    Scenario s;
    s.prior = to_prior(expr_of(*prior_line), prior_line->line);
    s.noise = *noise;
    s.structure = to_structure(expr_of(*structure_line), structure_line->line);
    s.n = 1;
    if (const RawLine* r = get("n")) {
      s.n = to_size(expr_of(*r), r->line);
      if (s.n == 0) throw ConfigError(r->line, "n must be >= 1");
    }
    cfg.scenario = std::move(s);
  }

  if (const RawLine* r = get("procedure")) {
    cfg.procedure = to_procedure(expr_of(*r), r->line);
  }
  if (const RawLine* r = get("match")) {
    cfg.match = to_match(expr_of(*r), r->line, noise);
  }
  if (const RawLine* r = get("target")) {
    cfg.target = to_target(expr_of(*r), r->line);
  }
  if (const RawLine* r = get("count")) {
    std::size_t v = to_size(expr_of(*r), r->line);
    if (v == 0) throw ConfigError(r->line, "count must be >= 1");
    cfg.count = static_cast<std::uint64_t>(v);
  }
  if (const RawLine* r = get("seed")) {
    cfg.seed =
        SeedSpec{static_cast<std::uint64_t>(to_size(expr_of(*r), r->line)), 0};
  }
  if (const RawLine* r = get("op")) {
    Expr e = expr_of(*r);
    if (e.is_number || !e.args.empty()) {
      throw ConfigError(r->line, "op must be a bare name");
    }
    cfg.op = e.head;
  }
  if (const RawLine* r = get("tau_grid")) {
    cfg.tau_grid = parse_tau_grid(r->value, r->line);
  }
  if (const RawLine* r = get("loss")) {
    Expr e = expr_of(*r);
    std::string name = e.is_number ? std::string() : e.head;
    if (name == "squared") {
      cfg.loss_kind = LossKind::SquaredError;
    } else if (name == "abs") {
      cfg.loss_kind = LossKind::AbsError;
    } else if (name == "miss") {
      cfg.loss_kind = LossKind::Miss;
    } else if (name == "test_error") {
      cfg.loss_kind = LossKind::TestError;
    } else {
      throw ConfigError(r->line,
                        "loss is one of squared, abs, miss, test_error");
    }
  }
  if (const RawLine* r = get("priors")) {
    std::vector<Expr> exprs = LineParser(r->value, r->line).parse_value_list();
    std::vector<PriorSpec> family;
    family.reserve(exprs.size());
    for (const Expr& e : exprs) family.push_back(to_prior(e, r->line));
    cfg.prior_family = std::move(family);
  }
  if (const RawLine* r = get("sequence")) {
    std::string symbols;
    for (char c : r->value) {
      if (std::isspace(static_cast<unsigned char>(c))) continue;
      symbols.push_back(c);
    }
    if (symbols.empty()) throw ConfigError(r->line, "sequence is empty");
    cfg.sequence = std::move(symbols);
  }
  if (const RawLine* r = get("block_length")) {
    std::size_t v = to_size(expr_of(*r), r->line);
    if (v == 0) throw ConfigError(r->line, "block_length must be >= 1");
    cfg.block_length = v;
  }
  if (const RawLine* r = get("min_length")) {
    cfg.min_length = to_size(expr_of(*r), r->line);
  }
  if (const RawLine* r = get("population")) {
    Expr e = expr_of(*r);
    if (e.is_number || (e.head != "nested_gaussian" &&
                        e.head != "nested_gaussian_independent")) {
      throw ConfigError(r->line,
                        "unknown population '" +
                            (e.is_number ? std::string("<number>") : e.head) +
                            "' (use nested_gaussian(records, depth, seed) or "
                            "nested_gaussian_independent(...))");
    }
    check_positional(e, 3, r->line);
    cfg.population = build_population(
        e.head, size_arg(e, 0, r->line), size_arg(e, 1, r->line),
        static_cast<std::uint64_t>(size_arg(e, 2, r->line)), r->line);
  }
  if (const RawLine* r = get("trial_size")) {
    cfg.trial_size = to_size(expr_of(*r), r->line);
  }
  if (const RawLine* r = get("level")) {
    cfg.level = to_size(expr_of(*r), r->line);
  }
  if (const RawLine* r = get("replications")) {
    cfg.replications = to_size(expr_of(*r), r->line);
  }
  if (const RawLine* r = get("coin_flips")) {
    std::size_t v = to_size(expr_of(*r), r->line);
    if (v == 0) throw ConfigError(r->line, "coin_flips must be >= 1");
    cfg.coin_flips = static_cast<std::uint64_t>(v);
  }
  return cfg;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file: " + path);
  return parse_config_text(buf.str());
}

// ---------------------------------------------------------- display forms --

std::string prior_text(const PriorSpec& p) {
  return std::visit(
      overloaded{
          [](const PointMass& m) { return "PointMass(" + num(m.value) + ")"; },
          [](const TwoPoint& t) {
            return "TwoPoint(" + num(t.value0) + ", " + num(t.value1) + ", " +
                   num(t.weight1) + ")";
          },
          [](const GaussianPrior& g) {
            return "GaussianPrior(" + num(g.mean) + ", " + num(g.sd) + ")";
          },
          [](const UniformGrid& u) {
            return "UniformGrid(" + num(u.lo) + ", " + num(u.hi) + ", " +
                   std::to_string(u.points) + ")";
          },
          [](const FiniteMixture& mix) {
            std::string out = "FiniteMixture(";
            for (std::size_t i = 0; i < mix.components.size(); ++i) {
              if (i) out += ", ";
              out += prior_text(mix.components[i].prior) + ":" +
                     num(mix.components[i].weight);
            }
            return out + ")";
          },
      },
      p.v);
}

std::string noise_text(const NoiseSpec& n) {
  return std::visit(
      overloaded{
          [](const StdNormal&) { return std::string("StdNormal"); },
          [](const UnitMeanExponential&) {
            return std::string("UnitMeanExponential");
          },
          [](const UnitMeanLogNormal& l) {
            return "UnitMeanLogNormal(" + num(l.sigma) + ")";
          },
          [](const BetaPValue& b) {
            return "BetaPValue(" + num(b.a) + ", " + num(b.b) + ")";
          },
          [](const BernoulliChannel& c) {
            return "BernoulliChannel(" + num(c.sensitivity) + ", " +
                   num(c.specificity) + ")";
          },
          [](const TwoLabMixture& t) {
            return "TwoLabMixture(" + num(t.sd_lab1) + ", " + num(t.sd_lab2) +
                   ", " + num(t.prob_lab1) + ")";
          },
          [](const Categorical& c) {
            return "Categorical(" + std::to_string(c.values.size()) +
                   " atoms)";
          },
      },
      n.v);
}

std::string structure_text(const StructuralModel& s) {
  return std::visit(
      overloaded{
          [](const Additive&) { return std::string("Additive"); },
          [](const Multiplicative&) { return std::string("Multiplicative"); },
          [](const LinearRegression& r) {
            return "LinearRegression(" + std::to_string(r.design.rows()) +
                   "x" + std::to_string(r.design.cols()) + " design)";
          },
          [](const PValueChannel&) { return std::string("PValueChannel"); },
          [](const DiagnosticTest&) { return std::string("DiagnosticTest"); },
          [](const MarkerPanel& m) {
            return "MarkerPanel(" + std::to_string(m.n_subjects) + ", " +
                   std::to_string(m.n_markers) + ", " +
                   num(m.selection_threshold) + ")";
          },
      },
      s.v);
}

std::string procedure_text(const Procedure& p) {
  return std::visit(
      overloaded{
          [](const PointEst& pe) {
            return std::visit(
                overloaded{
                    [](const SampleMeanEst&) {
                      return std::string("sample_mean");
                    },
                    [](const MinimaxBinomialEst&) {
                      return std::string("minimax_binomial");
                    },
                    [](const PlugInMarkerEst&) {
                      return std::string("plug_in_marker");
                    },
                },
                pe.rule);
          },
          [](const IntervalProc& ip) {
            return std::visit(
                overloaded{
                    [](const AdditiveLower& a) {
                      return "additive_lower(buffer=" + num(a.buffer) + ")";
                    },
                    [](const MultiplicativePivotLower& m) {
                      std::string out = "pivot_lower(level=" + num(m.level);
                      if (m.resolved_c > 0.0) {
                        out += ", c=" + num(m.resolved_c);
                      }
                      return out + ")";
                    },
                    [](const ZInterval& z) {
                      return "z_interval(level=" + num(z.level) + ")";
                    },
                },
                ip.rule);
          },
          [](const TestProc& tp) {
            return std::visit(
                overloaded{
                    [](const PThresholdTest& t) {
                      return "p_threshold(alpha=" + num(t.alpha) + ")";
                    },
                    [](const ZTest& z) {
                      return "z_test(critical=" + num(z.critical) + ")";
                    },
                    [](const DiagnosticPredict&) {
                      return std::string("diagnostic_predict");
                    },
                },
                tp.rule);
          },
      },
      p.v);
}

std::string match_text(const MatchSpec& m) {
  std::string stat = statistic_name(m.statistic);
  if (const AbsLogLR* st = std::get_if<AbsLogLR>(&m.statistic.v)) {
    stat += "(" + num(st->a) + ", " + num(st->b) + ")";
  }
  switch (m.metric) {
    case Metric::ExactEquality:
      return stat + ", metric=exact";
    case Metric::AbsoluteDiff:
      return stat + ", metric=abs_diff, tau=" + num(m.tolerance);
    case Metric::FoldedLogDiff:
      return stat + ", metric=folded_log, tau=" + num(m.tolerance);
  }
  return stat;
}

std::string target_text(const TargetProblem& t) {
  auto list_or_count = [](const char* name, const std::vector<double>& v) {
    if (v.size() <= 6) {
      std::string out = std::string(name) + "(";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += num(v[i]);
      }
      return out + ")";
    }
    return std::string(name) + "[" + std::to_string(v.size()) + "]";
  };
  return std::visit(
      overloaded{
          [&](const RealSeq& r) { return list_or_count("real_seq", r.values); },
          [&](const LabMeasurements& lab) {
            if (lab.values.size() <= 4) {
              std::string out = "lab_measurements(";
              for (std::size_t i = 0; i < lab.values.size(); ++i) {
                if (i) out += ", ";
                out += num(lab.values[i]) + "@lab" +
                       std::to_string(lab.labs[i]);
              }
              return out + ")";
            }
            return "lab_measurements[" + std::to_string(lab.values.size()) +
                   "]";
          },
          [](const PValue& p) { return "pvalue(" + num(p.value) + ")"; },
          [](const TestResults& r) {
            std::string out = "test_results(";
            for (std::size_t i = 0; i < r.results.size() && i < 8; ++i) {
              if (i) out += ", ";
              out += std::to_string(r.results[i]);
            }
            if (r.results.size() > 8) out += ", ...";
            return out + ")";
          },
          [&](const RegressionOutcomes& r) {
            return list_or_count("regression_outcomes", r.values);
          },
          [](const MarkerEstimates& m) {
            return "marker_estimates[" + std::to_string(m.estimates.size()) +
                   "], z=" + num(m.z_threshold);
          },
      },
      t.data);
}

std::string describe(const ParsedConfig& cfg) {
  std::ostringstream os;
  if (cfg.scenario) {
    const Scenario& s = *cfg.scenario;
    os << "scenario:\n";
    os << "  prior: " << prior_text(s.prior) << "\n";
    os << "  noise: " << noise_text(s.noise) << "\n";
    os << "  structure: " << structure_text(s.structure) << "\n";
    os << "  n: " << s.n << "\n";
    std::vector<std::string> issues = validate_scenario(s);
    if (issues.empty()) {
      os << "  validation: ok\n";
    } else {
      os << "  validation: " << issues.size()
         << (issues.size() == 1 ? " issue\n" : " issues\n");
      for (const std::string& issue : issues) {
        os << "    - " << issue << "\n";
      }
    }
  }
  if (cfg.procedure) {
    os << "procedure: " << procedure_text(*cfg.procedure) << "\n";
  }
  if (cfg.match) os << "match: " << match_text(*cfg.match) << "\n";
  if (cfg.target) os << "target: " << target_text(*cfg.target) << "\n";
  if (cfg.count) os << "count: " << *cfg.count << "\n";
  if (cfg.seed) {
    os << "seed: " << cfg.seed->root_seed << "/" << cfg.seed->stream_index
       << "\n";
  }
  if (cfg.op) os << "op: " << *cfg.op << "\n";
  if (cfg.tau_grid) {
    os << "tau_grid: " << cfg.tau_grid->size() << " points in ["
       << num(cfg.tau_grid->front()) << ", " << num(cfg.tau_grid->back())
       << "]\n";
  }
  if (cfg.loss_kind) {
    const char* name = "";
    switch (*cfg.loss_kind) {
      case LossKind::SquaredError:
        name = "squared";
        break;
      case LossKind::AbsError:
        name = "abs";
        break;
      case LossKind::Miss:
        name = "miss";
        break;
      case LossKind::TestError:
        name = "test_error";
        break;
    }
    os << "loss: " << name << "\n";
  }
  if (cfg.prior_family) {
    os << "priors:";
    for (const PriorSpec& p : *cfg.prior_family) {
      os << " " << prior_text(p);
    }
    os << "\n";
  }
  if (cfg.sequence) os << "sequence: " << *cfg.sequence << "\n";
  if (cfg.block_length) os << "block_length: " << *cfg.block_length << "\n";
  if (cfg.min_length) os << "min_length: " << *cfg.min_length << "\n";
  if (cfg.population) {
    std::size_t depth = cfg.population->records.empty()
                            ? 0
                            : cfg.population->records.front().covariates.size();
    os << "population: " << cfg.population->records.size()
       << " records, depth " << depth << "\n";
  }
  if (cfg.trial_size) os << "trial_size: " << *cfg.trial_size << "\n";
  if (cfg.level) os << "level: " << *cfg.level << "\n";
  if (cfg.replications) os << "replications: " << *cfg.replications << "\n";
  if (cfg.coin_flips) os << "coin_flips: " << *cfg.coin_flips << "\n";
  return os.str();
}

}  // namespace inferlab
