#include "inferlab/relevance.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

#include "inferlab/mathutil.hpp"
#include "inferlab/rng.hpp"

namespace inferlab {

namespace {

std::uint64_t hash_double(std::uint64_t h, double x) {
  std::uint64_t u;
  static_assert(sizeof(u) == sizeof(x));
  std::memcpy(&u, &x, sizeof(u));
  return rng::mix64(h ^ (u + rng::kGolden));
}

std::uint64_t stat_key(const StatisticId& id) {
  std::uint64_t h = rng::mix64(id.v.index() + 1);
  if (const auto* a = std::get_if<AbsLogLR>(&id.v)) {
    h = hash_double(h, a->a);
    h = hash_double(h, a->b);
  }
  return h;
}

[[noreturn]] void shape_error(const StatisticId& id, const DataValue& d) {
  throw std::domain_error(statistic_name(id) + " is not defined for " +
                          data_shape_name(d) + " data");
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string statistic_name(const StatisticId& id) {
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SampleSize>) return "sample_size";
        if constexpr (std::is_same_v<T, SampleMean>) return "sample_mean";
        if constexpr (std::is_same_v<T, LabAssignment>) return "lab_assignment";
        if constexpr (std::is_same_v<T, AbsLogLR>) return "abs_log_lr";
        if constexpr (std::is_same_v<T, RawValue>) return "raw_value";
        if constexpr (std::is_same_v<T, SelectedSet>) return "selected_set";
        if constexpr (std::is_same_v<T, TestResult>) return "test_result";
        return "covariate_balance";
      },
      id.v);
}

StatValue extract_statistic(const DataValue& d, const StatisticId& id) {
  if (std::holds_alternative<SampleSize>(id.v)) {
    return static_cast<double>(data_size(d));
  }

  if (std::holds_alternative<SampleMean>(id.v)) {
    if (const auto* r = std::get_if<RealSeq>(&d)) return mean_of(r->values);
    if (const auto* l = std::get_if<LabMeasurements>(&d)) {
      return mean_of(l->values);
    }
    if (const auto* p = std::get_if<PValue>(&d)) return p->value;
    if (const auto* t = std::get_if<TestResults>(&d)) {
      double s = 0.0;
      for (int r : t->results) s += r;
      return s / static_cast<double>(t->results.size());
    }
    if (const auto* r = std::get_if<RegressionOutcomes>(&d)) {
      return mean_of(r->values);
    }
    return mean_of(std::get<MarkerEstimates>(d).estimates);
  }

  if (std::holds_alternative<LabAssignment>(id.v)) {
    const auto* l = std::get_if<LabMeasurements>(&d);
    if (!l) shape_error(id, d);
    IndexSet in_lab1;
    for (std::size_t i = 0; i < l->labs.size(); ++i) {
      if (l->labs[i] == 1) in_lab1.insert(i);
    }
    return in_lab1;
  }

  if (const auto* a = std::get_if<AbsLogLR>(&id.v)) {
    const auto* p = std::get_if<PValue>(&d);
    if (!p) shape_error(id, d);
    return std::abs(std::log(lr(p->value, a->a, a->b)));
  }

  if (std::holds_alternative<RawValue>(id.v)) {
    if (const auto* p = std::get_if<PValue>(&d)) return p->value;
    const std::vector<double>* vals = nullptr;
    if (const auto* r = std::get_if<RealSeq>(&d)) vals = &r->values;
    if (const auto* l = std::get_if<LabMeasurements>(&d)) vals = &l->values;
    if (const auto* r = std::get_if<RegressionOutcomes>(&d)) vals = &r->values;
    if (!vals) shape_error(id, d);
    if (vals->size() != 1) {
      throw std::domain_error("raw_value needs a single measurement, got " +
                              std::to_string(vals->size()));
    }
    return (*vals)[0];
  }

  if (std::holds_alternative<SelectedSet>(id.v)) {
    const auto* m = std::get_if<MarkerEstimates>(&d);
    if (!m) shape_error(id, d);
    IndexSet selected;
    for (std::size_t i = 0; i < m->estimates.size(); ++i) {
      if (std::abs(m->estimates[i]) > m->z_threshold) selected.insert(i);
    }
    return selected;
  }

  if (std::holds_alternative<TestResult>(id.v)) {
    const auto* t = std::get_if<TestResults>(&d);
    if (!t) shape_error(id, d);
    if (t->results.size() != 1) {
      throw std::domain_error("test_result needs a single test, got " +
                              std::to_string(t->results.size()));
    }
    return static_cast<double>(t->results[0]);
  }

  const auto* l = std::get_if<LabMeasurements>(&d);
  if (!l) shape_error(id, d);
  double in_lab1 = 0.0;
  for (int lab : l->labs) in_lab1 += lab == 1 ? 1.0 : 0.0;
  return in_lab1 / static_cast<double>(l->labs.size());
}

StatValue extract_statistic(const ControlProblem& p, const StatisticId& id) {
  // Set-valued statistics are cheap scans; only reals go through the cache.
  if (std::holds_alternative<LabAssignment>(id.v) ||
      std::holds_alternative<SelectedSet>(id.v)) {
    return extract_statistic(p.data(), id);
  }
  return p.stat_cached(stat_key(id), [&] {
    return std::get<double>(extract_statistic(p.data(), id));
  });
}

StatValue extract_statistic(const TargetProblem& p, const StatisticId& id) {
  return extract_statistic(p.data, id);
}

double metric_distance(const StatValue& a, const StatValue& b, Metric metric,
                       const StatisticId& id) {
  const double inf = std::numeric_limits<double>::infinity();
  if (metric == Metric::ExactEquality) return a == b ? 0.0 : inf;

  const auto* x = std::get_if<double>(&a);
  const auto* y = std::get_if<double>(&b);
  if (!x || !y) {
    throw std::domain_error(statistic_name(id) +
                            " is set-valued; use the exact-equality metric");
  }
  if (metric == Metric::AbsoluteDiff) return std::abs(*x - *y);

  // FoldedLogDiff. AbsLogLR values are folded logs already, so the fold is
  // a plain difference; other statistics must live on a positive scale.
  if (std::holds_alternative<AbsLogLR>(id.v)) return std::abs(*x - *y);
  if (*x <= 0.0 || *y <= 0.0) {
    throw std::domain_error("folded log metric needs positive values of " +
                            statistic_name(id));
  }
  return std::abs(std::abs(std::log(*x)) - std::abs(std::log(*y)));
}

bool accept(const ControlProblem& p, const TargetProblem& target,
            const MatchSpec& m) {
  StatValue sc = extract_statistic(p, m.statistic);
  StatValue st = extract_statistic(target, m.statistic);
  if (m.metric == Metric::ExactEquality) return sc == st;
  return metric_distance(sc, st, m.metric, m.statistic) <= m.tolerance;
}

double lr(double p, double a, double b) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error(
        "likelihood ratio undefined at a boundary p-value");
  }
  return std::exp((a - 1.0) * std::log(p) + (b - 1.0) * std::log1p(-p) -
                  log_beta(a, b));
}

namespace {

// |log lr| as a function of p, the quantity the equal-precision region is a
// level set of.
double folded(double p, double a, double b) {
  return std::abs(std::log(lr(p, a, b)));
}

// Bisect the membership boundary between an inside point and an outside
// point, returning the inside-most resolvable endpoint.
double bisect_edge(double in, double out, double lo_lv, double hi_lv, double a,
                   double b) {
  for (int i = 0; i < 200 && std::abs(in - out) > 1e-13; ++i) {
    double mid = 0.5 * (in + out);
    double t = folded(mid, a, b);
    (t >= lo_lv && t <= hi_lv ? in : out) = mid;
  }
  return in;
}

}  // namespace

std::vector<Interval> equal_precision_region(double p_obs, double tau,
                                             double a, double b) {
  if (!(p_obs > 0.0 && p_obs < 1.0)) {
    throw std::domain_error("observed p-value must lie strictly in (0, 1)");
  }
  if (tau < 0.0) throw std::domain_error("tolerance must be nonnegative");
  if (std::isinf(tau)) return {Interval{0.0, 1.0}};

  const double t_obs = folded(p_obs, a, b);
  const double lo_lv = std::max(t_obs - tau, 0.0);
  const double hi_lv = t_obs + tau;

  // Knots: dense uniform grid plus geometric refinement near both ends,
  // where a < 1 or b < 1 packs narrow level-set pieces.
  std::vector<double> knots;
  const int kUniform = 20000;
  knots.reserve(kUniform + 220);
  for (int i = 1; i < kUniform; ++i) {
    knots.push_back(static_cast<double>(i) / kUniform);
  }
  for (double e = 0.5; e > 1e-30; e *= 0.5) {
    knots.push_back(e);
    if (1.0 - e < 1.0) knots.push_back(1.0 - e);
  }
  knots.push_back(p_obs);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  auto inside = [&](double p) {
    double t = folded(p, a, b);
    return t >= lo_lv && t <= hi_lv;
  };

  std::vector<Interval> out;
  bool open = false;
  Interval cur;
  bool prev_in = false;
  double prev_p = 0.0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    double p = knots[i];
    bool in = inside(p);
    if (in && !prev_in) {
      cur.lo = i == 0 ? p : bisect_edge(p, prev_p, lo_lv, hi_lv, a, b);
      open = true;
    } else if (!in && prev_in) {
      cur.hi = bisect_edge(prev_p, p, lo_lv, hi_lv, a, b);
      out.push_back(cur);
      open = false;
    }
    prev_in = in;
    prev_p = p;
  }
  if (open) {
    cur.hi = prev_in ? prev_p : cur.hi;
    out.push_back(cur);
  }

  // Merge pieces that bisection left touching (shared level-zero endpoint).
  std::vector<Interval> merged;
  for (const auto& iv : out) {
    if (!merged.empty() && iv.lo - merged.back().hi < 1e-12) {
      merged.back().hi = iv.hi;
    } else {
      merged.push_back(iv);
    }
  }
  return merged;
}

}  // namespace inferlab
