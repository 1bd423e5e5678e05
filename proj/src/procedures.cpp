#include "inferlab/procedures.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "inferlab/mathutil.hpp"
#include "inferlab/rng.hpp"

namespace inferlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Numeric observations of the data, for mean-based rules.
const std::vector<double>* numeric_values(const DataValue& d) {
  if (const auto* r = std::get_if<RealSeq>(&d)) return &r->values;
  if (const auto* l = std::get_if<LabMeasurements>(&d)) return &l->values;
  if (const auto* r = std::get_if<RegressionOutcomes>(&d)) return &r->values;
  return nullptr;
}

double mean_or_throw(const DataValue& d, const char* rule) {
  const auto* vals = numeric_values(d);
  if (!vals || vals->empty()) {
    throw std::domain_error(std::string(rule) + " needs real-valued data, got " +
                            data_shape_name(d));
  }
  return std::accumulate(vals->begin(), vals->end(), 0.0) /
         static_cast<double>(vals->size());
}

}  // namespace

std::string procedure_name(const Procedure& p) {
  if (const auto* pe = std::get_if<PointEst>(&p.v)) {
    if (std::holds_alternative<SampleMeanEst>(pe->rule)) return "sample_mean";
    if (std::holds_alternative<MinimaxBinomialEst>(pe->rule)) {
      return "minimax_binomial";
    }
    return "plug_in_marker";
  }
  if (const auto* iv = std::get_if<IntervalProc>(&p.v)) {
    if (std::holds_alternative<AdditiveLower>(iv->rule)) {
      return "additive_lower";
    }
    if (std::holds_alternative<MultiplicativePivotLower>(iv->rule)) {
      return "pivot_lower";
    }
    return "z_interval";
  }
  const auto& t = std::get<TestProc>(p.v);
  if (std::holds_alternative<PThresholdTest>(t.rule)) return "p_threshold";
  if (std::holds_alternative<ZTest>(t.rule)) return "z_test";
  return "diagnostic_predict";
}

Decision apply(const Procedure& proc, const DataValue& data) {
  if (const auto* pe = std::get_if<PointEst>(&proc.v)) {
    if (std::holds_alternative<SampleMeanEst>(pe->rule)) {
      return Estimate{mean_or_throw(data, "sample_mean")};
    }
    if (std::holds_alternative<MinimaxBinomialEst>(pe->rule)) {
      const auto* t = std::get_if<TestResults>(&data);
      if (!t || t->results.empty()) {
        throw std::domain_error("minimax_binomial needs binary outcomes, got " +
                                data_shape_name(data));
      }
      std::uint64_t x = 0;
      for (int r : t->results) x += r != 0 ? 1 : 0;
      return Estimate{minimax_binomial_estimate(x, t->results.size())};
    }
    const auto* m = std::get_if<MarkerEstimates>(&data);
    if (!m) {
      throw std::domain_error("plug_in_marker needs a marker panel, got " +
                              data_shape_name(data));
    }
    return EstimateVec{m->estimates};
  }

  if (const auto* iv = std::get_if<IntervalProc>(&proc.v)) {
    if (const auto* al = std::get_if<AdditiveLower>(&iv->rule)) {
      return IntervalDecision{mean_or_throw(data, "additive_lower") - al->buffer,
                              kInf};
    }
    if (const auto* mp = std::get_if<MultiplicativePivotLower>(&iv->rule)) {
      if (mp->resolved_c <= 0.0) {
        throw std::domain_error(
            "pivot_lower has no resolved quantile constant; resolve the "
            "procedure against a scenario first");
      }
      return IntervalDecision{
          mean_or_throw(data, "pivot_lower") / mp->resolved_c, kInf};
    }
    const auto& zi = std::get<ZInterval>(iv->rule);
    const auto* vals = numeric_values(data);
    if (!vals || vals->empty()) {
      throw std::domain_error("z_interval needs real-valued data, got " +
                              data_shape_name(data));
    }
    double n = static_cast<double>(vals->size());
    double m = std::accumulate(vals->begin(), vals->end(), 0.0) / n;
    double half = norm_quantile(0.5 + zi.level / 2.0) / std::sqrt(n);
    return IntervalDecision{m - half, m + half};
  }

  const auto& tp = std::get<TestProc>(proc.v);
  if (const auto* pt = std::get_if<PThresholdTest>(&tp.rule)) {
    const auto* p = std::get_if<PValue>(&data);
    if (!p) {
      throw std::domain_error("p_threshold needs a p-value, got " +
                              data_shape_name(data));
    }
    return TestDecision{p->value <= pt->alpha};
  }
  if (const auto* zt = std::get_if<ZTest>(&tp.rule)) {
    const auto* vals = numeric_values(data);
    if (!vals || vals->empty()) {
      throw std::domain_error("z_test needs real-valued data, got " +
                              data_shape_name(data));
    }
    double n = static_cast<double>(vals->size());
    double m = std::accumulate(vals->begin(), vals->end(), 0.0) / n;
    return TestDecision{std::sqrt(n) * std::abs(m) > zt->critical};
  }
  const auto* t = std::get_if<TestResults>(&data);
  if (!t || t->results.size() != 1) {
    throw std::domain_error(
        "diagnostic_predict needs a single test result, got " +
        data_shape_name(data));
  }
  return TestDecision{t->results[0] != 0};
}

LossValue loss(const Procedure& proc, const Decision& dec,
               const std::vector<double>& truth,
               std::optional<LossKind> kind) {
  if (std::holds_alternative<IntervalProc>(proc.v)) {
    const auto& iv = std::get<IntervalDecision>(dec);
    double theta = truth.at(0);
    bool covered = theta >= iv.lo && theta <= iv.hi;
    return LossValue{covered ? 0.0 : 1.0, LossKind::Miss};
  }
  if (std::holds_alternative<TestProc>(proc.v)) {
    bool reject = std::get<TestDecision>(dec).reject;
    bool alternative = truth.at(0) != 0.0;
    return LossValue{reject == alternative ? 0.0 : 1.0, LossKind::TestError};
  }
  const auto* est = std::get_if<Estimate>(&dec);
  if (!est) {
    throw std::domain_error(
        "per-marker estimates are scored by the panel report, not a scalar "
        "loss");
  }
  double err = est->value - truth.at(0);
  LossKind k = kind.value_or(LossKind::SquaredError);
  if (k == LossKind::AbsError) return LossValue{std::abs(err), k};
  if (k != LossKind::SquaredError) {
    throw std::domain_error("point estimates take squared or absolute loss");
  }
  return LossValue{err * err, k};
}

namespace {

bool noise_is_positive(const NoiseSpec& noise) {
  if (std::holds_alternative<UnitMeanExponential>(noise.v)) return true;
  if (std::holds_alternative<UnitMeanLogNormal>(noise.v)) return true;
  if (const auto* c = std::get_if<Categorical>(&noise.v)) {
    return std::all_of(c->values.begin(), c->values.end(),
                       [](double v) { return v > 0.0; });
  }
  return false;
}

std::uint64_t noise_key(const NoiseSpec& noise) {
  std::uint64_t h = rng::mix64(noise.v.index() + 0x51);
  auto mixd = [&h](double x) {
    std::uint64_t u;
    std::memcpy(&u, &x, sizeof(u));
    h = rng::mix64(h ^ (u + rng::kGolden));
  };
  if (const auto* ln = std::get_if<UnitMeanLogNormal>(&noise.v)) {
    mixd(ln->sigma);
  } else if (const auto* c = std::get_if<Categorical>(&noise.v)) {
    for (double v : c->values) mixd(v);
    for (double p : c->probs) mixd(p);
  } else if (const auto* b = std::get_if<BetaPValue>(&noise.v)) {
    mixd(b->a);
    mixd(b->b);
  } else if (const auto* ch = std::get_if<BernoulliChannel>(&noise.v)) {
    mixd(ch->sensitivity);
    mixd(ch->specificity);
  } else if (const auto* tl = std::get_if<TwoLabMixture>(&noise.v)) {
    mixd(tl->sd_lab1);
    mixd(tl->sd_lab2);
    mixd(tl->prob_lab1);
  }
  return h;
}

// Empirical level-quantile of the mean of n noise draws. Fixed internal
// seed so the constant is stable across runs and worker counts.
double mc_pivot_quantile(const NoiseSpec& noise, std::size_t n, double level) {
  constexpr std::uint64_t kDraws = 4'000'000;
  rng::Engine g = rng::engine_for(SeedSpec{0x9072C5F1u, 77}, noise_key(noise));
  std::vector<double> means(kDraws);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::holds_alternative<UnitMeanExponential>(noise.v)) {
        s += rng::exponential(g);
      } else if (const auto* ln = std::get_if<UnitMeanLogNormal>(&noise.v)) {
        s += rng::lognormal_unit(g, ln->sigma);
      } else {
        const auto& c = std::get<Categorical>(noise.v);
        double u = rng::u01(g);
        double acc = 0.0;
        std::size_t idx = c.probs.size() - 1;
        for (std::size_t j = 0; j < c.probs.size(); ++j) {
          acc += c.probs[j];
          if (u < acc) {
            idx = j;
            break;
          }
        }
        s += c.values[idx];
      }
    }
    m = s / static_cast<double>(n);
  }
  auto rank = static_cast<std::size_t>(
      std::ceil(level * static_cast<double>(kDraws))) - 1;
  rank = std::min(rank, means.size() - 1);
  std::nth_element(means.begin(), means.begin() + static_cast<long>(rank),
                   means.end());
  return means[rank];
}

}  // namespace

double pivot_c(const NoiseSpec& noise, std::size_t n, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("pivot level must lie in (0, 1)");
  }
  if (n == 0) throw std::domain_error("pivot needs at least one observation");
  if (!noise_is_positive(noise)) {
    throw std::domain_error(
        "pivot bound needs a positive noise law (multiplicative scale)");
  }

  if (const auto* c = std::get_if<Categorical>(&noise.v)) {
    if (c->values.size() == 1) return c->values[0];
    if (n == 1) {
      // Walk the CDF of the sorted atoms.
      std::vector<std::size_t> order(c->values.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return c->values[i] < c->values[j];
      });
      double acc = 0.0;
      for (std::size_t i : order) {
        acc += c->probs[i];
        if (acc >= level) return c->values[i];
      }
      return c->values[order.back()];
    }
  }
  if (std::holds_alternative<UnitMeanExponential>(noise.v) && n == 1) {
    return -std::log1p(-level);
  }
  if (const auto* ln = std::get_if<UnitMeanLogNormal>(&noise.v); ln && n == 1) {
    return std::exp(ln->sigma * norm_quantile(level) -
                    ln->sigma * ln->sigma / 2.0);
  }

  static std::mutex mu;
  static std::map<std::tuple<std::uint64_t, std::size_t, double>, double>
      cache;
  auto key = std::make_tuple(noise_key(noise), n, level);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  double c = mc_pivot_quantile(noise, n, level);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, c).first->second;
}

double pivot_bound(const std::vector<double>& data, const NoiseSpec& noise,
                   double level) {
  if (data.empty()) throw std::domain_error("pivot bound needs data");
  for (double y : data) {
    if (!(y > 0.0)) {
      throw std::domain_error(
          "pivot bound needs strictly positive observations");
    }
  }
  double mean = std::accumulate(data.begin(), data.end(), 0.0) /
                static_cast<double>(data.size());
  return mean / pivot_c(noise, data.size(), level);
}

double minimax_binomial_estimate(std::uint64_t successes, std::uint64_t n) {
  double x = static_cast<double>(successes);
  double sqn = std::sqrt(static_cast<double>(n));
  return (x + sqn / 2.0) / (static_cast<double>(n) + sqn);
}

Procedure resolve_procedure(const Procedure& proc, const Scenario& s) {
  Procedure out = proc;
  if (auto* iv = std::get_if<IntervalProc>(&out.v)) {
    if (auto* mp = std::get_if<MultiplicativePivotLower>(&iv->rule)) {
      if (!std::holds_alternative<Multiplicative>(s.structure.v)) {
        throw std::domain_error(
            "pivot_lower applies to multiplicative scenarios only");
      }
      mp->resolved_c = pivot_c(s.noise, s.n, mp->level);
    }
  }
  return out;
}

}  // namespace inferlab
