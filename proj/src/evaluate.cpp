#include "inferlab/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "inferlab/errors.hpp"
#include "inferlab/genctl.hpp"
#include "inferlab/mathutil.hpp"

namespace inferlab {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

void check_match_spec(const Scenario& s, const MatchSpec& m) {
  if (const auto* a = std::get_if<AbsLogLR>(&m.statistic.v)) {
    const auto* bp = std::get_if<BetaPValue>(&s.noise.v);
    if (!bp || bp->a != a->a || bp->b != a->b) {
      throw ValidationError(
          "abs_log_lr parameters must equal the scenario's alternative "
          "p-value law");
    }
  }
  if (m.tolerance < 0.0) {
    throw ValidationError("match tolerance must be nonnegative");
  }
}

bool binary_loss(const Procedure& proc) {
  return std::holds_alternative<IntervalProc>(proc.v) ||
         std::holds_alternative<TestProc>(proc.v);
}

double se_of(const MomentSums& sums, bool binary) {
  if (sums.n == 0) return 0.0;
  if (binary) {
    double p = sums.mean();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(sums.n));
  }
  return sums.se();
}

// Accumulates the loss of accepted controls for every tolerance in `taus`
// over the index range [lo, hi). taus must be sorted ascending; a control
// within distance taus[j] is within every later tolerance too.
void scan_range(const ControlGenerator& gen, const Procedure& proc,
                const MatchSpec& m, const StatValue& target_stat,
                const std::vector<double>& taus,
                std::optional<LossKind> kind, std::uint64_t lo,
                std::uint64_t hi, std::vector<MomentSums>& out) {
  const double tau_max = taus.back();
  for (std::uint64_t i = lo; i < hi; ++i) {
    ControlProblem p = gen.problem(i);
    double dist;
    if (m.metric == Metric::ExactEquality) {
      // Exact equality ignores the tolerance entirely.
      if (!(extract_statistic(p.data(), m.statistic) == target_stat)) continue;
      dist = 0.0;
    } else {
      dist = metric_distance(extract_statistic(p.data(), m.statistic),
                             target_stat, m.metric, m.statistic);
    }
    if (!(dist <= tau_max)) continue;
    double delta = loss(proc, apply(proc, p.data()), p.truth(), kind).delta;
    auto first =
        std::lower_bound(taus.begin(), taus.end(), dist) - taus.begin();
    for (std::size_t j = static_cast<std::size_t>(first); j < taus.size();
         ++j) {
      out[j].add(delta);
    }
  }
}

// One streamed pass per prior; returns per-tau sums, reduced across workers
// in worker order so the result is deterministic for a fixed thread count.
std::vector<MomentSums> run_cells(const Scenario& s, const Procedure& proc,
                                  const MatchSpec& m,
                                  const TargetProblem& target,
                                  const std::vector<double>& taus,
                                  std::uint64_t count, SeedSpec seed,
                                  int threads,
                                  std::optional<LossKind> kind) {
  check_match_spec(s, m);
  ControlGenerator gen(s, seed);
  Procedure resolved = resolve_procedure(proc, s);
  StatValue target_stat = extract_statistic(target, m.statistic);

  int workers = std::max(1, threads);
  if (static_cast<std::uint64_t>(workers) > count) {
    workers = static_cast<int>(std::max<std::uint64_t>(count, 1));
  }
  std::vector<std::vector<MomentSums>> partial(
      static_cast<std::size_t>(workers),
      std::vector<MomentSums>(taus.size()));

  if (workers == 1) {
    scan_range(gen, resolved, m, target_stat, taus, kind, 0, count,
               partial[0]);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      std::uint64_t lo = count * static_cast<std::uint64_t>(w) /
                         static_cast<std::uint64_t>(workers);
      std::uint64_t hi = count * static_cast<std::uint64_t>(w + 1) /
                         static_cast<std::uint64_t>(workers);
      pool.emplace_back([&, w, lo, hi] {
        scan_range(gen, resolved, m, target_stat, taus, kind, lo, hi,
                   partial[static_cast<std::size_t>(w)]);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<MomentSums> total(taus.size());
  for (const auto& part : partial) {
    for (std::size_t j = 0; j < taus.size(); ++j) total[j].merge(part[j]);
  }
  return total;
}

}  // namespace

void write_error_report(std::ostream& os, const ErrorReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "{\"estimate\": %.12g, \"mc_se\": %.12g, \"accepted\": %llu, "
                "\"generated\": %llu, \"acceptance_rate\": %.12g}",
                r.estimate, r.mc_se,
                static_cast<unsigned long long>(r.accepted),
                static_cast<unsigned long long>(r.generated),
                r.acceptance_rate);
  os << buf << "\n";
}

ErrorReport conditional_error(const Scenario& s, const Procedure& proc,
                              const MatchSpec& m, const TargetProblem& target,
                              std::uint64_t count, SeedSpec seed, int threads,
                              std::optional<LossKind> kind) {
  if (count == 0) throw ValidationError("control count must be positive");
  auto cells = run_cells(s, proc, m, target, {m.tolerance}, count, seed,
                         threads, kind);
  const MomentSums& sums = cells[0];
  if (sums.n == 0) {
    throw EmptyRelevantSet(static_cast<long long>(count));
  }
  ErrorReport r;
  r.estimate = sums.mean();
  r.mc_se = se_of(sums, binary_loss(proc));
  r.accepted = sums.n;
  r.generated = count;
  r.acceptance_rate =
      static_cast<double>(r.accepted) / static_cast<double>(r.generated);
  return r;
}

SensitivityBand sensitivity_band(const Scenario& s_template,
                                 const Procedure& proc,
                                 const StatisticId& statistic,
                                 const std::vector<double>& tau_grid,
                                 const std::vector<PriorSpec>& prior_family,
                                 const TargetProblem& target,
                                 std::uint64_t count, SeedSpec seed,
                                 int threads, Metric metric) {
  if (prior_family.empty()) {
    throw ValidationError("sensitivity band needs a nonempty prior family");
  }
  if (tau_grid.empty()) {
    throw ValidationError("sensitivity band needs a nonempty tau grid");
  }
  if (count == 0) throw ValidationError("control count must be positive");

  // Scan with an ascending grid; report rows in the caller's order.
  std::vector<double> taus = tau_grid;
  std::sort(taus.begin(), taus.end());
  std::map<double, std::size_t> tau_slot;
  for (std::size_t j = 0; j < taus.size(); ++j) tau_slot[taus[j]] = j;

  MatchSpec m{statistic, 0.0, metric};
  const bool binary = binary_loss(proc);

  std::vector<std::vector<MomentSums>> family_cells;
  family_cells.reserve(prior_family.size());
  for (const auto& prior : prior_family) {
    Scenario s = s_template;
    s.prior = prior;
    m.tolerance = taus.back();
    family_cells.push_back(run_cells(s, proc, m, target, taus, count, seed,
                                     threads, std::nullopt));
  }

  SensitivityBand band;
  band.tau_grid = tau_grid;
  band.rows.reserve(tau_grid.size());
  for (double tau : tau_grid) {
    std::size_t j = tau_slot.at(tau);
    BandRow row;
    row.tau = tau;
    row.err_min = kNan;
    row.err_max = kNan;
    row.err_nominal = kNan;
    row.mc_se = kNan;
    row.accepted_min = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t f = 0; f < family_cells.size(); ++f) {
      const MomentSums& cell = family_cells[f][j];
      row.accepted_min = std::min(row.accepted_min,
                                  static_cast<std::uint64_t>(cell.n));
      if (cell.n == 0) {
        ++row.missing_cells;
        continue;
      }
      double err = cell.mean();
      if (std::isnan(row.err_min) || err < row.err_min) row.err_min = err;
      if (std::isnan(row.err_max) || err > row.err_max) row.err_max = err;
      if (f == 0) {
        row.err_nominal = err;
        row.mc_se = se_of(cell, binary);
      }
    }
    band.rows.push_back(row);
  }
  return band;
}

void write_band_csv(std::ostream& os, const SensitivityBand& band) {
  os << "tau,err_min,err_max,err_nominal,mc_se,accepted_min\n";
  char buf[256];
  for (const auto& row : band.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%.12g,%llu\n",
                  row.tau, row.err_min, row.err_max, row.err_nominal,
                  row.mc_se,
                  static_cast<unsigned long long>(row.accepted_min));
    os << buf;
  }
}

// ---------------------------------------------- finite-population ANOVA ----

namespace {

using GroupKey = std::vector<int>;

GroupKey prefix_key(const PopRecord& rec, std::size_t r) {
  if (r > rec.covariates.size()) {
    throw std::domain_error("covariate level exceeds the recorded depth");
  }
  return GroupKey(rec.covariates.begin(),
                  rec.covariates.begin() + static_cast<long>(r));
}

std::map<GroupKey, MomentSums> group_sums(const FinitePopulation& pop,
                                          std::size_t r) {
  std::map<GroupKey, MomentSums> groups;
  for (const auto& rec : pop.records) {
    groups[prefix_key(rec, r)].add(rec.outcome);
  }
  return groups;
}

}  // namespace

double anova_gain(const FinitePopulation& pop, std::size_t r) {
  if (pop.records.empty()) {
    throw std::domain_error("population must be nonempty");
  }
  MomentSums all;
  for (const auto& rec : pop.records) all.add(rec.outcome);
  double mu = all.mean();

  auto groups = group_sums(pop, r);
  double acc = 0.0;
  for (const auto& rec : pop.records) {
    double mu_r = groups.at(prefix_key(rec, r)).mean();
    acc += (mu_r - mu) * (mu_r - mu);
  }
  return acc / static_cast<double>(pop.records.size());
}

TradeoffEstimate tradeoff_estimate(const FinitePopulation& pop,
                                   std::size_t trial_size, std::size_t r,
                                   std::size_t replications, SeedSpec seed) {
  const std::size_t n = pop.records.size();
  if (n == 0) throw std::domain_error("population must be nonempty");
  if (trial_size == 0 || trial_size > n) {
    throw std::domain_error("trial size must lie in [1, population size]");
  }
  if (replications == 0) {
    throw std::domain_error("need at least one replication");
  }

  auto fine = group_sums(pop, r + 1);
  auto coarse = group_sums(pop, r);

  TradeoffEstimate out;
  for (const auto& rec : pop.records) {
    double d = fine.at(prefix_key(rec, r + 1)).mean() -
               coarse.at(prefix_key(rec, r)).mean();
    out.gain += d * d;
  }
  out.gain /= static_cast<double>(n);

  // Loss: extra estimation noise at the finer level, averaged over trials
  // drawn without replacement. A trial missing a record's subgroup falls
  // back one level at a time (ultimately to the trial mean) and flags the
  // replication.
  std::vector<std::size_t> idx(n);
  double loss_fine_sum = 0.0;
  double loss_coarse_sum = 0.0;
  for (std::size_t rep = 0; rep < replications; ++rep) {
    rng::Engine g = rng::engine_for(seed, rep);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < trial_size; ++i) {
      std::size_t j = i + static_cast<std::size_t>(
                              g() % static_cast<std::uint64_t>(n - i));
      std::swap(idx[i], idx[j]);
    }

    // Trial subgroup means at every level up to r+1, for the fallback chain.
    std::vector<std::map<GroupKey, MomentSums>> trial_levels(r + 2);
    for (std::size_t i = 0; i < trial_size; ++i) {
      const PopRecord& rec = pop.records[idx[i]];
      for (std::size_t lvl = 0; lvl <= r + 1; ++lvl) {
        trial_levels[lvl][prefix_key(rec, lvl)].add(rec.outcome);
      }
    }

    bool flagged = false;
    auto trial_mean_at = [&](const PopRecord& rec, std::size_t lvl) {
      for (std::size_t back = lvl + 1; back-- > 0;) {
        auto it = trial_levels[back].find(prefix_key(rec, back));
        if (it != trial_levels[back].end()) {
          if (back != lvl) flagged = true;
          return it->second.mean();
        }
      }
      flagged = true;  // unreachable: level 0 always has the trial mean
      return trial_levels[0].begin()->second.mean();
    };

    double fine_acc = 0.0;
    double coarse_acc = 0.0;
    for (const auto& rec : pop.records) {
      double mu_fine = fine.at(prefix_key(rec, r + 1)).mean();
      double mu_coarse = coarse.at(prefix_key(rec, r)).mean();
      double ef = trial_mean_at(rec, r + 1) - mu_fine;
      double ec = trial_mean_at(rec, r) - mu_coarse;
      fine_acc += ef * ef;
      coarse_acc += ec * ec;
    }
    loss_fine_sum += fine_acc / static_cast<double>(n);
    loss_coarse_sum += coarse_acc / static_cast<double>(n);
    if (flagged) ++out.flagged_replications;
  }

  out.loss = (loss_fine_sum - loss_coarse_sum) /
             static_cast<double>(replications);
  out.net = out.gain - out.loss;
  return out;
}

// ---------------------------------------------------- partial matching -----

double leverage(const Eigen::MatrixXd& design, const Eigen::VectorXd& x0) {
  if (design.rows() < 1 || design.cols() < 1) {
    throw std::domain_error("design must be nonempty");
  }
  if (x0.size() != design.cols()) {
    throw std::domain_error("target covariates must match the design width");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw std::domain_error("design is not full column rank");
  }
  // X P = Q R, so (X'X)^{-1} = P R^{-1} R^{-T} P' and the quadratic form is
  // the squared norm of R^{-T} P' x0.
  Eigen::MatrixXd r = qr.matrixR()
                          .topLeftCorner(design.cols(), design.cols())
                          .triangularView<Eigen::Upper>();
  Eigen::VectorXd w = qr.colsPermutation().transpose() * x0;
  r.transpose().triangularView<Eigen::Lower>().solveInPlace(w);
  return w.squaredNorm();
}

PartialMatchReport partial_match_decomposition(const Eigen::MatrixXd& design,
                                               const Eigen::VectorXd& x0,
                                               const GaussianPrior& prior,
                                               std::uint64_t count,
                                               SeedSpec seed) {
  const Eigen::Index n = design.rows();
  const Eigen::Index k = design.cols();
  if (n < 1) throw std::domain_error("design must be nonempty");
  if (x0.size() != k || (design.row(0).transpose() - x0).norm() != 0.0) {
    throw std::invalid_argument(
        "target covariates must equal the design's first row");
  }
  if (!(prior.sd > 0.0)) {
    throw std::domain_error("prior sd must be positive");
  }
  if (count == 0) throw std::domain_error("need at least one draw");

  const double h0 = leverage(design, x0);  // also checks the rank

  // Synthetic target outcomes: coefficients and noise are standard normal,
  // drawn from a dedicated stream so they never depend on the prior.
  constexpr std::uint64_t kTargetIndex =
      std::numeric_limits<std::uint64_t>::max();
  rng::Engine tg = rng::engine_for(seed, kTargetIndex);
  Eigen::VectorXd beta_target(k);
  for (Eigen::Index j = 0; j < k; ++j) beta_target(j) = rng::normal(tg);
  Eigen::VectorXd y = design * beta_target;
  for (Eigen::Index i = 0; i < n; ++i) y(i) += rng::normal(tg);

  // Observed fit and the matched-data posterior of the control coefficients.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  Eigen::VectorXd beta_hat = qr.solve(y);
  const double fit0 = x0.dot(beta_hat);
  const double r1 = y(0) - fit0;

  const Eigen::MatrixXd rest = design.bottomRows(n - 1);
  const Eigen::VectorXd y_rest = y.tail(n - 1);
  const double prec0 = 1.0 / (prior.sd * prior.sd);
  Eigen::MatrixXd a = rest.transpose() * rest;
  a.diagonal().array() += prec0;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::domain_error("posterior precision is not positive definite");
  }
  Eigen::VectorXd rhs = rest.transpose() * y_rest;
  rhs.array() += prec0 * prior.mean;
  const Eigen::VectorXd post_mean = llt.solve(rhs);
  const Eigen::MatrixXd chol_u = llt.matrixU();

  PartialMatchReport report;
  report.h0 = h0;
  report.b_samples.reserve(count);
  report.f_samples.reserve(count);
  report.identity_residuals.reserve(count);

  Eigen::VectorXd z(k);
  for (std::uint64_t i = 0; i < count; ++i) {
    rng::Engine g = rng::engine_for(seed, i);
    for (Eigen::Index j = 0; j < k; ++j) z(j) = rng::normal(g);
    double eps1 = rng::normal(g);

    // beta' ~ N(post_mean, A^{-1}); A = U'U gives A^{-1} = U^{-1} U^{-T}.
    Eigen::VectorXd beta_prime = z;
    chol_u.triangularView<Eigen::Upper>().solveInPlace(beta_prime);
    beta_prime += post_mean;

    const double y1_prime = x0.dot(beta_prime) + eps1;
    const double b = fit0 - x0.dot(beta_prime);
    const double f = eps1 - r1;
    const double lhs = fit0 + h0 * (y1_prime - y(0)) - x0.dot(beta_prime);
    report.b_samples.push_back(b);
    report.f_samples.push_back(f);
    report.identity_residuals.push_back(lhs - (1.0 - h0) * b - h0 * f);
  }
  return report;
}

}  // namespace inferlab
