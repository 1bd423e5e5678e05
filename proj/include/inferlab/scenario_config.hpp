// Line-oriented scenario config files: `key = value` with function-call
// value expressions, e.g. `prior = two_point(0, 1, 0.5)`. The grammar is
// documented in configs/README.md; parse errors carry 1-based line numbers.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "inferlab/distmodel.hpp"
#include "inferlab/evaluate.hpp"
#include "inferlab/procedures.hpp"
#include "inferlab/relevance.hpp"
#include "inferlab/rng.hpp"

namespace inferlab {

struct ParsedConfig {
  // Present when the file declares prior + noise + structure (n defaults
  // to 1). Ops that simulate controls require it.
  std::optional<Scenario> scenario;
  std::optional<Procedure> procedure;
  std::optional<MatchSpec> match;
  std::optional<TargetProblem> target;
  std::optional<std::uint64_t> count;
  std::optional<SeedSpec> seed;
  std::optional<std::string> op;
  std::optional<std::vector<double>> tau_grid;
  std::optional<LossKind> loss_kind;
  // Band family; when present the first member is the nominal prior.
  std::optional<std::vector<PriorSpec>> prior_family;

  // Block-pattern inputs (`op = patterns`).
  std::optional<std::string> sequence;
  std::optional<std::size_t> block_length;
  std::optional<std::size_t> min_length;

  // Finite-population inputs (`op = anova` / `op = tradeoff`).
  std::optional<FinitePopulation> population;
  std::optional<std::size_t> trial_size;
  std::optional<std::size_t> level;
  std::optional<std::size_t> replications;

  // Exact-analysis input (`op = risk`).
  std::optional<std::uint64_t> coin_flips;
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

// `lo:hi:step`, endpoints inclusive within 1e-9. `line` seeds the
// ConfigError location when the text comes from a config file; pass 0 for
// command-line input.
std::vector<double> parse_tau_grid(const std::string& text, int line = 0);

// Deterministic display forms, e.g. "BernoulliChannel(0.9, 0.9)".
std::string prior_text(const PriorSpec& p);
std::string noise_text(const NoiseSpec& n);
std::string structure_text(const StructuralModel& s);
std::string procedure_text(const Procedure& p);
std::string match_text(const MatchSpec& m);
std::string target_text(const TargetProblem& t);

// Text report of everything the config resolves to, plus scenario validation
// findings. Runs no simulation.
std::string describe(const ParsedConfig& cfg);

}  // namespace inferlab
