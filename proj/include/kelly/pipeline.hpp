#pragma once

// End-to-end run: parse, enumerate, build constraints, solve every
// active/inactive combination, filter, select, report.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kelly/constraint_system.hpp"
#include "kelly/error.hpp"
#include "kelly/kkt_solver.hpp"
#include "kelly/portfolio_io.hpp"
#include "kelly/portfolio_model.hpp"
#include "kelly/portfolio_stats.hpp"

namespace kelly {

struct RunConfig {
  std::string input_path;
  ConstraintPolicy policy;
  /// Drop every constraint, including the default long-only one. Cannot be
  /// combined with any other policy option.
  bool unconstrained = false;
  ValidationOptions validation;
  SolverConfig solver;
  std::vector<double> exceedance_thresholds = default_exceedance_thresholds();
  std::size_t outcome_cap = kDefaultOutcomeCap;
};

struct RunMetadata {
  std::vector<std::string> company_names;
  std::vector<std::string> constraint_labels;
  std::size_t num_outcomes = 0;
  std::uint64_t systems_attempted = 0;
  std::uint64_t systems_converged = 0;
  std::uint64_t viable_solutions = 0;
  StatusMask selected_mask;
  std::size_t selected_iterations = 0;
  double kkt_residual = 0.0;
  /// Not part of the structured report, which must be reproducible byte for byte.
  double wall_seconds = 0.0;
};

struct PipelineResult {
  AllocationReport report;
  RunMetadata metadata;
};

inline ConstraintPolicy effective_policy(const RunConfig& config) {
  if (!config.unconstrained) return config.policy;
  const auto& p = config.policy;
  if (p.max_leverage || p.max_allocation || p.max_loss) {
    throw InvalidPolicy("--unconstrained cannot be combined with other constraint options");
  }
  return ConstraintPolicy::unconstrained();
}

inline PipelineResult run_pipeline(const std::vector<Company>& companies, const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  for (const auto& c : companies) validate_company(c, config.validation);

  const OutcomeSpace space = enumerate_outcomes(companies, config.outcome_cap);
  const ConstraintSet constraints = build_constraint_set(effective_policy(config), companies.size());
  const auto solutions = solve_all(space, constraints, config.solver);
  const auto viable = filter_viable(solutions, space, constraints, config.solver);
  const CandidateSolution chosen = select_solution(viable, space, config.solver);

  PipelineResult result;
  result.report = compute_report(chosen.fractions, space, config.exceedance_thresholds);

  auto& meta = result.metadata;
  for (const auto& c : companies) meta.company_names.push_back(c.name);
  for (const auto& c : constraints) meta.constraint_labels.push_back(describe(c));
  meta.num_outcomes = space.num_outcomes();
  meta.systems_attempted = solutions.size();
  for (const auto& s : solutions) meta.systems_converged += s.converged ? 1 : 0;
  meta.viable_solutions = viable.size();
  meta.selected_mask = chosen.mask;
  meta.selected_iterations = chosen.iterations;
  meta.kkt_residual = chosen.residual_norm;
  meta.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open input file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline PipelineResult run_pipeline(const RunConfig& config) {
  const auto companies = io::parse_portfolio(read_file(config.input_path), config.validation);
  return run_pipeline(companies, config);
}

}  // namespace kelly
