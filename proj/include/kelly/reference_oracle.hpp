#pragma once

// Independent cross-checks for the KKT solver: exhaustive grid search, the
// closed-form two-outcome Kelly fraction, a Monte Carlo estimate of the growth
// rate, and a direct re-enumeration of the report statistics. None of these
// reuse the solver's derivative or enumeration code.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "kelly/constraint_system.hpp"
#include "kelly/error.hpp"
#include "kelly/portfolio_model.hpp"

namespace kelly::oracle {

struct GridSpec {
  double resolution = 0.01;
  /// Per-company [lower, upper] interval; one entry applies to every company.
  std::vector<std::pair<double, double>> bounds{{0.0, 1.0}};
};

inline constexpr std::uint64_t kMaxGridPoints = 100'000'000;
inline constexpr std::size_t kMaxGridCompanies = 4;

namespace detail {

inline double log_growth(const std::vector<double>& f, const OutcomeSpace& space, bool& valid) {
  double g = 0.0;
  for (Eigen::Index i = 0; i < space.returns.rows(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      w += f[j] * space.returns(i, static_cast<Eigen::Index>(j));
    }
    if (!(w > 0.0)) {
      valid = false;
      return -std::numeric_limits<double>::infinity();
    }
    g += space.probabilities(i) * std::log(w);
  }
  valid = true;
  return g;
}

}  // namespace detail

/// Exhaustive search of the feasible grid. Ties keep the lexicographically
/// smallest point.
inline FractionVector brute_force_maximize(const OutcomeSpace& space, const ConstraintSet& constraints,
                                           const GridSpec& grid = {}) {
  const std::size_t n = space.num_companies();
  if (n > kMaxGridCompanies) {
    throw GridTooLarge("grid search supports at most " + std::to_string(kMaxGridCompanies) +
                       " companies");
  }
  if (!(grid.resolution > 0.0)) throw std::invalid_argument("grid resolution must be positive");
  if (grid.bounds.size() != 1 && grid.bounds.size() != n) {
    throw std::invalid_argument("grid bounds must have one entry or one per company");
  }

  std::vector<double> lower(n);
  std::vector<std::uint64_t> steps(n);
  std::uint64_t total = 1;
  for (std::size_t j = 0; j < n; ++j) {
    const auto [lo, hi] = grid.bounds.size() == 1 ? grid.bounds.front() : grid.bounds[j];
    if (!(hi >= lo)) throw std::invalid_argument("grid bound upper < lower");
    lower[j] = lo;
    steps[j] = static_cast<std::uint64_t>(std::floor((hi - lo) / grid.resolution + 1e-9)) + 1;
    if (total > kMaxGridPoints / steps[j]) {
      throw GridTooLarge("grid would exceed " + std::to_string(kMaxGridPoints) + " points");
    }
    total *= steps[j];
  }

  std::vector<std::uint64_t> index(n, 0);
  std::vector<double> point(n);
  FractionVector probe(static_cast<Eigen::Index>(n));
  FractionVector best;
  double best_growth = -std::numeric_limits<double>::infinity();

  for (std::uint64_t k = 0; k < total; ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      point[j] = lower[j] + static_cast<double>(index[j]) * grid.resolution;
      probe(static_cast<Eigen::Index>(j)) = point[j];
    }

    bool feasible = true;
    for (const auto& c : constraints) {
      if (constraint_value(c, probe, space) > 0.0) {
        feasible = false;
        break;
      }
    }
    if (feasible) {
      bool valid = false;
      const double g = detail::log_growth(point, space, valid);
      if (valid && g > best_growth) {
        best_growth = g;
        best = probe;
      }
    }

    // Last company varies fastest, so points are visited in lexicographic order.
    for (std::size_t j = n; j-- > 0;) {
      if (++index[j] < steps[j]) break;
      index[j] = 0;
    }
  }

  if (best.size() == 0) throw NoViableSolution("no feasible grid point inside the growth domain");
  return best;
}

/// Unconstrained log-optimal fraction for one asset that gains `gain` with
/// probability p_gain and loses `loss` otherwise.
inline double analytic_kelly_single(double p_gain, double gain, double loss) {
  return (p_gain * gain - (1.0 - p_gain) * loss) / (gain * loss);
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Samples outcomes by probability and averages ln(1 + sum_j f_j k_ij).
/// Deterministic for a given seed on a given standard library.
inline MonteCarloEstimate monte_carlo_growth_estimate(const FractionVector& f,
                                                      const OutcomeSpace& space, std::size_t paths,
                                                      std::uint64_t seed) {
  if (paths == 0) throw std::invalid_argument("paths must be at least 1");
  if (!in_growth_domain(f, space)) {
    throw DomainViolation("allocation drives some outcome to nonpositive wealth");
  }
  const Eigen::VectorXd logs = ((space.returns * f).array() + 1.0).log();

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(space.probabilities.data(),
                                               space.probabilities.data() + space.probabilities.size());
  // Welford running mean and variance.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t k = 1; k <= paths; ++k) {
    const double x = logs(static_cast<Eigen::Index>(pick(rng)));
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  const double variance = paths > 1 ? m2 / static_cast<double>(paths - 1) : 0.0;
  return {mean, std::sqrt(variance / static_cast<double>(paths))};
}

inline double monte_carlo_growth(const FractionVector& f, const OutcomeSpace& space,
                                 std::size_t paths, std::uint64_t seed) {
  return monte_carlo_growth_estimate(f, space, paths, seed).mean;
}

struct ReferenceStatistics {
  double expected_arithmetic_gain = 0.0;
  double expected_log_growth = 0.0;
  double geometric_gain = 0.0;
  double probability_of_loss = 0.0;
  /// (threshold, P(return <= -threshold)) for every threshold, reached or not.
  std::vector<std::pair<double, double>> exceedance;
  double worst_return = 0.0;
  double worst_probability = 0.0;
};

/// Walks the cartesian product of scenarios straight from the company list
/// and accumulates the report statistics.
inline ReferenceStatistics reference_statistics(const std::vector<Company>& companies,
                                                const std::vector<double>& fractions,
                                                const std::vector<double>& thresholds,
                                                double worst_tolerance = 1e-12) {
  if (companies.size() != fractions.size() || companies.empty()) {
    throw std::invalid_argument("one fraction per company is required");
  }
  struct Row {
    double p;
    double r;
  };
  std::vector<Row> rows;
  std::vector<std::size_t> pick(companies.size(), 0);
  for (;;) {
    double p = 1.0;
    double r = 0.0;
    for (std::size_t j = 0; j < companies.size(); ++j) {
      const auto& c = companies[j];
      const auto& s = c.scenarios[pick[j]];
      p *= s.probability;
      r += fractions[j] * ((s.intrinsic_value - c.market_cap) / c.market_cap);
    }
    rows.push_back({p, r});

    std::size_t j = 0;
    for (; j < companies.size(); ++j) {
      if (++pick[j] < companies[j].scenarios.size()) break;
      pick[j] = 0;
    }
    if (j == companies.size()) break;
  }

  ReferenceStatistics out;
  out.worst_return = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    if (!(1.0 + row.r > 0.0)) throw DomainViolation("allocation leaves the growth domain");
    out.expected_arithmetic_gain += row.p * row.r;
    out.expected_log_growth += row.p * std::log(1.0 + row.r);
    if (row.r < 0.0) out.probability_of_loss += row.p;
    out.worst_return = std::min(out.worst_return, row.r);
  }
  out.geometric_gain = std::exp(out.expected_log_growth) - 1.0;
  for (const auto& row : rows) {
    if (row.r <= out.worst_return + worst_tolerance) out.worst_probability += row.p;
  }
  for (const double t : thresholds) {
    double p = 0.0;
    for (const auto& row : rows) {
      if (row.r <= -t) p += row.p;
    }
    out.exceedance.emplace_back(t, p);
  }
  return out;
}

}  // namespace kelly::oracle
