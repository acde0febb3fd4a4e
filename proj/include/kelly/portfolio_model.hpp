#pragma once

// Companies, their intrinsic-value scenarios, the joint outcome space and the
// expected logarithmic growth function with its first and second derivatives.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kelly/error.hpp"

namespace kelly {

/// Allocation fraction per company, as a share of total capital.
using FractionVector = Eigen::VectorXd;

struct Scenario {
  std::string label;
  double intrinsic_value = 0.0;
  double probability = 0.0;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Company {
  std::string name;
  double market_cap = 0.0;
  /// Free-text unit of market_cap and intrinsic values. Returns are unitless,
  /// so this never enters the maths.
  std::string currency;
  std::vector<Scenario> scenarios;

  friend bool operator==(const Company&, const Company&) = default;
};

inline constexpr double kProbabilitySumTolerance = 1e-9;

struct ValidationOptions {
  /// Accept companies whose every scenario is at or above market cap.
  bool allow_no_downside = false;
};

/// Throws ValidationError when the company breaks an invariant.
inline void validate_company(const Company& company, const ValidationOptions& options = {}) {
  const std::string who = "company '" + company.name + "': ";
  if (!(company.market_cap > 0.0) || !std::isfinite(company.market_cap)) {
    throw ValidationError(who + "market cap must be positive");
  }
  if (company.scenarios.empty()) {
    throw ValidationError(who + "at least one scenario is required");
  }
  double total = 0.0;
  bool has_downside = false;
  for (const auto& s : company.scenarios) {
    if (!(s.intrinsic_value >= 0.0) || !std::isfinite(s.intrinsic_value)) {
      throw ValidationError(who + "scenario '" + s.label + "' has a negative intrinsic value");
    }
    if (!(s.probability > 0.0 && s.probability <= 1.0)) {
      throw ValidationError(who + "scenario '" + s.label + "' probability must lie in (0, 1]");
    }
    total += s.probability;
    has_downside = has_downside || s.intrinsic_value < company.market_cap;
  }
  if (std::abs(total - 1.0) > kProbabilitySumTolerance) {
    throw ValidationError(who + "scenario probabilities sum to " + std::to_string(total) +
                          ", expected 1");
  }
  if (!has_downside && !options.allow_no_downside) {
    throw ValidationError(who +
                          "no downside scenario (every intrinsic value is at or above market "
                          "cap); model the unknown downside explicitly or pass the override");
  }
}

/// Relative difference between a scenario's intrinsic value and market cap.
inline double scenario_return(const Company& company, std::size_t scenario_index) {
  const auto& s = company.scenarios.at(scenario_index);
  return (s.intrinsic_value - company.market_cap) / company.market_cap;
}

/// One scenario of one company, reduced to its probability and return.
struct ScenarioReturn {
  double probability = 0.0;
  double value = 0.0;
};

/// Joint enumeration of all per-company scenario combinations. Companies are
/// treated as independent, so an outcome's probability is the product of its
/// scenario probabilities.
///
/// Outcome order is an odometer over scenario indices with the first company
/// varying fastest.
struct OutcomeSpace {
  /// p_i, one per outcome.
  Eigen::VectorXd probabilities;
  /// k_ij, outcomes by companies.
  Eigen::MatrixXd returns;
  /// Per-company scenario (probability, return) pairs the outcomes were built from.
  std::vector<std::vector<ScenarioReturn>> marginals;

  [[nodiscard]] std::size_t num_companies() const { return static_cast<std::size_t>(returns.cols()); }
  [[nodiscard]] std::size_t num_outcomes() const { return static_cast<std::size_t>(returns.rows()); }
};

inline constexpr std::size_t kDefaultOutcomeCap = 10'000'000;

inline OutcomeSpace enumerate_outcomes(const std::vector<Company>& companies,
                                       std::size_t outcome_cap = kDefaultOutcomeCap) {
  if (companies.empty()) {
    throw ValidationError("at least one company is required");
  }
  const std::size_t n = companies.size();

  OutcomeSpace space;
  space.marginals.resize(n);
  std::size_t count = 1;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& c = companies[j];
    if (c.scenarios.empty()) {
      throw ValidationError("company '" + c.name + "' has no scenarios");
    }
    for (std::size_t s = 0; s < c.scenarios.size(); ++s) {
      space.marginals[j].push_back({c.scenarios[s].probability, scenario_return(c, s)});
    }
    if (count > outcome_cap / c.scenarios.size()) {
      throw OutcomeExplosion("joint outcome count exceeds the cap of " +
                             std::to_string(outcome_cap));
    }
    count *= c.scenarios.size();
  }

  space.probabilities.resize(static_cast<Eigen::Index>(count));
  space.returns.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(n));

  std::vector<std::size_t> index(n, 0);
  for (std::size_t i = 0; i < count; ++i) {
    double p = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& m = space.marginals[j][index[j]];
      p *= m.probability;
      space.returns(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m.value;
    }
    space.probabilities(static_cast<Eigen::Index>(i)) = p;

    for (std::size_t j = 0; j < n; ++j) {
      if (++index[j] < space.marginals[j].size()) break;
      index[j] = 0;
    }
  }
  return space;
}

/// Wealth factor 1 + sum_j f_j k_ij per outcome.
inline Eigen::VectorXd wealth_factors(const FractionVector& f, const OutcomeSpace& space) {
  if (static_cast<std::size_t>(f.size()) != space.num_companies()) {
    throw std::invalid_argument("fraction vector length does not match company count");
  }
  return (space.returns * f).array() + 1.0;
}

inline bool in_growth_domain(const FractionVector& f, const OutcomeSpace& space) {
  if (!f.allFinite()) return false;
  return (wealth_factors(f, space).array() > 0.0).all();
}

namespace detail {

inline Eigen::VectorXd checked_wealth(const FractionVector& f, const OutcomeSpace& space) {
  Eigen::VectorXd w = wealth_factors(f, space);
  if (!f.allFinite() || !(w.array() > 0.0).all()) {
    throw DomainViolation("allocation drives some outcome to nonpositive wealth");
  }
  return w;
}

}  // namespace detail

/// Expected log growth per allocation round, G = sum_i p_i ln(1 + sum_j f_j k_ij).
inline double growth(const FractionVector& f, const OutcomeSpace& space) {
  const Eigen::VectorXd w = detail::checked_wealth(f, space);
  return space.probabilities.dot(w.array().log().matrix());
}

/// dG/df_j = sum_i p_i k_ij / w_i.
inline Eigen::VectorXd growth_gradient(const FractionVector& f, const OutcomeSpace& space) {
  const Eigen::VectorXd w = detail::checked_wealth(f, space);
  const Eigen::VectorXd weights = space.probabilities.cwiseQuotient(w);
  return space.returns.transpose() * weights;
}

/// d2G/df_i df_j = -sum_o p_o k_oi k_oj / w_o^2. Symmetric negative semidefinite.
inline Eigen::MatrixXd growth_hessian(const FractionVector& f, const OutcomeSpace& space) {
  const Eigen::VectorXd w = detail::checked_wealth(f, space);
  const Eigen::VectorXd weights = space.probabilities.array() / w.array().square();
  const Eigen::Index n = space.returns.cols();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      const double v =
          -(weights.array() * space.returns.col(a).array() * space.returns.col(b).array()).sum();
      h(a, b) = v;
      h(b, a) = v;
    }
  }
  return h;
}

/// Expected return per company, sum over its own scenarios of p k.
inline Eigen::VectorXd expected_company_returns(const OutcomeSpace& space) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(space.marginals.size()));
  for (std::size_t j = 0; j < space.marginals.size(); ++j) {
    double e = 0.0;
    for (const auto& m : space.marginals[j]) e += m.probability * m.value;
    out(static_cast<Eigen::Index>(j)) = e;
  }
  return out;
}

}  // namespace kelly
