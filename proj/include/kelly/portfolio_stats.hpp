#pragma once

// Risk statistics of an allocation over the enumerated outcome space. Losses
// here are the permanent, scenario-driven ones; nothing models price paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "kelly/portfolio_model.hpp"

namespace kelly {

struct OutcomeReturn {
  double probability = 0.0;
  double value = 0.0;
};

struct ExceedancePoint {
  /// Loss as a positive fraction of capital.
  double threshold = 0.0;
  /// Probability that the portfolio loses at least `threshold`.
  double probability = 0.0;

  friend bool operator==(const ExceedancePoint&, const ExceedancePoint&) = default;
};

struct WorstOutcome {
  double portfolio_return = 0.0;
  /// Total probability of the outcomes attaining the minimum return.
  double probability = 0.0;

  friend bool operator==(const WorstOutcome&, const WorstOutcome&) = default;
};

struct AllocationReport {
  FractionVector fractions;
  double invested_total = 0.0;
  double expected_arithmetic_gain = 0.0;
  double expected_log_growth = 0.0;
  /// exp(G) - 1.
  double geometric_gain = 0.0;
  double probability_of_loss = 0.0;
  std::vector<ExceedancePoint> loss_exceedance;
  WorstOutcome worst_outcome;
};

inline const std::vector<double>& default_exceedance_thresholds() {
  static const std::vector<double> grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  return grid;
}

/// Outcome returns within this of the minimum count towards the worst outcome.
inline constexpr double kWorstOutcomeTolerance = 1e-12;

/// r_i = sum_j f_j k_ij paired with p_i, in outcome order.
inline std::vector<OutcomeReturn> portfolio_return_per_outcome(const FractionVector& f,
                                                               const OutcomeSpace& space) {
  if (static_cast<std::size_t>(f.size()) != space.num_companies()) {
    throw std::invalid_argument("fraction vector length does not match company count");
  }
  const Eigen::VectorXd r = space.returns * f;
  std::vector<OutcomeReturn> out(space.num_outcomes());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out[i] = {space.probabilities(ii), r(ii)};
  }
  return out;
}

/// Exceedance rows are kept only for thresholds the worst outcome actually
/// reaches, so an allocation that can never lose has none.
inline AllocationReport compute_report(
    const FractionVector& f, const OutcomeSpace& space,
    const std::vector<double>& thresholds = default_exceedance_thresholds()) {
  AllocationReport report;
  report.fractions = f;
  report.invested_total = f.sum();
  report.expected_log_growth = growth(f, space);
  report.geometric_gain = std::expm1(report.expected_log_growth);

  const auto outcomes = portfolio_return_per_outcome(f, space);
  for (const auto& o : outcomes) {
    report.expected_arithmetic_gain += o.probability * o.value;
    if (o.value < 0.0) report.probability_of_loss += o.probability;
  }
  const double worst = std::min_element(outcomes.begin(), outcomes.end(), [](const auto& a, const auto& b) {
            return a.value < b.value;
          })->value;
  report.worst_outcome.portfolio_return = worst;
  for (const auto& o : outcomes) {
    if (o.value <= worst + kWorstOutcomeTolerance) report.worst_outcome.probability += o.probability;
  }

  std::vector<double> sorted = thresholds;
  std::sort(sorted.begin(), sorted.end());
  for (const double t : sorted) {
    if (!(-worst >= t)) continue;
    double p = 0.0;
    for (const auto& o : outcomes) {
      if (o.value <= -t) p += o.probability;
    }
    report.loss_exceedance.push_back({t, p});
  }
  return report;
}

}  // namespace kelly
