#pragma once

// Inequality constraints I(f) <= 0 on the allocation. All four families are
// affine in f, so each carries a constant gradient.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kelly/error.hpp"
#include "kelly/portfolio_model.hpp"

namespace kelly {

/// f_j >= 0.
struct LongOnly {
  std::size_t company = 0;
  friend bool operator==(const LongOnly&, const LongOnly&) = default;
};

/// sum_j f_j <= 1 + L. L = 0 means no leverage.
struct MaxLeverage {
  double leverage = 0.0;
  friend bool operator==(const MaxLeverage&, const MaxLeverage&) = default;
};

/// f_j <= M.
struct MaxAllocation {
  std::size_t company = 0;
  double limit = 1.0;
  friend bool operator==(const MaxAllocation&, const MaxAllocation&) = default;
};

/// sum_j f_j w_j >= P K, where w_j is company j's worst probability-weighted
/// scenario return. K is a negative return.
struct MaxLoss {
  double probability = 0.0;
  double loss = 0.0;
  friend bool operator==(const MaxLoss&, const MaxLoss&) = default;
};

using ConstraintSpec = std::variant<LongOnly, MaxLeverage, MaxAllocation, MaxLoss>;
using ConstraintSet = std::vector<ConstraintSpec>;

inline std::string describe(const ConstraintSpec& c) {
  return std::visit(
      [](const auto& k) -> std::string {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LongOnly>) {
          return "long-only[" + std::to_string(k.company) + "]";
        } else if constexpr (std::is_same_v<T, MaxLeverage>) {
          return "max-leverage(" + std::to_string(k.leverage) + ")";
        } else if constexpr (std::is_same_v<T, MaxAllocation>) {
          return "max-allocation[" + std::to_string(k.company) + "](" + std::to_string(k.limit) +
                 ")";
        } else {
          return "max-loss(" + std::to_string(k.probability) + ", " + std::to_string(k.loss) + ")";
        }
      },
      c);
}

/// min over company j's scenarios of p * k.
inline Eigen::VectorXd worst_weighted_returns(const OutcomeSpace& space) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(space.marginals.size()));
  for (std::size_t j = 0; j < space.marginals.size(); ++j) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& m : space.marginals[j]) worst = std::min(worst, m.probability * m.value);
    w(static_cast<Eigen::Index>(j)) = worst;
  }
  return w;
}

/// I(f); the constraint holds when this is <= 0.
inline double constraint_value(const ConstraintSpec& c, const FractionVector& f,
                               const OutcomeSpace& space) {
  if (static_cast<std::size_t>(f.size()) != space.num_companies()) {
    throw std::invalid_argument("fraction vector length does not match company count");
  }
  return std::visit(
      [&](const auto& k) -> double {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LongOnly>) {
          return -f(static_cast<Eigen::Index>(k.company));
        } else if constexpr (std::is_same_v<T, MaxLeverage>) {
          return f.sum() - 1.0 - k.leverage;
        } else if constexpr (std::is_same_v<T, MaxAllocation>) {
          return f(static_cast<Eigen::Index>(k.company)) - k.limit;
        } else {
          return -f.dot(worst_weighted_returns(space)) + k.probability * k.loss;
        }
      },
      c);
}

inline Eigen::VectorXd constraint_gradient(const ConstraintSpec& c, const OutcomeSpace& space) {
  const auto n = static_cast<Eigen::Index>(space.num_companies());
  return std::visit(
      [&](const auto& k) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, LongOnly>) {
          return -Eigen::VectorXd::Unit(n, static_cast<Eigen::Index>(k.company));
        } else if constexpr (std::is_same_v<T, MaxLeverage>) {
          return Eigen::VectorXd::Ones(n);
        } else if constexpr (std::is_same_v<T, MaxAllocation>) {
          return Eigen::VectorXd::Unit(n, static_cast<Eigen::Index>(k.company));
        } else {
          return -worst_weighted_returns(space);
        }
      },
      c);
}

inline constexpr double kFeasibilityTolerance = 1e-12;

inline bool is_feasible(const ConstraintSet& set, const FractionVector& f, const OutcomeSpace& space,
                        double tolerance = kFeasibilityTolerance) {
  for (const auto& c : set) {
    if (!(constraint_value(c, f, space) <= tolerance)) return false;
  }
  return true;
}

/// Checks a hand-assembled set: indices in range, parameters in range, at
/// most one MaxLeverage and one MaxLoss, and MaxLoss only alongside LongOnly
/// for every company.
inline void validate_constraint_set(const ConstraintSet& set, std::size_t num_companies) {
  std::vector<bool> long_only(num_companies, false);
  int leverage_count = 0;
  int loss_count = 0;
  for (const auto& c : set) {
    if (const auto* lo = std::get_if<LongOnly>(&c)) {
      if (lo->company >= num_companies) throw InvalidPolicy("long-only company index out of range");
      long_only[lo->company] = true;
    } else if (const auto* ma = std::get_if<MaxAllocation>(&c)) {
      if (ma->company >= num_companies) {
        throw InvalidPolicy("max-allocation company index out of range");
      }
      if (!(ma->limit > 0.0 && ma->limit <= 1.0)) {
        throw InvalidPolicy("maximum individual allocation must lie in (0, 1]");
      }
    } else if (const auto* ml = std::get_if<MaxLeverage>(&c)) {
      if (!(ml->leverage >= 0.0)) throw InvalidPolicy("maximum leverage must be >= 0");
      ++leverage_count;
    } else {
      const auto& loss = std::get<MaxLoss>(c);
      if (!(loss.probability > 0.0 && loss.probability <= 1.0) ||
          !(loss.loss > -1.0 && loss.loss < 0.0)) {
        throw InvalidPolicy("maximum-loss parameters out of range");
      }
      ++loss_count;
    }
  }
  if (leverage_count > 1) throw InvalidPolicy("at most one max-leverage constraint is allowed");
  if (loss_count > 1) throw InvalidPolicy("at most one max-loss constraint is allowed");
  if (loss_count == 1 && std::find(long_only.begin(), long_only.end(), false) != long_only.end()) {
    throw InvalidPolicy("the maximum-loss constraint requires the long-only constraint");
  }
}

struct MaxLossLimit {
  double probability = 0.0;
  double loss = 0.0;
};

/// Which constraint families a run applies.
struct ConstraintPolicy {
  bool long_only = true;
  std::optional<double> max_leverage;
  std::optional<double> max_allocation;
  std::optional<MaxLossLimit> max_loss;

  static ConstraintPolicy unconstrained() {
    ConstraintPolicy p;
    p.long_only = false;
    return p;
  }
};

/// Expands the policy into concrete constraints. Order is fixed: every
/// LongOnly by company, every MaxAllocation by company, MaxLeverage, MaxLoss.
/// Mask bit l always refers to entry l of this list.
inline ConstraintSet build_constraint_set(const ConstraintPolicy& policy, std::size_t num_companies) {
  if (policy.max_leverage && !(*policy.max_leverage >= 0.0 && std::isfinite(*policy.max_leverage))) {
    throw InvalidPolicy("maximum leverage must be a finite value >= 0");
  }
  if (policy.max_allocation && !(*policy.max_allocation > 0.0 && *policy.max_allocation <= 1.0)) {
    throw InvalidPolicy("maximum individual allocation must lie in (0, 1]");
  }
  if (policy.max_loss) {
    if (!policy.long_only) {
      throw InvalidPolicy("the maximum-loss constraint requires the long-only constraint");
    }
    const auto& ml = *policy.max_loss;
    if (!(ml.probability > 0.0 && ml.probability <= 1.0)) {
      throw InvalidPolicy("maximum-loss probability P must lie in (0, 1]");
    }
    if (!(ml.loss > -1.0 && ml.loss < 0.0)) {
      throw InvalidPolicy("maximum-loss return K must lie in (-1, 0)");
    }
  }

  ConstraintSet set;
  if (policy.long_only) {
    for (std::size_t j = 0; j < num_companies; ++j) set.emplace_back(LongOnly{j});
  }
  if (policy.max_allocation) {
    for (std::size_t j = 0; j < num_companies; ++j) {
      set.emplace_back(MaxAllocation{j, *policy.max_allocation});
    }
  }
  if (policy.max_leverage) set.emplace_back(MaxLeverage{*policy.max_leverage});
  if (policy.max_loss) set.emplace_back(MaxLoss{policy.max_loss->probability, policy.max_loss->loss});
  return set;
}

}  // namespace kelly
