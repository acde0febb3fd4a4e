#pragma once

// Active-set enumeration for the constrained growth maximum.
//
// Every inequality constraint is either active (multiplier unknown, slack 0)
// or inactive (multiplier 0, slack unknown). Each of the 2^N_l combinations
// gives a square nonlinear system in (f, lambda|s) that is solved with
// Newton-Raphson:
//
//   alpha_j = dG/df_j - sum_l lambda_l dC_l/df_j = 0      (N_c rows)
//   beta_l  = -C_l(f, s_l) = -(I_l(f) + s_l)     = 0      (N_l rows)
//
// Combinations that converge with strictly positive inactive slacks and a
// feasible allocation are viable. The reported allocation is the viable one
// with the most non-zero fractions, ties resolved by highest expected
// portfolio value and then by lowest mask.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "kelly/constraint_system.hpp"
#include "kelly/error.hpp"
#include "kelly/portfolio_model.hpp"

namespace kelly {

/// Active/inactive status of each constraint. Bit l set means constraint l is
/// active. Masks order as the binary integer they spell.
class StatusMask {
 public:
  StatusMask() = default;
  StatusMask(std::uint64_t bits, std::size_t size) : bits_(bits), size_(size) {}

  [[nodiscard]] bool active(std::size_t l) const { return ((bits_ >> l) & 1U) != 0U; }
  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] std::uint64_t bits() const { return bits_; }

  /// Constraint 0 first, '1' for active.
  [[nodiscard]] std::string to_string() const {
    std::string s(size_, '0');
    for (std::size_t l = 0; l < size_; ++l) {
      if (active(l)) s[l] = '1';
    }
    return s;
  }

  friend bool operator==(const StatusMask&, const StatusMask&) = default;

 private:
  std::uint64_t bits_ = 0;
  std::size_t size_ = 0;
};

enum class SolveStatus {
  kConverged,
  kSingularJacobian,
  kMaxIterations,
  kDomainViolation,
  kNonFinite,
};

inline std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kSingularJacobian: return "singular-jacobian";
    case SolveStatus::kMaxIterations: return "max-iterations";
    case SolveStatus::kDomainViolation: return "domain-violation";
    case SolveStatus::kNonFinite: return "non-finite";
  }
  return "unknown";
}

struct CandidateSolution {
  FractionVector fractions;
  /// lambda_l, zero where inactive.
  Eigen::VectorXd multipliers;
  /// s_l, zero where active.
  Eigen::VectorXd slacks;
  StatusMask mask;
  bool converged = false;
  SolveStatus status = SolveStatus::kMaxIterations;
  std::size_t iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
};

struct SolverConfig {
  /// Infinity-norm of the KKT residual.
  double tolerance = 1e-10;
  std::size_t max_iterations = 100;
  /// Initial Newton step length; halved while the step leaves the log domain.
  double step_damping = 1.0;
  std::size_t max_step_halvings = 30;
  /// Reciprocal condition estimate below 1 / this marks the Jacobian singular.
  double max_condition = 1e14;
  /// A fraction counts as an allocation when it exceeds this.
  double nonzero_threshold = 1e-6;
  unsigned worker_count = std::max(1U, std::thread::hardware_concurrency());
  std::size_t max_enumerated_constraints = 24;
  /// Additionally require lambda_l >= -multiplier_sign_tolerance for active
  /// constraints (dual feasibility). Off by default.
  bool check_multiplier_signs = false;
  double multiplier_sign_tolerance = 1e-10;
  double initial_multiplier = 0.1;
  double initial_slack = 0.1;
};

namespace detail {

/// Constraint l as a_l . f + b_l.
struct AffineConstraints {
  Eigen::MatrixXd gradients;  // N_l x N_c
  Eigen::VectorXd offsets;    // N_l

  AffineConstraints(const ConstraintSet& set, const OutcomeSpace& space)
      : gradients(static_cast<Eigen::Index>(set.size()),
                  static_cast<Eigen::Index>(space.num_companies())),
        offsets(static_cast<Eigen::Index>(set.size())) {
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(gradients.cols());
    for (std::size_t l = 0; l < set.size(); ++l) {
      gradients.row(static_cast<Eigen::Index>(l)) = constraint_gradient(set[l], space).transpose();
      offsets(static_cast<Eigen::Index>(l)) = constraint_value(set[l], zero, space);
    }
  }

  [[nodiscard]] Eigen::VectorXd values(const FractionVector& f) const {
    return gradients * f + offsets;
  }
};

inline Eigen::VectorXd residual(const FractionVector& f, const Eigen::VectorXd& multipliers,
                                const Eigen::VectorXd& slacks, const StatusMask& mask,
                                const OutcomeSpace& space, const AffineConstraints& affine) {
  const Eigen::Index n = f.size();
  const auto m = static_cast<Eigen::Index>(mask.size());
  Eigen::VectorXd out(n + m);
  out.head(n) = growth_gradient(f, space);
  const Eigen::VectorXd values = affine.values(f);
  for (Eigen::Index l = 0; l < m; ++l) {
    if (mask.active(static_cast<std::size_t>(l))) {
      out.head(n) -= multipliers(l) * affine.gradients.row(l).transpose();
      out(n + l) = -values(l);
    } else {
      out(n + l) = -(values(l) + slacks(l));
    }
  }
  return out;
}

inline Eigen::MatrixXd jacobian(const FractionVector& f, const StatusMask& mask,
                                const OutcomeSpace& space, const AffineConstraints& affine) {
  const Eigen::Index n = f.size();
  const auto m = static_cast<Eigen::Index>(mask.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n + m, n + m);
  // Constraints are affine, so their second derivatives drop out of this block.
  j.topLeftCorner(n, n) = growth_hessian(f, space);
  for (Eigen::Index l = 0; l < m; ++l) {
    j.row(n + l).head(n) = -affine.gradients.row(l);
    if (mask.active(static_cast<std::size_t>(l))) {
      j.col(n + l).head(n) = -affine.gradients.row(l).transpose();
    } else {
      j(n + l, n + l) = -1.0;
    }
  }
  return j;
}

}  // namespace detail

inline void check_mask_size(const StatusMask& mask, const ConstraintSet& constraints,
                            const Eigen::VectorXd& multipliers, const Eigen::VectorXd& slacks) {
  if (mask.size() != constraints.size() ||
      static_cast<std::size_t>(multipliers.size()) != constraints.size() ||
      static_cast<std::size_t>(slacks.size()) != constraints.size()) {
    throw std::invalid_argument("mask, multiplier and slack sizes must match the constraint count");
  }
}

/// (alpha, beta) stacked: N_c stationarity rows then N_l constraint rows.
/// Multipliers of inactive and slacks of active constraints are ignored.
inline Eigen::VectorXd assemble_kkt_residual(const FractionVector& f,
                                             const Eigen::VectorXd& multipliers,
                                             const Eigen::VectorXd& slacks, const StatusMask& mask,
                                             const OutcomeSpace& space,
                                             const ConstraintSet& constraints) {
  check_mask_size(mask, constraints, multipliers, slacks);
  return detail::residual(f, multipliers, slacks, mask, space,
                          detail::AffineConstraints(constraints, space));
}

/// Derivative of assemble_kkt_residual with respect to (f, lambda|s).
inline Eigen::MatrixXd assemble_kkt_jacobian(const FractionVector& f,
                                             const Eigen::VectorXd& multipliers,
                                             const Eigen::VectorXd& slacks, const StatusMask& mask,
                                             const OutcomeSpace& space,
                                             const ConstraintSet& constraints) {
  check_mask_size(mask, constraints, multipliers, slacks);
  return detail::jacobian(f, mask, space, detail::AffineConstraints(constraints, space));
}

namespace detail {

inline CandidateSolution newton_solve(const StatusMask& mask, const OutcomeSpace& space,
                                      const AffineConstraints& affine, const SolverConfig& config) {
  const auto n = static_cast<Eigen::Index>(space.num_companies());
  const auto m = static_cast<Eigen::Index>(mask.size());

  CandidateSolution out;
  out.mask = mask;

  // Uniform start, pulled towards zero when it already sits outside the log domain.
  FractionVector f = FractionVector::Constant(n, 1.0 / static_cast<double>(n));
  for (int shrink = 0; shrink < 64 && !in_growth_domain(f, space); ++shrink) f *= 0.5;

  // y holds lambda_l for active and s_l for inactive constraints.
  Eigen::VectorXd y(m);
  const Eigen::VectorXd start_values = affine.values(f);
  for (Eigen::Index l = 0; l < m; ++l) {
    y(l) = mask.active(static_cast<std::size_t>(l))
               ? config.initial_multiplier
               : std::max(-start_values(l), config.initial_slack);
  }

  const auto unpack = [&](const Eigen::VectorXd& yy) {
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd slack = Eigen::VectorXd::Zero(m);
    for (Eigen::Index l = 0; l < m; ++l) {
      (mask.active(static_cast<std::size_t>(l)) ? lambda : slack)(l) = yy(l);
    }
    return std::pair{lambda, slack};
  };

  const auto finish = [&](SolveStatus status, std::size_t iterations, double res) {
    auto [lambda, slack] = unpack(y);
    out.fractions = f;
    out.multipliers = std::move(lambda);
    out.slacks = std::move(slack);
    out.status = status;
    out.converged = status == SolveStatus::kConverged;
    out.iterations = iterations;
    out.residual_norm = res;
    return out;
  };

  if (!in_growth_domain(f, space)) {
    return finish(SolveStatus::kDomainViolation, 0, std::numeric_limits<double>::infinity());
  }

  double res = std::numeric_limits<double>::infinity();
  for (std::size_t iter = 0;; ++iter) {
    auto [lambda, slack] = unpack(y);
    const Eigen::VectorXd r = residual(f, lambda, slack, mask, space, affine);
    if (!r.allFinite()) return finish(SolveStatus::kNonFinite, iter, res);
    res = r.lpNorm<Eigen::Infinity>();
    if (res <= config.tolerance) return finish(SolveStatus::kConverged, iter, res);
    if (iter >= config.max_iterations) return finish(SolveStatus::kMaxIterations, iter, res);

    const Eigen::FullPivLU<Eigen::MatrixXd> lu(jacobian(f, mask, space, affine));
    if (!lu.isInvertible() || !(lu.rcond() * config.max_condition >= 1.0)) {
      return finish(SolveStatus::kSingularJacobian, iter, res);
    }
    const Eigen::VectorXd step = lu.solve(r);
    if (!step.allFinite()) return finish(SolveStatus::kSingularJacobian, iter, res);

    double length = config.step_damping;
    bool accepted = false;
    for (std::size_t h = 0; h <= config.max_step_halvings; ++h) {
      const FractionVector trial = f - length * step.head(n);
      if (in_growth_domain(trial, space)) {
        f = trial;
        y -= length * step.tail(m);
        accepted = true;
        break;
      }
      length *= 0.5;
    }
    if (!accepted) return finish(SolveStatus::kDomainViolation, iter + 1, res);
  }
}

}  // namespace detail

/// Solves the KKT system of one active/inactive combination. Never throws on
/// numerical trouble; failures come back with converged = false.
inline CandidateSolution newton_solve(const StatusMask& mask, const OutcomeSpace& space,
                                      const ConstraintSet& constraints,
                                      const SolverConfig& config = {}) {
  if (mask.size() != constraints.size()) {
    throw std::invalid_argument("mask size must match the constraint count");
  }
  return detail::newton_solve(mask, space, detail::AffineConstraints(constraints, space), config);
}

/// Solves every combination. Result l is the solution for mask integer l,
/// whatever order the workers finished in.
inline std::vector<CandidateSolution> solve_all(const OutcomeSpace& space,
                                                const ConstraintSet& constraints,
                                                const SolverConfig& config = {}) {
  const std::size_t m = constraints.size();
  if (m > config.max_enumerated_constraints || m >= 63) {
    throw EnumerationCapExceeded(std::to_string(m) + " constraints would need 2^" +
                                 std::to_string(m) + " systems; the cap is 2^" +
                                 std::to_string(config.max_enumerated_constraints));
  }
  validate_constraint_set(constraints, space.num_companies());

  const std::uint64_t total = std::uint64_t{1} << m;
  const detail::AffineConstraints affine(constraints, space);
  std::vector<CandidateSolution> results(total);

  std::atomic<std::uint64_t> next{0};
  const auto work = [&] {
    for (std::uint64_t bits = next.fetch_add(1); bits < total; bits = next.fetch_add(1)) {
      results[bits] = detail::newton_solve(StatusMask(bits, m), space, affine, config);
    }
  };

  const auto workers =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1U, config.worker_count), total));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return results;
}

/// Whether a single candidate passes the viability rules used by filter_viable.
inline bool is_viable(const CandidateSolution& s, const OutcomeSpace& space,
                      const ConstraintSet& constraints, const SolverConfig& config = {}) {
  if (!s.converged) return false;
  for (std::size_t l = 0; l < constraints.size(); ++l) {
    const auto i = static_cast<Eigen::Index>(l);
    if (s.mask.active(l)) {
      if (config.check_multiplier_signs && s.multipliers(i) < -config.multiplier_sign_tolerance) {
        return false;
      }
    } else if (!(s.slacks(i) > 0.0)) {
      return false;
    }
  }
  return in_growth_domain(s.fractions, space) && is_feasible(constraints, s.fractions, space);
}

inline std::vector<CandidateSolution> filter_viable(const std::vector<CandidateSolution>& solutions,
                                                    const OutcomeSpace& space,
                                                    const ConstraintSet& constraints,
                                                    const SolverConfig& config = {}) {
  std::vector<CandidateSolution> viable;
  for (const auto& s : solutions) {
    if (is_viable(s, space, constraints, config)) viable.push_back(s);
  }
  if (viable.empty()) {
    throw NoViableSolution("none of the " + std::to_string(solutions.size()) +
                           " active/inactive combinations produced a viable allocation");
  }
  return viable;
}

/// sum_i p_i (1 + sum_j f_j k_ij).
inline double expected_portfolio_value(const FractionVector& f, const OutcomeSpace& space) {
  return 1.0 + f.dot(expected_company_returns(space));
}

inline std::size_t count_allocations(const FractionVector& f, double threshold) {
  return static_cast<std::size_t>((f.array() > threshold).count());
}

/// Among the solutions with the most allocations above nonzero_threshold,
/// returns the one with the highest expected portfolio value. Values within
/// 1e-12 of each other tie, and ties go to the lowest mask.
inline CandidateSolution select_solution(const std::vector<CandidateSolution>& viable,
                                         const OutcomeSpace& space,
                                         const SolverConfig& config = {}) {
  if (viable.empty()) throw NoViableSolution("no viable solutions to select from");
  constexpr double kValueTieTolerance = 1e-12;

  std::size_t most = 0;
  for (const auto& s : viable) most = std::max(most, count_allocations(s.fractions, config.nonzero_threshold));

  std::vector<const CandidateSolution*> diversified;
  for (const auto& s : viable) {
    if (count_allocations(s.fractions, config.nonzero_threshold) == most) diversified.push_back(&s);
  }
  std::sort(diversified.begin(), diversified.end(),
            [](const auto* a, const auto* b) { return a->mask.bits() < b->mask.bits(); });

  const CandidateSolution* best = diversified.front();
  double best_value = expected_portfolio_value(best->fractions, space);
  for (const auto* s : diversified) {
    const double value = expected_portfolio_value(s->fractions, space);
    if (value > best_value + kValueTieTolerance) {
      best = s;
      best_value = value;
    }
  }
  return *best;
}

}  // namespace kelly
