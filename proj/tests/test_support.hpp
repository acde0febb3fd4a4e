#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kelly/portfolio_model.hpp"

namespace kelly::testing {

/// 50% down or 100% up at even odds, market cap 1.
inline Company even_odds_company(std::string name = "V") {
  return Company{std::move(name), 1.0, "", {{"down", 0.5, 0.5}, {"up", 2.0, 0.5}}};
}

inline std::vector<Company> five_even_odds_companies() {
  std::vector<Company> out;
  for (int i = 1; i <= 5; ++i) out.push_back(even_odds_company("V" + std::to_string(i)));
  return out;
}

/// The five-candidate worked example, amounts in each company's own currency.
inline std::vector<Company> worked_example_companies() {
  return {
      {"A", 225e9, "USD", {{"Total loss", 0.0, 0.05}, {"Base thesis", 270e9, 0.60}, {"Bull thesis", 420e9, 0.35}}},
      {"B", 450e6, "USD", {{"Total loss", 0.0, 0.05}, {"Bear thesis", 350e6, 0.50}, {"Base thesis", 900e6, 0.45}}},
      {"C", 39e6, "GBP", {{"Total loss", 0.0, 0.10}, {"Bear thesis", 34e6, 0.40}, {"Base thesis", 135e6, 0.50}}},
      {"D", 751e6, "SGD", {{"Bear thesis", 330e6, 0.30}, {"Base thesis", 1e9, 0.70}}},
      {"E", 126e9, "HKD", {{"Total loss", 0.0, 0.05}, {"Bear thesis", 50e9, 0.10}, {"Base thesis", 300e9, 0.85}}},
  };
}

/// Random valid company: 2-3 scenarios, the first a downside one.
inline Company random_company(std::mt19937_64& rng, const std::string& name,
                              bool total_loss_first = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double cap = std::exp(std::log(1e6) + u(rng) * std::log(1e5));
  const int count = 2 + static_cast<int>(u(rng) * 2.0);
  std::vector<double> weights(count);
  double total = 0.0;
  for (auto& w : weights) total += (w = 0.2 + u(rng));
  Company c{name, cap, "XXX", {}};
  double used = 0.0;
  for (int s = 0; s < count; ++s) {
    const double p = s + 1 < count ? weights[s] / total : 1.0 - used;
    used += p;
    double value = 0.0;
    if (s == 0) {
      value = total_loss_first ? 0.0 : cap * (0.2 + 0.7 * u(rng));
    } else {
      value = cap * (0.6 + 2.4 * u(rng));
    }
    c.scenarios.push_back({"s" + std::to_string(s), value, p});
  }
  return c;
}

inline std::vector<Company> random_portfolio(std::mt19937_64& rng, int min_companies,
                                             int max_companies, bool total_loss_first = false) {
  std::uniform_int_distribution<int> n(min_companies, max_companies);
  const int count = n(rng);
  std::vector<Company> out;
  for (int j = 0; j < count; ++j) {
    out.push_back(random_company(rng, std::string(1, static_cast<char>('A' + j)), total_loss_first));
  }
  return out;
}

/// Random f with every wealth factor at least `margin`.
inline FractionVector random_feasible_fractions(std::mt19937_64& rng, const OutcomeSpace& space,
                                                double margin = 0.05) {
  std::uniform_real_distribution<double> u(-0.3, 0.8);
  const auto n = static_cast<Eigen::Index>(space.num_companies());
  for (;;) {
    FractionVector f(n);
    for (Eigen::Index j = 0; j < n; ++j) f(j) = u(rng);
    if ((wealth_factors(f, space).array() >= margin).all()) return f;
  }
}

/// Central differences of a scalar function.
inline Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& fn,
                                        const Eigen::VectorXd& x, double step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x;
    Eigen::VectorXd lo = x;
    hi(i) += step;
    lo(i) -= step;
    g(i) = (fn(hi) - fn(lo)) / (2.0 * step);
  }
  return g;
}

/// Central differences of a vector function; column i is d fn / d x_i.
inline Eigen::MatrixXd central_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn, const Eigen::VectorXd& x,
    double step) {
  const Eigen::VectorXd base = fn(x);
  Eigen::MatrixXd j(base.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x;
    Eigen::VectorXd lo = x;
    hi(i) += step;
    lo(i) -= step;
    j.col(i) = (fn(hi) - fn(lo)) / (2.0 * step);
  }
  return j;
}

/// ||a - b|| / max(||b||, floor).
template <typename A, typename B>
double relative_error(const A& analytic, const B& reference, double floor = 1e-8) {
  return (analytic - reference).norm() / std::max(reference.norm(), floor);
}

}  // namespace kelly::testing
