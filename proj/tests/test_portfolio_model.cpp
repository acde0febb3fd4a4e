#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "kelly/portfolio_model.hpp"
#include "test_support.hpp"

namespace kelly {
namespace {

using testing::even_odds_company;
using testing::five_even_odds_companies;

TEST(ScenarioReturn, RelativeToMarketCap) {
  const Company c = even_odds_company();
  EXPECT_DOUBLE_EQ(scenario_return(c, 0), -0.5);
  EXPECT_DOUBLE_EQ(scenario_return(c, 1), 1.0);

  const Company flat{"F", 7.0, "", {{"flat", 7.0, 1.0}}};
  EXPECT_EQ(scenario_return(flat, 0), 0.0);
  EXPECT_THROW(scenario_return(flat, 1), std::out_of_range);
}

TEST(ValidateCompany, AcceptsWellFormedCompany) {
  EXPECT_NO_THROW(validate_company(even_odds_company()));
  for (const auto& c : testing::worked_example_companies()) EXPECT_NO_THROW(validate_company(c));
}

TEST(ValidateCompany, RejectsBrokenInvariants) {
  Company c = even_odds_company();
  c.scenarios[1].probability = 0.4;
  EXPECT_THROW(validate_company(c), ValidationError);

  c = even_odds_company();
  c.market_cap = 0.0;
  EXPECT_THROW(validate_company(c), ValidationError);

  c = even_odds_company();
  c.scenarios[0].intrinsic_value = -1.0;
  EXPECT_THROW(validate_company(c), ValidationError);

  c = even_odds_company();
  c.scenarios = {{"only", 0.5, 1.5}};
  EXPECT_THROW(validate_company(c), ValidationError);

  c = even_odds_company();
  c.scenarios.clear();
  EXPECT_THROW(validate_company(c), ValidationError);
}

TEST(ValidateCompany, ProbabilitySumToleranceIsTight) {
  Company c = even_odds_company();
  c.scenarios[1].probability = 0.5 + 5e-10;
  EXPECT_NO_THROW(validate_company(c));
  c.scenarios[1].probability = 0.5 + 5e-9;
  EXPECT_THROW(validate_company(c), ValidationError);
}

TEST(ValidateCompany, DownsideRuleWithOverride) {
  const Company upside_only{"U", 1.0, "", {{"up", 1.5, 0.5}, {"flat", 1.0, 0.5}}};
  EXPECT_THROW(validate_company(upside_only), ValidationError);
  EXPECT_NO_THROW(validate_company(upside_only, {.allow_no_downside = true}));
}

TEST(EnumerateOutcomes, TwoEvenCompaniesGiveFourQuarterOutcomes) {
  const auto space = enumerate_outcomes({even_odds_company("X"), even_odds_company("Y")});
  ASSERT_EQ(space.num_outcomes(), 4U);
  ASSERT_EQ(space.num_companies(), 2U);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(space.probabilities(i), 0.25);
  // First company varies fastest.
  EXPECT_EQ(space.returns(0, 0), -0.5);
  EXPECT_EQ(space.returns(1, 0), 1.0);
  EXPECT_EQ(space.returns(0, 1), -0.5);
  EXPECT_EQ(space.returns(2, 1), 1.0);
}

TEST(EnumerateOutcomes, SingleCompanyPassthrough) {
  const Company c{"S", 10.0, "", {{"a", 5.0, 0.6}, {"b", 20.0, 0.4}}};
  const auto space = enumerate_outcomes({c});
  ASSERT_EQ(space.num_outcomes(), 2U);
  EXPECT_DOUBLE_EQ(space.probabilities(0), 0.6);
  EXPECT_DOUBLE_EQ(space.probabilities(1), 0.4);
  EXPECT_DOUBLE_EQ(space.returns(0, 0), -0.5);
  EXPECT_DOUBLE_EQ(space.returns(1, 0), 1.0);
}

TEST(EnumerateOutcomes, FiveCompaniesMultiplyProbabilities) {
  const auto space = enumerate_outcomes(five_even_odds_companies());
  ASSERT_EQ(space.num_outcomes(), 32U);
  for (Eigen::Index i = 0; i < 32; ++i) EXPECT_EQ(space.probabilities(i), 0.03125);

  const auto worked = enumerate_outcomes(testing::worked_example_companies());
  EXPECT_EQ(worked.num_outcomes(), 3U * 3U * 3U * 2U * 3U);
  // Outcome 0 picks every company's first scenario.
  EXPECT_DOUBLE_EQ(worked.probabilities(0), 0.05 * 0.05 * 0.10 * 0.30 * 0.05);
}

TEST(EnumerateOutcomes, CapSignalsExplosion) {
  EXPECT_THROW(enumerate_outcomes(five_even_odds_companies(), 31), OutcomeExplosion);
  EXPECT_NO_THROW(enumerate_outcomes(five_even_odds_companies(), 32));
  EXPECT_THROW(enumerate_outcomes({}), ValidationError);
}

TEST(EnumerateOutcomes, ProbabilitiesSumToOneProperty) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto companies = testing::random_portfolio(rng, 1, 6);
    const auto space = enumerate_outcomes(companies);
    EXPECT_NEAR(space.probabilities.sum(), 1.0, 1e-9);
    EXPECT_TRUE((space.returns.array() >= -1.0).all());
    std::size_t expected = 1;
    for (const auto& c : companies) expected *= c.scenarios.size();
    EXPECT_EQ(space.num_outcomes(), expected);
  }
}

TEST(Growth, ZeroAllocationHasZeroGrowth) {
  const auto space = enumerate_outcomes(five_even_odds_companies());
  EXPECT_EQ(growth(FractionVector::Zero(5), space), 0.0);
}

TEST(Growth, SingleEvenOddsCompanyAtHalf) {
  const auto space = enumerate_outcomes({even_odds_company()});
  // 0.5 ln 0.75 + 0.5 ln 1.5
  EXPECT_NEAR(growth(FractionVector::Constant(1, 0.5), space), 0.05889151782819174, 1e-15);
}

TEST(Growth, OutsideDomainThrows) {
  const auto space = enumerate_outcomes({even_odds_company()});
  // 1 - 0.5 f = -0.1 at f = 2.2
  const FractionVector f = FractionVector::Constant(1, 2.2);
  EXPECT_THROW(growth(f, space), DomainViolation);
  EXPECT_THROW(growth_gradient(f, space), DomainViolation);
  EXPECT_THROW(growth_hessian(f, space), DomainViolation);
  EXPECT_THROW(growth(FractionVector::Constant(1, 2.0), space), DomainViolation);
  EXPECT_FALSE(in_growth_domain(f, space));
}

TEST(GrowthGradient, VanishesAtSingleAssetKellyFraction) {
  const auto space = enumerate_outcomes({even_odds_company()});
  EXPECT_LT(std::abs(growth_gradient(FractionVector::Constant(1, 0.5), space)(0)), 1e-12);
}

TEST(GrowthGradient, AtZeroEqualsExpectedReturns) {
  const auto space = enumerate_outcomes(testing::worked_example_companies());
  const Eigen::VectorXd g = growth_gradient(FractionVector::Zero(5), space);
  const Eigen::VectorXd e = expected_company_returns(space);
  for (Eigen::Index j = 0; j < 5; ++j) EXPECT_NEAR(g(j), e(j), 1e-14);
  EXPECT_NEAR(e(0), -0.05 + 0.6 * 0.2 + 0.35 * (420.0 / 225.0 - 1.0), 1e-15);
}

TEST(GrowthGradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = enumerate_outcomes(testing::random_portfolio(rng, 1, 4));
    const FractionVector f = testing::random_feasible_fractions(rng, space);
    const Eigen::VectorXd fd = testing::central_gradient(
        [&](const Eigen::VectorXd& x) { return growth(x, space); }, f, 1e-7);
    EXPECT_LE(testing::relative_error(growth_gradient(f, space), fd), 1e-6) << "trial " << trial;
  }
}

TEST(GrowthHessian, SingleCompanyAtZero) {
  const auto space = enumerate_outcomes({even_odds_company()});
  const Eigen::MatrixXd h = growth_hessian(FractionVector::Zero(1), space);
  ASSERT_EQ(h.rows(), 1);
  EXPECT_DOUBLE_EQ(h(0, 0), -0.625);
}

TEST(GrowthHessian, SymmetricNegativeSemidefiniteAndMatchesDifferences) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const auto space = enumerate_outcomes(testing::random_portfolio(rng, 1, 4));
    const FractionVector f = testing::random_feasible_fractions(rng, space);
    const Eigen::MatrixXd h = growth_hessian(f, space);
    EXPECT_TRUE(h == h.transpose());

    const Eigen::MatrixXd fd = testing::central_jacobian(
        [&](const Eigen::VectorXd& x) { return growth_gradient(x, space); }, f, 1e-6);
    EXPECT_LE(testing::relative_error(h, fd), 1e-5) << "trial " << trial;

    Eigen::VectorXd x(f.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
    EXPECT_LE(x.dot(h * x), 1e-10);
  }
}

TEST(GrowthProperties, InvariantUnderCurrencyRescaling) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto companies = testing::random_portfolio(rng, 1, 4);
    const auto space = enumerate_outcomes(companies);
    const FractionVector f = testing::random_feasible_fractions(rng, space);

    const double factor = trial % 2 == 0 ? 7.77 : 1e-3;
    auto scaled = companies;
    auto& target = scaled[static_cast<std::size_t>(trial) % scaled.size()];
    target.market_cap *= factor;
    for (auto& s : target.scenarios) s.intrinsic_value *= factor;
    const auto rescaled = enumerate_outcomes(scaled);

    EXPECT_LE((space.returns - rescaled.returns).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(growth(f, space), growth(f, rescaled), 1e-12);
    EXPECT_LE((growth_gradient(f, space) - growth_gradient(f, rescaled)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((growth_hessian(f, space) - growth_hessian(f, rescaled)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(GrowthProperties, PermutingCompaniesPermutesOutputs) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    auto companies = testing::random_portfolio(rng, 2, 4);
    const auto space = enumerate_outcomes(companies);
    const FractionVector f = testing::random_feasible_fractions(rng, space);

    std::vector<std::size_t> perm(companies.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Company> permuted;
    FractionVector pf(f.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
      permuted.push_back(companies[perm[k]]);
      pf(static_cast<Eigen::Index>(k)) = f(static_cast<Eigen::Index>(perm[k]));
    }
    const auto pspace = enumerate_outcomes(permuted);

    EXPECT_NEAR(growth(f, space), growth(pf, pspace), 1e-12);
    const Eigen::VectorXd g = growth_gradient(f, space);
    const Eigen::VectorXd pg = growth_gradient(pf, pspace);
    const Eigen::MatrixXd h = growth_hessian(f, space);
    const Eigen::MatrixXd ph = growth_hessian(pf, pspace);
    for (std::size_t a = 0; a < perm.size(); ++a) {
      const auto ia = static_cast<Eigen::Index>(a);
      EXPECT_NEAR(pg(ia), g(static_cast<Eigen::Index>(perm[a])), 1e-12);
      for (std::size_t b = 0; b < perm.size(); ++b) {
        EXPECT_NEAR(ph(ia, static_cast<Eigen::Index>(b)),
                    h(static_cast<Eigen::Index>(perm[a]), static_cast<Eigen::Index>(perm[b])), 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace kelly
