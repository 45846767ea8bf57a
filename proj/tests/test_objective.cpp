#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace optexec;

namespace {

Trajectory sampled_ac(const LiquidationProblem& p, int n) {
    Trajectory t;
    t.grid = Grid{0.0, p.T, n};
    t.p.assign(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) t.q.push_back(ac_trajectory(p, t.grid.time(j)));
    t.refresh_speeds();
    return t;
}

}  // namespace

TEST(EvalI, ZeroTrajectory) {
    const auto p = fixtures::reference().with_q0(0.0);
    const auto t = fixtures::linear_liquidation(p, 10);
    EXPECT_EQ(eval_I(p, t, 0.004), 0.0);
}

TEST(EvalI, LinearLiquidationQuadraticCost) {
    const auto p = fixtures::quadratic();
    const double eta = 0.02, V = 5e6, q0 = p.q0, T = p.T;
    const double exact = eta * q0 * q0 / (V * T) + p.risk_rate() * q0 * q0 * T / 6.0;
    EXPECT_NEAR(eval_I(p, fixtures::linear_liquidation(p, 4000), 0.0), exact, 1e-6 * exact);
}

TEST(EvalI, LinearTermIsPsiTimesQ0) {
    const auto p = fixtures::reference();
    const auto t = newton_solve(p);
    const double base = eval_I(p, t, 0.0);
    EXPECT_NEAR(eval_I(p, t, 0.004), base + 0.004 * p.q0, 1e-12 * (base + 0.004 * p.q0));
}

TEST(EvalI, QuadratureConvergesOnSinhCurve) {
    const auto p = fixtures::quadratic();
    const double a = eval_I(p, sampled_ac(p, 500), 0.0), b = eval_I(p, sampled_ac(p, 1000), 0.0);
    EXPECT_LT(std::abs(a - b), 0.005 * b);
    EXPECT_NEAR(b, ac_value(p, p.T, p.q0), 1e-4 * b);
}

TEST(EvalI, HorizonMismatchRejected) {
    const auto p = fixtures::reference();
    const auto t = fixtures::linear_liquidation(p.with_horizon(2.0), 10);
    EXPECT_THROW(eval_I(p, t, 0.0), DomainError);
}

TEST(CashMoments, Decomposition) {
    const auto p = fixtures::reference();
    const auto t = newton_solve(p);
    const auto c = cash_moments(p, t);
    EXPECT_EQ(c.mtm, 2e7);
    EXPECT_NEAR(c.pmi, pmi_integral(p.impact, p.q0), 1e-9);
    EXPECT_NEAR(c.exec_linear, 2000.0, 1e-6);
    EXPECT_NEAR(c.mean, c.mtm - c.pmi - c.exec_nonlinear - c.exec_linear, 1e-6);
    EXPECT_GE(c.variance, 0.0);
    // nonlinear execution cost plus risk charge is the finite-horizon price term
    EXPECT_NEAR(c.exec_nonlinear + 0.5 * p.market.gamma * c.variance, eval_I(p, t, 0.0), 1e-9 * eval_I(p, t, 0.0));
    EXPECT_LE(c.variance, p.market.sigma * p.market.sigma * p.q0 * p.q0 * p.T);
}

TEST(CashMoments, ZeroInventory) {
    const auto p = fixtures::reference().with_q0(0.0);
    const auto c = cash_moments(p, fixtures::linear_liquidation(p, 10));
    EXPECT_EQ(c.mean, 0.0);
    EXPECT_EQ(c.variance, 0.0);
}

TEST(CashMoments, HoldingPositionIsMarkedToMarket) {
    const auto p = fixtures::reference();
    Trajectory t;
    t.grid = Grid{0.0, 1.0, 100};
    t.q.assign(101, p.q0);
    t.p.assign(101, 0.0);
    t.refresh_speeds();
    const auto c = cash_moments(p, t);
    EXPECT_DOUBLE_EQ(c.mean, p.q0 * p.market.S0);
    EXPECT_NEAR(c.variance, p.market.sigma * p.market.sigma * p.q0 * p.q0 * p.T, 1e-6);
}

TEST(ExpectedUtility, CertaintyEquivalentIdentity) {
    const auto p = fixtures::reference();
    const auto t = newton_solve(p);
    const auto u = expected_utility(p, t);
    const auto c = cash_moments(p, t);
    ASSERT_TRUE(u.utility.has_value());
    EXPECT_LT(*u.utility, 0.0);
    EXPECT_NEAR(-std::log(-*u.utility) / p.market.gamma, c.mean - 0.5 * p.market.gamma * c.variance,
                1e-10 * c.mean);
    EXPECT_NEAR(u.certainty_equivalent, 2e7 - 24175.3 - 2000.0 - eval_I(p, t, 0.0), 1.0);
}

TEST(ExpectedUtility, Limits) {
    auto p = fixtures::reference(1e-14);
    const auto t = newton_solve(p);
    const auto c = cash_moments(p, t);
    EXPECT_NEAR(expected_utility(p, t).certainty_equivalent, c.mean, 1e-9 * c.mean);

    const auto z = fixtures::reference().with_q0(0.0);
    const auto uz = expected_utility(z, fixtures::linear_liquidation(z, 4));
    EXPECT_EQ(uz.certainty_equivalent, 0.0);
    ASSERT_TRUE(uz.utility.has_value());
    EXPECT_EQ(*uz.utility, -1.0);
}

TEST(ExpectedUtility, LogSpaceWhenExpOverflows) {
    const auto p = fixtures::reference(1e-4);
    const auto u = expected_utility(p, newton_solve(p));
    EXPECT_FALSE(u.utility.has_value());
    EXPECT_NEAR(u.log_neg_utility, -1e-4 * u.certainty_equivalent, 1e-9);
}
