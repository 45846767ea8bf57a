#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <random>
#include <sstream>

using namespace optexec;

TEST(Validate, ReferenceProblemIsValid) {
    const auto r = validate(fixtures::reference());
    EXPECT_TRUE(r.ok()) << r.summary();
}

TEST(Validate, NegativeEtaFails) {
    auto p = fixtures::reference();
    p.cost = ExecutionCostModel::power_law(-1.0, 0.65);
    const auto r = validate(p);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.failed("cost.eta"));
}

TEST(Validate, DecreasingCustomImpactFails) {
    auto p = fixtures::reference();
    p.q0 = 2.0;
    // odd, F(1) = 2, F(2) = 1
    p.impact = PermanentImpactModel::custom([](double q) {
        const double a = std::abs(q);
        const double v = a <= 1.0 ? 2.0 * a : std::max(0.0, 3.0 - a);
        return q < 0 ? -v : v;
    });
    const auto r = validate(p);
    EXPECT_TRUE(r.failed("impact.nondecreasing")) << r.summary();
}

TEST(Validate, SignChecksOnMarketFields) {
    auto p = fixtures::reference();
    p.q0 = -1.0;
    p.market.sigma = 0.0;
    p.market.psi = -0.1;
    const auto r = validate(p);
    EXPECT_TRUE(r.failed("q0"));
    EXPECT_TRUE(r.failed("sigma"));
    EXPECT_TRUE(r.failed("psi"));
    EXPECT_FALSE(r.failed("gamma"));
}

TEST(Validate, PsiZeroAllowed) {
    auto p = fixtures::reference();
    p.market.psi = 0.0;
    EXPECT_TRUE(validate(p).ok());
}

TEST(Validate, BetaOutsideUnitIntervalFails) {
    auto p = fixtures::reference();
    p.impact = PermanentImpactModel::power_law(4.5e-6, 1.5);
    EXPECT_TRUE(validate(p).failed("impact.beta"));
}

TEST(Validate, VolumeMustCoverHorizon) {
    auto p = fixtures::reference();
    p.volume = VolumeCurve::piecewise_linear({{0.0, 5e6}, {0.5, 4e6}});
    EXPECT_TRUE(validate(p).failed("volume.covers_horizon"));
}

TEST(Validate, CustomCostShapeChecks) {
    auto p = fixtures::reference();
    p.cost = ExecutionCostModel::custom([](double r) { return 0.02 * std::abs(r); }, 100.0);
    const auto r = validate(p);
    EXPECT_FALSE(r.ok());
    EXPECT_TRUE(r.failed("cost.strictly_convex") || r.failed("cost.superlinear")) << r.summary();

    p.cost = ExecutionCostModel::custom([](double r) { return 0.02 * r * r + 0.001 * r; }, 10.0);
    EXPECT_TRUE(validate(p).failed("cost.even"));

    p.cost = ExecutionCostModel::custom([](double r) { return std::cosh(r) - 1.0; }, 5.0);
    EXPECT_TRUE(validate(p).ok()) << validate(p).summary();
}

TEST(EvalCost, PowerLawValues) {
    const auto c = ExecutionCostModel::power_law(0.02, 0.65);
    EXPECT_EQ(eval_cost(c, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(eval_cost(c, 1.0), 0.02);
    EXPECT_DOUBLE_EQ(eval_cost(c, -1.0), 0.02);
}

TEST(EvalCost, SymmetryIsExactForPowerLaw) {
    const auto c = ExecutionCostModel::power_law(0.02, 0.65);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double r = u(rng);
        EXPECT_EQ(eval_cost(c, r), eval_cost(c, -r));
    }
}

TEST(EvalCost, CustomSymmetryAndBound) {
    const auto c = ExecutionCostModel::custom([](double r) { return std::cosh(r) - 1.0; }, 3.0);
    for (double r : {0.1, 0.7, 1.3, 2.9}) EXPECT_NEAR(eval_cost(c, r), eval_cost(c, -r), 1e-12 * eval_cost(c, r));
    EXPECT_THROW(eval_cost(c, 3.5), DomainError);
    EXPECT_THROW(eval_cost(c, std::nan("")), DomainError);
}

TEST(PmiIntegral, ReferenceValues) {
    const auto f = PermanentImpactModel::power_law(4.5e-6, 0.75);
    EXPECT_NEAR(pmi_integral(f, 500000.0), 24175.0, 0.01 * 24175.0);
    EXPECT_NEAR(pmi_integral(f, 1000000.0), 81316.0, 0.01 * 81316.0);
    EXPECT_EQ(pmi_integral(f, 0.0), 0.0);
    EXPECT_EQ(pmi_integral(PermanentImpactModel::none(), 1e6), 0.0);
    EXPECT_THROW(pmi_integral(f, -1.0), DomainError);
}

TEST(PmiIntegral, CustomMatchesClosedForm) {
    const auto pl = PermanentImpactModel::power_law(4.5e-6, 0.75);
    const auto cu = PermanentImpactModel::custom([](double q) {
        return 4.5e-6 * (q < 0 ? -1.0 : 1.0) * std::pow(std::abs(q), 0.75);
    });
    for (double q : {1e3, 2.5e5, 1e6}) EXPECT_NEAR(pmi_integral(cu, q), pmi_integral(pl, q), 1e-9 * pmi_integral(pl, q));
}

TEST(PmiIntegral, ConvexInQ) {
    const auto f = PermanentImpactModel::power_law(4.5e-6, 0.75);
    const double h = 1e4;
    for (double q = h; q < 1e6; q += h) {
        const double d2 = pmi_integral(f, q + h) - 2.0 * pmi_integral(f, q) + pmi_integral(f, q - h);
        EXPECT_GE(d2, -1e-12 * pmi_integral(f, q + h));
    }
}

TEST(Impact, DensityMatchesDerivative) {
    const auto f = PermanentImpactModel::power_law(4.5e-6, 0.75);
    for (double y : {10.0, 1e3, 1e5}) {
        const double h = 1e-6 * y;
        EXPECT_NEAR(f.density(y), (f.F(y + h) - f.F(y - h)) / (2 * h), 1e-6 * f.density(y));
    }
    const auto cu = PermanentImpactModel::custom([](double q) { return 1e-3 * std::tanh(q); });
    EXPECT_NEAR(cu.density(0.5), 1e-3 / std::pow(std::cosh(0.5), 2), 1e-9);
}

TEST(Volume, BoundsHoldOnDenseSample) {
    const auto v = VolumeCurve::piecewise_linear({{0.0, 7e6}, {0.3, 4e6}, {0.6, 3.5e6}, {1.0, 8e6}});
    EXPECT_EQ(v.lo(), 3.5e6);
    EXPECT_EQ(v.hi(), 8e6);
    for (int i = 0; i <= 10000; ++i) {
        const double x = v.at(i / 10000.0);
        EXPECT_GE(x, v.lo());
        EXPECT_LE(x, v.hi());
    }
    EXPECT_DOUBLE_EQ(v.at(0.15), 5.5e6);
}

TEST(Volume, ShiftedCurve) {
    const auto v = VolumeCurve::piecewise_linear({{0.0, 7e6}, {0.5, 4e6}, {1.0, 8e6}});
    const auto s = v.shifted(0.25);
    for (double t : {0.0, 0.1, 0.25, 0.5, 0.75}) EXPECT_NEAR(s.at(t), v.at(0.25 + t), 1e-6);
}

TEST(VolumeCsv, ParsesAndRejects) {
    std::istringstream ok("time,volume\n0,7e6\n0.5,4e6\n1,8e6\n");
    const auto v = parse_volume_csv(ok, 1.0);
    EXPECT_FALSE(v.is_constant());
    EXPECT_DOUBLE_EQ(v.at(0.25), 5.5e6);

    auto line_of = [](const std::string& text, double T) {
        std::istringstream in(text);
        try {
            parse_volume_csv(in, T);
        } catch (const ConfigError& e) {
            return e.line();
        }
        return -1;
    };
    EXPECT_EQ(line_of("time,volume\n0,1\n0.5,2\n0.5,3\n", 0.5), 4);
    EXPECT_EQ(line_of("t,v\n0,1\n", 0.0), 1);
    EXPECT_EQ(line_of("time,volume\n0,1\n1,-2\n", 1.0), 3);
    EXPECT_EQ(line_of("time,volume\n0,1\n1,x\n", 1.0), 3);
    EXPECT_NE(line_of("time,volume\n0,1\n0.5,2\n", 1.0), -1);
    EXPECT_NE(line_of("time,volume\n0.1,1\n1,2\n", 1.0), -1);
}

TEST(Problem, RiskRateAndCopies) {
    const auto p = fixtures::reference();
    EXPECT_DOUBLE_EQ(p.risk_rate(), 2.5e-7);
    EXPECT_EQ(p.with_gamma(2e-6).market.gamma, 2e-6);
    EXPECT_EQ(p.with_q0(3.0).q0, 3.0);
    EXPECT_EQ(p.with_horizon(2.0).T, 2.0);
}
