#include <gtest/gtest.h>

#include <isomono/algebra.hpp>
#include <isomono/ode.hpp>

using namespace isomono;

TEST(Dop853, ComplexExponential) {
    const Complex lam(-0.3, 2.0);
    Dop853 ode([&](double, const State& y, State& dy) { dy = lam * y; }, {1e-12, 1e-12});
    State y(2);
    y << 1.0, Complex(0.0, 1.0);
    const auto st = ode.integrate(y, 0.0, 3.0);
    EXPECT_LT(std::abs(y[0] - std::exp(3.0 * lam)), 1e-10);
    EXPECT_LT(std::abs(y[1] - Complex(0.0, 1.0) * std::exp(3.0 * lam)), 1e-10);
    EXPECT_GT(st.steps, 0);
    EXPECT_LE(st.max_error, 1.0);
}

TEST(Dop853, BackwardIntegrationReturnsToStart) {
    Dop853 ode([](double s, const State& y, State& dy) { dy = Complex(std::cos(s), 1.0) * y; }, {1e-12, 1e-12});
    State y(1);
    y << Complex(0.5, -0.25);
    const State y0 = y;
    ode.integrate(y, 0.0, 2.0);
    ode.integrate(y, 2.0, 0.0);
    EXPECT_LT(std::abs(y[0] - y0[0]), 1e-10);
}

TEST(Dop853, ErrorFollowsTolerance) {
    // y' = s^7 y has an exact solution exp(s^8/8)
    auto run = [](double tol) {
        Dop853 ode([](double s, const State& y, State& dy) { dy = std::pow(s, 7) * y; }, {tol, tol});
        State y(1);
        y << 1.0;
        ode.integrate(y, 0.0, 1.5);
        return std::abs(y[0] - std::exp(std::pow(1.5, 8) / 8.0)) / std::exp(std::pow(1.5, 8) / 8.0);
    };
    const double e6 = run(1e-6), e11 = run(1e-11);
    EXPECT_LT(e11, 1e-9);
    EXPECT_LT(e11, e6);
}

TEST(Dop853, ZeroLengthInterval) {
    Dop853 ode([](double, const State& y, State& dy) { dy = y; });
    State y(1);
    y << 2.0;
    const auto st = ode.integrate(y, 1.0, 1.0);
    EXPECT_EQ(st.steps, 0);
    EXPECT_EQ(y[0], Complex(2.0));
}

TEST(Dop853, BlowUpIsReported) {
    // y' = y^2, y(0) = 1 blows up at s = 1
    Dop853 ode([](double, const State& y, State& dy) { dy = y.array().square().matrix(); }, {1e-10, 1e-10});
    State y(1);
    y << 1.0;
    EXPECT_THROW(ode.integrate(y, 0.0, 2.0), NumericalFailure);
}

TEST(Dop853, MaxStepsIsEnforced) {
    OdeOptions o;
    o.max_steps = 5;
    Dop853 ode([](double, const State& y, State& dy) { dy = Complex(0.0, 200.0) * y; }, o);
    State y(1);
    y << 1.0;
    EXPECT_THROW(ode.integrate(y, 0.0, 10.0), NumericalFailure);
}
