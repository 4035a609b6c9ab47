/**
 * Hyetograph shapes and the infiltration / inflow hooks. Cumulative depths
 * are checked both against the exact declared totals and against a plain
 * trapezoid quadrature of the intensity curve.
 */

#include <gtest/gtest.h>

#include <cmath>

#include "floodcal/forcing.hpp"

using namespace floodcal;

namespace {

// Independent oracle: trapezoid quadrature of the intensity at 0.01 s steps.
double quadrature_depth(const Hyetograph& h, double t0, double t1, double dt = 0.01) {
    double acc = 0.0;
    double prev = h.intensity(t0);
    for (double t = t0 + dt; t <= t1 + 1e-12; t += dt) {
        const double cur = h.intensity(t);
        acc += 0.5 * (prev + cur) * dt;
        prev = cur;
    }
    return acc;
}

}  // namespace

TEST(Uniform, CaseOneIntensity) {
    const auto h = uniform_hyetograph(40e-3, 600.0);
    EXPECT_NEAR(h.intensity(300.0), 40e-3 / 600.0, 1e-18);
    EXPECT_NEAR(h.intensity(300.0), 6.667e-5, 1e-8);
    EXPECT_DOUBLE_EQ(h.intensity(601.0), 0.0);
    EXPECT_DOUBLE_EQ(h.cumulative(600.0), 0.040);
}

TEST(Uniform, ZeroDepthIsIdenticallyZero) {
    const auto h = uniform_hyetograph(0.0, 600.0);
    for (double t : {0.0, 1.0, 300.0, 599.0, 600.0}) EXPECT_DOUBLE_EQ(h.intensity(t), 0.0);
}

TEST(Uniform, RejectsNonpositiveDuration) {
    EXPECT_THROW(uniform_hyetograph(0.01, 0.0), std::invalid_argument);
    EXPECT_THROW(uniform_hyetograph(-0.01, 10.0), std::invalid_argument);
}

TEST(Chicago, PeakPositionAndContinuity) {
    const auto h = chicago_hyetograph(40e-3, 600.0, 0.3);
    // peak at r * duration = 180 s; intensity decreases on both sides
    const double peak = h.intensity(180.0);
    EXPECT_GT(peak, h.intensity(170.0));
    EXPECT_GT(peak, h.intensity(190.0));
    EXPECT_NEAR(h.intensity(179.999), h.intensity(180.001), peak * 1e-3);
    EXPECT_DOUBLE_EQ(h.cumulative(600.0), h.cumulative_depth());
    EXPECT_NEAR(h.cumulative(600.0), 0.040, 0.040 * 1e-12);
}

TEST(Chicago, HalfPeakRatioIsSymmetric) {
    const auto h = chicago_hyetograph(40e-3, 600.0, 0.5);
    for (double dt : {10.0, 50.0, 120.0, 250.0})
        EXPECT_NEAR(h.intensity(300.0 - dt), h.intensity(300.0 + dt), 1e-15);
    // first instant equals the pre-cutoff limit
    EXPECT_NEAR(h.intensity(0.0), h.intensity(600.0), 1e-15);
}

TEST(Chicago, QuadratureOracleMatchesDeclaredDepth) {
    for (double r : {0.3, 0.5, 0.7}) {
        const auto h = chicago_hyetograph(40e-3, 600.0, r);
        const double q = quadrature_depth(h, 0.0, 600.0);
        EXPECT_NEAR(q, 0.040, 0.040 * 2e-5) << "r = " << r;
        // exact analytic cumulative, tighter than the quadrature
        EXPECT_NEAR(h.cumulative(600.0), 0.040, 0.040 * 1e-9);
    }
}

TEST(Chicago, CumulativeMatchesQuadratureMidStorm) {
    const auto h = chicago_hyetograph(40e-3, 600.0, 0.3);
    for (double t : {60.0, 180.0, 300.0, 480.0})
        EXPECT_NEAR(h.cumulative(t), quadrature_depth(h, 0.0, t), 1e-6);
}

TEST(Chicago, RejectsBadPeakRatio) {
    EXPECT_THROW(chicago_hyetograph(0.04, 600.0, 0.0), std::invalid_argument);
    EXPECT_THROW(chicago_hyetograph(0.04, 600.0, 1.0), std::invalid_argument);
    EXPECT_THROW(chicago_hyetograph(0.04, 600.0, -0.2), std::invalid_argument);
}

TEST(Hyetograph, NonnegativeAndZeroPastDuration) {
    for (double r : {0.3, 0.5, 0.7}) {
        const auto h = chicago_hyetograph(40e-3, 600.0, r);
        for (double t = 0.0; t <= 700.0; t += 1.7) {
            EXPECT_GE(h.intensity(t), 0.0);
            if (t > 600.0) EXPECT_DOUBLE_EQ(h.intensity(t), 0.0);
        }
    }
}

TEST(Infiltration, KindNoneIsZero) {
    ForcingSpec f;
    f.rainfall = uniform_hyetograph(0.0, 1.0);
    EXPECT_DOUBLE_EQ(infiltration_rate(f, 0.5, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(f.infiltration.rate_ddepth(0.5), 0.0);
}

TEST(Infiltration, CapacityLimitedAndGated) {
    InfiltrationSpec inf;
    inf.kind = InfiltrationSpec::Kind::ConstantCapacity;
    inf.capacity = 1e-6;
    EXPECT_DOUBLE_EQ(inf.rate(0.0), 0.0);        // no water to infiltrate
    EXPECT_DOUBLE_EQ(inf.rate(0.1), 1e-6);       // capacity-limited branch
    EXPECT_DOUBLE_EQ(inf.rate(5e-5), 0.5e-6);    // gated ramp below h_gate
    EXPECT_DOUBLE_EQ(inf.rate_ddepth(5e-5), 1e-6 / 1e-4);
    EXPECT_DOUBLE_EQ(inf.rate_ddepth(0.1), 0.0);
}

TEST(Inflow, PiecewiseConstantLookup) {
    InflowSeries s;
    s.per_cell.resize(2);
    s.per_cell[1] = {{0.0, 1e-5}, {100.0, 3e-5}};
    EXPECT_DOUBLE_EQ(s.rate(0, 50.0), 0.0);
    EXPECT_DOUBLE_EQ(s.rate(1, 50.0), 1e-5);
    EXPECT_DOUBLE_EQ(s.rate(1, 100.0), 3e-5);
    EXPECT_DOUBLE_EQ(s.rate(1, 500.0), 3e-5);
}
