/**
 * The Manning upwind edge flux and its analytic depth-derivatives, checked
 * against hand arithmetic and central finite differences.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "floodcal/flux.hpp"

using namespace floodcal;

namespace {

FluxParams params_eps(double eps) {
    FluxParams p;
    p.slope_regularization = eps;
    p.edge_width = 10.0;
    p.cell_area = 100.0;
    return p;
}

}  // namespace

TEST(Slope, HandValuesAndAntisymmetry) {
    EXPECT_DOUBLE_EQ(water_slope(0.2, 0.2, 1.0, 1.0, 10.0), 0.0);
    EXPECT_DOUBLE_EQ(water_slope(0.1, 0.0, 1.0, 0.8, 10.0), 0.03);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const double hi = u(rng), hj = u(rng), ei = u(rng), ej = u(rng);
        EXPECT_DOUBLE_EQ(water_slope(hi, hj, ei, ej, 10.0), -water_slope(hj, hi, ej, ei, 10.0));
    }
}

TEST(Flux, ZeroSlopeGivesZero) {
    EXPECT_DOUBLE_EQ(edge_flux(0.3, 0.3, 1.0, 1.0, 0.02, 0.02, 10.0, params_eps(1e-8)), 0.0);
}

TEST(Flux, HandEvaluatedStep) {
    // 10 * 0.1^(5/3) * 0.03 / sqrt(0.03 + 1e-8) / 0.02
    const double a = edge_flux(0.1, 0.0, 1.0, 0.8, 0.02, 0.02, 10.0, params_eps(1e-8));
    EXPECT_NEAR(a, 1.865772, 1e-4);
    EXPECT_GT(a, 0.0);  // flow from i to j
}

TEST(Flux, PaperLiteralConvention) {
    FluxParams p = params_eps(1e-8);
    p.convention = FluxConvention::PaperLiteral;
    const double a = edge_flux(0.1, 0.0, 1.0, 0.8, 0.02, 0.02, 10.0, p);
    // same numerator, denominator n*s = 0.02*100 instead of n/w = 0.02/10
    EXPECT_NEAR(a, 1.865772 / 1000.0, 1e-7);
}

TEST(Flux, AntisymmetricUnderOrientationSwap) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> depth(0.0, 0.5), elev(0.0, 2.0);
    const auto p = params_eps(1e-8);
    for (int k = 0; k < 200; ++k) {
        const double hi = depth(rng), hj = depth(rng), ei = elev(rng), ej = elev(rng);
        const double aij = edge_flux(hi, hj, ei, ej, 0.02, 0.03, 10.0, p);
        const double aji = edge_flux(hj, hi, ej, ei, 0.03, 0.02, 10.0, p);
        EXPECT_EQ(aij, -aji);
    }
}

TEST(Flux, ZeroDepthSafety) {
    // no water, no flux, whatever the elevation difference
    const auto p = params_eps(1e-8);
    EXPECT_DOUBLE_EQ(edge_flux(0.0, 0.0, 5.0, 0.0, 0.02, 0.02, 10.0, p), 0.0);
    EXPECT_DOUBLE_EQ(edge_flux(-0.01, 0.0, 5.0, 0.0, 0.02, 0.02, 10.0, p), 0.0);
}

TEST(Flux, MonotoneInUpwindDepth) {
    const auto p = params_eps(1e-8);
    double prev = 0.0;
    for (double h = 0.0; h <= 0.5; h += 0.01) {
        const double a = edge_flux(h, 0.05, 1.0, 0.8, 0.02, 0.02, 10.0, p);
        EXPECT_GE(a, prev);
        prev = a;
    }
}

TEST(FluxDerivs, ZeroSlopeZeroDepth) {
    const auto d = edge_flux_derivs(0.0, 0.0, 1.0, 1.0, 0.02, 0.02, 10.0, params_eps(1e-8));
    EXPECT_DOUBLE_EQ(d.d_hi, 0.0);
    EXPECT_DOUBLE_EQ(d.d_hj, 0.0);
}

TEST(FluxDerivs, MatchCentralDifferences) {
    const auto p = params_eps(1e-8);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> depth(0.01, 0.5), elev(0.0, 1.0);
    const double step = 1e-7;
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
        const double hi = depth(rng), hj = depth(rng), ei = elev(rng), ej = elev(rng);
        // keep clear of the upwind switch so the difference stays one-sided
        if (std::fabs(water_slope(hi, hj, ei, ej, 10.0)) < 1e-3) continue;
        const auto d = edge_flux_derivs(hi, hj, ei, ej, 0.02, 0.03, 10.0, p);
        const double fd_i = (edge_flux(hi + step, hj, ei, ej, 0.02, 0.03, 10.0, p) -
                             edge_flux(hi - step, hj, ei, ej, 0.02, 0.03, 10.0, p)) /
                            (2 * step);
        const double fd_j = (edge_flux(hi, hj + step, ei, ej, 0.02, 0.03, 10.0, p) -
                             edge_flux(hi, hj - step, ei, ej, 0.02, 0.03, 10.0, p)) /
                            (2 * step);
        EXPECT_NEAR(d.d_hi, fd_i, std::max(1e-8, std::fabs(fd_i)) * 1e-5);
        EXPECT_NEAR(d.d_hj, fd_j, std::max(1e-8, std::fabs(fd_j)) * 1e-5);
        ++checked;
    }
    EXPECT_GT(checked, 50);
}

TEST(FluxDerivs, HandExampleAgainstDifferences) {
    const auto p = params_eps(1e-8);
    const auto d = edge_flux_derivs(0.1, 0.0, 1.0, 0.8, 0.02, 0.02, 10.0, p);
    const double step = 1e-7;
    const double fd_i = (edge_flux(0.1 + step, 0.0, 1.0, 0.8, 0.02, 0.02, 10.0, p) -
                         edge_flux(0.1 - step, 0.0, 1.0, 0.8, 0.02, 0.02, 10.0, p)) /
                        (2 * step);
    EXPECT_NEAR(d.d_hi, fd_i, std::fabs(fd_i) * 1e-5);
}

TEST(FluxDerivs, DownwindSideHasOnlySlopeChannel) {
    // h_j upwind (sl < 0): no depth channel through h_i
    const auto p = params_eps(1e-8);
    const auto d = edge_flux_derivs(0.05, 0.3, 0.8, 1.0, 0.02, 0.02, 10.0, p);
    const auto r = edge_flux_full(0.05, 0.3, 0.8, 1.0, 0.02, 0.02, 10.0, p);
    ASSERT_LT(r.a, 0.0);  // flow j -> i
    // slope channels are equal and opposite; the j side additionally carries
    // the upwind depth channel
    EXPECT_GT(std::fabs(d.d_hj), std::fabs(d.d_hi));
    const double step = 1e-7;
    const double fd_i = (edge_flux(0.05 + step, 0.3, 0.8, 1.0, 0.02, 0.02, 10.0, p) -
                         edge_flux(0.05 - step, 0.3, 0.8, 1.0, 0.02, 0.02, 10.0, p)) /
                        (2 * step);
    EXPECT_NEAR(d.d_hi, fd_i, std::fabs(fd_i) * 1e-5);
}

TEST(FluxDerivs, BoundedNearFlatSurface) {
    // the regularization caps the slope-channel derivative at eps^(-1/2)
    const auto p = params_eps(1e-4);
    const auto d = edge_flux_derivs(0.2, 0.2, 1.0, 1.0, 0.02, 0.02, 10.0, p);
    const double cap = (10.0 / 0.02) * std::pow(0.2, 5.0 / 3.0) * std::pow(1e-4, -0.5) / 10.0;
    EXPECT_LE(std::fabs(d.d_hi), cap * 1.0001);
    EXPECT_GT(std::fabs(d.d_hi), 0.0);
}
