#pragma once

#include <cmath>
#include <stdexcept>

namespace floodcal {

enum class FluxConvention {
    Dimensional,   // a = w * d_up^(5/3) * phi(sl) / n_ij, w the shared edge length
    PaperLiteral,  // a = d_up^(5/3) * phi(sl) / (n_ij * s), s the cell area
};

/**
 * Parameters of the Manning upwind edge flux.
 *
 * The slope factor is regularized as phi(sl) = sl / sqrt(|sl| + eps) so the
 * depth-derivative of the flux stays bounded as the water surface flattens;
 * the raw sqrt(|sl|) derivative blows up like |sl|^(-1/2) and would make the
 * coupled sensitivity system unusable near equilibrium pools. eps also sets
 * the leveling stiffness an explicit integrator has to resolve: phi'(0) =
 * eps^(-1/2).
 */
struct FluxParams {
    double slope_regularization = 1e-4;  // eps in phi(sl)
    double edge_width = 0.0;             // w [m], shared edge length (Dimensional)
    double cell_area = 0.0;              // s [m^2] (PaperLiteral denominator)
    FluxConvention convention = FluxConvention::Dimensional;
};

/// Signed water-surface slope between two cells: (h_i - h_j + e_i - e_j) / dx.
/// Grouped so that swapping (i, j) negates the result exactly.
inline double water_slope(double h_i, double h_j, double e_i, double e_j, double dx) {
    return ((h_i - h_j) + (e_i - e_j)) / dx;
}

struct EdgeFluxResult {
    double a = 0.0;     // [m^3/s], positive = flow i -> j
    double da_hi = 0.0; // d a / d h_i
    double da_hj = 0.0; // d a / d h_j
};

/**
 * Manning formula as a windward scheme: the conveying depth is the positive
 * part of the upwind cell's depth (the cell with the higher water surface)
 * and the sign of the flux follows the surface slope, which makes the flux
 * exactly antisymmetric in (i, j). Both the upwind-depth channel and the
 * slope channel of the depth-derivatives are returned; channels clamped by
 * max(h, 0) or by upwind selection are exactly zero.
 */
inline EdgeFluxResult edge_flux_full(double h_i, double h_j, double e_i, double e_j,
                                     double n_i, double n_j, double dx, const FluxParams& p) {
    const double sl = water_slope(h_i, h_j, e_i, e_j, dx);
    const double eps = p.slope_regularization;
    const double n_ij = 0.5 * (n_i + n_j);

    const double coeff = (p.convention == FluxConvention::Dimensional)
                             ? p.edge_width / n_ij
                             : 1.0 / (n_ij * p.cell_area);

    const bool up_is_i = sl > 0.0;
    const double h_up = up_is_i ? h_i : h_j;
    const double d = h_up > 0.0 ? h_up : 0.0;

    EdgeFluxResult r;
    if (d == 0.0 && sl == 0.0) return r;

    const double root = std::sqrt(std::fabs(sl) + eps);
    const double phi = sl / root;                                    // signed, ~ sign(sl)*sqrt(|sl|)
    const double dphi = (0.5 * std::fabs(sl) + eps) / (root * root * root);  // phi'(sl), bounded

    const double d23 = std::cbrt(d * d);   // d^(2/3)
    const double d53 = d23 * d;            // d^(5/3)

    r.a = coeff * d53 * phi;

    const double slope_channel = coeff * d53 * dphi / dx;  // via d sl/d h
    r.da_hi = slope_channel;
    r.da_hj = -slope_channel;
    if (d > 0.0) {
        const double depth_channel = coeff * (5.0 / 3.0) * d23 * phi;
        if (up_is_i)
            r.da_hi += depth_channel;
        else
            r.da_hj += depth_channel;
    }
    return r;
}

inline double edge_flux(double h_i, double h_j, double e_i, double e_j,
                        double n_i, double n_j, double dx, const FluxParams& p) {
    return edge_flux_full(h_i, h_j, e_i, e_j, n_i, n_j, dx, p).a;
}

struct FluxDerivs {
    double d_hi = 0.0;
    double d_hj = 0.0;
};

inline FluxDerivs edge_flux_derivs(double h_i, double h_j, double e_i, double e_j,
                                   double n_i, double n_j, double dx, const FluxParams& p) {
    const auto r = edge_flux_full(h_i, h_j, e_i, e_j, n_i, n_j, dx, p);
    return {r.da_hi, r.da_hj};
}

}  // namespace floodcal
