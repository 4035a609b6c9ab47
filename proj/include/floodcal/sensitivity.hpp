#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "floodcal/forward_model.hpp"
#include "floodcal/latents.hpp"

namespace floodcal {

/**
 * Right-hand side of the sensitivity system for G_is = d h_i / d z_s,
 * evaluated in per-cell sparse form:
 *
 *   dG_is/dt = - sum over group-s edges at i of a_ij / s_i        (source)
 *              + (dB_i/dh_i - dI_i/dh_i
 *                 - sum_j z_ij da_ij/dh_i / s_i) * G_is           (self)
 *              - sum_j z_ij da_ij/dh_j / s_i * G_js               (neighbor)
 *
 * with G(0) = 0. The source accumulates the raw flux over every incident
 * group edge, which is the reading under which a shared group's sensitivity
 * equals the sum of its per-edge sensitivities.
 *
 * Under a localization mask, each group's column is stored compactly on its
 * domain plus one-ring boundary; boundary cells hold G = 0 (they still
 * participate as neighbors of domain cells) and cells outside are never
 * touched. Without a mask every column spans the whole field.
 */
class SensitivityEngine {
public:
    SensitivityEngine(const CellField& field, const LatentLayout& layout,
                      const IncidenceStructure& incidence, const LocalizationMask* mask = nullptr)
        : field_(field), layout_(layout) {
        const int n = field.cell_count();
        const int ng = layout.group_count;
        groups_.resize(ng);

        std::vector<int> slot_of_cell(n);
        for (int s = 0; s < ng; ++s) {
            auto& g = groups_[s];
            std::fill(slot_of_cell.begin(), slot_of_cell.end(), -1);

            if (mask) {
                const auto& gm = mask->groups.at(s);
                g.cells.reserve(gm.domain.size() + gm.boundary.size());
                for (int c : gm.domain) g.cells.push_back(c);
                g.boundary_begin = static_cast<int>(g.cells.size());
                for (int c : gm.boundary) g.cells.push_back(c);
            } else {
                g.cells.resize(n);
                for (int i = 0; i < n; ++i) g.cells[i] = i;
                g.boundary_begin = n;
            }
            for (size_t q = 0; q < g.cells.size(); ++q) slot_of_cell[g.cells[q]] = static_cast<int>(q);

            // source scatter: every group edge, both endpoints
            for (const auto& ge : incidence.group_edges[s]) {
                const int sa = slot_of_cell[ge.a], sb = slot_of_cell[ge.b];
                if (sa < 0 || sb < 0)
                    throw std::invalid_argument(
                        "SensitivityEngine: localization domain of group " + std::to_string(s) +
                        " does not cover its own latent edges");
                g.source.push_back({ge.field_edge, sa, sb});
            }

            // coupling scatter: every field edge with a stored endpoint
            for (size_t e = 0; e < field.edges.size(); ++e) {
                const int sa = slot_of_cell[field.edges[e].a];
                const int sb = slot_of_cell[field.edges[e].b];
                if (sa < 0 && sb < 0) continue;
                g.coupling.push_back({static_cast<int>(e), sa, sb});
            }

            g.offset = total_;
            total_ += g.cells.size();
        }
    }

    const CellField& field() const { return field_; }
    const LatentLayout& layout() const { return layout_; }
    int group_count() const { return layout_.group_count; }
    size_t state_size() const { return total_; }

    /// Cells carrying group s (domain first, then the zero-pinned boundary).
    std::span<const int> cells_of(int s) const { return groups_[s].cells; }
    int domain_size(int s) const { return groups_[s].boundary_begin; }
    size_t offset_of(int s) const { return groups_[s].offset; }

    /// G value of (cell, group) in a packed state; zero outside the stored set.
    double value_at(std::span<const double> G, int s, int cell) const {
        const auto& g = groups_[s];
        for (size_t q = 0; q < g.cells.size(); ++q)
            if (g.cells[q] == cell) return G[g.offset + q];
        return 0.0;
    }

    /**
     * dG/dt for the packed state, given the depths' edge-flux cache for the
     * same instant. `model` supplies areas and the source-term Jacobian of
     * infiltration / inflow.
     */
    void rhs(const ForwardModel& model, double t, std::span<const double> h,
             const EdgeFluxCache& cache, std::span<const double> G, std::span<double> dG) const {
        const EdgeTable& et = model.edge_table();
        std::fill(dG.begin(), dG.end(), 0.0);

        for (const auto& grp : groups_) {
            std::span<const double> Gs = G.subspan(grp.offset, grp.cells.size());
            std::span<double> dGs = dG.subspan(grp.offset, grp.cells.size());

            // gradient source: raw flux of every member edge, opposite signs
            for (const auto& se : grp.source) {
                const double a = cache.a[se.edge];
                dGs[se.slot_a] -= a * et.inv_s_a[se.edge];
                dGs[se.slot_b] += a * et.inv_s_b[se.edge];
            }

            // convective coupling through the state Jacobian
            for (const auto& ce : grp.coupling) {
                const double ga = ce.slot_a >= 0 ? Gs[ce.slot_a] : 0.0;
                const double gb = ce.slot_b >= 0 ? Gs[ce.slot_b] : 0.0;
                const double flow =
                    cache.mult[ce.edge] * (cache.da_ha[ce.edge] * ga + cache.da_hb[ce.edge] * gb);
                if (ce.slot_a >= 0) dGs[ce.slot_a] -= flow * et.inv_s_a[ce.edge];
                if (ce.slot_b >= 0) dGs[ce.slot_b] += flow * et.inv_s_b[ce.edge];
            }

            // diagonal from infiltration / inflow, then pin the boundary ring
            for (int q = 0; q < grp.boundary_begin; ++q) {
                const double diag = model.source_jacobian(t, h[grp.cells[q]]);
                if (diag != 0.0) dGs[q] += diag * Gs[q];
            }
            for (size_t q = grp.boundary_begin; q < grp.cells.size(); ++q) dGs[q] = 0.0;
        }

        for (double v : dG)
            if (!std::isfinite(v))
                throw SimulationError("non-finite sensitivity derivative at t=" + std::to_string(t));
    }

    /// Unpacks one group's column into a dense per-cell vector.
    std::vector<double> unpack_group(std::span<const double> G, int s) const {
        std::vector<double> out(field_.cell_count(), 0.0);
        const auto& g = groups_[s];
        for (size_t q = 0; q < g.cells.size(); ++q) out[g.cells[q]] = G[g.offset + q];
        return out;
    }

private:
    struct Scatter {
        int edge = -1;
        int slot_a = -1;  // -1 when that endpoint is outside the stored set
        int slot_b = -1;
    };
    struct Group {
        std::vector<int> cells;      // domain cells, then boundary cells
        int boundary_begin = 0;
        std::vector<Scatter> source;
        std::vector<Scatter> coupling;
        size_t offset = 0;
    };

    const CellField& field_;
    const LatentLayout& layout_;
    std::vector<Group> groups_;
    size_t total_ = 0;
};

/// Cell-sum of one group's sensitivities; conserved in time on uniform-area
/// fields (zero initially, zero forever).
inline double total_gradient(const SensitivityEngine& eng, std::span<const double> G, int s) {
    double sum = 0.0;
    const auto cells = eng.cells_of(s);
    for (size_t q = 0; q < cells.size(); ++q) sum += G[eng.offset_of(s) + q];
    return sum;
}

inline double max_abs_gradient(const SensitivityEngine& eng, std::span<const double> G, int s) {
    double m = 0.0;
    const auto cells = eng.cells_of(s);
    for (size_t q = 0; q < cells.size(); ++q)
        m = std::max(m, std::fabs(G[eng.offset_of(s) + q]));
    return m;
}

/**
 * Row-selection of G at observation cells: the per-group gradient of the
 * predicted observations (the observation operator is coordinate
 * selection). `points` are active cell indices. Outside a localization
 * domain the gradient is implicitly zero.
 */
inline std::vector<double> observation_gradient(const SensitivityEngine& eng,
                                                std::span<const double> G,
                                                std::span<const int> points) {
    const int ng = eng.group_count();
    std::vector<double> out(points.size() * ng, 0.0);
    for (size_t j = 0; j < points.size(); ++j) {
        if (points[j] < 0 || points[j] >= eng.field().cell_count())
            throw std::invalid_argument("observation_gradient: unknown cell id " +
                                        std::to_string(points[j]));
        for (int s = 0; s < ng; ++s) out[j * ng + s] = eng.value_at(G, s, points[j]);
    }
    return out;
}

// ============================================================================
// Coupled solve
// ============================================================================

struct CoupledResult {
    Trajectory state;                        // depths at sample times
    std::vector<std::vector<double>> sens;   // packed G at sample times
    IntegratorStats stats;
};

/**
 * Integrates the state and its sensitivities as one augmented system, with
 * the edge fluxes evaluated once per right-hand-side call and shared
 * between the two blocks.
 */
inline CoupledResult solve_coupled(const ForwardModel& model, const SensitivityEngine& eng,
                                   std::span<const double> z, double t0, double t1,
                                   const std::vector<double>& sample_times,
                                   const IntegratorConfig& cfg, std::vector<double> h0 = {},
                                   std::vector<double> G0 = {}) {
    const size_t nh = model.field().cell_count();
    const size_t ng = eng.state_size();
    if (h0.empty()) h0.assign(nh, 0.0);
    if (G0.empty()) G0.assign(ng, 0.0);
    if (h0.size() != nh || G0.size() != ng)
        throw std::invalid_argument("solve_coupled: initial condition size mismatch");

    std::vector<double> y0(nh + ng);
    std::copy(h0.begin(), h0.end(), y0.begin());
    std::copy(G0.begin(), G0.end(), y0.begin() + nh);

    EdgeFluxCache cache;
    auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
        auto h = y.first(nh);
        compute_edge_fluxes(model.edge_table(), h, z, model.field().spacing, model.flux_params(),
                            cache, t);
        model.apply_rhs(t, h, cache, dy.first(nh));
        eng.rhs(model, t, h, cache, y.subspan(nh), dy.subspan(nh));
    };

    Trajectory aug = integrate(rhs, std::move(y0), t0, t1, sample_times, cfg, nh);

    CoupledResult res;
    res.stats = aug.stats;
    res.state.times = aug.times;
    res.state.stats = aug.stats;
    res.state.states.reserve(aug.states.size());
    res.sens.reserve(aug.states.size());
    for (auto& y : aug.states) {
        res.state.states.emplace_back(y.begin(), y.begin() + nh);
        res.sens.emplace_back(y.begin() + nh, y.end());
    }
    return res;
}

}  // namespace floodcal
