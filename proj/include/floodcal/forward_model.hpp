#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "floodcal/flux.hpp"
#include "floodcal/forcing.hpp"
#include "floodcal/grid.hpp"
#include "floodcal/integrator.hpp"
#include "floodcal/latents.hpp"

namespace floodcal {

struct SimulationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Flat per-edge tables for the hot loops: endpoint cells, their elevation /
 * Manning / inverse area, and the edge's multiplier rule from the layout.
 * Built once per (field, layout) pair; immutable afterwards.
 */
struct EdgeTable {
    std::vector<int> cell_a, cell_b;
    std::vector<double> elev_a, elev_b;
    std::vector<double> n_a, n_b;
    std::vector<double> inv_s_a, inv_s_b;
    std::vector<uint8_t> role;      // EdgeRole
    std::vector<double> constant;   // Constant edges (Implicit reads 1)
    std::vector<int> group;         // Latent edges, else -1

    size_t size() const { return cell_a.size(); }

    static EdgeTable build(const CellField& field, const LatentLayout& layout) {
        EdgeTable t;
        const size_t m = field.edges.size();
        t.cell_a.resize(m); t.cell_b.resize(m);
        t.elev_a.resize(m); t.elev_b.resize(m);
        t.n_a.resize(m); t.n_b.resize(m);
        t.inv_s_a.resize(m); t.inv_s_b.resize(m);
        t.role.resize(m); t.constant.resize(m); t.group.resize(m);
        for (size_t e = 0; e < m; ++e) {
            const int a = field.edges[e].a, b = field.edges[e].b;
            t.cell_a[e] = a; t.cell_b[e] = b;
            t.elev_a[e] = field.elevation[a]; t.elev_b[e] = field.elevation[b];
            t.n_a[e] = field.manning[a]; t.n_b[e] = field.manning[b];
            t.inv_s_a[e] = 1.0 / field.area[a]; t.inv_s_b[e] = 1.0 / field.area[b];
            t.role[e] = static_cast<uint8_t>(layout.edge_role[e]);
            t.constant[e] = layout.edge_constant[e];
            t.group[e] = layout.group_of_edge(static_cast<int>(e));
        }
        return t;
    }
};

/**
 * Per-evaluation edge quantities: the raw signed flux (oriented a -> b), its
 * depth-derivatives, and the edge multiplier under the current z. Computed
 * once per right-hand-side evaluation and shared between the state equation
 * and the sensitivity equation.
 */
struct EdgeFluxCache {
    std::vector<double> a;       // raw flux [m^3/s]
    std::vector<double> da_ha;   // d a / d h(cell_a)
    std::vector<double> da_hb;   // d a / d h(cell_b)
    std::vector<double> mult;    // edge multiplier (latent value or constant)

    void resize(size_t m) {
        a.resize(m); da_ha.resize(m); da_hb.resize(m); mult.resize(m);
    }
};

/**
 * Evaluates every edge flux once. Throws SimulationError naming the edge
 * when a non-finite flux appears.
 */
inline void compute_edge_fluxes(const EdgeTable& et, std::span<const double> h,
                                std::span<const double> z, double dx, const FluxParams& params,
                                EdgeFluxCache& cache, double t_diag = 0.0) {
    cache.resize(et.size());
    for (size_t e = 0; e < et.size(); ++e) {
        const auto r = edge_flux_full(h[et.cell_a[e]], h[et.cell_b[e]], et.elev_a[e], et.elev_b[e],
                                      et.n_a[e], et.n_b[e], dx, params);
        if (!std::isfinite(r.a))
            throw SimulationError("non-finite flux on edge between cells " +
                                  std::to_string(et.cell_a[e]) + " and " +
                                  std::to_string(et.cell_b[e]) + " at t=" + std::to_string(t_diag));
        cache.a[e] = r.a;
        cache.da_ha[e] = r.da_hi;
        cache.da_hb[e] = r.da_hj;
        switch (static_cast<EdgeRole>(et.role[e])) {
            case EdgeRole::Implicit: cache.mult[e] = 1.0; break;
            case EdgeRole::Constant: cache.mult[e] = et.constant[e]; break;
            case EdgeRole::Latent:   cache.mult[e] = z[et.group[e]]; break;
        }
    }
}

/**
 * The cell-field flow model: water-depth dynamics driven by the upwind
 * Manning flux with per-edge latent multipliers, uniform rainfall, and the
 * infiltration / boundary-inflow hooks. Holds references; the field, layout
 * and forcing must outlive the model.
 */
class ForwardModel {
public:
    ForwardModel(const CellField& field, const LatentLayout& layout, const ForcingSpec& forcing,
                 FluxParams params = {})
        : field_(field), layout_(layout), forcing_(forcing), params_(params),
          table_(EdgeTable::build(field, layout)) {
        if (params_.edge_width <= 0.0) params_.edge_width = field.spacing;
        if (params_.cell_area <= 0.0) params_.cell_area = field.spacing * field.spacing;
    }

    const CellField& field() const { return field_; }
    const LatentLayout& layout() const { return layout_; }
    const ForcingSpec& forcing() const { return forcing_; }
    const FluxParams& flux_params() const { return params_; }
    const EdgeTable& edge_table() const { return table_; }

    /// dh/dt given depths and the free latent vector z (one value per group).
    /// Each edge is evaluated once and scattered with opposite signs.
    void rhs(double t, std::span<const double> h, std::span<const double> z,
             std::span<double> dhdt, EdgeFluxCache* cache_out = nullptr) const {
        EdgeFluxCache local;
        EdgeFluxCache& cache = cache_out ? *cache_out : local;
        compute_edge_fluxes(table_, h, z, field_.spacing, params_, cache, t);
        apply_rhs(t, h, cache, dhdt);
    }

    /// Same as rhs() but reusing an already computed flux cache.
    void apply_rhs(double t, std::span<const double> h, const EdgeFluxCache& cache,
                   std::span<double> dhdt) const {
        const double rain = forcing_.rain_at(t);
        const int n = field_.cell_count();
        for (int i = 0; i < n; ++i) {
            double s = rain - forcing_.infiltration.rate(h[i]);
            if (!forcing_.inflow.empty()) s += forcing_.inflow.rate(i, t);
            dhdt[i] = s;
        }
        for (size_t e = 0; e < table_.size(); ++e) {
            const double flow = cache.mult[e] * cache.a[e];
            dhdt[table_.cell_a[e]] -= flow * table_.inv_s_a[e];
            dhdt[table_.cell_b[e]] += flow * table_.inv_s_b[e];
        }
    }

    /// Diagonal of d(rhs)/dh contributed by the non-flux source terms.
    double source_jacobian(double t, double h_i) const {
        (void)t;
        return -forcing_.infiltration.rate_ddepth(h_i);  // inflow is depth-independent
    }

private:
    const CellField& field_;
    const LatentLayout& layout_;
    const ForcingSpec& forcing_;
    FluxParams params_;
    EdgeTable table_;
};

// ============================================================================
// Forward simulation
// ============================================================================

struct VolumeBalance {
    double initial_volume = 0.0;  // [m^3]
    double final_volume = 0.0;
    double rain_volume = 0.0;
    double residual = 0.0;        // final - initial - rain
    double relative = 0.0;        // residual / rain (0 when no rain)
    bool has_sinks = false;       // infiltration or inflow active; residual not a closure check
};

inline double stored_volume(const CellField& field, std::span<const double> h) {
    double v = 0.0;
    for (int i = 0; i < field.cell_count(); ++i) v += field.area[i] * h[i];
    return v;
}

/// Closure check over a run that started dry (or with the given stored
/// volume) at t_start; the last trajectory sample is the end of the audit.
inline VolumeBalance volume_balance(const CellField& field, const ForcingSpec& forcing,
                                    const Trajectory& traj, double t_start = 0.0,
                                    double initial_volume = 0.0) {
    VolumeBalance vb;
    if (traj.states.empty()) return vb;
    vb.initial_volume = initial_volume;
    vb.final_volume = stored_volume(field, traj.states.back());
    const double depth =
        forcing.rainfall.cumulative(traj.times.back()) - forcing.rainfall.cumulative(t_start);
    double area = 0.0;
    for (int i = 0; i < field.cell_count(); ++i) area += field.area[i];
    vb.rain_volume = depth * area;
    vb.residual = vb.final_volume - vb.initial_volume - vb.rain_volume;
    vb.relative = vb.rain_volume > 0.0 ? vb.residual / vb.rain_volume : 0.0;
    vb.has_sinks = forcing.infiltration.kind != InfiltrationSpec::Kind::None || !forcing.inflow.empty();
    return vb;
}

/**
 * Forward solve from zero (or given) initial depths, sampled at the
 * requested times.
 */
inline Trajectory simulate(const ForwardModel& model, std::span<const double> z, double t0,
                           double t1, const std::vector<double>& sample_times,
                           const IntegratorConfig& cfg, std::vector<double> h0 = {}) {
    if (h0.empty()) h0.assign(model.field().cell_count(), 0.0);
    auto rhs = [&](double t, std::span<const double> h, std::span<double> dh) {
        model.rhs(t, h, z, dh);
    };
    return integrate(rhs, std::move(h0), t0, t1, sample_times, cfg);
}

}  // namespace floodcal
