#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "floodcal/grid.hpp"

namespace floodcal {

enum class EdgeRole : uint8_t {
    Implicit,  // unlisted adjacent edge, multiplier 1
    Constant,  // pinned multiplier (0 encodes a wall)
    Latent,    // carries a free latent variable
};

/**
 * Placement of latent multipliers on raster edges.
 *
 * Each latent variable k sits on one edge; latents are partitioned into
 * sharing groups and the free parameter vector z has one entry per group
 * (ω = group_count). Edges can instead carry a pinned constant; every other
 * adjacent edge is an implicit constant 1. The symmetric latent matrix is
 * never materialized - edges are stored once as unordered pairs and
 * direction-dependent quantities are derived at evaluation time.
 */
struct LatentLayout {
    std::vector<CellField::Edge> latent_edges;  // latent id -> edge
    std::vector<int> group_of_latent;           // latent id -> group in [0, group_count)
    int group_count = 0;

    std::vector<std::pair<CellField::Edge, double>> constant_edges;

    // Per field-edge classification, aligned with CellField::edges.
    std::vector<EdgeRole> edge_role;
    std::vector<double> edge_constant;  // Constant edges; Implicit reads as 1
    std::vector<int> edge_latent;       // Latent edges, else -1

    int latent_count() const { return static_cast<int>(latent_edges.size()); }

    int group_of_edge(int e) const {
        const int k = edge_latent[e];
        return k < 0 ? -1 : group_of_latent[k];
    }

    /// Edge multiplier under the free parameter vector z (one value per group).
    double multiplier(int e, std::span<const double> z) const {
        switch (edge_role[e]) {
            case EdgeRole::Implicit: return 1.0;
            case EdgeRole::Constant: return edge_constant[e];
            case EdgeRole::Latent:   return z[group_of_latent[edge_latent[e]]];
        }
        return 1.0;
    }

    /// Entry of the symmetric latent matrix for a cell pair, per the implicit
    /// convention: assigned multiplier on adjacent edges, 1 elsewhere.
    double z_entry(const CellField& field, int i, int j, std::span<const double> z) const {
        const int e = field.edge_between(i, j);
        if (e < 0) return 1.0;
        return multiplier(e, z);
    }
};

namespace detail {

inline CellField::Edge canonical(CellField::Edge e) {
    if (e.a > e.b) std::swap(e.a, e.b);
    return e;
}

inline int require_edge(const CellField& field, CellField::Edge e, const char* what) {
    const int idx = field.edge_between(e.a, e.b);
    if (idx < 0)
        throw std::invalid_argument(std::string(what) + ": cells " + std::to_string(e.a) + "," +
                                    std::to_string(e.b) + " are not adjacent");
    return idx;
}

}  // namespace detail

/**
 * Assigns latent variables and constants onto edges of a field.
 *
 * `ordered_latent_edges` fixes the latent numbering (index in the vector is
 * the latent id). `group_of_latent` maps each latent into a sharing group;
 * pass an empty vector for independent latents (singleton groups, ω equal to
 * the latent count). Group ids must be exactly 0..ω-1 with no empty group.
 * Constants (e.g. walls with value 0) never enter the free vector.
 */
inline LatentLayout assign_latents(const CellField& field,
                                   const std::vector<CellField::Edge>& ordered_latent_edges,
                                   std::vector<int> group_of_latent,
                                   const std::vector<std::pair<CellField::Edge, double>>& constants = {}) {
    LatentLayout L;
    L.edge_role.assign(field.edges.size(), EdgeRole::Implicit);
    L.edge_constant.assign(field.edges.size(), 1.0);
    L.edge_latent.assign(field.edges.size(), -1);

    if (group_of_latent.empty()) {
        group_of_latent.resize(ordered_latent_edges.size());
        for (size_t k = 0; k < group_of_latent.size(); ++k) group_of_latent[k] = static_cast<int>(k);
    }
    if (group_of_latent.size() != ordered_latent_edges.size())
        throw std::invalid_argument("assign_latents: sharing spec size " +
                                    std::to_string(group_of_latent.size()) + " != latent count " +
                                    std::to_string(ordered_latent_edges.size()));

    int max_group = -1;
    for (int g : group_of_latent) {
        if (g < 0) throw std::invalid_argument("assign_latents: negative group index");
        max_group = std::max(max_group, g);
    }
    L.group_count = max_group + 1;
    std::vector<int> group_size(L.group_count, 0);
    for (int g : group_of_latent) ++group_size[g];
    for (int s = 0; s < L.group_count; ++s)
        if (group_size[s] == 0)
            throw std::invalid_argument("assign_latents: sharing group " + std::to_string(s) + " is empty");

    for (size_t k = 0; k < ordered_latent_edges.size(); ++k) {
        const auto e = detail::canonical(ordered_latent_edges[k]);
        const int idx = detail::require_edge(field, e, "assign_latents");
        if (L.edge_role[idx] != EdgeRole::Implicit)
            throw std::invalid_argument("assign_latents: edge " + std::to_string(e.a) + "," +
                                        std::to_string(e.b) + " assigned twice");
        L.edge_role[idx] = EdgeRole::Latent;
        L.edge_latent[idx] = static_cast<int>(k);
        L.latent_edges.push_back(e);
    }
    L.group_of_latent = std::move(group_of_latent);

    for (const auto& [edge, value] : constants) {
        const auto e = detail::canonical(edge);
        const int idx = detail::require_edge(field, e, "assign_latents");
        if (L.edge_role[idx] == EdgeRole::Latent)
            throw std::invalid_argument("assign_latents: edge " + std::to_string(e.a) + "," +
                                        std::to_string(e.b) + " is both latent and constant");
        if (L.edge_role[idx] == EdgeRole::Constant && L.edge_constant[idx] != value)
            throw std::invalid_argument("assign_latents: conflicting constants on edge " +
                                        std::to_string(e.a) + "," + std::to_string(e.b));
        L.edge_role[idx] = EdgeRole::Constant;
        L.edge_constant[idx] = value;
        L.constant_edges.push_back({e, value});
    }
    return L;
}

/**
 * Sparse incidence of cells on latent groups: for each group, every member
 * edge with its endpoints; for each cell, the (group, edge) pairs touching
 * it. With sharing, one cell may meet several edges of the same group and
 * all of them are kept - the sensitivity source term sums the flux over
 * every incident group edge.
 */
struct IncidenceStructure {
    struct GroupEdge {
        int a = -1;        // active cell indices, a < b
        int b = -1;
        int latent = -1;   // latent id
        int field_edge = -1;
    };
    std::vector<std::vector<GroupEdge>> group_edges;  // [group]

    // CSR rows over cells: (group, field_edge) per incidence.
    std::vector<int> cell_offsets;
    std::vector<std::pair<int, int>> cell_entries;

    std::span<const std::pair<int, int>> row(int cell) const {
        return {cell_entries.data() + cell_offsets[cell],
                static_cast<size_t>(cell_offsets[cell + 1] - cell_offsets[cell])};
    }

    /// E_is indicator: 1 when some edge of cell i carries a group-s latent.
    bool incident(int cell, int group) const {
        for (const auto& [g, e] : row(cell))
            if (g == group) return true;
        return false;
    }
};

inline IncidenceStructure build_incidence(const CellField& field, const LatentLayout& layout) {
    IncidenceStructure inc;
    inc.group_edges.assign(layout.group_count, {});

    std::vector<std::vector<std::pair<int, int>>> rows(field.cell_count());
    for (int k = 0; k < layout.latent_count(); ++k) {
        const auto e = layout.latent_edges[k];
        const int g = layout.group_of_latent[k];
        const int fe = field.edge_between(e.a, e.b);
        inc.group_edges[g].push_back({e.a, e.b, k, fe});
        rows[e.a].push_back({g, fe});
        rows[e.b].push_back({g, fe});
    }

    inc.cell_offsets.assign(field.cell_count() + 1, 0);
    for (int i = 0; i < field.cell_count(); ++i)
        inc.cell_offsets[i + 1] = inc.cell_offsets[i] + static_cast<int>(rows[i].size());
    inc.cell_entries.reserve(inc.cell_offsets.back());
    for (auto& r : rows)
        for (auto& p : r) inc.cell_entries.push_back(p);
    return inc;
}

/**
 * Localization mask: per sharing group, the cells whose sensitivities are
 * propagated (domain) plus the one-ring outer boundary where the
 * sensitivity is pinned to zero. The domain is the union of axis-aligned
 * squares of side 2*halfwidth centered on each member edge's two cells,
 * clipped to the raster.
 */
struct LocalizationMask {
    struct GroupMask {
        std::vector<int> domain;    // active indices, sorted
        std::vector<int> boundary;  // active indices, sorted, disjoint from domain
    };
    std::vector<GroupMask> groups;
    int halfwidth = 0;

    size_t total_domain() const {
        size_t n = 0;
        for (const auto& g : groups) n += g.domain.size();
        return n;
    }
    size_t total_with_boundary() const {
        size_t n = 0;
        for (const auto& g : groups) n += g.domain.size() + g.boundary.size();
        return n;
    }
};

inline LocalizationMask build_localization(const CellField& field, const LatentLayout& layout,
                                           int halfwidth) {
    if (halfwidth < 1) throw std::invalid_argument("build_localization: halfwidth must be >= 1");

    LocalizationMask mask;
    mask.halfwidth = halfwidth;
    mask.groups.resize(layout.group_count);

    std::vector<uint8_t> in_domain(field.cell_count());
    for (int s = 0; s < layout.group_count; ++s) {
        std::fill(in_domain.begin(), in_domain.end(), 0);
        auto stamp = [&](int cell) {
            const int r0 = field.row_of(cell), c0 = field.col_of(cell);
            const int rlo = std::max(0, r0 - halfwidth), rhi = std::min(field.rows - 1, r0 + halfwidth - 1);
            const int clo = std::max(0, c0 - halfwidth), chi = std::min(field.cols - 1, c0 + halfwidth - 1);
            for (int r = rlo; r <= rhi; ++r)
                for (int c = clo; c <= chi; ++c) {
                    const int a = field.active_at(r, c);
                    if (a >= 0) in_domain[a] = 1;
                }
        };
        for (int k = 0; k < layout.latent_count(); ++k) {
            if (layout.group_of_latent[k] != s) continue;
            stamp(layout.latent_edges[k].a);
            stamp(layout.latent_edges[k].b);
        }

        auto& gm = mask.groups[s];
        for (int i = 0; i < field.cell_count(); ++i)
            if (in_domain[i]) gm.domain.push_back(i);
        // one-ring outer boundary: cells outside the domain adjacent to it
        std::unordered_set<int> ring;
        for (int i : gm.domain)
            for (int q = 0; q < field.neighbor_count[i]; ++q) {
                const int j = field.neighbors[i][q];
                if (!in_domain[j]) ring.insert(j);
            }
        gm.boundary.assign(ring.begin(), ring.end());
        std::sort(gm.boundary.begin(), gm.boundary.end());
    }
    return mask;
}

/// A mask whose every group covers the whole field (localization disabled).
inline LocalizationMask full_field_mask(const CellField& field, const LatentLayout& layout) {
    LocalizationMask mask;
    mask.halfwidth = 0;
    mask.groups.resize(layout.group_count);
    std::vector<int> all(field.cell_count());
    for (int i = 0; i < field.cell_count(); ++i) all[i] = i;
    for (auto& g : mask.groups) g.domain = all;
    return mask;
}

}  // namespace floodcal
