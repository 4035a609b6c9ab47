/**
 * Cell field construction, DEM ingestion, latent placement, incidence and
 * localization masks.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "floodcal/grid.hpp"
#include "floodcal/latents.hpp"
#include "floodcal/scenario.hpp"

using namespace floodcal;

namespace {

CellField case1_field() {
    const Scenario s = builtin_case1();
    return build_scenario(s).field;
}

}  // namespace

// ============================================================================
// build_grid
// ============================================================================

TEST(Grid, Case1FieldLayout) {
    const CellField f = case1_field();
    ASSERT_EQ(f.cell_count(), 900);
    EXPECT_DOUBLE_EQ(f.spacing, 10.0);
    // regions 1 & 4 at 1 m, regions 2 & 3 at 0.8 m
    EXPECT_DOUBLE_EQ(f.elevation[f.active_at(3, 3)], 1.0);
    EXPECT_DOUBLE_EQ(f.elevation[f.active_at(3, 20)], 0.8);
    EXPECT_DOUBLE_EQ(f.elevation[f.active_at(20, 3)], 0.8);
    EXPECT_DOUBLE_EQ(f.elevation[f.active_at(20, 20)], 1.0);
    for (int i = 0; i < f.cell_count(); ++i) {
        EXPECT_DOUBLE_EQ(f.manning[i], 0.02);
        EXPECT_DOUBLE_EQ(f.area[i], 100.0);
    }
    // interior cells have 4 neighbors, corners 2, edges 3
    EXPECT_EQ(f.neighbor_count[f.active_at(10, 10)], 4);
    EXPECT_EQ(f.neighbor_count[f.active_at(0, 0)], 2);
    EXPECT_EQ(f.neighbor_count[f.active_at(0, 10)], 3);
}

TEST(Grid, SingleCellHasNoNeighbors) {
    const auto f = build_grid(1, 1, 1.0, uniform_raster(1, 1, 0.0), uniform_raster(1, 1, 0.02));
    EXPECT_EQ(f.cell_count(), 1);
    EXPECT_EQ(f.neighbor_count[0], 0);
    EXPECT_TRUE(f.edges.empty());
}

TEST(Grid, TwoByTwoCornersHaveTwoNeighbors) {
    const auto f = build_grid(2, 2, 1.0, uniform_raster(2, 2, 0.0), uniform_raster(2, 2, 0.02));
    ASSERT_EQ(f.cell_count(), 4);
    for (int i = 0; i < 4; ++i) EXPECT_EQ(f.neighbor_count[i], 2);
    EXPECT_EQ(f.edges.size(), 4u);
}

TEST(Grid, SourceSizeMismatchRejected) {
    EXPECT_THROW(build_grid(3, 3, 1.0, uniform_raster(2, 2, 0.0), uniform_raster(3, 3, 0.02)),
                 std::invalid_argument);
    EXPECT_THROW(build_grid(3, 3, 1.0, uniform_raster(3, 3, 0.0), uniform_raster(2, 3, 0.02)),
                 std::invalid_argument);
    EXPECT_THROW(build_grid(0, 3, 1.0, uniform_raster(0, 3, 0.0), uniform_raster(0, 3, 0.02)),
                 std::invalid_argument);
}

TEST(Grid, AdjacencySymmetryExhaustive) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const int rows = 2 + static_cast<int>(rng() % 6);
        const int cols = 2 + static_cast<int>(rng() % 6);
        auto elev = uniform_raster(rows, cols, 0.0);
        // random inactive cells
        RasterGrid mask = elev;
        mask.valid.assign(static_cast<size_t>(rows) * cols, 1);
        for (auto& v : mask.valid) v = (rng() % 5) ? 1 : 0;
        const auto f = build_grid(rows, cols, 1.0, mask, uniform_raster(rows, cols, 0.02));
        for (int i = 0; i < f.cell_count(); ++i)
            for (int q = 0; q < f.neighbor_count[i]; ++q) {
                const int j = f.neighbors[i][q];
                ASSERT_GE(j, 0);
                ASSERT_LT(j, f.cell_count());
                bool back = false;
                for (int p = 0; p < f.neighbor_count[j]; ++p)
                    if (f.neighbors[j][p] == i) back = true;
                EXPECT_TRUE(back) << "asymmetric adjacency " << i << " -> " << j;
            }
    }
}

// ============================================================================
// load_dem_ascii
// ============================================================================

TEST(Dem, MinimalFile) {
    const auto g = load_dem_ascii("ncols 2\nnrows 2\nxllcorner 0\nyllcorner 0\ncellsize 10\n1 2\n3 4\n");
    EXPECT_EQ(g.rows, 2);
    EXPECT_EQ(g.cols, 2);
    EXPECT_DOUBLE_EQ(g.at(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(g.at(1, 1), 4.0);
    EXPECT_TRUE(g.is_valid(0, 1));
}

TEST(Dem, NodataFlagged) {
    const auto g = load_dem_ascii(
        "ncols 2\nnrows 2\ncellsize 1\nNODATA_value -9999\n1 -9999\n3 4\n");
    EXPECT_TRUE(g.is_valid(0, 0));
    EXPECT_FALSE(g.is_valid(0, 1));
    const auto f = build_grid(2, 2, 1.0, g, uniform_raster(2, 2, 0.02));
    EXPECT_EQ(f.cell_count(), 3);
    EXPECT_EQ(f.active_at(0, 1), -1);
}

TEST(Dem, CountMismatchRejected) {
    try {
        load_dem_ascii("ncols 2\nnrows 2\ncellsize 1\n1 2 3\n");
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("count"), std::string::npos);
    }
}

TEST(Dem, MalformedHeaderNamesLine) {
    try {
        load_dem_ascii("ncols 2\nwhatever 3\n");
        FAIL() << "expected rejection";
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
    }
}

TEST(Dem, FullScaleDimensions) {
    // Case-2 scale: 201 columns x 483 rows of 2 m cells = 97,083 cells
    std::string text = "ncols 201\nnrows 483\ncellsize 2\n";
    text.reserve(text.size() + 97083 * 2 + 483);
    for (int r = 0; r < 483; ++r) {
        for (int c = 0; c < 201; ++c) text += "1 ";
        text += '\n';
    }
    const auto g = load_dem_ascii(text);
    EXPECT_EQ(g.rows * g.cols, 97083);
}

// ============================================================================
// assign_latents / latent matrix
// ============================================================================

TEST(Latents, Case1NumberingAndCount) {
    const Scenario s = builtin_case1();
    const auto built = build_scenario(s);
    const auto& L = built.layout;
    ASSERT_EQ(L.latent_count(), 60);
    ASSERT_EQ(L.group_count, 60);
    // latent 0: top of the vertical line, cells (0,14)-(0,15)
    EXPECT_EQ(L.latent_edges[0].a, built.field.active_at(0, 14));
    EXPECT_EQ(L.latent_edges[0].b, built.field.active_at(0, 15));
    // latent 29: bottom of the vertical line
    EXPECT_EQ(L.latent_edges[29].a, built.field.active_at(29, 14));
    // latent 30: left end of the horizontal line, cells (14,0)-(15,0)
    EXPECT_EQ(L.latent_edges[30].a, built.field.active_at(14, 0));
    EXPECT_EQ(L.latent_edges[30].b, built.field.active_at(15, 0));
    // latent 59: right end
    EXPECT_EQ(L.latent_edges[59].b, built.field.active_at(15, 29));
}

TEST(Latents, SharedGroupCollapsesToOne) {
    const auto s = builtin_case2_twin("desk");
    const auto built = build_scenario(s);
    EXPECT_GT(built.layout.latent_count(), 100);
    EXPECT_EQ(built.layout.group_count, 1);
}

TEST(Latents, EmptySelectorGivesNoFreeParameters) {
    const auto f = build_grid(3, 3, 1.0, uniform_raster(3, 3, 0.0), uniform_raster(3, 3, 0.02));
    const auto L = assign_latents(f, {}, {}, {{{0, 1}, 0.0}});
    EXPECT_EQ(L.latent_count(), 0);
    EXPECT_EQ(L.group_count, 0);
    EXPECT_EQ(L.edge_role[f.edge_between(0, 1)], EdgeRole::Constant);
}

TEST(Latents, ConflictsRejected) {
    const auto f = build_grid(3, 3, 1.0, uniform_raster(3, 3, 0.0), uniform_raster(3, 3, 0.02));
    // same edge twice as latent
    EXPECT_THROW(assign_latents(f, {{0, 1}, {0, 1}}, {}), std::invalid_argument);
    // latent and constant on the same edge
    EXPECT_THROW(assign_latents(f, {{0, 1}}, {}, {{{0, 1}, 0.0}}), std::invalid_argument);
    // non-adjacent pair
    EXPECT_THROW(assign_latents(f, {{0, 8}}, {}), std::invalid_argument);
    // empty sharing group (group 1 unused)
    EXPECT_THROW(assign_latents(f, {{0, 1}, {1, 2}}, {0, 2}), std::invalid_argument);
}

TEST(Latents, ReconstructedMatrixSymmetricWithImplicitOnes) {
    const Scenario s = builtin_case1();
    const auto built = build_scenario(s);
    const auto z = built.truth_z;
    std::mt19937 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const int i = static_cast<int>(rng() % built.field.cell_count());
        const int j = static_cast<int>(rng() % built.field.cell_count());
        const double zij = built.layout.z_entry(built.field, i, j, z);
        const double zji = built.layout.z_entry(built.field, j, i, z);
        EXPECT_DOUBLE_EQ(zij, zji);
        if (built.field.edge_between(i, j) < 0) EXPECT_DOUBLE_EQ(zij, 1.0);
    }
    // unassigned adjacent edge reads 1
    const int a = built.field.active_at(3, 3), b = built.field.active_at(3, 4);
    EXPECT_DOUBLE_EQ(built.layout.z_entry(built.field, a, b, z), 1.0);
    // wall edge reads its truth value 0
    const auto wall = built.layout.latent_edges[20];
    EXPECT_DOUBLE_EQ(built.layout.z_entry(built.field, wall.a, wall.b, z), 0.0);
}

// ============================================================================
// build_incidence
// ============================================================================

TEST(Incidence, Case1SingleEntryRow) {
    const Scenario s = builtin_case1();
    const auto built = build_scenario(s);
    const auto inc = build_incidence(built.field, built.layout);
    // the cell left of latent 7 touches exactly that one latent
    const int cell = built.field.active_at(7, 14);
    const auto row = inc.row(cell);
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(row[0].first, 7);
    EXPECT_TRUE(inc.incident(cell, 7));
    EXPECT_FALSE(inc.incident(cell, 8));
}

TEST(Incidence, SharedRoadCellListsAllItsEdges) {
    // 3x3 patch, road cells forming a T: center cell meets 3 road edges
    const auto f = build_grid(3, 3, 1.0, uniform_raster(3, 3, 0.0), uniform_raster(3, 3, 0.02));
    std::vector<uint8_t> road(9, 0);
    road[1] = road[3] = road[4] = road[5] = 1;  // top center + middle row
    std::vector<CellField::Edge> edges;
    for (const auto& e : f.edges)
        if (road[f.full_of_active[e.a]] && road[f.full_of_active[e.b]]) edges.push_back(e);
    ASSERT_EQ(edges.size(), 3u);
    const auto L = assign_latents(f, edges, std::vector<int>(edges.size(), 0));
    const auto inc = build_incidence(f, L);
    EXPECT_EQ(inc.group_edges[0].size(), 3u);
    const int center = f.active_at(1, 1);
    EXPECT_EQ(inc.row(center).size(), 3u);  // all three edges, same group, all kept
}

TEST(Incidence, CellWithoutLatentEdgesHasEmptyRow) {
    const Scenario s = builtin_case1();
    const auto built = build_scenario(s);
    const auto inc = build_incidence(built.field, built.layout);
    EXPECT_EQ(inc.row(built.field.active_at(3, 3)).size(), 0u);
}

TEST(Incidence, GroupSetsMatchIncidentCells) {
    const Scenario s = builtin_case1();
    const auto built = build_scenario(s);
    const auto inc = build_incidence(built.field, built.layout);
    for (int g = 0; g < built.layout.group_count; ++g) {
        std::set<int> from_edges;
        for (const auto& ge : inc.group_edges[g]) {
            from_edges.insert(ge.a);
            from_edges.insert(ge.b);
        }
        std::set<int> from_rows;
        for (int i = 0; i < built.field.cell_count(); ++i)
            if (inc.incident(i, g)) from_rows.insert(i);
        EXPECT_EQ(from_edges, from_rows);
    }
}

// ============================================================================
// build_localization
// ============================================================================

TEST(Localization, WholeRasterMaskHasEmptyBoundary) {
    const Scenario s = builtin_case1();
    const auto built = build_scenario(s);
    const auto mask = build_localization(built.field, built.layout, 40);  // covers everything
    for (const auto& g : mask.groups) {
        EXPECT_EQ(g.domain.size(), 900u);
        EXPECT_TRUE(g.boundary.empty());
    }
}

TEST(Localization, SingleEdgeSideFourBlock) {
    // one horizontal-pair edge at (10,10)-(10,11) on a 30x30 field, side 4:
    // union of two 4x4 squares = rows 8..11 x cols 8..12 (20 cells),
    // one-ring boundary of the 4x5 rectangle = 18 cells
    const auto f = build_grid(30, 30, 10.0, uniform_raster(30, 30, 0.0),
                              uniform_raster(30, 30, 0.02));
    const CellField::Edge e{f.active_at(10, 10), f.active_at(10, 11)};
    const auto L = assign_latents(f, {e}, {});
    const auto mask = build_localization(f, L, 2);
    ASSERT_EQ(mask.groups.size(), 1u);
    EXPECT_EQ(mask.groups[0].domain.size(), 20u);
    EXPECT_EQ(mask.groups[0].boundary.size(), 18u);
    for (int r = 8; r <= 11; ++r)
        for (int c = 8; c <= 12; ++c) {
            const int a = f.active_at(r, c);
            EXPECT_TRUE(std::binary_search(mask.groups[0].domain.begin(),
                                           mask.groups[0].domain.end(), a));
        }
}

TEST(Localization, DomainCoversLatentEdgesBoundaryDisjoint) {
    const auto s = builtin_case2_twin("desk");
    const auto built = build_scenario(s);
    const auto mask = build_localization(built.field, built.layout, 4);
    ASSERT_EQ(mask.groups.size(), 1u);
    const auto& g = mask.groups[0];
    for (int k = 0; k < built.layout.latent_count(); ++k) {
        EXPECT_TRUE(std::binary_search(g.domain.begin(), g.domain.end(),
                                       built.layout.latent_edges[k].a));
        EXPECT_TRUE(std::binary_search(g.domain.begin(), g.domain.end(),
                                       built.layout.latent_edges[k].b));
    }
    std::vector<int> inter;
    std::set_intersection(g.domain.begin(), g.domain.end(), g.boundary.begin(), g.boundary.end(),
                          std::back_inserter(inter));
    EXPECT_TRUE(inter.empty());
    // every boundary cell is adjacent to the domain
    for (int b : g.boundary) {
        bool touches = false;
        for (int q = 0; q < built.field.neighbor_count[b]; ++q)
            if (std::binary_search(g.domain.begin(), g.domain.end(), built.field.neighbors[b][q]))
                touches = true;
        EXPECT_TRUE(touches);
    }
}

TEST(Localization, HalfwidthBelowOneRejected) {
    const auto f = build_grid(3, 3, 1.0, uniform_raster(3, 3, 0.0), uniform_raster(3, 3, 0.02));
    const auto L = assign_latents(f, {{0, 1}}, {});
    EXPECT_THROW(build_localization(f, L, 0), std::invalid_argument);
}
