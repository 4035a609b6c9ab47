#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace floodcal {

/**
 * A full-raster scalar field (row-major, row 0 at the north edge) with an
 * optional validity mask. Serves as the elevation / Manning source handed
 * to build_grid; invalid cells (DEM NODATA) are dropped from the active
 * cell set.
 */
struct RasterGrid {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;   // rows*cols, row-major
    std::vector<uint8_t> valid;   // empty means "all valid"

    bool is_valid(int r, int c) const {
        if (valid.empty()) return true;
        return valid[static_cast<size_t>(r) * cols + c] != 0;
    }
    double at(int r, int c) const { return values[static_cast<size_t>(r) * cols + c]; }
};

inline RasterGrid uniform_raster(int rows, int cols, double value) {
    RasterGrid g;
    g.rows = rows;
    g.cols = cols;
    g.values.assign(static_cast<size_t>(rows) * cols, value);
    return g;
}

/**
 * The cell field: a 4-connected raster of active cells with elevation,
 * area, and Manning roughness. Cells excluded by a NODATA mask are removed
 * from the active index set and adjacency is built over active cells only,
 * so state vectors stay dense. The raster boundary is closed (no flux off
 * the edge); border cells simply have fewer neighbors.
 *
 * Two index spaces exist: "full" raster ids (row*cols+col, used by every
 * external interface) and "active" indices (0..cell_count-1, used by all
 * state vectors). active_of_full / full_of_active translate.
 */
struct CellField {
    struct Edge {
        int a = -1;  // active index, a < b
        int b = -1;
        friend bool operator==(const Edge&, const Edge&) = default;
    };

    int rows = 0;
    int cols = 0;
    double spacing = 0.0;          // distance between adjacent cell centers [m]

    std::vector<double> elevation; // per active cell [m]
    std::vector<double> area;      // per active cell [m^2]
    std::vector<double> manning;   // per active cell [s/m^(1/3)]

    std::vector<std::array<int, 4>> neighbors;  // active indices, -1 padded
    std::vector<std::array<int, 4>> neighbor_edge;  // edge index per neighbor slot
    std::vector<int> neighbor_count;
    std::vector<Edge> edges;       // each adjacency pair once, a < b

    std::vector<int> active_of_full;  // full id -> active index or -1
    std::vector<int> full_of_active;  // active index -> full id

    int cell_count() const { return static_cast<int>(full_of_active.size()); }
    int full_count() const { return rows * cols; }

    int active_at(int r, int c) const { return active_of_full[static_cast<size_t>(r) * cols + c]; }
    int row_of(int active) const { return full_of_active[active] / cols; }
    int col_of(int active) const { return full_of_active[active] % cols; }

    /// Canonical edge between two active cells, or -1 if not adjacent.
    int edge_between(int i, int j) const {
        for (int q = 0; q < neighbor_count[i]; ++q)
            if (neighbors[i][q] == j) return neighbor_edge[i][q];
        return -1;
    }
};

/**
 * Builds the cell field from full-raster elevation and Manning sources.
 * Throws std::invalid_argument when the source dimensions do not match the
 * requested raster (message carries the cell counts).
 */
inline CellField build_grid(int rows, int cols, double spacing,
                            const RasterGrid& elevation_src,
                            const RasterGrid& manning_src) {
    if (rows <= 0 || cols <= 0)
        throw std::invalid_argument("build_grid: raster dimensions must be positive");
    if (spacing <= 0.0)
        throw std::invalid_argument("build_grid: spacing must be positive");
    const size_t n_full = static_cast<size_t>(rows) * cols;
    if (elevation_src.values.size() != n_full)
        throw std::invalid_argument("build_grid: elevation source covers " +
                                    std::to_string(elevation_src.values.size()) +
                                    " cells, raster has " + std::to_string(n_full));
    if (manning_src.values.size() != n_full)
        throw std::invalid_argument("build_grid: manning source covers " +
                                    std::to_string(manning_src.values.size()) +
                                    " cells, raster has " + std::to_string(n_full));

    CellField f;
    f.rows = rows;
    f.cols = cols;
    f.spacing = spacing;
    f.active_of_full.assign(n_full, -1);

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (!elevation_src.is_valid(r, c) || !manning_src.is_valid(r, c)) continue;
            const int full = r * cols + c;
            f.active_of_full[full] = static_cast<int>(f.full_of_active.size());
            f.full_of_active.push_back(full);
            f.elevation.push_back(elevation_src.at(r, c));
            f.area.push_back(spacing * spacing);
            const double n = manning_src.at(r, c);
            if (n <= 0.0)
                throw std::invalid_argument("build_grid: manning must be positive at cell " +
                                            std::to_string(full));
            f.manning.push_back(n);
        }
    }

    const int n_active = f.cell_count();
    f.neighbors.assign(n_active, {-1, -1, -1, -1});
    f.neighbor_edge.assign(n_active, {-1, -1, -1, -1});
    f.neighbor_count.assign(n_active, 0);

    auto link = [&](int i, int j) {
        const int e = static_cast<int>(f.edges.size());
        f.neighbor_edge[i][f.neighbor_count[i]] = e;
        f.neighbor_edge[j][f.neighbor_count[j]] = e;
        f.neighbors[i][f.neighbor_count[i]++] = j;
        f.neighbors[j][f.neighbor_count[j]++] = i;
        f.edges.push_back({i, j});
    };

    // 4-connectivity; each pair recorded once (right and down sweeps).
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const int i = f.active_of_full[r * cols + c];
            if (i < 0) continue;
            if (c + 1 < cols) {
                const int j = f.active_of_full[r * cols + c + 1];
                if (j >= 0) link(i, j);
            }
            if (r + 1 < rows) {
                const int j = f.active_of_full[(r + 1) * cols + c];
                if (j >= 0) link(i, j);
            }
        }
    }
    return f;
}

// ============================================================================
// ESRI ASCII grid ingestion
// ============================================================================

/**
 * Parses an ESRI ASCII grid (.asc): ncols/nrows/xllcorner/yllcorner/cellsize
 * header, optional NODATA_value, then nrows*ncols row-major values (row 0 =
 * north). NODATA cells are flagged invalid. Malformed headers or a value
 * count mismatch are rejected with the offending line named.
 */
inline RasterGrid load_dem_ascii(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;

    long ncols = -1, nrows = -1;
    double cellsize = 0.0, nodata = 0.0;
    bool has_nodata = false;
    // xllcorner / yllcorner are accepted and ignored (local coordinates).

    auto fail = [&](const std::string& what) -> RasterGrid {
        throw std::invalid_argument("load_dem_ascii: " + what + " at line " +
                                    std::to_string(line_no) + (line.empty() ? "" : ": \"" + line + "\""));
    };

    std::vector<double> values;
    bool in_header = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank line

        if (in_header && std::isalpha(static_cast<unsigned char>(first[0]))) {
            std::string key;
            key.reserve(first.size());
            for (char ch : first) key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
            double v;
            if (!(ls >> v)) fail("header entry '" + key + "' has no value");
            if (key == "ncols") ncols = static_cast<long>(v);
            else if (key == "nrows") nrows = static_cast<long>(v);
            else if (key == "xllcorner" || key == "yllcorner") { /* ignored */ }
            else if (key == "cellsize") cellsize = v;
            else if (key == "nodata_value") { nodata = v; has_nodata = true; }
            else fail("unknown header key '" + key + "'");
            continue;
        }

        in_header = false;
        if (ncols <= 0 || nrows <= 0) fail("data before complete ncols/nrows header");
        // re-parse the whole line as numbers (first token included)
        std::istringstream ds(line);
        double v;
        while (ds >> v) values.push_back(v);
        if (!ds.eof()) fail("non-numeric value");
    }

    if (ncols <= 0 || nrows <= 0) {
        line.clear();
        fail("missing ncols/nrows header");
    }
    const size_t expected = static_cast<size_t>(ncols) * static_cast<size_t>(nrows);
    if (values.size() != expected) {
        line.clear();
        throw std::invalid_argument("load_dem_ascii: value count " + std::to_string(values.size()) +
                                    " does not match ncols*nrows = " + std::to_string(expected));
    }

    RasterGrid g;
    g.rows = static_cast<int>(nrows);
    g.cols = static_cast<int>(ncols);
    g.values = std::move(values);
    if (has_nodata) {
        g.valid.assign(expected, 1);
        for (size_t i = 0; i < expected; ++i)
            if (g.values[i] == nodata) g.valid[i] = 0;
    }
    (void)cellsize;  // recorded by the caller's scenario, not by the raster
    return g;
}

}  // namespace floodcal
