#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "floodcal/calibration.hpp"
#include "floodcal/forward_model.hpp"
#include "floodcal/grid.hpp"
#include "floodcal/latents.hpp"

namespace floodcal {

using nlohmann::json;

// ============================================================================
// Scenario sections (declarative, JSON-serializable, order-independent)
// ============================================================================

struct HyetographSpec {
    std::string kind = "uniform";  // "uniform" | "chicago"
    double depth_mm = 0.0;
    double duration_s = 0.0;
    double r = 0.5;
    double idf_a = 3600.0, idf_b = 10.0, idf_n = 0.8;

    friend bool operator==(const HyetographSpec&, const HyetographSpec&) = default;

    Hyetograph build() const {
        if (kind == "uniform") return uniform_hyetograph(depth_mm * 1e-3, duration_s);
        if (kind == "chicago")
            return chicago_hyetograph(depth_mm * 1e-3, duration_s, r, idf_a, idf_b, idf_n);
        throw std::invalid_argument("unknown hyetograph kind '" + kind + "'");
    }
};

struct RegionBox {
    int r0 = 0, r1 = 0, c0 = 0, c1 = 0;  // inclusive cell bounds
    double value = 0.0;
    friend bool operator==(const RegionBox&, const RegionBox&) = default;
};

struct RoadStrip {
    std::string axis;  // "h" (rows) | "v" (cols)
    int start = 0;
    int width = 0;
    friend bool operator==(const RoadStrip&, const RoadStrip&) = default;
};

struct GridSection {
    int rows = 0, cols = 0;
    double spacing = 0.0;
    double base_elevation = 0.0;
    double col_tilt = 0.0;  // elevation += col_tilt * spacing * col
    double row_tilt = 0.0;  // elevation += row_tilt * spacing * row
    std::vector<RegionBox> regions;
    std::string dem_path;       // overrides the procedural elevation
    double manning = 0.02;
    std::vector<RoadStrip> roads;
    std::string road_mask_path;  // alternative road source (raster of 0/1)
    double road_depression = 0.0;
    friend bool operator==(const GridSection&, const GridSection&) = default;
};

struct LatentSection {
    std::vector<std::string> selectors;  // "vline ...", "hline ...", "region-boundary", "road-edges"
    bool share_all = false;              // one sharing group over every selected edge
    std::vector<double> truth;           // per group; empty when unknown
    double prior = 1.0;
    friend bool operator==(const LatentSection&, const LatentSection&) = default;
};

struct SchemeSection {
    std::string name;
    std::vector<std::string> points;  // names into Scenario::points
    double interval_s = 0.0;          // observation clock; ignored when times given
    std::vector<double> times;        // explicit observation times
    double prior = -1.0;              // per-scheme prior override; -1 = use latents.prior
    friend bool operator==(const SchemeSection&, const SchemeSection&) = default;
};

struct CalibrationSection {
    std::string optimizer = "adagrad";  // "adagrad" | "rmsprop"
    double learning_rate = 0.2;
    int epochs = 40;
    double gamma = 1e-3;
    double convergence_rel_loss = 0.0;
    int tail_begin = 30, tail_end = 40;
    friend bool operator==(const CalibrationSection&, const CalibrationSection&) = default;
};

struct IntegratorSection {
    double rtol = 1e-6;
    double atol = 1e-9;
    double atol_sens = 1e-9;
    double h_init = 0.1;
    double h_max = 60.0;
    friend bool operator==(const IntegratorSection&, const IntegratorSection&) = default;
};

struct FluxSection {
    double slope_regularization = 1e-4;
    std::string convention = "dimensional";  // "dimensional" | "paper-literal"
    friend bool operator==(const FluxSection&, const FluxSection&) = default;
};

struct LocalizationSection {
    bool enabled = false;
    int halfwidth = 0;
    friend bool operator==(const LocalizationSection&, const LocalizationSection&) = default;
};

/**
 * A complete experiment description: grid, latent placement with truth and
 * prior values, rainfall menu, named observation points, observation
 * schemes, and the solver / calibration settings. Everything is declarative
 * so a scenario serializes to a human-editable structured text file and
 * round-trips exactly.
 */
struct Scenario {
    std::string name;
    GridSection grid;
    LatentSection latents;
    std::map<std::string, HyetographSpec> rains;
    std::string default_rain;
    double horizon_s = 0.0;
    std::map<std::string, int> points;  // name -> full-raster cell id
    std::vector<SchemeSection> schemes;
    CalibrationSection calibration;
    IntegratorSection integrator;
    FluxSection flux;
    LocalizationSection localization;

    friend bool operator==(const Scenario&, const Scenario&) = default;

    const SchemeSection& scheme(const std::string& sname) const {
        for (const auto& s : schemes)
            if (s.name == sname) return s;
        throw std::invalid_argument("scenario '" + name + "' has no scheme '" + sname + "'");
    }

    /// Observation times of a scheme: explicit list, or k*interval up to the
    /// horizon (which must be an integer number of intervals).
    std::vector<double> scheme_times(const SchemeSection& s) const {
        if (!s.times.empty()) return s.times;
        if (s.interval_s <= 0.0)
            throw std::invalid_argument("scheme '" + s.name + "' has neither times nor interval");
        const double k = horizon_s / s.interval_s;
        if (std::fabs(k - std::round(k)) > 1e-9)
            throw std::invalid_argument("horizon is not divisible by the observation interval of '" +
                                        s.name + "'");
        std::vector<double> t;
        for (int q = 1; q <= static_cast<int>(std::round(k)); ++q) t.push_back(q * s.interval_s);
        return t;
    }

    std::vector<int> scheme_point_ids(const SchemeSection& s) const {
        std::vector<int> ids;
        for (const auto& pname : s.points) {
            auto it = points.find(pname);
            if (it == points.end())
                throw std::invalid_argument("scheme '" + s.name + "' references unknown point '" +
                                            pname + "'");
            ids.push_back(it->second);
        }
        return ids;
    }

    double scheme_prior(const SchemeSection& s) const {
        return s.prior >= 0.0 ? s.prior : latents.prior;
    }
};

// ============================================================================
// JSON mapping
// ============================================================================

inline void to_json(json& j, const HyetographSpec& h) {
    j = json{{"kind", h.kind}, {"depth_mm", h.depth_mm}, {"duration_s", h.duration_s}};
    if (h.kind == "chicago") {
        j["r"] = h.r;
        j["idf"] = json{{"A", h.idf_a}, {"B", h.idf_b}, {"n", h.idf_n}};
    }
}
inline void from_json(const json& j, HyetographSpec& h) {
    h = {};
    h.kind = j.value("kind", "uniform");
    h.depth_mm = j.value("depth_mm", 0.0);
    h.duration_s = j.value("duration_s", 0.0);
    h.r = j.value("r", 0.5);
    if (j.contains("idf")) {
        h.idf_a = j["idf"].value("A", 3600.0);
        h.idf_b = j["idf"].value("B", 10.0);
        h.idf_n = j["idf"].value("n", 0.8);
    }
}

inline void to_json(json& j, const RegionBox& b) {
    j = json{{"r0", b.r0}, {"r1", b.r1}, {"c0", b.c0}, {"c1", b.c1}, {"value", b.value}};
}
inline void from_json(const json& j, RegionBox& b) {
    b.r0 = j.at("r0"); b.r1 = j.at("r1"); b.c0 = j.at("c0"); b.c1 = j.at("c1");
    b.value = j.at("value");
}

inline void to_json(json& j, const RoadStrip& s) {
    j = json{{"axis", s.axis}, {"start", s.start}, {"width", s.width}};
}
inline void from_json(const json& j, RoadStrip& s) {
    s.axis = j.at("axis"); s.start = j.at("start"); s.width = j.at("width");
}

inline void to_json(json& j, const GridSection& g) {
    j = json{{"rows", g.rows},       {"cols", g.cols},
             {"spacing", g.spacing}, {"base_elevation", g.base_elevation},
             {"col_tilt", g.col_tilt}, {"row_tilt", g.row_tilt},
             {"manning", g.manning}};
    if (!g.regions.empty()) j["regions"] = g.regions;
    if (!g.dem_path.empty()) j["dem_path"] = g.dem_path;
    if (!g.roads.empty()) j["roads"] = g.roads;
    if (!g.road_mask_path.empty()) j["road_mask_path"] = g.road_mask_path;
    if (g.road_depression != 0.0) j["road_depression"] = g.road_depression;
}
inline void from_json(const json& j, GridSection& g) {
    g = {};
    g.rows = j.at("rows"); g.cols = j.at("cols"); g.spacing = j.at("spacing");
    g.base_elevation = j.value("base_elevation", 0.0);
    g.col_tilt = j.value("col_tilt", 0.0);
    g.row_tilt = j.value("row_tilt", 0.0);
    g.manning = j.value("manning", 0.02);
    if (j.contains("regions")) g.regions = j.at("regions").get<std::vector<RegionBox>>();
    g.dem_path = j.value("dem_path", "");
    if (j.contains("roads")) g.roads = j.at("roads").get<std::vector<RoadStrip>>();
    g.road_mask_path = j.value("road_mask_path", "");
    g.road_depression = j.value("road_depression", 0.0);
}

inline void to_json(json& j, const LatentSection& l) {
    j = json{{"selectors", l.selectors}, {"share_all", l.share_all}, {"prior", l.prior}};
    if (!l.truth.empty()) j["truth"] = l.truth;
}
inline void from_json(const json& j, LatentSection& l) {
    l = {};
    l.selectors = j.value("selectors", std::vector<std::string>{});
    l.share_all = j.value("share_all", false);
    l.prior = j.value("prior", 1.0);
    if (j.contains("truth")) l.truth = j.at("truth").get<std::vector<double>>();
}

inline void to_json(json& j, const SchemeSection& s) {
    j = json{{"name", s.name}, {"points", s.points}};
    if (!s.times.empty()) j["times"] = s.times;
    else j["interval_s"] = s.interval_s;
    if (s.prior >= 0.0) j["prior"] = s.prior;
}
inline void from_json(const json& j, SchemeSection& s) {
    s = {};
    s.name = j.at("name");
    s.points = j.at("points").get<std::vector<std::string>>();
    s.interval_s = j.value("interval_s", 0.0);
    if (j.contains("times")) s.times = j.at("times").get<std::vector<double>>();
    s.prior = j.value("prior", -1.0);
}

inline void to_json(json& j, const CalibrationSection& c) {
    j = json{{"optimizer", c.optimizer},
             {"learning_rate", c.learning_rate},
             {"epochs", c.epochs},
             {"gamma", c.gamma},
             {"convergence_rel_loss", c.convergence_rel_loss},
             {"tail_begin", c.tail_begin},
             {"tail_end", c.tail_end}};
}
inline void from_json(const json& j, CalibrationSection& c) {
    c = {};
    c.optimizer = j.value("optimizer", "adagrad");
    c.learning_rate = j.value("learning_rate", 0.2);
    c.epochs = j.value("epochs", 40);
    c.gamma = j.value("gamma", 1e-3);
    c.convergence_rel_loss = j.value("convergence_rel_loss", 0.0);
    c.tail_begin = j.value("tail_begin", 30);
    c.tail_end = j.value("tail_end", 40);
}

inline void to_json(json& j, const IntegratorSection& c) {
    j = json{{"rtol", c.rtol}, {"atol", c.atol}, {"atol_sens", c.atol_sens},
             {"h_init", c.h_init}, {"h_max", c.h_max}};
}
inline void from_json(const json& j, IntegratorSection& c) {
    c = {};
    c.rtol = j.value("rtol", 1e-6);
    c.atol = j.value("atol", 1e-9);
    c.atol_sens = j.value("atol_sens", 1e-9);
    c.h_init = j.value("h_init", 0.1);
    c.h_max = j.value("h_max", 60.0);
}

inline void to_json(json& j, const FluxSection& f) {
    j = json{{"slope_regularization", f.slope_regularization}, {"convention", f.convention}};
}
inline void from_json(const json& j, FluxSection& f) {
    f = {};
    f.slope_regularization = j.value("slope_regularization", 1e-4);
    f.convention = j.value("convention", "dimensional");
}

inline void to_json(json& j, const LocalizationSection& l) {
    j = json{{"enabled", l.enabled}, {"halfwidth", l.halfwidth}};
}
inline void from_json(const json& j, LocalizationSection& l) {
    l = {};
    l.enabled = j.value("enabled", false);
    l.halfwidth = j.value("halfwidth", 0);
}

inline void to_json(json& j, const Scenario& s) {
    j = json{{"name", s.name},
             {"grid", s.grid},
             {"latents", s.latents},
             {"rains", s.rains},
             {"default_rain", s.default_rain},
             {"horizon_s", s.horizon_s},
             {"points", s.points},
             {"schemes", s.schemes},
             {"calibration", s.calibration},
             {"integrator", s.integrator},
             {"flux", s.flux},
             {"localization", s.localization}};
}
inline void from_json(const json& j, Scenario& s) {
    s = {};
    s.name = j.at("name");
    s.grid = j.at("grid");
    s.latents = j.at("latents");
    if (j.contains("rains"))
        s.rains = j.at("rains").get<std::map<std::string, HyetographSpec>>();
    s.default_rain = j.value("default_rain", "");
    s.horizon_s = j.value("horizon_s", 0.0);
    if (j.contains("points")) s.points = j.at("points").get<std::map<std::string, int>>();
    if (j.contains("schemes")) s.schemes = j.at("schemes").get<std::vector<SchemeSection>>();
    if (j.contains("calibration")) s.calibration = j.at("calibration");
    if (j.contains("integrator")) s.integrator = j.at("integrator");
    if (j.contains("flux")) s.flux = j.at("flux");
    if (j.contains("localization")) s.localization = j.at("localization");
}

inline std::string serialize_scenario(const Scenario& s) { return json(s).dump(2) + "\n"; }

inline Scenario parse_scenario(const std::string& text) {
    return json::parse(text).get<Scenario>();
}

/// FNV-1a over the canonical serialized form; binds run outputs to inputs.
inline uint64_t config_hash(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}
inline uint64_t config_hash(const Scenario& s) { return config_hash(json(s).dump()); }

// ============================================================================
// Realization: field, road mask, latent layout
// ============================================================================

inline std::vector<uint8_t> road_mask_from_strips(int rows, int cols,
                                                  const std::vector<RoadStrip>& strips) {
    std::vector<uint8_t> mask(static_cast<size_t>(rows) * cols, 0);
    for (const auto& s : strips) {
        if (s.axis == "h") {
            for (int r = s.start; r < s.start + s.width && r < rows; ++r)
                if (r >= 0)
                    for (int c = 0; c < cols; ++c) mask[static_cast<size_t>(r) * cols + c] = 1;
        } else if (s.axis == "v") {
            for (int c = s.start; c < s.start + s.width && c < cols; ++c)
                if (c >= 0)
                    for (int r = 0; r < rows; ++r) mask[static_cast<size_t>(r) * cols + c] = 1;
        } else {
            throw std::invalid_argument("road strip axis must be 'h' or 'v'");
        }
    }
    return mask;
}

/// Road mask for a scenario: strips, or a 0/1 raster file, or empty.
inline std::vector<uint8_t> scenario_road_mask(const GridSection& g) {
    if (!g.road_mask_path.empty()) {
        std::ifstream in(g.road_mask_path);
        if (!in) throw std::invalid_argument("cannot open road mask file '" + g.road_mask_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        const RasterGrid raster = load_dem_ascii(buf.str());
        if (raster.rows != g.rows || raster.cols != g.cols)
            throw std::invalid_argument("road mask raster is " + std::to_string(raster.rows) + "x" +
                                        std::to_string(raster.cols) + ", grid is " +
                                        std::to_string(g.rows) + "x" + std::to_string(g.cols));
        std::vector<uint8_t> mask(raster.values.size());
        for (size_t i = 0; i < mask.size(); ++i) mask[i] = raster.values[i] != 0.0 ? 1 : 0;
        return mask;
    }
    if (!g.roads.empty()) return road_mask_from_strips(g.rows, g.cols, g.roads);
    return {};
}

inline RasterGrid scenario_elevation(const GridSection& g, const std::vector<uint8_t>& road_mask) {
    RasterGrid elev;
    if (!g.dem_path.empty()) {
        std::ifstream in(g.dem_path);
        if (!in) throw std::invalid_argument("cannot open DEM file '" + g.dem_path + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        elev = load_dem_ascii(buf.str());
        if (elev.rows != g.rows || elev.cols != g.cols)
            throw std::invalid_argument("DEM is " + std::to_string(elev.rows) + "x" +
                                        std::to_string(elev.cols) + ", scenario grid is " +
                                        std::to_string(g.rows) + "x" + std::to_string(g.cols));
    } else {
        elev = uniform_raster(g.rows, g.cols, g.base_elevation);
        for (int r = 0; r < g.rows; ++r)
            for (int c = 0; c < g.cols; ++c)
                elev.values[static_cast<size_t>(r) * g.cols + c] +=
                    g.row_tilt * g.spacing * r + g.col_tilt * g.spacing * c;
        for (const auto& box : g.regions)
            for (int r = box.r0; r <= box.r1; ++r)
                for (int c = box.c0; c <= box.c1; ++c)
                    elev.values[static_cast<size_t>(r) * g.cols + c] = box.value;
    }
    if (g.road_depression != 0.0 && !road_mask.empty())
        for (size_t i = 0; i < road_mask.size(); ++i)
            if (road_mask[i]) elev.values[i] -= g.road_depression;
    return elev;
}

/**
 * Expands a named edge selector into an ordered edge list.
 *
 *   "vline rA..rB @ cL|cR"   edges {(r,L),(r,R)} for r = A..B (top to bottom)
 *   "hline cA..cB @ rT|rU"   edges {(T,c),(U,c)} for c = A..B (left to right)
 *   "region-boundary"        the two mid lines of an even 2x2 region raster
 *   "road-edges"             every edge joining two road cells, raster order
 */
inline std::vector<CellField::Edge> expand_selector(const std::string& selector,
                                                    const CellField& field,
                                                    const std::vector<uint8_t>& road_mask) {
    std::vector<CellField::Edge> edges;
    auto active_or_throw = [&](int r, int c) {
        if (r < 0 || r >= field.rows || c < 0 || c >= field.cols)
            throw std::invalid_argument("selector '" + selector + "' leaves the raster");
        const int a = field.active_at(r, c);
        if (a < 0)
            throw std::invalid_argument("selector '" + selector + "' touches an inactive cell");
        return a;
    };

    std::istringstream ss(selector);
    std::string head;
    ss >> head;
    if (head == "vline" || head == "hline") {
        std::string range, at, pair;
        ss >> range >> at >> pair;
        if (at != "@")
            throw std::invalid_argument("malformed selector '" + selector + "'");
        int lo = 0, hi = 0, first = 0, second = 0;
        const char axis1 = head == "vline" ? 'r' : 'c';
        const char axis2 = head == "vline" ? 'c' : 'r';
        char a1, a1b;
        if (std::sscanf(range.c_str(), "%c%d..%c%d", &a1, &lo, &a1b, &hi) != 4 || a1 != axis1 ||
            a1b != axis1)
            throw std::invalid_argument("malformed range in selector '" + selector + "'");
        char a2, a2b;
        if (std::sscanf(pair.c_str(), "%c%d|%c%d", &a2, &first, &a2b, &second) != 4 ||
            a2 != axis2 || a2b != axis2)
            throw std::invalid_argument("malformed pair in selector '" + selector + "'");
        for (int q = lo; q <= hi; ++q) {
            if (head == "vline")
                edges.push_back({active_or_throw(q, first), active_or_throw(q, second)});
            else
                edges.push_back({active_or_throw(first, q), active_or_throw(second, q)});
        }
        return edges;
    }
    if (head == "region-boundary") {
        if (field.rows % 2 != 0 || field.cols % 2 != 0)
            throw std::invalid_argument("region-boundary needs even raster dimensions");
        const int cl = field.cols / 2 - 1, cr = field.cols / 2;
        const int rt = field.rows / 2 - 1, rb = field.rows / 2;
        for (int r = 0; r < field.rows; ++r)
            edges.push_back({active_or_throw(r, cl), active_or_throw(r, cr)});
        for (int c = 0; c < field.cols; ++c)
            edges.push_back({active_or_throw(rt, c), active_or_throw(rb, c)});
        return edges;
    }
    if (head == "road-edges") {
        if (road_mask.empty())
            throw std::invalid_argument("selector 'road-edges' needs a road network in the grid section");
        for (const auto& e : field.edges) {
            const int fa = field.full_of_active[e.a], fb = field.full_of_active[e.b];
            if (road_mask[fa] && road_mask[fb]) edges.push_back(e);
        }
        return edges;
    }
    throw std::invalid_argument("unknown edge selector '" + selector + "'");
}

/// A scenario realized into concrete objects.
struct BuiltScenario {
    CellField field;
    std::vector<uint8_t> road_mask;  // full raster; empty when no roads
    LatentLayout layout;
    IncidenceStructure incidence;
    std::vector<double> truth_z;  // per group; empty when the scenario has no truth
    FluxParams flux;
    IntegratorConfig integrator;

    std::vector<double> prior_vector(double value) const {
        return std::vector<double>(layout.group_count, value);
    }
};

inline BuiltScenario build_scenario(const Scenario& s) {
    BuiltScenario b;
    if (s.grid.rows <= 0 || s.grid.cols <= 0)
        throw std::invalid_argument("scenario '" + s.name + "': grid dimensions missing");
    if (s.grid.dem_path.empty() && s.grid.rows * s.grid.cols > 200000)
        throw std::invalid_argument(
            "scenario '" + s.name +
            "': full-scale grids need a DEM file (set grid.dem_path); the procedural "
            "elevation is only meant for desk-scale grids");

    b.road_mask = scenario_road_mask(s.grid);
    const RasterGrid elev = scenario_elevation(s.grid, b.road_mask);
    b.field = build_grid(s.grid.rows, s.grid.cols, s.grid.spacing, elev,
                         uniform_raster(s.grid.rows, s.grid.cols, s.grid.manning));

    std::vector<CellField::Edge> latent_edges;
    for (const auto& sel : s.latents.selectors) {
        auto part = expand_selector(sel, b.field, b.road_mask);
        latent_edges.insert(latent_edges.end(), part.begin(), part.end());
    }
    std::vector<int> groups;
    if (s.latents.share_all && !latent_edges.empty())
        groups.assign(latent_edges.size(), 0);
    b.layout = assign_latents(b.field, latent_edges, std::move(groups));
    b.incidence = build_incidence(b.field, b.layout);

    if (!s.latents.truth.empty()) {
        if (static_cast<int>(s.latents.truth.size()) != b.layout.group_count)
            throw std::invalid_argument("scenario '" + s.name + "': truth has " +
                                        std::to_string(s.latents.truth.size()) + " entries for " +
                                        std::to_string(b.layout.group_count) + " groups");
        b.truth_z = s.latents.truth;
    }

    b.flux.slope_regularization = s.flux.slope_regularization;
    b.flux.convention = s.flux.convention == "paper-literal" ? FluxConvention::PaperLiteral
                                                             : FluxConvention::Dimensional;
    b.flux.edge_width = s.grid.spacing;
    b.flux.cell_area = s.grid.spacing * s.grid.spacing;

    b.integrator.rtol = s.integrator.rtol;
    b.integrator.atol = s.integrator.atol;
    b.integrator.atol_sens = s.integrator.atol_sens;
    b.integrator.h_init = s.integrator.h_init;
    b.integrator.h_max = s.integrator.h_max;
    return b;
}

inline ForcingSpec make_forcing(const Scenario& s, const std::string& rain_name) {
    const std::string key = rain_name.empty() ? s.default_rain : rain_name;
    auto it = s.rains.find(key);
    if (it == s.rains.end())
        throw std::invalid_argument("scenario '" + s.name + "' has no rainfall named '" + key + "'");
    ForcingSpec f;
    f.rainfall = it->second.build();
    return f;
}

inline CalibrationConfig make_calibration_config(const Scenario& s) {
    CalibrationConfig c;
    c.optimizer =
        s.calibration.optimizer == "rmsprop" ? OptimizerKind::Rmsprop : OptimizerKind::Adagrad;
    c.learning_rate = s.calibration.learning_rate;
    c.epochs = s.calibration.epochs;
    c.convergence_rel_loss = s.calibration.convergence_rel_loss;
    c.tail_window_begin = s.calibration.tail_begin;
    c.tail_window_end = s.calibration.tail_end;
    return c;
}

// ============================================================================
// Built-in scenarios
// ============================================================================

namespace detail {

inline std::vector<double> case1_truth() {
    std::vector<double> t(60, 1.5);
    for (int k = 15; k <= 44; ++k) t[k] = 0.0;
    return t;
}

}  // namespace detail

/**
 * The 30x30 four-region twin: two elevation plateaus (1 m and 0.8 m) in a
 * checkerboard, 60 independent latent variables on the two region-boundary
 * lines (walls on the lines bounding the isolated lower-left region), four
 * design rainfalls, four observation points at the region centers, and
 * eight observation schemes combining point sets with 60 s / 120 s clocks.
 */
inline Scenario builtin_case1() {
    Scenario s;
    s.name = "case1";
    s.grid.rows = 30;
    s.grid.cols = 30;
    s.grid.spacing = 10.0;
    s.grid.manning = 0.02;
    s.grid.regions = {{0, 14, 0, 14, 1.0},
                      {0, 14, 15, 29, 0.8},
                      {15, 29, 0, 14, 0.8},
                      {15, 29, 15, 29, 1.0}};

    s.latents.selectors = {"vline r0..r29 @ c14|c15", "hline c0..c29 @ r14|r15"};
    s.latents.truth = detail::case1_truth();
    s.latents.prior = 1.0;

    s.rains["uniform_1"] = {"uniform", 40.0, 600.0};
    s.rains["chicago_r03"] = {"chicago", 40.0, 600.0, 0.3};
    s.rains["chicago_r05"] = {"chicago", 40.0, 600.0, 0.5};
    s.rains["chicago_r07"] = {"chicago", 40.0, 600.0, 0.7};
    s.default_rain = "uniform_1";
    s.horizon_s = 600.0;

    // observation points at the region centers
    s.points = {{"1", 7 * 30 + 7}, {"2", 7 * 30 + 22}, {"3", 22 * 30 + 7}, {"4", 22 * 30 + 22}};

    s.schemes = {{"C1T1", {"2", "3"}, 60.0},
                 {"C1T2", {"1", "2"}, 60.0},
                 {"C1T3", {"1", "2", "3"}, 60.0},
                 {"C1T4", {"1", "2", "3", "4"}, 60.0},
                 {"C1T5", {"2", "3"}, 120.0},
                 {"C1T6", {"1", "2"}, 120.0},
                 {"C1T7", {"1", "2", "3"}, 120.0},
                 {"C1T8", {"1", "2", "3", "4"}, 120.0},
                 // variants for the text reading of the point pairs
                 {"C1T2b", {"1", "3"}, 60.0},
                 {"C1T6b", {"1", "3"}, 120.0}};

    s.calibration.optimizer = "adagrad";
    s.calibration.learning_rate = 0.2;
    s.calibration.epochs = 40;
    s.calibration.gamma = 1e-3;
    s.calibration.convergence_rel_loss = 0.0;  // run every epoch
    return s;
}

namespace detail {

inline std::vector<RoadStrip> case2_desk_strips() {
    return {{"h", 28, 4}, {"v", 58, 4}};
}

inline std::vector<RoadStrip> case2_full_strips() {
    // five vertical avenues (width 4) and eight horizontal streets (width 3),
    // sized so the road area and its side-8 localization footprint match the
    // full-scale bookkeeping this twin stands in for
    std::vector<RoadStrip> strips;
    for (int c : {20, 60, 100, 140, 180}) strips.push_back({"v", c, 4});
    for (int r : {30, 85, 140, 195, 250, 305, 360, 415}) strips.push_back({"h", r, 3});
    return strips;
}

/// Evenly spaced points along the centerlines of a two-road cross.
inline std::map<std::string, int> case2_desk_points(int rows, int cols) {
    std::map<std::string, int> pts;
    int n = 0;
    const int h_row = 29, v_col = 59;
    // 10 along the horizontal road, skipping the crossing
    for (int q = 0; q < 10; ++q) {
        const int c = 6 + q * 12;  // 6, 18, ..., 114
        if (c >= 54 && c <= 65) continue;
        pts["p" + std::to_string(++n)] = h_row * cols + c;
    }
    // fill along the vertical road up to 18 total
    for (int q = 0; n < 18 && q < 12; ++q) {
        const int r = 4 + q * 6;  // 4, 10, ..., skipping the crossing
        if (r >= 24 && r <= 35) continue;
        pts["p" + std::to_string(++n)] = r * cols + v_col;
    }
    (void)rows;
    return pts;
}

}  // namespace detail

/// The urban twin at desk scale (60x120, two-road cross) or full scale
/// (483x201, synthetic road grid; elevations must come from a DEM file).
inline Scenario builtin_case2_twin(const std::string& scale, const std::string& dem_path = "") {
    Scenario s;
    const bool full = scale == "full";
    if (!full && scale != "desk")
        throw std::invalid_argument("builtin_case2_twin: scale must be 'desk' or 'full'");

    s.name = full ? "case2-twin-full" : "case2-twin";
    if (full) {
        s.grid.rows = 483;
        s.grid.cols = 201;
        s.grid.spacing = 2.0;
        s.grid.manning = 0.05;
        s.grid.roads = detail::case2_full_strips();
        s.grid.road_depression = 0.05;
        s.grid.dem_path = dem_path;  // required; build_scenario rejects 97k procedural cells
    } else {
        s.grid.rows = 60;
        s.grid.cols = 120;
        s.grid.spacing = 2.0;
        s.grid.manning = 0.05;
        s.grid.col_tilt = 0.005;   // left-low-right-high tendency
        s.grid.row_tilt = 0.002;
        s.grid.roads = detail::case2_desk_strips();
        s.grid.road_depression = 0.05;
    }

    s.latents.selectors = {"road-edges"};
    s.latents.share_all = true;
    s.latents.truth = {2.5};  // equivalent to road Manning 0.05 / 2.5 = 0.02
    s.latents.prior = 1.0;

    s.rains["uniform_2"] = {"uniform", 12.0, 300.0};
    s.default_rain = "uniform_2";
    s.horizon_s = 300.0;

    const std::vector<double> obs_times = {60.0, 120.0, 180.0, 240.0};
    if (!full) {
        s.points = detail::case2_desk_points(s.grid.rows, s.grid.cols);
    } else {
        // centerline points on the full-scale road grid
        int n = 0;
        for (int c : {20, 60, 100, 140, 180})
            for (int r : {120, 360}) s.points["p" + std::to_string(++n)] = r * s.grid.cols + (c + 1);
        for (int r : {85, 195, 305, 415})
            for (int c : {40, 120}) {
                if (n >= 18) break;
                s.points["p" + std::to_string(++n)] = (r + 1) * s.grid.cols + c;
            }
    }

    std::vector<std::string> all18, half9;
    for (int q = 1; q <= 18; ++q) all18.push_back("p" + std::to_string(q));
    for (int q = 1; q <= 18; q += 2) half9.push_back("p" + std::to_string(q));

    s.schemes = {{"UFDS_1_18", all18, 0.0, obs_times, 1.0},
                 {"UFDS_4_18", all18, 0.0, obs_times, 4.0},
                 {"UFDS_1_9", half9, 0.0, obs_times, 1.0},
                 {"UFDS_4_9", half9, 0.0, obs_times, 4.0}};

    s.calibration.optimizer = "rmsprop";
    s.calibration.learning_rate = 0.1;
    s.calibration.epochs = 40;
    s.calibration.gamma = 1e-3;
    s.calibration.convergence_rel_loss = 1e-5;
    s.calibration.tail_begin = 30;
    s.calibration.tail_end = 40;

    s.localization.enabled = true;
    s.localization.halfwidth = 4;  // squares of side 8
    return s;
}

/// A 5x5 tilted ramp with four independent latent edges across the flow
/// paths; the gradient-check workhorse.
inline Scenario builtin_twin5() {
    Scenario s;
    s.name = "twin5";
    s.grid.rows = 5;
    s.grid.cols = 5;
    s.grid.spacing = 10.0;
    s.grid.manning = 0.02;
    s.grid.base_elevation = 0.2;
    s.grid.col_tilt = -0.004;  // drains toward the high-column side
    s.grid.row_tilt = -0.001;

    s.latents.selectors = {"vline r1..r1 @ c1|c2", "vline r3..r3 @ c2|c3",
                           "hline c1..c1 @ r1|r2", "hline c3..c3 @ r2|r3"};
    s.latents.truth = {1.5, 0.6, 2.0, 0.3};
    s.latents.prior = 1.0;

    s.rains["uniform"] = {"uniform", 30.0, 300.0};
    s.default_rain = "uniform";
    s.horizon_s = 300.0;

    s.points = {{"a", 2 * 5 + 4}, {"b", 4 * 5 + 3}, {"c", 0 * 5 + 4}};
    s.schemes = {{"default", {"a", "b", "c"}, 60.0}};

    s.calibration.optimizer = "adagrad";
    s.calibration.learning_rate = 0.2;
    s.calibration.epochs = 40;
    s.calibration.gamma = 1e-3;
    return s;
}

}  // namespace floodcal
