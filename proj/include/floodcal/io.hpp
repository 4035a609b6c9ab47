#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "floodcal/calibration.hpp"
#include "floodcal/forward_model.hpp"
#include "floodcal/sensitivity.hpp"

namespace floodcal {

/// Floats serialized with 17 significant digits (round-trip exact).
inline std::string format_float(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ============================================================================
// CSV
// ============================================================================

inline std::string trajectory_csv(const CellField& field, const Trajectory& traj) {
    std::string out = "time_s,cell_id,depth_m\n";
    for (size_t k = 0; k < traj.times.size(); ++k)
        for (int i = 0; i < field.cell_count(); ++i) {
            out += format_float(traj.times[k]);
            out += ',';
            out += std::to_string(field.full_of_active[i]);
            out += ',';
            out += format_float(traj.states[k][i]);
            out += '\n';
        }
    return out;
}

inline std::string observations_csv(const ObservationSet& obs) {
    std::string out = "time_s,cell_id,depth_m\n";
    for (size_t k = 0; k < obs.times.size(); ++k)
        for (size_t j = 0; j < obs.points.size(); ++j) {
            out += format_float(obs.times[k]);
            out += ',';
            out += std::to_string(obs.points[j]);
            out += ',';
            out += format_float(obs.values[k][j]);
            out += '\n';
        }
    return out;
}

inline ObservationSet parse_observations_csv(const std::string& text, double gamma) {
    ObservationSet obs;
    obs.gamma = gamma;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("observations CSV is empty");
    std::map<double, std::map<int, double>> by_time;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        double t, v;
        long cell;
        if (std::sscanf(line.c_str(), "%lf,%ld,%lf", &t, &cell, &v) != 3)
            throw std::invalid_argument("observations CSV: malformed line " + std::to_string(line_no));
        by_time[t][static_cast<int>(cell)] = v;
    }
    if (by_time.empty()) throw std::invalid_argument("observations CSV has no rows");
    for (const auto& [cell, v] : by_time.begin()->second) obs.points.push_back(cell);
    for (const auto& [t, row] : by_time) {
        obs.times.push_back(t);
        std::vector<double> vals;
        for (int p : obs.points) {
            auto it = row.find(p);
            if (it == row.end())
                throw std::invalid_argument("observations CSV: cell " + std::to_string(p) +
                                            " missing at t=" + format_float(t));
            vals.push_back(it->second);
        }
        obs.values.push_back(std::move(vals));
    }
    return obs;
}

inline std::string calibration_csv(const CalibrationReport& rep) {
    std::string out = "epoch,loss";
    const size_t nz = rep.iterates.empty() ? 0 : rep.iterates.front().size();
    for (size_t i = 0; i < nz; ++i) out += ",z_" + std::to_string(i);
    out += '\n';
    for (size_t e = 0; e < rep.iterates.size(); ++e) {
        out += std::to_string(e);
        out += ',';
        out += e < rep.losses.size() ? format_float(rep.losses[e]) : "";
        for (size_t i = 0; i < nz; ++i) {
            out += ',';
            out += format_float(rep.iterates[e][i]);
        }
        out += '\n';
    }
    return out;
}

inline std::string sensitivity_diag_csv(const SensitivityEngine& eng,
                                        const std::vector<double>& times,
                                        const std::vector<std::vector<double>>& sens) {
    std::string out = "time_s,group,total_gradient,max_abs_gradient\n";
    for (size_t k = 0; k < times.size(); ++k)
        for (int s = 0; s < eng.group_count(); ++s) {
            out += format_float(times[k]);
            out += ',' + std::to_string(s) + ',';
            out += format_float(total_gradient(eng, sens[k], s));
            out += ',';
            out += format_float(max_abs_gradient(eng, sens[k], s));
            out += '\n';
        }
    return out;
}

inline std::string gradient_field_csv(const SensitivityEngine& eng,
                                      const std::vector<double>& times,
                                      const std::vector<std::vector<double>>& sens) {
    std::string out = "time_s,cell_id,group,value\n";
    const auto& field = eng.field();
    for (size_t k = 0; k < times.size(); ++k)
        for (int s = 0; s < eng.group_count(); ++s) {
            const auto cells = eng.cells_of(s);
            for (size_t q = 0; q < cells.size(); ++q) {
                out += format_float(times[k]);
                out += ',' + std::to_string(field.full_of_active[cells[q]]) + ',' +
                       std::to_string(s) + ',';
                out += format_float(sens[k][eng.offset_of(s) + q]);
                out += '\n';
            }
        }
    return out;
}

// ============================================================================
// SVG line charts
// ============================================================================

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/**
 * A minimal dependency-free polyline chart; enough for loss curves, latent
 * trajectories and gradient histories.
 */
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<SvgSeries>& series) {
    const int W = 860, H = 540, ML = 70, MR = 20, MT = 40, MB = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            if (first) { xmin = xmax = x; ymin = ymax = y; first = false; }
            xmin = std::min(xmin, x); xmax = std::max(xmax, x);
            ymin = std::min(ymin, y); ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    auto px = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * (W - ML - MR); };
    auto py = [&](double y) { return H - MB - (y - ymin) / (ymax - ymin) * (H - MT - MB); };

    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    svg << "<line x1='" << ML << "' y1='" << H - MB << "' x2='" << W - MR << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    svg << "<line x1='" << ML << "' y1='" << MT << "' x2='" << ML << "' y2='" << H - MB
        << "' stroke='black'/>\n";
    for (int q = 0; q <= 4; ++q) {
        const double xv = xmin + q * (xmax - xmin) / 4;
        const double yv = ymin + q * (ymax - ymin) / 4;
        svg << "<text x='" << px(xv) << "' y='" << H - MB + 18
            << "' text-anchor='middle' font-size='11'>" << format_float(xv).substr(0, 8)
            << "</text>\n";
        svg << "<text x='" << ML - 6 << "' y='" << py(yv) + 4
            << "' text-anchor='end' font-size='11'>" << format_float(yv).substr(0, 8)
            << "</text>\n";
    }
    svg << "<text x='" << (ML + W - MR) / 2 << "' y='" << H - 12
        << "' text-anchor='middle' font-size='13'>" << x_label << "</text>\n";
    svg << "<text x='16' y='" << (MT + H - MB) / 2
        << "' text-anchor='middle' font-size='13' transform='rotate(-90 16 " << (MT + H - MB) / 2
        << ")'>" << y_label << "</text>\n";

    for (size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        if (s.points.empty()) continue;
        svg << "<polyline fill='none' stroke='" << palette[si % 10] << "' stroke-width='1.2' points='";
        for (auto [x, y] : s.points) svg << px(x) << ',' << py(y) << ' ';
        svg << "'/>\n";
        if (series.size() <= 12)
            svg << "<text x='" << W - MR - 120 << "' y='" << MT + 16 * (si + 1)
                << "' font-size='11' fill='" << palette[si % 10] << "'>" << s.label << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// ============================================================================
// Run manifests
// ============================================================================

/**
 * The provenance record each command writes next to its outputs: scenario,
 * command line, config hash, seed, produced files, wall-clock and solver
 * statistics. Every listed file exists when the run succeeded.
 */
struct RunManifest {
    std::string scenario;
    std::string command;
    uint64_t config_hash = 0;
    uint64_t seed = 0;
    std::vector<std::string> outputs;
    double wall_ms = 0.0;
    long steps_accepted = 0;
    long steps_rejected = 0;
    long rhs_evals = 0;
};

inline void write_manifest(const std::filesystem::path& dir, const RunManifest& m) {
    nlohmann::json j{{"scenario", m.scenario},
                     {"command", m.command},
                     {"config_hash", m.config_hash},
                     {"seed", m.seed},
                     {"outputs", m.outputs},
                     {"wall_ms", m.wall_ms},
                     {"steps_accepted", m.steps_accepted},
                     {"steps_rejected", m.steps_rejected},
                     {"rhs_evals", m.rhs_evals}};
    for (const auto& f : m.outputs)
        if (!std::filesystem::exists(dir / f))
            throw std::runtime_error("manifest lists missing output '" + f + "'");
    write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

}  // namespace floodcal
