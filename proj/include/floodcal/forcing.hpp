#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace floodcal {

/**
 * Rainfall hyetograph: intensity [m/s] as a function of time, zero beyond
 * the storm duration, with the cumulative depth matching the declared total
 * exactly.
 *
 * The Chicago shape places the peak at t = r*duration and hangs both
 * branches off the storm-intensity curve i(t_d) = A/(t_d + B)^n; the curve
 * is then rescaled multiplicatively so the integral equals `depth`, which
 * makes the absolute IDF scale A immaterial (only B, n and r shape the
 * curve). IDF constants are kept in their customary units: A in
 * mm*min^n/h, B in minutes.
 */
struct Hyetograph {
    enum class Kind { Uniform, Chicago };

    Kind kind = Kind::Uniform;
    double depth = 0.0;     // cumulative rainfall [m]
    double duration = 0.0;  // [s]
    double peak_ratio = 0.5;   // Chicago only, in (0,1)
    double idf_a = 3600.0;     // Chicago only
    double idf_b = 10.0;
    double idf_n = 0.8;
    double scale = 1.0;  // multiplicative renormalization (set on construction)

    double intensity(double t) const;         // [m/s]
    double cumulative(double t) const;        // [m] rained in [0, t]
    double cumulative_depth() const { return cumulative(duration); }

private:
    // Antiderivative helper: integral of [(1-n)x + B] / (x+B)^(1+n) dx = x*(x+B)^(-n).
    double branch_integral(double x) const { return x * std::pow(x + idf_b, -idf_n); }

public:
    // Unscaled Chicago branch value at time-to-peak tau [min], side ratio rho.
    double chicago_branch(double tau_min, double rho) const {
        const double x = tau_min / rho;
        return idf_a * ((1.0 - idf_n) * x + idf_b) / std::pow(x + idf_b, 1.0 + idf_n);
    }
};

inline Hyetograph uniform_hyetograph(double depth_m, double duration_s) {
    if (duration_s <= 0.0) throw std::invalid_argument("uniform_hyetograph: duration must be positive");
    if (depth_m < 0.0) throw std::invalid_argument("uniform_hyetograph: depth must be nonnegative");
    Hyetograph h;
    h.kind = Hyetograph::Kind::Uniform;
    h.depth = depth_m;
    h.duration = duration_s;
    return h;
}

inline Hyetograph chicago_hyetograph(double depth_m, double duration_s, double peak_ratio,
                                     double idf_a = 3600.0, double idf_b = 10.0, double idf_n = 0.8) {
    if (duration_s <= 0.0) throw std::invalid_argument("chicago_hyetograph: duration must be positive");
    if (!(peak_ratio > 0.0 && peak_ratio < 1.0))
        throw std::invalid_argument("chicago_hyetograph: peak ratio must lie in (0,1)");
    if (idf_a <= 0.0 || idf_b <= 0.0 || idf_n <= 0.0)
        throw std::invalid_argument("chicago_hyetograph: IDF constants must be positive");
    Hyetograph h;
    h.kind = Hyetograph::Kind::Chicago;
    h.depth = depth_m;
    h.duration = duration_s;
    h.peak_ratio = peak_ratio;
    h.idf_a = idf_a;
    h.idf_b = idf_b;
    h.idf_n = idf_n;

    // Exact unscaled cumulative over the storm: both branches integrate to
    // a * rho * T_d * (T_d + B)^(-n) in (mm/h * min) units; total has rho sum 1.
    const double dur_min = duration_s / 60.0;
    const double unscaled_mm = (idf_a * dur_min * std::pow(dur_min + idf_b, -idf_n)) / 60.0;
    const double unscaled_m = unscaled_mm * 1e-3;
    h.scale = unscaled_m > 0.0 ? depth_m / unscaled_m : 0.0;
    return h;
}

inline double Hyetograph::intensity(double t) const {
    if (t < 0.0 || t > duration || depth <= 0.0) return 0.0;
    if (kind == Kind::Uniform) return depth / duration;

    const double t_min = t / 60.0;
    const double peak_min = peak_ratio * (duration / 60.0);
    const double mm_per_h = (t_min <= peak_min)
                                ? chicago_branch(peak_min - t_min, peak_ratio)
                                : chicago_branch(t_min - peak_min, 1.0 - peak_ratio);
    return scale * mm_per_h * (1e-3 / 3600.0);
}

inline double Hyetograph::cumulative(double t) const {
    if (t <= 0.0 || depth <= 0.0) return 0.0;
    t = std::min(t, duration);
    if (kind == Kind::Uniform) return depth * (t / duration);

    const double dur_min = duration / 60.0;
    const double peak_min = peak_ratio * dur_min;
    const double t_min = t / 60.0;
    // mm/h * min accumulated, before unit conversion and rescaling
    double acc = 0.0;
    if (t_min <= peak_min) {
        acc = idf_a * peak_ratio *
              (branch_integral(dur_min) - branch_integral((peak_min - t_min) / peak_ratio));
    } else {
        acc = idf_a * peak_ratio * branch_integral(dur_min) +
              idf_a * (1.0 - peak_ratio) * branch_integral((t_min - peak_min) / (1.0 - peak_ratio));
    }
    return scale * (acc / 60.0) * 1e-3;
}

inline double intensity_at(const Hyetograph& h, double t) { return h.intensity(t); }

// ============================================================================
// Per-cell source terms
// ============================================================================

/**
 * Constant-capacity infiltration, smoothly gated to zero as the depth
 * vanishes so the right-hand side stays Lipschitz: rate = f_c * min(1,
 * h/h_gate). Kind None returns zero and a zero depth-derivative.
 */
struct InfiltrationSpec {
    enum class Kind { None, ConstantCapacity };
    Kind kind = Kind::None;
    double capacity = 0.0;   // f_c [m/s]
    double gate_depth = 1e-4;  // [m]

    double rate(double h) const {
        if (kind == Kind::None || capacity <= 0.0) return 0.0;
        if (h <= 0.0) return 0.0;
        return capacity * std::min(1.0, h / gate_depth);
    }
    double rate_ddepth(double h) const {
        if (kind == Kind::None || capacity <= 0.0) return 0.0;
        if (h <= 0.0 || h >= gate_depth) return 0.0;
        return capacity / gate_depth;
    }
};

/**
 * Piecewise-constant per-cell boundary inflow series: each (time, rate)
 * entry applies from its time until the cell's next entry. Independent of
 * depth, so the depth-derivative is zero.
 */
struct InflowSeries {
    struct Entry {
        double time = 0.0;  // [s]
        double rate = 0.0;  // [m/s]
    };
    // per active cell, entries ascending in time; absent cell means zero
    std::vector<std::vector<Entry>> per_cell;

    double rate(int cell, double t) const {
        if (per_cell.empty() || cell >= static_cast<int>(per_cell.size())) return 0.0;
        const auto& seq = per_cell[cell];
        double r = 0.0;
        for (const auto& e : seq) {
            if (e.time > t) break;
            r = e.rate;
        }
        return r;
    }
    bool empty() const { return per_cell.empty(); }
};

/// The combined source terms: spatially uniform rainfall plus the
/// infiltration and inflow hooks (both zero in the shipped scenarios).
struct ForcingSpec {
    Hyetograph rainfall;
    InfiltrationSpec infiltration;
    InflowSeries inflow;

    double rain_at(double t) const { return rainfall.intensity(t); }
};

inline double infiltration_rate(const ForcingSpec& f, double h, double /*t*/) {
    return f.infiltration.rate(h);
}

}  // namespace floodcal
