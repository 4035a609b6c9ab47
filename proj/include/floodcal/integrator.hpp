#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace floodcal {

/**
 * Adaptive-step configuration. `atol` weights the state block; coupled
 * forward+sensitivity solves weight the sensitivity block with `atol_sens`
 * (sensitivity components are meters per latent-unit, not meters).
 */
struct IntegratorConfig {
    double rtol = 1e-6;
    double atol = 1e-9;
    double atol_sens = 1e-9;
    double h_init = 0.1;   // [s]
    double h_max = 60.0;   // [s]
    long max_steps = 2000000;
};

struct IntegratorStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

struct Trajectory {
    std::vector<double> times;                 // the requested sample times
    std::vector<std::vector<double>> states;   // one state per sample time
    IntegratorStats stats;
};

struct IntegrationError : std::runtime_error {
    double last_good_time;
    IntegrationError(const std::string& msg, double t)
        : std::runtime_error(msg + " (last good time " + std::to_string(t) + " s)"),
          last_good_time(t) {}
};

namespace dopri {

// Dormand & Prince 5(4) tableau, 7 stages, first-same-as-last.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 5th-order minus embedded 4th-order weights
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output coefficients (4th-order continuous extension)
inline constexpr double d1 = -12715105075.0 / 11282082432.0;
inline constexpr double d3 = 87487479700.0 / 32700410799.0;
inline constexpr double d4 = -10690763975.0 / 1880347072.0;
inline constexpr double d5 = 701980252875.0 / 199316789632.0;
inline constexpr double d6 = -1453857185.0 / 822651844.0;
inline constexpr double d7 = 69997945.0 / 29380423.0;

inline constexpr double min_step = 1e-12;  // [s]

}  // namespace dopri

/**
 * Dormand-Prince 5(4) with the standard 7-stage tableau. Error norm is the
 * RMS of componentwise error / (atol + rtol*|y|) taken per block (the
 * overall norm is the max over blocks), a step is accepted when the norm is
 * <= 1, and the next step is h * clamp(0.9 * norm^(-1/5), 0.2, 5). Sample
 * output goes through the 4th-order dense interpolant, so the accepted step
 * sequence never depends on the observation schedule.
 *
 * `block_split` > 0 marks the boundary of a two-block state: components
 * [0, split) are weighted with cfg.atol, [split, n) with cfg.atol_sens.
 *
 * Throws IntegrationError on step underflow (h < 1e-12 s) or when max_steps
 * is exceeded, carrying the last successfully reached time.
 */
template <class RHS>
Trajectory integrate(RHS&& f, std::vector<double> y0, double t0, double t1,
                     const std::vector<double>& sample_times, const IntegratorConfig& cfg,
                     size_t block_split = 0, const std::vector<double>& breakpoints = {}) {
    using namespace dopri;

    const size_t n = y0.size();
    Trajectory out;
    out.times.reserve(sample_times.size());
    out.states.reserve(sample_times.size());

    for (size_t q = 0; q + 1 < sample_times.size(); ++q)
        if (!(sample_times[q] < sample_times[q + 1]))
            throw std::invalid_argument("integrate: sample times must be strictly ascending");
    if (!sample_times.empty() && (sample_times.front() < t0 || sample_times.back() > t1))
        throw std::invalid_argument("integrate: sample times must lie within the time span");

    size_t next_sample = 0;
    auto emit = [&](double t, const std::vector<double>& y) {
        out.times.push_back(t);
        out.states.push_back(y);
    };
    while (next_sample < sample_times.size() && sample_times[next_sample] <= t0) {
        emit(t0, y0);
        ++next_sample;
    }

    std::vector<double> y = std::move(y0);
    std::vector<double> y_new(n), y_stage(n), err(n);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> rc3(n), rc4(n), rc5(n), interp(n);

    double t = t0;
    if (t1 < t0) throw std::invalid_argument("integrate: t1 < t0");
    if (t1 == t0) {
        while (next_sample < sample_times.size()) { emit(t0, y); ++next_sample; }
        return out;
    }

    auto eval = [&](double tt, const std::vector<double>& yy, std::vector<double>& dy) {
        f(tt, std::span<const double>(yy), std::span<double>(dy));
        ++out.stats.rhs_evals;
    };

    auto error_norm = [&]() {
        const size_t split = (block_split > 0 && block_split < n) ? block_split : n;
        double norm = 0.0;
        size_t lo = 0;
        for (int blk = 0; blk < 2; ++blk) {
            const size_t hi = (blk == 0) ? split : n;
            if (hi == lo) break;
            const double atol = (blk == 0) ? cfg.atol : cfg.atol_sens;
            double acc = 0.0;
            for (size_t i = lo; i < hi; ++i) {
                const double sc = atol + cfg.rtol * std::max(std::fabs(y[i]), std::fabs(y_new[i]));
                const double q = err[i] / sc;
                acc += q * q;
            }
            norm = std::max(norm, std::sqrt(acc / static_cast<double>(hi - lo)));
            lo = hi;
        }
        return norm;
    };

    // known forcing discontinuities: no step straddles one, and the stale
    // first-same-as-last stage is refreshed after crossing
    size_t next_break = 0;
    while (next_break < breakpoints.size() && breakpoints[next_break] <= t0) ++next_break;

    eval(t, y, k1);
    double h = std::min({cfg.h_init, cfg.h_max, t1 - t0});

    while (t < t1) {
        if (out.stats.accepted + out.stats.rejected >= cfg.max_steps)
            throw IntegrationError("integrate: max_steps exceeded", t);
        double t_stop = t1;
        if (next_break < breakpoints.size() && breakpoints[next_break] < t1)
            t_stop = breakpoints[next_break];
        const bool last = (t + h >= t_stop);
        if (last) h = t_stop - t;

        // stages 2..7 (k7 at t+h is the FSAL stage)
        for (size_t i = 0; i < n; ++i) y_stage[i] = y[i] + h * a21 * k1[i];
        eval(t + c2 * h, y_stage, k2);
        for (size_t i = 0; i < n; ++i) y_stage[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        eval(t + c3 * h, y_stage, k3);
        for (size_t i = 0; i < n; ++i)
            y_stage[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        eval(t + c4 * h, y_stage, k4);
        for (size_t i = 0; i < n; ++i)
            y_stage[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        eval(t + c5 * h, y_stage, k5);
        for (size_t i = 0; i < n; ++i)
            y_stage[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                     a65 * k5[i]);
        eval(t + h, y_stage, k6);
        for (size_t i = 0; i < n; ++i)
            y_new[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        eval(t + h, y_new, k7);

        for (size_t i = 0; i < n; ++i)
            err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                          e7 * k7[i]);

        const double norm = error_norm();
        const bool finite = std::isfinite(norm);
        const double factor =
            finite ? std::clamp(norm > 0.0 ? 0.9 * std::pow(norm, -0.2) : 5.0, 0.2, 5.0) : 0.2;

        if (finite && norm <= 1.0) {
            const double t_new = last ? t_stop : t + h;

            // dense output for samples inside (t, t_new]
            if (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
                bool have_rcont = false;
                while (next_sample < sample_times.size() && sample_times[next_sample] <= t_new) {
                    const double ts = sample_times[next_sample];
                    if (ts == t_new) {
                        emit(ts, y_new);
                    } else {
                        if (!have_rcont) {
                            for (size_t i = 0; i < n; ++i) {
                                const double dy = y_new[i] - y[i];
                                rc3[i] = h * k1[i] - dy;
                                rc4[i] = dy - h * k7[i] - rc3[i];
                                rc5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                              d6 * k6[i] + d7 * k7[i]);
                            }
                            have_rcont = true;
                        }
                        const double theta = (ts - t) / h;
                        const double theta1 = 1.0 - theta;
                        for (size_t i = 0; i < n; ++i) {
                            const double dy = y_new[i] - y[i];
                            interp[i] = y[i] + theta * (dy + theta1 * (rc3[i] +
                                        theta * (rc4[i] + theta1 * rc5[i])));
                        }
                        emit(ts, interp);
                    }
                    ++next_sample;
                }
            }

            t = t_new;
            std::swap(y, y_new);
            std::swap(k1, k7);  // FSAL
            ++out.stats.accepted;
            if (t >= t1) break;
            if (next_break < breakpoints.size() && t >= breakpoints[next_break]) {
                ++next_break;
                eval(t, y, k1);  // right-limit of the discontinuous forcing
            }
        } else {
            ++out.stats.rejected;
        }

        h = std::min(h * factor, cfg.h_max);
        if (h < min_step)
            throw IntegrationError("integrate: step size underflow", t);
    }

    // samples exactly at t1 that were not yet emitted (roundoff guard)
    while (next_sample < sample_times.size()) {
        emit(t1, y);
        ++next_sample;
    }
    return out;
}

/**
 * Integrates the augmented state [h ; vec(G)] with a single step controller.
 * `fwd(t, h, dh)` is the state right-hand side and `sens(t, h, G, dG)` the
 * sensitivity right-hand side; the error norm weights the two blocks with
 * their own absolute tolerances. Returns the state and sensitivity
 * trajectories sampled at the same times.
 */
template <class FwdRHS, class SensRHS>
std::pair<Trajectory, Trajectory> integrate_coupled(FwdRHS&& fwd, SensRHS&& sens,
                                                    const std::vector<double>& h0,
                                                    const std::vector<double>& G0, double t0,
                                                    double t1,
                                                    const std::vector<double>& sample_times,
                                                    const IntegratorConfig& cfg) {
    const size_t nh = h0.size();
    const size_t ng = G0.size();
    std::vector<double> y0(nh + ng);
    std::copy(h0.begin(), h0.end(), y0.begin());
    std::copy(G0.begin(), G0.end(), y0.begin() + nh);

    auto rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
        fwd(t, y.first(nh), dy.first(nh));
        sens(t, y.first(nh), y.subspan(nh), dy.subspan(nh));
    };

    Trajectory aug = integrate(rhs, std::move(y0), t0, t1, sample_times, cfg, nh);

    Trajectory state, sensitivity;
    state.times = aug.times;
    sensitivity.times = aug.times;
    state.stats = aug.stats;
    sensitivity.stats = aug.stats;
    state.states.reserve(aug.states.size());
    sensitivity.states.reserve(aug.states.size());
    for (const auto& y : aug.states) {
        state.states.emplace_back(y.begin(), y.begin() + nh);
        sensitivity.states.emplace_back(y.begin() + nh, y.end());
    }
    return {std::move(state), std::move(sensitivity)};
}

}  // namespace floodcal
