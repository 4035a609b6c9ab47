#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "floodcal/forward_model.hpp"
#include "floodcal/optimizer.hpp"
#include "floodcal/sensitivity.hpp"

namespace floodcal {

/**
 * Sparse water-depth observations: depths at a fixed point set over a
 * strictly increasing time sequence, with i.i.d. Gaussian error of variance
 * gamma per value. Points are full-raster cell ids (the external
 * convention); they are resolved to active indices against a field at use.
 */
struct ObservationSet {
    std::vector<double> times;             // [s], strictly increasing
    std::vector<int> points;               // full-raster cell ids
    std::vector<std::vector<double>> values;  // [time][point], meters
    double gamma = 1e-3;                   // noise variance [m^2]

    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    void validate() const {
        if (gamma <= 0.0) throw std::invalid_argument("ObservationSet: gamma must be positive");
        for (size_t k = 0; k + 1 < times.size(); ++k)
            if (!(times[k] < times[k + 1]))
                throw std::invalid_argument("ObservationSet: times must be strictly increasing");
        if (values.size() != times.size())
            throw std::invalid_argument("ObservationSet: one value row per time expected");
        for (const auto& row : values)
            if (row.size() != points.size())
                throw std::invalid_argument("ObservationSet: value row/point size mismatch");
    }
};

inline std::vector<int> resolve_points(const CellField& field, std::span<const int> full_ids) {
    std::vector<int> active(full_ids.size());
    for (size_t j = 0; j < full_ids.size(); ++j) {
        if (full_ids[j] < 0 || full_ids[j] >= field.full_count())
            throw std::invalid_argument("observation point " + std::to_string(full_ids[j]) +
                                        " outside the raster");
        active[j] = field.active_of_full[full_ids[j]];
        if (active[j] < 0)
            throw std::invalid_argument("observation point " + std::to_string(full_ids[j]) +
                                        " is not an active cell");
    }
    return active;
}

struct CalibrationConfig {
    OptimizerKind optimizer = OptimizerKind::Adagrad;
    double learning_rate = 0.2;
    int epochs = 40;
    double adagrad_eps = 1e-10;
    double rmsprop_alpha = 0.99;
    double rmsprop_eps = 1e-8;
    double convergence_rel_loss = 0.0;  // 0 disables early stopping
    int tail_window_begin = 30;         // epoch range for the unconverged estimate
    int tail_window_end = 40;
    PriorSpec prior;
};

struct CalibrationReport {
    std::vector<double> losses;               // losses[e] = objective at iterates[e]
    std::vector<std::vector<double>> iterates;  // iterates[e] = z after e steps (z_0 first)
    std::vector<double> estimate;
    bool converged = false;
    int convergence_epoch = -1;   // epoch whose loss met the criterion
    int epochs_run = 0;
    std::optional<std::string> failure;  // solver failure, report is partial
};

// ============================================================================
// Objective and gradient
// ============================================================================

/**
 * One coupled forward+sensitivity solve at z, sampled at the observation
 * times. Yields both the data misfit
 *     Phi = 1/2 sum_k sum_j (y_kj - yhat_kj)^2 / gamma
 * and its gradient
 *     grad = - sum_k Sel(G(t_k))^T (y_k - yhat_k) / gamma
 * (the uniform prior is flat on the feasible set, so it contributes nothing
 * inside; feasibility is maintained by projection).
 */
struct ObjectiveEval {
    double loss = 0.0;
    std::vector<double> gradient;  // per group
};

inline ObjectiveEval eval_objective(const ForwardModel& model, const SensitivityEngine& eng,
                                    std::span<const double> z, const ObservationSet& obs,
                                    const IntegratorConfig& cfg) {
    obs.validate();
    const auto pts = resolve_points(model.field(), obs.points);
    const auto res = solve_coupled(model, eng, z, 0.0, obs.horizon(), obs.times, cfg);

    ObjectiveEval ev;
    ev.gradient.assign(eng.group_count(), 0.0);
    for (size_t k = 0; k < obs.times.size(); ++k) {
        const auto& h = res.state.states[k];
        const auto sel = observation_gradient(eng, res.sens[k], pts);
        for (size_t j = 0; j < pts.size(); ++j) {
            const double r = obs.values[k][j] - h[pts[j]];
            ev.loss += 0.5 * r * r / obs.gamma;
            for (int s = 0; s < eng.group_count(); ++s)
                ev.gradient[s] -= sel[j * eng.group_count() + s] * r / obs.gamma;
        }
    }
    return ev;
}

/// Data misfit alone (plain forward solve, no sensitivities).
inline double data_misfit(const ForwardModel& model, std::span<const double> z,
                          const ObservationSet& obs, const IntegratorConfig& cfg) {
    obs.validate();
    const auto pts = resolve_points(model.field(), obs.points);
    const auto traj = simulate(model, z, 0.0, obs.horizon(), obs.times, cfg);
    double phi = 0.0;
    for (size_t k = 0; k < obs.times.size(); ++k)
        for (size_t j = 0; j < pts.size(); ++j) {
            const double r = obs.values[k][j] - traj.states[k][pts[j]];
            phi += 0.5 * r * r / obs.gamma;
        }
    return phi;
}

/// Objective = misfit + prior penalty; the uniform-on-[0,inf) prior is flat
/// on its support (constant dropped), so the objective equals the misfit on
/// every feasible z.
inline double objective(const ForwardModel& model, std::span<const double> z,
                        const ObservationSet& obs, const PriorSpec& prior,
                        const IntegratorConfig& cfg) {
    (void)prior;
    return data_misfit(model, z, obs, cfg);
}

// ============================================================================
// Twin-experiment synthesis
// ============================================================================

/**
 * Forward solve at the true parameters sampled on the scheme's clock, with
 * optional seeded i.i.d. Gaussian noise of variance gamma per value.
 */
inline ObservationSet synthesize_observations(const ForwardModel& model,
                                              std::span<const double> true_z,
                                              std::span<const int> full_point_ids,
                                              const std::vector<double>& times, double gamma,
                                              uint64_t seed, bool noiseless,
                                              const IntegratorConfig& cfg) {
    ObservationSet obs;
    obs.times = times;
    obs.points.assign(full_point_ids.begin(), full_point_ids.end());
    obs.gamma = gamma;
    const auto pts = resolve_points(model.field(), obs.points);
    const auto traj = simulate(model, true_z, 0.0, times.empty() ? 0.0 : times.back(), times, cfg);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(gamma));
    obs.values.resize(times.size());
    for (size_t k = 0; k < times.size(); ++k) {
        obs.values[k].resize(pts.size());
        for (size_t j = 0; j < pts.size(); ++j) {
            double v = traj.states[k][pts[j]];
            if (!noiseless) v += noise(rng);
            obs.values[k][j] = v;
        }
    }
    return obs;
}

// ============================================================================
// The MAP loop
// ============================================================================

/**
 * Projected adaptive-gradient descent on the misfit: one coupled solve per
 * epoch provides the loss and the gradient, then the optimizer steps and
 * the iterate is projected onto the feasible set. Early stop when the
 * relative loss change falls under the configured threshold; if the loop
 * never converges the estimate is the mean of the iterates over the tail
 * window. A solver failure aborts with the partial history recorded.
 */
inline CalibrationReport calibrate(const ForwardModel& model, const SensitivityEngine& eng,
                                   std::vector<double> z0, const ObservationSet& obs,
                                   const CalibrationConfig& cal, const IntegratorConfig& cfg) {
    if (static_cast<int>(z0.size()) != eng.group_count())
        throw std::invalid_argument("calibrate: prior size != group count");

    CalibrationReport rep;
    OptimizerState opt = cal.optimizer == OptimizerKind::Adagrad
                             ? OptimizerState::adagrad(z0.size(), cal.learning_rate, cal.adagrad_eps)
                             : OptimizerState::rmsprop(z0.size(), cal.learning_rate,
                                                       cal.rmsprop_alpha, cal.rmsprop_eps);

    std::vector<double> z = std::move(z0);
    project_feasible(z, cal.prior);
    rep.iterates.push_back(z);

    for (int e = 0; e < cal.epochs; ++e) {
        ObjectiveEval ev;
        try {
            ev = eval_objective(model, eng, z, obs, cfg);
        } catch (const std::exception& ex) {
            rep.failure = "epoch " + std::to_string(e) + ": " + ex.what();
            break;
        }
        rep.losses.push_back(ev.loss);
        rep.epochs_run = e + 1;

        if (cal.convergence_rel_loss > 0.0 && e >= 1) {
            const double prev = rep.losses[e - 1];
            const double rel = prev != 0.0 ? std::fabs(ev.loss - prev) / std::fabs(prev)
                                           : std::fabs(ev.loss - prev);
            if (rel < cal.convergence_rel_loss) {
                rep.converged = true;
                rep.convergence_epoch = e;
                rep.estimate = z;
                return rep;
            }
        }

        opt.step(z, ev.gradient);
        project_feasible(z, cal.prior);
        rep.iterates.push_back(z);
    }

    // unconverged: tail-average of the iterates over the configured window,
    // clamped to the epochs actually run
    const int last = static_cast<int>(rep.iterates.size()) - 1;
    int lo = std::min(cal.tail_window_begin, last);
    int hi = std::min(cal.tail_window_end, last);
    if (lo > hi) lo = hi;
    std::vector<double> mean(z.size(), 0.0);
    for (int e = lo; e <= hi; ++e)
        for (size_t i = 0; i < mean.size(); ++i) mean[i] += rep.iterates[e][i];
    for (double& v : mean) v /= static_cast<double>(hi - lo + 1);
    rep.estimate = std::move(mean);
    return rep;
}

// ============================================================================
// Error metric
// ============================================================================

/**
 * Root mean square error in the exact printed form
 *   (1 / (K J)) * sqrt(sum_kj (x - xhat)^2),
 * which places the 1/(KJ) outside the root; set `conventional` to get the
 * familiar sqrt of the mean instead. Reports label which form was used.
 */
inline double rmse(const std::vector<std::vector<double>>& truth,
                   const std::vector<std::vector<double>>& predicted, bool conventional = false) {
    if (truth.size() != predicted.size())
        throw std::invalid_argument("rmse: trajectory length mismatch");
    size_t count = 0;
    double ss = 0.0;
    for (size_t k = 0; k < truth.size(); ++k) {
        if (truth[k].size() != predicted[k].size())
            throw std::invalid_argument("rmse: snapshot size mismatch at index " + std::to_string(k));
        for (size_t j = 0; j < truth[k].size(); ++j) {
            const double d = truth[k][j] - predicted[k][j];
            ss += d * d;
            ++count;
        }
    }
    if (count == 0) return 0.0;
    if (conventional) return std::sqrt(ss / static_cast<double>(count));
    return std::sqrt(ss) / static_cast<double>(count);
}

/// RMSE restricted to a point set (active indices) of full-field snapshots.
inline double rmse_at_points(const std::vector<std::vector<double>>& truth,
                             const std::vector<std::vector<double>>& predicted,
                             std::span<const int> points, bool conventional = false) {
    std::vector<std::vector<double>> t(truth.size()), p(predicted.size());
    for (size_t k = 0; k < truth.size(); ++k) {
        t[k].reserve(points.size());
        p[k].reserve(points.size());
        for (int j : points) {
            t[k].push_back(truth[k][j]);
            p[k].push_back(predicted[k][j]);
        }
    }
    return rmse(t, p, conventional);
}

}  // namespace floodcal
