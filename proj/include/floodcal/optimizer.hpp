#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace floodcal {

enum class OptimizerKind { Adagrad, Rmsprop };

/**
 * Per-coordinate adaptive gradient steps.
 *
 * Adagrad accumulates squared gradients: z' = z - lr * g / sqrt(acc + eps).
 * RMSprop keeps an exponential moving average: avg = alpha*avg +
 * (1-alpha)*g^2, z' = z - lr * g / sqrt(avg + eps).
 */
struct OptimizerState {
    OptimizerKind kind = OptimizerKind::Adagrad;
    double learning_rate = 0.2;
    double adagrad_eps = 1e-10;
    double rmsprop_alpha = 0.99;
    double rmsprop_eps = 1e-8;
    std::vector<double> accum;  // squared-gradient accumulator / moving average

    static OptimizerState adagrad(size_t n, double lr, double eps = 1e-10) {
        OptimizerState s;
        s.kind = OptimizerKind::Adagrad;
        s.learning_rate = lr;
        s.adagrad_eps = eps;
        s.accum.assign(n, 0.0);
        return s;
    }
    static OptimizerState rmsprop(size_t n, double lr, double alpha = 0.99, double eps = 1e-8) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("rmsprop: alpha must lie in (0,1)");
        OptimizerState s;
        s.kind = OptimizerKind::Rmsprop;
        s.learning_rate = lr;
        s.rmsprop_alpha = alpha;
        s.rmsprop_eps = eps;
        s.accum.assign(n, 0.0);
        return s;
    }

    void step(std::span<double> z, std::span<const double> g) {
        if (z.size() != accum.size() || g.size() != accum.size())
            throw std::invalid_argument("optimizer step: size mismatch");
        if (kind == OptimizerKind::Adagrad) {
            for (size_t i = 0; i < z.size(); ++i) {
                accum[i] += g[i] * g[i];
                z[i] -= learning_rate * g[i] / std::sqrt(accum[i] + adagrad_eps);
            }
        } else {
            for (size_t i = 0; i < z.size(); ++i) {
                accum[i] = rmsprop_alpha * accum[i] + (1.0 - rmsprop_alpha) * g[i] * g[i];
                z[i] -= learning_rate * g[i] / std::sqrt(accum[i] + rmsprop_eps);
            }
        }
    }
};

inline void adagrad_step(OptimizerState& s, std::span<double> z, std::span<const double> g) {
    s.step(z, g);
}
inline void rmsprop_step(OptimizerState& s, std::span<double> z, std::span<const double> g) {
    s.step(z, g);
}

enum class PriorKind { NonnegativeUniform, None };

/// Flat prior on the feasible set; the only action of the nonnegative
/// uniform prior is the projection z -> max(z, 0).
struct PriorSpec {
    PriorKind kind = PriorKind::NonnegativeUniform;
};

inline void project_feasible(std::span<double> z, const PriorSpec& prior) {
    if (prior.kind != PriorKind::NonnegativeUniform) return;
    for (double& v : z) v = std::max(v, 0.0);
}

}  // namespace floodcal
