#pragma once

/**
 * @file optim.hpp
 * @brief Forward-gradient descent: static, online with l inner updates, and online proximal.
 *
 * Online scheme, at time k with iterate x_k:
 *
 *     x^(0) = x_k
 *     x^(i+1) = x^(i) - alpha v_k(x^(i), U^(i)),   i = 0 .. l-1
 *     x_{k+1} = x^(l)
 *
 * and the proximal variant replaces each update with
 *
 *     x^(i+1) = prox_{gamma h_k}(x^(i) - gamma v_k(x^(i), U^(i))).
 *
 * Traces hold one row per iterate: row 0 is x_0 scored on L_0, row j >= 1 is
 * x_j scored on L_j after the objective has advanced.
 */

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fwdgrad/dual.hpp"
#include "fwdgrad/forward_gradient.hpp"
#include "fwdgrad/problems.hpp"
#include "fwdgrad/prox.hpp"

namespace fwdgrad {

/// Raised when an iterate turns nonfinite or the gap blows past the divergence threshold.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t k, double gap, const std::string& what)
        : std::runtime_error(what), k_(k), gap_(gap) {}

    std::size_t step() const { return k_; }
    double gap() const { return gap_; }

private:
    std::size_t k_;
    double gap_;
};

/// Anything that hands out search directions: DirectionSampler, or a fixed direction in tests.
template <class S>
concept DirectionSource = requires(S& s) {
    { s.sample() } -> std::convertible_to<Vector>;
};

/// Always returns the same direction. Lets single steps be checked deterministically.
struct FixedDirection {
    Vector u;
    Vector sample() const { return u; }
};

struct StepSizeRule {
    double alpha = 0.0;

    explicit StepSizeRule(double a) : alpha(a) {
        if (!(alpha > 0.0) || !std::isfinite(alpha)) {
            throw std::invalid_argument("step size must be positive and finite, got " + std::to_string(a));
        }
    }
};

/// The default step 1/(beta (m + 4)).
inline double default_alpha(double beta, std::size_t m) { return 1.0 / (beta * (static_cast<double>(m) + 4.0)); }

namespace detail {

inline void require_finite(const Vector& x, std::size_t k) {
    if (!x.allFinite()) {
        throw DivergenceError(k, std::numeric_limits<double>::quiet_NaN(),
                              "step rejected: nonfinite iterate at k=" + std::to_string(k));
    }
}

}  // namespace detail

template <DirectionSource Sampler>
Vector fgd_step(const ScalarFunction& f, const Vector& x, double alpha, Sampler& sampler) {
    const StepSizeRule rule(alpha);
    const ForwardGradientSample v = forward_gradient(f, x, sampler.sample());
    Vector next = x - rule.alpha * v.estimate;
    detail::require_finite(next, 0);
    return next;
}

template <DirectionSource Sampler>
Vector prox_fgd_step(const ScalarFunction& g, const Regularizer& h, const Vector& x, double gamma, Sampler& sampler) {
    const StepSizeRule rule(gamma);
    const ForwardGradientSample v = forward_gradient(g, x, sampler.sample());
    Vector next = prox_apply(h, x - rule.alpha * v.estimate, rule.alpha);
    detail::require_finite(next, 0);
    return next;
}

struct TrackingTrace {
    std::vector<double> gap;        // L_j(x_j) - L_j^*
    std::vector<double> dist_sq;    // dist(x_j, X_j^*)^2, NaN when no oracle
    std::vector<double> drift;      // L_j(x_j) - L_{j-1}(x_j); NaN at j = 0
    std::vector<double> opt_drift;  // L_j^* - L_{j-1}^*; NaN at j = 0
    std::vector<double> grad_norm;  // |grad g_j(x_j)| when recorded, else empty
    std::vector<double> bound;      // filled by the caller from bounds.hpp
    std::uint64_t seed = 0;

    std::size_t size() const { return gap.size(); }
};

struct RunOptions {
    double step = 0.0;        // alpha (gradient) or gamma (proximal)
    std::size_t inner = 1;    // l
    std::size_t steps = 1;    // K
    std::optional<double> smoothness;  // beta; enables the alpha < 2/(beta(m+4)) check
    bool record_gradient_norm = false;
    double divergence_factor = 1e6;
};

namespace detail {

class DivergenceGuard {
public:
    explicit DivergenceGuard(double factor) : factor_(factor) {}

    void check(std::size_t k, double gap) {
        if (!std::isfinite(gap)) {
            throw DivergenceError(k, gap, "divergence: nonfinite gap at k=" + std::to_string(k));
        }
        if (reference_ <= 0.0) {
            reference_ = gap > 0.0 ? gap : 0.0;
            return;
        }
        if (gap > factor_ * reference_) {
            throw DivergenceError(k, gap,
                                  "divergence: gap " + std::to_string(gap) + " at k=" + std::to_string(k) +
                                      " exceeds " + std::to_string(factor_) + " x reference gap " +
                                      std::to_string(reference_));
        }
    }

private:
    double factor_;
    double reference_ = 0.0;
};

inline void validate_run(const RunOptions& opts, std::size_t m, bool proximal) {
    const StepSizeRule rule(opts.step);
    if (opts.inner == 0) {
        throw std::invalid_argument("inner update count must be at least 1");
    }
    if (opts.steps == 0) {
        throw std::invalid_argument("number of time steps must be at least 1");
    }
    if (!proximal && opts.smoothness) {
        const double limit = 2.0 / (*opts.smoothness * (static_cast<double>(m) + 4.0));
        if (!(rule.alpha < limit)) {
            throw std::invalid_argument("step size " + std::to_string(rule.alpha) + " violates alpha < 2/(beta(m+4)) = " +
                                        std::to_string(limit));
        }
    }
}

template <DirectionSource Sampler>
TrackingTrace run_sequence(ObjectiveSequence& seq, Vector x, const RunOptions& opts, Sampler& sampler, bool proximal) {
    validate_run(opts, seq.dimension(), proximal);
    if (static_cast<std::size_t>(x.size()) != seq.dimension()) {
        throw DimensionError("x0 has length " + std::to_string(x.size()) + ", problem dimension is " +
                             std::to_string(seq.dimension()));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    TrackingTrace trace;
    trace.gap.reserve(opts.steps + 1);
    DivergenceGuard guard(opts.divergence_factor);

    CompositeObjective current = seq.at(0);
    if (!proximal && current.regularizer.kind() != Regularizer::Kind::zero) {
        throw std::invalid_argument("run_online needs a smooth objective; use run_prox_online for composites");
    }
    double current_opt = seq.optimal_value(0);
    auto record = [&](std::size_t j, double value, double optimal) {
        const double gap = value - optimal;
        trace.gap.push_back(gap);
        const std::optional<double> d = seq.distance_to_solutions(j, x);
        trace.dist_sq.push_back(d ? (*d) * (*d) : nan);
        if (opts.record_gradient_norm) {
            trace.grad_norm.push_back(seq.smooth_gradient(j, x).norm());
        }
        guard.check(j, gap);
    };
    record(0, current.value(x), current_opt);
    trace.drift.push_back(nan);
    trace.opt_drift.push_back(nan);

    for (std::size_t k = 0; k < opts.steps; ++k) {
        for (std::size_t i = 0; i < opts.inner; ++i) {
            const ForwardGradientSample v = forward_gradient(current.smooth, x, sampler.sample());
            if (proximal) {
                x = prox_apply(current.regularizer, x - opts.step * v.estimate, opts.step);
            } else {
                x = x - opts.step * v.estimate;
            }
            require_finite(x, k + 1);
        }
        CompositeObjective next = seq.at(k + 1);
        const double next_opt = seq.optimal_value(k + 1);
        const double value_next = next.value(x);
        trace.drift.push_back(value_next - current.value(x));
        trace.opt_drift.push_back(next_opt - current_opt);
        record(k + 1, value_next, next_opt);
        current = std::move(next);
        current_opt = next_opt;
    }
    return trace;
}

}  // namespace detail

/// K forward-gradient steps on a fixed f; trace rows j = 0..K hold f(x_j) - f*.
template <DirectionSource Sampler>
TrackingTrace run_static(const ScalarFunction& f, double optimal, Vector x, double alpha, std::size_t steps,
                         Sampler& sampler, const std::function<double(const Vector&)>& dist = {},
                         double divergence_factor = 1e6) {
    const StepSizeRule rule(alpha);
    if (steps == 0) {
        throw std::invalid_argument("run_static needs at least one step");
    }
    f.check(x, "x0");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    TrackingTrace trace;
    detail::DivergenceGuard guard(divergence_factor);
    auto record = [&](std::size_t k) {
        const double gap = f.value(x) - optimal;
        trace.gap.push_back(gap);
        trace.dist_sq.push_back(dist ? dist(x) * dist(x) : nan);
        trace.drift.push_back(k == 0 ? nan : 0.0);
        trace.opt_drift.push_back(k == 0 ? nan : 0.0);
        guard.check(k, gap);
    };
    record(0);
    for (std::size_t k = 0; k < steps; ++k) {
        const ForwardGradientSample v = forward_gradient(f, x, sampler.sample());
        x = x - rule.alpha * v.estimate;
        detail::require_finite(x, k + 1);
        record(k + 1);
    }
    return trace;
}

template <DirectionSource Sampler>
TrackingTrace run_online(ObjectiveSequence& seq, Vector x0, const RunOptions& opts, Sampler& sampler) {
    return detail::run_sequence(seq, std::move(x0), opts, sampler, false);
}

template <DirectionSource Sampler>
TrackingTrace run_prox_online(ObjectiveSequence& seq, Vector x0, const RunOptions& opts, Sampler& sampler) {
    return detail::run_sequence(seq, std::move(x0), opts, sampler, true);
}

}  // namespace fwdgrad
