#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "fwdgrad/bounds.hpp"
#include "fwdgrad/forward_gradient.hpp"
#include "fwdgrad/harness/aggregate.hpp"
#include "fwdgrad/harness/config.hpp"
#include "fwdgrad/optim.hpp"
#include "fwdgrad/problems.hpp"
#include "fwdgrad/random.hpp"

namespace fwdgrad::harness {

struct ExperimentSummary {
    Mode mode = Mode::track;
    ProblemConstants constants;
    double step = 0.0;          // alpha (gradient modes) or gamma (proximal mode) actually used
    double bound_gamma = 0.0;   // gamma fed to the tracking bound (track mode)
    double gap0 = 0.0;
    double limsup = std::numeric_limits<double>::quiet_NaN();      // asymptotic term of the bound
    double limsup_gap = std::numeric_limits<double>::quiet_NaN();  // proximal mode: limsup of the loss gap
    double final_mean_gap = 0.0;     // mean of mean_gap over the last 10% of rows
    double previous_mean_gap = 0.0;  // same over the 10% window before that
    bool bound_dominates = false;    // mean_gap <= bound on every row
};

struct ExperimentResult {
    AggregateTrace trace;
    ExperimentSummary summary;
    std::vector<TrackingTrace> trials;
};

/// The shared starting point: a standard-normal vector from the start substream.
inline Vector shared_start(std::uint64_t seed, std::size_t m) {
    NormalStream stream(derive_seed(seed, 0, Stream::start));
    return stream.normal_vector(static_cast<Eigen::Index>(m));
}

inline std::size_t resolve_threads(std::size_t requested, std::size_t trials) {
    std::size_t n = requested;
    if (n == 0) {
        n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    }
    return std::min(n, trials);
}

/// Runs `body(t)` for t = 0..trials-1 on a worker pool. Results are written by index,
/// and the exception of the lowest failing trial index is rethrown.
template <class Body>
std::vector<TrackingTrace> run_trials(std::size_t trials, std::size_t threads, Body&& body) {
    std::vector<TrackingTrace> out(trials);
    std::vector<std::exception_ptr> errors(trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) {
            try {
                out[t] = body(t);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const std::size_t n = resolve_threads(threads, trials);
    if (n <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            pool.emplace_back(worker);
        }
    }
    for (const std::exception_ptr& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

namespace detail {

inline DriftOptions drift_options(const ExperimentConfig& cfg) { return {cfg.sigma_step, cfg.b_noise_var}; }

inline double positive_max(const std::vector<TrackingTrace>& traces, std::vector<double> TrackingTrace::*column) {
    double best = 0.0;
    for (const TrackingTrace& t : traces) {
        const std::vector<double>& c = t.*column;
        for (double v : c) {
            if (std::isfinite(v)) {
                best = std::max(best, v);
            }
        }
    }
    return best;
}

inline void summarize(ExperimentResult& result) {
    ExperimentSummary& s = result.summary;
    s.final_mean_gap = tail_mean_gap(result.trace, 0.1, 0);
    s.previous_mean_gap = result.trace.size() >= 20 ? tail_mean_gap(result.trace, 0.1, 1) : s.final_mean_gap;
    s.bound_dominates = std::all_of(result.trace.rows.begin(), result.trace.rows.end(),
                                    [](const AggregateRow& r) { return r.mean_gap <= r.bound; });
}

inline void fill_bound(std::vector<TrackingTrace>& traces, const std::vector<double>& bound) {
    for (TrackingTrace& t : traces) {
        t.bound = bound;
    }
}

inline ExperimentResult run_static_mode(const ExperimentConfig& cfg) {
    DriftingLsqGenerator gen = make_drifting_generator(cfg.m, cfg.n, cfg.r, cfg.seed, drift_options(cfg));
    const LinearLsqInstance inst = gen.advance(0);
    const LsqConstants lc = lsq_constants(inst);
    const double beta = cfg.beta.value_or(lc.beta);
    const double mu = cfg.mu.value_or(lc.mu);
    const double alpha = cfg.step.value_or(default_alpha(beta, cfg.m));
    const ScalarFunction f = inst.objective();
    const Vector pinv_b = gen.pseudo_inverse_apply(0, inst.b);
    const double optimal = inst.loss(pinv_b);
    const Vector x0 = shared_start(cfg.seed, cfg.m);

    ExperimentResult result;
    result.trials = run_trials(cfg.trials, cfg.threads, [&](std::size_t t) {
        DirectionSampler sampler(cfg.m, derive_seed(cfg.seed, t, Stream::directions));
        auto dist = [&](const Vector& x) { return gen.pseudo_inverse_apply(0, inst.residual(x)).norm(); };
        TrackingTrace trace = run_static(f, optimal, x0, alpha, cfg.steps, sampler, dist);
        trace.seed = cfg.seed;
        return trace;
    });

    const double gap0 = result.trials.front().gap.front();
    std::vector<double> bound(cfg.steps + 1);
    for (std::size_t j = 0; j <= cfg.steps; ++j) {
        bound[j] = bound_static(j, mu, beta, cfg.m, gap0);
    }
    fill_bound(result.trials, bound);

    ExperimentSummary& s = result.summary;
    s.mode = cfg.mode;
    s.constants.beta = beta;
    s.constants.mu = mu;
    s.step = alpha;
    s.gap0 = gap0;
    s.limsup = 0.0;
    result.trace = aggregate(result.trials);
    summarize(result);
    return result;
}

inline ExperimentResult run_track_mode(const ExperimentConfig& cfg) {
    const DriftingLsqGenerator base = make_drifting_generator(cfg.m, cfg.n, cfg.r, cfg.seed, drift_options(cfg));
    const double sigma_max = base.sigma(0).maxCoeff();
    const double sigma_min = base.sigma(cfg.steps).minCoeff();
    const double beta = cfg.beta.value_or(sigma_max * sigma_max);
    const double mu = cfg.mu.value_or(sigma_min * sigma_min);
    const double alpha = cfg.step.value_or(default_alpha(beta, cfg.m));
    const Vector x0 = shared_start(cfg.seed, cfg.m);

    RunOptions opts;
    opts.step = alpha;
    opts.inner = cfg.inner;
    opts.steps = cfg.steps;
    opts.smoothness = beta;

    ExperimentResult result;
    result.trials = run_trials(cfg.trials, cfg.threads, [&](std::size_t t) {
        DriftingLsqGenerator gen = base;
        gen.reseed_noise(derive_seed(cfg.seed, t, Stream::drift));
        DriftingLsqSequence seq(std::move(gen));
        DirectionSampler sampler(cfg.m, derive_seed(cfg.seed, t, Stream::directions));
        TrackingTrace trace = run_online(seq, x0, opts, sampler);
        trace.seed = cfg.seed;
        return trace;
    });

    ExperimentSummary& s = result.summary;
    s.mode = cfg.mode;
    s.constants.beta = beta;
    s.constants.mu = mu;
    s.constants.eta0 = positive_max(result.trials, &TrackingTrace::drift);
    s.constants.eta_star = positive_max(result.trials, &TrackingTrace::opt_drift);
    s.constants.xi_estimated = false;
    s.step = alpha;
    s.gap0 = result.trials.front().gap.front();

    BoundInputs in;
    in.mu = mu;
    in.beta = beta;
    in.m = cfg.m;
    in.alpha = alpha;
    in.ell = cfg.inner;
    in.eta0 = s.constants.eta0;
    in.eta_star = s.constants.eta_star;
    in.gap0 = s.gap0;
    s.bound_gamma = default_gamma(in);
    s.limsup = tracking_limsup(in, s.bound_gamma);

    std::vector<double> bound(cfg.steps + 1);
    for (std::size_t j = 0; j <= cfg.steps; ++j) {
        bound[j] = bound_tracking(j == 0 ? 0 : j - 1, in, s.bound_gamma);
    }
    fill_bound(result.trials, bound);
    result.trace = aggregate(result.trials);
    summarize(result);
    return result;
}

struct ProxEstimates {
    double mu_hat = std::numeric_limits<double>::infinity();
    double xi_hat = std::numeric_limits<double>::infinity();
};

/// mu_hat = min prox_pl_ratio and xi_hat = min 2 gap / dist^2 over `count` points
/// sampled around the minimizers at the first and last time steps.
inline ProxEstimates estimate_prox_constants(const DriftingLsqGenerator& base, const Regularizer& h,
                                             std::size_t last, double beta, std::size_t count, std::uint64_t seed) {
    ProxEstimates e;
    DriftingLsqSequence seq(base, h);
    std::uint64_t salt = 0;
    for (std::size_t k : {std::size_t{0}, last}) {
        const LinearLsqInstance inst = seq.instance(k);
        const double optimal = seq.optimal_value(k);
        const Vector center = seq.minimizer(k);
        const std::vector<Vector> points =
            sample_points_around(center, count, derive_seed(seed, salt++, Stream::sampling));
        auto loss = [&](const Vector& x) { return inst.loss(x) + h.value(x); };
        auto dist = [&](const Vector& x) { return (x - center).norm(); };
        for (const Vector& x : points) {
            const double gap = loss(x) - optimal;
            if (gap > 1e-10) {
                e.mu_hat = std::min(e.mu_hat, prox_pl_ratio(inst.gradient(x), h, x, beta, gap));
            }
        }
        e.xi_hat = std::min(e.xi_hat, estimate_xi(loss, optimal, dist, points));
    }
    return e;
}

inline ExperimentResult run_prox_mode(const ExperimentConfig& cfg) {
    const DriftingLsqGenerator base = make_drifting_generator(cfg.m, cfg.n, cfg.r, cfg.seed, drift_options(cfg));
    const Regularizer h = Regularizer::l1(cfg.lambda);
    const double sigma_max = base.sigma(0).maxCoeff();
    const double beta = cfg.beta.value_or(sigma_max * sigma_max);
    const double gamma = cfg.step.value_or(default_alpha(beta, cfg.m));
    const Vector x0 = shared_start(cfg.seed, cfg.m);

    RunOptions opts;
    opts.step = gamma;
    opts.inner = cfg.inner;
    opts.steps = cfg.steps;
    opts.record_gradient_norm = true;

    ExperimentResult result;
    result.trials = run_trials(cfg.trials, cfg.threads, [&](std::size_t t) {
        DriftingLsqGenerator gen = base;
        gen.reseed_noise(derive_seed(cfg.seed, t, Stream::drift));
        DriftingLsqSequence seq(std::move(gen), h);
        DirectionSampler sampler(cfg.m, derive_seed(cfg.seed, t, Stream::directions));
        TrackingTrace trace = run_prox_online(seq, x0, opts, sampler);
        trace.seed = cfg.seed;
        return trace;
    });

    const ProxEstimates est = estimate_prox_constants(base, h, cfg.steps, beta, 500, cfg.seed);
    ExperimentSummary& s = result.summary;
    s.mode = cfg.mode;
    s.constants.beta = beta;
    s.constants.mu = cfg.mu.value_or(std::min(est.mu_hat, beta));
    s.constants.xi = est.xi_hat;
    s.constants.xi_estimated = true;
    s.constants.c1 = positive_max(result.trials, &TrackingTrace::grad_norm);
    s.constants.c2 = h.subgradient_bound(cfg.m);
    s.constants.eta0 = positive_max(result.trials, &TrackingTrace::drift);
    s.constants.eta_star = positive_max(result.trials, &TrackingTrace::opt_drift);
    s.step = gamma;
    s.gap0 = result.trials.front().gap.front();

    BoundInputs in;
    in.mu = s.constants.mu;
    in.beta = beta;
    in.m = cfg.m;
    in.ell = cfg.inner;
    in.eta0 = s.constants.eta0;
    in.eta_star = s.constants.eta_star;
    in.gap0 = s.gap0;
    in.xi = s.constants.xi;
    in.c1 = s.constants.c1;
    in.c2 = s.constants.c2;
    s.limsup = prox_tracking_asymptotic(in);
    s.limsup_gap = prox_limsup_gap(in);

    std::vector<double> bound(cfg.steps + 1);
    for (std::size_t j = 0; j <= cfg.steps; ++j) {
        bound[j] = bound_prox_tracking(j == 0 ? 0 : j - 1, in);
    }
    fill_bound(result.trials, bound);
    result.trace = aggregate(result.trials);
    summarize(result);
    return result;
}

}  // namespace detail

/// Static, track or prox-track experiment. All trials share x0; trial t draws its
/// drift noise and directions from substreams (seed, t).
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    switch (cfg.mode) {
    case Mode::static_descent:
        return detail::run_static_mode(cfg);
    case Mode::track:
        return detail::run_track_mode(cfg);
    case Mode::prox_track:
        return detail::run_prox_mode(cfg);
    case Mode::diag:
    case Mode::bounds:
        break;
    }
    throw ConfigError("field 'mode': run_experiment handles static, track and prox-track, got " + to_string(cfg.mode));
}

struct DiagnosticsReport {
    MomentReport moments;
    double gradient_norm = 0.0;
    std::size_t samples = 0;
};

/// Moment check of the forward gradient on the drifting instance at k = 0, at the shared start.
inline DiagnosticsReport run_diagnostics(const ExperimentConfig& cfg) {
    validate(cfg);
    DriftingLsqGenerator gen = make_drifting_generator(cfg.m, cfg.n, cfg.r, cfg.seed, detail::drift_options(cfg));
    const LinearLsqInstance inst = gen.advance(0);
    const Vector x = shared_start(cfg.seed, cfg.m);
    const Vector exact = inst.gradient(x);
    DirectionSampler sampler(cfg.m, derive_seed(cfg.seed, 0, Stream::directions));
    const MomentDiagnostics diag = moment_diagnostics(inst.objective(), x, cfg.samples, sampler);
    return {compare_moments(diag, exact), exact.norm(), cfg.samples};
}

struct BoundsRow {
    std::size_t k = 0;
    double transient = 0.0;
    double limsup = 0.0;
    double bound = 0.0;
};

struct BoundsTable {
    double alpha = 0.0;
    double gamma = 0.0;
    std::vector<BoundsRow> rows;
};

/// Tracking-bound table for k = 0..steps from the constants in the config.
inline BoundsTable bounds_table(const ExperimentConfig& cfg) {
    validate(cfg);
    if (!cfg.mu) {
        throw ConfigError("field 'mu': required for the bounds table");
    }
    if (!cfg.beta) {
        throw ConfigError("field 'beta': required for the bounds table");
    }
    BoundInputs in;
    in.mu = *cfg.mu;
    in.beta = *cfg.beta;
    in.m = cfg.m;
    in.alpha = cfg.step.value_or(default_alpha(in.beta, cfg.m));
    in.ell = cfg.inner;
    in.eta0 = cfg.eta0;
    in.eta_star = cfg.eta_star;
    in.gap0 = cfg.gap0;
    BoundsTable table;
    table.alpha = in.alpha;
    try {
        table.gamma = default_gamma(in);
        for (std::size_t k = 0; k <= cfg.steps; ++k) {
            const double lim = tracking_limsup(in, table.gamma);
            const double tr = tracking_transient(k, in, table.gamma);
            table.rows.push_back({k, tr, lim, lim + tr});
        }
    } catch (const BoundDomainError& e) {
        throw ConfigError(std::string("bounds: ") + e.what());
    }
    return table;
}

}  // namespace fwdgrad::harness
