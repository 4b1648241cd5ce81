#pragma once

#include <cstdio>
#include <iostream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "fwdgrad/harness/config.hpp"
#include "fwdgrad/harness/csv.hpp"
#include "fwdgrad/harness/experiment.hpp"
#include "fwdgrad/harness/svg.hpp"
#include "fwdgrad/optim.hpp"

namespace fwdgrad::harness {

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_divergence = 2 };

namespace detail {

struct FlagBinding {
    std::string key;
    std::string help;
    std::string value{};
    CLI::Option* option{nullptr};
};

inline void print_summary(std::ostream& os, const ExperimentConfig& cfg, const ExperimentResult& r) {
    const ExperimentSummary& s = r.summary;
    os << "mode            " << to_string(cfg.mode) << '\n';
    os << "trials          " << cfg.trials << "  steps " << cfg.steps << "  inner " << cfg.inner << '\n';
    os << "step            " << format_real(s.step) << '\n';
    os << "mu, beta        " << format_real(s.constants.mu) << ", " << format_real(s.constants.beta) << '\n';
    os << "gap0            " << format_real(s.gap0) << '\n';
    if (cfg.mode != Mode::static_descent) {
        os << "eta0_hat        " << format_real(s.constants.eta0) << '\n';
        os << "eta_star_hat    " << format_real(s.constants.eta_star) << '\n';
    }
    if (cfg.mode == Mode::track) {
        os << "bound gamma     " << format_real(s.bound_gamma) << '\n';
    }
    if (cfg.mode == Mode::prox_track) {
        os << "c1, c2          " << format_real(s.constants.c1) << ", " << format_real(s.constants.c2) << '\n';
        os << "xi_hat          " << format_real(s.constants.xi) << " (empirical estimate)\n";
        os << "limsup gap      " << format_real(s.limsup_gap) << '\n';
    }
    os << "bound limsup    " << format_real(s.limsup) << '\n';
    os << "final 10% gap   " << format_real(s.final_mean_gap) << '\n';
    os << "gap <= bound    " << (s.bound_dominates ? "yes" : "no") << '\n';
}

inline void print_diagnostics(std::ostream& os, const ExperimentConfig& cfg, const DiagnosticsReport& d) {
    const MomentReport& m = d.moments;
    char line[256];
    std::snprintf(line, sizeof line, "samples                %zu\n", d.samples);
    os << line;
    std::snprintf(line, sizeof line, "gradient norm          %.6g\n", d.gradient_norm);
    os << line;
    std::snprintf(line, sizeof line, "unbiasedness rel-error %.6g\n", m.relative_error);
    os << line;
    std::snprintf(line, sizeof line, "second-moment ratio    %.6g  (m+2 = %.0f, m+4 = %.0f)\n", m.second_moment_ratio,
                  m.gaussian_exact, m.upper_bound);
    os << line;
    std::snprintf(line, sizeof line, "ratio <= m+4           %s  (margin %.6g)\n", m.within_upper_bound ? "PASS" : "FAIL",
                  m.upper_bound - m.second_moment_ratio);
    os << line;
    std::snprintf(line, sizeof line, "ratio - (m+2)          %+.6g\n", m.second_moment_ratio - m.gaussian_exact);
    os << line;
    (void)cfg;
}

inline void print_bounds(std::ostream& os, const BoundsTable& t) {
    char line[256];
    std::snprintf(line, sizeof line, "# alpha = %.17g, gamma = %.17g\n", t.alpha, t.gamma);
    os << line;
    os << "k,transient,limsup,bound\n";
    for (const BoundsRow& r : t.rows) {
        os << r.k << ',' << format_real(r.transient) << ',' << format_real(r.limsup) << ',' << format_real(r.bound)
           << '\n';
    }
}

}  // namespace detail

/// Entry point of the `fwdgrad` tool. Settings are layered defaults, then --config, then flags.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Forward-gradient descent experiments and bound evaluators", "fwdgrad"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, CLI::App*>> modes;
    for (const char* name : {"static", "track", "prox-track", "diag", "bounds"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->fallthrough();
        modes.emplace_back(name, sub);
    }
    modes[0].second->description("forward-gradient descent on a fixed least-squares instance");
    modes[1].second->description("online forward-gradient descent on the drifting least-squares sequence");
    modes[2].second->description("online proximal forward gradient on drifting l1-regularized least squares");
    modes[3].second->description("Monte-Carlo moment diagnostics of the forward-gradient estimator");
    modes[4].second->description("tabulate the online tracking bound");

    std::string config_path;
    app.add_option("--config", config_path, "flat key = value configuration file")->type_name("PATH");

    std::vector<detail::FlagBinding> flags = {
        {"seed", "base seed of every random stream"},
        {"trials", "number of independent trials"},
        {"steps", "horizon K (number of time steps)"},
        {"inner", "inner updates per time step"},
        {"alpha", "step size alpha (gamma in prox-track), or 'auto'"},
        {"lambda", "l1 weight (prox-track)"},
        {"out", "CSV output path (stdout when absent)"},
        {"svg", "SVG plot output path"},
        {"m", "dimension of x"},
        {"n", "number of rows of A"},
        {"r", "rank of A"},
        {"mu", "PL constant override"},
        {"beta", "smoothness constant override"},
        {"samples", "Monte-Carlo samples (diag)"},
        {"eta0", "cost drift (bounds)"},
        {"eta_star", "optimal-value drift (bounds)"},
        {"gap0", "initial gap (bounds)"},
        {"sigma_step", "per-step singular value decrement"},
        {"b_noise_var", "variance of the per-step change in b"},
        {"threads", "worker threads, 0 for all cores"},
    };
    for (detail::FlagBinding& f : flags) {
        std::string name = f.key;
        for (char& c : name) {
            if (c == '_') c = '-';
        }
        const std::string spec = name.size() == 1 ? "-" + name : "--" + name;
        f.option = app.add_option(spec, f.value, f.help)->type_name(f.key == "out" || f.key == "svg" ? "PATH" : "VALUE");
    }
    bool log_y = false;
    CLI::Option* log_y_flag = app.add_flag("--log-y", log_y, "log10 y-axis in the SVG plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        err << app.help();
        return exit_config;
    }

    ExperimentConfig cfg;
    try {
        if (!config_path.empty()) {
            cfg = load_config(config_path, cfg);
        }
        KeyValues kv;
        for (const detail::FlagBinding& f : flags) {
            if (f.option->count() > 0) {
                kv[f.key] = f.value;
            }
        }
        apply_values(cfg, kv);
        if (log_y_flag->count() > 0) {
            cfg.log_y = log_y;
        }
        for (const auto& [name, sub] : modes) {
            if (sub->parsed()) {
                cfg.mode = parse_mode(name);
            }
        }
        validate(cfg);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    }

    try {
        switch (cfg.mode) {
        case Mode::diag:
            detail::print_diagnostics(out, cfg, run_diagnostics(cfg));
            return exit_ok;
        case Mode::bounds:
            detail::print_bounds(out, bounds_table(cfg));
            return exit_ok;
        default:
            break;
        }
        const ExperimentResult result = run_experiment(cfg);
        if (cfg.out.empty()) {
            out << to_csv(result.trace);
            detail::print_summary(err, cfg, result);
        } else {
            write_csv(result.trace, cfg.out);
            detail::print_summary(out, cfg, result);
        }
        if (!cfg.svg.empty()) {
            render_svg(result.trace, cfg.svg, cfg.log_y);
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const DivergenceError& e) {
        err << "diverged: " << e.what() << '\n';
        return exit_divergence;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_divergence;
    }
}

}  // namespace fwdgrad::harness
