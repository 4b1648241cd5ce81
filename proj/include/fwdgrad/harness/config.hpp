#pragma once

// Experiment configuration and its flat key/value file format.
//
//   # comment
//   mode = track
//   m = 60
//   alpha = auto
//
// One `key = value` per line; `#` starts a comment anywhere on a line.

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

namespace fwdgrad::harness {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Mode { static_descent, track, prox_track, diag, bounds };

inline std::string to_string(Mode mode) {
    switch (mode) {
    case Mode::static_descent:
        return "static";
    case Mode::track:
        return "track";
    case Mode::prox_track:
        return "prox-track";
    case Mode::diag:
        return "diag";
    case Mode::bounds:
        return "bounds";
    }
    return "?";
}

inline Mode parse_mode(std::string_view text) {
    if (text == "static") return Mode::static_descent;
    if (text == "track") return Mode::track;
    if (text == "prox-track") return Mode::prox_track;
    if (text == "diag") return Mode::diag;
    if (text == "bounds") return Mode::bounds;
    throw ConfigError("field 'mode': unknown mode '" + std::string(text) +
                      "' (expected static, track, prox-track, diag or bounds)");
}

struct ExperimentConfig {
    Mode mode = Mode::track;
    std::size_t m = 60;
    std::size_t n = 10;
    std::size_t r = 10;
    std::uint64_t seed = 1;
    std::size_t trials = 50;
    std::size_t steps = 2000;
    std::size_t inner = 1;
    std::optional<double> step;  // alpha or gamma; empty means "auto"
    double lambda = 0.1;
    double sigma_step = 1e-6;
    double b_noise_var = 1e-2;
    std::optional<double> mu;    // overrides the computed PL constant
    std::optional<double> beta;  // overrides the computed smoothness constant
    std::size_t samples = 200'000;
    double eta0 = 0.0;
    double eta_star = 0.0;
    double gap0 = 1.0;
    std::size_t threads = 0;  // 0: hardware concurrency
    std::string out;
    std::string svg;
    bool log_y = false;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T value{};
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ConfigError("field '" + key + "': cannot parse '" + text + "' as a number");
    }
    return value;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("field '" + key + "': expected a boolean, got '" + text + "'");
}

}  // namespace detail

using KeyValues = std::map<std::string, std::string>;

/// Parses `key = value` lines. Duplicate keys keep the last value.
inline KeyValues parse_key_values(std::string_view text) {
    KeyValues kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = detail::trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + stripped + "'");
        }
        std::string key = detail::trim(std::string_view(stripped).substr(0, eq));
        std::string value = detail::trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        }
        kv[std::move(key)] = std::move(value);
    }
    return kv;
}

inline void apply_values(ExperimentConfig& cfg, const KeyValues& kv) {
    using detail::parse_number;
    for (const auto& [key, value] : kv) {
        if (key == "mode") cfg.mode = parse_mode(value);
        else if (key == "m") cfg.m = parse_number<std::size_t>(key, value);
        else if (key == "n") cfg.n = parse_number<std::size_t>(key, value);
        else if (key == "r") cfg.r = parse_number<std::size_t>(key, value);
        else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "trials") cfg.trials = parse_number<std::size_t>(key, value);
        else if (key == "steps") cfg.steps = parse_number<std::size_t>(key, value);
        else if (key == "inner") cfg.inner = parse_number<std::size_t>(key, value);
        else if (key == "alpha" || key == "gamma") {
            if (value == "auto") cfg.step.reset();
            else cfg.step = parse_number<double>(key, value);
        }
        else if (key == "lambda") cfg.lambda = parse_number<double>(key, value);
        else if (key == "sigma_step") cfg.sigma_step = parse_number<double>(key, value);
        else if (key == "b_noise_var") cfg.b_noise_var = parse_number<double>(key, value);
        else if (key == "mu") cfg.mu = parse_number<double>(key, value);
        else if (key == "beta") cfg.beta = parse_number<double>(key, value);
        else if (key == "samples") cfg.samples = parse_number<std::size_t>(key, value);
        else if (key == "eta0") cfg.eta0 = parse_number<double>(key, value);
        else if (key == "eta_star") cfg.eta_star = parse_number<double>(key, value);
        else if (key == "gap0") cfg.gap0 = parse_number<double>(key, value);
        else if (key == "threads") cfg.threads = parse_number<std::size_t>(key, value);
        else if (key == "out") cfg.out = value;
        else if (key == "svg") cfg.svg = value;
        else if (key == "log_y") cfg.log_y = detail::parse_bool(key, value);
        else throw ConfigError("unknown key '" + key + "'");
    }
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig cfg = {}) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    apply_values(cfg, parse_key_values(text.str()));
    return cfg;
}

/// Field-level checks; throws ConfigError naming the first offending field.
inline void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigError("field '" + field + "': " + why);
    };
    if (cfg.m == 0) fail("m", "must be at least 1");
    if (cfg.n == 0) fail("n", "must be at least 1");
    if (cfg.r == 0) fail("r", "must be at least 1");
    if (cfg.r > cfg.m || cfg.r > cfg.n) fail("r", "must not exceed min(m, n)");
    if (cfg.trials == 0) fail("trials", "must be at least 1");
    if (cfg.steps == 0) fail("steps", "must be at least 1");
    if (cfg.inner == 0) fail("inner", "must be at least 1");
    if (cfg.samples == 0) fail("samples", "must be at least 1");
    if (cfg.step && !(*cfg.step > 0.0)) fail("alpha", "must be positive or 'auto'");
    if (!(cfg.lambda >= 0.0)) fail("lambda", "must be nonnegative");
    if (!(cfg.sigma_step >= 0.0)) fail("sigma_step", "must be nonnegative");
    if (!(cfg.b_noise_var >= 0.0)) fail("b_noise_var", "must be nonnegative");
    if (cfg.mu && !(*cfg.mu > 0.0)) fail("mu", "must be positive");
    if (cfg.beta && !(*cfg.beta > 0.0)) fail("beta", "must be positive");
    if (cfg.mu && cfg.beta && *cfg.mu > *cfg.beta) fail("mu", "must not exceed beta");
    if (!(cfg.eta0 >= 0.0)) fail("eta0", "must be nonnegative");
    if (!(cfg.eta_star >= 0.0)) fail("eta_star", "must be nonnegative");
    if (!(cfg.gap0 >= 0.0)) fail("gap0", "must be nonnegative");
    const bool drifting = cfg.mode == Mode::track || cfg.mode == Mode::prox_track;
    if (drifting) {
        const double smallest = 1.0 / static_cast<double>(cfg.r);
        if (!(smallest - static_cast<double>(cfg.steps) * cfg.sigma_step > 1e-12)) {
            fail("steps", "horizon exceeded: smallest singular value reaches zero before k=" +
                              std::to_string(cfg.steps));
        }
    }
}

}  // namespace fwdgrad::harness
