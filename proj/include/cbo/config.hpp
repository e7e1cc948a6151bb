#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbo/errors.hpp"
#include "cbo/initial_law.hpp"
#include "cbo/io.hpp"
#include "cbo/noise.hpp"
#include "cbo/objectives.hpp"
#include "cbo/stability.hpp"

namespace cbo {

enum class Task { Run, Stability, Moments, Laplace, Certify, Sweep, VerifyReplay };

inline const char* to_string(Task t) {
    switch (t) {
        case Task::Run: return "run";
        case Task::Stability: return "stability";
        case Task::Moments: return "moments";
        case Task::Laplace: return "laplace";
        case Task::Certify: return "certify";
        case Task::Sweep: return "sweep";
        case Task::VerifyReplay: return "verify-replay";
    }
    return "?";
}

struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;

    double at(std::size_t i) const {
        if (count == 1) return min;
        return min + (max - min) * static_cast<double>(i) /
                         static_cast<double>(count - 1);
    }
};

/// Flat key=value configuration; flags override file values. Unknown keys
/// are rejected, numeric fields are validated against the preconditions of
/// the modules they feed.
struct ExperimentConfig {
    Task task = Task::Run;

    std::string objective = "sphere_plus_one";
    std::size_t dim = 2;
    std::vector<double> poly_coeffs;

    std::string law = "uniform_box";
    std::vector<double> law_lower{-1.0};
    std::vector<double> law_upper{1.0};
    std::vector<double> law_center{0.0};
    double law_radius = 1.0;

    std::string model = "C";  // A | B | C | generic
    double lambda = 1.0;
    double sigma = 1.0;
    double h = 0.1;
    double gamma = 0.5;  // generic only
    double zeta = 0.5;   // generic only

    double beta = 50.0;
    std::size_t particles = 50;  // key "N"
    std::size_t replicas = 100;
    long max_steps = 10000;
    double consensus_tol = 1e-8;
    bool record_noise = false;
    bool verify_replay = false;
    std::uint64_t seed = 0;
    std::string out = "out";
    int threads = 1;

    double epsilon = 0.5;
    double delta = 0.05;
    std::size_t samples = 100000;
    std::vector<double> beta_grid;
    long moments_steps = 30;
    std::string theorem = "3.2";  // certify: 3.2 | A1 | both
    bool rectangle_variant = false;

    std::optional<GridSpec> grid_lambda;
    std::optional<GridSpec> grid_h;

    std::vector<double> sweep_beta, sweep_h, sweep_lambda, sweep_sigma;
    std::vector<std::size_t> sweep_particles;  // key "sweep_N"
    std::string sweep_task = "run";
};

namespace detail {

inline double parse_double(const std::string& field, std::string_view text) {
    const std::string s(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got \"" + s + "\"");
    }
    while (used < s.size() && (s[used] == ' ' || s[used] == '\t')) ++used;
    if (used != s.size())
        throw ConfigError(field, "trailing characters in number \"" + s + "\"");
    return v;
}

inline long long parse_int(const std::string& field, std::string_view text) {
    const double v = parse_double(field, text);
    const auto i = static_cast<long long>(v);
    if (static_cast<double>(i) != v)
        throw ConfigError(field, "expected an integer, got \"" + std::string(text) + "\"");
    return i;
}

inline std::uint64_t parse_u64(const std::string& field, std::string_view text) {
    const std::string s(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(field, "expected an unsigned integer, got \"" + s + "\"");
    return v;
}

inline bool parse_bool(const std::string& field, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(field, "expected true/false, got \"" + std::string(text) + "\"");
}

inline std::vector<double> parse_list(const std::string& field, std::string_view text) {
    std::vector<double> out;
    std::size_t start = 0;
    const std::string s(text);
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        const std::string item = s.substr(start, comma - start);
        if (!item.empty()) out.push_back(parse_double(field, item));
        start = comma + 1;
    }
    if (out.empty()) throw ConfigError(field, "expected a comma-separated list");
    return out;
}

inline GridSpec parse_grid(const std::string& field, std::string_view text) {
    const std::string s(text);
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw ConfigError(field, "expected min:max:count, got \"" + s + "\"");
    GridSpec g;
    g.min = parse_double(field, s.substr(0, c1));
    g.max = parse_double(field, s.substr(c1 + 1, c2 - c1 - 1));
    const auto n = parse_int(field, s.substr(c2 + 1));
    if (n < 1) throw ConfigError(field, "grid count must be >= 1");
    g.count = static_cast<std::size_t>(n);
    if (g.count > 1 && !(g.min < g.max))
        throw ConfigError(field, "grid needs min < max");
    return g;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace detail

inline Task parse_task(const std::string& text) {
    if (text == "run") return Task::Run;
    if (text == "stability") return Task::Stability;
    if (text == "moments") return Task::Moments;
    if (text == "laplace") return Task::Laplace;
    if (text == "certify") return Task::Certify;
    if (text == "sweep") return Task::Sweep;
    if (text == "verify-replay") return Task::VerifyReplay;
    throw ConfigError("task", "unknown task \"" + text + "\"");
}

/// Applies one key=value pair; throws ConfigError for unknown keys or
/// malformed values.
inline void apply_kv(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value) {
    using namespace detail;
    if (key == "task") cfg.task = parse_task(value);
    else if (key == "objective") cfg.objective = value;
    else if (key == "dim") {
        const auto v = parse_int(key, value);
        if (v < 1) throw ConfigError(key, "dim must be >= 1");
        cfg.dim = static_cast<std::size_t>(v);
    } else if (key == "poly_coeffs") cfg.poly_coeffs = parse_list(key, value);
    else if (key == "law") cfg.law = value;
    else if (key == "law_lower") cfg.law_lower = parse_list(key, value);
    else if (key == "law_upper") cfg.law_upper = parse_list(key, value);
    else if (key == "law_center") cfg.law_center = parse_list(key, value);
    else if (key == "law_radius") cfg.law_radius = parse_double(key, value);
    else if (key == "model") cfg.model = value;
    else if (key == "lambda") cfg.lambda = parse_double(key, value);
    else if (key == "sigma") cfg.sigma = parse_double(key, value);
    else if (key == "h") cfg.h = parse_double(key, value);
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "zeta") cfg.zeta = parse_double(key, value);
    else if (key == "beta") cfg.beta = parse_double(key, value);
    else if (key == "N") {
        const auto v = parse_int(key, value);
        if (v < 1) throw ConfigError(key, "N must be >= 1");
        cfg.particles = static_cast<std::size_t>(v);
    } else if (key == "replicas") {
        const auto v = parse_int(key, value);
        if (v < 1) throw ConfigError(key, "replicas must be >= 1");
        cfg.replicas = static_cast<std::size_t>(v);
    } else if (key == "max_steps") {
        const auto v = parse_int(key, value);
        if (v < 1) throw ConfigError(key, "max_steps must be >= 1");
        cfg.max_steps = static_cast<long>(v);
    } else if (key == "consensus_tol") cfg.consensus_tol = parse_double(key, value);
    else if (key == "record_noise") cfg.record_noise = parse_bool(key, value);
    else if (key == "verify_replay") cfg.verify_replay = parse_bool(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "out") cfg.out = value;
    else if (key == "threads") {
        const auto v = parse_int(key, value);
        if (v < 0) throw ConfigError(key, "threads must be >= 0 (0 = auto)");
        cfg.threads = static_cast<int>(v);
    } else if (key == "epsilon") cfg.epsilon = parse_double(key, value);
    else if (key == "delta") cfg.delta = parse_double(key, value);
    else if (key == "samples") {
        const auto v = parse_int(key, value);
        if (v < 2) throw ConfigError(key, "samples must be >= 2");
        cfg.samples = static_cast<std::size_t>(v);
    } else if (key == "beta_grid") cfg.beta_grid = parse_list(key, value);
    else if (key == "moments_steps") {
        const auto v = parse_int(key, value);
        if (v < 1) throw ConfigError(key, "moments_steps must be >= 1");
        cfg.moments_steps = static_cast<long>(v);
    } else if (key == "theorem") cfg.theorem = value;
    else if (key == "rectangle_variant") cfg.rectangle_variant = parse_bool(key, value);
    else if (key == "grid_lambda") cfg.grid_lambda = parse_grid(key, value);
    else if (key == "grid_h") cfg.grid_h = parse_grid(key, value);
    else if (key == "sweep_beta") cfg.sweep_beta = parse_list(key, value);
    else if (key == "sweep_h") cfg.sweep_h = parse_list(key, value);
    else if (key == "sweep_lambda") cfg.sweep_lambda = parse_list(key, value);
    else if (key == "sweep_sigma") cfg.sweep_sigma = parse_list(key, value);
    else if (key == "sweep_N") {
        cfg.sweep_particles.clear();
        for (double v : parse_list(key, value)) {
            if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
                throw ConfigError(key, "sweep_N entries must be positive integers");
            cfg.sweep_particles.push_back(static_cast<std::size_t>(v));
        }
    } else if (key == "sweep_task") cfg.sweep_task = value;
    else throw ConfigError(key, "unknown configuration key");
}

/// Semantic validation across fields.
inline void validate(const ExperimentConfig& cfg) {
    if (!(cfg.beta > 0.0)) throw ConfigError("beta", "beta must be positive");
    if (!(cfg.consensus_tol > 0.0))
        throw ConfigError("consensus_tol", "consensus_tol must be positive");

    if (cfg.model == "A" || cfg.model == "B" || cfg.model == "C") {
        if (!(cfg.lambda > 0.0)) throw ConfigError("lambda", "lambda must be positive");
        if (cfg.sigma < 0.0) throw ConfigError("sigma", "sigma must be nonnegative");
        if (!(cfg.h > 0.0)) throw ConfigError("h", "h must be positive");
    } else if (cfg.model == "generic") {
        if (!(cfg.zeta >= 0.0)) throw ConfigError("zeta", "zeta must be nonnegative");
    } else {
        throw ConfigError("model", "model must be A, B, C or generic");
    }

    if (cfg.objective == "polynomial") {
        if (cfg.poly_coeffs.empty())
            throw ConfigError("poly_coeffs", "polynomial objective needs coefficients");
    } else if (cfg.objective != "sphere_plus_one" &&
               cfg.objective != "quadratic_well" &&
               cfg.objective != "rastrigin_shifted" &&
               cfg.objective != "ackley_shifted") {
        throw ConfigError("objective", "unknown objective \"" + cfg.objective + "\"");
    }

    auto check_dims = [&](const char* field, const std::vector<double>& v) {
        if (v.size() != 1 && v.size() != cfg.dim)
            throw ConfigError(field, "expected 1 or dim entries");
    };
    if (cfg.law == "uniform_box") {
        check_dims("law_lower", cfg.law_lower);
        check_dims("law_upper", cfg.law_upper);
        const std::size_t n = std::max(cfg.law_lower.size(), cfg.law_upper.size());
        for (std::size_t l = 0; l < n; ++l) {
            const double lo = cfg.law_lower[cfg.law_lower.size() == 1 ? 0 : l];
            const double hi = cfg.law_upper[cfg.law_upper.size() == 1 ? 0 : l];
            if (!(lo < hi))
                throw ConfigError("law_lower", "box needs lower < upper");
        }
    } else if (cfg.law == "uniform_ball") {
        check_dims("law_center", cfg.law_center);
        if (!(cfg.law_radius > 0.0))
            throw ConfigError("law_radius", "radius must be positive");
    } else {
        throw ConfigError("law", "law must be uniform_box or uniform_ball");
    }

    if (cfg.task == Task::Certify) {
        if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
            throw ConfigError("epsilon", "epsilon must lie in (0, 1)");
        if (!(cfg.delta > 0.0)) throw ConfigError("delta", "delta must be positive");
        if (cfg.theorem != "3.2" && cfg.theorem != "A1" && cfg.theorem != "both")
            throw ConfigError("theorem", "theorem must be 3.2, A1 or both");
    }
    if (cfg.task == Task::Sweep) {
        const Task sub = parse_task(cfg.sweep_task);
        if (sub == Task::Sweep) throw ConfigError("sweep_task", "sweep cannot nest");
    }
    if (cfg.grid_lambda && !(cfg.grid_lambda->min > 0.0))
        throw ConfigError("grid_lambda", "lambda grid must be positive");
    if (cfg.grid_h && !(cfg.grid_h->min > 0.0))
        throw ConfigError("grid_h", "h grid must be positive");
    for (double b : cfg.beta_grid)
        if (!(b > 0.0)) throw ConfigError("beta_grid", "beta values must be positive");
    for (double v : cfg.sweep_beta)
        if (!(v > 0.0)) throw ConfigError("sweep_beta", "beta values must be positive");
    for (double v : cfg.sweep_h)
        if (!(v > 0.0)) throw ConfigError("sweep_h", "h values must be positive");
    for (double v : cfg.sweep_lambda)
        if (!(v > 0.0)) throw ConfigError("sweep_lambda", "lambda values must be positive");
    for (double v : cfg.sweep_sigma)
        if (v < 0.0) throw ConfigError("sweep_sigma", "sigma values must be nonnegative");
}

/// Reads a flat key=value file ('#' starts a comment).
inline std::vector<std::pair<std::string, std::string>> read_config_file(
    const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open " + path.string());
    std::vector<std::pair<std::string, std::string>> kvs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config", "line " + std::to_string(lineno) +
                                            ": expected key=value");
        kvs.emplace_back(detail::trim(trimmed.substr(0, eq)),
                         detail::trim(trimmed.substr(eq + 1)));
    }
    return kvs;
}

/// Defaults -> file -> overrides, then validation.
inline ExperimentConfig parse_config(
    const std::optional<std::filesystem::path>& file,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
    ExperimentConfig cfg;
    if (file)
        for (const auto& [k, v] : read_config_file(*file)) apply_kv(cfg, k, v);
    for (const auto& [k, v] : overrides) apply_kv(cfg, k, v);
    validate(cfg);
    return cfg;
}

inline Objective make_objective(const ExperimentConfig& cfg) {
    if (cfg.objective == "polynomial")
        return polynomial_objective(cfg.poly_coeffs, cfg.dim);
    return builtin(cfg.objective, cfg.dim);
}

inline InitialLaw make_law(const ExperimentConfig& cfg) {
    auto broadcast = [&](const std::vector<double>& v) {
        if (v.size() == cfg.dim) return v;
        return std::vector<double>(cfg.dim, v[0]);
    };
    if (cfg.law == "uniform_ball")
        return InitialLaw::uniform_ball(broadcast(cfg.law_center), cfg.law_radius);
    return InitialLaw::uniform_box(broadcast(cfg.law_lower),
                                   broadcast(cfg.law_upper));
}

inline NoiseScheme make_scheme_from(const ExperimentConfig& cfg) {
    if (cfg.model == "A") return make_scheme(SchemeKind::ModelA, cfg.lambda, cfg.sigma, cfg.h);
    if (cfg.model == "B") return make_scheme(SchemeKind::ModelB, cfg.lambda, cfg.sigma, cfg.h);
    if (cfg.model == "C") return make_scheme(SchemeKind::ModelC, cfg.lambda, cfg.sigma, cfg.h);
    return generic_scheme(cfg.gamma, cfg.zeta);
}

/// Unstable schemes are accepted (boundary experiments need them) but get
/// flagged in the artifacts.
inline std::vector<std::string> stability_warnings(const NoiseScheme& scheme) {
    std::vector<std::string> warnings;
    const StabilityReport report = check_stability(scheme);
    if (!report.l2_consensus) {
        std::string w = "scheme is not L2-stable: (1-gamma)^2 + zeta^2 >= 1";
        if (scheme.kind == SchemeKind::ModelA) {
            const double h_max =
                stability_boundary_modelA(scheme.params.lambda, scheme.params.sigma);
            w += " (Model A needs h < " + format_double(h_max) + ")";
        }
        warnings.push_back(w);
    }
    return warnings;
}

}  // namespace cbo
