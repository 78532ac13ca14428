#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "core.hpp"
#include "harness.hpp"
#include "presets.hpp"

namespace gdlab {

struct ConfigError : UsageError {
    using UsageError::UsageError;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline Regime parse_regime(const std::string& v) {
    if (v == "nonconvex") return Regime::nonconvex;
    if (v == "convex") return Regime::convex;
    if (v == "convex-interpolation") return Regime::convex_interpolation;
    if (v == "strongly-convex") return Regime::strongly_convex;
    if (v == "pl") return Regime::pl;
    throw ConfigError("regime: unknown value '" + v + "'");
}

inline LossFamily parse_family(const std::string& v) {
    if (v == "quadratic-point") return LossFamily::quadratic_point;
    if (v == "least-squares") return LossFamily::least_squares;
    if (v == "ridge") return LossFamily::ridge;
    if (v == "logistic") return LossFamily::logistic;
    if (v == "nonconvex-sigmoid-squared") return LossFamily::sigmoid_squared;
    throw ConfigError("family: unknown value '" + v + "'");
}

inline double parse_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": not a number: '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigError(key + ": not a non-negative integer: '" + v + "'");
    }
}

}  // namespace detail

// Flat key=value format.  '#' starts a comment; unknown keys are rejected.
// Documented keys: regime, family, d, n_grid, t_rule, schedule, schedule_c,
// reps, seed, population_m, out_dir.
inline ExperimentConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    static const char* known[] = {"regime",     "family", "d",    "n_grid",
                                  "t_rule",     "schedule", "schedule_c",
                                  "reps",       "seed",   "population_m",
                                  "out_dir"};
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        bool ok = false;
        for (const char* k : known)
            if (key == k) ok = true;
        if (!ok)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": unknown key '" + key + "'");
        if (kv.count(key))
            throw ConfigError("line " + std::to_string(lineno) +
                              ": duplicate key '" + key + "'");
        kv[key] = val;
    }

    if (!kv.count("regime")) throw ConfigError("regime: required key missing");
    const Regime regime = detail::parse_regime(kv["regime"]);
    ExperimentConfig cfg = preset_experiment(regime);

    LossFamily family = default_family(regime);
    if (kv.count("family")) family = detail::parse_family(kv["family"]);
    std::size_t d = default_dimension(regime);
    if (kv.count("d")) {
        d = std::size_t(detail::parse_u64("d", kv["d"]));
        if (d < 1) throw ConfigError("d: must be >= 1");
    }
    if (kv.count("family") || kv.count("d")) {
        cfg.dist = default_distribution(family, d);
        cfg.model = make_model(cfg.dist, family == LossFamily::ridge ? 0.1 : 0.0);
        cfg.schedule = default_schedule(regime, cfg.model);
    }

    // regime/family compatibility
    switch (regime) {
        case Regime::nonconvex:
            if (family != LossFamily::sigmoid_squared)
                throw ConfigError("family: nonconvex regime requires "
                                  "nonconvex-sigmoid-squared");
            break;
        case Regime::convex:
        case Regime::convex_interpolation:
            if (family == LossFamily::sigmoid_squared)
                throw ConfigError("family: convex regimes require a convex family");
            break;
        case Regime::strongly_convex:
            if (!cfg.model.gamma || *cfg.model.gamma <= 0.0)
                throw ConfigError(
                    "family: strongly-convex regime requires a family with "
                    "gamma > 0");
            break;
        case Regime::pl:
            if (!cfg.model.mu)
                throw ConfigError("family: pl regime requires a family with mu");
            break;
    }

    if (kv.count("n_grid")) {
        std::vector<std::size_t> grid;
        std::istringstream gs(kv["n_grid"]);
        std::string tok;
        while (std::getline(gs, tok, ',')) {
            tok = detail::trim(tok);
            if (tok.empty()) continue;
            grid.push_back(std::size_t(detail::parse_u64("n_grid", tok)));
        }
        if (grid.empty()) throw ConfigError("n_grid: empty grid");
        for (std::size_t k = 1; k < grid.size(); ++k)
            if (grid[k] <= grid[k - 1])
                throw ConfigError("n_grid: must be strictly increasing");
        cfg.n_grid = grid;
    }

    if (kv.count("t_rule")) {
        const std::string v = kv["t_rule"];
        if (v.rfind("fixed:", 0) == 0) {
            cfg.t_rule = TRule::fixed;
            cfg.fixed_T = std::size_t(detail::parse_u64("t_rule", v.substr(6)));
        } else if (v == "sqrt-n") {
            cfg.t_rule = TRule::sqrt_n;
        } else if (v == "linear-n") {
            cfg.t_rule = TRule::linear_n;
        } else if (v == "log-n") {
            cfg.t_rule = TRule::log_n;
        } else if (v == "n-over-log-n") {
            cfg.t_rule = TRule::n_over_log_n;
        } else {
            throw ConfigError("t_rule: unknown value '" + v + "'");
        }
    }
    if (cfg.t_rule == TRule::log_n && regime != Regime::strongly_convex)
        throw ConfigError(
            "t_rule: log-n is tied to the strongly-convex iteration budget");

    if (kv.count("schedule")) {
        const std::string v = kv["schedule"];
        if (v.rfind("constant:", 0) == 0) {
            cfg.schedule =
                StepSchedule::constant(detail::parse_real("schedule", v.substr(9)));
        } else if (v.rfind("inverse-t:", 0) == 0) {
            cfg.schedule = StepSchedule::inverse_t(
                detail::parse_real("schedule", v.substr(10)));
        } else if (v == "constant") {
            cfg.schedule = StepSchedule::constant(1.0);  // overridden by schedule_c
        } else if (v == "inverse-t") {
            cfg.schedule = StepSchedule::inverse_t(1.0);
        } else if (v == "half-inv-beta") {
            cfg.schedule = StepSchedule::half_inv_beta();
        } else if (v == "sc-optimal") {
            cfg.schedule = StepSchedule::sc_optimal();
        } else {
            throw ConfigError("schedule: unknown value '" + v + "'");
        }
    }
    if (kv.count("schedule_c")) {
        const double c = detail::parse_real("schedule_c", kv["schedule_c"]);
        if (cfg.schedule.kind != ScheduleKind::constant &&
            cfg.schedule.kind != ScheduleKind::inverse_t)
            throw ConfigError(
                "schedule_c: only meaningful for constant or inverse-t schedules");
        if (c <= 0.0) throw ConfigError("schedule_c: must be positive");
        cfg.schedule.c = c;
    }
    if (cfg.schedule.kind == ScheduleKind::sc_optimal && !cfg.model.gamma)
        throw ConfigError("schedule: sc-optimal requires a family with gamma");
    if (regime == Regime::nonconvex) {
        if (cfg.schedule.kind != ScheduleKind::inverse_t)
            throw ConfigError("schedule: nonconvex regime requires inverse-t");
        if (cfg.model.beta * cfg.schedule.c >= 1.0)
            throw ConfigError("schedule: nonconvex regime requires beta*C < 1");
    }

    if (kv.count("reps")) {
        cfg.reps = std::size_t(detail::parse_u64("reps", kv["reps"]));
        if (cfg.reps < 1) throw ConfigError("reps: must be >= 1");
    }
    if (kv.count("seed")) cfg.seed = detail::parse_u64("seed", kv["seed"]);
    if (kv.count("population_m"))
        cfg.population_m =
            std::size_t(detail::parse_u64("population_m", kv["population_m"]));
    if (kv.count("out_dir")) cfg.out_dir = kv["out_dir"];

    return cfg;
}

inline ExperimentConfig parse_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "regime=" << regime_name(cfg.regime) << "\n";
    out << "family=" << family_name(cfg.model.family) << "\n";
    out << "d=" << cfg.dist.d << "\n";
    out << "n_grid=";
    for (std::size_t k = 0; k < cfg.n_grid.size(); ++k)
        out << (k ? "," : "") << cfg.n_grid[k];
    out << "\n";
    out << "t_rule=";
    if (cfg.t_rule == TRule::fixed)
        out << "fixed:" << cfg.fixed_T;
    else
        out << t_rule_name(cfg.t_rule);
    out << "\n";
    out << "schedule=";
    char buf[64];
    switch (cfg.schedule.kind) {
        case ScheduleKind::constant:
            std::snprintf(buf, sizeof(buf), "constant:%.17g", cfg.schedule.c);
            out << buf;
            break;
        case ScheduleKind::inverse_t:
            std::snprintf(buf, sizeof(buf), "inverse-t:%.17g", cfg.schedule.c);
            out << buf;
            break;
        case ScheduleKind::half_inv_beta:
            out << "half-inv-beta";
            break;
        case ScheduleKind::sc_optimal:
            out << "sc-optimal";
            break;
        case ScheduleKind::inverse_t_offset:
            throw UsageError("serialize_config: offset schedule is not a config value");
    }
    out << "\n";
    out << "reps=" << cfg.reps << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "population_m=" << cfg.population_m << "\n";
    out << "out_dir=" << cfg.out_dir << "\n";
    return out.str();
}

}  // namespace gdlab
