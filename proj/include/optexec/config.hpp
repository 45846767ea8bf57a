#pragma once

#include "optexec/errors.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/market_model.hpp"
#include "optexec/montecarlo.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace optexec {

struct GridConfig {
    int n_t = 21;
    int n_q = 21;
    std::optional<double> t_max;    ///< defaults to min(0.9 T, T - epsilon)
    std::optional<double> q_max;    ///< defaults to q0
    std::optional<double> epsilon;  ///< defaults to 0.05 T
    bool refine = false;            ///< also report the residual on a 2x refined grid
};

struct RunConfig {
    LiquidationProblem problem;
    SolveOptions solve;
    std::string out_dir = ".";
    std::vector<double> q_list;
    std::vector<double> horizons;
    std::optional<double> quoted_premium;
    GridConfig grid;
    SimulationConfig simulation;
    bool dump_paths = false;
};

namespace config_detail {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

class Table {
public:
    void add(const std::string& key, std::string value, int line) {
        if (entries_.count(key)) throw ConfigError("duplicate key '" + key + "'", line, key);
        entries_[key] = Entry{std::move(value), line, false};
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string str(const std::string& key) {
        auto& e = get(key);
        return e.value;
    }
    std::optional<std::string> opt_str(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return str(key);
    }

    double num(const std::string& key) { return to_number(get(key), key); }
    std::optional<double> opt_num(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return num(key);
    }

    long long integer(const std::string& key) {
        auto& e = get(key);
        const double d = to_number(e, key);
        if (d != std::floor(d)) throw ConfigError("'" + key + "' must be an integer", e.line, key);
        return static_cast<long long>(d);
    }

    bool boolean(const std::string& key) {
        auto& e = get(key);
        if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
        if (e.value == "false" || e.value == "0" || e.value == "no") return false;
        throw ConfigError("'" + key + "' must be true or false", e.line, key);
    }

    std::vector<double> list(const std::string& key) {
        auto& e = get(key);
        std::vector<double> out;
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            Entry tmp{trim(item), e.line, true};
            out.push_back(to_number(tmp, key));
        }
        return out;
    }

    void require(const std::string& key) const {
        if (!has(key)) throw ConfigError("missing required key '" + key + "'", 0, key);
    }

    void check_all_used() const {
        for (const auto& [k, e] : entries_)
            if (!e.used) throw ConfigError("unknown key '" + k + "'", e.line, k);
    }

private:
    Entry& get(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'", 0, key);
        it->second.used = true;
        return it->second;
    }

    static double to_number(const Entry& e, const std::string& key) {
        try {
            std::size_t used = 0;
            const double d = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument(key);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("'" + key + "' is not a number: '" + e.value + "'", e.line, key);
        }
    }

    std::map<std::string, Entry> entries_;
};

inline Table tokenize(std::istream& in) {
    Table t;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", lineno);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno);
        if (value.empty()) throw ConfigError("empty value for '" + key + "'", lineno, key);
        t.add(section.empty() ? key : section + "." + key, value, lineno);
    }
    return t;
}

}  // namespace config_detail

/// Parses the nested key-value format:
///
///     [market]
///     sigma = 0.5        # or, outside any section: market.sigma = 0.5
///
/// Unknown keys are errors. Relative file paths resolve against `base_dir`.
inline RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".") {
    auto t = config_detail::tokenize(in);
    RunConfig cfg;
    auto& p = cfg.problem;

    for (const char* k : {"problem.q0", "problem.T", "market.S0", "market.sigma", "market.gamma"}) t.require(k);
    p.q0 = t.num("problem.q0");
    p.T = t.num("problem.T");
    p.market.S0 = t.num("market.S0");
    p.market.sigma = t.num("market.sigma");
    p.market.gamma = t.num("market.gamma");
    p.market.psi = t.opt_num("market.psi").value_or(0.0);

    const std::string cost_model = t.opt_str("cost.model").value_or("power_law");
    if (cost_model != "power_law") throw ConfigError("cost.model must be 'power_law'", 0, "cost.model");
    t.require("cost.eta");
    t.require("cost.phi");
    p.cost = ExecutionCostModel::power_law(t.num("cost.eta"), t.num("cost.phi"));

    const std::string impact_model = t.opt_str("impact.model").value_or(t.has("impact.k") ? "power_law" : "none");
    if (impact_model == "power_law") {
        t.require("impact.k");
        p.impact = PermanentImpactModel::power_law(t.num("impact.k"), t.opt_num("impact.beta").value_or(1.0));
    } else if (impact_model == "none") {
        p.impact = PermanentImpactModel::none();
    } else {
        throw ConfigError("impact.model must be 'power_law' or 'none'", 0, "impact.model");
    }

    const std::string vol_model = t.opt_str("volume.model").value_or("constant");
    if (vol_model == "constant") {
        t.require("volume.V");
        p.volume = VolumeCurve::constant(t.num("volume.V"));
    } else if (vol_model == "csv") {
        t.require("volume.file");
        std::filesystem::path f = t.str("volume.file");
        if (f.is_relative()) f = base_dir / f;
        if (!(p.T > 0.0)) throw ConfigError("T must be > 0", 0, "T");
        p.volume = load_volume_csv(f.string(), p.T);
    } else if (vol_model == "knots") {
        t.require("volume.times");
        t.require("volume.volumes");
        const auto ts = t.list("volume.times");
        const auto vs = t.list("volume.volumes");
        if (ts.size() != vs.size())
            throw ConfigError("volume.times and volume.volumes differ in length", 0, "volume.volumes");
        std::vector<VolumeKnot> knots;
        for (std::size_t i = 0; i < ts.size(); ++i) knots.push_back({ts[i], vs[i]});
        p.volume = VolumeCurve::piecewise_linear(std::move(knots));
    } else {
        throw ConfigError("volume.model must be 'constant', 'csv' or 'knots'", 0, "volume.model");
    }

    if (t.has("solver.n_steps")) cfg.solve.n_steps = static_cast<int>(t.integer("solver.n_steps"));
    cfg.solve.newton_tol = t.opt_num("solver.newton_tol");
    if (t.has("solver.max_iter")) cfg.solve.max_iter = static_cast<int>(t.integer("solver.max_iter"));
    if (t.has("solver.damping")) cfg.solve.damping = static_cast<int>(t.integer("solver.damping"));
    if (auto ls = t.opt_str("solver.linear_solve")) {
        if (*ls == "auto")
            cfg.solve.linear_solve = LinearSolve::Auto;
        else if (*ls == "shooting")
            cfg.solve.linear_solve = LinearSolve::AffineShooting;
        else if (*ls == "tridiagonal")
            cfg.solve.linear_solve = LinearSolve::Tridiagonal;
        else
            throw ConfigError("solver.linear_solve must be auto, shooting or tridiagonal", 0, "solver.linear_solve");
    }

    if (t.has("pricing.q_list")) cfg.q_list = t.list("pricing.q_list");
    if (t.has("pricing.horizons")) cfg.horizons = t.list("pricing.horizons");
    cfg.quoted_premium = t.opt_num("pricing.quoted_premium");

    if (t.has("grid.n_t")) cfg.grid.n_t = static_cast<int>(t.integer("grid.n_t"));
    if (t.has("grid.n_q")) cfg.grid.n_q = static_cast<int>(t.integer("grid.n_q"));
    cfg.grid.t_max = t.opt_num("grid.t_max");
    cfg.grid.q_max = t.opt_num("grid.q_max");
    cfg.grid.epsilon = t.opt_num("grid.epsilon");
    if (t.has("grid.refine")) cfg.grid.refine = t.boolean("grid.refine");

    if (t.has("simulation.n_paths"))
        cfg.simulation.n_paths = static_cast<std::size_t>(t.integer("simulation.n_paths"));
    if (t.has("simulation.n_substeps")) cfg.simulation.n_substeps = static_cast<int>(t.integer("simulation.n_substeps"));
    if (t.has("simulation.seed")) cfg.simulation.seed = static_cast<std::uint64_t>(t.integer("simulation.seed"));
    if (t.has("simulation.threads")) cfg.simulation.threads = static_cast<unsigned>(t.integer("simulation.threads"));
    if (t.has("simulation.dump_paths")) cfg.dump_paths = t.boolean("simulation.dump_paths");

    if (auto d = t.opt_str("output.dir")) cfg.out_dir = *d;

    t.check_all_used();

    if (cfg.solve.n_steps < 2) throw ConfigError("solver.n_steps must be >= 2", 0, "solver.n_steps");
    if (cfg.solve.max_iter < 1) throw ConfigError("solver.max_iter must be >= 1", 0, "solver.max_iter");
    if (cfg.solve.damping < 0) throw ConfigError("solver.damping must be >= 0", 0, "solver.damping");
    if (cfg.solve.newton_tol && !(*cfg.solve.newton_tol > 0.0))
        throw ConfigError("solver.newton_tol must be > 0", 0, "solver.newton_tol");
    if (cfg.simulation.n_substeps < 1)
        throw ConfigError("simulation.n_substeps must be >= 1", 0, "simulation.n_substeps");
    if (cfg.grid.n_t < 1 || cfg.grid.n_q < 1) throw ConfigError("grid sizes must be >= 1", 0, "grid.n_t");

    const auto report = validate(p);
    if (!report.ok()) {
        const auto f = report.failures().front();
        throw ConfigError("invalid problem: " + f.name + ": " + f.detail, 0, f.name);
    }
    return cfg;
}

inline RunConfig parse_config_string(const std::string& text, const std::filesystem::path& base_dir = ".") {
    std::istringstream in(text);
    return parse_config(in, base_dir);
}

inline RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

}  // namespace optexec
