#pragma once

#include "optexec/config.hpp"
#include "optexec/io.hpp"
#include "optexec/montecarlo.hpp"
#include "optexec/pricing.hpp"
#include "optexec/value_function.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace optexec::cli {

using json = nlohmann::ordered_json;

struct CommandResult {
    int exit_code = 0;
    json summary;
    std::vector<std::string> artifacts;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> names{"solve", "price", "decompose", "grid", "simulate", "implied-gamma"};
    return names;
}

inline json error_json(const std::exception& e) {
    std::string kind = "error";
    if (const auto* oe = dynamic_cast<const Error*>(&e)) kind = oe->kind();
    json j{{"error", {{"kind", kind}, {"message", e.what()}}}};
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
        if (ce->line() > 0) j["error"]["line"] = ce->line();
        if (!ce->field().empty()) j["error"]["field"] = ce->field();
    }
    if (const auto* ne = dynamic_cast<const NonConvergenceError*>(&e)) {
        j["error"]["last_residual"] = ne->last_residual();
        j["error"]["iterations"] = ne->iterations();
    }
    return j;
}

namespace detail {

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json to_json(const PriceDecomposition& d) {
    return json{{"q", d.q},
                {"S", d.S},
                {"horizon", std::isfinite(d.horizon) ? json(d.horizon) : json("inf")},
                {"mtm", d.mtm},
                {"pmi", d.pmi},
                {"lec", d.lec},
                {"necpr_T", opt(d.necpr_T)},
                {"necpr_inf", opt(d.necpr_inf)},
                {"price_T", opt(d.price_T)},
                {"price_inf", opt(d.price_inf)},
                {"premium_bp_T", opt(d.premium_bp_T)},
                {"premium_bp_inf", opt(d.premium_bp_inf)}};
}

class Output {
public:
    explicit Output(const std::string& dir) : dir_(dir) { std::filesystem::create_directories(dir_); }

    std::ofstream open(const std::string& name, CommandResult& res) const {
        const auto path = dir_ / name;
        std::ofstream os(path);
        if (!os) throw DomainError("cannot write '" + path.string() + "'");
        res.artifacts.push_back(path.string());
        return os;
    }
    void write_json(const std::string& name, const json& j, CommandResult& res) const {
        auto os = open(name, res);
        os << j.dump(2) << '\n';
    }

private:
    std::filesystem::path dir_;
};

inline CommandResult run_solve(const RunConfig& cfg, const Output& out) {
    CommandResult res;
    const auto& p = cfg.problem;
    const auto traj = newton_solve(p, cfg.solve);
    {
        auto os = out.open("trajectory.csv", res);
        io::write_trajectory_csv(os, traj);
    }
    res.summary = json{{"command", "solve"},
                       {"q0", p.q0},
                       {"T", p.T},
                       {"gamma", p.market.gamma},
                       {"n_steps", traj.grid.n_steps},
                       {"objective", eval_I(p, traj, 0.0)},
                       {"objective_with_psi", eval_I(p, traj, p.market.psi)},
                       {"max_residual", traj.max_residual},
                       {"iterations", traj.iterations}};
    out.write_json("solve_summary.json", res.summary, res);
    return res;
}

inline CommandResult run_price(const RunConfig& cfg, const Output& out) {
    CommandResult res;
    const auto& p = cfg.problem;
    const auto d = price_finite(p, cfg.solve);
    res.summary = json{{"command", "price"}, {"decomposition", to_json(d)}};
    if (p.volume.is_constant()) res.summary["infinite"] = to_json(price_infinite(p));
    if (!cfg.horizons.empty() && p.volume.is_constant() && p.q0 > 0.0) {
        const auto s = asymptotic_convergence(p, p.q0, cfg.horizons, cfg.solve);
        res.summary["horizon_sequence"] = json{{"horizons", s.horizons},
                                               {"necpr", s.values},
                                               {"gap_to_inf", s.gaps},
                                               {"necpr_inf", s.theta_inf},
                                               {"nonincreasing", s.nonincreasing()}};
    }
    out.write_json("price.json", res.summary, res);
    return res;
}

inline CommandResult run_decompose(const RunConfig& cfg, const Output& out) {
    CommandResult res;
    const auto& p = cfg.problem;
    const auto qs = cfg.q_list.empty() ? std::vector<double>{p.q0} : cfg.q_list;
    json rows = json::array();
    auto os = out.open("decompose.csv", res);
    os << "q,pmi,lec,necpr_inf,necpr_T,premium_bp\n";
    for (double q : qs) {
        if (!(q >= 0.0)) throw DomainError("decompose: q values must be >= 0");
        const auto d = price_finite(p.with_q0(q), cfg.solve);
        os << io::fmt(q) << ',' << io::fmt(d.pmi) << ',' << io::fmt(d.lec) << ','
           << (d.necpr_inf ? io::fmt(*d.necpr_inf) : std::string{}) << ',' << io::fmt(*d.necpr_T) << ','
           << io::fmt(*d.premium_bp_T) << '\n';
        rows.push_back(to_json(d));
    }
    res.summary = json{{"command", "decompose"}, {"rows", rows}};
    return res;
}

inline CommandResult run_grid(const RunConfig& cfg, const Output& out) {
    CommandResult res;
    const auto& p = cfg.problem;
    const double eps = cfg.grid.epsilon.value_or(0.05 * p.T);
    const double t_max = cfg.grid.t_max.value_or(std::min(0.9 * p.T, p.T - eps));
    const double q_max = cfg.grid.q_max.value_or(p.q0);
    auto build = [&](int nt, int nq) {
        return build_grid(p, uniform_nodes(0.0, t_max, nt), uniform_nodes(0.0, q_max, nq), cfg.solve, eps);
    };
    const auto g = build(cfg.grid.n_t, cfg.grid.n_q);
    {
        auto os = out.open("value_grid.csv", res);
        io::write_value_grid_csv(os, g);
    }
    const auto st = check_structure(g, p);
    auto prop = [](const PropertyCheck& c) { return json{{"checked", c.checked}, {"violations", c.violations}}; };
    res.summary = json{{"command", "grid"},
                       {"n_t", g.n_t()},
                       {"n_q", g.n_q()},
                       {"failed_cells", std::count(g.failed.begin(), g.failed.end(), 1)},
                       {"structure",
                        {{"monotone_t", prop(st.monotone_t)},
                         {"monotone_q", prop(st.monotone_q)},
                         {"convex_q", prop(st.convex_q)},
                         {"singularity_bound", prop(st.singularity_bound)},
                         {"tolerance", st.tolerance}}}};
    if (g.n_t() >= 3 && g.n_q() >= 3) {
        const auto hj = hj_residual(g, p);
        res.summary["hj_residual"] = json{{"max_abs", hj.max_abs},
                                          {"max_normalized", hj.max_normalized},
                                          {"at_t", g.t_nodes[hj.i_max]},
                                          {"at_q", g.q_nodes[hj.k_max]}};
        if (cfg.grid.refine) {
            const auto fine = build(2 * cfg.grid.n_t - 1, 2 * cfg.grid.n_q - 1);
            const auto hf = hj_residual(fine, p);
            res.summary["hj_residual_refined"] = json{{"max_abs", hf.max_abs}, {"max_normalized", hf.max_normalized}};
            res.summary["hj_refinement_decreases"] = hf.max_normalized < hj.max_normalized;
        }
    }
    out.write_json("hj_report.json", res.summary, res);
    return res;
}

inline CommandResult run_simulate(const RunConfig& cfg, const Output& out) {
    CommandResult res;
    const auto& p = cfg.problem;
    const auto traj = newton_solve(p, cfg.solve);
    auto sc = cfg.simulation;
    sc.keep_paths = cfg.dump_paths;
    const auto r = simulate_cash(p, traj, sc);
    res.summary = json{{"command", "simulate"},
                       {"n_paths", r.n_paths},
                       {"seed", sc.seed},
                       {"analytic", {{"mean", r.analytic_mean}, {"variance", r.analytic_variance}}},
                       {"empirical",
                        {{"mean", r.mean},
                         {"variance", r.variance},
                         {"se_mean", r.se_mean},
                         {"se_variance", r.se_variance},
                         {"excess_kurtosis", r.excess_kurtosis}}},
                       {"mean_error_in_se", r.se_mean > 0.0 ? (r.mean - r.analytic_mean) / r.se_mean : 0.0},
                       {"variance_ratio", r.analytic_variance > 0.0 ? r.variance / r.analytic_variance : 1.0}};
    out.write_json("simulate.json", res.summary, res);
    if (cfg.dump_paths) {
        auto os = out.open("paths.csv", res);
        os << "path,X_T\n";
        for (std::size_t i = 0; i < r.terminal_wealth.size(); ++i) os << i << ',' << io::fmt(r.terminal_wealth[i]) << '\n';
    }
    return res;
}

inline CommandResult run_implied_gamma(const RunConfig& cfg, const Output& out) {
    CommandResult res;
    if (!cfg.quoted_premium) throw ConfigError("implied-gamma needs pricing.quoted_premium", 0, "pricing.quoted_premium");
    const auto& p = cfg.problem;
    const double g = implied_gamma(p, *cfg.quoted_premium);
    res.summary = json{{"command", "implied-gamma"},
                       {"quoted_premium", *cfg.quoted_premium},
                       {"floor", pmi_integral(p.impact, p.q0) + p.market.psi * p.q0},
                       {"gamma", g}};
    out.write_json("implied_gamma.json", res.summary, res);
    return res;
}

}  // namespace detail

/// Runs one subcommand. Failures come back as exit code 1 with an error JSON summary.
inline CommandResult run_command(const std::string& cmd, const RunConfig& cfg) {
    try {
        const detail::Output out(cfg.out_dir);
        if (cmd == "solve") return detail::run_solve(cfg, out);
        if (cmd == "price") return detail::run_price(cfg, out);
        if (cmd == "decompose") return detail::run_decompose(cfg, out);
        if (cmd == "grid") return detail::run_grid(cfg, out);
        if (cmd == "simulate") return detail::run_simulate(cfg, out);
        if (cmd == "implied-gamma") return detail::run_implied_gamma(cfg, out);
        throw DomainError("unknown command '" + cmd + "'");
    } catch (const std::exception& e) {
        CommandResult res;
        res.exit_code = 1;
        res.summary = error_json(e);
        return res;
    }
}

}  // namespace optexec::cli
