#include "optexec/cli.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <sstream>

namespace {

std::vector<double> parse_list(const std::string& s, const char* flag) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw optexec::ConfigError(std::string(flag) + ": '" + item + "' is not a number", 0, flag);
        out.push_back(v);
    }
    if (out.empty()) throw optexec::ConfigError(std::string(flag) + ": empty list", 0, flag);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal liquidation curves and block trade pricing"};
    app.require_subcommand(1, 1);

    std::string config_path, out_dir, q_list, horizons;
    std::optional<int> n_steps;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "problem configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--out-dir", out_dir, "directory for CSV/JSON artifacts (overrides output.dir)");
    app.add_option("--n-steps", n_steps, "time steps of the discrete scheme")->check(CLI::Range(2, 100000000));
    app.add_option("--seed", seed, "Monte Carlo seed");
    app.add_option("--q-list", q_list, "comma separated inventories for decompose");
    app.add_option("--horizons", horizons, "comma separated horizons for the price convergence sequence");

    for (const auto& name : optexec::cli::commands()) app.add_subcommand(name);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    optexec::cli::CommandResult res;
    try {
        auto cfg = optexec::parse_config(std::filesystem::path(config_path));
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (n_steps) cfg.solve.n_steps = *n_steps;
        if (seed) cfg.simulation.seed = *seed;
        if (!q_list.empty()) cfg.q_list = parse_list(q_list, "--q-list");
        if (!horizons.empty()) cfg.horizons = parse_list(horizons, "--horizons");
        res = optexec::cli::run_command(cmd, cfg);
    } catch (const std::exception& e) {
        res.exit_code = 1;
        res.summary = optexec::cli::error_json(e);
    }

    if (res.exit_code != 0) {
        std::cout << res.summary.dump(2) << '\n';
        return res.exit_code;
    }
    res.summary["artifacts"] = res.artifacts;
    std::cout << res.summary.dump(2) << '\n';
    return 0;
}
