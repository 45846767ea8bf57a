#include "fixtures.hpp"
#include "optexec/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace optexec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("optexec_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig reference_config(const fs::path& out) {
    auto cfg = parse_config(fs::path(OPTEXEC_CONFIG_DIR) / "reference.ini");
    cfg.out_dir = out.string();
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_binary(const std::string& args, const fs::path& stdout_file) {
    const std::string cmd = std::string(OPTEXEC_CLI) + " " + args + " > " + stdout_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Cli, SolveWritesTrajectoryAndSummary) {
    const auto dir = scratch("solve");
    const auto res = cli::run_command("solve", reference_config(dir));
    ASSERT_EQ(res.exit_code, 0) << res.summary.dump();
    ASSERT_TRUE(fs::exists(dir / "trajectory.csv"));
    ASSERT_TRUE(fs::exists(dir / "solve_summary.json"));
    EXPECT_EQ(res.summary["iterations"].get<int>() > 0, true);

    std::ifstream in(dir / "trajectory.csv");
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    EXPECT_EQ(header, "t,q,v,p");
    EXPECT_EQ(first.substr(0, first.find(",,")), "0,500000");
}

TEST(Cli, TrajectoryCsvRoundTrip) {
    const auto dir = scratch("roundtrip");
    const auto cfg = reference_config(dir);
    const auto res = cli::run_command("solve", cfg);
    ASSERT_EQ(res.exit_code, 0);
    std::ifstream in(dir / "trajectory.csv");
    const auto traj = io::read_trajectory_csv(in);
    const double rescored = eval_I(cfg.problem, traj, 0.0);
    const double reported = res.summary["objective"].get<double>();
    EXPECT_NEAR(rescored, reported, 1e-9 * reported);
    EXPECT_NEAR(eval_I(cfg.problem, traj, cfg.problem.market.psi), res.summary["objective_with_psi"].get<double>(),
                1e-9 * reported);
}

TEST(Cli, TrajectoriesOrderedByRiskAversion) {
    std::vector<Trajectory> ts;
    for (double g : {5e-7, 1e-6, 2e-6}) {
        const auto dir = scratch("gamma" + std::to_string(ts.size()));
        auto cfg = reference_config(dir);
        cfg.problem.market.gamma = g;
        ASSERT_EQ(cli::run_command("solve", cfg).exit_code, 0);
        std::ifstream in(dir / "trajectory.csv");
        ts.push_back(io::read_trajectory_csv(in));
    }
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
        for (std::size_t j = 0; j < ts[i].q.size(); ++j) EXPECT_LE(ts[i + 1].q[j], ts[i].q[j] + 1e-9 * 5e5);
}

TEST(Cli, DecomposeTable) {
    const auto dir = scratch("decompose");
    auto cfg = reference_config(dir);
    ASSERT_EQ(cli::run_command("decompose", cfg).exit_code, 0);
    std::ifstream in(dir / "decompose.csv");
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "q,pmi,lec,necpr_inf,necpr_T,premium_bp");
    // q, pmi, lec, necpr_inf
    const double expected[3][4] = {{250000, 7187, 1000, 2003}, {500000, 24175, 2000, 6915}, {1000000, 81316, 4000, 23881}};
    for (const auto& row : expected) {
        ASSERT_TRUE(std::getline(in, line));
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(std::stod(c));
        ASSERT_EQ(cols.size(), 6u);
        EXPECT_EQ(cols[0], row[0]);
        for (int k = 1; k < 4; ++k) EXPECT_NEAR(cols[k], row[k], 0.02 * row[k]);
        const auto d = price_finite(cfg.problem.with_q0(row[0]), cfg.solve);
        EXPECT_NEAR(cols[4], *d.necpr_T, 1e-12 * cols[4]);
        EXPECT_NEAR(cols[5], *d.premium_bp_T, 1e-12 * cols[5]);
    }
}

TEST(Cli, PriceZeroBlock) {
    const auto dir = scratch("price0");
    auto cfg = reference_config(dir);
    cfg.problem.q0 = 0.0;
    cfg.horizons.clear();
    const auto res = cli::run_command("price", cfg);
    ASSERT_EQ(res.exit_code, 0) << res.summary.dump();
    const auto& d = res.summary["decomposition"];
    for (const char* k : {"mtm", "pmi", "lec", "necpr_T", "necpr_inf", "price_T", "premium_bp_T"})
        EXPECT_EQ(d[k].get<double>(), 0.0) << k;
}

TEST(Cli, PriceWithHorizonSequence) {
    const auto dir = scratch("price");
    const auto res = cli::run_command("price", reference_config(dir));
    ASSERT_EQ(res.exit_code, 0);
    EXPECT_TRUE(res.summary["horizon_sequence"]["nonincreasing"].get<bool>());
    EXPECT_EQ(res.summary["infinite"]["horizon"], "inf");
    EXPECT_TRUE(fs::exists(dir / "price.json"));
}

TEST(Cli, GridReport) {
    const auto dir = scratch("grid");
    auto cfg = reference_config(dir);
    cfg.grid.n_t = cfg.grid.n_q = 7;
    cfg.grid.refine = true;
    const auto res = cli::run_command("grid", cfg);
    ASSERT_EQ(res.exit_code, 0) << res.summary.dump();
    EXPECT_EQ(res.summary["failed_cells"].get<int>(), 0);
    EXPECT_TRUE(res.summary["hj_refinement_decreases"].get<bool>());
    EXPECT_EQ(res.summary["structure"]["convex_q"]["violations"].get<int>(), 0);
    std::ifstream in(dir / "value_grid.csv");
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("t\\q,0,", 0), 0u);
}

TEST(Cli, SimulateAndImpliedGamma) {
    const auto dir = scratch("sim");
    auto cfg = reference_config(dir);
    cfg.simulation.n_paths = 5000;
    cfg.dump_paths = true;
    const auto res = cli::run_command("simulate", cfg);
    ASSERT_EQ(res.exit_code, 0);
    EXPECT_LT(std::abs(res.summary["mean_error_in_se"].get<double>()), 4.0);
    EXPECT_TRUE(fs::exists(dir / "paths.csv"));

    cfg.quoted_premium = 24175.305598412531 + 2000.0 + theta_infinity(cfg.problem.with_gamma(2e-6), 5e5);
    const auto ig = cli::run_command("implied-gamma", cfg);
    ASSERT_EQ(ig.exit_code, 0);
    EXPECT_NEAR(ig.summary["gamma"].get<double>(), 2e-6, 1e-12);
}

TEST(Cli, ErrorsAreMachineReadable) {
    const auto dir = scratch("errors");
    auto cfg = reference_config(dir);
    auto res = cli::run_command("bogus", cfg);
    EXPECT_EQ(res.exit_code, 1);
    EXPECT_EQ(res.summary["error"]["kind"], "domain_error");

    cfg.quoted_premium = 100.0;
    res = cli::run_command("implied-gamma", cfg);
    EXPECT_EQ(res.exit_code, 1);
    EXPECT_EQ(res.summary["error"]["kind"], "no_solution");

    cfg.solve.max_iter = 1;
    res = cli::run_command("solve", cfg);
    EXPECT_EQ(res.exit_code, 1);
    EXPECT_EQ(res.summary["error"]["kind"], "non_convergence");
    EXPECT_TRUE(res.summary["error"].contains("last_residual"));
}

TEST(CliBinary, ExitCodesAndErrorJson) {
    const auto dir = scratch("binary");
    const auto bad = dir / "bad.ini";
    std::ofstream(bad) << "[problem]\nq0 = 1\nT = 1\nbogus = 2\n";
    EXPECT_EQ(run_binary("--config " + bad.string() + " solve", dir / "out.txt"), 1);
    const auto j = nlohmann::json::parse(slurp(dir / "out.txt"));
    EXPECT_EQ(j["error"]["kind"], "config_error");

    const std::string ref = std::string(OPTEXEC_CONFIG_DIR) + "/reference.ini";
    EXPECT_EQ(run_binary("--config " + ref + " --out-dir " + (dir / "o").string() + " --q-list 1e5,2e5 decompose",
                         dir / "out2.txt"),
              0);
    EXPECT_EQ(nlohmann::json::parse(slurp(dir / "out2.txt"))["rows"].size(), 2u);
    EXPECT_NE(run_binary("--config " + ref + " --q-list 1e5,abc decompose", dir / "out3.txt"), 0);
}

TEST(CliBinary, ByteIdenticalReruns) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    const std::string ref = std::string(OPTEXEC_CONFIG_DIR) + "/reference.ini";
    for (const auto& dir : {a, b}) {
        const std::string base = "--config " + ref + " --out-dir " + dir.string() + " --seed 5 --n-steps 300 ";
        ASSERT_EQ(run_binary(base + "solve", dir / "solve.out"), 0);
        ASSERT_EQ(run_binary(base + "decompose", dir / "decompose.out"), 0);
    }
    for (const char* f : {"trajectory.csv", "solve_summary.json", "decompose.csv"})
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    auto cfg = reference_config(a);
    cfg.simulation.n_paths = 3000;
    cfg.dump_paths = true;
    cfg.out_dir = a.string();
    ASSERT_EQ(cli::run_command("simulate", cfg).exit_code, 0);
    cfg.out_dir = b.string();
    ASSERT_EQ(cli::run_command("simulate", cfg).exit_code, 0);
    EXPECT_EQ(slurp(a / "paths.csv"), slurp(b / "paths.csv"));
    EXPECT_EQ(slurp(a / "simulate.json"), slurp(b / "simulate.json"));
}
