#pragma once

#include "optexec/errors.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/value_function.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace optexec::io {

/// Round-trip float formatting (17 significant digits).
inline std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// `t,q,v,p`, one row per node; row 0 leaves v empty since v_j covers (t_{j-1}, t_j].
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,q,v,p\n";
    const int n = traj.grid.n_steps;
    for (int j = 0; j <= n; ++j) {
        os << fmt(traj.grid.time(j)) << ',' << fmt(traj.q[j]) << ',';
        if (j > 0) os << fmt(traj.v[j - 1]);
        os << ',' << fmt(traj.p[j]) << '\n';
    }
}

inline Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DomainError("trajectory csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,q,v,p") throw DomainError("trajectory csv: expected header 't,q,v,p'");
    std::vector<double> t, q, p;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (line.back() == ',') cols.emplace_back();
        if (cols.size() != 4) throw DomainError("trajectory csv: line " + std::to_string(lineno) + " needs 4 columns");
        try {
            t.push_back(std::stod(cols[0]));
            q.push_back(std::stod(cols[1]));
            p.push_back(std::stod(cols[3]));
        } catch (const std::exception&) {
            throw DomainError("trajectory csv: malformed number on line " + std::to_string(lineno));
        }
    }
    if (t.size() < 3) throw DomainError("trajectory csv: need at least 3 nodes");
    Trajectory traj;
    traj.grid = Grid{t.front(), t.back(), static_cast<int>(t.size()) - 1};
    const double tau = traj.grid.tau();
    for (std::size_t j = 0; j < t.size(); ++j)
        if (std::abs(t[j] - traj.grid.time(static_cast<int>(j))) > 1e-9 * std::max(1.0, std::abs(t.back())) + 1e-6 * tau)
            throw DomainError("trajectory csv: times are not a uniform grid");
    traj.q = std::move(q);
    traj.p = std::move(p);
    traj.refresh_speeds();
    return traj;
}

/// Rows are times, columns inventories; the header row lists the q nodes.
inline void write_value_grid_csv(std::ostream& os, const ValueGrid& g) {
    os << "t\\q";
    for (double q : g.q_nodes) os << ',' << fmt(q);
    os << '\n';
    for (std::size_t i = 0; i < g.n_t(); ++i) {
        os << fmt(g.t_nodes[i]);
        for (std::size_t k = 0; k < g.n_q(); ++k) os << ',' << fmt(g.at(i, k));
        os << '\n';
    }
}

}  // namespace optexec::io
