#pragma once

#include "optexec/closed_forms.hpp"
#include "optexec/errors.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/legendre.hpp"
#include "optexec/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace optexec {

/// theta_T sampled on t_nodes x q_nodes, row-major in t.
struct ValueGrid {
    std::vector<double> t_nodes;
    std::vector<double> q_nodes;
    std::vector<double> values;
    std::vector<char> failed;  ///< 1 where the cell solve did not converge
    std::vector<std::string> failure_messages;
    double epsilon = 0.0;
    double horizon = 0.0;

    std::size_t n_t() const noexcept { return t_nodes.size(); }
    std::size_t n_q() const noexcept { return q_nodes.size(); }
    double& at(std::size_t i, std::size_t k) { return values[i * n_q() + k]; }
    double at(std::size_t i, std::size_t k) const { return values[i * n_q() + k]; }
    bool ok(std::size_t i, std::size_t k) const { return !failed[i * n_q() + k]; }
    bool all_ok() const { return std::none_of(failed.begin(), failed.end(), [](char c) { return c != 0; }); }
    double max_value() const {
        double m = 0.0;
        for (std::size_t c = 0; c < values.size(); ++c)
            if (!failed[c]) m = std::max(m, values[c]);
        return m;
    }
};

inline std::vector<double> uniform_nodes(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / (n - 1);
    if (n > 1) x.back() = b;
    return x;
}

/// theta_T(t, q) on the grid by the two-step approach (solve, then score with psi = 0).
/// Every cell uses the time step T / opts.n_steps, so rows share one lattice.
inline ValueGrid build_grid(const LiquidationProblem& prob, std::vector<double> t_nodes, std::vector<double> q_nodes,
                            const SolveOptions& opts = {}, double epsilon = -1.0) {
    if (epsilon < 0.0) epsilon = 0.05 * prob.T;
    if (epsilon < 0.01 * prob.T * (1.0 - 1e-12))
        throw DomainError("build_grid: epsilon must be at least 0.01 * T");
    if (t_nodes.empty() || q_nodes.empty()) throw DomainError("build_grid: empty node list");
    for (double t : t_nodes)
        if (!(t >= 0.0 && t <= prob.T - epsilon * (1.0 - 1e-12)))
            throw DomainError("build_grid: time nodes must lie in [0, T - epsilon]");
    for (double q : q_nodes)
        if (!(q >= 0.0)) throw DomainError("build_grid: inventory nodes must be >= 0");

    ValueGrid g;
    g.t_nodes = std::move(t_nodes);
    g.q_nodes = std::move(q_nodes);
    g.epsilon = epsilon;
    g.horizon = prob.T;
    g.values.assign(g.n_t() * g.n_q(), 0.0);
    g.failed.assign(g.n_t() * g.n_q(), 0);
    const double tau = prob.T / opts.n_steps;
    for (std::size_t i = 0; i < g.n_t(); ++i) {
        SolveOptions o = opts;
        o.n_steps = std::max(2, static_cast<int>(std::ceil((prob.T - g.t_nodes[i]) / tau - 1e-9)));
        for (std::size_t k = 0; k < g.n_q(); ++k) {
            if (g.q_nodes[k] == 0.0) continue;
            try {
                const auto traj = solve_from(prob, g.t_nodes[i], g.q_nodes[k], o);
                g.at(i, k) = eval_I(prob, traj, 0.0);
            } catch (const Error& e) {
                g.at(i, k) = std::numeric_limits<double>::quiet_NaN();
                g.failed[i * g.n_q() + k] = 1;
                g.failure_messages.push_back(e.what());
            }
        }
    }
    return g;
}

struct HjResidualReport {
    double max_abs = 0.0;
    double max_normalized = 0.0;
    std::size_t i_max = 0;  ///< location of the largest normalized residual
    std::size_t k_max = 0;
    std::size_t cells = 0;
};

/// Central-difference residual of -d_t theta - gamma sigma^2 q^2 / 2 + V_t H(d_q theta) on interior nodes.
inline HjResidualReport hj_residual(const ValueGrid& g, const LiquidationProblem& prob) {
    if (g.n_t() < 3 || g.n_q() < 3) throw DomainError("hj_residual: grid must be at least 3 x 3");
    const Hamiltonian ham = Hamiltonian::from(prob.cost);
    const double half_risk = 0.5 * prob.risk_rate();
    HjResidualReport r;
    for (std::size_t i = 1; i + 1 < g.n_t(); ++i)
        for (std::size_t k = 1; k + 1 < g.n_q(); ++k) {
            if (!(g.ok(i - 1, k) && g.ok(i + 1, k) && g.ok(i, k - 1) && g.ok(i, k + 1))) continue;
            const double dt = (g.at(i + 1, k) - g.at(i - 1, k)) / (g.t_nodes[i + 1] - g.t_nodes[i - 1]);
            const double dq = (g.at(i, k + 1) - g.at(i, k - 1)) / (g.q_nodes[k + 1] - g.q_nodes[k - 1]);
            const double q = g.q_nodes[k];
            const double vh = prob.volume.at(g.t_nodes[i]) * ham.h(dq);
            const double res = -dt - half_risk * q * q + vh;
            const double norm = std::abs(res) / (half_risk * q * q + std::abs(vh) + std::numeric_limits<double>::min());
            r.max_abs = std::max(r.max_abs, std::abs(res));
            if (norm > r.max_normalized) {
                r.max_normalized = norm;
                r.i_max = i;
                r.k_max = k;
            }
            ++r.cells;
        }
    return r;
}

struct PropertyCheck {
    bool checked = false;
    std::size_t violations = 0;
    bool passed() const { return violations == 0; }
};

struct StructureReport {
    PropertyCheck monotone_t;
    PropertyCheck monotone_q;
    PropertyCheck convex_q;
    PropertyCheck singularity_bound;
    double tolerance = 0.0;

    bool all_passed() const {
        return monotone_t.passed() && monotone_q.passed() && convex_q.passed() && singularity_bound.passed();
    }
};

/// Monotone in t and q, convex in q, and above the Jensen bound
/// V_lo (T-t) L(q / (V_hi (T-t))), cell-wise with tolerance 1e-9 * max value.
inline StructureReport check_structure(const ValueGrid& g, const LiquidationProblem& prob) {
    StructureReport r;
    r.tolerance = 1e-9 * g.max_value();
    const double tol = r.tolerance;

    r.monotone_t.checked = g.n_t() >= 2;
    for (std::size_t i = 0; i + 1 < g.n_t(); ++i)
        for (std::size_t k = 0; k < g.n_q(); ++k)
            if (g.ok(i, k) && g.ok(i + 1, k) && g.at(i + 1, k) < g.at(i, k) - tol) ++r.monotone_t.violations;

    r.monotone_q.checked = g.n_q() >= 2;
    if (r.monotone_q.checked)
        for (std::size_t i = 0; i < g.n_t(); ++i)
            for (std::size_t k = 0; k + 1 < g.n_q(); ++k)
                if (g.ok(i, k) && g.ok(i, k + 1) && g.at(i, k + 1) < g.at(i, k) - tol) ++r.monotone_q.violations;

    r.convex_q.checked = g.n_q() >= 3;
    if (r.convex_q.checked)
        for (std::size_t i = 0; i < g.n_t(); ++i)
            for (std::size_t k = 1; k + 1 < g.n_q(); ++k) {
                if (!(g.ok(i, k - 1) && g.ok(i, k) && g.ok(i, k + 1))) continue;
                const double h0 = g.q_nodes[k] - g.q_nodes[k - 1], h1 = g.q_nodes[k + 1] - g.q_nodes[k];
                // slope increase, scaled back to value units
                const double s0 = (g.at(i, k) - g.at(i, k - 1)) / h0;
                const double s1 = (g.at(i, k + 1) - g.at(i, k)) / h1;
                if ((s1 - s0) * 0.5 * (h0 + h1) < -tol) ++r.convex_q.violations;
            }

    r.singularity_bound.checked = true;
    const double v_lo = prob.volume.lo(), v_hi = prob.volume.hi();
    for (std::size_t i = 0; i < g.n_t(); ++i) {
        const double rem = prob.T - g.t_nodes[i];
        for (std::size_t k = 0; k < g.n_q(); ++k) {
            if (!g.ok(i, k)) continue;
            const double bound = v_lo * rem * eval_cost(prob.cost, g.q_nodes[k] / (v_hi * rem));
            if (g.at(i, k) < bound - tol) ++r.singularity_bound.violations;
        }
    }
    return r;
}

struct AsymptoticSequence {
    std::vector<double> horizons;
    std::vector<double> values;  ///< theta_{T_i}(0, q)
    std::vector<double> gaps;    ///< values - theta_inf
    double theta_inf = 0.0;

    bool nonincreasing(double tol = 0.0) const {
        for (std::size_t i = 1; i < values.size(); ++i)
            if (values[i] > values[i - 1] + tol) return false;
        return true;
    }
};

/// theta_{T_i}(0, q) along increasing horizons. The time step is held at
/// horizons[0] / n_steps so the sequence is not polluted by a coarsening grid.
inline AsymptoticSequence asymptotic_convergence(const LiquidationProblem& prob, double q,
                                                 const std::vector<double>& horizons, const SolveOptions& opts = {}) {
    if (!prob.volume.is_constant()) throw DomainError("asymptotic_convergence: needs a constant volume curve");
    if (horizons.empty()) throw DomainError("asymptotic_convergence: no horizons");
    for (std::size_t i = 0; i < horizons.size(); ++i)
        if (!(horizons[i] > 0.0) || (i > 0 && !(horizons[i] > horizons[i - 1])))
            throw DomainError("asymptotic_convergence: horizons must be positive and increasing");

    AsymptoticSequence s;
    s.horizons = horizons;
    s.theta_inf = theta_infinity(prob, q);
    const double tau = horizons.front() / opts.n_steps;
    for (double T : horizons) {
        double v = 0.0;
        if (q > 0.0) {
            SolveOptions o = opts;
            o.n_steps = std::max(opts.n_steps, static_cast<int>(std::ceil(T / tau - 1e-9)));
            const auto p = prob.with_horizon(T).with_q0(q);
            v = eval_I(p, newton_solve(p, o), 0.0);
        }
        s.values.push_back(v);
        s.gaps.push_back(v - s.theta_inf);
    }
    return s;
}

}  // namespace optexec
