#pragma once

#include "optexec/errors.hpp"
#include "optexec/legendre.hpp"
#include "optexec/market_model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace optexec {

/// Uniform time grid t_j = start + j * tau on [start, end].
struct Grid {
    double start = 0.0;
    double end = 1.0;
    int n_steps = 2;

    double tau() const noexcept { return (end - start) / n_steps; }
    double time(int j) const noexcept { return j == n_steps ? end : start + j * tau(); }
    int nodes() const noexcept { return n_steps + 1; }
};

/// Discrete optimal pair (q_j, p_j) plus the per-interval speed.
/// `v[j]` is the selling speed over (t_j, t_{j+1}], j = 0..n_steps-1.
struct Trajectory {
    Grid grid;
    std::vector<double> q;
    std::vector<double> p;
    std::vector<double> v;
    int iterations = 0;
    double max_residual = 0.0;

    double q_start() const { return q.front(); }

    void refresh_speeds() {
        v.resize(grid.n_steps);
        const double tau = grid.tau();
        for (int j = 0; j < grid.n_steps; ++j) v[j] = (q[j] - q[j + 1]) / tau;
    }
};

enum class LinearSolve {
    AffineShooting,  ///< two forward passes, scalar solve for dp_0
    Tridiagonal,     ///< eliminate dq and solve for dp directly
    Auto,            ///< shooting unless its homogeneous growth is too large
};

struct SolveOptions {
    int n_steps = 1000;
    std::optional<double> newton_tol;  ///< absolute; defaults to 1e-10 * q0
    int max_iter = 50;
    int damping = 20;  ///< maximum step halvings per iteration
    LinearSolve linear_solve = LinearSolve::Auto;

    double tolerance_for(double q0) const {
        return newton_tol ? *newton_tol : 1e-10 * std::max(q0, 0.0);
    }
};

struct DiscreteResidual {
    std::vector<double> rp;  ///< p_{j+1} - p_j - tau*gamma*sigma^2*q_{j+1}
    std::vector<double> rq;  ///< q_{j+1} - q_j - tau*V_{j+1}*H'(p_j)
    double max_abs = 0.0;
};

inline DiscreteResidual discrete_residual(const LiquidationProblem& prob, const Hamiltonian& ham,
                                          const Trajectory& traj) {
    const int n = traj.grid.n_steps;
    if (static_cast<int>(traj.q.size()) != n + 1 || static_cast<int>(traj.p.size()) != n + 1)
        throw DomainError("discrete_residual: trajectory size does not match its grid");
    const double tau = traj.grid.tau();
    const double k = tau * prob.risk_rate();
    DiscreteResidual r;
    r.rp.resize(n);
    r.rq.resize(n);
    for (int j = 0; j < n; ++j) {
        const double vol = prob.volume.at(traj.grid.time(j + 1));
        r.rp[j] = traj.p[j + 1] - traj.p[j] - k * traj.q[j + 1];
        r.rq[j] = traj.q[j + 1] - traj.q[j] - tau * vol * ham.h_prime(traj.p[j]);
        r.max_abs = std::max({r.max_abs, std::abs(r.rp[j]), std::abs(r.rq[j])});
    }
    return r;
}

inline DiscreteResidual discrete_residual(const LiquidationProblem& prob, const Trajectory& traj) {
    return discrete_residual(prob, Hamiltonian::from(prob.cost), traj);
}

/// Linear liquidation start: q_j = (1 - j/J) q_hat, p_j = tau*gamma*sigma^2 * sum_{i<=j} q_i.
inline Trajectory initial_guess(const LiquidationProblem& prob, const Grid& grid, double q_hat) {
    Trajectory t;
    t.grid = grid;
    const int n = grid.n_steps;
    const double k = grid.tau() * prob.risk_rate();
    t.q.resize(n + 1);
    t.p.resize(n + 1);
    for (int j = 0; j <= n; ++j) t.q[j] = (1.0 - static_cast<double>(j) / n) * q_hat;
    t.q[n] = 0.0;
    t.p[0] = 0.0;
    for (int j = 1; j <= n; ++j) t.p[j] = t.p[j - 1] + k * t.q[j];
    t.refresh_speeds();
    return t;
}

inline Trajectory initial_guess(const LiquidationProblem& prob, const Grid& grid) {
    return initial_guess(prob, grid, prob.q0);
}

namespace detail {

/// Newton direction by affine shooting on dp_0. Returns false when the
/// homogeneous solution grows too much for the scalar solve to be trusted.
inline bool shooting_direction(std::span<const double> a, std::span<const double> forcing, double k,
                               std::vector<double>& dq, std::vector<double>& dp, bool allow_refuse) {
    const std::size_t n = a.size();
    std::vector<double> pq(n + 1), pp(n + 1), hq(n + 1), hp(n + 1);
    pq[0] = 0.0;
    pp[0] = 0.0;
    hq[0] = 0.0;
    hp[0] = 1.0;
    double growth = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        pq[j + 1] = pq[j] + a[j] * pp[j] + forcing[j];
        pp[j + 1] = pp[j] + k * pq[j + 1];
        hq[j + 1] = hq[j] + a[j] * hp[j];
        hp[j + 1] = hp[j] + k * hq[j + 1];
        growth = std::max(growth, std::abs(hp[j + 1]));
    }
    if (allow_refuse && growth > 1e8) return false;
    if (hq[n] == 0.0 || !std::isfinite(hq[n]))
        throw SingularCurvatureError("newton_solve: linearized system is singular (H'' vanishes on the path)");
    const double dp0 = -pq[n] / hq[n];
    dq.resize(n + 1);
    dp.resize(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        dq[j] = pq[j] + dp0 * hq[j];
        dp[j] = pp[j] + dp0 * hp[j];
    }
    return true;
}

/// Same linear system, with dq eliminated through the p-recurrence:
///   dq_{j+1} = (dp_{j+1} - dp_j) / k,
/// which leaves a symmetric tridiagonal system in dp (Thomas algorithm).
inline void tridiagonal_direction(std::span<const double> a, std::span<const double> forcing, double k,
                                  std::vector<double>& dq, std::vector<double>& dp) {
    const std::size_t n = a.size();
    // Unknowns dp_0..dp_{n-1}; dp_n = dp_{n-1} from dq_n = 0.
    // Row 0:    (dp_1 - dp_0)/k - a_0 dp_0 = f_0
    // Row j:    (dp_{j+1} - dp_j)/k - (dp_j - dp_{j-1})/k - a_j dp_j = f_j, 1 <= j <= n-1
    // with dp_n replaced by dp_{n-1} in the last row. Multiply by -k.
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0), rhs(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        di[j] = (j == 0 ? 1.0 : 2.0) + k * a[j];
        if (j > 0) lo[j] = -1.0;
        if (j + 1 < n) up[j] = -1.0;
        rhs[j] = -k * forcing[j];
    }
    di[n - 1] -= 1.0;  // dp_n folded into dp_{n-1}
    for (std::size_t j = 1; j < n; ++j) {
        const double m = lo[j] / di[j - 1];
        di[j] -= m * up[j - 1];
        rhs[j] -= m * rhs[j - 1];
    }
    if (di[n - 1] == 0.0 || !std::isfinite(di[n - 1]))
        throw SingularCurvatureError("newton_solve: linearized system is singular (H'' vanishes on the path)");
    dp.assign(n + 1, 0.0);
    dp[n - 1] = rhs[n - 1] / di[n - 1];
    for (std::size_t j = n - 1; j-- > 0;) dp[j] = (rhs[j] - up[j] * dp[j + 1]) / di[j];
    dp[n] = dp[n - 1];
    dq.assign(n + 1, 0.0);
    for (std::size_t j = 0; j < n; ++j) dq[j + 1] = dq[j] + a[j] * dp[j] + forcing[j];
}

inline void require_newton_path(const ExecutionCostModel& cost) {
    if (const auto* pl = cost.as_power_law(); pl && pl->phi > 1.0)
        throw SingularCurvatureError("newton_solve: power-law costs need phi in (0, 1] for a C2 Hamiltonian");
}

}  // namespace detail

/// Optimal trajectory on [t_hat, T] from inventory q_hat to 0.
inline Trajectory solve_from(const LiquidationProblem& prob, double t_hat, double q_hat,
                             const SolveOptions& opts = {}) {
    if (!(t_hat >= 0.0 && t_hat < prob.T)) throw DomainError("solve_from: t_hat must lie in [0, T)");
    if (!(q_hat >= 0.0)) throw DomainError("solve_from: q_hat must be >= 0");
    if (opts.n_steps < 2) throw DomainError("solve_from: n_steps must be >= 2");
    if (opts.max_iter < 1 || opts.damping < 0) throw DomainError("solve_from: invalid iteration limits");
    detail::require_newton_path(prob.cost);

    const Grid grid{t_hat, prob.T, opts.n_steps};
    const int n = grid.n_steps;
    const double tau = grid.tau();
    const double k = tau * prob.risk_rate();
    const double tol = opts.tolerance_for(q_hat);
    const Hamiltonian ham = Hamiltonian::from(prob.cost);

    std::vector<double> vol(n);
    for (int j = 0; j < n; ++j) vol[j] = prob.volume.at(grid.time(j + 1));

    Trajectory cur = initial_guess(prob, grid, q_hat);

    auto residual_of = [&](const Trajectory& t, std::vector<double>* rq) {
        double m = 0.0;
        for (int j = 0; j < n; ++j) {
            const double r = t.q[j + 1] - t.q[j] - tau * vol[j] * ham.h_prime(t.p[j]);
            if (rq) (*rq)[j] = r;
            m = std::max(m, std::abs(r));
        }
        return m;
    };

    std::vector<double> rq(n), a(n), forcing(n), dq, dp;
    double res = residual_of(cur, &rq);
    int iter = 0;
    while (!(res <= tol)) {
        if (iter >= opts.max_iter)
            throw NonConvergenceError("newton_solve: no convergence after " + std::to_string(iter) +
                                          " iterations (residual " + std::to_string(res) + ")",
                                      res, iter);
        ++iter;
        for (int j = 0; j < n; ++j) {
            a[j] = tau * vol[j] * ham.h_second(cur.p[j]);
            forcing[j] = -rq[j];
        }
        bool done = false;
        if (opts.linear_solve != LinearSolve::Tridiagonal)
            done = detail::shooting_direction(a, forcing, k, dq, dp, opts.linear_solve == LinearSolve::Auto);
        if (!done) detail::tridiagonal_direction(a, forcing, k, dq, dp);

        Trajectory trial = cur;
        double step = 1.0, trial_res = 0.0;
        for (int halving = 0;; ++halving) {
            for (int j = 1; j < n; ++j) trial.q[j] = cur.q[j] + step * dq[j];
            trial.q[0] = q_hat;
            trial.q[n] = 0.0;
            // p follows its recurrence exactly, so its residual stays at rounding level.
            trial.p[0] = cur.p[0] + step * dp[0];
            for (int j = 0; j < n; ++j) trial.p[j + 1] = trial.p[j] + k * trial.q[j + 1];
            trial_res = residual_of(trial, nullptr);
            if (trial_res < res || halving >= opts.damping) break;
            step *= 0.5;
        }
        cur = std::move(trial);
        res = residual_of(cur, &rq);
    }
    cur.refresh_speeds();
    cur.iterations = iter;
    cur.max_residual = discrete_residual(prob, ham, cur).max_abs;
    return cur;
}

inline Trajectory newton_solve(const LiquidationProblem& prob, const SolveOptions& opts = {}) {
    return solve_from(prob, 0.0, prob.q0, opts);
}

}  // namespace optexec
