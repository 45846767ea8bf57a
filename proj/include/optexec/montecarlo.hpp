#pragma once

#include "optexec/errors.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/market_model.hpp"
#include "optexec/objective.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace optexec {

struct SimulationConfig {
    std::size_t n_paths = 100000;
    int n_substeps = 1;
    std::uint64_t seed = 42;
    std::size_t batch_size = 4096;  ///< paths per independently seeded batch
    unsigned threads = 0;           ///< 0 = hardware concurrency
    bool keep_paths = false;
};

struct SimulationResult {
    std::size_t n_paths = 0;
    double mean = 0.0;
    double variance = 0.0;
    double se_mean = 0.0;
    double se_variance = 0.0;
    double excess_kurtosis = 0.0;
    double analytic_mean = 0.0;
    double analytic_variance = 0.0;
    double price_drift = 0.0;  ///< deterministic part of S_T - S_0 (impact only)
    std::vector<double> terminal_wealth;  ///< per path, only with keep_paths
};

namespace detail {

/// Pairwise sum, so the reduction does not depend on how paths were batched.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 16) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

}  // namespace detail

/// Euler-Maruyama simulation of price and cash along a deterministic
/// trajectory. Returns statistics of X_T + q_T S_T (= X_T when liquidating).
inline SimulationResult simulate_cash(const LiquidationProblem& prob, const Trajectory& traj,
                                      const SimulationConfig& cfg = {}) {
    if (cfg.n_paths < 2) throw DomainError("simulate_cash: need at least two paths");
    if (cfg.n_substeps < 1) throw DomainError("simulate_cash: n_substeps must be >= 1");
    if (cfg.batch_size < 1) throw DomainError("simulate_cash: batch_size must be >= 1");

    const auto& g = traj.grid;
    const int m = cfg.n_substeps;
    const double tau = g.tau();
    const double dt = tau / m;
    const double q0 = traj.q.front();
    const double psi = prob.market.psi;

    // Everything but the Brownian increment is deterministic along the path.
    const std::size_t steps = static_cast<std::size_t>(g.n_steps) * m;
    std::vector<double> sold_dt(steps), cost_dt(steps), drift(steps);
    double price_drift = 0.0;
    for (int j = 0; j < g.n_steps; ++j) {
        const double v = (traj.q[j] - traj.q[j + 1]) / tau;
        const double vol = prob.volume.at(g.time(j + 1));
        const double running = tau * vol * eval_cost(prob.cost, v / vol) / m + psi * std::abs(v) * dt;
        for (int s = 0; s < m; ++s) {
            const std::size_t idx = static_cast<std::size_t>(j) * m + s;
            const double q_before = traj.q[j] - v * dt * s;
            const double y = q0 - q_before;
            sold_dt[idx] = v * dt;
            cost_dt[idx] = running;
            // f is singular at 0 for concave power laws: use the exact increment of F there.
            drift[idx] = y == 0.0 ? -(prob.impact.F(v * dt) - prob.impact.F(0.0))
                                  : -prob.impact.density(std::abs(y)) * v * dt;
            price_drift += drift[idx];
        }
    }

    const double sigma_sqdt = prob.market.sigma * std::sqrt(dt);
    const double s0 = prob.market.S0;
    const double q_end = traj.q.back();
    std::vector<double> wealth(cfg.n_paths);

    const std::size_t n_batches = (cfg.n_paths + cfg.batch_size - 1) / cfg.batch_size;
    auto run_batch = [&](std::size_t b) {
        std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                          static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
        std::mt19937_64 rng(seq);
        std::normal_distribution<double> normal(0.0, 1.0);
        const std::size_t begin = b * cfg.batch_size;
        const std::size_t end = std::min(cfg.n_paths, begin + cfg.batch_size);
        for (std::size_t path = begin; path < end; ++path) {
            double S = s0, X = 0.0;
            for (std::size_t k = 0; k < steps; ++k) {
                X += sold_dt[k] * S - cost_dt[k];
                S += sigma_sqdt * normal(rng) + drift[k];
            }
            wealth[path] = X + q_end * S;
        }
    };

    unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_batches));
    if (threads <= 1) {
        for (std::size_t b = 0; b < n_batches; ++b) run_batch(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < n_batches; b += threads) run_batch(b);
            });
        for (auto& t : pool) t.join();
    }

    SimulationResult r;
    const std::size_t n = cfg.n_paths;
    r.n_paths = n;
    r.mean = detail::pairwise_sum(wealth.data(), n) / n;
    std::vector<double> c2(n), c4(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = wealth[i] - r.mean;
        c2[i] = d * d;
        c4[i] = c2[i] * c2[i];
    }
    const double m2 = detail::pairwise_sum(c2.data(), n) / n;
    const double m4 = detail::pairwise_sum(c4.data(), n) / n;
    r.variance = m2 * n / (n - 1);
    r.se_mean = std::sqrt(r.variance / n);
    r.se_variance = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
    r.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

    const auto analytic = cash_moments(prob, traj);
    r.analytic_mean = analytic.mean;
    r.analytic_variance = analytic.variance;
    r.price_drift = price_drift;
    if (cfg.keep_paths) r.terminal_wealth = std::move(wealth);
    return r;
}

}  // namespace optexec
