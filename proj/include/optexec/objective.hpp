#pragma once

#include "optexec/errors.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/market_model.hpp"

#include <cmath>
#include <optional>

namespace optexec {

/// Pieces of the risk-adjusted cost, each integrated on the trajectory grid.
struct ObjectiveTerms {
    double exec_nonlinear = 0.0;  ///< sum tau * V_{j+1} L(v_j / V_{j+1})
    double traded = 0.0;          ///< sum tau * |v_j|
    double q_squared = 0.0;       ///< trapezoid rule for the integral of q^2
};

namespace detail {

inline void check_horizon(const LiquidationProblem& prob, const Trajectory& traj) {
    const auto& g = traj.grid;
    if (std::abs(g.end - prob.T) > 1e-12 * std::max(1.0, prob.T) || g.start < 0.0 || !(g.start < g.end))
        throw DomainError("objective: trajectory grid does not end at the problem horizon");
    if (static_cast<int>(traj.q.size()) != g.n_steps + 1)
        throw DomainError("objective: trajectory size does not match its grid");
}

}  // namespace detail

inline ObjectiveTerms objective_terms(const LiquidationProblem& prob, const Trajectory& traj) {
    detail::check_horizon(prob, traj);
    const auto& g = traj.grid;
    const double tau = g.tau();
    ObjectiveTerms t;
    for (int j = 0; j < g.n_steps; ++j) {
        const double vol = prob.volume.at(g.time(j + 1));
        const double speed = (traj.q[j] - traj.q[j + 1]) / tau;
        t.exec_nonlinear += tau * vol * eval_cost(prob.cost, speed / vol);
        t.traded += tau * std::abs(speed);
        t.q_squared += 0.5 * tau * (traj.q[j] * traj.q[j] + traj.q[j + 1] * traj.q[j + 1]);
    }
    return t;
}

/// I_psi(q) = int V L(v/V) + psi int |v| + 1/2 gamma sigma^2 int q^2.
inline double eval_I(const LiquidationProblem& prob, const Trajectory& traj, double psi) {
    const auto t = objective_terms(prob, traj);
    return t.exec_nonlinear + psi * t.traded + 0.5 * prob.risk_rate() * t.q_squared;
}

struct CashDistribution {
    double mean = 0.0;
    double variance = 0.0;
    double mtm = 0.0;
    double pmi = 0.0;
    double exec_nonlinear = 0.0;
    double exec_linear = 0.0;
    double risk_var = 0.0;
};

/// Gaussian law of the terminal cash X_T for a deterministic liquidation.
/// When the trajectory does not end at zero, the law is that of the
/// marked-to-market wealth X_T + q_T S_T, and `pmi` carries the extra
/// q_T * F(q0 - q_T) term.
inline CashDistribution cash_moments(const LiquidationProblem& prob, const Trajectory& traj) {
    const auto t = objective_terms(prob, traj);
    const double q0 = traj.q.front();
    const double q_end = traj.q.back();
    const double sold = q0 - q_end;
    CashDistribution c;
    c.mtm = q0 * prob.market.S0;
    c.pmi = pmi_integral(prob.impact, std::max(sold, 0.0)) + q_end * prob.impact.F(sold);
    c.exec_nonlinear = t.exec_nonlinear;
    c.exec_linear = prob.market.psi * t.traded;
    c.risk_var = prob.market.sigma * prob.market.sigma * t.q_squared;
    c.mean = c.mtm - c.pmi - c.exec_nonlinear - c.exec_linear;
    c.variance = c.risk_var;
    return c;
}

struct ExpectedUtility {
    double certainty_equivalent = 0.0;
    double log_neg_utility = 0.0;    ///< log(-J) = -gamma * CE
    std::optional<double> utility;  ///< -exp(-gamma CE); empty when it would over/underflow
};

inline ExpectedUtility expected_utility(const LiquidationProblem& prob, const Trajectory& traj) {
    const auto c = cash_moments(prob, traj);
    const double g = prob.market.gamma;
    ExpectedUtility u;
    u.certainty_equivalent = c.mean - 0.5 * g * c.variance;
    u.log_neg_utility = -g * u.certainty_equivalent;
    if (std::abs(u.log_neg_utility) <= 700.0) u.utility = -std::exp(u.log_neg_utility);
    return u;
}

}  // namespace optexec
