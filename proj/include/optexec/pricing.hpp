#pragma once

#include "optexec/closed_forms.hpp"
#include "optexec/errors.hpp"
#include "optexec/hamiltonian_solver.hpp"
#include "optexec/market_model.hpp"
#include "optexec/objective.hpp"

#include <cmath>
#include <functional>
#include <optional>

namespace optexec {

/// Block price and its risk-liquidity premium split into
/// permanent market impact (pmi), linear execution costs (lec) and
/// nonlinear execution costs plus price risk (necpr).
struct PriceDecomposition {
    double q = 0.0;
    double S = 0.0;
    double horizon = 0.0;
    double mtm = 0.0;
    double pmi = 0.0;
    double lec = 0.0;
    std::optional<double> necpr_T;
    std::optional<double> necpr_inf;
    std::optional<double> price_T;
    std::optional<double> price_inf;
    std::optional<double> premium_bp_T;
    std::optional<double> premium_bp_inf;
    int iterations = 0;
    double max_residual = 0.0;
};

namespace detail {

inline double to_bp(double mtm, double price) { return mtm == 0.0 ? 0.0 : 1e4 * (mtm - price) / mtm; }

inline void fill_infinite(PriceDecomposition& d, const LiquidationProblem& prob) {
    d.necpr_inf = theta_infinity(prob, d.q);
    d.price_inf = d.mtm - d.pmi - d.lec - *d.necpr_inf;
    d.premium_bp_inf = to_bp(d.mtm, *d.price_inf);
}

}  // namespace detail

/// Two-step price: solve for the optimal curve, then score it with psi = 0.
inline PriceDecomposition price_finite(const LiquidationProblem& prob, const SolveOptions& opts = {}) {
    PriceDecomposition d;
    d.q = prob.q0;
    d.S = prob.market.S0;
    d.horizon = prob.T;
    d.mtm = prob.q0 * prob.market.S0;
    d.pmi = pmi_integral(prob.impact, prob.q0);
    d.lec = prob.market.psi * prob.q0;

    const Trajectory traj = newton_solve(prob, opts);
    d.necpr_T = eval_I(prob, traj, 0.0);
    d.price_T = d.mtm - d.pmi - d.lec - *d.necpr_T;
    d.premium_bp_T = detail::to_bp(d.mtm, *d.price_T);
    d.iterations = traj.iterations;
    d.max_residual = traj.max_residual;

    if (prob.volume.is_constant()) detail::fill_infinite(d, prob);
    return d;
}

/// Time-unconstrained price in closed form.
inline PriceDecomposition price_infinite(const LiquidationProblem& prob, double q, double S) {
    if (!prob.volume.is_constant()) throw DomainError("price_infinite: needs a constant volume curve");
    if (!(q >= 0.0)) throw DomainError("price_infinite: q must be >= 0");
    PriceDecomposition d;
    d.q = q;
    d.S = S;
    d.horizon = std::numeric_limits<double>::infinity();
    d.mtm = q * S;
    d.pmi = pmi_integral(prob.impact, q);
    d.lec = prob.market.psi * q;
    detail::fill_infinite(d, prob);
    return d;
}

inline PriceDecomposition price_infinite(const LiquidationProblem& prob) {
    return price_infinite(prob, prob.q0, prob.market.S0);
}

namespace detail {

/// Geometric bisection of an increasing map g(gamma) = target on [lo, hi].
inline double solve_gamma(const std::function<double(double)>& g, double target, double lo, double hi) {
    const double g_lo = g(lo), g_hi = g(hi);
    if (!(g_lo < target)) throw OutOfRangeError("implied_gamma: premium is below the smallest bracketed gamma");
    if (!(g_hi >= target)) throw OutOfRangeError("implied_gamma: premium is above the largest bracketed gamma");
    for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
        const double mid = std::sqrt(lo * hi);
        if (g(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

inline double premium_floor(const LiquidationProblem& prob, double quoted_premium) {
    const double floor = pmi_integral(prob.impact, prob.q0) + prob.market.psi * prob.q0;
    if (!(quoted_premium > floor))
        throw NoSolutionError("implied_gamma: quoted premium does not exceed the gamma-free floor pmi + lec");
    return floor;
}

}  // namespace detail

/// Risk aversion that makes the time-unconstrained premium equal `quoted_premium`.
inline double implied_gamma(const LiquidationProblem& prob, double quoted_premium, double gamma_lo = 1e-12,
                            double gamma_hi = 1e-2) {
    if (!prob.volume.is_constant()) throw DomainError("implied_gamma: needs a constant volume curve");
    const double target = quoted_premium - detail::premium_floor(prob, quoted_premium);
    return detail::solve_gamma([&](double g) { return theta_infinity(prob.with_gamma(g), prob.q0); }, target,
                               gamma_lo, gamma_hi);
}

/// Same contract on the finite horizon T; one Newton solve per bisection step.
inline double implied_gamma_finite(const LiquidationProblem& prob, double quoted_premium,
                                   const SolveOptions& opts = {}, double gamma_lo = 1e-12, double gamma_hi = 1e-2) {
    const double target = quoted_premium - detail::premium_floor(prob, quoted_premium);
    return detail::solve_gamma(
        [&](double g) {
            const auto p = prob.with_gamma(g);
            return eval_I(p, newton_solve(p, opts), 0.0);
        },
        target, gamma_lo, gamma_hi);
}

}  // namespace optexec
