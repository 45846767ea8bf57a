#pragma once

#include "optexec/errors.hpp"
#include "optexec/legendre.hpp"
#include "optexec/market_model.hpp"
#include "optexec/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace optexec {

// ---------------------------------------------------------------------------
// Quadratic costs L = eta rho^2 with constant volume: sinh trading curve.
// ---------------------------------------------------------------------------

namespace detail {

inline double ac_kappa(const LiquidationProblem& prob) {
    const auto* pl = prob.cost.as_power_law();
    if (!pl || pl->phi != 1.0) throw DomainError("ac closed form: needs a power-law cost with phi = 1");
    if (!prob.volume.is_constant()) throw DomainError("ac closed form: needs a constant volume curve");
    return std::sqrt(prob.risk_rate() * prob.volume.level() / (2.0 * pl->eta));
}

}  // namespace detail

/// q*(t) = q0 sinh(kappa (T - t)) / sinh(kappa T), kappa = sqrt(gamma sigma^2 V / (2 eta)).
inline double ac_trajectory(const LiquidationProblem& prob, double t) {
    const double kappa = detail::ac_kappa(prob);
    if (t >= prob.T) return 0.0;
    return prob.q0 * std::sinh(kappa * (prob.T - t)) / std::sinh(kappa * prob.T);
}

inline double ac_speed(const LiquidationProblem& prob, double t) {
    const double kappa = detail::ac_kappa(prob);
    return prob.q0 * kappa * std::cosh(kappa * (prob.T - t)) / std::sinh(kappa * prob.T);
}

/// Minimal risk-adjusted cost on a horizon of length `horizon` starting from q:
/// (gamma sigma^2 / (2 kappa)) q^2 coth(kappa * horizon).
inline double ac_value(const LiquidationProblem& prob, double horizon, double q) {
    const double kappa = detail::ac_kappa(prob);
    if (q == 0.0) return 0.0;
    return 0.5 * prob.risk_rate() / kappa * q * q / std::tanh(kappa * horizon);
}

// ---------------------------------------------------------------------------
// Super-quadratic costs L = eta rho^(2+delta), small inventories.
// ---------------------------------------------------------------------------

struct SuperQuadraticParams {
    double eta = 1.0;
    double delta = 1.0;
    double q0 = 0.0;
    double T = 1.0;
    double V = 1.0;
    double gamma = 1.0;
    double sigma = 1.0;

    double rate_constant() const {
        return std::pow(V, (1.0 + delta) / (2.0 + delta)) *
               std::pow(gamma * sigma * sigma / (2.0 * eta * (1.0 + delta)), 1.0 / (2.0 + delta));
    }

    /// Largest q0 for which the trading curve reaches zero by T.
    double applicability_bound() const {
        const double e = (2.0 + delta) / delta;
        return std::pow(delta / (2.0 + delta), e) * std::pow(T, e) * std::pow(V, (1.0 + delta) / delta) *
               std::pow(gamma * sigma * sigma / (2.0 * eta * (1.0 + delta)), 1.0 / delta);
    }

    /// Time at which the inventory is exhausted, independent of T.
    double extinction_time() const {
        return std::pow(q0, delta / (2.0 + delta)) * ((2.0 + delta) / delta) / rate_constant();
    }
};

inline double superquadratic_trajectory(const SuperQuadraticParams& sp, double t) {
    if (!(sp.eta > 0.0 && sp.delta > 0.0 && sp.V > 0.0 && sp.gamma > 0.0 && sp.sigma > 0.0 && sp.q0 >= 0.0))
        throw DomainError("superquadratic_trajectory: invalid parameters");
    if (sp.q0 > sp.applicability_bound() * (1.0 + 1e-12))
        throw ApplicabilityError("superquadratic_trajectory: q0 exceeds the small-inventory bound");
    const double base = std::pow(sp.q0, sp.delta / (2.0 + sp.delta)) -
                        sp.delta / (2.0 + sp.delta) * sp.rate_constant() * t;
    if (base <= 0.0) return 0.0;
    return std::pow(base, (2.0 + sp.delta) / sp.delta);
}

// ---------------------------------------------------------------------------
// Time-unconstrained value theta_inf(q) = int_0^q H^{-1}(gamma sigma^2 x^2 / 2V) dx.
// ---------------------------------------------------------------------------

/// Always integrates numerically, whatever the cost model.
inline double theta_infinity_quadrature(const LiquidationProblem& prob, double q, double rel_tol = 1e-9) {
    if (!prob.volume.is_constant())
        throw DomainError("theta_infinity: needs a constant volume curve");
    if (!(q >= 0.0)) throw DomainError("theta_infinity: q must be >= 0");
    if (q == 0.0) return 0.0;
    const Hamiltonian ham = Hamiltonian::from(prob.cost);
    const double scale = prob.risk_rate() / (2.0 * prob.volume.level());
    return quad::integrate([&](double x) { return ham.h_inverse(scale * x * x); }, 0.0, q, rel_tol);
}

inline double theta_infinity(const LiquidationProblem& prob, double q) {
    if (!prob.volume.is_constant())
        throw DomainError("theta_infinity: needs a constant volume curve");
    if (!(q >= 0.0)) throw DomainError("theta_infinity: q must be >= 0");
    if (q == 0.0) return 0.0;
    if (const auto* pl = prob.cost.as_power_law()) {
        const double eta = pl->eta, phi = pl->phi;
        const double a = phi / (1.0 + phi);
        return std::pow(eta, 1.0 / (1.0 + phi)) / std::pow(phi, a) * (1.0 + phi) * (1.0 + phi) / (1.0 + 3.0 * phi) *
               std::pow(prob.risk_rate() / (2.0 * prob.volume.level()), a) *
               std::pow(q, (1.0 + 3.0 * phi) / (1.0 + phi));
    }
    return theta_infinity_quadrature(prob, q, 1e-9);
}

}  // namespace optexec
