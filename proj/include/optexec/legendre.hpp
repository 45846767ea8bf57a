#pragma once

#include "optexec/errors.hpp"
#include "optexec/market_model.hpp"

#include <cmath>
#include <limits>

namespace optexec {

/// Legendre transform H(p) = sup_rho (rho p - L(rho)) of an execution cost.
///
/// Power-law costs use the closed form H(p) = c |p|^(1+1/phi) with
/// c = phi / (1+phi)^(1+1/phi) * eta^(-1/phi). Anything else goes through a
/// derivative-free inner maximization (golden section), since no smoothness
/// of L is assumed.
class Hamiltonian {
public:
    enum class Mode { PowerLawClosedForm, Numeric };

    /// Closed form when available, numeric otherwise.
    static Hamiltonian from(const ExecutionCostModel& cost) {
        return Hamiltonian(cost, cost.is_power_law() ? Mode::PowerLawClosedForm : Mode::Numeric);
    }
    /// Forces the numeric route, even for power laws.
    static Hamiltonian numeric(const ExecutionCostModel& cost) { return Hamiltonian(cost, Mode::Numeric); }

    Mode mode() const noexcept { return mode_; }
    const ExecutionCostModel& source() const noexcept { return cost_; }
    double coefficient() const noexcept { return c_; }
    double exponent() const noexcept { return expo_; }

    double h(double p) const {
        check_finite(p, "h");
        if (p == 0.0) return 0.0;
        if (mode_ == Mode::PowerLawClosedForm) return c_ * std::pow(std::abs(p), expo_);
        const double rho = argmax_abs(std::abs(p));
        return rho * std::abs(p) - eval_cost(cost_, rho);
    }

    /// H'(p): the participation rate that attains the supremum.
    double h_prime(double p) const {
        check_finite(p, "h_prime");
        if (p == 0.0) return 0.0;
        if (mode_ == Mode::PowerLawClosedForm)
            return std::copysign(c_ * expo_ * std::pow(std::abs(p), expo_ - 1.0), p);
        return std::copysign(argmax_abs(std::abs(p)), p);
    }

    double h_second(double p) const {
        check_finite(p, "h_second");
        if (mode_ == Mode::PowerLawClosedForm) {
            const double phi = phi_;
            const double k = c_ * expo_ * (1.0 / phi);
            if (phi == 1.0) return k;
            if (p == 0.0) {
                if (phi < 1.0) return 0.0;
                throw SingularCurvatureError("h_second: H'' is infinite at p = 0 for phi > 1");
            }
            return k * std::pow(std::abs(p), 1.0 / phi - 1.0);
        }
        const double step = 1e-6 * std::max(1.0, std::abs(p));
        const double d = (h_prime(p + step) - h_prime(p - step)) / (2.0 * step);
        if (!std::isfinite(d)) throw SingularCurvatureError("h_second: numeric curvature is not finite");
        return d;
    }

    /// Inverse of H restricted to R+.
    double h_inverse(double x) const {
        if (!(x >= 0.0)) throw DomainError("h_inverse: argument must be >= 0");
        if (x == 0.0) return 0.0;
        if (mode_ == Mode::PowerLawClosedForm) {
            const double phi = phi_, eta = eta_;
            return std::pow(eta, 1.0 / (1.0 + phi)) * (1.0 + phi) / std::pow(phi, phi / (1.0 + phi)) *
                   std::pow(x, phi / (1.0 + phi));
        }
        double lo = 0.0, hi = 1.0;
        for (int i = 0; h(hi) < x; ++i) {
            lo = hi;
            hi *= 2.0;
            if (i > 1100) throw UnboundedTransformError("h_inverse: bracket expansion failed");
        }
        const double tol = 1e-12 * std::max(1.0, x);
        for (int i = 0; i < 400; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (h(mid) < x)
                lo = mid;
            else
                hi = mid;
            if (hi - lo <= tol && hi - lo <= 1e-15 * hi) break;
        }
        return 0.5 * (lo + hi);
    }

private:
    Hamiltonian(const ExecutionCostModel& cost, Mode mode) : cost_(cost), mode_(mode) {
        if (const auto* pl = cost.as_power_law()) {
            eta_ = pl->eta;
            phi_ = pl->phi;
            c_ = phi_ / std::pow(1.0 + phi_, 1.0 + 1.0 / phi_) * std::pow(eta_, -1.0 / phi_);
            expo_ = 1.0 + 1.0 / phi_;
        }
    }

    static void check_finite(double p, const char* op) {
        if (!std::isfinite(p)) throw DomainError(std::string(op) + ": argument is not finite");
    }

    /// argmax over rho >= 0 of rho * a - L(rho), for a > 0.
    double argmax_abs(double a) const {
        auto g = [&](double rho) { return rho * a - eval_cost(cost_, rho); };
        const double bound = cost_.sample_bound();

        double b = std::min(1.0, bound);
        int doublings = 0;
        while (g(b) >= g(0.5 * b)) {
            if (b >= bound) {
                if (g(bound) > g(bound * (1.0 - 1e-6)))
                    throw UnboundedTransformError("Legendre transform: maximizer lies beyond the cost sample bound");
                break;
            }
            if (++doublings > 60)
                throw UnboundedTransformError("Legendre transform: bracket expansion exceeded 60 doublings");
            b = std::min(2.0 * b, bound);
        }

        constexpr double inv_phi = 0.6180339887498949;
        double lo = 0.0, hi = b;
        double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
        double g1 = g(x1), g2 = g(x2);
        for (int it = 0; it < 400 && hi - lo > 1e-12 && hi - lo > 1e-15 * hi; ++it) {
            if (g1 < g2) {
                lo = x1;
                x1 = x2;
                g1 = g2;
                x2 = lo + inv_phi * (hi - lo);
                g2 = g(x2);
            } else {
                hi = x2;
                x2 = x1;
                g2 = g1;
                x1 = hi - inv_phi * (hi - lo);
                g1 = g(x1);
            }
        }
        return polish(a, 0.5 * (lo + hi), bound);
    }

    /// Value comparisons only pin the maximizer to about sqrt(eps). Bisect on the
    /// sign of the centred secant slope of L minus a, which is monotone for convex L.
    double polish(double a, double rho, double bound) const {
        const double w = 1e-6 * std::max(rho, 1e-300);
        double lo = std::max(0.0, rho - w), hi = std::min(bound, rho + w);
        auto excess = [&](double r) {
            const double d = 1e-5 * std::max(r, 1e-300);
            if (r + d > bound) return 0.0;
            return (eval_cost(cost_, r + d) - eval_cost(cost_, std::max(r - d, 0.0))) / (r + d - std::max(r - d, 0.0)) - a;
        };
        if (!(lo < hi) || !(excess(lo) < 0.0) || !(excess(hi) > 0.0)) return rho;
        for (int i = 0; i < 200; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (excess(mid) < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    ExecutionCostModel cost_;
    Mode mode_;
    double eta_ = 0.0;
    double phi_ = 0.0;
    double c_ = 0.0;
    double expo_ = 0.0;
};

}  // namespace optexec
