#pragma once

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace optexec::quad {

/// Tanh-sinh quadrature on [a, b] to the given relative tolerance. Integrable
/// algebraic singularities at either endpoint are fine (x^beta, H^-1(c x^2)).
template <typename F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, std::size_t max_refinements = 15) {
    if (a == b) return 0.0;
    boost::math::quadrature::tanh_sinh<double> integrator(max_refinements);
    return integrator.integrate(std::forward<F>(f), a, b, rel_tol);
}

}  // namespace optexec::quad
