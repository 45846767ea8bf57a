#pragma once

#include "optexec/optexec.hpp"

#include <cmath>
#include <vector>

namespace fixtures {

using namespace optexec;

/// Large-cap block: 500k shares over one day, 5M shares/day traded.
inline LiquidationProblem reference(double gamma = 1e-6, double q0 = 500000.0) {
    LiquidationProblem p;
    p.q0 = q0;
    p.T = 1.0;
    p.market = {40.0, 0.5, gamma, 0.004};
    p.volume = VolumeCurve::constant(5e6);
    p.cost = ExecutionCostModel::power_law(0.02, 0.65);
    p.impact = PermanentImpactModel::power_law(4.5e-6, 0.75);
    return p;
}

/// Same market with quadratic costs.
inline LiquidationProblem quadratic(double eta = 0.02, double q0 = 500000.0) {
    auto p = reference(1e-6, q0);
    p.cost = ExecutionCostModel::power_law(eta, 1.0);
    return p;
}

inline double sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Linear liquidation q_j = (1 - j/n) q0 on [0, T].
inline Trajectory linear_liquidation(const LiquidationProblem& p, int n) {
    Trajectory t;
    t.grid = Grid{0.0, p.T, n};
    t.q.resize(n + 1);
    t.p.assign(n + 1, 0.0);
    for (int j = 0; j <= n; ++j) t.q[j] = p.q0 * (1.0 - static_cast<double>(j) / n);
    t.q[n] = 0.0;
    t.refresh_speeds();
    return t;
}

}  // namespace fixtures
