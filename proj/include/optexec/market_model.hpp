#pragma once

#include "optexec/errors.hpp"
#include "optexec/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace optexec {

// ---------------------------------------------------------------------------
// Execution cost L(rho), rho = v / V the participation rate.
// ---------------------------------------------------------------------------

/// L(rho) = eta * |rho|^(1+phi)
struct PowerLawCost {
    double eta = 0.0;
    double phi = 0.0;
};

/// User supplied L. Must be even, strictly convex, L(0) = 0, superlinear.
/// Evaluation outside [-sample_bound, sample_bound] is refused.
struct CustomCost {
    std::function<double(double)> fn;
    double sample_bound = std::numeric_limits<double>::infinity();
};

class ExecutionCostModel {
public:
    using Variant = std::variant<PowerLawCost, CustomCost>;

    ExecutionCostModel() = default;
    explicit ExecutionCostModel(Variant v) : model_(std::move(v)) {}

    static ExecutionCostModel power_law(double eta, double phi) {
        return ExecutionCostModel(PowerLawCost{eta, phi});
    }
    static ExecutionCostModel custom(std::function<double(double)> fn,
                                     double sample_bound = std::numeric_limits<double>::infinity()) {
        return ExecutionCostModel(CustomCost{std::move(fn), sample_bound});
    }

    const Variant& model() const noexcept { return model_; }
    const PowerLawCost* as_power_law() const noexcept { return std::get_if<PowerLawCost>(&model_); }
    const CustomCost* as_custom() const noexcept { return std::get_if<CustomCost>(&model_); }
    bool is_power_law() const noexcept { return as_power_law() != nullptr; }

    /// Largest |rho| at which the model may be evaluated.
    double sample_bound() const noexcept {
        if (const auto* c = as_custom()) return c->sample_bound;
        return std::numeric_limits<double>::infinity();
    }

    double operator()(double rho) const;

private:
    Variant model_{PowerLawCost{}};
};

inline double eval_cost(const ExecutionCostModel& cost, double rho) {
    if (!std::isfinite(rho)) throw DomainError("eval_cost: participation rate is not finite");
    if (const auto* pl = cost.as_power_law()) {
        if (rho == 0.0) return 0.0;
        return pl->eta * std::pow(std::abs(rho), 1.0 + pl->phi);
    }
    const auto& c = *cost.as_custom();
    if (std::abs(rho) > c.sample_bound)
        throw DomainError("eval_cost: |rho| = " + std::to_string(std::abs(rho)) +
                          " exceeds custom cost sample bound " + std::to_string(c.sample_bound));
    return c.fn(rho);
}

inline double ExecutionCostModel::operator()(double rho) const { return eval_cost(*this, rho); }

// ---------------------------------------------------------------------------
// Permanent impact F(q), odd and nondecreasing, concave on R+.
// ---------------------------------------------------------------------------

/// F(q) = k * sgn(q) * |q|^beta
struct PowerLawImpact {
    double k = 0.0;
    double beta = 1.0;
};

struct CustomImpact {
    std::function<double(double)> fn;
};

class PermanentImpactModel {
public:
    using Variant = std::variant<PowerLawImpact, CustomImpact>;

    PermanentImpactModel() = default;
    explicit PermanentImpactModel(Variant v) : model_(std::move(v)) {}

    static PermanentImpactModel power_law(double k, double beta) {
        return PermanentImpactModel(PowerLawImpact{k, beta});
    }
    static PermanentImpactModel custom(std::function<double(double)> fn) {
        return PermanentImpactModel(CustomImpact{std::move(fn)});
    }
    static PermanentImpactModel none() { return power_law(0.0, 1.0); }

    const Variant& model() const noexcept { return model_; }
    const PowerLawImpact* as_power_law() const noexcept { return std::get_if<PowerLawImpact>(&model_); }
    const CustomImpact* as_custom() const noexcept { return std::get_if<CustomImpact>(&model_); }

    /// F(q)
    double F(double q) const {
        if (const auto* pl = as_power_law()) {
            if (q == 0.0 || pl->k == 0.0) return 0.0;
            return std::copysign(pl->k * std::pow(std::abs(q), pl->beta), q);
        }
        return as_custom()->fn(q);
    }

    /// f(y) = F'(y) for y >= 0. Infinite at 0 when beta < 1.
    double density(double y) const {
        if (const auto* pl = as_power_law()) {
            if (pl->k == 0.0) return 0.0;
            if (y == 0.0) return pl->beta < 1.0 ? std::numeric_limits<double>::infinity() : pl->k;
            return pl->k * pl->beta * std::pow(y, pl->beta - 1.0);
        }
        const double h = 1e-6 * std::max(1.0, std::abs(y));
        return (F(y + h) - F(y - h)) / (2.0 * h);
    }

private:
    Variant model_{PowerLawImpact{}};
};

/// Integral of F over [0, q].
inline double pmi_integral(const PermanentImpactModel& impact, double q) {
    if (!(q >= 0.0)) throw DomainError("pmi_integral: q must be >= 0");
    if (q == 0.0) return 0.0;
    if (const auto* pl = impact.as_power_law())
        return pl->k * std::pow(q, 1.0 + pl->beta) / (1.0 + pl->beta);
    return quad::integrate([&](double z) { return impact.F(z); }, 0.0, q, 1e-10);
}

// ---------------------------------------------------------------------------
// Market volume curve V(t).
// ---------------------------------------------------------------------------

struct VolumeKnot {
    double time;
    double volume;
};

class VolumeCurve {
public:
    VolumeCurve() = default;

    static VolumeCurve constant(double v) {
        VolumeCurve c;
        c.knots_ = {{0.0, v}};
        c.constant_ = true;
        return c;
    }
    static VolumeCurve piecewise_linear(std::vector<VolumeKnot> knots) {
        VolumeCurve c;
        c.knots_ = std::move(knots);
        c.constant_ = false;
        return c;
    }

    bool is_constant() const noexcept { return constant_; }
    const std::vector<VolumeKnot>& knots() const noexcept { return knots_; }

    /// Constant level. Only meaningful when is_constant().
    double level() const { return knots_.empty() ? 0.0 : knots_.front().volume; }

    double at(double t) const {
        if (constant_ || knots_.size() == 1) return level();
        if (t <= knots_.front().time) return knots_.front().volume;
        if (t >= knots_.back().time) return knots_.back().volume;
        auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                   [](double x, const VolumeKnot& k) { return x < k.time; });
        const auto& b = *it;
        const auto& a = *(it - 1);
        const double w = (t - a.time) / (b.time - a.time);
        return a.volume + w * (b.volume - a.volume);
    }
    double operator()(double t) const { return at(t); }

    double lo() const {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& k : knots_) m = std::min(m, k.volume);
        return m;
    }
    double hi() const {
        double m = -std::numeric_limits<double>::infinity();
        for (const auto& k : knots_) m = std::max(m, k.volume);
        return m;
    }

    bool covers(double horizon) const {
        if (constant_) return true;
        return !knots_.empty() && knots_.front().time == 0.0 && knots_.back().time >= horizon;
    }

    /// Curve seen from a shifted origin: result(s) = this(offset + s).
    VolumeCurve shifted(double offset) const {
        if (constant_ || offset == 0.0) return *this;
        std::vector<VolumeKnot> out;
        out.push_back({0.0, at(offset)});
        for (const auto& k : knots_)
            if (k.time > offset) out.push_back({k.time - offset, k.volume});
        if (out.size() == 1) out.push_back({1.0, out.front().volume});
        return piecewise_linear(std::move(out));
    }

private:
    std::vector<VolumeKnot> knots_{{0.0, 1.0}};
    bool constant_ = true;
};

/// Reads a `time,volume` CSV. Times strictly increasing, starting at 0.
inline VolumeCurve parse_volume_csv(std::istream& in, double horizon) {
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        const auto e = s.find_last_not_of(" \t\r\n");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    bool header_seen = false;
    std::vector<VolumeKnot> knots;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty()) continue;
        if (!header_seen) {
            std::string compact;
            for (char ch : line)
                if (ch != ' ' && ch != '\t') compact += ch;
            if (compact != "time,volume")
                throw ConfigError("volume csv: expected header 'time,volume'", lineno);
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("volume csv: expected two columns", lineno);
        double t = 0.0, v = 0.0;
        try {
            std::size_t used = 0;
            const std::string ts = trim(line.substr(0, comma));
            const std::string vs = trim(line.substr(comma + 1));
            t = std::stod(ts, &used);
            if (used != ts.size()) throw std::invalid_argument("time");
            v = std::stod(vs, &used);
            if (used != vs.size()) throw std::invalid_argument("volume");
        } catch (const std::exception&) {
            throw ConfigError("volume csv: malformed number", lineno);
        }
        if (!knots.empty() && !(t > knots.back().time))
            throw ConfigError("volume csv: times must be strictly increasing", lineno);
        if (!(v > 0.0)) throw ConfigError("volume csv: volume must be > 0", lineno);
        knots.push_back({t, v});
    }
    if (!header_seen) throw ConfigError("volume csv: empty file", lineno);
    if (knots.empty()) throw ConfigError("volume csv: no data rows", lineno);
    if (knots.front().time != 0.0) throw ConfigError("volume csv: first time must be 0", 2);
    if (knots.back().time < horizon)
        throw ConfigError("volume csv: last time must be >= horizon T", lineno);
    return VolumeCurve::piecewise_linear(std::move(knots));
}

inline VolumeCurve load_volume_csv(const std::string& path, double horizon) {
    std::ifstream in(path);
    if (!in) throw ConfigError("volume csv: cannot open '" + path + "'");
    return parse_volume_csv(in, horizon);
}

// ---------------------------------------------------------------------------
// Problem instance.
// ---------------------------------------------------------------------------

struct MarketParams {
    double S0 = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;  ///< absolute risk aversion
    double psi = 0.0;    ///< proportional cost per share
};

struct LiquidationProblem {
    double q0 = 0.0;
    double T = 0.0;
    MarketParams market;
    VolumeCurve volume;
    ExecutionCostModel cost;
    PermanentImpactModel impact;

    /// gamma * sigma^2, the only way risk enters the optimal curve.
    double risk_rate() const noexcept { return market.gamma * market.sigma * market.sigma; }

    LiquidationProblem with_gamma(double g) const {
        auto p = *this;
        p.market.gamma = g;
        return p;
    }
    LiquidationProblem with_q0(double q) const {
        auto p = *this;
        p.q0 = q;
        return p;
    }
    LiquidationProblem with_horizon(double t) const {
        auto p = *this;
        p.T = t;
        return p;
    }
};

// ---------------------------------------------------------------------------
// Validation.
// ---------------------------------------------------------------------------

struct ValidationCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationCheck> checks;

    bool ok() const {
        return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
    }
    std::vector<ValidationCheck> failures() const {
        std::vector<ValidationCheck> out;
        for (const auto& c : checks)
            if (!c.passed) out.push_back(c);
        return out;
    }
    bool failed(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return !c.passed;
        return false;
    }
    std::string summary() const {
        std::ostringstream os;
        for (const auto& c : failures()) os << c.name << (c.detail.empty() ? "" : ": " + c.detail) << "; ";
        return os.str();
    }
};

namespace detail {

inline void check(ValidationReport& r, std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok, ok ? std::string{} : std::move(detail)});
}

/// Sampled shape checks shared by power-law and custom costs.
inline void check_cost_shape(ValidationReport& r, const ExecutionCostModel& cost) {
    const double bound = std::min(cost.sample_bound(), 1000.0);
    const int n = 201;
    std::vector<double> grid(n);
    for (int i = 0; i < n; ++i) grid[i] = -bound + 2.0 * bound * i / (n - 1);

    try {
        check(r, "cost.L(0)=0", eval_cost(cost, 0.0) == 0.0, "L(0) != 0");

        bool even = true, nonneg = true;
        for (double x : grid) {
            const double a = eval_cost(cost, x), b = eval_cost(cost, -x);
            if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) even = false;
            if (a < 0.0) nonneg = false;
        }
        check(r, "cost.even", even, "L(rho) != L(-rho) on sample grid");
        check(r, "cost.nonnegative", nonneg, "L < 0 on sample grid");

        bool increasing = true;
        for (int i = n / 2; i + 1 < n; ++i)
            if (!(eval_cost(cost, grid[i + 1]) > eval_cost(cost, grid[i]))) increasing = false;
        check(r, "cost.increasing", increasing, "L not strictly increasing on R+");

        bool convex = true;
        for (int i = 0; i < n && convex; ++i)
            for (int j = i + 1; j < n; j += 7) {
                const double a = grid[i], b = grid[j];
                const double mid = eval_cost(cost, 0.5 * (a + b));
                if (!(mid < 0.5 * (eval_cost(cost, a) + eval_cost(cost, b)))) {
                    convex = false;
                    break;
                }
            }
        check(r, "cost.strictly_convex", convex, "midpoint convexity violated on sample grid");

        // L(rho)/rho must keep growing; probe {10,100,1000}, scaled into the sample bound.
        const double top = std::min(cost.sample_bound(), 1000.0);
        const double probes[3] = {top / 100.0, top / 10.0, top};
        const double r0 = eval_cost(cost, probes[0]) / probes[0];
        const double r1 = eval_cost(cost, probes[1]) / probes[1];
        const double r2 = eval_cost(cost, probes[2]) / probes[2];
        check(r, "cost.superlinear", r0 < r1 && r1 < r2, "L(rho)/rho not increasing on probes");
    } catch (const Error& e) {
        check(r, "cost.evaluable", false, e.what());
    }
}

}  // namespace detail

inline ValidationReport validate(const LiquidationProblem& p) {
    ValidationReport r;
    using detail::check;

    check(r, "q0", std::isfinite(p.q0) && p.q0 >= 0.0, "q0 must be finite and >= 0");
    check(r, "T", std::isfinite(p.T) && p.T > 0.0, "T must be > 0");
    check(r, "S0", p.market.S0 > 0.0, "S0 must be > 0");
    check(r, "sigma", p.market.sigma > 0.0, "sigma must be > 0");
    check(r, "gamma", p.market.gamma > 0.0, "gamma must be > 0");
    check(r, "psi", p.market.psi >= 0.0, "psi must be >= 0");

    if (const auto* pl = p.cost.as_power_law()) {
        check(r, "cost.eta", pl->eta > 0.0, "eta must be > 0");
        check(r, "cost.phi", pl->phi > 0.0, "phi must be > 0");
        if (pl->eta > 0.0 && pl->phi > 0.0) detail::check_cost_shape(r, p.cost);
    } else {
        const auto* c = p.cost.as_custom();
        check(r, "cost.fn", static_cast<bool>(c->fn), "custom cost has no function");
        check(r, "cost.sample_bound", c->sample_bound > 0.0, "sample_bound must be > 0");
        if (c->fn && c->sample_bound > 0.0) detail::check_cost_shape(r, p.cost);
    }

    if (const auto* pl = p.impact.as_power_law()) {
        check(r, "impact.k", pl->k >= 0.0, "k must be >= 0");
        check(r, "impact.beta", pl->beta > 0.0 && pl->beta <= 1.0, "beta must lie in (0, 1]");
    } else {
        const auto* c = p.impact.as_custom();
        check(r, "impact.fn", static_cast<bool>(c->fn), "custom impact has no function");
        if (c->fn) {
            const double top = std::max(p.q0, 1.0);
            const int n = 201;
            bool odd = true, mono = true, concave = true;
            for (int i = 0; i < n; ++i) {
                const double z = top * i / (n - 1);
                const double fz = p.impact.F(z);
                if (std::abs(fz + p.impact.F(-z)) > 1e-12 * std::max(1.0, std::abs(fz))) odd = false;
                if (i + 1 < n && p.impact.F(top * (i + 1) / (n - 1)) < fz) mono = false;
                if (i > 0 && i + 1 < n) {
                    const double a = p.impact.F(top * (i - 1) / (n - 1));
                    const double b = p.impact.F(top * (i + 1) / (n - 1));
                    if (a + b - 2.0 * fz > 1e-12 * std::max(1.0, std::abs(fz))) concave = false;
                }
            }
            check(r, "impact.F(0)=0", p.impact.F(0.0) == 0.0, "F(0) != 0");
            check(r, "impact.odd", odd, "F not odd on sample grid");
            check(r, "impact.nondecreasing", mono, "F decreasing on sample grid");
            check(r, "impact.concave", concave, "F not concave on R+ sample grid");
        }
    }

    if (p.volume.is_constant()) {
        check(r, "volume.V", p.volume.level() > 0.0, "V must be > 0");
    } else {
        const auto& k = p.volume.knots();
        bool inc = true;
        for (std::size_t i = 1; i < k.size(); ++i)
            if (!(k[i].time > k[i - 1].time)) inc = false;
        check(r, "volume.knots", k.size() >= 2, "piecewise curve needs >= 2 knots");
        check(r, "volume.increasing_times", inc, "knot times must be strictly increasing");
        check(r, "volume.positive", p.volume.lo() > 0.0, "volumes must be > 0");
        check(r, "volume.covers_horizon", p.volume.covers(p.T), "knots must span [0, T]");
    }
    return r;
}

}  // namespace optexec
