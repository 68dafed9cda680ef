#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace sirs {

/// Rates of the protected SIRS cluster and of the owner's cost functional.
/// All rates are per day; sigma is dimensionless.
struct ModelParams {
    double beta = 0.04;    ///< contagion rate
    double gamma = 0.02;   ///< recovery (replacement) rate
    double rho = 0.002;    ///< obsolescence rate, removed back to susceptible
    double nu = 0.05;      ///< attack intensity while a = 1
    double kappa = 0.03;   ///< protection intensity while p = 1
    double sigma = 0.2;    ///< transmission volatility
    double delta = 0.2;    ///< discount rate
    double c_infect = 0.01;   ///< marginal cost per unit of infected mass
    double c_protect = 0.05;  ///< marginal cost per unit of protection flow

    void validate() const {
        auto nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
        if (!(nonneg(beta) && nonneg(gamma) && nonneg(rho) && nonneg(nu) && nonneg(kappa) &&
              nonneg(sigma) && nonneg(c_infect) && nonneg(c_protect)))
            throw std::invalid_argument("model parameters must be finite and nonnegative");
        if (!(std::isfinite(delta) && delta > 0.0))
            throw std::invalid_argument("discount rate delta must be positive");
    }
};

/// Joint regime of the exogenous attack level a and the owner's protection
/// level p, both binary.
struct Regime {
    int attack = 0;
    int protect = 0;

    /// Regime with the protection level flipped.
    Regime flipped() const { return {attack, 1 - protect}; }
    /// Dense index in the cyclic solver order (0,0),(0,1),(1,0),(1,1).
    int index() const { return attack * 2 + protect; }
    static Regime from_index(int idx) { return {idx / 2, idx % 2}; }
    bool operator==(const Regime&) const = default;
};

/// Point of the simplex D = {s >= 0, i >= 0, s + i <= 1}. The removed
/// fraction is always derived as r = 1 - s - i, never stored.
struct State {
    double s = 1.0;
    double i = 0.0;

    double r() const { return 1.0 - s - i; }
    bool valid(double tol = 1e-12) const {
        return s >= -tol && i >= -tol && s + i <= 1.0 + tol;
    }
};

struct Drift {
    double ds = 0.0;
    double di = 0.0;
};

/// Drift of (S, I) in regime (a, p).
inline Drift drift(const State& x, const Regime& reg, const ModelParams& m) {
    const double a = static_cast<double>(reg.attack);
    const double p = static_cast<double>(reg.protect);
    return {m.rho * (1.0 - x.s - x.i) - x.s * (p * m.kappa + a * m.nu + m.beta * x.i),
            a * m.nu * x.s - m.gamma * x.i + m.beta * x.s * x.i};
}

/// Magnitude sigma*s*i of the common noise term. The caller applies it with
/// sign - on dS and + on dI with the same Brownian increment.
inline double diffusion(const State& x, const ModelParams& m) {
    return m.sigma * x.s * x.i;
}

/// Instantaneous cost rate c_I*i + c_V*kappa*s*p.
inline double running_cost(const State& x, const Regime& reg, const ModelParams& m) {
    return m.c_infect * x.i + m.c_protect * m.kappa * x.s * static_cast<double>(reg.protect);
}

/// Value and first/second partials of a C^2 function at a point, in the
/// order shared by grid stencils and network derivative propagation.
struct ValueDerivs {
    double v = 0.0;
    double vs = 0.0;
    double vi = 0.0;
    double vss = 0.0;
    double vii = 0.0;
    double vsi = 0.0;
};

/// Applies the generator of the controlled diffusion to precomputed
/// derivatives. The value itself is unused; callers add the -delta*v term.
inline double generator_apply(const ValueDerivs& d, const State& x, const Regime& reg,
                              const ModelParams& m) {
    const Drift b = drift(x, reg, m);
    const double a2 = 0.5 * m.sigma * m.sigma * x.s * x.s * x.i * x.i;
    return b.ds * d.vs + b.di * d.vi + a2 * (d.vss + d.vii - 2.0 * d.vsi);
}

/// Value on the s = 0 edge, c_I*i/(delta+gamma). Exact for the SIR
/// sub-case rho = 0; used as the boundary datum of the mesh-free trainer
/// for any rho.
inline double boundary_value(double i, const ModelParams& m) {
    return m.c_infect * i / (m.delta + m.gamma);
}

/// Largest possible running cost on D.
inline double max_running_cost(const ModelParams& m) {
    return m.c_infect + m.c_protect * m.kappa;
}

/// Cost of one protection switch. Either a fixed positive amount or a
/// fraction of the value of a referenced regime at the switching state.
struct SwitchCostSpec {
    enum class Kind { Constant, Proportional };

    Kind kind = Kind::Constant;
    double amount = 0.0;               ///< g if Constant, factor if Proportional
    std::optional<int> ref_attack;     ///< fixed attack level, or current if empty
    int ref_protect = 0;

    static SwitchCostSpec constant(double g) {
        if (!(std::isfinite(g) && g > 0.0))
            throw std::invalid_argument("constant switching cost must be positive");
        return {Kind::Constant, g, std::nullopt, 0};
    }

    static SwitchCostSpec proportional(double factor, std::optional<int> ref_attack,
                                       int ref_protect) {
        if (!(std::isfinite(factor) && factor >= 0.0 && factor < 1.0))
            throw std::invalid_argument("proportional switching factor must lie in [0,1)");
        return {Kind::Proportional, factor, ref_attack, ref_protect};
    }

    /// Regime whose value the proportional form scales, given the current
    /// attack level.
    Regime reference(int current_attack) const {
        return {ref_attack.value_or(current_attack), ref_protect};
    }
};

/// One spec per direction of the protection switch.
struct SwitchCosts {
    SwitchCostSpec up = SwitchCostSpec::constant(1e-3);    ///< p: 0 -> 1
    SwitchCostSpec down = SwitchCostSpec::constant(1e-3);  ///< p: 1 -> 0

    const SwitchCostSpec& from(int p) const { return p == 0 ? up : down; }

    double max_factor() const {
        double f = 0.0;
        if (up.kind == SwitchCostSpec::Kind::Proportional) f = std::max(f, up.amount);
        if (down.kind == SwitchCostSpec::Kind::Proportional) f = std::max(f, down.amount);
        return f;
    }
    double max_constant() const {
        double g = 0.0;
        if (up.kind == SwitchCostSpec::Kind::Constant) g = std::max(g, up.amount);
        if (down.kind == SwitchCostSpec::Kind::Constant) g = std::max(g, down.amount);
        return g;
    }
};

/// Per-regime value lookup used to resolve proportional switching costs.
using ValueLookup = std::function<double(const State&, const Regime&)>;

/// Resolves a switching cost at a state. `current` is the regime in force
/// just before the switch. Proportional specs require a value lookup.
inline double switch_cost(const SwitchCostSpec& spec, const ValueLookup& values, const State& x,
                          const Regime& current) {
    if (spec.kind == SwitchCostSpec::Kind::Constant) return spec.amount;
    if (!values)
        throw std::invalid_argument(
            "proportional switching cost needs a value source for the referenced regime");
    return spec.amount * values(x, spec.reference(current.attack));
}

/// Upper bound on any admissible value: the cost of never switching is at
/// most max_running_cost/delta, and switching can add at most the largest
/// cost of one switch. For proportional costs the bound solves the implied
/// fixed point b = base + factor*b.
inline double value_upper_bound(const ModelParams& m, const SwitchCosts& costs) {
    const double base = max_running_cost(m) / m.delta;
    const double f = costs.max_factor();
    return (base + costs.max_constant()) / (1.0 - f);
}

}  // namespace sirs
