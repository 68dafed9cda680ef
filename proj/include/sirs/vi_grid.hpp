#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirs/grid.hpp"
#include "sirs/model.hpp"

namespace sirs {

/// Finite-difference row of delta*v - Lv at one node: diag*v + sum of
/// coeff*v_neighbor = running cost. Off-diagonal coefficients are <= 0 and
/// the diagonal is strictly positive, so sweeps are monotone.
struct Stencil {
    struct Entry {
        int idx = -1;
        double coeff = 0.0;
    };
    double diag = 0.0;
    double cost = 0.0;
    int count = 0;
    std::array<Entry, 6> nb{};

    void add(int idx, double coeff);
};

/// Builds the row for node (j, k). First-order terms are upwinded by drift
/// sign; the second-order part, which acts only along the antidiagonal
/// direction (1,-1), is a centered second difference along that diagonal.
/// Where the upwind i-neighbor would leave the triangle (hypotenuse nodes
/// with inflowing i-drift) the drift is rewritten on the tangent/backward
/// pair, which keeps every off-diagonal nonpositive.
Stencil build_stencil(const TriGrid& grid, int j, int k, const Regime& reg,
                      const ModelParams& m);

/// Per-regime grid of value approximations plus solve metadata.
struct ValueField {
    int n = 0;
    std::array<std::vector<double>, 4> values;  ///< indexed by Regime::index()

    std::string params_hash;
    double tol = 0.0;
    double omega = 0.0;
    int sweeps = 0;
    double final_residual = 0.0;
    std::optional<double> coupling_lambda;

    const std::vector<double>& of(const Regime& reg) const { return values[reg.index()]; }
    std::vector<double>& of(const Regime& reg) { return values[reg.index()]; }
};

struct SolveOptions {
    double tol = 1e-8;            ///< max-norm of the complementarity residual
    int max_sweeps = 100000;      ///< outer passes over the four regimes
    double omega = 1.0;           ///< relaxation, in (0, 1.9]; >1 can cycle against
                                  ///< the moving cross-regime obstacle
    std::optional<double> coupling_lambda;  ///< exogenous-switch rate term, off by default
    std::optional<ValueField> warm_start;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, std::vector<double> history)
        : std::runtime_error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Solves the four-regime system of variational inequalities by projected
/// Gauss-Seidel sweeps, regimes cycled in the order (0,0),(0,1),(1,0),(1,1).
/// Each value is capped by the flipped regime's value plus the switching
/// cost; proportional costs are re-resolved from the current iterate at the
/// start of every pass.
ValueField solve_psor(const TriGrid& grid, const ModelParams& m, const SwitchCosts& costs,
                      const SolveOptions& options = {});

/// Pointwise solver diagnostics. `pde_residual` is -delta*v + Lv + cost
/// (plus the coupling term when enabled), `obstacle_gap` is
/// v(flipped) + g - v, and `vi_residual` their min, which is the quantity
/// the solver drives to zero.
struct ResidualReport {
    std::array<std::vector<double>, 4> pde_residual;
    std::array<std::vector<double>, 4> obstacle_gap;
    std::array<std::vector<double>, 4> vi_residual;
    std::array<std::vector<double>, 4> complementarity;  ///< residual * gap

    double max_pde_residual = 0.0;       ///< signed max over all nodes/regimes
    double min_obstacle_gap = 0.0;
    double max_abs_vi_residual = 0.0;
    double l2_vi_residual = 0.0;
};

ResidualReport residual_report(const ValueField& field, const TriGrid& grid,
                               const ModelParams& m, const SwitchCosts& costs,
                               std::optional<double> coupling_lambda = std::nullopt);

/// CSV layout: `# key=value` metadata lines, a `a,p,s,i,v` header, then one
/// row per regime and node.
void save_value_field(const ValueField& field, const std::string& path);
ValueField load_value_field(const std::string& path);

void save_residual_report(const ResidualReport& report, const TriGrid& grid,
                          const std::string& path);

}  // namespace sirs
