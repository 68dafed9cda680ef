#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sirs/config.hpp"
#include "sirs/vi_grid.hpp"
#include "support/oracle_dp.hpp"

using namespace sirs;

namespace {
const ModelParams scn1 = scenario1().params;
const SwitchCosts const_costs{SwitchCostSpec::constant(0.002), SwitchCostSpec::constant(0.002)};

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}
}  // namespace

TEST_CASE("stencil coefficients at a pinned interior node") {
    const TriGrid grid(8);
    const Stencil st = build_stencil(grid, 4, 2, {1, 1}, scn1);
    // Hand recomputation at (s,i) = (0.5, 0.25): drift (-0.0445, 0.025),
    // diffusion weight sigma^2 s^2 i^2 / (2h^2) = 0.02.
    CHECK(st.diag == doctest::Approx(0.796).epsilon(1e-12));
    CHECK(st.cost == doctest::Approx(0.00325).epsilon(1e-12));
    const auto coeff_at = [&](int j, int k) {
        for (int e = 0; e < st.count; ++e)
            if (st.nb[e].idx == grid.index(j, k)) return st.nb[e].coeff;
        return 0.0;
    };
    CHECK(coeff_at(3, 2) == doctest::Approx(-0.356).epsilon(1e-12));   // backward s
    CHECK(coeff_at(5, 2) == 0.0);                                      // no forward s
    CHECK(coeff_at(4, 3) == doctest::Approx(-0.2).epsilon(1e-12));     // forward i
    CHECK(coeff_at(5, 1) == doctest::Approx(-0.02).epsilon(1e-12));    // antidiagonal
    CHECK(coeff_at(3, 3) == doctest::Approx(-0.02).epsilon(1e-12));
}

TEST_CASE("edge and degenerate stencils") {
    const TriGrid grid(8);
    // s = 0 edge: diffusion weight vanishes, so only the i-transport and
    // the rho inflow remain.
    const Stencil edge = build_stencil(grid, 0, 3, {1, 0}, scn1);
    for (int e = 0; e < edge.count; ++e) {
        const int j = grid.j_of(edge.nb[e].idx);
        const int k = grid.k_of(edge.nb[e].idx);
        CHECK((j == 1 || (j == 0 && k == 2)));  // forward s (rho) or backward i
    }

    ModelParams quiet = scn1;
    quiet.sigma = 0.0;
    const Stencil transport = build_stencil(grid, 4, 2, {1, 1}, quiet);
    CHECK(transport.count == 2);  // pure upwind transport plus the discount diagonal
    CHECK(transport.diag == doctest::Approx(0.2 + 0.356 + 0.2).epsilon(1e-12));
}

TEST_CASE("stencils stay monotone and annihilate constants") {
    for (int n : {8, 16}) {
        const TriGrid grid(n);
        for (int r = 0; r < 4; ++r) {
            const Regime reg = Regime::from_index(r);
            for (int idx = 0; idx < grid.node_count(); ++idx) {
                const Stencil st = build_stencil(grid, grid.j_of(idx), grid.k_of(idx), reg, scn1);
                CHECK(st.diag >= scn1.delta - 1e-15);
                double row = st.diag;
                for (int e = 0; e < st.count; ++e) {
                    CHECK(st.nb[e].coeff <= 1e-15);  // off-diagonals nonpositive
                    row += st.nb[e].coeff;
                }
                CHECK(row == doctest::Approx(scn1.delta).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("zero running cost solves to the zero field") {
    ModelParams free = scn1;
    free.c_infect = 0.0;
    free.c_protect = 0.0;
    const TriGrid grid(8);
    const ValueField field = solve_psor(grid, free, const_costs);
    for (int r = 0; r < 4; ++r)
        for (double v : field.values[r]) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("rho = 0 reproduces the analytic s = 0 edge values") {
    ModelParams sir = scn1;
    sir.rho = 0.0;
    const TriGrid grid(16);
    const ValueField field = solve_psor(grid, sir, scenario1().costs);
    for (int k = 0; k <= grid.n(); ++k) {
        const int idx = grid.index(0, k);
        const double expected = boundary_value(k * grid.spacing(), sir);
        for (int r = 0; r < 4; ++r)
            CHECK(field.values[r][idx] == doctest::Approx(expected).epsilon(1e-6));
    }
}

TEST_CASE("small-instance agreement with the time-marching oracle") {
    const TriGrid grid(8);
    const ValueField psor = solve_psor(grid, scn1, const_costs);
    const oracle::DpOptions opt{0.05, 1e-12, 200000};
    const auto dp = oracle::dp_value(grid, scn1, 0.002, 0.002, opt);

    double value_scale = 0.0, diff = 0.0;
    for (int r = 0; r < 4; ++r) {
        diff = std::max(diff, max_abs_diff(psor.values[r], dp[r]));
        for (double v : dp[r]) value_scale = std::max(value_scale, v);
    }
    CHECK(value_scale > 0.01);  // both solvers produce a nontrivial field
    CHECK(diff <= 2.0 * (grid.spacing() + opt.time_step));
    std::printf("psor vs dp oracle: max diff %.3e (scale %.3e)\n", diff, value_scale);
}

TEST_CASE("raising the infection cost never lowers the value") {
    const TriGrid grid(12);
    const ValueField lo = solve_psor(grid, scn1, const_costs);
    ModelParams pricier = scn1;
    pricier.c_infect = 0.02;
    const ValueField hi = solve_psor(grid, pricier, const_costs);
    for (int r = 0; r < 4; ++r)
        for (int idx = 0; idx < grid.node_count(); ++idx)
            CHECK(hi.values[r][idx] >= lo.values[r][idx] - 1e-10);
}

TEST_CASE("values stay inside the exported bounds") {
    const TriGrid grid(12);
    for (const SwitchCosts& costs : {const_costs, scenario1().costs}) {
        const ValueField field = solve_psor(grid, scn1, costs);
        const double cap = value_upper_bound(scn1, costs);
        for (int r = 0; r < 4; ++r)
            for (double v : field.values[r]) {
                CHECK(v >= -1e-12);
                CHECK(v <= cap + 1e-12);
            }
    }
}

TEST_CASE("successive refinements contract") {
    const SwitchCosts costs = scenario1().costs;
    const TriGrid g16(16), g32(32), g64(64);
    const ValueField f16 = solve_psor(g16, scn1, costs);
    const ValueField f32 = solve_psor(g32, scn1, costs);
    const ValueField f64 = solve_psor(g64, scn1, costs);
    // compare on the common (coarse) nodes
    const auto diff_on_coarse = [](const TriGrid& coarse, const ValueField& fc,
                                   const TriGrid& fine, const ValueField& ff) {
        double d = 0.0;
        const int ratio = fine.n() / coarse.n();
        for (int idx = 0; idx < coarse.node_count(); ++idx) {
            const int j = coarse.j_of(idx), k = coarse.k_of(idx);
            for (int r = 0; r < 4; ++r)
                d = std::max(d, std::abs(fc.values[r][idx] -
                                         ff.values[r][fine.index(j * ratio, k * ratio)]));
        }
        return d;
    };
    const double d1 = diff_on_coarse(g16, f16, g32, f32);
    const double d2 = diff_on_coarse(g32, f32, g64, f64);
    std::printf("refinement diffs: 16->32 %.3e, 32->64 %.3e\n", d1, d2);
    CHECK(d2 < d1);
}

TEST_CASE("a huge constant cost decouples the four equations") {
    const TriGrid grid(12);
    const SwitchCosts huge{SwitchCostSpec::constant(1e6), SwitchCostSpec::constant(1e6)};
    const ValueField field = solve_psor(grid, scn1, huge);
    const ResidualReport rep = residual_report(field, grid, scn1, huge);
    // obstacle never binds: every gap stays close to the huge g
    CHECK(rep.min_obstacle_gap > 1e5);
    // and the unconstrained PDE holds everywhere
    CHECK(rep.max_abs_vi_residual <= field.tol);
    for (int r = 0; r < 4; ++r)
        for (int idx = 0; idx < grid.node_count(); ++idx)
            CHECK(std::abs(rep.pde_residual[r][idx]) <= field.tol * 10);
}

TEST_CASE("residual report flags perturbations and zero fields") {
    const TriGrid grid(8);
    ValueField field = solve_psor(grid, scn1, const_costs);
    const ResidualReport clean = residual_report(field, grid, scn1, const_costs);
    CHECK(clean.max_abs_vi_residual <= field.tol);

    ValueField poked = field;
    const int node = grid.index(3, 3);
    poked.values[2][node] += 1e-4;
    const ResidualReport dirty = residual_report(poked, grid, scn1, const_costs);
    CHECK(std::abs(dirty.pde_residual[2][node]) > 1e-6);

    ValueField zero = field;
    for (auto& v : zero.values) std::fill(v.begin(), v.end(), 0.0);
    const ResidualReport from_zero = residual_report(zero, grid, scn1, const_costs);
    // the residual of the zero field is the source term, so its max is the
    // largest running cost attained on the triangle
    double worst_cost = 0.0;
    for (int r = 0; r < 4; ++r)
        for (int idx = 0; idx < grid.node_count(); ++idx)
            worst_cost =
                std::max(worst_cost, running_cost(grid.node(idx), Regime::from_index(r), scn1));
    CHECK(from_zero.max_pde_residual == doctest::Approx(worst_cost).epsilon(1e-12));
}

TEST_CASE("coupling term shifts the solution continuously") {
    const TriGrid grid(8);
    SolveOptions options;
    options.coupling_lambda = 0.0;
    const ValueField off = solve_psor(grid, scn1, const_costs, options);
    const ValueField plain = solve_psor(grid, scn1, const_costs);
    for (int r = 0; r < 4; ++r) CHECK(max_abs_diff(off.values[r], plain.values[r]) <= 1e-7);

    options.coupling_lambda = 0.1;
    const ValueField coupled = solve_psor(grid, scn1, const_costs, options);
    // with the term on, the calm-attack values feel the attacked ones
    double moved = 0.0;
    for (int r = 0; r < 4; ++r) moved = std::max(moved, max_abs_diff(coupled.values[r], plain.values[r]));
    CHECK(moved > 1e-5);
    const ResidualReport rep = residual_report(coupled, grid, scn1, const_costs, 0.1);
    CHECK(rep.max_abs_vi_residual <= coupled.tol);
}

TEST_CASE("warm start accepts a previous solution") {
    const TriGrid grid(8);
    const ValueField cold = solve_psor(grid, scn1, const_costs);
    SolveOptions options;
    options.warm_start = cold;
    const ValueField warm = solve_psor(grid, scn1, const_costs, options);
    CHECK(warm.sweeps <= 2);
    for (int r = 0; r < 4; ++r) CHECK(max_abs_diff(warm.values[r], cold.values[r]) <= 1e-6);
}

TEST_CASE("non-convergence reports the residual history") {
    const TriGrid grid(8);
    SolveOptions options;
    options.max_sweeps = 2;
    options.tol = 1e-14;
    try {
        solve_psor(grid, scn1, const_costs, options);
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.residual_history.size() == 2);
        CHECK(e.residual_history.back() > 1e-14);
    }
}

TEST_CASE("field CSV round-trips") {
    const TriGrid grid(8);
    ValueField field = solve_psor(grid, scn1, const_costs);
    field.params_hash = params_hash(scn1, const_costs);
    const auto path = std::filesystem::temp_directory_path() / "sirs_field_roundtrip.csv";
    save_value_field(field, path.string());
    const ValueField back = load_value_field(path.string());
    CHECK(back.n == field.n);
    CHECK(back.params_hash == field.params_hash);
    for (int r = 0; r < 4; ++r) CHECK(max_abs_diff(back.values[r], field.values[r]) == 0.0);
    std::filesystem::remove(path);
}

TEST_CASE("solver rejects bad options") {
    const TriGrid grid(4);
    SolveOptions options;
    options.omega = 2.5;
    CHECK_THROWS_AS(solve_psor(grid, scn1, const_costs, options), std::invalid_argument);
    options.omega = 1.5;
    options.tol = -1.0;
    CHECK_THROWS_AS(solve_psor(grid, scn1, const_costs, options), std::invalid_argument);
}
