#include "sirs/vi_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace sirs {

void Stencil::add(int idx, double coeff) {
    for (int m = 0; m < count; ++m) {
        if (nb[m].idx == idx) {
            nb[m].coeff += coeff;
            return;
        }
    }
    nb[count++] = {idx, coeff};
}

Stencil build_stencil(const TriGrid& grid, int j, int k, const Regime& reg,
                      const ModelParams& m) {
    if (!grid.contains(j, k)) throw std::invalid_argument("stencil node outside grid");
    const double h = grid.spacing();
    const State x = grid.node(j, k);
    const Drift b = drift(x, reg, m);

    Stencil st;
    st.diag = m.delta;
    st.cost = running_cost(x, reg, m);

    const bool hyp = (j + k == grid.n());

    // Transport part, upwinded. On the hypotenuse an inflowing i-drift has
    // no forward neighbor; there b = b_i*(-1,1) + (b_s+b_i)*(1,0) with
    // b_s + b_i <= 0, which discretizes on the in-triangle pair
    // (j-1,k+1), (j-1,k).
    if (hyp && b.di > 0.0) {
        if (j < 1) throw std::logic_error("inflowing i-drift at the (0,1) corner");
        st.diag += b.di / h;
        st.add(grid.index(j - 1, k + 1), -b.di / h);
        const double bs_tan = b.ds + b.di;  // <= 0 on the hypotenuse
        st.diag += -bs_tan / h;
        st.add(grid.index(j - 1, k), bs_tan / h);
    } else {
        if (b.ds > 0.0) {
            st.diag += b.ds / h;
            st.add(grid.index(j + 1, k), -b.ds / h);
        } else if (b.ds < 0.0) {
            st.diag += -b.ds / h;
            st.add(grid.index(j - 1, k), b.ds / h);
        }
        if (b.di > 0.0) {
            st.diag += b.di / h;
            st.add(grid.index(j, k + 1), -b.di / h);
        } else if (b.di < 0.0) {
            st.diag += -b.di / h;
            st.add(grid.index(j, k - 1), b.di / h);
        }
    }

    // Diffusion acts along (1,-1) only (the noise cancels in s+i), so the
    // whole second-order part is one centered difference along the
    // antidiagonal. Its coefficient vanishes on the s=0 and i=0 edges,
    // exactly where those neighbors would be missing.
    if (j >= 1 && k >= 1) {
        const double quad = m.sigma * m.sigma * x.s * x.s * x.i * x.i / (2.0 * h * h);
        if (quad > 0.0) {
            st.diag += 2.0 * quad;
            st.add(grid.index(j + 1, k - 1), -quad);
            st.add(grid.index(j - 1, k + 1), -quad);
        }
    }
    return st;
}

namespace {

std::array<std::vector<Stencil>, 4> build_all_stencils(const TriGrid& grid,
                                                       const ModelParams& m) {
    std::array<std::vector<Stencil>, 4> rows;
    for (int r = 0; r < 4; ++r) {
        rows[r].reserve(grid.node_count());
        const Regime reg = Regime::from_index(r);
        for (int idx = 0; idx < grid.node_count(); ++idx)
            rows[r].push_back(build_stencil(grid, grid.j_of(idx), grid.k_of(idx), reg, m));
    }
    return rows;
}

/// g at every node of regime `reg`, resolved against the current iterate.
std::vector<double> resolve_switch_costs(const SwitchCostSpec& spec, const Regime& reg,
                                         const TriGrid& grid,
                                         const std::array<std::vector<double>, 4>& values) {
    std::vector<double> g(grid.node_count());
    if (spec.kind == SwitchCostSpec::Kind::Constant) {
        std::fill(g.begin(), g.end(), spec.amount);
    } else {
        const auto& ref = values[spec.reference(reg.attack).index()];
        for (int idx = 0; idx < grid.node_count(); ++idx) g[idx] = spec.amount * ref[idx];
    }
    return g;
}

}  // namespace

ValueField solve_psor(const TriGrid& grid, const ModelParams& m, const SwitchCosts& costs,
                      const SolveOptions& options) {
    m.validate();
    if (!(options.tol > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (!(options.omega > 0.0 && options.omega <= 1.9))
        throw std::invalid_argument("relaxation omega must lie in (0, 1.9]");
    const double lambda = options.coupling_lambda.value_or(0.0);
    if (lambda < 0.0) throw std::invalid_argument("coupling lambda must be >= 0");

    const int count = grid.node_count();
    ValueField field;
    field.n = grid.n();
    field.tol = options.tol;
    field.omega = options.omega;
    field.coupling_lambda = options.coupling_lambda;
    if (options.warm_start) {
        if (options.warm_start->n != grid.n())
            throw std::invalid_argument("warm start field has a different grid size");
        field.values = options.warm_start->values;
    } else {
        for (auto& v : field.values) v.assign(count, 0.0);
    }

    const auto rows = build_all_stencils(grid, m);
    std::vector<double> residual_history;
    const double omega = options.omega;
    int phase1_passes = 0;

    // Phase 1: solve the four unconstrained equations. Starting the
    // projected passes from this supersolution matters for proportional
    // costs: from the zero field the resolved obstacle g = factor * 0
    // clamps everything at the spurious fixed point v = 0.
    if (!options.warm_start) {
        for (; phase1_passes < options.max_sweeps; ) {
            ++phase1_passes;
            double worst = 0.0;
            for (int r = 0; r < 4; ++r) {
                const Regime reg = Regime::from_index(r);
                auto& v = field.values[r];
                const auto& other_a = field.values[Regime{1 - reg.attack, reg.protect}.index()];
                const auto& row = rows[r];
                for (int idx = 0; idx < count; ++idx) {
                    const Stencil& st = row[idx];
                    double rhs = st.cost;
                    double diag = st.diag;
                    if (lambda > 0.0) {
                        rhs += lambda * other_a[idx];
                        diag += lambda;
                    }
                    for (int e = 0; e < st.count; ++e) rhs -= st.nb[e].coeff * v[st.nb[e].idx];
                    const double gs = rhs / diag;
                    worst = std::max(worst, std::abs(gs - v[idx]) * diag);
                    v[idx] = v[idx] + omega * (gs - v[idx]);
                }
            }
            if (worst <= options.tol) break;
        }
    }

    for (int pass = 1; pass <= options.max_sweeps; ++pass) {
        for (int r = 0; r < 4; ++r) {
            const Regime reg = Regime::from_index(r);
            auto& v = field.values[r];
            const auto& other_p = field.values[reg.flipped().index()];
            const auto& other_a = field.values[Regime{1 - reg.attack, reg.protect}.index()];
            const auto g = resolve_switch_costs(costs.from(reg.protect), reg, grid, field.values);
            const auto& row = rows[r];
            for (int idx = 0; idx < count; ++idx) {
                const Stencil& st = row[idx];
                double rhs = st.cost;
                double diag = st.diag;
                if (lambda > 0.0) {
                    rhs += lambda * other_a[idx];
                    diag += lambda;
                }
                for (int e = 0; e < st.count; ++e) rhs -= st.nb[e].coeff * v[st.nb[e].idx];
                const double gs = rhs / diag;
                const double relaxed = v[idx] + omega * (gs - v[idx]);
                v[idx] = std::min(relaxed, other_p[idx] + g[idx]);
            }
        }

        // Max-norm of min(pde residual, obstacle gap) over all regimes.
        double vi_max = 0.0;
        for (int r = 0; r < 4; ++r) {
            const Regime reg = Regime::from_index(r);
            const auto& v = field.values[r];
            const auto& other_p = field.values[reg.flipped().index()];
            const auto& other_a = field.values[Regime{1 - reg.attack, reg.protect}.index()];
            const auto g = resolve_switch_costs(costs.from(reg.protect), reg, grid, field.values);
            const auto& row = rows[r];
            for (int idx = 0; idx < count; ++idx) {
                const Stencil& st = row[idx];
                double resid = st.cost - st.diag * v[idx];
                if (lambda > 0.0) resid += lambda * (other_a[idx] - v[idx]);
                for (int e = 0; e < st.count; ++e) resid -= st.nb[e].coeff * v[st.nb[e].idx];
                const double gap = other_p[idx] + g[idx] - v[idx];
                vi_max = std::max(vi_max, std::abs(std::min(resid, gap)));
            }
        }
        residual_history.push_back(vi_max);
        if (vi_max <= options.tol) {
            field.sweeps = phase1_passes + pass;
            field.final_residual = vi_max;
            return field;
        }
    }

    std::ostringstream msg;
    msg << "projected Gauss-Seidel did not reach tol " << options.tol << " in "
        << options.max_sweeps << " passes (last residual " << residual_history.back() << ")";
    if (residual_history.size() > 50)
        residual_history.erase(residual_history.begin(), residual_history.end() - 50);
    throw ConvergenceError(msg.str(), std::move(residual_history));
}

ResidualReport residual_report(const ValueField& field, const TriGrid& grid,
                               const ModelParams& m, const SwitchCosts& costs,
                               std::optional<double> coupling_lambda) {
    if (field.n != grid.n()) throw std::invalid_argument("field/grid size mismatch");
    const double lambda = coupling_lambda.value_or(field.coupling_lambda.value_or(0.0));
    const int count = grid.node_count();
    const auto rows = build_all_stencils(grid, m);

    ResidualReport rep;
    rep.min_obstacle_gap = std::numeric_limits<double>::infinity();
    rep.max_pde_residual = -std::numeric_limits<double>::infinity();
    double l2 = 0.0;
    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        const auto& v = field.values[r];
        const auto& other_p = field.values[reg.flipped().index()];
        const auto& other_a = field.values[Regime{1 - reg.attack, reg.protect}.index()];
        const auto g = resolve_switch_costs(costs.from(reg.protect), reg, grid, field.values);
        rep.pde_residual[r].resize(count);
        rep.obstacle_gap[r].resize(count);
        rep.vi_residual[r].resize(count);
        rep.complementarity[r].resize(count);
        for (int idx = 0; idx < count; ++idx) {
            const Stencil& st = rows[r][idx];
            double resid = st.cost - st.diag * v[idx];
            if (lambda > 0.0) resid += lambda * (other_a[idx] - v[idx]);
            for (int e = 0; e < st.count; ++e) resid -= st.nb[e].coeff * v[st.nb[e].idx];
            const double gap = other_p[idx] + g[idx] - v[idx];
            rep.pde_residual[r][idx] = resid;
            rep.obstacle_gap[r][idx] = gap;
            rep.vi_residual[r][idx] = std::min(resid, gap);
            rep.complementarity[r][idx] = resid * gap;
            rep.max_pde_residual = std::max(rep.max_pde_residual, resid);
            rep.min_obstacle_gap = std::min(rep.min_obstacle_gap, gap);
            rep.max_abs_vi_residual =
                std::max(rep.max_abs_vi_residual, std::abs(rep.vi_residual[r][idx]));
            l2 += rep.vi_residual[r][idx] * rep.vi_residual[r][idx];
        }
    }
    rep.l2_vi_residual = std::sqrt(l2);
    return rep;
}

void save_value_field(const ValueField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write value field: " + path);
    out << "# n=" << field.n << "\n";
    if (!field.params_hash.empty()) out << "# params_hash=" << field.params_hash << "\n";
    char buf[96];
    std::snprintf(buf, sizeof(buf), "# tol=%.17g\n# omega=%.17g\n", field.tol, field.omega);
    out << buf;
    out << "# sweeps=" << field.sweeps << "\n";
    std::snprintf(buf, sizeof(buf), "# final_residual=%.17g\n", field.final_residual);
    out << buf;
    if (field.coupling_lambda) {
        std::snprintf(buf, sizeof(buf), "# coupling_lambda=%.17g\n", *field.coupling_lambda);
        out << buf;
    }
    out << "a,p,s,i,v\n";
    const TriGrid grid(field.n);
    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        for (int idx = 0; idx < grid.node_count(); ++idx) {
            const State x = grid.node(idx);
            std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%.17g\n", reg.attack, reg.protect,
                          x.s, x.i, field.values[r][idx]);
            out << buf;
        }
    }
}

ValueField load_value_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open value field: " + path);
    ValueField field;
    std::string line;
    bool have_header = false;
    std::optional<TriGrid> grid;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(" \t"));
            key.erase(key.find_last_not_of(" \t") + 1);
            const std::string value = line.substr(eq + 1);
            if (key == "n") field.n = std::stoi(value);
            else if (key == "params_hash") field.params_hash = value;
            else if (key == "tol") field.tol = std::stod(value);
            else if (key == "omega") field.omega = std::stod(value);
            else if (key == "sweeps") field.sweeps = std::stoi(value);
            else if (key == "final_residual") field.final_residual = std::stod(value);
            else if (key == "coupling_lambda") field.coupling_lambda = std::stod(value);
            continue;
        }
        if (!have_header) {
            if (line != "a,p,s,i,v")
                throw std::runtime_error("value field header mismatch in " + path);
            if (field.n <= 0) throw std::runtime_error("value field missing `# n=` in " + path);
            grid.emplace(field.n);
            for (auto& v : field.values) v.assign(grid->node_count(), 0.0);
            have_header = true;
            continue;
        }
        std::istringstream ss(line);
        int a, p;
        double s, i, v;
        char comma;
        if (!(ss >> a >> comma >> p >> comma >> s >> comma >> i >> comma >> v))
            throw std::runtime_error("bad value field row: " + line);
        const int j = static_cast<int>(std::lround(s * field.n));
        const int k = static_cast<int>(std::lround(i * field.n));
        if (!grid->contains(j, k)) throw std::runtime_error("value field row off-grid: " + line);
        field.values[Regime{a, p}.index()][grid->index(j, k)] = v;
    }
    if (!have_header) throw std::runtime_error("value field has no data: " + path);
    return field;
}

void save_residual_report(const ResidualReport& report, const TriGrid& grid,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write residual report: " + path);
    char buf[192];
    std::snprintf(buf, sizeof(buf),
                  "# max_pde_residual=%.10g\n# min_obstacle_gap=%.10g\n"
                  "# max_abs_vi_residual=%.10g\n# l2_vi_residual=%.10g\n",
                  report.max_pde_residual, report.min_obstacle_gap, report.max_abs_vi_residual,
                  report.l2_vi_residual);
    out << buf;
    out << "a,p,s,i,pde_residual,obstacle_gap,vi_residual,complementarity\n";
    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        for (int idx = 0; idx < grid.node_count(); ++idx) {
            const State x = grid.node(idx);
            std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                          reg.attack, reg.protect, x.s, x.i, report.pde_residual[r][idx],
                          report.obstacle_gap[r][idx], report.vi_residual[r][idx],
                          report.complementarity[r][idx]);
            out << buf;
        }
    }
}

}  // namespace sirs
