// Command-line front end: solves the switching problem on a grid or with
// the mesh-free trainer, simulates controlled paths under attack scenarios,
// and Monte Carlo evaluates policies. Exit codes: 0 success, 1 runtime
// failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "sirs/attacks.hpp"
#include "sirs/config.hpp"
#include "sirs/dgm.hpp"
#include "sirs/grid.hpp"
#include "sirs/manifest.hpp"
#include "sirs/mc_value.hpp"
#include "sirs/model.hpp"
#include "sirs/policy.hpp"
#include "sirs/rng.hpp"
#include "sirs/sde.hpp"
#include "sirs/svg.hpp"
#include "sirs/version.hpp"
#include "sirs/vi_grid.hpp"

namespace fs = std::filesystem;
using namespace sirs;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ProblemConfig resolve_config(const std::string& config_path, const std::string& scenario) {
    std::optional<ProblemConfig> base;
    if (scenario == "1") base = scenario1();
    else if (scenario == "2") base = scenario2();
    else if (scenario != "custom") throw UsageError("unknown scenario `" + scenario + "`");

    if (config_path.empty()) {
        if (!base) throw UsageError("a config file is required unless --scenario 1|2 is given");
        return *base;
    }
    // With a preset, the config file only overrides chosen keys.
    if (base) return parse_config_file(config_path, *base, /*require_model_keys=*/false);
    return parse_config_file(config_path);
}

AttackSchedule make_schedule(const ProblemConfig& cfg, double horizon, std::uint64_t seed) {
    switch (cfg.attack) {
        case ProblemConfig::AttackKind::Constant: return constant_attack(cfg.a0);
        case ProblemConfig::AttackKind::Poisson:
            return poisson_attack(cfg.lambda, cfg.a0, horizon, seed, cfg.step);
        case ProblemConfig::AttackKind::Explicit: return load_attack_csv(cfg.attack_csv, cfg.a0);
    }
    throw UsageError("unreachable attack kind");
}

AttackModel make_attack_model(const ProblemConfig& cfg) {
    switch (cfg.attack) {
        case ProblemConfig::AttackKind::Constant:
            return AttackModel::fixed(constant_attack(cfg.a0));
        case ProblemConfig::AttackKind::Poisson:
            return AttackModel::poisson(cfg.lambda, cfg.a0, cfg.step);
        case ProblemConfig::AttackKind::Explicit:
            return AttackModel::fixed(load_attack_csv(cfg.attack_csv, cfg.a0));
    }
    throw UsageError("unreachable attack kind");
}

ValueSource load_checked_source(const std::string& path, const ProblemConfig& cfg) {
    ValueSource src = ValueSource::load(path);
    const std::string expected = params_hash(cfg.params, cfg.costs);
    if (!src.params_hash().empty() && src.params_hash() != expected)
        throw UsageError("value source " + path + " was solved for params_hash " +
                         src.params_hash() + " but the configuration hashes to " + expected);
    return src;
}

int cmd_solve(const std::string& config_path, const std::string& scenario,
              const std::string& solver, int n, double tol, std::optional<double> lambda,
              const std::string& warm_path, long dgm_steps, double penalty,
              const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();
    const ProblemConfig cfg = resolve_config(config_path, scenario);
    fs::create_directories(out_dir);

    Manifest manifest("solve");
    manifest.set("solver", solver);
    manifest.set("params_hash", params_hash(cfg.params, cfg.costs));
    manifest.set_config(canonical_config_text(cfg));

    if (solver == "grid") {
        TriGrid grid(n);
        SolveOptions options;
        options.tol = tol;
        options.coupling_lambda = lambda;
        if (!warm_path.empty()) options.warm_start = load_value_field(warm_path);
        ValueField field = solve_psor(grid, cfg.params, cfg.costs, options);
        field.params_hash = params_hash(cfg.params, cfg.costs);
        save_value_field(field, (fs::path(out_dir) / "field.csv").string());
        const ResidualReport report = residual_report(field, grid, cfg.params, cfg.costs);
        save_residual_report(report, grid, (fs::path(out_dir) / "residual_report.csv").string());
        manifest.set("n", static_cast<long long>(n));
        manifest.set("tol", tol);
        if (lambda) manifest.set("coupling_lambda", *lambda);
        manifest.set("sweeps", static_cast<long long>(field.sweeps));
        manifest.set("final_residual", field.final_residual);
        manifest.set("max_abs_vi_residual", report.max_abs_vi_residual);
    } else if (solver == "dgm") {
        DgmConfig dgm_cfg;
        dgm_cfg.seed = cfg.seed;
        dgm_cfg.steps = dgm_steps;
        dgm_cfg.penalty_weight = penalty;
        const TrainResult result = train(dgm_cfg, cfg.params, cfg.costs);
        save_networks(result.nets, (fs::path(out_dir) / "networks.txt").string(),
                      params_hash(cfg.params, cfg.costs));
        save_loss_trace(result.trace, (fs::path(out_dir) / "loss_trace.csv").string());
        manifest.set("steps_run", static_cast<long long>(result.trace.size()));
        manifest.set("converged", result.converged ? "true" : "false");
        manifest.set("final_loss", result.trace.empty() ? 0.0 : result.trace.back().total);
        manifest.set("seed", static_cast<long long>(cfg.seed));
    } else {
        throw UsageError("unknown solver `" + solver + "` (want grid or dgm)");
    }

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
    manifest.set("wall_time_s", elapsed.count());
    manifest.write((fs::path(out_dir) / "manifest.txt").string());
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& scenario,
                 const std::string& value_source, std::optional<std::uint64_t> seed_flag,
                 long paths, const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();
    ProblemConfig cfg = resolve_config(config_path, scenario);
    if (seed_flag) cfg.seed = *seed_flag;
    fs::create_directories(out_dir);

    std::optional<ValueSource> src;
    if (!value_source.empty()) src = load_checked_source(value_source, cfg);

    Manifest manifest("simulate");
    manifest.set("scenario", scenario);
    manifest.set("paths", static_cast<long long>(paths));
    manifest.set("seed", static_cast<long long>(cfg.seed));
    manifest.set("params_hash", params_hash(cfg.params, cfg.costs));
    if (!value_source.empty()) manifest.set("value_source", value_source);
    manifest.set_config(canonical_config_text(cfg));

    PathConfig pc;
    pc.horizon = cfg.horizon;
    pc.step = cfg.step;
    pc.x0 = cfg.x0;

    if (paths <= 1) {
        pc.seed = cfg.seed;
        const AttackSchedule sched = make_schedule(cfg, cfg.horizon, substream(cfg.seed, 1));
        pc.regime0 = {sched.level_at(pc.t0), cfg.p0};

        const Trajectory base = simulate(cfg.params, sched, make_constant_policy(cfg.p0), pc);
        write_trajectory_csv(base, (fs::path(out_dir) / "trajectory_unprotected.csv").string());
        write_switch_log_csv(base, (fs::path(out_dir) / "switches_unprotected.csv").string());

        std::vector<SvgSeries> series{
            {"I unprotected", "#1f77b4", base.times, base.i},
            {"S unprotected", "#e377c2", base.times, base.s},
        };
        std::vector<SvgMarker> markers;

        if (src) {
            const ControlledRun run =
                simulate_controlled(cfg.params, *src, cfg.costs, sched, pc);
            write_trajectory_csv(run.trajectory,
                                 (fs::path(out_dir) / "trajectory_controlled.csv").string());
            write_owner_switch_log(run,
                                   (fs::path(out_dir) / "switches_controlled.csv").string());
            manifest.set("realized_discounted_cost", run.discounted_cost);
            manifest.set("owner_switches", static_cast<long long>(run.owner_switches.size()));

            series.insert(series.begin(),
                          {{"I controlled", "#e6a817", run.trajectory.times, run.trajectory.i},
                           {"S controlled", "#d62728", run.trajectory.times, run.trajectory.s}});
            for (const OwnerSwitch& sw : run.owner_switches)
                markers.push_back({sw.time, "#2ca02c", sw.to == 1 ? "protect" : "relax"});
            for (const SwitchEvent& sw : run.trajectory.attack_switches)
                markers.push_back({sw.time, "#1f77b4", sw.to == 1 ? "attack" : "pause"});

            if (src->grid()) {
                const RegionMask mask = switching_region(
                    *src, cfg.costs, *src->grid(), 1e-9 * value_upper_bound(cfg.params, cfg.costs));
                save_region_mask(mask, *src->grid(),
                                 (fs::path(out_dir) / "region_mask.csv").string());
            }
        }
        write_line_chart((fs::path(out_dir) / "chart.svg").string(),
                         "Controlled vs unprotected SIRS path", series, markers, "time (days)",
                         "fraction");
    } else {
        // Aggregate mode: per-path files are suppressed.
        const int n_steps = pc.n_steps();
        std::vector<double> sum_s_c(n_steps + 1, 0.0), sum_i_c(n_steps + 1, 0.0);
        std::vector<double> sum_s_u(n_steps + 1, 0.0), sum_i_u(n_steps + 1, 0.0);
        double terminal_c = 0.0, terminal_u = 0.0;
        for (long j = 0; j < paths; ++j) {
            PathConfig pj = pc;
            pj.seed = substream(cfg.seed, 2 * static_cast<std::uint64_t>(j));
            const AttackSchedule sched =
                make_schedule(cfg, cfg.horizon, substream(cfg.seed, 2 * j + 1));
            pj.regime0 = {sched.level_at(pj.t0), cfg.p0};
            const Trajectory unprotected =
                simulate(cfg.params, sched, make_constant_policy(cfg.p0), pj);
            for (int k = 0; k <= n_steps; ++k) {
                sum_s_u[k] += unprotected.s[k];
                sum_i_u[k] += unprotected.i[k];
            }
            terminal_u += unprotected.i.back();
            if (src) {
                const ControlledRun run =
                    simulate_controlled(cfg.params, *src, cfg.costs, sched, pj);
                for (int k = 0; k <= n_steps; ++k) {
                    sum_s_c[k] += run.trajectory.s[k];
                    sum_i_c[k] += run.trajectory.i[k];
                }
                terminal_c += run.trajectory.i.back();
            }
        }
        std::ofstream agg(fs::path(out_dir) / "aggregate.csv");
        agg << (src ? "t,s_mean,i_mean,s_mean_unprotected,i_mean_unprotected\n"
                    : "t,s_mean_unprotected,i_mean_unprotected\n");
        char buf[160];
        for (int k = 0; k <= n_steps; ++k) {
            const double t = pc.t0 + k * pc.step;
            if (src)
                std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g\n", t,
                              sum_s_c[k] / paths, sum_i_c[k] / paths, sum_s_u[k] / paths,
                              sum_i_u[k] / paths);
            else
                std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", t, sum_s_u[k] / paths,
                              sum_i_u[k] / paths);
            agg << buf;
        }
        manifest.set("mean_terminal_i_unprotected", terminal_u / paths);
        if (src) {
            manifest.set("mean_terminal_i_controlled", terminal_c / paths);
            manifest.set("terminal_i_ratio", terminal_c / terminal_u);
        }
    }

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
    manifest.set("wall_time_s", elapsed.count());
    manifest.write((fs::path(out_dir) / "manifest.txt").string());
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& scenario,
                 const std::string& value_source, const std::vector<std::string>& policies,
                 long paths, std::optional<std::uint64_t> seed_flag,
                 std::optional<double> mc_horizon, bool antithetic, const std::string& out_dir) {
    const auto t_start = std::chrono::steady_clock::now();
    ProblemConfig cfg = resolve_config(config_path, scenario);
    if (seed_flag) cfg.seed = *seed_flag;
    fs::create_directories(out_dir);

    std::optional<ValueSource> src;
    if (!value_source.empty()) src = load_checked_source(value_source, cfg);

    McOptions options;
    options.n_paths = paths;
    options.horizon = mc_horizon.value_or(2.0 * cfg.horizon);  // truncation doubled, tail reported
    options.step = cfg.step;
    options.seed = cfg.seed;
    options.x0 = cfg.x0;
    options.p0 = cfg.p0;
    options.antithetic = antithetic;

    const AttackModel attacks = make_attack_model(cfg);

    const auto make_factory = [&](const std::string& name) -> ControllerFactory {
        if (name == "never") return [&cfg] { return make_constant_policy(cfg.p0); };
        if (name == "always") return [] { return make_always_policy(1); };
        if (name.rfind("threshold:", 0) == 0) {
            const double thr = std::stod(name.substr(10));
            return [thr] { return make_threshold_policy(thr); };
        }
        if (name == "optimal") {
            if (!src) throw UsageError("--policy optimal needs --value-source");
            const double tol = 1e-9 * value_upper_bound(cfg.params, cfg.costs);
            return [&cfg, tol, s = *src] {
                return make_verification_policy(cfg.params, s, cfg.costs, tol);
            };
        }
        throw UsageError("unknown policy `" + name +
                         "` (want optimal, never, always, or threshold:<v>)");
    };

    Manifest manifest("evaluate");
    manifest.set("paths", static_cast<long long>(paths));
    manifest.set("seed", static_cast<long long>(cfg.seed));
    manifest.set("mc_horizon", options.horizon);
    manifest.set("antithetic", antithetic ? "true" : "false");
    manifest.set("params_hash", params_hash(cfg.params, cfg.costs));
    if (!value_source.empty()) manifest.set("value_source", value_source);
    manifest.set_config(canonical_config_text(cfg));

    const std::string summary = (fs::path(out_dir) / "summary.csv").string();
    std::vector<std::vector<double>> per_policy_costs;
    for (std::size_t idx = 0; idx < policies.size(); ++idx) {
        const auto factory = make_factory(policies[idx]);
        const ValueSource* src_ptr = src ? &*src : nullptr;
        const McResult result =
            evaluate(cfg.params, cfg.costs, factory, attacks, options, src_ptr);
        append_mc_summary(summary, policies[idx], result, cfg.seed, idx == 0);
        per_policy_costs.push_back(
            evaluate_paths(cfg.params, cfg.costs, factory, attacks, options, src_ptr));
        manifest.set("mean_" + policies[idx], result.mean);
    }

    if (policies.size() > 1) {
        std::ofstream paired(fs::path(out_dir) / "paired.csv");
        paired << "policy_a,policy_b,mean_diff,se_diff\n";
        char buf[192];
        for (std::size_t a = 0; a < policies.size(); ++a)
            for (std::size_t b = a + 1; b < policies.size(); ++b) {
                const auto& ca = per_policy_costs[a];
                const auto& cb = per_policy_costs[b];
                double mean = 0.0;
                for (std::size_t j = 0; j < ca.size(); ++j) mean += ca[j] - cb[j];
                mean /= static_cast<double>(ca.size());
                double ss = 0.0;
                for (std::size_t j = 0; j < ca.size(); ++j)
                    ss += (ca[j] - cb[j] - mean) * (ca[j] - cb[j] - mean);
                const double se =
                    ca.size() > 1
                        ? std::sqrt(ss / (static_cast<double>(ca.size()) - 1.0) / ca.size())
                        : 0.0;
                std::snprintf(buf, sizeof(buf), "%s,%s,%.10g,%.10g\n", policies[a].c_str(),
                              policies[b].c_str(), mean, se);
                paired << buf;
            }
    }

    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start);
    manifest.set("wall_time_s", elapsed.count());
    manifest.write((fs::path(out_dir) / "manifest.txt").string());
    std::cout << "wrote " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal on/off protection switching for a cyber-epidemic SIRS cluster"};
    app.set_version_flag("--version", std::string("sirsctl ") + kVersion);
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "solve the switching problem for a config");
    std::string solve_config, solve_scenario = "custom", solver = "grid", warm, solve_out = "out";
    int grid_n = 64;
    double tol = 1e-8, penalty = 0.0;
    long dgm_steps = 50000;
    std::optional<double> coupling_lambda;
    solve->add_option("config", solve_config, "key = value config file");
    solve->add_option("--scenario", solve_scenario, "1, 2, or custom (default custom)");
    solve->add_option("--solver", solver, "grid or dgm (default grid)");
    solve->add_option("--n", grid_n, "grid subdivisions (default 64)");
    solve->add_option("--tol", tol, "solver tolerance (default 1e-8)");
    solve->add_option("--coupling-lambda", coupling_lambda,
                      "add the exogenous-switch term lambda*(v(!a,p)-v(a,p))");
    solve->add_option("--warm-start", warm, "previously exported field for warm start");
    solve->add_option("--steps", dgm_steps, "dgm step budget (default 50000)");
    solve->add_option("--penalty-weight", penalty, "dgm obstacle penalty weight (default 0)");
    solve->add_option("--out", solve_out, "output directory (default out)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "simulate controlled and unprotected paths");
    std::string sim_config, sim_scenario = "custom", sim_source, sim_out = "out";
    long sim_paths = 1;
    std::optional<std::uint64_t> sim_seed;
    sim->add_option("config", sim_config, "key = value config file");
    sim->add_option("--scenario", sim_scenario, "1, 2, or custom (default custom)");
    sim->add_option("--value-source", sim_source, "field CSV or network checkpoint");
    sim->add_option("--seed", sim_seed, "override the config seed");
    sim->add_option("--paths", sim_paths, "path count; >1 switches to aggregate output");
    sim->add_option("--out", sim_out, "output directory (default out)");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Monte Carlo policy evaluation");
    std::string ev_config, ev_scenario = "custom", ev_source, ev_out = "out";
    std::vector<std::string> ev_policies{"never"};
    long ev_paths = 10000;
    std::optional<std::uint64_t> ev_seed;
    std::optional<double> ev_horizon;
    bool ev_antithetic = false;
    ev->add_option("config", ev_config, "key = value config file");
    ev->add_option("--scenario", ev_scenario, "1, 2, or custom (default custom)");
    ev->add_option("--value-source", ev_source, "field CSV or network checkpoint");
    ev->add_option("--policy", ev_policies,
                   "policies: optimal, never, always, threshold:<v> (repeatable)")
        ->delimiter(',');
    ev->add_option("--paths", ev_paths, "paths per policy (default 10000)");
    ev->add_option("--seed", ev_seed, "override the config seed");
    ev->add_option("--mc-horizon", ev_horizon, "truncation horizon (default 2x config horizon)");
    ev->add_flag("--antithetic", ev_antithetic, "antithetic pairing");
    ev->add_option("--out", ev_out, "output directory (default out)");

    try {
        app.parse(argc, argv);
        if (solve->parsed())
            return cmd_solve(solve_config, solve_scenario, solver, grid_n, tol, coupling_lambda,
                             warm, dgm_steps, penalty, solve_out);
        if (sim->parsed())
            return cmd_simulate(sim_config, sim_scenario, sim_source, sim_seed, sim_paths,
                                sim_out);
        if (ev->parsed())
            return cmd_evaluate(ev_config, ev_scenario, ev_source, ev_policies, ev_paths, ev_seed,
                                ev_horizon, ev_antithetic, ev_out);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
