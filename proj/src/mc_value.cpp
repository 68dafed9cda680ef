#include "sirs/mc_value.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "sirs/parallel.hpp"
#include "sirs/rng.hpp"

namespace sirs {

AttackModel AttackModel::fixed(AttackSchedule sched) {
    AttackModel model;
    model.kind = Kind::Fixed;
    model.a0 = sched.a0;
    model.schedule = std::move(sched);
    return model;
}

AttackModel AttackModel::poisson(double lambda, int a0, double min_gap) {
    AttackModel model;
    model.kind = Kind::Poisson;
    model.lambda = lambda;
    model.a0 = a0;
    model.min_gap = min_gap;
    return model;
}

AttackSchedule AttackModel::realize(double horizon, std::uint64_t seed) const {
    if (kind == Kind::Fixed) return schedule;
    return poisson_attack(lambda, a0, horizon, seed, min_gap);
}

namespace {

double run_path(const ModelParams& m, const SwitchCosts& costs, const PolicyFn& policy,
                const AttackModel& attacks, const McOptions& options, const ValueSource* src,
                long j) {
    PathConfig pc;
    pc.t0 = 0.0;
    pc.horizon = options.horizon;
    pc.step = options.step;
    pc.x0 = options.x0;
    const long pair = options.antithetic ? j / 2 : j;
    pc.seed = substream(options.seed, 2 * static_cast<std::uint64_t>(pair));
    pc.negate_noise = options.antithetic && (j % 2 == 1);

    const AttackSchedule sched =
        attacks.realize(options.horizon,
                        substream(options.seed, 2 * static_cast<std::uint64_t>(pair) + 1));
    pc.regime0 = {sched.level_at(pc.t0), options.p0};

    const Trajectory traj = simulate(m, sched, policy, pc);
    double cost = discounted_running_cost(traj, m);

    const ValueLookup lookup = src ? src->lookup() : ValueLookup{};
    for (const SwitchEvent& sw : traj.protection_switches) {
        const auto k = static_cast<std::size_t>(std::llround((sw.time - pc.t0) / pc.step));
        const State x{traj.s[k], traj.i[k]};
        const double g = switch_cost(costs.from(sw.from), lookup, x, Regime{traj.a[k], sw.from});
        cost += std::exp(-m.delta * (sw.time - pc.t0)) * g;
    }
    return cost;
}

}  // namespace

std::vector<double> evaluate_paths(const ModelParams& m, const SwitchCosts& costs,
                                   const ControllerFactory& make_controller,
                                   const AttackModel& attacks, const McOptions& options,
                                   const ValueSource* src) {
    if (options.n_paths < 1) throw std::invalid_argument("need at least one path");
    if (!(options.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
    if (options.antithetic && options.n_paths % 2 != 0)
        throw std::invalid_argument("antithetic evaluation needs an even path count");

    const auto blocks = map_blocks<std::vector<double>>(
        static_cast<std::size_t>(options.n_paths),
        [&](int, std::size_t begin, std::size_t end) {
            std::vector<double> costs_block;
            costs_block.reserve(end - begin);
            for (std::size_t j = begin; j < end; ++j) {
                const PolicyFn policy = make_controller();
                costs_block.push_back(run_path(m, costs, policy, attacks, options, src,
                                               static_cast<long>(j)));
            }
            return costs_block;
        },
        options.blocks);

    std::vector<double> all;
    all.reserve(options.n_paths);
    for (const auto& block : blocks) all.insert(all.end(), block.begin(), block.end());
    return all;
}

McResult evaluate(const ModelParams& m, const SwitchCosts& costs,
                  const ControllerFactory& make_controller, const AttackModel& attacks,
                  const McOptions& options, const ValueSource* src) {
    const std::vector<double> path_costs =
        evaluate_paths(m, costs, make_controller, attacks, options, src);

    // Antithetic pairs collapse to one sample each.
    std::vector<double> samples;
    if (options.antithetic) {
        samples.reserve(path_costs.size() / 2);
        for (std::size_t j = 0; j + 1 < path_costs.size(); j += 2)
            samples.push_back(0.5 * (path_costs[j] + path_costs[j + 1]));
    } else {
        samples = path_costs;
    }

    McResult result;
    result.n_paths = options.n_paths;
    result.tail_bound = max_running_cost(m) * std::exp(-m.delta * options.horizon) / m.delta;
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double c : samples) sum += c;
    result.mean = sum / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double c : samples) ss += (c - result.mean) * (c - result.mean);
        result.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return result;
}

void append_mc_summary(const std::string& path, const std::string& policy_name,
                       const McResult& result, std::uint64_t seed, bool write_header) {
    std::ofstream out(path, write_header ? std::ios::trunc : std::ios::app);
    if (!out) throw std::runtime_error("cannot write summary: " + path);
    if (write_header) out << "policy,mean,se,tail_bound,n_paths,seed\n";
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%.10g,%.10g,%ld,%llu\n", policy_name.c_str(),
                  result.mean, result.se, result.tail_bound, result.n_paths,
                  static_cast<unsigned long long>(seed));
    out << buf;
}

}  // namespace sirs
