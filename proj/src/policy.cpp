#include "sirs/policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sirs {

struct ValueSource::Impl {
    std::optional<ValueField> field;
    std::optional<TriGrid> grid;
    std::optional<std::array<Network, 4>> nets;
    std::string hash;
};

ValueSource ValueSource::from_field(ValueField field) {
    auto impl = std::make_shared<Impl>();
    impl->grid.emplace(field.n);
    impl->hash = field.params_hash;
    impl->field = std::move(field);
    ValueSource src;
    src.impl_ = std::move(impl);
    return src;
}

ValueSource ValueSource::from_networks(std::array<Network, 4> nets) {
    auto impl = std::make_shared<Impl>();
    impl->nets = std::move(nets);
    ValueSource src;
    src.impl_ = std::move(impl);
    return src;
}

ValueSource ValueSource::load(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) throw std::runtime_error("cannot open value source: " + path);
    std::string head;
    std::getline(probe, head);
    probe.close();
    if (head.rfind("sirsnet", 0) == 0) {
        std::string hash;
        auto nets = load_networks(path, &hash);
        ValueSource src = from_networks(std::move(nets));
        const_cast<Impl&>(*src.impl_).hash = hash;
        return src;
    }
    return from_field(load_value_field(path));
}

double ValueSource::value(double s, double i, int a, int p) const {
    const Impl& impl = *impl_;
    const int r = Regime{a, p}.index();
    if (impl.field) return impl.grid->interpolate(impl.field->values[r], s, i);
    return (*impl.nets)[r].value(s, i);
}

ValueLookup ValueSource::lookup() const {
    return [src = *this](const State& x, const Regime& reg) { return src.value(x, reg); };
}

const ValueField* ValueSource::field() const {
    return impl_->field ? &*impl_->field : nullptr;
}

const TriGrid* ValueSource::grid() const { return impl_->grid ? &*impl_->grid : nullptr; }

const std::string& ValueSource::params_hash() const { return impl_->hash; }

RegionMask switching_region(const ValueSource& src, const SwitchCosts& costs,
                            const TriGrid& grid, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("region tolerance must be positive");
    RegionMask out;
    out.n = grid.n();
    out.tol = tol;
    const ValueLookup values = src.lookup();
    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        out.mask[r].assign(grid.node_count(), 0);
        for (int idx = 0; idx < grid.node_count(); ++idx) {
            const State x = grid.node(idx);
            const double g = switch_cost(costs.from(reg.protect), values, x, reg);
            const double held = src.value(x, reg);
            const double switched = src.value(x, reg.flipped());
            out.mask[r][idx] = held >= switched + g - tol ? 1 : 0;
        }
    }
    return out;
}

void save_region_mask(const RegionMask& mask, const TriGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write region mask: " + path);
    out << "a,p,s,i,in_switching_region\n";
    char buf[96];
    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        for (int idx = 0; idx < grid.node_count(); ++idx) {
            const State x = grid.node(idx);
            std::snprintf(buf, sizeof(buf), "%d,%d,%.10g,%.10g,%d\n", reg.attack, reg.protect,
                          x.s, x.i, static_cast<int>(mask.mask[r][idx]));
            out << buf;
        }
    }
}

namespace {

/// Central-difference gradient of a nodal field, one-sided at edges.
std::pair<double, double> node_gradient(const TriGrid& grid, const std::vector<double>& v, int j,
                                        int k) {
    const double h = grid.spacing();
    const auto diff = [&](int j0, int k0, int j1, int k1, double span) {
        return (v[grid.index(j1, k1)] - v[grid.index(j0, k0)]) / span;
    };
    double vs;
    if (grid.contains(j + 1, k) && grid.contains(j - 1, k)) vs = diff(j - 1, k, j + 1, k, 2 * h);
    else if (grid.contains(j + 1, k)) vs = diff(j, k, j + 1, k, h);
    else vs = diff(j - 1, k, j, k, h);
    double vi;
    if (grid.contains(j, k + 1) && grid.contains(j, k - 1)) vi = diff(j, k - 1, j, k + 1, 2 * h);
    else if (grid.contains(j, k + 1)) vi = diff(j, k, j, k + 1, h);
    else vi = diff(j, k - 1, j, k, h);
    return {vs, vi};
}

}  // namespace

SmoothFitStats smooth_fit_diagnostic(const ValueSource& src, const RegionMask& mask,
                                     const TriGrid& grid) {
    if (!src.field()) throw std::invalid_argument("smooth-fit diagnostic needs a grid-backed source");
    if (mask.n != grid.n()) throw std::invalid_argument("mask/grid size mismatch");
    const ValueField& field = *src.field();

    SmoothFitStats stats;
    double sum = 0.0;
    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        const auto& v = field.values[r];
        const auto& vf = field.values[reg.flipped().index()];
        const auto& m = mask.mask[r];
        for (int idx = 0; idx < grid.node_count(); ++idx) {
            const int j = grid.j_of(idx);
            const int k = grid.k_of(idx);
            bool edge = false;
            const int dj[] = {1, -1, 0, 0};
            const int dk[] = {0, 0, 1, -1};
            for (int d = 0; d < 4 && !edge; ++d) {
                if (grid.contains(j + dj[d], k + dk[d]) &&
                    m[grid.index(j + dj[d], k + dk[d])] != m[idx])
                    edge = true;
            }
            if (!edge) continue;
            const auto [vs, vi] = node_gradient(grid, v, j, k);
            const auto [ws, wi] = node_gradient(grid, vf, j, k);
            const double mismatch = std::hypot(vs - ws, vi - wi);
            stats.max_mismatch = std::max(stats.max_mismatch, mismatch);
            sum += mismatch;
            ++stats.boundary_nodes;
        }
    }
    stats.mean_mismatch = stats.boundary_nodes > 0 ? sum / stats.boundary_nodes : 0.0;
    return stats;
}

PolicyFn make_verification_policy(const ModelParams& m, const ValueSource& src,
                                  const SwitchCosts& costs, double tol,
                                  std::vector<OwnerSwitch>* events) {
    if (tol < 0.0) tol = 1e-9 * value_upper_bound(m, costs);
    struct ControllerState {
        bool skip_next = false;
    };
    auto state = std::make_shared<ControllerState>();
    const ValueLookup values = src.lookup();
    return [=](double t, const State& x, const Regime& reg) -> int {
        if (state->skip_next) {  // refractory step right after a switch
            state->skip_next = false;
            return reg.protect;
        }
        const double held = src.value(x, reg);
        const double switched = src.value(x, reg.flipped());
        const double g = switch_cost(costs.from(reg.protect), values, x, reg);
        const double gap = held - switched - g;
        if (gap >= -tol) {
            state->skip_next = true;
            if (events) events->push_back({t, reg.protect, 1 - reg.protect, gap, g});
            return 1 - reg.protect;
        }
        return reg.protect;
    };
}

PolicyFn make_constant_policy(int p) {
    return [p](double, const State&, const Regime&) { return p; };
}

PolicyFn make_always_policy(int target) {
    return [target](double, const State&, const Regime&) { return target; };
}

PolicyFn make_threshold_policy(double threshold) {
    return [threshold](double, const State& x, const Regime&) {
        return x.i >= threshold ? 1 : 0;
    };
}

ControlledRun simulate_controlled(const ModelParams& m, const ValueSource& src,
                                  const SwitchCosts& costs, const AttackSchedule& schedule,
                                  const PathConfig& config, double tol) {
    ControlledRun run;
    const PolicyFn policy = make_verification_policy(m, src, costs, tol, &run.owner_switches);
    run.trajectory = simulate(m, schedule, policy, config);
    run.discounted_cost = discounted_running_cost(run.trajectory, m);
    for (const OwnerSwitch& sw : run.owner_switches)
        run.discounted_cost += std::exp(-m.delta * (sw.time - config.t0)) * sw.cost;
    return run;
}

void write_owner_switch_log(const ControlledRun& run, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write switch log: " + path);
    out << "time,actor,from,to,value_gap\n";
    char buf[128];
    std::size_t ia = 0, io = 0;
    const auto& as = run.trajectory.attack_switches;
    const auto& os = run.owner_switches;
    while (ia < as.size() || io < os.size()) {
        const bool take_attack =
            io >= os.size() || (ia < as.size() && as[ia].time <= os[io].time);
        if (take_attack) {
            std::snprintf(buf, sizeof(buf), "%.10g,hacker,%d,%d,\n", as[ia].time, as[ia].from,
                          as[ia].to);
            ++ia;
        } else {
            std::snprintf(buf, sizeof(buf), "%.10g,owner,%d,%d,%.10g\n", os[io].time,
                          os[io].from, os[io].to, os[io].value_gap);
            ++io;
        }
        out << buf;
    }
}

}  // namespace sirs
