#include "sirs/sde.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

#include "sirs/rng.hpp"

namespace sirs {

int PathConfig::n_steps() const {
    return static_cast<int>(std::llround((horizon - t0) / step));
}

void PathConfig::validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("path step must be positive");
    if (!(horizon > t0)) throw std::invalid_argument("path horizon must exceed t0");
    const double exact = (horizon - t0) / step;
    if (std::abs(exact - std::llround(exact)) > 1e-9)
        throw std::invalid_argument("(horizon - t0)/step must be an integer step count");
    if (!x0.valid()) throw std::invalid_argument("initial state must lie in D");
    if ((regime0.attack | regime0.protect) & ~1)
        throw std::invalid_argument("regime levels must be 0 or 1");
}

State project_to_simplex(double s, double i) {
    s = std::clamp(s, 0.0, 1.0);
    i = std::clamp(i, 0.0, 1.0);
    const double total = s + i;
    if (total > 1.0) {
        s /= total;
        i /= total;
    }
    return {s, i};
}

State step_euler(const State& x, const Regime& reg, const ModelParams& m, double h, double dW) {
    const Drift b = drift(x, reg, m);
    const double noise = diffusion(x, m) * dW;
    return project_to_simplex(x.s + b.ds * h - noise, x.i + b.di * h + noise);
}

Trajectory simulate(const ModelParams& m, const AttackSchedule& schedule, const PolicyFn& policy,
                    const PathConfig& config) {
    config.validate();
    schedule.validate();
    if (!policy) throw std::invalid_argument("simulate needs a protection controller");

    const int n = config.n_steps();
    const double h = config.step;
    const double sqrt_h = std::sqrt(h);

    Trajectory traj;
    traj.times.reserve(n + 1);
    traj.s.reserve(n + 1);
    traj.i.reserve(n + 1);
    traj.r.reserve(n + 1);
    traj.a.reserve(n + 1);
    traj.p.reserve(n + 1);

    auto rng = make_stream(config.seed, 0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double noise_sign = config.negate_noise ? -1.0 : 1.0;

    State x = config.x0;
    int p = config.regime0.protect;
    int a_prev = schedule.level_at(config.t0);

    for (int k = 0; k <= n; ++k) {
        const double t = config.t0 + k * h;
        const int a = schedule.level_at(t);
        if (a != a_prev) {
            traj.attack_switches.push_back({t, a_prev, a});
            a_prev = a;
        }
        int p_next;
        try {
            p_next = policy(t, x, Regime{a, p});
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string("protection controller failed at t=") +
                                     std::to_string(t) + ": " + e.what());
        }
        if (p_next != 0 && p_next != 1)
            throw std::runtime_error("protection controller returned a level outside {0,1}");
        if (p_next != p) {
            traj.protection_switches.push_back({t, p, p_next});
            p = p_next;
        }

        traj.times.push_back(t);
        traj.s.push_back(x.s);
        traj.i.push_back(x.i);
        traj.r.push_back(x.r());
        traj.a.push_back(a);
        traj.p.push_back(p);

        if (k < n) x = step_euler(x, Regime{a, p}, m, h, noise_sign * sqrt_h * gauss(rng));
    }
    return traj;
}

double discounted_running_cost(const Trajectory& traj, const ModelParams& m) {
    if (traj.times.size() < 2) return 0.0;
    const double t0 = traj.times.front();
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        const Regime reg{traj.a[k], traj.p[k]};
        const double left = std::exp(-m.delta * (traj.times[k] - t0)) *
                            running_cost(State{traj.s[k], traj.i[k]}, reg, m);
        const double right = std::exp(-m.delta * (traj.times[k + 1] - t0)) *
                             running_cost(State{traj.s[k + 1], traj.i[k + 1]}, reg, m);
        total += 0.5 * (left + right) * (traj.times[k + 1] - traj.times[k]);
    }
    return total;
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory: " + path);
    out << "t,s,i,r,a,p\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%d,%d\n", traj.times[k],
                      traj.s[k], traj.i[k], traj.r[k], traj.a[k], traj.p[k]);
        out << buf;
    }
}

void write_switch_log_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write switch log: " + path);
    out << "time,track,from,to\n";
    std::size_t ia = 0, ip = 0;
    const auto& as = traj.attack_switches;
    const auto& ps = traj.protection_switches;
    // Merge the two tracks in time order, attack first on ties.
    while (ia < as.size() || ip < ps.size()) {
        const bool take_attack =
            ip >= ps.size() || (ia < as.size() && as[ia].time <= ps[ip].time);
        const SwitchEvent& e = take_attack ? as[ia] : ps[ip];
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.10g,%s,%d,%d\n", e.time,
                      take_attack ? "attack" : "protection", e.from, e.to);
        out << buf;
        (take_attack ? ia : ip) += 1;
    }
}

}  // namespace sirs
