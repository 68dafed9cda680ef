#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sirs/attacks.hpp"
#include "sirs/model.hpp"

namespace sirs {

/// Time discretization and initial data of one simulated path.
struct PathConfig {
    double t0 = 0.0;
    double horizon = 30.0;
    double step = 0.125;
    std::uint64_t seed = 1;
    State x0{1.0, 0.0};
    Regime regime0{1, 0};
    bool negate_noise = false;  ///< flips every increment (antithetic pairing)

    int n_steps() const;
    void validate() const;
};

struct SwitchEvent {
    double time = 0.0;
    int from = 0;
    int to = 0;
};

/// Recorded controlled path. Per index s + i + r = 1 exactly; the a and p
/// tracks hold the regime in force on [t_k, t_{k+1}).
struct Trajectory {
    std::vector<double> times, s, i, r;
    std::vector<int> a, p;
    std::vector<SwitchEvent> protection_switches;
    std::vector<SwitchEvent> attack_switches;
};

/// Clamps to [0,1] and rescales by 1/(s+i) if s + i > 1.
State project_to_simplex(double s, double i);

/// One Euler-Maruyama step; the same noise increment enters s and i with
/// opposite signs, so their sum moves by drift alone.
State step_euler(const State& x, const Regime& reg, const ModelParams& m, double h, double dW);

/// Protection controller: maps (time, state, regime in force) to the
/// protection level to hold over the next step.
using PolicyFn = std::function<int(double t, const State& x, const Regime& reg)>;

/// Simulates the controlled system under a given attack schedule and
/// protection controller. The controller is queried before each step
/// (left-continuous control); the path noise is substream 0 of config.seed.
Trajectory simulate(const ModelParams& m, const AttackSchedule& schedule, const PolicyFn& policy,
                    const PathConfig& config);

/// Discounted running cost of a recorded path by the trapezoid rule,
/// discounting from config start time t0. Each interval uses the protection
/// level in force on it.
double discounted_running_cost(const Trajectory& traj, const ModelParams& m);

void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_switch_log_csv(const Trajectory& traj, const std::string& path);

}  // namespace sirs
