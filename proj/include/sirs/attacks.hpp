#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sirs {

/// The hacker's piecewise-constant attack process: an initial level and the
/// times at which it flips. Materialized up-front over a finite horizon so
/// compared policies replay identical attacks.
struct AttackSchedule {
    enum class Provenance { Constant, Poisson, Explicit };

    int a0 = 0;
    std::vector<double> switch_times;  ///< strictly increasing, all >= 0
    Provenance provenance = Provenance::Constant;

    /// Attack level at time t, right-continuous: the level flips at each
    /// switch time, i.e. a(t) = a0 XOR parity of switches <= t.
    int level_at(double t) const;

    void validate() const;
};

/// Schedule that never switches.
AttackSchedule constant_attack(int a0);

/// Event times of a homogeneous Poisson process of rate `lambda` on
/// [0, horizon], generated as cumulative exponential gaps from the seeded
/// stream. A positive `min_gap` stretches any shorter sampled gap to
/// `min_gap` (used to keep distinct flips at least one simulation step
/// apart; leave 0 for the exact Poisson law).
AttackSchedule poisson_attack(double lambda, int a0, double horizon, std::uint64_t seed,
                              double min_gap = 0.0);

/// Schedule with explicitly given switch times.
AttackSchedule explicit_attack(int a0, std::vector<double> times);

/// Loads switch times from a CSV file with header `time`, one value per row.
AttackSchedule load_attack_csv(const std::string& path, int a0);

}  // namespace sirs
