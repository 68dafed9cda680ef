#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sirs/dgm.hpp"
#include "sirs/grid.hpp"
#include "sirs/model.hpp"
#include "sirs/sde.hpp"
#include "sirs/vi_grid.hpp"

namespace sirs {

/// Uniform value query over the four regimes, backed either by a grid field
/// (piecewise-linear interpolation) or by trained networks.
class ValueSource {
  public:
    static ValueSource from_field(ValueField field);
    static ValueSource from_networks(std::array<Network, 4> nets);
    /// Loads whichever artifact the file holds (field CSV or checkpoint).
    static ValueSource load(const std::string& path);

    double value(double s, double i, int a, int p) const;
    double value(const State& x, const Regime& reg) const {
        return value(x.s, x.i, reg.attack, reg.protect);
    }
    /// Adapter for switch_cost().
    ValueLookup lookup() const;

    const ValueField* field() const;  ///< null when network-backed
    const TriGrid* grid() const;      ///< null when network-backed
    const std::string& params_hash() const;

  private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

/// Nodes where switching from p is (within tol) as good as holding:
/// value(x;a,p) >= value(x;a,p flipped) + g(x) - tol.
struct RegionMask {
    int n = 0;
    double tol = 0.0;
    std::array<std::vector<std::uint8_t>, 4> mask;  ///< indexed by Regime::index()

    bool in_region(const Regime& reg, int node) const {
        return mask[reg.index()][node] != 0;
    }
};

RegionMask switching_region(const ValueSource& src, const SwitchCosts& costs,
                            const TriGrid& grid, double tol);

void save_region_mask(const RegionMask& mask, const TriGrid& grid, const std::string& path);

/// Gradient mismatch |grad v(.;p) - grad v(.;p flipped)| sampled along the
/// free boundary (nodes whose mask differs from a lattice neighbor's);
/// nodes away from the boundary are not reported.
struct SmoothFitStats {
    double max_mismatch = 0.0;
    double mean_mismatch = 0.0;
    int boundary_nodes = 0;
};

SmoothFitStats smooth_fit_diagnostic(const ValueSource& src, const RegionMask& mask,
                                     const TriGrid& grid);

struct OwnerSwitch {
    double time = 0.0;
    int from = 0;
    int to = 0;
    double value_gap = 0.0;  ///< v(x;a,p) - v(x;a,p flipped) - g at the decision
    double cost = 0.0;       ///< g actually paid (undiscounted)
};

struct ControlledRun {
    Trajectory trajectory;
    std::vector<OwnerSwitch> owner_switches;
    double discounted_cost = 0.0;  ///< running cost plus discounted switch costs
};

/// Runs the controlled dynamics: the owner flips the protection level
/// whenever the current value reaches the flipped value plus the switching
/// cost (within tol), with a one-step refractory period after each flip;
/// attack flips come from the schedule. A negative tol asks for the default
/// 1e-9 relative to the value scale.
ControlledRun simulate_controlled(const ModelParams& m, const ValueSource& src,
                                  const SwitchCosts& costs, const AttackSchedule& schedule,
                                  const PathConfig& config, double tol = -1.0);

/// Stateful verification-rule controller, one instance per path.
PolicyFn make_verification_policy(const ModelParams& m, const ValueSource& src,
                                  const SwitchCosts& costs, double tol,
                                  std::vector<OwnerSwitch>* events = nullptr);

/// Holds level p forever.
PolicyFn make_constant_policy(int p);
/// Switches to `target` at the first query and holds it.
PolicyFn make_always_policy(int target);
/// Protects while i >= threshold.
PolicyFn make_threshold_policy(double threshold);

void write_owner_switch_log(const ControlledRun& run, const std::string& path);

}  // namespace sirs
