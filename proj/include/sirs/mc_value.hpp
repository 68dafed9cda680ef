#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sirs/attacks.hpp"
#include "sirs/model.hpp"
#include "sirs/policy.hpp"
#include "sirs/sde.hpp"

namespace sirs {

/// Attack model of a Monte Carlo study: one fixed schedule replayed on
/// every path, or a fresh Poisson schedule per path.
struct AttackModel {
    enum class Kind { Fixed, Poisson };
    Kind kind = Kind::Fixed;
    AttackSchedule schedule;  ///< Fixed: replayed as is
    double lambda = 0.0;      ///< Poisson intensity
    int a0 = 1;
    double min_gap = 0.0;

    static AttackModel fixed(AttackSchedule sched);
    static AttackModel poisson(double lambda, int a0, double min_gap = 0.0);

    AttackSchedule realize(double horizon, std::uint64_t seed) const;
};

/// Fresh controller per path; controllers may be stateful.
using ControllerFactory = std::function<PolicyFn()>;

struct McOptions {
    long n_paths = 10000;
    double horizon = 60.0;
    double step = 0.125;
    std::uint64_t seed = 1;
    State x0{1.0, 0.0};
    int p0 = 0;
    bool antithetic = false;
    int blocks = 16;  ///< fixed reduction granularity, independent of workers
};

struct McResult {
    double mean = 0.0;
    double se = 0.0;          ///< standard error of the mean
    double tail_bound = 0.0;  ///< discounted cost ignored past the horizon
    long n_paths = 0;
};

/// Monte Carlo estimate of the discounted cost of a policy. Path j draws
/// its noise from master substream 2j and its attack schedule (when the
/// model is Poisson) from substream 2j+1, so a second run with the same
/// master seed pairs path by path (common random numbers). Per-path costs
/// are the trapezoid running cost plus discounted switching costs; the
/// value source prices proportional switching costs and may be null when
/// both costs are constant.
McResult evaluate(const ModelParams& m, const SwitchCosts& costs,
                  const ControllerFactory& make_controller, const AttackModel& attacks,
                  const McOptions& options, const ValueSource* src = nullptr);

/// Per-path costs of the same study, for paired comparisons.
std::vector<double> evaluate_paths(const ModelParams& m, const SwitchCosts& costs,
                                   const ControllerFactory& make_controller,
                                   const AttackModel& attacks, const McOptions& options,
                                   const ValueSource* src = nullptr);

/// Summary row `policy,mean,se,tail_bound,n_paths,seed`.
void append_mc_summary(const std::string& path, const std::string& policy_name,
                       const McResult& result, std::uint64_t seed, bool write_header);

}  // namespace sirs
