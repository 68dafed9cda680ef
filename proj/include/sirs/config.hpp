#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sirs/model.hpp"

namespace sirs {

/// Configuration file error with the offending line number (0 when the
/// problem is not tied to one line, e.g. a missing key).
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_number(line) {}
    int line_number;
};

/// Full problem description: model rates, switching costs, initial data,
/// time discretization, and the attack model.
struct ProblemConfig {
    ModelParams params;
    SwitchCosts costs;

    double horizon = 30.0;
    double step = 0.125;
    State x0{1.0, 0.0};
    int a0 = 1;
    int p0 = 0;
    std::uint64_t seed = 1;

    enum class AttackKind { Constant, Poisson, Explicit };
    AttackKind attack = AttackKind::Constant;
    double lambda = 0.1;        ///< Poisson switch intensity
    std::string attack_csv;     ///< Explicit schedule source

    void validate() const;
};

/// Constant attack at level 1; protection efficiency 0.03, protection cost
/// 0.05, infection cost 0.01; both switching costs proportional with factor
/// 0.001, referencing regimes (1,0) and (1,1).
ProblemConfig scenario1();

/// Poisson attack switching at rate 0.1 from level 1; protection efficiency
/// 0.02, protection cost 0.04; switching costs 0.01 and 0.001 of the
/// current-attack unprotected value.
ProblemConfig scenario2();

/// Parses `key = value` lines ('#' starts a comment, unknown keys are
/// errors). With `require_model_keys` every model/cost key must be present;
/// otherwise missing keys keep the values of `base`.
ProblemConfig parse_config_text(const std::string& text, const ProblemConfig& base = {},
                                bool require_model_keys = true);
ProblemConfig parse_config_file(const std::string& path, const ProblemConfig& base = {},
                                bool require_model_keys = true);

/// Canonical `key = value` echo of a configuration; parsing it back yields
/// the same configuration.
std::string canonical_config_text(const ProblemConfig& config);

/// FNV-1a hash (hex) of the model parameters and switching costs. Value
/// artifacts carry it so simulation refuses a mismatched config.
std::string params_hash(const ModelParams& params, const SwitchCosts& costs);

}  // namespace sirs
