#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sirs/model.hpp"

namespace sirs {

/// Fully-connected approximator of one regime's value function: input
/// (s, i), tanh hidden layers, linear output. Values and exact first and
/// second input derivatives propagate layer by layer; nothing is finite
/// differenced.
class Network {
  public:
    Network() = default;

    /// Hidden widths may be empty (a single affine map). Weights start
    /// symmetric uniform scaled by 1/sqrt(fan-in), biases zero.
    Network(std::vector<int> hidden_widths, Regime regime, std::uint64_t seed);

    const std::vector<int>& widths() const { return widths_; }  ///< {2, hidden..., 1}
    const Regime& regime() const { return regime_; }
    int param_count() const { return static_cast<int>(theta_.size()); }
    Eigen::VectorXd& theta() { return theta_; }
    const Eigen::VectorXd& theta() const { return theta_; }

    /// Value and input derivatives at one point.
    ValueDerivs eval_with_derivs(double s, double i) const;
    /// Value only (cheap path for policy queries).
    double value(double s, double i) const;

    /// Offsets of layer l's weight block and bias block inside theta.
    int weight_offset(int layer) const { return w_off_[layer]; }
    int bias_offset(int layer) const { return b_off_[layer]; }
    int layer_count() const { return static_cast<int>(widths_.size()) - 1; }

  private:
    std::vector<int> widths_;
    std::vector<int> w_off_, b_off_;
    Regime regime_{};
    Eigen::VectorXd theta_;
};

/// PDE residual -delta*v + Lv + c_I*i + f(s,p) of the approximator at one
/// point, assembled from the shared generator implementation.
double pde_residual(const Network& net, const State& x, const Regime& reg, const ModelParams& m);

/// Training configuration. The step size alpha_n = alpha0 / (1 + n/n0) is
/// nonincreasing; sampling densities are uniform on the triangle and on the
/// s = 0 segment.
struct DgmConfig {
    int interior_batch = 256;
    int boundary_batch = 64;
    double alpha0 = 1e-3;
    double n0 = 1e4;
    long steps = 50000;
    double penalty_weight = 0.0;  ///< obstacle penalty; 0 trains the plain linear PDE
    std::uint64_t seed = 1;
    std::vector<int> hidden = {50, 50, 50};
    int trailing_window = 1000;
    double stop_threshold = 1e-6;

    void validate() const;
};

struct Batch {
    std::vector<State> interior;
    std::vector<double> boundary;  ///< i-coordinates on the s = 0 edge
};

/// Uniform interior points (square sample folded about the antidiagonal)
/// and uniform boundary points, sizes per config.
Batch sample_batch(const DgmConfig& config, std::mt19937_64& rng);

struct LossParts {
    double total = 0.0;
    double pde = 0.0;
    double boundary = 0.0;
    double penalty = 0.0;
};

/// Sum over the four regimes of the mean squared PDE residual on the
/// interior batch plus the mean squared boundary mismatch against
/// c_I*y/(delta+gamma), plus penalty_weight times the mean squared obstacle
/// overshoot max(v - v_flipped - g, 0)^2. When `grads` is given it receives
/// the exact gradient with respect to every network's parameters, including
/// the dependence of proportional costs on the referenced network.
LossParts loss(const std::array<Network, 4>& nets, const Batch& batch, const ModelParams& m,
               const SwitchCosts& costs, double penalty_weight,
               std::array<Eigen::VectorXd, 4>* grads = nullptr);

struct TrainingError : std::runtime_error {
    TrainingError(const std::string& what, std::vector<LossParts> trace)
        : std::runtime_error(what), trace(std::move(trace)) {}
    std::vector<LossParts> trace;
};

struct TrainResult {
    std::array<Network, 4> nets;
    std::vector<LossParts> trace;  ///< one row per descent step
    bool converged = false;        ///< trailing-window stop fired before the budget
};

/// Plain stochastic gradient descent on fresh batches:
/// theta_{n+1} = theta_n - alpha_n * grad. Stops at the step budget or when
/// the trailing-window mean loss falls below the threshold. Deterministic
/// per seed.
TrainResult train(const DgmConfig& config, const ModelParams& m, const SwitchCosts& costs);

/// Plain-text checkpoint: version, widths, activation id, and theta in
/// layer order at full precision.
void save_networks(const std::array<Network, 4>& nets, const std::string& path,
                   const std::string& params_hash = {});
std::array<Network, 4> load_networks(const std::string& path, std::string* params_hash = nullptr);

void save_loss_trace(const std::vector<LossParts>& trace, const std::string& path);

}  // namespace sirs
