#include "sirs/dgm.hpp"

#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <random>
#include <sstream>

#include "sirs/rng.hpp"

namespace sirs {

namespace {

using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXd;

// Channel order used throughout: value, d/ds, d/di, d2/ds2, d2/di2, d2/dsdi.
constexpr int kChannels = 6;
constexpr int kVal = 0, kS = 1, kI = 2, kSS = 3, kII = 4, kSI = 5;

struct LayerTape {
    std::array<MatrixXd, kChannels> input;  // channels entering the layer
    MatrixXd t;                             // tanh of the pre-activation value channel
    std::array<MatrixXd, 5> y;              // pre-activation derivative channels (kS..kSI)
};

/// Forward pass of all six channels over a batch of points. `tape` may be
/// null when no gradient is needed.
struct Forward {
    std::array<RowVectorXd, kChannels> out;
    std::vector<LayerTape> tape;  // one per hidden layer
    std::array<MatrixXd, kChannels> head;  // channels entering the output layer
};

Eigen::Map<const MatrixXd> weight(const Network& net, const VectorXd& theta, int layer) {
    return {theta.data() + net.weight_offset(layer), net.widths()[layer + 1],
            net.widths()[layer]};
}

Eigen::Map<const VectorXd> bias(const Network& net, const VectorXd& theta, int layer) {
    return {theta.data() + net.bias_offset(layer), net.widths()[layer + 1]};
}

void forward_batch(const Network& net, const RowVectorXd& s, const RowVectorXd& i, Forward& fwd,
                   bool keep_tape) {
    const auto m = static_cast<int>(s.size());
    const int layers = net.layer_count();
    const VectorXd& theta = net.theta();

    std::array<MatrixXd, kChannels> a;
    a[kVal].resize(2, m);
    a[kVal].row(0) = s;
    a[kVal].row(1) = i;
    a[kS] = MatrixXd::Zero(2, m);
    a[kS].row(0).setOnes();
    a[kI] = MatrixXd::Zero(2, m);
    a[kI].row(1).setOnes();
    a[kSS] = MatrixXd::Zero(2, m);
    a[kII] = MatrixXd::Zero(2, m);
    a[kSI] = MatrixXd::Zero(2, m);

    if (keep_tape) {
        fwd.tape.clear();
        fwd.tape.reserve(layers - 1);
    }

    for (int l = 0; l + 1 < layers; ++l) {
        const auto w = weight(net, theta, l);
        const auto b = bias(net, theta, l);
        std::array<MatrixXd, kChannels> y;
        for (int c = 0; c < kChannels; ++c) y[c].noalias() = w * a[c];
        y[kVal].colwise() += b;

        const MatrixXd t = y[kVal].array().tanh().matrix();
        const auto d1 = (1.0 - t.array().square()).eval();  // tanh'
        const auto d2 = (-2.0 * t.array() * d1).eval();     // tanh''

        if (keep_tape) {
            LayerTape tape;
            tape.input = a;
            tape.t = t;
            for (int c = 0; c < 5; ++c) tape.y[c] = y[c + 1];
            fwd.tape.push_back(std::move(tape));
        }

        std::array<MatrixXd, kChannels> next;
        next[kVal] = t;
        next[kS] = (d1 * y[kS].array()).matrix();
        next[kI] = (d1 * y[kI].array()).matrix();
        next[kSS] = (d2 * y[kS].array().square() + d1 * y[kSS].array()).matrix();
        next[kII] = (d2 * y[kI].array().square() + d1 * y[kII].array()).matrix();
        next[kSI] = (d2 * y[kS].array() * y[kI].array() + d1 * y[kSI].array()).matrix();
        a = std::move(next);
    }

    const auto w = weight(net, theta, layers - 1);
    const auto b = bias(net, theta, layers - 1);
    for (int c = 0; c < kChannels; ++c) {
        fwd.out[c].noalias() = w * a[c];  // output width is 1
    }
    fwd.out[kVal].array() += b(0);
    if (keep_tape) fwd.head = std::move(a);
}

/// Reverse pass: accumulates d(sum_m seeds[c][m] * out[c][m])/dtheta.
void backward_batch(const Network& net, const Forward& fwd,
                    const std::array<RowVectorXd, kChannels>& seeds, VectorXd& grad) {
    const int layers = net.layer_count();
    const VectorXd& theta = net.theta();

    std::array<MatrixXd, kChannels> abar;
    {
        const auto w = weight(net, theta, layers - 1);
        auto wbar = Eigen::Map<MatrixXd>(grad.data() + net.weight_offset(layers - 1), 1,
                                         net.widths()[layers - 1]);
        auto bbar =
            Eigen::Map<VectorXd>(grad.data() + net.bias_offset(layers - 1), 1);
        for (int c = 0; c < kChannels; ++c) {
            wbar.noalias() += seeds[c] * fwd.head[c].transpose();
            abar[c].noalias() = w.transpose() * seeds[c];
        }
        bbar(0) += seeds[kVal].sum();
    }

    for (int l = layers - 2; l >= 0; --l) {
        const LayerTape& tape = fwd.tape[l];
        const auto t = tape.t.array();
        const auto d1 = (1.0 - t.square()).eval();
        const auto d2 = (-2.0 * t * d1).eval();
        const auto d3 = (d1 * (6.0 * t.square() - 2.0)).eval();
        const auto ys = tape.y[0].array();
        const auto yi = tape.y[1].array();
        const auto yss = tape.y[2].array();
        const auto yii = tape.y[3].array();
        const auto ysi = tape.y[4].array();

        std::array<MatrixXd, kChannels> ybar;
        ybar[kVal] = (abar[kVal].array() * d1 + abar[kS].array() * d2 * ys +
                      abar[kI].array() * d2 * yi +
                      abar[kSS].array() * (d3 * ys.square() + d2 * yss) +
                      abar[kII].array() * (d3 * yi.square() + d2 * yii) +
                      abar[kSI].array() * (d3 * ys * yi + d2 * ysi))
                         .matrix();
        ybar[kS] = (abar[kS].array() * d1 + 2.0 * abar[kSS].array() * d2 * ys +
                    abar[kSI].array() * d2 * yi)
                       .matrix();
        ybar[kI] = (abar[kI].array() * d1 + 2.0 * abar[kII].array() * d2 * yi +
                    abar[kSI].array() * d2 * ys)
                       .matrix();
        ybar[kSS] = (abar[kSS].array() * d1).matrix();
        ybar[kII] = (abar[kII].array() * d1).matrix();
        ybar[kSI] = (abar[kSI].array() * d1).matrix();

        const auto w = weight(net, theta, l);
        auto wbar = Eigen::Map<MatrixXd>(grad.data() + net.weight_offset(l),
                                         net.widths()[l + 1], net.widths()[l]);
        auto bbar = Eigen::Map<VectorXd>(grad.data() + net.bias_offset(l), net.widths()[l + 1]);
        for (int c = 0; c < kChannels; ++c) {
            wbar.noalias() += ybar[c] * tape.input[c].transpose();
            abar[c].noalias() = w.transpose() * ybar[c];
        }
        bbar.noalias() += ybar[kVal].rowwise().sum();
    }
}

}  // namespace

Network::Network(std::vector<int> hidden_widths, Regime regime, std::uint64_t seed)
    : regime_(regime) {
    widths_.push_back(2);
    for (int w : hidden_widths) {
        if (w < 1) throw std::invalid_argument("hidden layer width must be >= 1");
        widths_.push_back(w);
    }
    widths_.push_back(1);

    int offset = 0;
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        w_off_.push_back(offset);
        offset += widths_[l + 1] * widths_[l];
        b_off_.push_back(offset);
        offset += widths_[l + 1];
    }
    theta_.setZero(offset);

    auto rng = std::mt19937_64(seed);
    for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(widths_[l]));
        std::uniform_real_distribution<double> uni(-bound, bound);
        double* w = theta_.data() + w_off_[l];
        for (int k = 0; k < widths_[l + 1] * widths_[l]; ++k) w[k] = uni(rng);
        // biases stay zero
    }
}

ValueDerivs Network::eval_with_derivs(double s, double i) const {
    if (widths_.empty()) throw std::logic_error("evaluating a default-constructed network");
    RowVectorXd sv(1), iv(1);
    sv(0) = s;
    iv(0) = i;
    Forward fwd;
    forward_batch(*this, sv, iv, fwd, false);
    return {fwd.out[kVal](0), fwd.out[kS](0),  fwd.out[kI](0),
            fwd.out[kSS](0),  fwd.out[kII](0), fwd.out[kSI](0)};
}

double Network::value(double s, double i) const {
    if (widths_.empty()) throw std::logic_error("evaluating a default-constructed network");
    VectorXd a(2);
    a << s, i;
    const int layers = layer_count();
    for (int l = 0; l + 1 < layers; ++l) {
        VectorXd y = weight(*this, theta_, l) * a + bias(*this, theta_, l);
        a = y.array().tanh().matrix();
    }
    return (weight(*this, theta_, layers - 1) * a)(0) + bias(*this, theta_, layers - 1)(0);
}

double pde_residual(const Network& net, const State& x, const Regime& reg, const ModelParams& m) {
    const ValueDerivs d = net.eval_with_derivs(x.s, x.i);
    return -m.delta * d.v + generator_apply(d, x, reg, m) + running_cost(x, reg, m);
}

void DgmConfig::validate() const {
    if (interior_batch < 1 || boundary_batch < 1)
        throw std::invalid_argument("batch sizes must be >= 1");
    if (!(alpha0 > 0.0) || !(n0 > 0.0)) throw std::invalid_argument("step schedule must be positive");
    if (steps < 1) throw std::invalid_argument("step budget must be >= 1");
    if (penalty_weight < 0.0) throw std::invalid_argument("penalty weight must be >= 0");
    if (trailing_window < 1) throw std::invalid_argument("trailing window must be >= 1");
}

Batch sample_batch(const DgmConfig& config, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Batch batch;
    batch.interior.reserve(config.interior_batch);
    for (int m = 0; m < config.interior_batch; ++m) {
        double u = uni(rng);
        double w = uni(rng);
        if (u + w > 1.0) {  // fold the square onto the triangle
            u = 1.0 - u;
            w = 1.0 - w;
        }
        batch.interior.push_back({u, w});
    }
    batch.boundary.reserve(config.boundary_batch);
    for (int m = 0; m < config.boundary_batch; ++m) batch.boundary.push_back(uni(rng));
    return batch;
}

LossParts loss(const std::array<Network, 4>& nets, const Batch& batch, const ModelParams& m,
               const SwitchCosts& costs, double penalty_weight,
               std::array<Eigen::VectorXd, 4>* grads) {
    if (batch.interior.empty() || batch.boundary.empty())
        throw std::invalid_argument("loss needs nonempty interior and boundary batches");
    const auto mi = static_cast<int>(batch.interior.size());
    const auto mb = static_cast<int>(batch.boundary.size());

    RowVectorXd s(mi), i(mi);
    for (int p = 0; p < mi; ++p) {
        s(p) = batch.interior[p].s;
        i(p) = batch.interior[p].i;
    }
    RowVectorXd bzero = RowVectorXd::Zero(mb), by(mb);
    for (int p = 0; p < mb; ++p) by(p) = batch.boundary[p];

    const bool want_grad = grads != nullptr;
    if (want_grad)
        for (int r = 0; r < 4; ++r) (*grads)[r].setZero(nets[r].param_count());

    // Forward everything first; penalty terms couple the networks.
    std::array<Forward, 4> fint, fbnd;
    for (int r = 0; r < 4; ++r) {
        forward_batch(nets[r], s, i, fint[r], want_grad);
        forward_batch(nets[r], bzero, by, fbnd[r], want_grad);
    }

    LossParts parts;
    std::array<std::array<RowVectorXd, kChannels>, 4> int_seeds, bnd_seeds;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < kChannels; ++c) {
            int_seeds[r][c] = RowVectorXd::Zero(mi);
            bnd_seeds[r][c] = RowVectorXd::Zero(mb);
        }

    for (int r = 0; r < 4; ++r) {
        const Regime reg = Regime::from_index(r);
        const auto& out = fint[r].out;
        RowVectorXd bs(mi), bi(mi), quad(mi), cost(mi);
        for (int p = 0; p < mi; ++p) {
            const State x = batch.interior[p];
            const Drift b = drift(x, reg, m);
            bs(p) = b.ds;
            bi(p) = b.di;
            quad(p) = 0.5 * m.sigma * m.sigma * x.s * x.s * x.i * x.i;
            cost(p) = running_cost(x, reg, m);
        }
        const RowVectorXd resid =
            (-m.delta * out[kVal].array() + bs.array() * out[kS].array() +
             bi.array() * out[kI].array() +
             quad.array() * (out[kSS].array() + out[kII].array() - 2.0 * out[kSI].array()) +
             cost.array())
                .matrix();
        parts.pde += resid.squaredNorm() / mi;

        const RowVectorXd bval = fbnd[r].out[kVal];
        RowVectorXd bres(mb);
        for (int p = 0; p < mb; ++p) bres(p) = bval(p) - boundary_value(by(p), m);
        parts.boundary += bres.squaredNorm() / mb;

        if (want_grad) {
            const RowVectorXd scaled = (2.0 / mi) * resid;
            int_seeds[r][kVal] -= m.delta * scaled;
            int_seeds[r][kS] += scaled.cwiseProduct(bs);
            int_seeds[r][kI] += scaled.cwiseProduct(bi);
            int_seeds[r][kSS] += scaled.cwiseProduct(quad);
            int_seeds[r][kII] += scaled.cwiseProduct(quad);
            int_seeds[r][kSI] -= 2.0 * scaled.cwiseProduct(quad);
            bnd_seeds[r][kVal] += (2.0 / mb) * bres;
        }
    }

    if (penalty_weight > 0.0) {
        for (int r = 0; r < 4; ++r) {
            const Regime reg = Regime::from_index(r);
            const int rf = reg.flipped().index();
            const SwitchCostSpec& spec = costs.from(reg.protect);
            const bool prop = spec.kind == SwitchCostSpec::Kind::Proportional;
            const int rref = prop ? spec.reference(reg.attack).index() : -1;
            RowVectorXd over(mi);
            for (int p = 0; p < mi; ++p) {
                const double g = prop ? spec.amount * fint[rref].out[kVal](p) : spec.amount;
                over(p) =
                    std::max(fint[r].out[kVal](p) - fint[rf].out[kVal](p) - g, 0.0);
            }
            parts.penalty += penalty_weight * over.squaredNorm() / mi;
            if (want_grad) {
                const RowVectorXd scaled = (2.0 * penalty_weight / mi) * over;
                int_seeds[r][kVal] += scaled;
                int_seeds[rf][kVal] -= scaled;
                if (prop) int_seeds[rref][kVal] -= spec.amount * scaled;
            }
        }
    }

    if (want_grad) {
        for (int r = 0; r < 4; ++r) {
            backward_batch(nets[r], fint[r], int_seeds[r], (*grads)[r]);
            backward_batch(nets[r], fbnd[r], bnd_seeds[r], (*grads)[r]);
        }
    }

    parts.total = parts.pde + parts.boundary + parts.penalty;
    return parts;
}

TrainResult train(const DgmConfig& config, const ModelParams& m, const SwitchCosts& costs) {
    config.validate();
    m.validate();

    TrainResult result;
    for (int r = 0; r < 4; ++r)
        result.nets[r] = Network(config.hidden, Regime::from_index(r),
                                 substream(config.seed, 100 + r));
    auto rng = make_stream(config.seed, 0);

    std::array<VectorXd, 4> grads;
    result.trace.reserve(config.steps);
    double window_sum = 0.0;

    for (long n = 0; n < config.steps; ++n) {
        const Batch batch = sample_batch(config, rng);
        const LossParts parts = loss(result.nets, batch, m, costs, config.penalty_weight, &grads);
        if (!std::isfinite(parts.total))
            throw TrainingError("training diverged (loss is not finite) at step " +
                                    std::to_string(n),
                                std::move(result.trace));

        const double alpha = config.alpha0 / (1.0 + static_cast<double>(n) / config.n0);
        for (int r = 0; r < 4; ++r) result.nets[r].theta() -= alpha * grads[r];

        result.trace.push_back(parts);
        window_sum += parts.total;
        if (n >= config.trailing_window)
            window_sum -= result.trace[n - config.trailing_window].total;
        if (n + 1 >= config.trailing_window &&
            window_sum / config.trailing_window < config.stop_threshold) {
            result.converged = true;
            break;
        }
    }
    return result;
}

void save_networks(const std::array<Network, 4>& nets, const std::string& path,
                   const std::string& params_hash) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write network checkpoint: " + path);
    out << "sirsnet v1\n";
    if (!params_hash.empty()) out << "params_hash " << params_hash << "\n";
    out << "nets 4\n";
    char buf[48];
    for (const Network& net : nets) {
        out << "net " << net.regime().attack << " " << net.regime().protect << "\n";
        out << "widths";
        for (int w : net.widths()) out << " " << w;
        out << "\nactivation tanh\n";
        out << "theta " << net.param_count() << "\n";
        for (int k = 0; k < net.param_count(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g\n", net.theta()(k));
            out << buf;
        }
    }
}

std::array<Network, 4> load_networks(const std::string& path, std::string* params_hash) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open network checkpoint: " + path);
    std::string word;
    in >> word;
    if (word != "sirsnet") throw std::runtime_error("not a network checkpoint: " + path);
    in >> word;
    if (word != "v1") throw std::runtime_error("unsupported checkpoint version: " + word);

    std::array<Network, 4> nets;
    std::array<bool, 4> seen{};
    int remaining = -1;
    while (in >> word) {
        if (word == "params_hash") {
            std::string hash;
            in >> hash;
            if (params_hash) *params_hash = hash;
        } else if (word == "nets") {
            in >> remaining;
            if (remaining != 4) throw std::runtime_error("checkpoint must hold four networks");
        } else if (word == "net") {
            int a, p;
            in >> a >> p;
            in >> word;  // widths
            std::vector<int> widths;
            while (in >> word && word != "activation") widths.push_back(std::stoi(word));
            in >> word;
            if (word != "tanh") throw std::runtime_error("unknown activation id: " + word);
            if (widths.size() < 2 || widths.front() != 2 || widths.back() != 1)
                throw std::runtime_error("bad widths in checkpoint");
            std::vector<int> hidden(widths.begin() + 1, widths.end() - 1);
            Network net(hidden, Regime{a, p}, 0);
            int count;
            in >> word >> count;
            if (word != "theta" || count != net.param_count())
                throw std::runtime_error("parameter count mismatch in checkpoint");
            for (int k = 0; k < count; ++k) in >> net.theta()(k);
            if (!in) throw std::runtime_error("truncated checkpoint: " + path);
            nets[Regime{a, p}.index()] = std::move(net);
            seen[Regime{a, p}.index()] = true;
        } else {
            throw std::runtime_error("unexpected token in checkpoint: " + word);
        }
    }
    for (int r = 0; r < 4; ++r)
        if (!seen[r]) throw std::runtime_error("checkpoint misses a regime network");
    return nets;
}

void save_loss_trace(const std::vector<LossParts>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write loss trace: " + path);
    out << "step,loss,pde_term,boundary_term,penalty_term\n";
    char buf[160];
    for (std::size_t n = 0; n < trace.size(); ++n) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g,%.10g,%.10g,%.10g\n", n, trace[n].total,
                      trace[n].pde, trace[n].boundary, trace[n].penalty);
        out << buf;
    }
}

}  // namespace sirs
