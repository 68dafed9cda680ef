#include "sirs/attacks.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "sirs/rng.hpp"

namespace sirs {

int AttackSchedule::level_at(double t) const {
    auto past = std::upper_bound(switch_times.begin(), switch_times.end(), t);
    auto flips = static_cast<std::size_t>(past - switch_times.begin());
    return (flips % 2 == 0) ? a0 : 1 - a0;
}

void AttackSchedule::validate() const {
    if (a0 != 0 && a0 != 1) throw std::invalid_argument("attack level a0 must be 0 or 1");
    double prev = -1.0;
    for (double t : switch_times) {
        if (!(t >= 0.0)) throw std::invalid_argument("attack switch times must be >= 0");
        if (!(t > prev)) throw std::invalid_argument("attack switch times must be increasing");
        prev = t;
    }
}

AttackSchedule constant_attack(int a0) {
    AttackSchedule sched{a0, {}, AttackSchedule::Provenance::Constant};
    sched.validate();
    return sched;
}

AttackSchedule poisson_attack(double lambda, int a0, double horizon, std::uint64_t seed,
                              double min_gap) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("poisson intensity must be >= 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("poisson horizon must be positive");
    AttackSchedule sched{a0, {}, AttackSchedule::Provenance::Poisson};
    if (lambda > 0.0) {
        auto rng = std::mt19937_64(seed);
        std::exponential_distribution<double> gap(lambda);
        double t = 0.0;
        while (true) {
            t += std::max(gap(rng), min_gap);
            if (t > horizon) break;
            sched.switch_times.push_back(t);
        }
    }
    sched.validate();
    return sched;
}

AttackSchedule explicit_attack(int a0, std::vector<double> times) {
    AttackSchedule sched{a0, std::move(times), AttackSchedule::Provenance::Explicit};
    sched.validate();
    return sched;
}

AttackSchedule load_attack_csv(const std::string& path, int a0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open attack schedule: " + path);
    std::string line;
    std::vector<double> times;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("time", 0) == 0) continue;  // header
        }
        std::istringstream ss(line);
        double t;
        if (!(ss >> t)) throw std::runtime_error("bad row in attack schedule: " + line);
        times.push_back(t);
    }
    return explicit_attack(a0, std::move(times));
}

}  // namespace sirs
