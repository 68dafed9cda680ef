#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sirs/config.hpp"
#include "sirs/sde.hpp"
#include "support/oracle_rk4.hpp"

using namespace sirs;

namespace {
const ModelParams scn1 = scenario1().params;

PathConfig base_config() {
    PathConfig pc;
    pc.horizon = 30.0;
    pc.step = 0.125;
    pc.seed = 17;
    return pc;
}
}  // namespace

TEST_CASE("simplex projection") {
    const State a = project_to_simplex(0.5, 0.3);
    CHECK(a.s == 0.5);
    CHECK(a.i == 0.3);
    const State b = project_to_simplex(-0.01, 0.5);
    CHECK(b.s == 0.0);
    CHECK(b.i == 0.5);
    const State c = project_to_simplex(0.8, 0.4);
    CHECK(c.s == doctest::Approx(2.0 / 3.0));
    CHECK(c.i == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("noise cancels in s + i within one step") {
    const State x{0.6, 0.2};
    const Regime reg{1, 0};
    const Drift b = drift(x, reg, scn1);
    const State with_noise = step_euler(x, reg, scn1, 0.125, 0.4);
    const State no_noise = step_euler(x, reg, scn1, 0.125, 0.0);
    CHECK(with_noise.s + with_noise.i == doctest::Approx(no_noise.s + no_noise.i).epsilon(1e-14));
    CHECK(no_noise.s + no_noise.i - (x.s + x.i) ==
          doctest::Approx((b.ds + b.di) * 0.125).epsilon(1e-12));
}

TEST_CASE("infection-free path stays infection-free") {
    ModelParams m = scn1;
    m.sigma = 0.0;
    PathConfig pc = base_config();
    pc.x0 = {0.8, 0.0};
    pc.regime0 = {0, 0};
    const Trajectory traj = simulate(
        m, constant_attack(0), [](double, const State&, const Regime&) { return 0; }, pc);
    for (double i : traj.i) CHECK(i == 0.0);
    // s relaxes towards 1 at rate rho
    for (std::size_t k = 0; k + 1 < traj.s.size(); ++k)
        CHECK(traj.s[k + 1] == doctest::Approx(traj.s[k] + m.rho * (1 - traj.s[k]) * pc.step));
    CHECK(discounted_running_cost(traj, m) == 0.0);
}

TEST_CASE("deterministic path tracks a high-accuracy integrator") {
    ModelParams m = scn1;
    m.sigma = 0.0;
    m.rho = 0.0;
    PathConfig pc = base_config();
    pc.x0 = {1.0, 0.0};
    pc.regime0 = {1, 0};
    const Trajectory traj =
        simulate(m, constant_attack(1), [](double, const State&, const Regime&) { return 0; }, pc);

    const auto deriv = [&m](double s, double i) {
        return std::pair<double, double>{-s * (m.nu + m.beta * i),
                                         m.nu * s + m.beta * s * i - m.gamma * i};
    };
    const oracle::Path ref = oracle::rk4(deriv, 1.0, 0.0, 30.0, 0.125 / 100.0);

    double sup = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const std::size_t k_ref = k * 100;
        sup = std::max(sup, std::abs(traj.s[k] - ref.s[k_ref]));
        sup = std::max(sup, std::abs(traj.i[k] - ref.i[k_ref]));
    }
    CHECK(sup <= 10.0 * 0.125 * 0.125);
}

TEST_CASE("conservation and ranges on a noisy path") {
    PathConfig pc = base_config();
    const Trajectory traj =
        simulate(scn1, constant_attack(1), [](double, const State&, const Regime&) { return 1; },
                 pc);
    REQUIRE(traj.times.size() == static_cast<std::size_t>(pc.n_steps() + 1));
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        // r is stored as the derived remainder, never integrated
        CHECK(traj.r[k] == 1.0 - traj.s[k] - traj.i[k]);
        CHECK(std::abs(traj.s[k] + traj.i[k] + traj.r[k] - 1.0) <= 4e-16);
        CHECK(traj.s[k] >= 0.0);
        CHECK(traj.i[k] >= 0.0);
        CHECK(traj.r[k] >= -1e-15);
    }
}

TEST_CASE("s+i ignores the noise stream when rho = gamma = 0") {
    ModelParams m = scn1;
    m.rho = 0.0;
    m.gamma = 0.0;
    PathConfig pc = base_config();
    pc.x0 = {0.7, 0.2};
    pc.regime0 = {1, 0};
    const PolicyFn hold = [](double, const State&, const Regime&) { return 0; };
    pc.seed = 1;
    const Trajectory t1 = simulate(m, constant_attack(1), hold, pc);
    pc.seed = 2;
    const Trajectory t2 = simulate(m, constant_attack(1), hold, pc);
    for (std::size_t k = 0; k < t1.times.size(); ++k)
        CHECK(t1.s[k] + t1.i[k] == doctest::Approx(t2.s[k] + t2.i[k]).epsilon(1e-12));
}

TEST_CASE("attack monotonicity in the deterministic system") {
    ModelParams m = scn1;
    m.sigma = 0.0;
    PathConfig pc = base_config();
    pc.x0 = {0.9, 0.05};
    const PolicyFn hold = [](double, const State&, const Regime&) { return 0; };
    pc.regime0 = {1, 0};
    const Trajectory attacked = simulate(m, constant_attack(1), hold, pc);
    pc.regime0 = {0, 0};
    const Trajectory calm = simulate(m, constant_attack(0), hold, pc);
    for (std::size_t k = 0; k < attacked.times.size(); ++k)
        CHECK(attacked.i[k] >= calm.i[k] - 1e-15);
}

TEST_CASE("per-step drift consistency without noise") {
    ModelParams m = scn1;
    m.sigma = 0.0;
    PathConfig pc = base_config();
    pc.x0 = {0.6, 0.3};
    pc.regime0 = {1, 1};
    const Trajectory traj =
        simulate(m, constant_attack(1), [](double, const State&, const Regime&) { return 1; },
                 pc);
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        const Drift b = drift({traj.s[k], traj.i[k]}, {traj.a[k], traj.p[k]}, m);
        CHECK((traj.s[k + 1] - traj.s[k]) / pc.step == doctest::Approx(b.ds).epsilon(1e-10));
        CHECK((traj.i[k + 1] - traj.i[k]) / pc.step == doctest::Approx(b.di).epsilon(1e-10));
    }
}

TEST_CASE("fixed seed reproduces the trajectory bit for bit") {
    PathConfig pc = base_config();
    const PolicyFn hold = [](double, const State&, const Regime&) { return 0; };
    const Trajectory t1 = simulate(scn1, constant_attack(1), hold, pc);
    const Trajectory t2 = simulate(scn1, constant_attack(1), hold, pc);
    REQUIRE(t1.s.size() == t2.s.size());
    for (std::size_t k = 0; k < t1.s.size(); ++k) {
        CHECK(t1.s[k] == t2.s[k]);
        CHECK(t1.i[k] == t2.i[k]);
    }
}

TEST_CASE("switch tracks are consistent with the recorded levels") {
    PathConfig pc = base_config();
    pc.regime0 = {1, 0};
    const AttackSchedule sched = explicit_attack(1, {5.0, 20.0});
    // protect on [10, 15)
    const PolicyFn window = [](double t, const State&, const Regime&) {
        return (t >= 10.0 && t < 15.0) ? 1 : 0;
    };
    const Trajectory traj = simulate(scn1, sched, window, pc);
    REQUIRE(traj.attack_switches.size() == 2);
    CHECK(traj.attack_switches[0].time == doctest::Approx(5.0));
    CHECK(traj.attack_switches[1].time == doctest::Approx(20.0));
    REQUIRE(traj.protection_switches.size() == 2);
    CHECK(traj.protection_switches[0].time == doctest::Approx(10.0));
    CHECK(traj.protection_switches[1].time == doctest::Approx(15.0));
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        CHECK(traj.a[k] == sched.level_at(traj.times[k]));
        CHECK(traj.p[k] == window(traj.times[k], {}, {}));
    }
}

TEST_CASE("config validation") {
    PathConfig pc = base_config();
    pc.step = 0.126;  // 30/0.126 is not an integer
    CHECK_THROWS(pc.validate());
    pc = base_config();
    pc.step = -1.0;
    CHECK_THROWS(pc.validate());
    pc = base_config();
    pc.x0 = {0.8, 0.8};
    CHECK_THROWS(pc.validate());
}

TEST_CASE("controller failures abort with a diagnostic") {
    PathConfig pc = base_config();
    const PolicyFn broken = [](double t, const State&, const Regime&) -> int {
        if (t > 1.0) throw std::runtime_error("controller exploded");
        return 0;
    };
    CHECK_THROWS_WITH_AS(simulate(scn1, constant_attack(1), broken, pc),
                         doctest::Contains("controller exploded"), std::runtime_error);
}
