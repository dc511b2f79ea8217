#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "repgame/sim.hpp"

#include "repgame/detail/rng.hpp"

using namespace repgame;

namespace {

const ModelParams kGlobal{100.0, 1.52, 0.39, 4.1};

SimConfig base_cfg() {
    SimConfig cfg;
    cfg.n_paths = 10000;
    cfg.dt = 1.0 / 3650.0;
    cfg.seed = 20240801;
    cfg.q0 = 0.14;
    cfg.x_true = 0.14;
    return cfg;
}

}  // namespace

TEST_CASE("step respects absorbing states and drift signs") {
    Equilibrium eq(kGlobal);
    CHECK(step_suspicion(0.0, 1, eq, 1e-3, 0.5) == 0.0);
    CHECK(step_suspicion(0.0, 0, eq, 1e-3, -0.5) == 0.0);
    CHECK(step_suspicion(1.0, 1, eq, 1e-3, 0.3) == 1.0);

    // no noise: attackers push suspicion up, innocents pull it down
    for (double q : {0.05, 0.14, 0.25}) {
        CHECK(step_suspicion(q, 1, eq, 1e-3, 0.0) > q);
        CHECK(step_suspicion(q, 0, eq, 1e-3, 0.0) < q);
    }
}

TEST_CASE("path started at or above the threshold blocks immediately") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.q0 = eq.stopping_threshold() + 0.01;
    PathSimulator sim(eq, cfg);
    const auto out = sim.simulate_path(1, 0);
    CHECK(out.blocked);
    CHECK(out.stop_time == 0.0);
    CHECK(out.terminal_q >= eq.stopping_threshold());
}

TEST_CASE("common noise: the attacker path dominates the innocent path") {
    Equilibrium eq(kGlobal);
    const double dt = 1.0 / 3650.0;
    const double sqrt_dt = std::sqrt(dt);
    const double p = eq.stopping_threshold();

    std::mt19937_64 gen(77);
    std::normal_distribution<double> normal;
    double q1 = 0.14, q0 = 0.14;
    double hit1 = -1.0, hit0 = -1.0;
    for (int step = 0; step < 20000; ++step) {
        const double dw = sqrt_dt * normal(gen);
        if (hit1 < 0.0) q1 = step_suspicion(q1, 1, eq, dt, dw);
        if (hit0 < 0.0) q0 = step_suspicion(q0, 0, eq, dt, dw);
        if (hit1 < 0.0 && q1 >= p) hit1 = (step + 1) * dt;
        if (hit0 < 0.0 && q0 >= p) hit0 = (step + 1) * dt;
        if (hit0 >= 0.0 && hit1 >= 0.0) break;
        if (hit0 < 0.0 && hit1 < 0.0) CHECK(q1 >= q0 - 1e-12);
    }
    REQUIRE(hit1 >= 0.0);  // the attacker hits within the window for this seed
    if (hit0 >= 0.0) CHECK(hit1 <= hit0);
}

TEST_CASE("simulated hitting probability matches the closed form" * doctest::timeout(600)) {
    Equilibrium eq(kGlobal);
    for (double q0 : {0.05, 0.10, 0.14, 0.20}) {
        SimConfig cfg = base_cfg();
        cfg.n_paths = 100000;
        cfg.q0 = q0;
        cfg.x_true = 1.0;  // condition on the attacker type
        cfg.seed = 555000 + static_cast<std::uint64_t>(q0 * 1000);
        cfg.collect_outcomes = false;
        cfg.collect_mean_q = false;
        const auto res = run_population(eq, cfg);
        const double u_hat =
            static_cast<double>(res.n_blocked) / static_cast<double>(cfg.n_paths);
        const double u_true = eq.blocking_prob(q0);
        const double se = std::sqrt(u_hat * (1.0 - u_hat) / static_cast<double>(cfg.n_paths));
        CAPTURE(q0);
        CHECK(std::fabs(u_hat - u_true) <= 3.0 * se);
    }
}

TEST_CASE("detection time: closed form and simulation agree") {
    Equilibrium eq(kGlobal);
    CHECK(expected_detection_time(eq, eq.stopping_threshold()) == 0.0);
    // frozen oracle: 365 (1 - u(0.14)) / r = 282.6697148728022 days
    CHECK(365.0 * expected_detection_time(eq, 0.14) ==
          doctest::Approx(282.6697148728022).epsilon(1e-12));
    CHECK_THROWS_AS((void)expected_detection_time(eq, 0.5), std::domain_error);

    SimConfig cfg = base_cfg();
    cfg.n_paths = 60000;
    cfg.x_true = 1.0;
    cfg.seed = 90210;
    const auto res = run_population(eq, cfg);
    double sum = 0.0, sum2 = 0.0;
    for (const auto& o : res.outcomes) {
        sum += o.stop_time;
        sum2 += o.stop_time * o.stop_time;
    }
    const double n = static_cast<double>(cfg.n_paths);
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - expected_detection_time(eq, 0.14)) <= 3.0 * se);
}

TEST_CASE("estimator centres on zero when there are no attackers") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.n_paths = 20000;
    cfg.x_true = 0.0;
    cfg.q0 = 0.10;
    cfg.seed = 13579;
    const auto res = run_population(eq, cfg);
    CHECK(std::fabs(res.mu_theta) <= 3.0 * res.mu_theta_se);
}

TEST_CASE("frozen suspicion is a martingale under the consistent prior") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.n_paths = 30000;
    cfg.dt = 1.0 / 1460.0;
    cfg.x_true = cfg.q0;  // defender's prior equals the true fraction
    cfg.seed = 8675309;
    cfg.collect_outcomes = false;
    const auto res = run_population(eq, cfg);
    REQUIRE(res.mean_q.size() == res.times.size());
    for (std::size_t j = 0; j < res.mean_q.size(); ++j) {
        CAPTURE(res.times[j]);
        CHECK(std::fabs(res.mean_q[j] - cfg.q0) <= 3.0 * res.mean_q_se[j]);
    }
}

TEST_CASE("weak convergence: halving dt shrinks the change in u") {
    // the three step sizes integrate the SAME Brownian path (coarse
    // increments are sums of fine ones), so the estimate differences are
    // discretization effects rather than fresh Monte-Carlo noise
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    PathSimulator sim(eq, cfg);
    const double p = eq.stopping_threshold();
    const double r = kGlobal.termination_rate;
    const double sigma = kGlobal.noise_intensity;
    const double horizon = 10.0 / r;
    const double fine_dt = 1.0 / 1460.0;
    const double sqrt_fine = std::sqrt(fine_dt);
    const int strides[3] = {4, 2, 1};  // dt = 1/365, 1/730, 1/1460

    const std::size_t n = 150000;
    std::int64_t hits[3] = {0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
        repgame::detail::PathRng rng(repgame::detail::stream_seed(424242, i));
        const double clock = rng.exponential(r);
        double q[3] = {0.14, 0.14, 0.14};
        bool done[3] = {false, false, false};
        bool blocked[3] = {false, false, false};
        double acc[3] = {0.0, 0.0, 0.0};
        for (int tick = 1; !(done[0] && done[1] && done[2]); ++tick) {
            const double t_next = tick * fine_dt;
            if (t_next > horizon) break;
            const double dw = sqrt_fine * rng.normal();
            for (int k = 0; k < 3; ++k) {
                if (done[k]) continue;
                acc[k] += dw;
                if (tick % strides[k] != 0) continue;
                if (q[k] >= p) {
                    blocked[k] = true;
                    done[k] = true;
                    continue;
                }
                if (clock < t_next) {
                    done[k] = true;
                    continue;
                }
                const double alpha = sim.intensity(q[k]);
                const double flow = q[k] * (1.0 - q[k]) * alpha;
                q[k] += flow / (sigma * sigma) * (1.0 - q[k]) * alpha *
                            (strides[k] * fine_dt) +
                        flow / sigma * acc[k];
                q[k] = std::clamp(q[k], 0.0, 1.0);
                acc[k] = 0.0;
            }
        }
        for (int k = 0; k < 3; ++k) {
            if (!done[k] && q[k] >= p) blocked[k] = true;  // hit right at the cap
            hits[k] += blocked[k];
        }
    }
    const double u365 = static_cast<double>(hits[0]) / static_cast<double>(n);
    const double u730 = static_cast<double>(hits[1]) / static_cast<double>(n);
    const double u1460 = static_cast<double>(hits[2]) / static_cast<double>(n);
    const double u_true = eq.blocking_prob(0.14);
    CAPTURE(u365);
    CAPTURE(u730);
    CAPTURE(u1460);
    const double d1 = std::fabs(u730 - u365);
    const double d2 = std::fabs(u1460 - u730);
    CHECK(d2 < d1);
    // and the finest grid lands closest to the closed form
    CHECK(std::fabs(u1460 - u_true) < std::fabs(u365 - u_true));
}

TEST_CASE("BR is nondecreasing and EE is its affine image") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.n_paths = 20000;
    cfg.seed = 1111;
    const auto res = run_population(eq, cfg);
    const double p = eq.stopping_threshold();
    const double u0 = eq.blocking_prob(cfg.q0);
    const double scale = p * (1.0 - cfg.q0) / ((p - cfg.q0) * u0);
    const double shift = cfg.q0 * (1.0 - p) / (p - cfg.q0);
    double prev = 0.0;
    for (std::size_t j = 0; j < res.br.size(); ++j) {
        CHECK(res.br[j] >= prev);
        CHECK(res.br[j] <= 1.0);
        CHECK(res.ee[j] == doctest::Approx(scale * res.br[j] - shift).epsilon(1e-14));
        CHECK(res.ee_lo99[j] <= res.ee_lo95[j]);
        CHECK(res.ee_hi95[j] <= res.ee_hi99[j]);
        prev = res.br[j];
    }
    CHECK(res.mu_theta == doctest::Approx(scale * res.br.back() - shift).epsilon(1e-14));
}

TEST_CASE("path outcome invariants") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.n_paths = 5000;
    cfg.seed = 22;
    const auto res = run_population(eq, cfg);
    const double horizon = cfg.effective_horizon(eq);
    const double p = eq.stopping_threshold();
    REQUIRE(res.outcomes.size() == cfg.n_paths);
    for (const auto& o : res.outcomes) {
        CHECK(o.stop_time <= horizon * (1.0 + 1e-9));
        CHECK(!(o.blocked && o.terminated));
        if (o.blocked) CHECK(o.terminal_q >= p - 1e-12);
    }
    CHECK(res.n_blocked + res.n_terminated + res.n_running == cfg.n_paths);
}

TEST_CASE("determinism: same seed bit-identical, thread count irrelevant") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.n_paths = 20000;
    cfg.seed = 777;

    const auto a = run_population(eq, cfg);
    const auto b = run_population(eq, cfg);
    CHECK(a.mu_theta == b.mu_theta);
    CHECK(a.br == b.br);
    CHECK(a.mean_q == b.mean_q);

    SimConfig threaded = cfg;
    threaded.n_threads = 3;
    const auto c = run_population(eq, threaded);
    CHECK(a.mu_theta == c.mu_theta);
    CHECK(a.br == c.br);
    CHECK(a.ee == c.ee);
    CHECK(a.mean_q == c.mean_q);
    REQUIRE(a.outcomes.size() == c.outcomes.size());
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        CHECK(a.outcomes[i].stop_time == c.outcomes[i].stop_time);
        CHECK(a.outcomes[i].theta == c.outcomes[i].theta);
    }

    PathSimulator sim(eq, cfg);
    const auto p1 = sim.simulate_path(1, 123);
    const auto p2 = sim.simulate_path(1, 123);
    CHECK(p1.stop_time == p2.stop_time);
    CHECK(p1.terminal_q == p2.terminal_q);
}

TEST_CASE("configuration validation") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.q0 = eq.stopping_threshold() + 0.05;
    CHECK_THROWS_AS(run_population(eq, cfg), std::invalid_argument);
    cfg = base_cfg();
    cfg.n_paths = 0;
    CHECK_THROWS_AS(run_population(eq, cfg), std::invalid_argument);
    cfg = base_cfg();
    cfg.x_true = 1.5;
    CHECK_THROWS_AS(run_population(eq, cfg), std::invalid_argument);
    cfg = base_cfg();
    cfg.dt = 0.0;
    CHECK_THROWS_AS(run_population(eq, cfg), std::invalid_argument);
}

TEST_CASE("tiny horizon attaches the running-paths warning") {
    Equilibrium eq(kGlobal);
    SimConfig cfg = base_cfg();
    cfg.n_paths = 2000;
    cfg.horizon = 0.05;  // most paths still running
    cfg.seed = 5150;
    const auto res = run_population(eq, cfg);
    CHECK(res.n_running > 0);
    CHECK(res.horizon_warning);
}
