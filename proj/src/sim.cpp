#include "repgame/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "repgame/detail/rng.hpp"

namespace repgame {

namespace {

constexpr std::size_t kTableSize = 16384;
constexpr std::size_t kChunk = 8192;
constexpr double kZ95 = 1.9599639845400545;
constexpr double kZ99 = 2.5758293035489004;

}  // namespace

void SimConfig::validate(const Equilibrium& eq) const {
    if (n_paths == 0) throw std::invalid_argument("SimConfig: n_paths must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("SimConfig: dt must be positive");
    if (!(x_true >= 0.0 && x_true <= 1.0))
        throw std::invalid_argument("SimConfig: x_true outside [0, 1]");
    if (!(q0 > 0.0 && q0 < eq.stopping_threshold()))
        throw std::invalid_argument("SimConfig: q0 must lie in (0, p)");
    if (report_points < 2) throw std::invalid_argument("SimConfig: report_points < 2");
    if (horizon < 0.0) throw std::invalid_argument("SimConfig: negative horizon");
}

double SimConfig::effective_horizon(const Equilibrium& eq) const {
    return horizon > 0.0 ? horizon : 10.0 / eq.params().termination_rate;
}

double step_suspicion(double q, int theta, const Equilibrium& eq, double dt, double dW) {
    if (q <= 0.0 || q >= 1.0) return std::clamp(q, 0.0, 1.0);  // absorbing states
    const double sigma = eq.params().noise_intensity;
    const double alpha = eq.attack_intensity(q);
    const double delta = theta == 1 ? alpha : 0.0;
    const double flow = q * (1.0 - q) * alpha;
    const double dq = flow / (sigma * sigma) * (delta - q * alpha) * dt + flow / sigma * dW;
    return std::clamp(q + dq, 0.0, 1.0);
}

PathSimulator::PathSimulator(const Equilibrium& eq, const SimConfig& cfg)
    : eq_(eq),
      cfg_(cfg),
      horizon_(cfg.effective_horizon(eq)),
      threshold_(eq.stopping_threshold()),
      sigma_(eq.params().noise_intensity) {
    alpha_table_.resize(kTableSize);
    table_step_ = threshold_ / static_cast<double>(kTableSize - 1);
    inv_table_step_ = 1.0 / table_step_;
    for (std::size_t i = 0; i < kTableSize; ++i) {
        alpha_table_[i] = eq.attack_intensity(static_cast<double>(i) * table_step_);
    }
}

double PathSimulator::intensity(double q) const {
    const double pos = q * inv_table_step_;
    std::size_t idx = static_cast<std::size_t>(pos);
    if (idx >= kTableSize - 1) return alpha_table_.back();
    const double frac = pos - static_cast<double>(idx);
    return alpha_table_[idx] + frac * (alpha_table_[idx + 1] - alpha_table_[idx]);
}

template <typename Visitor>
PathOutcome PathSimulator::run_path(int theta, std::uint64_t path_index, Visitor&& visit) const {
    detail::PathRng rng(detail::stream_seed(cfg_.seed, path_index));
    const double clock = rng.exponential(eq_.params().termination_rate);
    const double dt = cfg_.dt;
    const double sqrt_dt = std::sqrt(dt);
    const double inv_sig = 1.0 / sigma_;
    const double inv_sig2 = inv_sig * inv_sig;
    const double theta_mult = theta == 1 ? 1.0 : 0.0;
    const double horizon_edge = horizon_ * (1.0 + 1e-12);

    PathOutcome out;
    out.theta = static_cast<std::uint8_t>(theta);

    double q = cfg_.q0;
    double t = 0.0;
    for (;;) {
        if (q >= threshold_) {
            out.blocked = true;
            out.stop_time = t;
            break;
        }
        const double t_next = t + dt;
        if (clock < t_next) {
            out.terminated = true;
            out.stop_time = clock;
            break;
        }
        if (t_next > horizon_edge) {
            out.stop_time = horizon_;
            break;
        }
        visit(t_next, q);
        if (q <= 0.0) {  // absorbed, ride out the clock
            if (clock <= horizon_) {
                out.terminated = true;
                out.stop_time = clock;
            } else {
                out.stop_time = horizon_;
            }
            break;
        }
        const double alpha = intensity(q);
        const double flow = q * (1.0 - q) * alpha;
        q += flow * inv_sig2 * (theta_mult - q) * alpha * dt +
             flow * inv_sig * sqrt_dt * rng.normal();
        q = std::clamp(q, 0.0, 1.0);
        t = t_next;
    }
    out.terminal_q = q;
    return out;
}

PathOutcome PathSimulator::simulate_path(int theta, std::uint64_t path_index) const {
    return run_path(theta, path_index, [](double, double) {});
}

namespace {

struct ChunkAgg {
    std::vector<std::int64_t> blocked_at;  // first report slot covering the hit time
    std::vector<double> q_sum, q2_sum;
    std::int64_t n_blocked = 0, n_terminated = 0, n_running = 0;
    std::int64_t n_theta1 = 0;
    std::vector<PathOutcome> outcomes;
};

}  // namespace

MonteCarloResult run_population(const Equilibrium& eq, const SimConfig& cfg) {
    cfg.validate(eq);
    PathSimulator simulator(eq, cfg);
    const double horizon = simulator.horizon();
    const std::size_t n_report = static_cast<std::size_t>(cfg.report_points);
    const std::size_t n = cfg.n_paths;

    std::vector<double> times(n_report);
    for (std::size_t j = 0; j < n_report; ++j) {
        times[j] = horizon * static_cast<double>(j + 1) / static_cast<double>(n_report);
    }

    const std::size_t n_chunks = (n + kChunk - 1) / kChunk;
    std::vector<ChunkAgg> chunks(n_chunks);

    auto process_chunk = [&](std::size_t ci) {
        ChunkAgg& agg = chunks[ci];
        agg.blocked_at.assign(n_report, 0);
        if (cfg.collect_mean_q) {
            agg.q_sum.assign(n_report, 0.0);
            agg.q2_sum.assign(n_report, 0.0);
        }
        const std::size_t begin = ci * kChunk;
        const std::size_t end = std::min(begin + kChunk, n);
        if (cfg.collect_outcomes) agg.outcomes.reserve(end - begin);

        std::vector<double> slot_q(n_report);
        for (std::size_t i = begin; i < end; ++i) {
            detail::PathRng type_rng(detail::stream_seed(cfg.seed ^ 0x7fb5d329728ea185ULL, i));
            const int theta = type_rng.bernoulli(cfg.x_true) ? 1 : 0;
            agg.n_theta1 += theta;

            std::size_t rep = 0;
            PathOutcome out = simulator.run_path(theta, i, [&](double t_next, double q) {
                while (rep < n_report && times[rep] < t_next) slot_q[rep++] = q;
            });
            while (rep < n_report) slot_q[rep++] = out.terminal_q;

            if (out.blocked) {
                ++agg.n_blocked;
                const auto it = std::lower_bound(times.begin(), times.end(), out.stop_time);
                // accumulated t can overshoot times.back() by an ulp
                const std::size_t slot =
                    std::min(static_cast<std::size_t>(it - times.begin()), n_report - 1);
                agg.blocked_at[slot] += 1;
            } else if (out.terminated) {
                ++agg.n_terminated;
            } else {
                ++agg.n_running;
            }
            if (cfg.collect_mean_q) {
                for (std::size_t j = 0; j < n_report; ++j) {
                    agg.q_sum[j] += slot_q[j];
                    agg.q2_sum[j] += slot_q[j] * slot_q[j];
                }
            }
            if (cfg.collect_outcomes) agg.outcomes.push_back(out);
        }
    };

    int n_threads = cfg.n_threads > 0 ? cfg.n_threads
                                      : static_cast<int>(std::thread::hardware_concurrency());
    n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n_chunks)));
    if (n_threads == 1) {
        for (std::size_t ci = 0; ci < n_chunks; ++ci) process_chunk(ci);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_threads));
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t ci = next.fetch_add(1); ci < n_chunks; ci = next.fetch_add(1)) {
                    process_chunk(ci);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    // deterministic reduction in chunk order
    MonteCarloResult res;
    res.times = times;
    std::vector<std::int64_t> blocked_hist(n_report, 0);
    std::vector<double> q_sum(n_report, 0.0), q2_sum(n_report, 0.0);
    std::int64_t n_blocked = 0, n_terminated = 0, n_running = 0;
    for (auto& agg : chunks) {
        for (std::size_t j = 0; j < n_report; ++j) blocked_hist[j] += agg.blocked_at[j];
        if (cfg.collect_mean_q) {
            for (std::size_t j = 0; j < n_report; ++j) {
                q_sum[j] += agg.q_sum[j];
                q2_sum[j] += agg.q2_sum[j];
            }
        }
        n_blocked += agg.n_blocked;
        n_terminated += agg.n_terminated;
        n_running += agg.n_running;
        if (cfg.collect_outcomes) {
            res.outcomes.insert(res.outcomes.end(), agg.outcomes.begin(), agg.outcomes.end());
        }
    }
    res.n_blocked = static_cast<std::size_t>(n_blocked);
    res.n_terminated = static_cast<std::size_t>(n_terminated);
    res.n_running = static_cast<std::size_t>(n_running);
    res.horizon_warning =
        static_cast<double>(n_running) > 1e-3 * static_cast<double>(n);

    const double p = eq.stopping_threshold();
    const double u0 = eq.blocking_prob(cfg.q0);
    const double scale = p * (1.0 - cfg.q0) / ((p - cfg.q0) * u0);
    const double shift = cfg.q0 * (1.0 - p) / (p - cfg.q0);
    const double dn = static_cast<double>(n);

    res.br.resize(n_report);
    res.ee.resize(n_report);
    res.ee_lo95.resize(n_report);
    res.ee_hi95.resize(n_report);
    res.ee_lo99.resize(n_report);
    res.ee_hi99.resize(n_report);
    std::int64_t cum = 0;
    for (std::size_t j = 0; j < n_report; ++j) {
        cum += blocked_hist[j];
        const double br = static_cast<double>(cum) / dn;
        const double se = scale * std::sqrt(br * (1.0 - br) / dn);
        const double ee = scale * br - shift;
        res.br[j] = br;
        res.ee[j] = ee;
        res.ee_lo95[j] = ee - kZ95 * se;
        res.ee_hi95[j] = ee + kZ95 * se;
        res.ee_lo99[j] = ee - kZ99 * se;
        res.ee_hi99[j] = ee + kZ99 * se;
    }
    const double br_final = res.br.back();
    res.mu_theta = scale * br_final - shift;
    res.mu_theta_se = scale * std::sqrt(br_final * (1.0 - br_final) / dn);

    if (cfg.collect_mean_q) {
        res.mean_q.resize(n_report);
        res.mean_q_se.resize(n_report);
        for (std::size_t j = 0; j < n_report; ++j) {
            const double m = q_sum[j] / dn;
            const double var = std::max(0.0, q2_sum[j] / dn - m * m);
            res.mean_q[j] = m;
            res.mean_q_se[j] = std::sqrt(var / dn);
        }
    }
    return res;
}

double expected_detection_time(const Equilibrium& eq, double q0) {
    return (1.0 - eq.blocking_prob(q0)) / eq.params().termination_rate;
}

}  // namespace repgame
