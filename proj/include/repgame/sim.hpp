#pragma once

#include <cstdint>
#include <vector>

#include "repgame/equilibrium.hpp"

namespace repgame {

/// Monte-Carlo run configuration. Times are in years.
struct SimConfig {
    std::size_t n_paths = 10000;
    double dt = 1.0 / 3650.0;   ///< Euler-Maruyama step (default ~0.1 day)
    double horizon = 0.0;       ///< 0 = auto (10 / r)
    std::uint64_t seed = 1;
    double q0 = 0.14;           ///< defender's initial suspicion, in (0, p)
    double x_true = 0.14;       ///< actual attacker fraction, in [0, 1]
    int n_threads = 1;          ///< worker threads; results identical for any value
    int report_points = 200;    ///< BR/EE reporting grid size
    bool collect_outcomes = true;
    bool collect_mean_q = true;

    void validate(const Equilibrium& eq) const;
    double effective_horizon(const Equilibrium& eq) const;
};

/// Summary of one simulated suspect.
struct PathOutcome {
    std::uint8_t theta = 0;    ///< 1 = attacker
    bool blocked = false;      ///< suspicion hit the threshold before T/horizon
    bool terminated = false;   ///< exogenous clock fired first
    double stop_time = 0.0;    ///< years; horizon if still running
    double terminal_q = 0.0;   ///< suspicion where the path froze
};

/// Population-level Monte-Carlo output.
struct MonteCarloResult {
    std::vector<double> times;      ///< reporting grid
    std::vector<double> br;         ///< blocked ratio BR(t)
    std::vector<double> ee;         ///< empirical estimate EE(t) of x
    std::vector<double> ee_lo95, ee_hi95, ee_lo99, ee_hi99;
    std::vector<double> mean_q;     ///< mean frozen suspicion at each time
    std::vector<double> mean_q_se;
    double mu_theta = 0.0;          ///< final estimate of the attacker fraction
    double mu_theta_se = 0.0;
    std::size_t n_blocked = 0;
    std::size_t n_terminated = 0;
    std::size_t n_running = 0;      ///< neither blocked nor terminated at horizon
    bool horizon_warning = false;   ///< running fraction exceeded 1e-3
    std::vector<PathOutcome> outcomes;  ///< per path, when collect_outcomes
};

/// One Euler-Maruyama step of the suspicion SDE
///   dq = q(1-q) alpha(q)/sigma^2 ( Delta dt + sigma dW - q alpha(q) dt ),
/// with Delta = alpha(q) for attackers and 0 for innocents. dW is the
/// Brownian increment over dt. 0 and 1 are absorbing; the result is clamped
/// to [0, 1].
double step_suspicion(double q, int theta, const Equilibrium& eq, double dt, double dW);

/// Path generator bound to one equilibrium. Construction precomputes an
/// intensity lookup table, so per-path cost stays flat; reuse one instance
/// across paths.
class PathSimulator {
public:
    PathSimulator(const Equilibrium& eq, const SimConfig& cfg);

    /// Runs one suspect of the given type. Deterministic in
    /// (cfg.seed, path_index); the exogenous clock T ~ Exp(r) is drawn up
    /// front from the path's own stream.
    PathOutcome simulate_path(int theta, std::uint64_t path_index) const;

    /// Interpolated equilibrium intensity used by the stepping loop.
    double intensity(double q) const;

    const Equilibrium& equilibrium() const { return eq_; }
    const SimConfig& config() const { return cfg_; }
    double horizon() const { return horizon_; }

private:
    template <typename Visitor>
    PathOutcome run_path(int theta, std::uint64_t path_index, Visitor&& visit) const;

    const Equilibrium& eq_;
    SimConfig cfg_;
    double horizon_;
    double threshold_;
    double sigma_;
    std::vector<double> alpha_table_;
    double table_step_ = 0.0;
    double inv_table_step_ = 0.0;

    friend MonteCarloResult run_population(const Equilibrium&, const SimConfig&);
};

/// Simulates a population with types drawn Bernoulli(x_true), aggregates
/// BR/EE series with binomial confidence bands, and forms the unbiased
/// attacker-fraction estimator. Deterministic in (seed, cfg) regardless of
/// n_threads. Throws std::invalid_argument when q0 >= p.
MonteCarloResult run_population(const Equilibrium& eq, const SimConfig& cfg);

/// Closed-form mean detection time E[min(tau_p, T) | attacker] = (1 - u(q0))/r,
/// in years. Domain [0, p].
double expected_detection_time(const Equilibrium& eq, double q0);

}  // namespace repgame
