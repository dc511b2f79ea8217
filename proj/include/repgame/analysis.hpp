#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "repgame/equilibrium.hpp"

namespace repgame {

struct SimConfig;  // sim.hpp

/// Result of maximizing q * V(q) over [0, p].
struct AttackProbResult {
    double q_hat = 0.0;          ///< the maximizer, in (0, p)
    double objective = 0.0;      ///< q_hat * V(q_hat)
    int iterations = 0;          ///< golden-section iterations
    double bracket_width = 0.0;  ///< final bracket length
};

/// Unique maximizer of q V(q) by golden-section search (the map is strictly
/// concave on [0, p]). `tol` bounds the final bracket width; `coarse_grid`
/// sizes the unimodality pre-scan. Throws std::runtime_error if the scan is
/// not unimodal, which would indicate a broken equilibrium.
AttackProbResult optimal_attack_prob(const Equilibrium& eq, double tol = 1e-10,
                                     int coarse_grid = 65);

/// One comparative-statics sample.
struct SweepRow {
    std::string parameter;
    double value = 0.0;
    double p = 0.0;
    double q_star = 0.0;
    double q_hat = 0.0;
    std::vector<double> alpha;  ///< attack intensity on the supplied q grid
};

/// 400 uniform points on [0.001, 0.999]; endpoints excluded because 0 and 1
/// are absorbing.
std::vector<double> default_sweep_grid();

/// Recomputes the equilibrium with `parameter` (one of "M", "l", "r",
/// "sigma") replaced by each entry of `values`.
std::vector<SweepRow> comparative_statics(const ModelParams& base, std::string_view parameter,
                                          std::span<const double> values,
                                          std::span<const double> q_grid);

/// Monte-Carlo test of the marginal benefit = marginal cost identity at the
/// stopping threshold: paths start at q0 = p with the barrier moved to
/// p + dp; attackers accrue intensity until min(T, hit), innocents pay the
/// false-alarm cost when terminated before being blocked.
struct MarginalBalanceResult {
    double lhs_mean = 0.0;  ///< mean attacker-side accrual
    double rhs_mean = 0.0;  ///< mean innocent-side cost
    double diff_mean = 0.0;
    double diff_se = 0.0;   ///< standard error of the per-path difference
    double z_score = 0.0;   ///< diff_mean / diff_se
    std::size_t n_paths = 0;
};

MarginalBalanceResult marginal_balance_check(const Equilibrium& eq, double dp,
                                             const SimConfig& cfg);

/// Options for the finite-difference residual suite.
struct VerifyOptions {
    int n_grid = 1000;             ///< interior grid points on (0, p)
    double h_rel = 1e-4;           ///< stencil width as a fraction of p
    double tol = 1e-4;             ///< relative residual tolerance
    double smooth_fit_h = 1e-5;    ///< stencil for U'(p-) = -l
    double smooth_fit_tol = 2e-4;
    double tamper_value_scale = 1.0;  ///< test hook: scales V before checking
};

/// Residual report for the equilibrium ODE system.
struct ResidualReport {
    double max_attacker_residual = 0.0;  ///< attacker HJB, branch-dispatched
    double max_defender_residual = 0.0;  ///< defender continuation ODE
    double max_blocking_residual = 0.0;  ///< blocking-probability ODE
    double smooth_fit_error = 0.0;       ///< |U'(p-) + l| across the boundary
    bool attacker_ok = false;
    bool defender_ok = false;
    bool blocking_ok = false;
    bool smooth_fit_ok = false;
    int points_checked = 0;

    bool all_ok() const { return attacker_ok && defender_ok && blocking_ok && smooth_fit_ok; }
};

/// Plugs the closed forms into the ODE system with second-order central
/// differences and reports the worst relative residual per equation.
ResidualReport verify_closed_forms(const Equilibrium& eq, const VerifyOptions& opt = {});

}  // namespace repgame
