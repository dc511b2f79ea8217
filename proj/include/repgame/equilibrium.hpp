#pragma once

#include <cstdint>

#include "repgame/params.hpp"

namespace repgame {

/// Constants derived from the model parameters.
///
/// a, b, c follow the closed-form solution of the equilibrium ODE system:
///   a = (sqrt(1 + 8 r sigma^2 / M^2) - 1) / 2
///   b = (1 - a) M / (2 sigma sqrt(r))
///   c = 2 sigma sqrt(r) exp(-b^2) / (M sqrt(pi)) + erf(b)
///
/// For realistic parameters b is around 20, so c - erf(b) underflows when
/// formed by subtraction. log_gap stores log(c - erf(b)) computed from the
/// explicit exponential form; q_star is evaluated from it and set to 0 once
/// the gap falls below double range.
struct DerivedConstants {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double q_star = 0.0;   ///< intensity cap cutoff, 0 in the saturated regime
    double p = 0.0;        ///< stopping threshold, in (0, 1)
    double log_gap = 0.0;  ///< log(c - erf(b)) = log(2 sigma sqrt(r)/(M sqrt(pi))) - b^2
};

struct ConstantsResult {
    Regime regime;
    DerivedConstants consts;
};

/// Computes regime and derived constants; validates params.
ConstantsResult derive_constants(const ModelParams& params);

/// Running count of times the y-transform argument had to be clamped back
/// into [0, 1 - 1e-15] because of rounding. Diagnostic only; thread-safe.
std::int64_t y_clamp_count();

/// The closed-form Markov equilibrium for one parameter set.
///
/// Immutable after construction; all evaluators are const and safe to call
/// from any number of threads.
class Equilibrium {
public:
    explicit Equilibrium(const ModelParams& params);

    const ModelParams& params() const { return params_; }
    Regime regime() const { return regime_; }
    const DerivedConstants& constants() const { return consts_; }
    bool saturated() const { return regime_ == Regime::Saturated; }

    double stopping_threshold() const { return consts_.p; }
    double q_star() const { return consts_.q_star; }

    /// y(q) = erf^-1( c (p - q) / (p (1 - q)) ), defined on (q_star, p].
    /// Strictly decreasing, y(p) = 0, y(q_star) = b.
    /// Throws std::domain_error outside (q_star, p].
    double y_of(double q) const;

    /// Equilibrium attack intensity alpha(q), q in [0, 1]. Always in (0, M].
    double attack_intensity(double q) const;

    /// Attacker's value V(q). V(0) = M/r, V = 0 on [p, 1], nonincreasing.
    double attacker_value(double q) const;

    /// Defender's cost U(q). U(0) = 0, U = l (1 - q) on [p, 1].
    double defender_cost(double q) const;

    /// u(q0) = P(blocked before termination | attacker), q0 in [0, p].
    /// u(0) = 0, u(p) = 1, strictly increasing.
    /// Throws std::domain_error for q0 outside [0, p].
    double blocking_prob(double q0) const;

    /// P(blocked before termination | innocent) = q0 (1-p) / (p (1-q0)) u(q0).
    double false_block_prob(double q0) const;

private:
    double y_unchecked(double q) const;

    ModelParams params_;
    Regime regime_;
    DerivedConstants consts_;
    double sqrt_r_;
    double alpha_tail_;   // alpha on [p, 1]
    double v_head_coef_;  // sigma^2/(a M) (1-q*)^a / q*^a, interior head branch
    double u_head_coef_;  // U head branch coefficient
    double w_head_coef_;  // u head branch prefactor a c M sqrt(pi)/(2 sigma sqrt(r))
};

}  // namespace repgame
