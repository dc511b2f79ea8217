#pragma once

#include <stdexcept>
#include <string>

namespace repgame {

/// Exogenous model inputs. Units: time in years, money in millions.
struct ModelParams {
    double max_intensity;     ///< M, cap on the attack intensity (value per year)
    double false_alarm_cost;  ///< l, one-time cost of blocking an innocent user
    double termination_rate;  ///< r, rate of the exponential termination clock
    double noise_intensity;   ///< sigma, volatility of the observation signal

    /// Throws std::invalid_argument unless all four fields are strictly
    /// positive and finite.
    void validate() const;
};

/// Regime split of the equilibrium.
///
/// Saturated: r*sigma^2/M^2 >= 1, the attacker plays the cap M everywhere.
/// Interior:  r*sigma^2/M^2 <  1, the intensity tapers above q_star.
/// Ties go to Saturated.
enum class Regime { Saturated, Interior };

inline const char* to_string(Regime r) {
    return r == Regime::Saturated ? "saturated" : "interior";
}

}  // namespace repgame
