#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "repgame/equilibrium.hpp"

namespace repgame {

/// One industry row: observed breach cost and detection time, plus the two
/// parameters held fixed during calibration.
struct CalibrationTarget {
    std::string industry;
    double avg_cost = 0.0;             ///< average breach cost, millions
    double avg_days = 0.0;             ///< average detection time, days
    double false_alarm_cost = 1.52;    ///< l, fixed
    double max_intensity = 100.0;      ///< M, fixed

    void validate() const;
};

struct CalibrationResult {
    std::string industry;
    double r = 0.0;
    double sigma = 0.0;
    double q_hat = 0.0;
    double fitted_cost = 0.0;        ///< V(q_hat) at the solution
    double fitted_days = 0.0;        ///< 365 (1 - u(q_hat)) / r
    double alpha_over_sigma = 0.0;   ///< signal informativeness at q_hat
    bool converged = false;
    double residual_norm = 0.0;      ///< max relative residual of the two equations
    int iterations = 0;
    double jacobian_cond = 0.0;      ///< condition number of the final Jacobian
    std::string message;             ///< failure detail when not converged
};

/// Recovers (r, sigma) so that the model-implied breach cost V(q_hat) and
/// detection time match the target. Damped Newton on (log r, log sigma)
/// with a forward-difference Jacobian; falls back to a log-grid scan for a
/// fresh starting point if Newton stalls. q_hat is recomputed at every
/// trial point.
CalibrationResult calibrate(const CalibrationTarget& target);

/// Model-implied (cost, days) at given (r, sigma) with l, M from the target.
/// Exposed for round-trip tests.
std::pair<double, double> calibration_forward(const CalibrationTarget& target, double r,
                                              double sigma);

/// Reads a CSV with header `industry,avg_cost_musd,avg_days`. Malformed or
/// nonpositive rows raise std::runtime_error naming the line number.
/// `l` and `M` fill the fixed fields of every target.
std::vector<CalibrationTarget> ingest_table(const std::filesystem::path& path, double l = 1.52,
                                            double M = 100.0);

/// Calibrates every target; per-row failures are captured in the result
/// rather than aborting the batch.
std::vector<CalibrationResult> calibrate_all(const std::vector<CalibrationTarget>& targets);

}  // namespace repgame
