#include "repgame/calibration.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "repgame/analysis.hpp"

namespace repgame {

namespace {

constexpr double kDaysPerYear = 365.0;
constexpr double kResidualTol = 1e-8;
constexpr int kMaxNewton = 60;
constexpr double kFdStep = 1e-6;       // relative step for the Jacobian
constexpr double kQhatTol = 1e-10;     // inner optimizer, two orders tighter

struct Vec2 {
    double x0, x1;
    double norm() const { return std::max(std::fabs(x0), std::fabs(x1)); }
};

// relative residuals of (cost, days) at (log r, log sigma)
Vec2 residual(const CalibrationTarget& t, double lr, double ls) {
    ModelParams prm{t.max_intensity, t.false_alarm_cost, std::exp(lr), std::exp(ls)};
    Equilibrium eq(prm);
    const auto opt = optimal_attack_prob(eq, kQhatTol);
    const double cost = eq.attacker_value(opt.q_hat);
    const double days =
        kDaysPerYear * (1.0 - eq.blocking_prob(opt.q_hat)) / prm.termination_rate;
    return {(cost - t.avg_cost) / t.avg_cost, (days - t.avg_days) / t.avg_days};
}

double cond2x2(const std::array<double, 4>& J) {
    // singular values of [a b; c d] via the 2x2 SVD identities
    const double a = J[0], b = J[1], c = J[2], d = J[3];
    const double s1 = a * a + b * b + c * c + d * d;
    const double det = a * d - b * c;
    const double disc = std::sqrt(std::max(0.0, s1 * s1 - 4.0 * det * det));
    const double smax = std::sqrt(0.5 * (s1 + disc));
    const double smin = std::sqrt(std::max(0.0, 0.5 * (s1 - disc)));
    return smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

void CalibrationTarget::validate() const {
    if (!(avg_cost > 0.0)) throw std::invalid_argument("CalibrationTarget: avg_cost must be positive");
    if (!(avg_days > 0.0)) throw std::invalid_argument("CalibrationTarget: avg_days must be positive");
    ModelParams probe{max_intensity, false_alarm_cost, 0.4, 1.0};
    probe.validate();
}

std::pair<double, double> calibration_forward(const CalibrationTarget& target, double r,
                                              double sigma) {
    ModelParams prm{target.max_intensity, target.false_alarm_cost, r, sigma};
    Equilibrium eq(prm);
    const auto opt = optimal_attack_prob(eq, kQhatTol);
    const double cost = eq.attacker_value(opt.q_hat);
    const double days = kDaysPerYear * (1.0 - eq.blocking_prob(opt.q_hat)) / r;
    return {cost, days};
}

CalibrationResult calibrate(const CalibrationTarget& target) {
    target.validate();
    CalibrationResult out;
    out.industry = target.industry;

    auto solve_from = [&](double lr, double ls, int budget) {
        Vec2 f = residual(target, lr, ls);
        std::array<double, 4> jac{};
        int it = 0;
        while (it < budget && f.norm() > kResidualTol) {
            // forward differences in log space
            const Vec2 fr = residual(target, lr + kFdStep, ls);
            const Vec2 fs = residual(target, lr, ls + kFdStep);
            jac = {(fr.x0 - f.x0) / kFdStep, (fs.x0 - f.x0) / kFdStep,
                   (fr.x1 - f.x1) / kFdStep, (fs.x1 - f.x1) / kFdStep};
            const double det = jac[0] * jac[3] - jac[1] * jac[2];
            if (!(std::fabs(det) > 1e-300)) break;
            const double dlr = -(jac[3] * f.x0 - jac[1] * f.x1) / det;
            const double dls = -(-jac[2] * f.x0 + jac[0] * f.x1) / det;

            double step = 1.0;
            bool improved = false;
            for (int bt = 0; bt < 40; ++bt) {
                const double nlr = lr + step * dlr;
                const double nls = ls + step * dls;
                if (nlr > -12.0 && nlr < 12.0 && nls > -12.0 && nls < 12.0) {
                    const Vec2 fn = residual(target, nlr, nls);
                    if (fn.norm() < f.norm()) {
                        lr = nlr;
                        ls = nls;
                        f = fn;
                        improved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            ++it;
            if (!improved) break;
        }
        return std::tuple{lr, ls, f, jac, it};
    };

    auto [lr, ls, f, jac, iters] =
        solve_from(std::log(0.4), std::log(target.avg_cost), kMaxNewton);
    out.iterations = iters;

    if (f.norm() > kResidualTol) {
        // grid scan for the best restart seed
        double best = f.norm();
        double blr = lr, bls = ls;
        for (int i = 0; i < 40; ++i) {
            for (int j = 0; j < 40; ++j) {
                const double glr = std::log(0.02) + (std::log(5.0) - std::log(0.02)) * i / 39.0;
                const double gls = std::log(0.05 * target.avg_cost) +
                                   (std::log(50.0 * target.avg_cost) -
                                    std::log(0.05 * target.avg_cost)) *
                                       j / 39.0;
                const Vec2 g = residual(target, glr, gls);
                if (g.norm() < best) {
                    best = g.norm();
                    blr = glr;
                    bls = gls;
                }
            }
        }
        auto [lr2, ls2, f2, jac2, it2] = solve_from(blr, bls, kMaxNewton);
        out.iterations += it2;
        lr = lr2;
        ls = ls2;
        f = f2;
        jac = jac2;
    }

    out.r = std::exp(lr);
    out.sigma = std::exp(ls);
    out.residual_norm = f.norm();
    out.converged = f.norm() <= kResidualTol;
    out.jacobian_cond = cond2x2(jac);

    ModelParams prm{target.max_intensity, target.false_alarm_cost, out.r, out.sigma};
    Equilibrium eq(prm);
    out.q_hat = optimal_attack_prob(eq, kQhatTol).q_hat;
    out.fitted_cost = eq.attacker_value(out.q_hat);
    out.fitted_days = kDaysPerYear * (1.0 - eq.blocking_prob(out.q_hat)) / out.r;
    out.alpha_over_sigma = eq.attack_intensity(out.q_hat) / out.sigma;
    if (!out.converged) {
        std::ostringstream msg;
        msg << "stalled with relative residual " << out.residual_norm;
        out.message = msg.str();
    }
    return out;
}

std::vector<CalibrationTarget> ingest_table(const std::filesystem::path& path, double l,
                                            double M) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("ingest_table: cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    std::vector<CalibrationTarget> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line != "industry,avg_cost_musd,avg_days") {
                throw std::runtime_error("ingest_table: line " + std::to_string(line_no) +
                                         ": expected header industry,avg_cost_musd,avg_days");
            }
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string industry, cost_s, days_s;
        if (!std::getline(ss, industry, ',') || !std::getline(ss, cost_s, ',') ||
            !std::getline(ss, days_s)) {
            throw std::runtime_error("ingest_table: line " + std::to_string(line_no) +
                                     ": expected 3 comma-separated fields");
        }
        CalibrationTarget t;
        t.industry = industry;
        t.false_alarm_cost = l;
        t.max_intensity = M;
        try {
            std::size_t used = 0;
            t.avg_cost = std::stod(cost_s, &used);
            if (used != cost_s.size()) throw std::invalid_argument("trailing junk");
            t.avg_days = std::stod(days_s, &used);
            if (used != days_s.size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::runtime_error("ingest_table: line " + std::to_string(line_no) +
                                     ": numeric field is malformed");
        }
        if (!(t.avg_cost > 0.0) || !(t.avg_days > 0.0)) {
            throw std::runtime_error("ingest_table: line " + std::to_string(line_no) +
                                     ": cost and days must be positive");
        }
        rows.push_back(std::move(t));
    }
    return rows;
}

std::vector<CalibrationResult> calibrate_all(const std::vector<CalibrationTarget>& targets) {
    std::vector<CalibrationResult> out;
    out.reserve(targets.size());
    for (const auto& t : targets) {
        try {
            out.push_back(calibrate(t));
        } catch (const std::exception& ex) {
            CalibrationResult fail;
            fail.industry = t.industry;
            fail.converged = false;
            fail.residual_norm = std::numeric_limits<double>::infinity();
            fail.message = ex.what();
            out.push_back(std::move(fail));
        }
    }
    return out;
}

}  // namespace repgame
