#include "repgame/equilibrium.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "repgame/special_functions.hpp"

namespace repgame {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
constexpr double kArgClampHi = 1.0 - 1e-15;
constexpr double kArgHardLimit = 1.0 + 1e-9;
// below this, exp(log_gap) is not representable and q_star collapses to 0
const double kLogGapFloor = std::log(std::numeric_limits<double>::min());

std::atomic<std::int64_t> g_clamp_count{0};

}  // namespace

void ModelParams::validate() const {
    auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
    if (bad(max_intensity)) throw std::invalid_argument("ModelParams: M must be positive and finite");
    if (bad(false_alarm_cost)) throw std::invalid_argument("ModelParams: l must be positive and finite");
    if (bad(termination_rate)) throw std::invalid_argument("ModelParams: r must be positive and finite");
    if (bad(noise_intensity)) throw std::invalid_argument("ModelParams: sigma must be positive and finite");
}

std::int64_t y_clamp_count() { return g_clamp_count.load(std::memory_order_relaxed); }

ConstantsResult derive_constants(const ModelParams& params) {
    params.validate();
    const double M = params.max_intensity;
    const double l = params.false_alarm_cost;
    const double r = params.termination_rate;
    const double sigma = params.noise_intensity;

    const double k = r * sigma * sigma / (M * M);
    const Regime regime = k >= 1.0 ? Regime::Saturated : Regime::Interior;

    DerivedConstants d;
    d.a = 0.5 * (std::sqrt(1.0 + 8.0 * k) - 1.0);
    const double sr = sigma * std::sqrt(r);
    d.b = (1.0 - d.a) * M / (2.0 * sr);
    // c - erf(b) = 2 sigma sqrt(r) exp(-b^2) / (M sqrt(pi)), kept in log form
    d.log_gap = std::log(2.0 * sr / (M * kSqrtPi)) - d.b * d.b;
    const double gap = d.log_gap > kLogGapFloor ? std::exp(d.log_gap) : 0.0;
    const double erf_b = gauss_erf(d.b);
    d.c = gap + erf_b;

    if (regime == Regime::Saturated) {
        d.p = (1.0 + d.a) * r * l / ((1.0 + d.a) * r * l + d.a * M);
        d.q_star = 0.0;
    } else {
        const double clsr = d.c * l * std::sqrt(M_PI * r);
        d.p = clsr / (clsr + sigma);
        // q* = p (c - erf(b)) / (c - p erf(b)); denominator rewritten as
        // gap + (1-p) erf(b) so no cancellation occurs
        d.q_star = gap > 0.0 ? d.p * gap / (gap + (1.0 - d.p) * erf_b) : 0.0;
    }
    return {regime, d};
}

Equilibrium::Equilibrium(const ModelParams& params) : params_(params) {
    auto [regime, consts] = derive_constants(params);
    regime_ = regime;
    consts_ = consts;

    const double M = params_.max_intensity;
    const double l = params_.false_alarm_cost;
    const double r = params_.termination_rate;
    const double sigma = params_.noise_intensity;
    sqrt_r_ = std::sqrt(r);
    const double a = consts_.a;
    const double p = consts_.p;
    const double qs = consts_.q_star;

    if (regime_ == Regime::Saturated) {
        alpha_tail_ = M;
        const double head = std::pow((1.0 - p) / p, a);
        v_head_coef_ = M / r * head;
        u_head_coef_ = (M / r - (1.0 - p) * l / p) * head;
        w_head_coef_ = head;
    } else {
        alpha_tail_ = 2.0 * sigma * sqrt_r_ / (consts_.c * kSqrtPi);
        if (qs > 0.0) {
            // ((1 - q*)/q*)^a via logs; q* can sit near 1e-170
            const double head = std::exp(a * (std::log1p(-qs) - std::log(qs)));
            v_head_coef_ = sigma * sigma / (a * M) * head;
            u_head_coef_ =
                (sigma * sigma / (a * M) -
                 consts_.c * std::sqrt(M_PI * r) * (1.0 - p) * l * sigma / ((1.0 + a) * M * p)) *
                head;
            w_head_coef_ = a * consts_.c * M * kSqrtPi / (2.0 * sigma * sqrt_r_) * head;
        } else {
            // gap underflowed: the cap branch is empty, middle branch covers (0, p)
            v_head_coef_ = u_head_coef_ = w_head_coef_ = 0.0;
        }
    }
}

double Equilibrium::y_unchecked(double q) const {
    // y(q*) = b exactly, by construction of q*; the erf-inverse route
    // saturates there once erf(b) rounds to 1
    if (q == consts_.q_star && consts_.q_star > 0.0) return consts_.b;
    const double p = consts_.p;
    double arg = consts_.c * (p - q) / (p * (1.0 - q));
    if (arg > kArgClampHi) {
        if (arg > kArgHardLimit) {
            throw std::domain_error("y_of: argument exceeds 1 beyond rounding tolerance");
        }
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        arg = kArgClampHi;
    } else if (arg < 0.0) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        arg = 0.0;
    }
    return gauss_erf_inv(arg);
}

double Equilibrium::y_of(double q) const {
    if (!(q > consts_.q_star) || !(q <= consts_.p)) {
        if (!(q == consts_.q_star && consts_.q_star > 0.0)) {
            throw std::domain_error("y_of: q outside (q_star, p]");
        }
    }
    return y_unchecked(q);
}

double Equilibrium::attack_intensity(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("attack_intensity: q outside [0, 1]");
    const double M = params_.max_intensity;
    if (regime_ == Regime::Saturated) return M;
    if (q <= consts_.q_star) return M;
    if (q >= consts_.p) return alpha_tail_;
    const double p = consts_.p;
    const double y = y_unchecked(q);
    const double val = 2.0 * p * (1.0 - q) * params_.noise_intensity * sqrt_r_ *
                       std::exp(-y * y) / (consts_.c * kSqrtPi * (1.0 - p) * q);
    // the middle branch stays below M by construction; the cap only binds
    // when q is so small that the y clamp has kicked in
    return std::min(val, M);
}

double Equilibrium::attacker_value(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("attacker_value: q outside [0, 1]");
    const double M = params_.max_intensity;
    const double r = params_.termination_rate;
    if (q >= consts_.p) return 0.0;
    if (q == 0.0) return M / r;
    const double a = consts_.a;
    if (regime_ == Regime::Saturated) {
        return M / r - v_head_coef_ * std::pow(q / (1.0 - q), a);
    }
    if (q <= consts_.q_star) {
        return M / r - v_head_coef_ * std::pow(q / (1.0 - q), a);
    }
    return params_.noise_intensity / sqrt_r_ * y_unchecked(q);
}

double Equilibrium::defender_cost(double q) const {
    if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("defender_cost: q outside [0, 1]");
    const double l = params_.false_alarm_cost;
    if (q >= consts_.p) return l * (1.0 - q);
    if (q == 0.0) return 0.0;
    const double M = params_.max_intensity;
    const double r = params_.termination_rate;
    const double a = consts_.a;
    if (regime_ == Regime::Saturated || q <= consts_.q_star) {
        return q * (M / r - u_head_coef_ * std::pow(q / (1.0 - q), a));
    }
    const double p = consts_.p;
    const double y = y_unchecked(q);
    const double sigma = params_.noise_intensity;
    return sigma / sqrt_r_ * q * y +
           l * (1.0 - q) *
               (std::exp(-y * y) - consts_.c * kSqrtPi * (1.0 - p) * q * y / (p * (1.0 - q)));
}

double Equilibrium::blocking_prob(double q0) const {
    if (!(q0 >= 0.0 && q0 <= consts_.p)) {
        throw std::domain_error("blocking_prob: q0 outside [0, p]");
    }
    if (q0 == 0.0) return 0.0;
    if (q0 == consts_.p) return 1.0;
    const double a = consts_.a;
    const double p = consts_.p;
    if (regime_ == Regime::Saturated) {
        return std::pow(q0 * (1.0 - p) / (p * (1.0 - q0)), a);
    }
    if (q0 <= consts_.q_star) {
        return w_head_coef_ * std::pow(q0 / (1.0 - q0), a);
    }
    const double y = y_unchecked(q0);
    const double val =
        p * (1.0 - q0) / (q0 * (1.0 - p)) * std::exp(-y * y) - consts_.c * kSqrtPi * y;
    // guards the numerically degenerate sliver right above q*, where the two
    // terms are huge and nearly cancel
    return std::min(1.0, std::max(0.0, val));
}

double Equilibrium::false_block_prob(double q0) const {
    return q0 * (1.0 - consts_.p) / (consts_.p * (1.0 - q0)) * blocking_prob(q0);
}

}  // namespace repgame
