#include "repgame/special_functions.hpp"

#include <cmath>
#include <stdexcept>

namespace repgame {

namespace {

constexpr double kHalfSqrtPi = 0.8862269254527580137;  // sqrt(pi)/2

// Initial approximation of erf^-1, accurate to ~1e-7 (Giles-style
// single-precision polynomial in w = -log(1 - y^2)).
double erf_inv_seed(double y) {
    double w = -std::log((1.0 - y) * (1.0 + y));
    double p;
    if (w < 5.0) {
        w -= 2.5;
        p = 2.81022636e-08;
        p = 3.43273939e-07 + p * w;
        p = -3.5233877e-06 + p * w;
        p = -4.39150654e-06 + p * w;
        p = 0.00021858087 + p * w;
        p = -0.00125372503 + p * w;
        p = -0.00417768164 + p * w;
        p = 0.246640727 + p * w;
        p = 1.50140941 + p * w;
    } else {
        w = std::sqrt(w) - 3.0;
        p = -0.000200214257;
        p = 0.000100950558 + p * w;
        p = 0.00134934322 + p * w;
        p = -0.00367342844 + p * w;
        p = 0.00573950773 + p * w;
        p = -0.0076224613 + p * w;
        p = 0.00943887047 + p * w;
        p = 1.00167406 + p * w;
        p = 2.83297682 + p * w;
    }
    return p * y;
}

}  // namespace

double gauss_erf(double x) { return std::erf(x); }

double gauss_erf_inv(double y) {
    if (!(std::fabs(y) < 1.0)) {
        throw std::domain_error("gauss_erf_inv: argument must lie in (-1, 1)");
    }
    if (y == 0.0) return 0.0;

    const double ay = std::fabs(y);
    double x = erf_inv_seed(ay);

    if (ay < 0.9375) {
        for (int i = 0; i < 3; ++i) {
            x -= (std::erf(x) - ay) * kHalfSqrtPi * std::exp(x * x);
        }
    } else {
        // Deep in the tail erf(x) rounds to 1; iterate on the complement,
        // which std::erfc resolves with full relative accuracy.
        const double w = 1.0 - ay;  // exact: ay in [0.9375, 1)
        for (int i = 0; i < 3; ++i) {
            x += (std::erfc(x) - w) * kHalfSqrtPi * std::exp(x * x);
        }
    }
    return std::copysign(x, y);
}

}  // namespace repgame
