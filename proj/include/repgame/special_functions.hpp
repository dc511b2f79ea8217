#pragma once

namespace repgame {

/// phi(x) = (2/sqrt(pi)) * integral_0^x exp(-t^2) dt.
/// Odd, maps R onto (-1, 1). Absolute error below 1e-14.
double gauss_erf(double x);

/// Inverse of gauss_erf on (-1, 1).
///
/// Polynomial initial guess refined with Newton steps against gauss_erf
/// (erfc-based residual in the tails), relative error below 1e-12.
/// Throws std::domain_error when |y| >= 1.
double gauss_erf_inv(double y);

}  // namespace repgame
