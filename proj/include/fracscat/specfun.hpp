#pragma once

// Real special functions used by every kernel in the library.

namespace fracscat::specfun {

/// Gamma function for x > 0.
double gamma_fn(double x);

/// Bessel function of the first kind J_order(t), order in [0, 20], t >= 0.
double bessel_j(double order, double t);

/// Bessel function of the second kind Y_order(t), t > 0.
double bessel_y(double order, double t);

/// Modified Bessel function K_order(t) for t > 0; returns 0 past t = 700.
double bessel_k(double order, double t);

/// Sphere kernel S_d(t) = (2 pi)^{-d/2} \int_{S^{d-1}} e^{i t e_1.w} dS(w)
///                      = J_{d/2-1}(t) / t^{d/2-1},   S_d(0) = 2^{1-d/2} / Gamma(d/2).
double sphere_kernel(int d, double t);

} // namespace fracscat::specfun
