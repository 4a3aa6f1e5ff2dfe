#include "fracscat/specfun.hpp"

#include "fracscat/errors.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace fracscat::specfun {

namespace {

using boost::math::policies::policy;
using boost::math::policies::promote_double;
using Policy = policy<promote_double<false>>;

constexpr double kMaxOrder = 20.0;

} // namespace

double gamma_fn(double x) {
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError("gamma_fn: x must be positive and finite, got " + std::to_string(x));
    return boost::math::tgamma(x, Policy());
}

double bessel_j(double order, double t) {
    if (!(order >= 0.0 && order <= kMaxOrder))
        throw DomainError("bessel_j: order must lie in [0, 20], got " + std::to_string(order));
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("bessel_j: t must be nonnegative and finite, got " + std::to_string(t));
    if (t == 0.0)
        return order == 0.0 ? 1.0 : 0.0;
    return boost::math::cyl_bessel_j(order, t, Policy());
}

double bessel_y(double order, double t) {
    if (!(order >= 0.0 && order <= kMaxOrder))
        throw DomainError("bessel_y: order must lie in [0, 20], got " + std::to_string(order));
    if (!(t > 0.0) || !std::isfinite(t))
        throw DomainError("bessel_y: t must be positive and finite, got " + std::to_string(t));
    return boost::math::cyl_neumann(order, t, Policy());
}

double bessel_k(double order, double t) {
    if (!(order >= 0.0 && order <= kMaxOrder))
        throw DomainError("bessel_k: order must lie in [0, 20], got " + std::to_string(order));
    if (!(t > 0.0))
        throw DomainError("bessel_k: t must be positive, got " + std::to_string(t));
    if (t > 700.0)
        return 0.0;
    if (order == 0.5)
        return std::sqrt(std::numbers::pi / (2.0 * t)) * std::exp(-t);
    return boost::math::cyl_bessel_k(order, t, Policy());
}

double sphere_kernel(int d, double t) {
    if (d < 2)
        throw DomainError("sphere_kernel: dimension must be >= 2, got " + std::to_string(d));
    if (!(t >= 0.0) || !std::isfinite(t))
        throw DomainError("sphere_kernel: t must be nonnegative and finite, got " + std::to_string(t));

    if (d == 3) {
        constexpr double c = 0.79788456080286535588; // sqrt(2/pi)
        if (t < 1e-4) {
            const double t2 = t * t;
            return c * (1.0 - t2 / 6.0 + t2 * t2 / 120.0);
        }
        return c * std::sin(t) / t;
    }

    const double nu = 0.5 * d - 1.0;
    if (t < 1e-3) {
        // S_d(0) = 2^{-nu} / Gamma(nu + 1) plus the first two series corrections.
        const double s0 = std::pow(2.0, -nu) / gamma_fn(nu + 1.0);
        const double t2 = t * t;
        return s0 * (1.0 - t2 / (4.0 * (nu + 1.0)) + t2 * t2 / (32.0 * (nu + 1.0) * (nu + 2.0)));
    }
    if (nu == 0.0)
        return bessel_j(0.0, t);
    return bessel_j(nu, t) / std::pow(t, nu);
}

} // namespace fracscat::specfun
