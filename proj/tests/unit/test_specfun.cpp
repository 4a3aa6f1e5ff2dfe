#include "fracscat/errors.hpp"
#include "fracscat/specfun.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace fracscat;
using std::numbers::pi;

namespace {

// Power series for J_nu(t), summed in long double; accurate for moderate t.
double j_series(double nu, double t) {
    long double term = std::pow(0.5L * t, static_cast<long double>(nu)) / std::tgamma(nu + 1.0L);
    long double sum = term;
    const long double q = -0.25L * t * t;
    for (int m = 1; m < 200; ++m) {
        term *= q / (m * (m + nu));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum))
            break;
    }
    return static_cast<double>(sum);
}

} // namespace

TEST_CASE("gamma_fn matches factorials, sqrt(pi) and the recurrence") {
    CHECK(specfun::gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(specfun::gamma_fn(0.5) == doctest::Approx(std::sqrt(pi)).epsilon(1e-14));
    const double g32 = 0.5 * std::sqrt(pi);
    CHECK(specfun::gamma_fn(1.5) == doctest::Approx(g32).epsilon(1e-14));
    CHECK(specfun::gamma_fn(1.5) == doctest::Approx(0.8862269).epsilon(1e-7));
    double fact = 1.0;
    for (int n = 1; n <= 29; ++n) {
        fact *= n;
        CHECK(std::abs(specfun::gamma_fn(n + 1.0) / fact - 1.0) <= 1e-12);
    }
    for (double x = 0.5; x < 29.0; x += 0.37) {
        const double ratio = specfun::gamma_fn(x + 1.0) / (x * specfun::gamma_fn(x));
        CHECK(std::abs(ratio - 1.0) <= 1e-12);
    }
    CHECK_THROWS_AS(specfun::gamma_fn(0.0), DomainError);
    CHECK_THROWS_AS(specfun::gamma_fn(-2.5), DomainError);
}

TEST_CASE("bessel_j agrees with the half-integer closed form and an independent series") {
    CHECK(specfun::bessel_j(0.0, 0.0) == 1.0);
    CHECK(specfun::bessel_j(0.5, 1.0) == doctest::Approx(std::sqrt(2.0 / pi) * std::sin(1.0)).epsilon(1e-13));
    CHECK(specfun::bessel_j(0.5, 1.0) == doctest::Approx(0.6713967).epsilon(1e-7));
    for (double t = 0.1; t < 1000.0; t *= 1.3)
        CHECK(std::abs(specfun::bessel_j(0.5, t) - std::sqrt(2.0 / (pi * t)) * std::sin(t)) <= 1e-10);
    for (double nu : {0.0, 0.5, 1.0, 2.5, 7.0, 20.0})
        for (double t = 0.05; t < 12.0; t += 0.45)
            CHECK(std::abs(specfun::bessel_j(nu, t) - j_series(nu, t)) <= 1e-10);
    CHECK_THROWS_AS(specfun::bessel_j(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(specfun::bessel_j(21.0, 1.0), DomainError);
}

TEST_CASE("first zero of J_1 located by bisection on the series") {
    double a = 3.5, b = 4.0;
    for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + b);
        (j_series(1.0, a) * j_series(1.0, m) <= 0.0 ? b : a) = m;
    }
    const double root = 0.5 * (a + b);
    CHECK(root == doctest::Approx(3.8317060).epsilon(1e-7));
    CHECK(std::abs(specfun::bessel_j(1.0, root)) <= 1e-8);
    CHECK(std::abs(specfun::bessel_j(1.0, 3.8317060)) <= 1e-7);
}

TEST_CASE("bessel_k: half-integer closed form, monotone K_0, underflow") {
    auto k_half = [](double t) { return std::sqrt(pi / (2.0 * t)) * std::exp(-t); };
    CHECK(specfun::bessel_k(0.5, 1.0) == doctest::Approx(0.4610685).epsilon(1e-7));
    CHECK(specfun::bessel_k(0.5, 2.0) == doctest::Approx(k_half(2.0)).epsilon(1e-14));
    CHECK(specfun::bessel_k(0.5, 2.0) == doctest::Approx(0.1199377).epsilon(1e-7));
    // K_{3/2}(t) = sqrt(pi/2t) e^{-t} (1 + 1/t), exercised through the general path.
    for (double t = 1e-6; t < 700.0; t *= 3.0) {
        CHECK(std::abs(specfun::bessel_k(0.5, t) / k_half(t) - 1.0) <= 1e-10);
        const double k32 = k_half(t) * (1.0 + 1.0 / t);
        CHECK(std::abs(specfun::bessel_k(1.5, t) / k32 - 1.0) <= 1e-10);
    }
    double prev = specfun::bessel_k(0.0, 0.1);
    for (double t = 0.2; t <= 10.0; t += 0.1) {
        const double v = specfun::bessel_k(0.0, t);
        CHECK(v > 0.0);
        CHECK(v < prev);
        prev = v;
    }
    CHECK(specfun::bessel_k(0.0, 800.0) == 0.0);
    CHECK_THROWS_AS(specfun::bessel_k(0.0, 0.0), DomainError);
}

TEST_CASE("sphere_kernel values, continuity at zero and decay") {
    CHECK(specfun::sphere_kernel(3, pi / 2) == doctest::Approx(0.5079490).epsilon(1e-7));
    CHECK(specfun::sphere_kernel(2, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(specfun::sphere_kernel(3, pi)) <= 1e-15);
    for (int d = 2; d <= 6; ++d) {
        const double s0 = std::pow(2.0, 1.0 - 0.5 * d) / std::tgamma(0.5 * d);
        CHECK(specfun::sphere_kernel(d, 0.0) == doctest::Approx(s0).epsilon(1e-14));
        CHECK(std::abs(specfun::sphere_kernel(d, 1e-4) - s0) <= 1e-6);
        CHECK(std::abs(specfun::sphere_kernel(d, 1e-6) / s0 - 1.0) <= 1e-8);
        // Both sides of the small-argument switch agree.
        const double lo = specfun::sphere_kernel(d, 0.999e-3);
        const double hi = specfun::sphere_kernel(d, 1.001e-3);
        CHECK(std::abs(lo - hi) <= 1e-6 * s0);
    }
    for (double t = 1e-3; t <= 100.0; t *= 1.07)
        CHECK(std::abs(specfun::sphere_kernel(3, t) - std::sqrt(2.0 / pi) * std::sin(t) / t) <= 1e-10);
    // Frozen envelope constants: |S_d(t)| <= C_d t^{-(d-1)/2} for t >= 10.
    const double c_env[] = {0.0, 0.0, 0.80, 0.80, 0.80, 0.81, 0.81};
    for (int d = 2; d <= 6; ++d)
        for (double t = 10.0; t < 1000.0; t *= 1.01)
            CHECK(std::abs(specfun::sphere_kernel(d, t)) <= c_env[d] * std::pow(t, -0.5 * (d - 1)));
    CHECK_THROWS_AS(specfun::sphere_kernel(1, 1.0), DomainError);
    CHECK_THROWS_AS(specfun::sphere_kernel(3, -1.0), DomainError);
}
