#include "fracscat/errors.hpp"
#include "fracscat/greens.hpp"
#include "fracscat/specfun.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

using namespace fracscat;
using std::numbers::pi;

namespace {

ProblemParams pp(int d, double s, double k, Branch b = Branch::outgoing) { return {d, s, k, b}; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// Trapezoid rule in log(lambda) over a wide fixed grid; written without the
// tau substitution used by the library.
double brute_lambda_correction(int d, double s, double k, double r) {
    const double lo = std::log(1e-12), hi = std::log(1e6 / (r * r));
    const int n = 400000;
    const double dv = (hi - lo) / n;
    const double k2s = std::pow(k, 2 * s);
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double lam = std::exp(lo + i * dv);
        const double ls = std::pow(lam, s);
        const double den = ls * ls - 2.0 * ls * k2s * std::cos(s * pi) + k2s * k2s;
        double g;
        if (d == 3) {
            g = std::exp(-std::sqrt(lam) * r) / (4 * pi * r);
        } else {
            const double nu = 0.5 * d - 1.0;
            const double x = std::sqrt(lam) * r;
            g = x > 700 ? 0.0
                        : std::pow(2 * pi, -0.5 * d) * std::pow(std::sqrt(lam) / r, nu) *
                              specfun::bessel_k(nu, x);
        }
        const double f = ls * g / den * lam;
        sum += (i == 0 || i == n) ? 0.5 * f : f;
    }
    return std::sin(s * pi) / pi * sum * dv;
}

} // namespace

TEST_CASE("phi_classical d=3 is the closed form") {
    const auto v = phi_classical(pp(3, 1.0, 1.0), 1.0);
    CHECK(v.method == GreensMethod::classical_closed);
    CHECK(v.value.real() == doctest::Approx(0.042994).epsilon(1e-5));
    CHECK(v.value.imag() == doctest::Approx(0.066962).epsilon(1e-5));
    for (double k : {0.3, 1.0, 7.0})
        for (double r : {0.01, 1.0, 40.0}) {
            const auto g = phi_classical(pp(3, 0.8, k), r).value;
            CHECK(std::abs(g * 4.0 * pi * r * std::polar(1.0, -k * r) - 1.0) <= 1e-14);
            const auto gm = phi_classical(pp(3, 0.8, k, Branch::incoming), r).value;
            CHECK(std::abs(gm * 4.0 * pi * r * std::polar(1.0, k * r) - 1.0) <= 1e-14);
        }
}

TEST_CASE("d=2 principal-value route reproduces the Hankel closed form (i/4) H0(kr)") {
    for (double k : {1.0, 3.0})
        for (double r : {0.1, 1.0, 4.0}) {
            const auto pv = phi_classical(pp(2, 1.0, k), r);
            CHECK(pv.method == GreensMethod::radial_pv);
            const cplx ref(-0.25 * specfun::bessel_y(0, k * r), 0.25 * specfun::bessel_j(0, k * r));
            CHECK(rel(pv.value, ref) <= 1e-7);
        }
    const auto h = helmholtz_closed_form(2, 1.0, 1.0, Branch::outgoing);
    CHECK(h.value.real() == doctest::Approx(-0.25 * 0.08825696421567696).epsilon(1e-12));
}

TEST_CASE("closed form in d=4 and d=5 agrees with the principal-value route at s = 1") {
    for (int d : {4, 5})
        for (double r : {0.3, 2.0}) {
            const auto pv = phi_classical(pp(d, 1.0, 1.5), r).value;
            const auto cf = helmholtz_closed_form(d, 1.5, r, Branch::outgoing).value;
            CHECK(rel(pv, cf) <= 1e-7);
        }
}

TEST_CASE("radial route: imaginary part is the surface term, s = 1 gives sin(kr)/(4 pi r)") {
    const auto v = phi_fractional_radial(pp(3, 0.8, 1.0), 1.0);
    const double im = std::pow(2 * pi, -1.5) * (pi / 1.6) * specfun::sphere_kernel(3, 1.0);
    CHECK(v.value.imag() == doctest::Approx(im).epsilon(1e-14));
    for (double k : {0.5, 2.0})
        for (double r : {0.2, 3.0}) {
            const auto c = phi_fractional_radial(pp(3, 1.0, k), r).value;
            CHECK(std::abs(c.imag() - std::sin(k * r) / (4 * pi * r)) <= 1e-14);
            CHECK(std::abs(c.real() - std::cos(k * r) / (4 * pi * r)) <= 1e-9 / r);
        }
}

TEST_CASE("dual-route agreement on the d=3 grid") {
    for (double s : {0.8, 0.9})
        for (double k : {1.0, 4.0})
            for (double r : {0.5, 1.0, 2.0, 5.0}) {
                const auto a = phi_fractional_radial(pp(3, s, k), r).value;
                const auto b = phi_fractional_decomp(pp(3, s, k), r).value;
                CHECK(rel(a, b) <= 1e-6);
            }
    const auto a = phi_fractional_radial(pp(3, 0.8, 2.0), 1.5).value;
    const auto b = phi_fractional_decomp(pp(3, 0.8, 2.0), 1.5).value;
    CHECK(rel(a, b) <= 1e-3);
}

TEST_CASE("dual-route agreement away from d=3") {
    for (int d : {2, 4})
        for (double s : {0.4, 0.75})
            for (double r : {0.5, 3.0}) {
                const auto a = phi_fractional_radial(pp(d, s, 1.3), r).value;
                const auto b = phi_fractional_decomp(pp(d, s, 1.3), r).value;
                CHECK(rel(a, b) <= 1e-6);
            }
}

TEST_CASE("yukawa_kernel closed values and monotonicity") {
    CHECK(yukawa_kernel(3, 1.0, 1.0) == doctest::Approx(std::exp(-1.0) / (4 * pi)).epsilon(1e-15));
    CHECK(yukawa_kernel(3, 1.0, 1.0) == doctest::Approx(0.0292749).epsilon(1e-6));
    CHECK(yukawa_kernel(3, 4.0, 2.0) == doctest::Approx(std::exp(-4.0) / (8 * pi)).epsilon(1e-14));
    for (int d : {2, 3, 4, 5}) {
        double prev = yukawa_kernel(d, 2.0, 0.05);
        for (double r = 0.1; r < 20.0; r += 0.1) {
            const double v = yukawa_kernel(d, 2.0, r);
            CHECK(v > 0.0);
            CHECK(v < prev);
            prev = v;
        }
        CHECK(yukawa_kernel(d, 3.0, 1.0) < yukawa_kernel(d, 2.0, 1.0));
    }
    // d=5 closed form e^{-m r}(1 + m r) / (8 pi^2 r^3).
    const double m = 1.7, r = 0.9;
    CHECK(yukawa_kernel(5, m * m, r) ==
          doctest::Approx(std::exp(-m * r) * (1 + m * r) / (8 * pi * pi * r * r * r)).epsilon(1e-12));
    CHECK_THROWS_AS(yukawa_kernel(3, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(yukawa_kernel(3, 1.0, -1.0), DomainError);
}

TEST_CASE("lambda_correction against a brute-force log-grid trapezoid") {
    for (int d : {2, 3})
        for (double r : {0.5, 1.0, 3.0}) {
            const double v = lambda_correction(pp(d, 0.8, 1.0), r);
            const double ref = brute_lambda_correction(d, 0.8, 1.0, r);
            CHECK(std::abs(v - ref) <= 1e-4 * std::abs(ref));
        }
    CHECK(lambda_correction(pp(3, 0.8, 1.0), 1.0) > 0.0);
    const double small = lambda_correction(pp(3, 0.999, 1.0), 1.0);
    CHECK(std::abs(small) <= 1e-2 * std::abs(phi_classical(pp(3, 1.0, 1.0), 1.0).value));
    CHECK(lambda_correction(pp(3, 1.0, 1.0), 1.0) == 0.0);
}

TEST_CASE("lambda_correction decays like r^{-d-2s}") {
    const double s = 0.8, p = 3.0 + 2.0 * s;
    // r^{d+2s} |C(r)| increases towards its limit, so the value at r = 40 bounds it on [2, 20].
    const double bound = std::pow(40.0, p) * std::abs(lambda_correction(pp(3, s, 1.0), 40.0));
    for (double r = 2.0; r <= 20.0; r *= 1.25)
        CHECK(std::pow(r, p) * std::abs(lambda_correction(pp(3, s, 1.0), r)) <= bound);
    // Log-log slope over r in [10, 20] at k = 4 (kr in [40, 80]).
    const double a = std::abs(lambda_correction(pp(3, s, 4.0), 10.0));
    const double b = std::abs(lambda_correction(pp(3, s, 4.0), 20.0));
    CHECK(std::log2(b / a) == doctest::Approx(-p).epsilon(0.02));
}

TEST_CASE("decomposition: imaginary part is the scaled classical one; s -> 1 limit") {
    for (double r : {0.5, 2.0}) {
        const auto p = pp(3, 0.8, 2.0);
        const auto v = phi_fractional_decomp(p, r).value;
        const double f = std::pow(2.0, 0.4) / 0.8;
        CHECK(v.imag() == doctest::Approx(f * phi_classical(p, r).value.imag()).epsilon(1e-15));
    }
    const auto near1 = phi_fractional_decomp(pp(3, 0.999, 1.0), 1.0).value;
    CHECK(rel(near1, phi_classical(pp(3, 1.0, 1.0), 1.0).value) <= 1e-2);
    const auto at1 = phi_fractional_decomp(pp(3, 1.0 - 1e-10, 3.0), 0.7).value;
    CHECK(std::abs(at1.imag() - std::sin(2.1) / (4 * pi * 0.7)) <= 1e-8);
}

TEST_CASE("far-field asymptote prefactor and approach") {
    const auto p = pp(3, 0.8, 2.0);
    CHECK(std::abs(far_field_prefactor(p) - std::pow(2.0, 0.4) / (4 * pi * 0.8)) <= 1e-15);
    for (double r : {0.5, 3.0}) {
        const auto a = phi_far_asymptote(pp(3, 1.0, 1.7), r).value;
        CHECK(std::abs(a - std::polar(1.0 / (4 * pi * r), 1.7 * r)) <= 1e-15);
    }
    double prev = 1e300;
    for (double kr : {10.0, 20.0, 40.0}) {
        const auto q = pp(3, 0.8, 1.0);
        const auto dv = phi_fractional_decomp(q, kr).value;
        const auto av = phi_far_asymptote(q, kr).value;
        const double gap = std::abs(dv - av) / std::abs(av);
        CHECK(gap < prev);
        prev = gap;
    }
    // d=2 phase and magnitude against the Hankel asymptote at s = 1.
    const auto q2 = pp(2, 1.0, 1.0);
    const auto h = helmholtz_closed_form(2, 1.0, 400.0, Branch::outgoing).value;
    CHECK(rel(phi_far_asymptote(q2, 400.0).value, h) <= 1e-3);
}

TEST_CASE("conjugate branches, radiality and scaling homogeneity") {
    for (double r : {0.3, 2.5}) {
        const auto plus = phi_fractional_radial(pp(3, 0.85, 1.5), r).value;
        const auto minus = phi_fractional_radial(pp(3, 0.85, 1.5, Branch::incoming), r).value;
        CHECK(std::abs(minus - std::conj(plus)) <= 1e-15 * std::abs(plus));
        const auto dp = phi_fractional_decomp(pp(2, 0.7, 1.5), r).value;
        const auto dm = phi_fractional_decomp(pp(2, 0.7, 1.5, Branch::incoming), r).value;
        CHECK(std::abs(dm - std::conj(dp)) <= 1e-15 * std::abs(dp));
    }
    const auto p = pp(3, 0.8, 1.0);
    const std::array<double, 3> x{0.3, -1.2, 0.4};
    const std::array<double, 3> y{-1.2, 0.4, 0.3};
    const auto vx = phi_at_point(p, x, GreensMethod::radial_pv).value;
    const auto vy = phi_at_point(p, y, GreensMethod::radial_pv).value;
    CHECK(std::abs(vx - vy) <= 1e-14 * std::abs(vx));

    const double k = 2.7, r = 0.8, s = 0.8;
    const auto lhs = phi_fractional_radial(pp(3, s, k), r).value;
    const auto rhs = std::pow(k, 3 - 2 * s) * phi_fractional_radial(pp(3, s, 1.0), k * r).value;
    CHECK(rel(lhs, rhs) <= 1e-9);
}

TEST_CASE("small-r blowup exponent is 2s - d") {
    for (int d : {2, 3})
        for (double s : {0.6, 0.8}) {
            const auto p = pp(d, s, 1.0);
            const double a = std::abs(phi_fractional_radial(p, 1e-3).value.real());
            const double b = std::abs(phi_fractional_radial(p, 1e-2).value.real());
            const double slope = std::log10(b / a);
            CHECK(std::abs(slope - (2 * s - d)) <= 0.1);
        }
}

TEST_CASE("parameter validation and radial table export") {
    CHECK_THROWS_AS(pp(1, 0.5, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(pp(3, 1.5, 1.0).validate(), ConfigError);
    CHECK_THROWS_AS(pp(3, 0.5, -1.0).validate(), ConfigError);
    CHECK_THROWS_AS(pp(3, 0.7, 1.0).validate_theory(), ConfigError);
    CHECK_THROWS_AS(pp(2, 0.8, 1.0).validate_theory(), ConfigError);
    CHECK_NOTHROW(pp(3, 0.8, 1.0).validate_theory());
    QuadratureSpec q;
    q.pole_window = 0.6;
    CHECK_THROWS_AS(q.validate(), ConfigError);
    CHECK_THROWS_AS(phi_fractional_radial(pp(3, 0.8, 1.0), 0.0), DomainError);

    std::ostringstream os;
    const std::vector<double> radii{0.5, 1.0};
    write_radial_table(os, pp(3, 0.8, 1.0), radii);
    const std::string out = os.str();
    CHECK(out.rfind("r,re,im,est_error,method\n", 0) == 0);
    CHECK(out.find("radial_pv") != std::string::npos);
    CHECK(out.find("decomposition") != std::string::npos);
    int lines = 0;
    for (char c : out)
        lines += c == '\n';
    CHECK(lines == 5);
}
