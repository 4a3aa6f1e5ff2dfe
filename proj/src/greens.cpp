#include "fracscat/greens.hpp"

#include "fracscat/errors.hpp"
#include "fracscat/quadrature.hpp"
#include "fracscat/specfun.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fracscat {

namespace {

constexpr double pi = std::numbers::pi;

std::string num(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

void require_radius(double r, const char* who) {
    if (!(r > 0.0) || !std::isfinite(r))
        throw DomainError(std::string(who) + ": r must be positive and finite, got " + num(r));
}

// t^{2s} - 1 without cancellation near t = 1.
double pole_denominator(double t, double s) { return std::expm1(2.0 * s * std::log(t)); }

// (t - 1) / (t^{2s} - 1) written in u = t - 1.
double pole_ratio(double u, double s) {
    if (u == 0.0)
        return 1.0 / (2.0 * s);
    return u / std::expm1(2.0 * s * std::log1p(u));
}

// Adaptive quadrature over panels no longer than `osc_len` and, when
// `graded` is set, no longer than their left end (geometric growth for long
// power-law ranges). Short panels keep the bisection depth small.
quad::Estimate panel_adaptive(const std::function<double(double)>& f, double a, double b,
                              double osc_len, bool graded, double tol) {
    quad::Estimate out;
    double t = a;
    while (t < b) {
        double len = osc_len;
        if (graded)
            len = std::min(len, std::max(t, 0.05));
        const double next = (b - t) < 1.5 * len ? b : t + len;
        const auto e = quad::adaptive(f, t, next, tol, 10);
        out.value += e.value;
        out.error += e.error;
        t = next;
    }
    return out;
}

struct PvIntegral {
    double value = 0.0;
    double error = 0.0;
};

// PV \int_0^inf t^{d-1} S_d(rho t) / (t^{2s} - 1) dt.
PvIntegral radial_pv_integral(int d, double s, double rho, const QuadratureSpec& q) {
    const double w = q.pole_window;
    const double seg_tol = std::max(1e-10, 0.1 * q.rel_tol);
    auto g = [d, rho](double t) { return std::pow(t, d - 1) * specfun::sphere_kernel(d, rho * t); };

    PvIntegral out;
    auto add = [&out](const quad::Estimate& e) {
        out.value += e.value;
        out.error += e.error;
    };

    const double osc = std::min(2.0 * pi / rho, 0.25);
    add(panel_adaptive([&](double t) { return g(t) / pole_denominator(t, s); }, 0.0, 1.0 - w, osc,
                       false, seg_tol));
    // F(t) = g(t) (t-1)/(t^{2s}-1) is smooth; PV over the window is \int_0^w [F(1+u) - F(1-u)]/u du.
    add(panel_adaptive(
        [&](double u) {
            const double fp = g(1.0 + u) * pole_ratio(u, s);
            const double fm = g(1.0 - u) * pole_ratio(-u, s);
            return (fp - fm) / u;
        },
        0.0, w, osc, false, seg_tol));

    // Half-period panels anchored at the asymptotic zeros of J_{d/2-1}.
    const double nu = 0.5 * d - 1.0;
    const double start = std::max(1.0 + w, q.tail_start);
    const double phase0 = (nu / 2.0 + 0.75) * pi;
    const double m0 = std::max(0.0, std::ceil((start * rho - phase0) / pi));
    auto node = [&](double m) { return (phase0 + m * pi) / rho; };
    const double t0 = node(m0);

    auto f_tail = [&](double t) { return g(t) / pole_denominator(t, s); };
    add(panel_adaptive(f_tail, 1.0 + w, t0, 2.0 * pi / rho, true, seg_tol));

    const int panels = std::max(q.tail_periods, 6);
    std::vector<double> partial;
    partial.reserve(static_cast<std::size_t>(panels));
    double acc = 0.0;
    double panel_err = 0.0;
    for (int m = 0; m < panels; ++m) {
        const auto e = quad::adaptive(f_tail, node(m0 + m), node(m0 + m + 1), seg_tol, 10);
        acc += e.value;
        panel_err += e.error;
        partial.push_back(acc);
    }
    const auto tail = quad::wynn_epsilon(partial);
    out.value += tail.value;
    out.error += tail.error + panel_err;
    return out;
}

cplx branch_conj(cplx z, Branch b) { return b == Branch::outgoing ? z : std::conj(z); }

} // namespace

void ProblemParams::validate() const {
    if (d < 2)
        throw ConfigError("params.d", "dimension must be >= 2, got " + std::to_string(d));
    if (!(s > 0.0 && s <= 1.0))
        throw ConfigError("params.s", "fractional order must lie in (0, 1], got " + num(s));
    if (!(k > 0.0) || !std::isfinite(k))
        throw ConfigError("params.k", "wavenumber must be positive and finite, got " + num(k));
}

void ProblemParams::validate_theory() const {
    validate();
    if (d < 3)
        throw ConfigError("params.d", "forward/inverse theory needs d >= 3, got " + std::to_string(d));
    const double lo = d / (d + 1.0);
    const double hi = std::min(1.0, 0.5 * d);
    if (!(s > lo && s < hi))
        throw ConfigError("params.s", "s must lie in the admissible interval (d/(d+1), min(1, d/2)) = (" +
                                          num(lo) + ", " + num(hi) + "), got " + num(s));
}

void QuadratureSpec::validate() const {
    if (!(pole_window > 0.0 && pole_window < 0.5))
        throw ConfigError("quadrature.pole_window", "must lie in (0, 1/2), got " + num(pole_window));
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw ConfigError("quadrature.tol", "tolerances must be positive");
    if (tail_periods < 6)
        throw ConfigError("quadrature.tail_periods", "need at least 6 panels, got " +
                                                         std::to_string(tail_periods));
    if (!(tail_start >= 0.0))
        throw ConfigError("quadrature.tail_start", "must be nonnegative");
    if (!(lambda_max >= 0.0))
        throw ConfigError("quadrature.lambda_max", "must be nonnegative (0 = automatic)");
    if (!(epsilon_absorption > 0.0))
        throw ConfigError("quadrature.epsilon_absorption", "must be positive");
}

std::string_view to_string(GreensMethod m) {
    switch (m) {
    case GreensMethod::radial_pv: return "radial_pv";
    case GreensMethod::decomposition: return "decomposition";
    case GreensMethod::classical_closed: return "classical_closed";
    case GreensMethod::asymptote: return "asymptote";
    }
    return "unknown";
}

GreensValue helmholtz_closed_form(int d, double k, double r, Branch branch) {
    require_radius(r, "helmholtz_closed_form");
    if (d < 2)
        throw DomainError("helmholtz_closed_form: dimension must be >= 2");
    const double kr = k * r;
    cplx v;
    if (d == 3) {
        v = std::polar(1.0 / (4.0 * pi * r), kr);
    } else {
        const double nu = 0.5 * d - 1.0;
        const cplx h1(specfun::bessel_j(nu, kr), specfun::bessel_y(nu, kr));
        v = cplx(0.0, 0.25) * std::pow(k / (2.0 * pi * r), nu) * h1;
    }
    return {branch_conj(v, branch), GreensMethod::classical_closed, 0.0};
}

GreensValue phi_fractional_radial(const ProblemParams& params, double r, const QuadratureSpec& quad) {
    params.validate();
    quad.validate();
    require_radius(r, "phi_fractional_radial");
    const int d = params.d;
    const double s = params.s;
    const double k = params.k;
    const double rho = k * r;

    const auto pv = radial_pv_integral(d, s, rho, quad);
    const double scale = std::pow(k, d - 2.0 * s) * std::pow(2.0 * pi, -0.5 * d);
    const double im = branch_sign(params.branch) * pi / (2.0 * s) * specfun::sphere_kernel(d, rho);
    const cplx value = scale * cplx(pv.value, im);
    const double err = scale * pv.error;

    const double target = std::max(quad.abs_tol, quad.rel_tol * std::abs(value));
    if (!(err <= 100.0 * target) || !std::isfinite(std::abs(value)))
        throw NonConvergence("greens", "radial principal-value integral did not stabilise at r = " +
                                           num(r), err);
    return {value, GreensMethod::radial_pv, err};
}

GreensValue phi_classical(const ProblemParams& params, double r, const QuadratureSpec& quad) {
    require_radius(r, "phi_classical");
    if (params.d == 3)
        return helmholtz_closed_form(3, params.k, r, params.branch);
    ProblemParams p = params;
    p.s = 1.0;
    return phi_fractional_radial(p, r, quad);
}

double yukawa_kernel(int d, double lambda, double r) {
    if (d < 2)
        throw DomainError("yukawa_kernel: dimension must be >= 2");
    if (!(lambda > 0.0) || !(r > 0.0))
        throw DomainError("yukawa_kernel: lambda and r must be positive");
    const double m = std::sqrt(lambda);
    if (d == 3)
        return std::exp(-m * r) / (4.0 * pi * r);
    const double x = m * r;
    if (x > 700.0)
        return 0.0;
    const double nu = 0.5 * d - 1.0;
    return std::pow(2.0 * pi, -0.5 * d) * std::pow(m / r, nu) * specfun::bessel_k(nu, x);
}

double lambda_correction(const ProblemParams& params, double r, const QuadratureSpec& quad,
                         double* est_error) {
    params.validate();
    quad.validate();
    require_radius(r, "lambda_correction");
    if (est_error)
        *est_error = 0.0;
    const double s = params.s;
    if (s == 1.0)
        return 0.0;
    const int d = params.d;
    const double k = params.k;
    const double c = std::cos(s * pi);
    const double pref = std::sin(s * pi) / pi;
    const double amp = 2.0 * std::pow(k, 2.0 - 2.0 * s);

    // lambda = k^2 tau^2.
    auto f = [&](double tau) {
        if (tau <= 0.0)
            return 0.0;
        const double t2s = std::pow(tau, 2.0 * s);
        const double den = t2s * t2s - 2.0 * c * t2s + 1.0;
        return amp * tau * t2s * yukawa_kernel(d, k * k * tau * tau, r) / den;
    };

    const double kr = k * r;
    // Automatic truncation where e^{-k r tau} has dropped below e^{-60}.
    const double tau_hi = quad.lambda_max > 0.0 ? std::sqrt(quad.lambda_max) / k : 60.0 / kr;
    const double tau_a = 0.5 * std::min({1.0, 1.0 / kr, tau_hi});
    const double tol = std::max(1e-10, 0.1 * quad.rel_tol);

    const auto e1 = quad::adaptive(f, 0.0, tau_a, tol);
    const auto e2 = quad::adaptive(
        [&](double v) {
            const double tau = std::exp(v);
            return f(tau) * tau;
        },
        std::log(tau_a), std::log(tau_hi), tol);

    // Past tau_hi the integrand is bounded by f(tau_hi) (tau/tau_hi)^a e^{-kr (tau - tau_hi)}.
    const double a = std::max(0.0, 0.5 * d - 0.5 - 2.0 * s);
    const double rate = kr - a / tau_hi;
    const double tail = rate > 0.0 ? f(tau_hi) / rate : f(tau_hi) * tau_hi;
    const double value = pref * (e1.value + e2.value);
    if (pref * tail > std::max(quad.abs_tol, quad.rel_tol * std::abs(value)))
        throw NonConvergence("greens", "lambda-integral tail above tolerance at r = " + num(r),
                             pref * tail);

    if (est_error)
        *est_error = pref * (e1.error + e2.error + tail);
    return value;
}

GreensValue phi_fractional_decomp(const ProblemParams& params, double r, const QuadratureSpec& quad) {
    params.validate();
    require_radius(r, "phi_fractional_decomp");
    const double s = params.s;
    const auto cl = helmholtz_closed_form(params.d, params.k, r, params.branch);
    double err = 0.0;
    const double corr = lambda_correction(params, r, quad, &err);
    const double factor = std::pow(params.k, 2.0 * (1.0 - s)) / s;
    return {factor * cl.value + corr, GreensMethod::decomposition, err};
}

cplx far_field_prefactor(const ProblemParams& params) {
    const int d = params.d;
    const double s = params.s;
    const double k = params.k;
    const double mag = std::pow(k, 2.0 * (1.0 - s)) / s * std::pow(k, 0.5 * (d - 3)) /
                       (std::pow(2.0, 0.5 * (d + 1)) * std::pow(pi, 0.5 * (d - 1)));
    return std::polar(mag, -pi * (d - 3) / 4.0);
}

GreensValue phi_far_asymptote(const ProblemParams& params, double r) {
    params.validate();
    require_radius(r, "phi_far_asymptote");
    cplx v = far_field_prefactor(params) * std::polar(std::pow(r, -0.5 * (params.d - 1)), params.k * r);
    if (params.branch == Branch::incoming)
        v = std::conj(v);
    return {v, GreensMethod::asymptote, 0.0};
}

GreensValue phi_at_point(const ProblemParams& params, std::span<const double> x, GreensMethod route,
                         const QuadratureSpec& quad) {
    if (static_cast<int>(x.size()) != params.d)
        throw DomainError("phi_at_point: point has " + std::to_string(x.size()) +
                          " coordinates, expected " + std::to_string(params.d));
    double r2 = 0.0;
    for (double xi : x)
        r2 += xi * xi;
    const double r = std::sqrt(r2);
    switch (route) {
    case GreensMethod::radial_pv: return phi_fractional_radial(params, r, quad);
    case GreensMethod::decomposition: return phi_fractional_decomp(params, r, quad);
    case GreensMethod::classical_closed: return phi_classical(params, r, quad);
    case GreensMethod::asymptote: return phi_far_asymptote(params, r);
    }
    throw DomainError("phi_at_point: unknown route");
}

void write_radial_table(std::ostream& os, const ProblemParams& params, std::span<const double> radii,
                        const QuadratureSpec& quad) {
    os << "r,re,im,est_error,method\n";
    char line[160];
    for (double r : radii) {
        for (const auto& g : {phi_fractional_radial(params, r, quad), phi_fractional_decomp(params, r, quad)}) {
            std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,", r, g.value.real(),
                          g.value.imag(), g.est_error);
            os << line << to_string(g.method) << '\n';
        }
    }
}

} // namespace fracscat
