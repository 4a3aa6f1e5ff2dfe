#include "fracscat/spectral.hpp"

#include "fracscat/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace fracscat {

namespace {

constexpr double pi = std::numbers::pi;

double l2(std::span<const cplx> v) {
    double acc = 0.0;
    for (const auto& z : v)
        acc += std::norm(z);
    return std::sqrt(acc);
}

} // namespace

// ---------------------------------------------------------------------------
// PeriodicGrid

void PeriodicGrid::validate() const {
    if (d < 1)
        throw ConfigError("grid.d", "dimension must be at least 1");
    if (n < 2 || n % 2 != 0)
        throw ConfigError("grid.n", "points per axis must be even and at least 2, got " + std::to_string(n));
    if (!(L > 0.0) || !std::isfinite(L))
        throw ConfigError("grid.L", "side length must be positive");
}

std::size_t PeriodicGrid::size() const {
    std::size_t t = 1;
    for (int a = 0; a < d; ++a)
        t *= static_cast<std::size_t>(n);
    return t;
}

void PeriodicGrid::point(std::size_t idx, double* x) const {
    const double h = spacing();
    const double shift = cell_centered ? 0.5 : 0.0;
    for (int a = d - 1; a >= 0; --a) {
        x[a] = -0.5 * L + h * (static_cast<double>(idx % static_cast<std::size_t>(n)) + shift);
        idx /= static_cast<std::size_t>(n);
    }
}

void PeriodicGrid::frequency(std::size_t idx, double* xi) const {
    const double dk = 2.0 * pi / L;
    for (int a = d - 1; a >= 0; --a) {
        const auto m = static_cast<int>(idx % static_cast<std::size_t>(n));
        xi[a] = dk * (m < n / 2 ? m : m - n);
        idx /= static_cast<std::size_t>(n);
    }
}

double PeriodicGrid::frequency_norm(std::size_t idx) const {
    const double dk = 2.0 * pi / L;
    double acc = 0.0;
    for (int a = 0; a < d; ++a) {
        const auto m = static_cast<int>(idx % static_cast<std::size_t>(n));
        const double v = dk * (m < n / 2 ? m : m - n);
        acc += v * v;
        idx /= static_cast<std::size_t>(n);
    }
    return std::sqrt(acc);
}

std::vector<double> PeriodicGrid::points() const {
    const auto ud = static_cast<std::size_t>(d);
    std::vector<double> out(size() * ud);
    for (std::size_t i = 0; i < size(); ++i)
        point(i, out.data() + i * ud);
    return out;
}

double PeriodicGrid::shell_distance(double k) const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
        best = std::min(best, std::abs(frequency_norm(i) - k));
    return best;
}

// ---------------------------------------------------------------------------
// Symbols

std::string_view to_string(SymbolKind k) {
    switch (k) {
    case SymbolKind::riesz_s:
        return "riesz_s";
    case SymbolKind::riesz_2s:
        return "riesz_2s";
    case SymbolKind::helmholtz_resolvent:
        return "helmholtz_resolvent";
    case SymbolKind::frac_resolvent:
        return "frac_resolvent";
    case SymbolKind::bridge:
        return "bridge";
    case SymbolKind::shell_cutoff:
        return "shell_cutoff";
    }
    return "unknown";
}

double multiplier_value(double xi_norm, double s, double k) {
    if (!(xi_norm >= 0.0) || !(k > 0.0) || !(s > 0.0 && s < 1.0))
        throw DomainError("multiplier_value: need |xi| >= 0, k > 0 and s in (0, 1)");
    const double base = std::pow(k, 2.0 * s - 2.0);
    const double x = xi_norm / k;
    if (std::abs(x - 1.0) < 1e-8)
        return s * base;
    if (x == 0.0)
        return base;
    // (x^{2s} - 1) / (x^2 - 1) without cancellation near x = 1.
    const double lx = std::log(x);
    return base * std::expm1(2.0 * s * lx) / std::expm1(2.0 * lx);
}

double cutoff_profile(int j, double r) {
    if (!(r > 0.0))
        return 0.0;
    const double t = std::log2(r);
    const double jj = j;
    if (t <= -jj - 1.0 || t >= jj + 1.0)
        return 0.0;
    if (t < -jj)
        return smooth_step(t + jj + 1.0);
    if (t > jj)
        return 1.0 - smooth_step(t - jj);
    return 1.0;
}

cplx SymbolSpec::value(double xi) const {
    const cplx i{0.0, 1.0};
    switch (kind) {
    case SymbolKind::riesz_s:
        return xi == 0.0 ? 0.0 : std::pow(xi, s);
    case SymbolKind::riesz_2s:
        return xi == 0.0 ? 0.0 : std::pow(xi, 2.0 * s);
    case SymbolKind::helmholtz_resolvent: {
        if (epsilon == 0.0 && std::abs(xi - k) < 1e-12 * std::max(1.0, k))
            throw ShellHit("spectral", "lattice frequency on the shell |xi| = k with epsilon = 0");
        return 1.0 / (xi * xi - k * k - i * epsilon);
    }
    case SymbolKind::frac_resolvent: {
        if (epsilon == 0.0 && std::abs(xi - k) < 1e-12 * std::max(1.0, k))
            throw ShellHit("spectral", "lattice frequency on the shell |xi| = k with epsilon = 0");
        const double a = xi == 0.0 ? 0.0 : std::pow(xi, 2.0 * s);
        return 1.0 / (a - std::pow(k, 2.0 * s) - i * epsilon);
    }
    case SymbolKind::bridge:
        return multiplier_value(xi, s, k);
    case SymbolKind::shell_cutoff:
        return cutoff_profile(j, xi);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Transforms

PeriodicTransform::PeriodicTransform(const PeriodicGrid& grid)
    : grid_(grid), plan_((grid.validate(), grid.shape())),
      scale_(1.0 / std::sqrt(static_cast<double>(grid.size()))) {}

void PeriodicTransform::forward(std::span<cplx> data) const {
    plan_.forward(data);
    for (auto& v : data)
        v *= scale_;
}

void PeriodicTransform::inverse(std::span<cplx> data) const {
    plan_.inverse(data);
    for (auto& v : data)
        v *= scale_;
}

std::vector<cplx> apply_multiplier(const PeriodicGrid& grid, std::span<const cplx> f,
                                   const std::function<cplx(std::span<const double>)>& m) {
    if (f.size() != grid.size())
        throw DomainError("apply_multiplier: field size does not match the grid");
    const PeriodicTransform T(grid);
    std::vector<cplx> buf(f.begin(), f.end());
    T.forward(buf);
    std::vector<double> xi(static_cast<std::size_t>(grid.d));
    for (std::size_t i = 0; i < buf.size(); ++i) {
        grid.frequency(i, xi.data());
        buf[i] *= m(xi);
    }
    T.inverse(buf);
    return buf;
}

std::vector<cplx> apply_symbol(const PeriodicGrid& grid, std::span<const cplx> f, const SymbolSpec& sym) {
    if (f.size() != grid.size())
        throw DomainError("apply_symbol: field size does not match the grid");
    const PeriodicTransform T(grid);
    std::vector<cplx> buf(f.begin(), f.end());
    T.forward(buf);
    for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] *= sym.value(grid.frequency_norm(i));
    T.inverse(buf);
    return buf;
}

// ---------------------------------------------------------------------------
// Appendix constructions

ConstructedSolution construct_solution(const PeriodicGrid& grid, std::span<const cplx> f, double s, double k,
                                       SolutionRoute route, double epsilon) {
    if (f.size() != grid.size())
        throw DomainError("construct_solution: field size does not match the grid");
    if (!(s > 0.0 && s < 1.0) || !(k > 0.0))
        throw DomainError("construct_solution: need s in (0, 1) and k > 0");
    if (route == SolutionRoute::half_s && std::abs(s - 0.5) > 1e-15)
        throw DomainError("construct_solution: the half_s route requires s = 1/2");
    ConstructedSolution out;
    if (epsilon < 0.0)
        epsilon = grid.shell_distance(k) > 1e-12 * std::max(1.0, k) ? 0.0 : 1e-6 * k * k;
    out.epsilon = epsilon;

    const PeriodicTransform T(grid);
    std::vector<cplx> fh(f.begin(), f.end());
    T.forward(fh);
    std::vector<cplx> uh(fh.size());
    if (route == SolutionRoute::general) {
        const SymbolSpec R{SymbolKind::frac_resolvent, s, k, epsilon, 1};
        for (std::size_t i = 0; i < fh.size(); ++i)
            uh[i] = R.value(grid.frequency_norm(i)) * fh[i];
    } else {
        // Matching absorption at the shell: |xi|^2 - k^2 ~ 2k (|xi| - k).
        const SymbolSpec H{SymbolKind::helmholtz_resolvent, s, k, 2.0 * k * epsilon, 1};
        for (std::size_t i = 0; i < fh.size(); ++i) {
            const double xi = grid.frequency_norm(i);
            const cplx wh = H.value(xi) * fh[i];
            uh[i] = (xi + k) * wh;
        }
    }
    // Residual of ((-Delta)^s - k^{2s}) u - f, evaluated in frequency space (unitary).
    const double k2s = std::pow(k, 2.0 * s);
    std::vector<cplx> res(fh.size());
    for (std::size_t i = 0; i < fh.size(); ++i) {
        const double xi = grid.frequency_norm(i);
        const double sym = xi == 0.0 ? 0.0 : std::pow(xi, 2.0 * s);
        res[i] = (sym - k2s) * uh[i] - fh[i];
    }
    const double fn = l2(fh);
    out.residual = fn > 0.0 ? l2(res) / fn : l2(res);
    T.inverse(uh);
    out.u = std::move(uh);
    return out;
}

ProjectionReport restricted_projection(const PeriodicGrid& grid, std::span<const cplx> f, int j) {
    if (f.size() != grid.size())
        throw DomainError("restricted_projection: field size does not match the grid");
    if (j < 1)
        throw DomainError("restricted_projection: j must be a positive integer");
    const PeriodicTransform T(grid);
    const std::size_t N = grid.size();
    const auto ud = static_cast<std::size_t>(grid.d);
    std::vector<double> chi_x(N), chi_xi(N), x(ud);
    for (std::size_t i = 0; i < N; ++i) {
        grid.point(i, x.data());
        double r2 = 0.0;
        for (double v : x)
            r2 += v * v;
        chi_x[i] = cutoff_profile(j, std::sqrt(r2));
        chi_xi[i] = cutoff_profile(j, grid.frequency_norm(i));
    }
    std::vector<cplx> fh(f.begin(), f.end()), g(N), rest(N);
    T.forward(fh);
    for (std::size_t i = 0; i < N; ++i) {
        g[i] = chi_x[i] * f[i];
        rest[i] = (1.0 - chi_x[i]) * f[i];
    }
    ProjectionReport rep;
    rep.space_tail = l2(rest);
    T.forward(g);    // F(chi f)
    T.forward(rest); // F((1 - chi) f)
    std::vector<cplx> diff(N), tmp(N);
    for (std::size_t i = 0; i < N; ++i) {
        diff[i] = chi_xi[i] * g[i] - fh[i];
        tmp[i] = (1.0 - chi_xi[i]) * g[i];
    }
    rep.error = l2(diff);
    rep.chain_split = l2(tmp) + rep.space_tail;
    for (std::size_t i = 0; i < N; ++i) {
        tmp[i] = (1.0 - chi_xi[i]) * rest[i];
        diff[i] = (1.0 - chi_xi[i]) * fh[i];
    }
    rep.frequency_tail = l2(diff);
    rep.chain_expand = l2(tmp) + rep.frequency_tail + rep.space_tail;
    rep.bound = 2.0 * rep.space_tail + rep.frequency_tail;
    for (std::size_t i = 0; i < N; ++i)
        g[i] *= chi_xi[i];
    T.inverse(g);
    rep.f_j = std::move(g);
    return rep;
}

// ---------------------------------------------------------------------------
// Resolvent scan

double lp_norm(std::span<const cplx> f, double p, double cell_volume) {
    double m = 0.0;
    for (const auto& z : f)
        m = std::max(m, std::abs(z));
    if (m == 0.0)
        return 0.0;
    double acc = 0.0;
    for (const auto& z : f)
        acc += std::pow(std::abs(z) / m, p);
    return m * std::pow(acc * cell_volume, 1.0 / p);
}

namespace {

double fit_slope(const std::vector<ScanPoint>& pts, std::size_t count) {
    if (count < 2)
        return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < count; ++i) {
        if (!(pts[i].lower_bound > 0.0))
            continue;
        const double x = std::log(pts[i].lambda), y = std::log(pts[i].lower_bound);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2)
        return 0.0;
    const double mm = static_cast<double>(m);
    return (mm * sxy - sx * sy) / (mm * sxx - sx * sx);
}

// |v|^{e-2} v, the norming direction for the dual exponent.
void dual_map(std::vector<cplx>& v, double e) {
    double m = 0.0;
    for (const auto& z : v)
        m = std::max(m, std::abs(z));
    if (m == 0.0)
        return;
    for (auto& z : v) {
        const double a = std::abs(z) / m;
        z = a > 0.0 ? (z / m) * std::pow(a, e - 2.0) : cplx{};
    }
}

} // namespace

ScanResult resolvent_norm_scan(double s, double p, double q, std::span<const double> lambdas, double epsilon,
                               const PeriodicGrid& grid, int trials, std::uint64_t seed, int ascent_steps) {
    grid.validate();
    if (!(p > 1.0 && q > p))
        throw DomainError("resolvent_norm_scan: need 1 < p < q");
    if (!(epsilon > 0.0))
        throw DomainError("resolvent_norm_scan: epsilon must be positive");
    if (trials < 1)
        throw DomainError("resolvent_norm_scan: need at least one trial");
    const std::size_t N = grid.size();
    const double vol = std::pow(grid.spacing(), grid.d);
    const double pd = p / (p - 1.0);
    const PeriodicTransform T(grid);
    std::vector<double> xin(N);
    for (std::size_t i = 0; i < N; ++i)
        xin[i] = grid.frequency_norm(i);
    ScanResult res;
    const double nyquist = pi / grid.spacing();
    for (double lambda : lambdas) {
        if (!(lambda > 0.0))
            throw DomainError("resolvent_norm_scan: lambda must be positive");
        const double shell = std::pow(lambda, 0.5 / s);
        const double band = std::min(2.0 * shell, nyquist);
        std::vector<cplx> sym(N), symc(N);
        for (std::size_t i = 0; i < N; ++i) {
            const double a = xin[i] == 0.0 ? 0.0 : std::pow(xin[i], 2.0 * s);
            sym[i] = 1.0 / (a - lambda - cplx{0.0, epsilon * lambda});
            symc[i] = std::conj(sym[i]);
        }
        auto applyR = [&](std::vector<cplx>& v, const std::vector<cplx>& m) {
            T.forward(v);
            for (std::size_t i = 0; i < N; ++i)
                v[i] *= m[i];
            T.inverse(v);
        };
        std::vector<double> best(static_cast<std::size_t>(trials), 0.0);
#pragma omp parallel for schedule(dynamic, 1)
        for (int t = 0; t < trials; ++t) {
            std::mt19937_64 rng(seed + 1000003ULL * static_cast<std::uint64_t>(t) +
                                static_cast<std::uint64_t>(std::llround(lambda * 1e6)));
            std::normal_distribution<double> nd;
            std::vector<cplx> g(N);
            for (std::size_t i = 0; i < N; ++i)
                g[i] = xin[i] <= band ? cplx{nd(rng), nd(rng)} : cplx{};
            T.inverse(g);
            double top = 0.0;
            for (int it = 0; it <= ascent_steps; ++it) {
                const double gp = lp_norm(g, p, vol);
                if (!(gp > 0.0))
                    break;
                std::vector<cplx> u = g;
                applyR(u, sym);
                const double uq = lp_norm(u, q, vol);
                top = std::max(top, uq / gp);
                if (it == ascent_steps)
                    break;
                dual_map(u, q);
                applyR(u, symc);
                dual_map(u, pd);
                g = std::move(u);
            }
            best[static_cast<std::size_t>(t)] = top;
        }
        ScanPoint pt;
        pt.lambda = lambda;
        pt.trials = 0;
        for (double b : best)
            if (b > 0.0) {
                pt.lower_bound = std::max(pt.lower_bound, b);
                ++pt.trials;
            }
        res.points.push_back(pt);
        res.points.back().slope_partial = fit_slope(res.points, res.points.size());
    }
    res.slope = fit_slope(res.points, res.points.size());
    return res;
}

} // namespace fracscat
