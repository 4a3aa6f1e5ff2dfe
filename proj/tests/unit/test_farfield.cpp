#include "fracscat/born.hpp"
#include "fracscat/errors.hpp"
#include "fracscat/farfield.hpp"
#include "fracscat/forward.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace fracscat;
using std::numbers::pi;

namespace {

PotentialGrid bump(int d, double k, double amp, double a) {
    const double h = std::min(2.0 * pi / k / 10.0, a / 5.0);
    const int n = static_cast<int>(std::ceil(2.0 * a / h)) + 3;
    return PotentialGrid::centered(d, n, h, smooth_bump(amp, a));
}

// Direct Born integral h^d sum_j V_j e^{-i xi.y_j}, written without library helpers.
cplx born_integral(const PotentialGrid& V, std::span<const double> xi) {
    cplx acc{};
    std::vector<double> y(static_cast<std::size_t>(V.d));
    for (std::size_t j = 0; j < V.size(); ++j) {
        V.point(j, y.data());
        double ph = 0.0;
        for (int a = 0; a < V.d; ++a)
            ph += xi[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(a)];
        acc += V.samples[j] * cplx(std::cos(ph), -std::sin(ph));
    }
    return acc * std::pow(V.h, V.d);
}

SolveResult solve_plane(const PotentialGrid& V, const ProblemParams& p, std::vector<double> th, double eval = 0.0) {
    const LSOperator op(V, p, {}, eval);
    return solve_total_field(op, incident_field(p, IncidentSource::plane(std::move(th)), V));
}

} // namespace

TEST_CASE("direction sets are unit vectors with sphere-measure weights") {
    for (int d : {2, 3}) {
        const int n = 37;
        const auto dirs = direction_set(d, n);
        REQUIRE(dirs.size() == static_cast<std::size_t>(n * d));
        for (int i = 0; i < n; ++i) {
            double nn = 0.0;
            for (int a = 0; a < d; ++a)
                nn += dirs[static_cast<std::size_t>(i * d + a)] * dirs[static_cast<std::size_t>(i * d + a)];
            CHECK(std::abs(nn - 1.0) <= 1e-14);
        }
        const auto w = direction_weights(d, n);
        double sum = 0.0;
        for (double x : w)
            sum += x;
        CHECK(sum == doctest::Approx(d == 2 ? 2 * pi : 4 * pi).epsilon(1e-14));
    }
}

TEST_CASE("V = 0 gives zero amplitudes and zero symmetry discrepancy") {
    const ProblemParams p{2, 0.8, 2.0};
    const auto V = PotentialGrid::centered(2, 9, 0.2, [](std::span<const double>) { return 0.0; });
    const auto uin = incident_field(p, IncidentSource::plane({1.0, 0.0}), V);
    const auto xh = direction_set(2, 8);
    for (const cplx& a : far_field_amplitude(V, uin, p, xh))
        CHECK(a == cplx(0.0));
    const std::vector<double> th{1.0, 0.0, -1.0, 0.0};
    const std::vector<double> xs{0.0, 1.0, 0.0, -1.0};
    const auto ff = synthesize_pairs(V, p, th, xs);
    CHECK(symmetry_check(ff) == 0.0);
}

TEST_CASE("Born regime: amplitude / tau tends to the Fourier integral at k(xhat - theta)") {
    const ProblemParams p{2, 0.8, 3.0};
    auto V = bump(2, 3.0, 1.0, 1.0);
    const double tau = 1e-6;
    for (double& v : V.samples)
        v *= tau;
    const std::vector<double> th{0.6, 0.8};
    const auto sol = solve_plane(V, p, th);
    const auto xh = direction_set(2, 12, 0.1);
    const auto amps = far_field_amplitude(V, sol.total, p, xh);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const std::vector<double> xi{3.0 * (xh[2 * i] - th[0]), 3.0 * (xh[2 * i + 1] - th[1])};
        const cplx ref = born_integral(V, xi);
        CHECK(std::abs(amps[i] - ref) <= 1e-5 * std::abs(ref) + 1e-20);
    }
}

TEST_CASE("Born regime depends on xhat - theta only") {
    const double k = 2.5;
    const ProblemParams p{2, 0.8, k};
    auto V = bump(2, k, 1.0, 1.0);
    for (double& v : V.samples)
        v *= 1e-6;
    // Two (xhat, theta) pairs sharing the difference delta = (0.8, 0.3).
    const double dx = 0.8, dy = 0.3, half = 0.5 * std::hypot(dx, dy), t = std::sqrt(1.0 - half * half);
    const double nx = -dy / (2 * half), ny = dx / (2 * half);
    std::vector<cplx> a;
    for (double sgn : {1.0, -1.0}) {
        const std::vector<double> xh{dx / 2 + sgn * t * nx, dy / 2 + sgn * t * ny};
        const std::vector<double> th{-dx / 2 + sgn * t * nx, -dy / 2 + sgn * t * ny};
        a.push_back(far_field_amplitude(V, solve_plane(V, p, th).total, p, xh)[0]);
    }
    CHECK(std::abs(a[0] - a[1]) <= 1e-5 * std::abs(a[0]));
}

TEST_CASE("amplitude is linear in V u and the cell-average weights add the sinc factor") {
    const ProblemParams p{2, 0.8, 2.0};
    const auto V = bump(2, 2.0, 0.3, 1.0);
    const auto sol = solve_plane(V, p, {1.0, 0.0});
    const auto xh = direction_set(2, 6);
    const auto a = far_field_amplitude(V, sol.total, p, xh);
    ComplexField twice = sol.total;
    for (auto& v : twice.values)
        v *= cplx(0.0, 2.0);
    const auto b = far_field_amplitude(V, twice, p, xh);
    const auto c = far_field_amplitude(V, sol.total, p, xh, AmplitudeWeights::cell_average);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(b[i] - cplx(0.0, 2.0) * a[i]) <= 1e-14 * std::abs(a[i]));
        double f = 1.0;
        for (int ax = 0; ax < 2; ++ax) {
            const double x = 0.5 * p.k * xh[2 * i + static_cast<std::size_t>(ax)] * V.h;
            f *= x == 0.0 ? 1.0 : std::sin(x) / x;
        }
        CHECK(std::abs(c[i] - f * a[i]) <= 1e-14 * std::abs(a[i]));
    }
}

TEST_CASE("Herglotz amplitude is the quadrature combination of plane-wave amplitudes") {
    const ProblemParams p{2, 0.8, 2.0};
    const auto V = bump(2, 2.0, 0.3, 1.0);
    const int m = 6;
    const auto nodes = direction_set(2, m, 0.2);
    const auto w = direction_weights(2, m);
    std::vector<cplx> g(m);
    for (int i = 0; i < m; ++i)
        g[static_cast<std::size_t>(i)] = std::polar(1.0 + 0.1 * i, 0.3 * i);
    const auto xh = direction_set(2, 5);

    const LSOperator op(V, p);
    const LSSolver solver(op);
    std::vector<std::vector<cplx>> amps;
    for (int i = 0; i < m; ++i) {
        const std::vector<double> th(nodes.begin() + 2 * i, nodes.begin() + 2 * i + 2);
        amps.push_back(far_field_amplitude(V, solver.solve(incident_field(p, IncidentSource::plane(th), V)).total, p, xh));
    }
    const auto combined = herglotz_amplitude(amps, g, w);

    IncidentSource src;
    src.herglotz = true;
    src.nodes = nodes;
    src.density = g;
    src.weights = w;
    const auto direct = far_field_amplitude(V, solver.solve(incident_field(p, src, V)).total, p, xh);
    for (std::size_t i = 0; i < direct.size(); ++i)
        CHECK(std::abs(direct[i] - combined[i]) <= 1e-12 * std::abs(direct[i]));

    // Single node with unit weight reproduces the plane-wave amplitude.
    const auto single = herglotz_amplitude({amps[2]}, std::vector<cplx>{cplx(1.0)}, std::vector<double>{1.0});
    for (std::size_t i = 0; i < single.size(); ++i)
        CHECK(single[i] == amps[2][i]);
}

TEST_CASE("prefactor at d = 3 is k^{2(1-s)} / (4 pi s); s = 1 gives the classical 1/(4 pi)") {
    for (double s : {0.6, 0.8, 1.0})
        for (double k : {0.5, 2.0}) {
            const cplx P = far_field_prefactor(ProblemParams{3, s, k});
            CHECK(std::abs(P - std::pow(k, 2 * (1 - s)) / (4 * pi * s)) <= 1e-15);
        }
    CHECK(std::abs(far_field_prefactor(ProblemParams{3, 1.0, 3.0}) - 1.0 / (4 * pi)) <= 1e-16);
    // d = 2, s = 1: sqrt-type prefactor e^{i pi/4} / sqrt(8 pi k) of the Hankel asymptote.
    const double k = 2.0;
    const cplx P2 = far_field_prefactor(ProblemParams{2, 1.0, k});
    CHECK(std::abs(P2 - std::polar(1.0 / std::sqrt(8 * pi * k), pi / 4)) <= 1e-15);
}

TEST_CASE("asymptotic match improves as R doubles (d = 3, s = 0.8) and at s = 1") {
    for (double s : {0.8, 1.0}) {
        const double k = 1.0;
        const ProblemParams p{3, s, k};
        const auto V = bump(3, k, 0.2, 0.8);
        const LSOperator op(V, p, {}, 45.0);
        const auto sol = solve_total_field(op, incident_field(p, IncidentSource::plane({0.0, 0.0, 1.0}), V));
        const auto xh = direction_set(3, 6);
        const auto amps = far_field_amplitude(V, sol.total, p, xh);
        std::vector<double> worst;
        for (double R : {10.0, 20.0, 40.0}) {
            std::vector<double> pts(xh.size());
            for (std::size_t i = 0; i < xh.size(); ++i)
                pts[i] = R * xh[i];
            const auto m = asymptotic_match(p, evaluate_scattered_at(op, sol.total, pts), amps);
            worst.push_back(*std::max_element(m.error.begin(), m.error.end()));
        }
        MESSAGE("s = " << s << ": " << worst[0] << ", " << worst[1] << ", " << worst[2]);
        CHECK(worst[1] < worst[0]);
        CHECK(worst[2] < worst[1]);
        CHECK(worst[2] <= 0.1);
    }
}

TEST_CASE("asymptotic match rejects radii below 10/k") {
    const ProblemParams p{3, 0.8, 1.0};
    ComplexField f;
    f.d = 3;
    f.points = {5.0, 0.0, 0.0};
    f.values = {cplx(1.0)};
    const std::vector<cplx> amps{cplx(1.0)};
    CHECK_THROWS_AS(asymptotic_match(p, f, amps), DomainError);
}

TEST_CASE("symmetry check: Born integrals, small-potential solves and missing pairs") {
    const double k = 1.5;
    const ProblemParams p{3, 0.8, k};
    const auto V = bump(3, k, 0.02, 0.8);
    CHECK(neumann_margin(LSOperator(V, p)) <= 0.1);

    std::vector<double> th, xs;
    const auto dirs = direction_set(3, 5);
    for (int i = 0; i < 5; ++i) {
        const int j = (i + 2) % 5;
        for (int sg : {1, -1}) {
            for (int a = 0; a < 3; ++a)
                th.push_back(sg * dirs[static_cast<std::size_t>(3 * i + a)]);
            for (int a = 0; a < 3; ++a)
                xs.push_back(sg * dirs[static_cast<std::size_t>(3 * j + a)]);
        }
    }
    const auto ff = synthesize_pairs(V, p, th, xs);
    ff.validate();
    double scale = 0.0;
    for (const auto& r : ff.records)
        scale = std::max(scale, std::abs(r.amp));
    const double disc = symmetry_check(ff);
    MESSAGE("symmetry discrepancy " << disc << " against max amplitude " << scale);
    CHECK(disc <= 1e-3 * scale);

    // Born integrals at (xhat, theta) and (-xhat, -theta) are complex conjugates for real V;
    // the bump is even, so they are also equal.
    for (std::size_t r = 0; r < ff.records.size(); r += 2) {
        std::vector<double> xi(3), mxi(3);
        for (int a = 0; a < 3; ++a) {
            xi[a] = k * (ff.records[r].xhat[a] - ff.records[r].theta[a]);
            mxi[a] = -xi[a];
        }
        const cplx b1 = born_integral(V, xi), b2 = born_integral(V, mxi);
        CHECK(std::abs(b1 - std::conj(b2)) <= 1e-14 * std::abs(b1) + 1e-18);
        CHECK(std::abs(b1 - b2) <= 1e-10 * std::abs(b1) + 1e-18);
    }

    FarFieldSet lone;
    lone.meta.d = 3;
    lone.records.push_back(ff.records[0]);
    CHECK_THROWS_AS(symmetry_check(lone), DomainError);
}

TEST_CASE("validate rejects duplicate keys and non-finite amplitudes") {
    FarFieldSet ff;
    ff.meta.d = 2;
    FarFieldRecord r{1.0, {1.0, 0.0}, {0.0, 1.0}, cplx(0.5, 0.1)};
    ff.records = {r, r};
    CHECK_THROWS_AS(ff.validate(), FormatError);
    ff.records = {r};
    ff.records[0].amp = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(ff.validate(), FormatError);
    ff.records[0].amp = cplx(1.0);
    ff.records[0].xhat = {2.0, 0.0};
    CHECK_THROWS_AS(ff.validate(), DomainError);
}
