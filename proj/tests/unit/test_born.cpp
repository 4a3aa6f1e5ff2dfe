#include "fracscat/born.hpp"
#include "fracscat/errors.hpp"
#include "fracscat/fft.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace fracscat;
using std::numbers::pi;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double relative_l2(const PotentialGrid& est, const PotentialGrid& ref) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        num += (est.samples[i] - ref.samples[i]) * (est.samples[i] - ref.samples[i]);
        den += ref.samples[i] * ref.samples[i];
    }
    return std::sqrt(num / den);
}

// Exact samples h^d sum_j V_j e^{-i xi.y_j} at every node of the target's DFT lattice.
std::vector<FourierSample> lattice_samples(const PotentialGrid& V, const TargetGrid& t) {
    std::vector<FourierSample> out;
    const int n0 = t.shape[0], n1 = t.shape[1];
    const double d0 = 2 * pi / (n0 * t.h), d1 = 2 * pi / (n1 * t.h);
    for (int a = -n0 / 2; a < n0 / 2; ++a)
        for (int b = -n1 / 2; b < n1 / 2; ++b) {
            const std::vector<double> xi{a * d0, b * d1};
            cplx acc{};
            std::vector<double> y(2);
            for (std::size_t j = 0; j < V.size(); ++j) {
                V.point(j, y.data());
                acc += V.samples[j] * std::polar(1.0, -dot(xi, y));
            }
            out.push_back({xi, acc * t.h * t.h, 0.0});
        }
    return out;
}

PotentialGrid random_on_target(const TargetGrid& t, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return PotentialGrid::sample(2, t.origin, t.h, t.shape, [&](std::span<const double>) { return u(rng); });
}

} // namespace

TEST_CASE("exponents at d = 3, s = 0.8") {
    const auto e = pick_exponents(3, 0.8);
    // 1/q = (3 - 1.52)/6; 1/p = (max(0.5 + 1/q, 2/3) + 1.6/3 + 1/q) / 2.
    const double iq = (3.0 - 1.9 * 0.8) / 6.0;
    const double ip = 0.5 * (std::max(0.5 + iq, 2.0 / 3.0) + 1.6 / 3.0 + iq);
    CHECK(e.inv_q() == doctest::Approx(iq).epsilon(1e-14));
    CHECK(e.inv_p() == doctest::Approx(ip).epsilon(1e-14));
    CHECK(e.inv_q() == doctest::Approx(0.246667).epsilon(1e-5));
    CHECK(e.inv_p() == doctest::Approx(0.763333).epsilon(1e-5));
    CHECK(e.decay == doctest::Approx(-0.05).epsilon(1e-10));
    CHECK(exponents_admissible(3, 0.8, e));
}

TEST_CASE("picked exponents are admissible across the interval, decay -> 0- at the threshold") {
    for (int d : {3, 4}) {
        const double lo = d / (d + 1.0), hi = std::min(1.0, d / 2.0);
        for (int i = 1; i <= 50; ++i) {
            const double s = lo + (hi - lo) * i / 51.0;
            const auto e = pick_exponents(d, s);
            std::string why;
            CHECK_MESSAGE(exponents_admissible(d, s, e, &why), "d=" << d << " s=" << s << ": " << why);
            const double diff = e.inv_p() - e.inv_q();
            CHECK(diff >= 2.0 / (d + 1) - 1e-14);
            CHECK(diff <= 2.0 * s / d + 1e-14);
            CHECK(e.inv_p() > (d + 1.0) / (2.0 * d));
            CHECK(e.inv_q() < (d - 1.0) / (2.0 * d));
            CHECK(e.decay == doctest::Approx(d * diff - 2 * s).epsilon(1e-12));
            CHECK(e.decay < 0.0);
        }
    }
    double prev = -INFINITY;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-6}) {
        const double dec = pick_exponents(3, 0.75 + eps).decay;
        CHECK(dec < 0.0);
        CHECK(dec > prev);
        prev = dec;
    }
    CHECK(prev > -1e-5);
}

TEST_CASE("exponent picker rejects out-of-range arguments and flags bad pairs") {
    CHECK_THROWS_AS(pick_exponents(2, 0.8), DomainError);
    CHECK_THROWS_AS(pick_exponents(3, 0.7), DomainError);
    CHECK_THROWS_AS(pick_exponents(3, 1.0), DomainError);
    std::string why;
    CHECK_FALSE(exponents_admissible(3, 0.8, LebesgueExponents{2.0, 4.0, 3 * 0.25 - 1.6}, &why));
    CHECK_FALSE(why.empty());
}

TEST_CASE("probe algebra for random orthogonal pairs") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 200; ++t) {
        const int d = 2 + t % 2;
        std::vector<double> m(static_cast<std::size_t>(d));
        for (double& v : m)
            v = 3.0 * nd(rng);
        const auto dir = orthogonal_direction(m);
        CHECK(std::abs(dot(dir, m)) <= 1e-12 * std::sqrt(dot(m, m)));
        CHECK(std::abs(dot(dir, dir) - 1.0) <= 1e-14);
        const double lmag = 5.0 + 20.0 * std::abs(nd(rng));
        const auto p = probe_geometry(m, lmag, dir);
        CHECK(std::abs(p.k * p.k - dot(m, m) - lmag * lmag) <= 1e-12 * p.k * p.k);
        CHECK(std::abs(dot(p.theta, p.theta) - 1.0) <= 1e-12);
        CHECK(std::abs(dot(p.xhat, p.xhat) - 1.0) <= 1e-12);
        for (std::size_t a = 0; a < m.size(); ++a) {
            CHECK(std::abs(p.rho[a] + p.k * p.theta[a] - 2.0 * m[a]) <= 1e-12 * p.k);
            CHECK(std::abs(p.k * (p.xhat[a] - p.theta[a]) + 2.0 * m[a]) <= 1e-12 * p.k);
        }
    }
}

TEST_CASE("probe triple for m = (1,0,0), |l| = 10 along e_2") {
    const std::vector<double> m{1.0, 0.0, 0.0}, dir{0.0, 1.0, 0.0};
    const auto p = probe_geometry(m, 10.0, dir);
    const double k = std::sqrt(101.0);
    CHECK(p.k == doctest::Approx(k).epsilon(1e-15));
    CHECK(p.theta[0] == doctest::Approx(1.0 / k).epsilon(1e-15));
    CHECK(p.theta[1] == doctest::Approx(-10.0 / k).epsilon(1e-15));
    CHECK(p.theta[2] == 0.0);
    CHECK(p.xhat[0] == doctest::Approx(-1.0 / k).epsilon(1e-15));
    CHECK(p.xhat[1] == doctest::Approx(-10.0 / k).epsilon(1e-15));
    const std::vector<double> bad{0.6, 0.8, 0.0};
    CHECK_THROWS_AS(probe_geometry(m, 10.0, bad), DomainError);
    const std::vector<double> not_unit{0.0, 2.0, 0.0};
    CHECK_THROWS_AS(probe_geometry(m, 10.0, not_unit), DomainError);
}

TEST_CASE("born_samples: V = 0 data and the xi = k(xhat - theta) mapping") {
    FarFieldSet ff;
    ff.meta.d = 3;
    const auto p = probe_geometry(std::vector<double>{0.5, -1.0, 0.25}, 7.0,
                                  orthogonal_direction(std::vector<double>{0.5, -1.0, 0.25}));
    ff.records.push_back({p.k, p.xhat, p.theta, cplx(0.0)});
    const auto s = born_samples(ff);
    REQUIRE(s.size() == 1);
    CHECK(s[0].value == cplx(0.0));
    CHECK(s[0].k_used == p.k);
    CHECK(std::abs(s[0].xi[0] + 1.0) <= 1e-12);
    CHECK(std::abs(s[0].xi[1] - 2.0) <= 1e-12);
    CHECK(std::abs(s[0].xi[2] + 0.5) <= 1e-12);
}

TEST_CASE("Born samples match the Fourier quadrature of a weak bump at large k") {
    const double k = 20.0, a = 0.5;
    const ProblemParams params{2, 0.8, k};
    const double h = 2.0 * pi / k / 8.0;
    const int n = 2 * static_cast<int>(std::ceil(a / h)) + 3;
    const auto V = PotentialGrid::centered(2, n, h, smooth_bump(0.5, a));
    CHECK(neumann_margin(LSOperator(V, params)) <= 0.05);
    std::vector<double> th, xs;
    // Frequencies inside the main lobe of the bump's transform (|xi| <= 2/a).
    for (double m0 : {0.0, 1.0, 1.75}) {
        const std::vector<double> m{m0, 0.5 * m0};
        const auto p = probe_geometry(m, std::sqrt(k * k - dot(m, m)), orthogonal_direction(m));
        th.insert(th.end(), p.theta.begin(), p.theta.end());
        xs.insert(xs.end(), p.xhat.begin(), p.xhat.end());
    }
    const auto samples = born_samples(synthesize_pairs(V, params, th, xs));
    for (const auto& s : samples) {
        const cplx ref = fourier_quadrature(V, s.xi);
        CHECK(std::abs(s.value - ref) <= 0.1 * std::abs(ref));
    }
}

TEST_CASE("reconstruction: exact lattice samples invert to the grid values") {
    const TargetGrid t{2, {-1.0, -0.75}, 0.125, {16, 12}};
    const auto V = random_on_target(t, 9);
    const auto samples = lattice_samples(V, t);
    for (bool sym : {false, true}) {
        ReconstructionOptions o;
        o.symmetrize = sym;
        const auto est = reconstruct_potential(samples, t, o);
        REQUIRE(est.size() == V.size());
        double worst = 0.0;
        for (std::size_t i = 0; i < V.size(); ++i)
            worst = std::max(worst, std::abs(est.samples[i] - V.samples[i]));
        CHECK(worst <= 1e-10);
    }
    // Quadrature helper agrees with the independent sum.
    CHECK(std::abs(fourier_quadrature(V, samples[37].xi) - samples[37].value) <= 1e-13);
}

TEST_CASE("reconstruction: zero data, linearity, coverage") {
    const TargetGrid t{2, {-1.0, -1.0}, 0.125, {16, 16}};
    auto zero = lattice_samples(random_on_target(t, 1), t);
    for (auto& s : zero)
        s.value = 0.0;
    const auto z = reconstruct_potential(zero, t);
    CHECK(z.max_abs() == 0.0);

    // Off-node samples exercise the window fit.
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3.0 * pi / 0.125 / 4, 3.0 * pi / 0.125 / 4);
    std::normal_distribution<double> nd;
    std::vector<FourierSample> a, b, c;
    for (int i = 0; i < 600; ++i) {
        const std::vector<double> xi{u(rng), u(rng)};
        const cplx va{nd(rng), nd(rng)}, vb{nd(rng), nd(rng)};
        a.push_back({xi, va, 0.0});
        b.push_back({xi, vb, 0.0});
        c.push_back({xi, 2.0 * va - 0.5 * vb, 0.0});
    }
    const auto ra = reconstruct_potential(a, t), rb = reconstruct_potential(b, t), rc = reconstruct_potential(c, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < rc.size(); ++i)
        worst = std::max(worst, std::abs(rc.samples[i] - (2.0 * ra.samples[i] - 0.5 * rb.samples[i])));
    CHECK(worst <= 1e-10 * std::max(1.0, rc.max_abs()));

    std::vector<FourierSample> sparse(a.begin(), a.begin() + 10);
    sparse.push_back({{60.0, 0.0}, cplx(1.0), 0.0});
    CHECK_THROWS_AS(reconstruct_potential(sparse, t), CoverageError);
}

TEST_CASE("Hermitian symmetrization leaves real-potential data unchanged") {
    const TargetGrid t{2, {-1.0, -1.0}, 0.125, {16, 16}};
    const auto V = random_on_target(t, 5);
    // Half-space samples plus their exact mirrors: symmetrizing only duplicates data.
    const auto full = lattice_samples(V, t);
    ReconstructionOptions off;
    off.symmetrize = false;
    const auto a = reconstruct_potential(full, t, off);
    const auto b = reconstruct_potential(full, t);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a.samples[i] - b.samples[i]));
    CHECK(worst <= 1e-12);
}

TEST_CASE("lattice probes at k = 40 reconstruct a d = 2 bump within 15%") {
    const double a = 0.5, amp = 0.5, k = 40.0;
    const int nt = 64;
    const double L = 4.0;
    const TargetGrid target{2, {-0.5 * L, -0.5 * L}, L / nt, {nt, nt}};
    const auto f = smooth_bump(amp, a);
    const auto truth = PotentialGrid::sample(2, target.origin, target.h, target.shape, f);
    const double h = std::min(2.0 * pi / k / 6.0, a / 8.0);
    const int n = 2 * static_cast<int>(std::ceil(a / h)) + 3;
    const auto V = PotentialGrid::centered(2, n, h, f);
    const auto samples = lattice_probe_samples(make_forward_oracle(V), ProblemParams{2, 0.8, k}, target);
    for (const auto& s : samples)
        CHECK(std::sqrt(dot(s.xi, s.xi)) <= 2.0 * k * (1 + 1e-12));
    const double err = relative_l2(reconstruct_potential(samples, target), truth);
    MESSAGE("relative L2 error " << err);
    CHECK(err <= 0.15);
}

TEST_CASE("convergence study: V = 0 gives zero errors; d = 2 reports no exponents") {
    const auto V = PotentialGrid::centered(2, 9, 0.1, [](std::span<const double>) { return 0.0; });
    const std::vector<std::vector<double>> ms{{1.0, 0.0}, {0.0, 2.0}};
    const std::vector<double> ls{5.0, 10.0};
    const auto st = convergence_study(V, 0.8, ms, ls, make_forward_oracle(V));
    REQUIRE(st.rows.size() == 2);
    for (const auto& r : st.rows) {
        CHECK_FALSE(r.failed);
        CHECK(r.err_abs == 0.0);
    }
}

TEST_CASE("convergence study marks failing rows and keeps going") {
    const auto V = PotentialGrid::centered(2, 9, 0.1, smooth_bump(0.3, 0.3));
    const std::vector<std::vector<double>> ms{{1.0, 0.0}};
    const std::vector<double> ls{5.0, 10.0, 20.0};
    const AmplitudeOracle flaky = [](const ProblemParams& p, std::span<const double>, std::span<const double>) {
        if (p.k > 15.0)
            throw NonConvergence("forward", "synthetic failure", 1.0);
        return cplx(0.01, 0.0);
    };
    const auto st = convergence_study(V, 0.8, ms, ls, flaky);
    REQUIRE(st.rows.size() == 3);
    CHECK_FALSE(st.rows[0].failed);
    CHECK_FALSE(st.rows[1].failed);
    CHECK(st.rows[2].failed);
    CHECK(st.rows[2].message.find("synthetic failure") != std::string::npos);
}
