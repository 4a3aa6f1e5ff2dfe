#include "fracscat/errors.hpp"
#include "fracscat/forward.hpp"
#include "fracscat/radiation.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace fracscat;
using std::numbers::pi;

namespace {

struct Solved {
    PotentialGrid V;
    std::unique_ptr<LSOperator> op;
    SolveResult sol;
};

Solved solve_small(const ProblemParams& p, double box_side) {
    const double a = 1.2, h = 2.0 * pi / p.k / 16.0;
    const int n = 2 * static_cast<int>(std::ceil(a / h)) + 3;
    Solved s{PotentialGrid::centered(2, n, h, smooth_bump(0.3, a)), nullptr, {}};
    s.op = std::make_unique<LSOperator>(s.V, p, QuadratureSpec{}, box_side);
    s.sol = solve_total_field(*s.op, incident_field(p, IncidentSource::plane({1.0, 0.0}), s.V));
    return s;
}

} // namespace

TEST_CASE("zero field has zero residual at every radius") {
    const ProblemParams p{2, 0.8, 1.0};
    const PeriodicGrid box{2, 128, 100.0, false};
    const std::vector<double> radii{5.0, 10.0, 20.0};
    const FieldSampler zero = [](std::span<const double>, std::span<cplx> out) {
        for (auto& v : out)
            v = 0.0;
    };
    const auto r = radiation_residual(p, zero, box, radii);
    for (double v : r.residual)
        CHECK(v == 0.0);
    CHECK_FALSE(r.aliasing_warning);
}

TEST_CASE("outgoing residual decreases with R and stays below the incoming branch") {
    const double k = 1.0;
    const double hb = 2.0 * pi / k / 8.0;
    const PeriodicGrid box{2, 256, 256 * hb, false};
    const std::vector<double> radii{10.0 / k, 20.0 / k, 40.0 / k};
    std::vector<std::vector<double>> res;
    for (Branch b : {Branch::outgoing, Branch::incoming}) {
        const ProblemParams p{2, 0.8, k, b};
        const auto s = solve_small(p, box.L);
        const auto r = radiation_residual(p, scattered_sampler(*s.op, s.sol.total), box, radii);
        res.push_back(r.residual);
    }
    MESSAGE("outgoing " << res[0][0] << " " << res[0][1] << " " << res[0][2]);
    MESSAGE("incoming " << res[1][0] << " " << res[1][1] << " " << res[1][2]);
    CHECK(res[0][1] <= res[0][0]);
    CHECK(res[0][2] <= res[0][1]);
    for (int i = 0; i < 3; ++i)
        CHECK(res[1][i] > res[0][i]);
}

TEST_CASE("sampler agrees with the representation formula away from the support") {
    const ProblemParams p{2, 0.8, 1.0};
    const auto s = solve_small(p, 50.0);
    const std::vector<double> pts{5.0, 0.0, -3.3, 7.1, 0.25, -12.0};
    std::vector<cplx> got(3);
    scattered_sampler(*s.op, s.sol.total)(pts, got);
    const auto ref = evaluate_scattered_at(*s.op, s.sol.total, pts);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(std::abs(got[i] - ref.values[i]) <= 1e-12 * std::abs(ref.values[i]));
}

TEST_CASE("energy concentrated at the box frame raises the aliasing warning") {
    const ProblemParams p{2, 0.8, 1.0};
    const PeriodicGrid box{2, 128, 100.0, false};
    const std::vector<double> radii{5.0, 10.0};
    const FieldSampler edge = [](std::span<const double> x, std::span<cplx> out) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double linf = std::max(std::abs(x[2 * i]), std::abs(x[2 * i + 1]));
            out[i] = std::exp(-0.5 * (linf - 46.0) * (linf - 46.0)) + 1e-6;
        }
    };
    const auto r = radiation_residual(p, edge, box, radii);
    CHECK(r.boundary_ratio > 0.01);
    CHECK(r.aliasing_warning);

    // A plane wave is tapered away before it reaches the frame.
    const FieldSampler wave = [](std::span<const double> x, std::span<cplx> out) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = std::polar(1.0, x[2 * i]);
    };
    CHECK_FALSE(radiation_residual(p, wave, box, radii).aliasing_warning);
}

TEST_CASE("radius and resolution preconditions") {
    const ProblemParams p{2, 0.8, 1.0};
    const FieldSampler zero = [](std::span<const double>, std::span<cplx> out) {
        for (auto& v : out)
            v = 0.0;
    };
    const PeriodicGrid box{2, 128, 100.0, false};
    CHECK_THROWS_AS(radiation_residual(p, zero, box, std::vector<double>{30.0}), DomainError);
    CHECK_THROWS_AS(radiation_residual(p, zero, box, std::vector<double>{10.0, 5.0}), DomainError);
    const PeriodicGrid coarse{2, 32, 100.0, false};
    CHECK_THROWS_AS(radiation_residual(p, zero, coarse, std::vector<double>{10.0}), ResolutionError);
}
